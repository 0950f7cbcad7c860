from __future__ import annotations

import json
import math
import random

import pytest

import oracles
from blockplace import solve, solve_bnb, solve_exhaustive
from blockplace.analysis import BlockParams, PlacementProblem
from blockplace.errors import SolverError
from blockplace.gen import random_problem
from blockplace.ilpmodel import SolveConstraints
from blockplace.solver import placement_from_json, solution_to_dict, solution_to_json

LOOP3_CASES = [
    (SolveConstraints(28, math.inf), {"entry", "loop", "exit"}, 354),
    (SolveConstraints(20, math.inf), {"loop", "exit"}, 358),
    (SolveConstraints(28, 1.1), {"entry"}, 607),
    (SolveConstraints(0, math.inf), set(), 608),
]


class TestExhaustive:
    @pytest.mark.parametrize("c,ram,energy", LOOP3_CASES)
    def test_loop3(self, loop3, c, ram, energy):
        sol = solve_exhaustive(loop3, c)
        assert set(sol.in_ram) == ram
        assert sol.energy == energy
        assert sol.nodes_explored == 8

    def test_loop3_time_bound_details(self, loop3):
        sol = solve_exhaustive(loop3, SolveConstraints(28, 1.1))
        assert sol.metrics.cycles == 610

    def test_limit(self):
        prob = random_problem(random.Random(0), k=6)
        with pytest.raises(SolverError):
            solve_exhaustive(prob, max_blocks=5)

    def test_tie_break_prefers_fewer_bytes_then_earlier_blocks(self):
        # two identical isolated blocks but b is smaller; then two identical blocks
        blocks = (
            BlockParams("a", 8, 4, 1, 0, 0, 0, ()),
            BlockParams("b", 4, 4, 1, 0, 0, 0, ()),
        )
        prob = PlacementProblem(blocks, 8, math.inf)
        assert solve_exhaustive(prob).in_ram == {"b"}
        assert solve_bnb(prob).in_ram == {"b"}
        same = (BlockParams("a", 4, 4, 1, 0, 0, 0, ()), BlockParams("b", 4, 4, 1, 0, 0, 0, ()))
        prob = PlacementProblem(same, 4, math.inf)
        assert solve_exhaustive(prob).in_ram == {"a"}
        assert solve_bnb(prob).in_ram == {"a"}


class TestBnb:
    @pytest.mark.parametrize("c,ram,energy", LOOP3_CASES)
    def test_loop3(self, loop3, c, ram, energy):
        sol = solve_bnb(loop3, c)
        assert set(sol.in_ram) == ram
        assert sol.energy == energy
        assert sol.optimal

    def test_random_matches_exhaustive(self):
        rng = random.Random(12)
        for _ in range(150):
            prob = random_problem(rng, max_blocks=12)
            bnb, ex = solve_bnb(prob), solve_exhaustive(prob)
            assert bnb.energy == ex.energy
            assert bnb.in_ram == ex.in_ram

    def test_random_matches_oracle(self):
        rng = random.Random(13)
        for _ in range(60):
            prob = random_problem(rng, max_blocks=8)
            assert solve_bnb(prob).energy == oracles.best_energy(prob, prob.r_spare, prob.x_limit)

    def test_ram_not_cheaper_stays_in_flash(self):
        rng = random.Random(14)
        for _ in range(20):
            prob = random_problem(rng, max_blocks=10, constrained=False)
            prob = PlacementProblem(prob.blocks, math.inf, math.inf, 1.0, 1.0 + rng.randint(0, 32) / 32)
            assert solve_bnb(prob).in_ram == frozenset()

    def test_prunes(self):
        prob = random_problem(random.Random(15), k=16, constrained=False)
        sol = solve_bnb(prob, SolveConstraints(40, 1.2))
        assert sol.nodes_explored < 2 ** 17

    def test_larger_than_exhaustive_limit(self):
        rng = random.Random(16)
        prob = random_problem(rng, k=30, constrained=False)
        sol = solve_bnb(prob, SolveConstraints(60, 1.3))
        assert sol.metrics.ram_bytes <= 60

    def test_dispatch(self, loop3):
        assert solve(loop3, method="exhaustive").energy == solve(loop3).energy
        with pytest.raises(SolverError):
            solve(loop3, method="simplex")


class TestPlacementJson:
    def test_round_trip(self, loop3):
        sol = solve(loop3, SolveConstraints(20, math.inf))
        text = solution_to_json(loop3, sol)
        assert set(placement_from_json(text)) == sol.in_ram
        doc = json.loads(text)
        assert doc["in_ram"] == ["loop", "exit"]
        assert doc["instrumented"] == ["entry"]
        assert doc["energy"] == 358
        assert doc == solution_to_dict(loop3, sol)

    @pytest.mark.parametrize("text", ["{", "{}", '{"in_ram": "loop"}', '{"in_ram": [1]}'])
    def test_rejects(self, text):
        with pytest.raises(SolverError):
            placement_from_json(text)

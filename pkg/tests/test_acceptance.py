"""Acceptance gate.  Each test is one criterion; a summary line per criterion
is printed at the end of the pytest run."""

from __future__ import annotations

import math
import random
import time

import pytest

import oracles
from blockplace import (
    CaseStudyParams,
    apply_placement,
    battery_extension,
    benchmarks,
    build_ilp,
    default_hw,
    energy_saved,
    evaluate_assignment,
    extract_problem,
    measure_image,
    period_energy,
    profile_frequencies,
    simulate,
    solve,
    solve_bnb,
    solve_exhaustive,
    sweep_constraint,
    enumerate_space,
    validate_dominance,
)
from blockplace.analysis import Static
from blockplace.gen import random_problem, random_program
from blockplace.ilpmodel import SolveConstraints, induced_assignment, is_feasible
from blockplace.tradeoff import cluster_points, dominant_blocks, dominates

NODE = CaseStudyParams(e0=16.9e-3, t_a=1.18, p_s=3.5e-3, k_e=0.825, k_t=1.33)


def _random_params(rng):
    return CaseStudyParams(
        e0=rng.uniform(0, 1),
        t_a=rng.uniform(1e-3, 10),
        p_s=rng.uniform(0, 1e-1),
        k_e=rng.uniform(0.05, 2),
        k_t=rng.uniform(0.05, 3),
    )


def _program_corpus(n, seed):
    """``n`` (program, R) pairs; R is a random subset of the program's blocks."""
    rng = random.Random(seed)
    hw = default_hw()
    out = []
    for _ in range(n):
        p = random_program(rng)
        ids = extract_problem(p, hw).ids
        R = [b for b in ids if rng.random() < 0.5]
        out.append((p, R))
    return out


def test_criterion_01_case_study_exactness():
    t0 = time.perf_counter()
    saved = energy_saved(NODE)
    elapsed = time.perf_counter() - t0
    assert saved == pytest.approx(4.32e-3, abs=0.005e-3)
    assert elapsed < 1e-3


def test_criterion_02_battery_headline():
    T = NODE.k_t * NODE.t_a
    assert battery_extension(NODE, T) == pytest.approx(0.31, abs=0.02)
    plain, opt = oracles.case_energies(16.9e-3, 1.18, 3.5e-3, 0.825, 1.33, T)
    reduction = 1 - period_energy(NODE, T, True) / period_energy(NODE, T, False)
    assert reduction == pytest.approx(0.237, abs=0.02)
    assert reduction == pytest.approx(1 - opt / plain, rel=1e-12)


def test_criterion_03_saved_energy_identity():
    rng = random.Random(3)
    t0 = time.perf_counter()
    for _ in range(1000):
        params = _random_params(rng)
        T = max(params.t_a, params.k_t * params.t_a) * rng.uniform(1, 5)
        plain = period_energy(params, T, False)
        opt = period_energy(params, T, True)
        es = energy_saved(params)
        scale = max(abs(plain), abs(opt), abs(es), 1e-300)
        assert abs((plain - opt) - es) <= 1e-12 * scale
    assert time.perf_counter() - t0 < 1.0


def test_criterion_04_solver_optimality():
    rng = random.Random(4)
    t0 = time.perf_counter()
    for _ in range(200):
        prob = random_problem(rng, max_blocks=12)
        bnb = solve_bnb(prob)
        ex = solve_exhaustive(prob)
        assert bnb.energy == ex.energy
        if len(prob) <= 8:
            assert bnb.energy == oracles.best_energy(prob, prob.r_spare, prob.x_limit)
    assert time.perf_counter() - t0 < 60


def test_criterion_05_linearization_exactness():
    rng = random.Random(5)
    for _ in range(50):
        prob = random_problem(rng, max_blocks=10)
        c = SolveConstraints.from_problem(prob)
        model = build_ilp(prob, c)
        ids = prob.ids
        names = {con.name for con in model.constraints}
        for mask in range(1 << len(ids)):
            R = [ids[i] for i in range(len(ids)) if mask >> i & 1]
            values = induced_assignment(prob, R)
            m = evaluate_assignment(prob, R)
            assert model.objective_value(values) == m.energy == oracles.energy(prob, R)
            structural = [n for n in model.violated(values) if n not in ("ram", "time")]
            assert structural == []
            ram_ok = model.constraint("ram").holds(values) if "ram" in names else True
            time_ok = model.constraint("time").holds(values) if "time" in names else True
            assert ram_ok == (m.ram_bytes <= c.r_spare)
            assert (ram_ok and time_ok) == is_feasible(m, c)


@pytest.mark.parametrize(
    "r_spare,x_limit,energy,in_ram",
    [
        (28, math.inf, 354, None),
        (20, math.inf, 358, {"loop", "exit"}),
        (28, 1.1, 607, {"entry"}),
        (0, math.inf, 608, set()),
    ],
)
def test_criterion_06_loop3_regression(loop3, r_spare, x_limit, energy, in_ram):
    for method in ("bnb", "exhaustive"):
        sol = solve(loop3, SolveConstraints(r_spare, x_limit), method)
        assert sol.energy == energy
        if in_ram is not None:
            assert set(sol.in_ram) == in_ram


def test_criterion_07_semantic_preservation():
    hw = default_hw()
    t0 = time.perf_counter()
    for p, R in _program_corpus(100, seed=7):
        before = simulate(p, hw)
        after = simulate(apply_placement(p, R, hw)[0], hw)
        assert after.trace == before.trace
        assert after.final_memory == before.final_memory
    assert time.perf_counter() - t0 < 30


def test_criterion_08_model_dominance():
    hw = default_hw()
    assert validate_dominance(hw) == []
    for p, R in _program_corpus(100, seed=7):
        profile = profile_frequencies(simulate(p, hw))
        prob = extract_problem(p, hw, profile)
        predicted = evaluate_assignment(prob, R).cycles
        measured = simulate(apply_placement(p, R, hw)[0], hw).cycles
        assert measured <= predicted


def test_criterion_09_monotonicity():
    rng = random.Random(9)
    for _ in range(20):
        prob = random_problem(rng, max_blocks=10, constrained=False)
        total = sum(b.size + b.instr_size for b in prob.blocks)
        rams = sorted({rng.randint(0, total) for _ in range(6)} | {0, total})
        energies = [s.energy for _, s in sweep_constraint(prob, "ram", rams)]
        assert all(a >= b for a, b in zip(energies, energies[1:]))
        xs = sorted({1 + rng.randint(0, 40) / 20 for _ in range(6)} | {1.0, math.inf})
        energies = [s.energy for _, s in sweep_constraint(prob, "time", xs, r_spare=rng.randint(0, total))]
        assert all(a >= b for a, b in zip(energies, energies[1:]))


def test_criterion_10_tradeoff_space_shape():
    hw = default_hw()
    prob = extract_problem(benchmarks.load("mm3"), hw)
    points = enumerate_space(prob)
    hot = dominant_blocks(prob, 3)
    assert len(cluster_points(points, hot)) == 8
    total = sum(b.size + b.instr_size for b in prob.blocks)
    paths = {
        "ram": [SolveConstraints(r, math.inf) for r in range(0, total + 1, 2)],
        "time": [SolveConstraints(math.inf, 1 + i / 40) for i in range(41)],
    }
    by_set = {p.subset: p for p in points}
    for constraints in paths.values():
        energies = []
        for c in constraints:
            sol = solve(prob, c)
            energies.append(sol.energy)
            chosen = by_set[frozenset(sol.in_ram)]
            feasible = [q for q in points if q.feasible(c)]
            assert not any(dominates(q, chosen) for q in feasible)
        assert all(a >= b for a, b in zip(energies, energies[1:]))
        assert energies[0] > energies[-1]


@pytest.mark.parametrize("name", benchmarks.SUITE)
def test_criterion_11_directional_energy(name):
    hw = default_hw()
    program = benchmarks.load(name)
    assert max(extract_problem(program, hw).blocks, key=lambda b: b.freq).freq >= 10
    flash, _ = measure_image(program, hw)
    prob = extract_problem(program, hw, Static(10), r_spare=0.25 * flash, x_limit=1.33)
    sol = solve(prob)
    baseline = evaluate_assignment(prob, ())
    assert sol.energy < baseline.energy
    assert sol.metrics.time_factor <= 1.33

"""Exact minimum-energy placement search.

Both solvers work on the combinatorial model (:func:`evaluate_assignment`)
and break ties among equal-energy optima the same way: fewer RAM bytes first,
then the lexicographically smallest set of block indices.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .analysis import PlacementProblem
from .errors import SolverError
from .ilpmodel import ModelMetrics, SolveConstraints, evaluate_assignment, is_feasible

EXHAUSTIVE_LIMIT = 25


@dataclass(frozen=True)
class PlacementSolution:
    in_ram: frozenset
    metrics: ModelMetrics
    optimal: bool = True
    nodes_explored: int = 0

    @property
    def energy(self):
        return self.metrics.energy


def _key(problem: PlacementProblem, m: ModelMetrics):
    return (m.energy, m.ram_bytes, tuple(sorted(problem.index(b) for b in m.in_ram)))


def solve_exhaustive(
    problem: PlacementProblem,
    c: SolveConstraints | None = None,
    max_blocks: int = EXHAUSTIVE_LIMIT,
) -> PlacementSolution:
    """Enumerate every subset of blocks and keep the best feasible one."""
    c = SolveConstraints.from_problem(problem) if c is None else c
    k = len(problem)
    if k > max_blocks:
        raise SolverError(f"{k} blocks exceeds the exhaustive limit of {max_blocks}")
    ids = problem.ids
    best, best_key = None, None
    for mask in range(1 << k):
        R = [ids[i] for i in range(k) if mask >> i & 1]
        m = evaluate_assignment(problem, R)
        if not is_feasible(m, c):
            continue
        key = _key(problem, m)
        if best_key is None or key < best_key:
            best, best_key = m, key
    return PlacementSolution(best.in_ram, best, True, 1 << k)


class _Search:
    def __init__(self, problem: PlacementProblem, c: SolveConstraints):
        self.problem = problem
        self.c = c
        ef, er = problem.e_flash, problem.e_ram
        blocks = problem.blocks
        k = len(blocks)
        self.k = k
        self.delta = [b.freq * (b.cycles * (er - ef) + b.stall * er) for b in blocks]
        self.inst_energy = [(b.freq * b.instr_cycles * ef, b.freq * b.instr_cycles * er) for b in blocks]
        self.succ = [[problem.index(s) for s in b.succ] for b in blocks]
        self.preds = [[] for _ in range(k)]
        for i, ss in enumerate(self.succ):
            for s in ss:
                if s != i:
                    self.preds[s].append(i)
        self.order = sorted(range(k), key=lambda i: (-abs(blocks[i].freq * blocks[i].cycles * (er - ef)), i))

        baseline = sum(b.freq * b.cycles for b in blocks)
        if c.x_limit == math.inf:
            self.time_budget = math.inf
        else:
            budget = (c.x_limit - 1) * baseline
            self.time_budget = budget + 1e-9 * max(1.0, abs(budget))

        self.assign = [None] * k
        self.flagged = [False] * k
        self.committed = sum(b.freq * b.cycles * ef for b in blocks)
        self.optimistic = sum(min(0, d) for d in self.delta)
        self.ram = 0
        self.time = 0
        self.nodes = 0

        empty = evaluate_assignment(problem, ())
        self.best = empty if is_feasible(empty, c) else None
        self.best_key = _key(problem, empty) if self.best is not None else None

    def _flag(self, i, undo):
        b = self.problem.blocks[i]
        self.flagged[i] = True
        r = self.assign[i]
        self.committed += self.inst_energy[i][r]
        self.time += b.freq * b.instr_cycles
        if r:
            self.ram += b.instr_size
        undo.append(i)

    def _unflag(self, i):
        b = self.problem.blocks[i]
        self.flagged[i] = False
        r = self.assign[i]
        self.committed -= self.inst_energy[i][r]
        self.time -= b.freq * b.instr_cycles
        if r:
            self.ram -= b.instr_size

    def _set(self, j, r, undo):
        b = self.problem.blocks[j]
        self.assign[j] = r
        self.optimistic -= min(0, self.delta[j])
        if r:
            self.committed += self.delta[j]
            self.ram += b.size
            self.time += b.freq * b.stall
        if any(self.assign[s] is not None and self.assign[s] != r for s in self.succ[j]):
            self._flag(j, undo)
        for p in self.preds[j]:
            if self.assign[p] is not None and not self.flagged[p] and self.assign[p] != r:
                self._flag(p, undo)

    def _unset(self, j, undo):
        b = self.problem.blocks[j]
        for i in reversed(undo):
            self._unflag(i)
        r = self.assign[j]
        if r:
            self.committed -= self.delta[j]
            self.ram -= b.size
            self.time -= b.freq * b.stall
        self.optimistic += min(0, self.delta[j])
        self.assign[j] = None

    def _pruned(self) -> bool:
        if self.ram > self.c.r_spare or self.time > self.time_budget:
            return True
        if self.best is None:
            return False
        bound = self.committed + self.optimistic
        eps = 1e-9 * max(1.0, abs(self.best.energy))
        return bound > self.best.energy + eps

    def run(self, depth=0):
        self.nodes += 1
        if self._pruned():
            return
        if depth == self.k:
            R = [self.problem.blocks[i].id for i in range(self.k) if self.assign[i]]
            m = evaluate_assignment(self.problem, R)
            if is_feasible(m, self.c):
                key = _key(self.problem, m)
                if self.best_key is None or key < self.best_key:
                    self.best, self.best_key = m, key
            return
        j = self.order[depth]
        for r in ((1, 0) if self.delta[j] < 0 else (0, 1)):
            undo: list[int] = []
            self._set(j, r, undo)
            self.run(depth + 1)
            self._unset(j, undo)


def solve_bnb(problem: PlacementProblem, c: SolveConstraints | None = None) -> PlacementSolution:
    """Depth-first branch and bound over the RAM decision of each block.

    Blocks are decided in order of decreasing potential saving.  The bound adds
    to the committed energy the most negative saving each undecided block could
    still contribute, ignoring instrumentation it might trigger.
    """
    c = SolveConstraints.from_problem(problem) if c is None else c
    search = _Search(problem, c)
    search.run()
    if search.best is None:
        raise SolverError("no feasible placement")
    return PlacementSolution(search.best.in_ram, search.best, True, search.nodes)


def solve(problem: PlacementProblem, c: SolveConstraints | None = None, method: str = "bnb") -> PlacementSolution:
    if method == "bnb":
        return solve_bnb(problem, c)
    if method == "exhaustive":
        return solve_exhaustive(problem, c)
    raise SolverError(f"unknown solver {method!r}")


# --------------------------------------------------------------------------
# placement.json


def solution_to_dict(problem: PlacementProblem, sol: PlacementSolution) -> dict:
    m = sol.metrics
    order = problem.ids
    return {
        "in_ram": [b for b in order if b in sol.in_ram],
        "energy": m.energy,
        "cycles": m.cycles,
        "baseline_cycles": m.baseline_cycles,
        "time_factor": m.time_factor,
        "ram_bytes": m.ram_bytes,
        "instrumented": [b for b in order if b in m.instrumented],
        "optimal": sol.optimal,
        "nodes_explored": sol.nodes_explored,
    }


def solution_to_json(problem: PlacementProblem, sol: PlacementSolution) -> str:
    return json.dumps(solution_to_dict(problem, sol), indent=2)


def placement_from_json(text: str) -> list[str]:
    """The RAM set stored in a placement document."""
    try:
        doc = json.loads(text)
        ram = doc["in_ram"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise SolverError(f"malformed placement document: {exc}") from exc
    if not isinstance(ram, list) or not all(isinstance(b, str) for b in ram):
        raise SolverError("in_ram must be a list of block ids")
    return ram

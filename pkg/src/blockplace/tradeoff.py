"""Exploration of the full placement space: enumeration, Pareto fronts,
constraint sweeps, and grouping by the placement of the dominant blocks."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from itertools import groupby

from .analysis import PlacementProblem
from .errors import SolverError
from .ilpmodel import SolveConstraints, evaluate_assignment
from .solver import PlacementSolution, solve

DEFAULT_MAX_BLOCKS = 20


@dataclass(frozen=True)
class SpacePoint:
    subset: frozenset
    mask: int
    energy: float
    cycles: float
    ram_bytes: float
    feasible_ram: bool
    time_factor: float
    baseline_cycles: float

    def feasible(self, c: SolveConstraints) -> bool:
        if self.ram_bytes > c.r_spare:
            return False
        if c.x_limit == math.inf:
            return True
        return self.cycles - self.baseline_cycles <= (c.x_limit - 1) * self.baseline_cycles


def enumerate_space(
    problem: PlacementProblem, max_blocks: int = DEFAULT_MAX_BLOCKS, r_spare: float | None = None
) -> list[SpacePoint]:
    """All ``2**k`` placements in binary-counter order (bit ``i`` = block ``i``)."""
    k = len(problem)
    if k > max_blocks:
        raise SolverError(f"{k} blocks exceeds the enumeration limit of {max_blocks}")
    r_spare = problem.r_spare if r_spare is None else r_spare
    ids = problem.ids
    points = []
    for mask in range(1 << k):
        m = evaluate_assignment(problem, [ids[i] for i in range(k) if mask >> i & 1])
        points.append(
            SpacePoint(m.in_ram, mask, m.energy, m.cycles, m.ram_bytes,
                       m.ram_bytes <= r_spare, m.time_factor, m.baseline_cycles)
        )
    return points


def dominates(q: SpacePoint, p: SpacePoint) -> bool:
    """Better or equal in energy and cycles and strictly better in one; on an
    exact (energy, cycles) tie, fewer RAM bytes wins."""
    if q.energy <= p.energy and q.cycles <= p.cycles and (q.energy < p.energy or q.cycles < p.cycles):
        return True
    return q.energy == p.energy and q.cycles == p.cycles and q.ram_bytes < p.ram_bytes


def pareto_front(points: list[SpacePoint]) -> list[SpacePoint]:
    if not points:
        raise ValueError("pareto_front needs at least one point")
    ordered = sorted(points, key=lambda p: (p.energy, p.cycles, p.ram_bytes, p.mask))
    front = []
    best_lower = math.inf  # fewest cycles among points with strictly lower energy
    for _, group in groupby(ordered, key=lambda p: p.energy):
        group = list(group)
        min_c, min_ram = group[0].cycles, group[0].ram_bytes
        for p in group:
            if best_lower <= p.cycles or p.cycles > min_c:
                continue
            if p.ram_bytes > min_ram:
                continue
            front.append(p)
        best_lower = min(best_lower, min_c)
    return front


def sweep_constraint(
    problem: PlacementProblem,
    which: str,
    values,
    *,
    r_spare: float = math.inf,
    x_limit: float = math.inf,
    method: str = "bnb",
) -> list[tuple[float, PlacementSolution]]:
    """Solve once per value of the swept constraint; the other one is fixed
    (unbounded unless given)."""
    values = list(values)
    if which not in ("ram", "time"):
        raise ValueError(f"which must be 'ram' or 'time', not {which!r}")
    if values != sorted(values):
        raise ValueError("sweep values must be ascending")
    out = []
    for v in values:
        c = SolveConstraints(v, x_limit) if which == "ram" else SolveConstraints(r_spare, v)
        out.append((v, solve(problem, c, method)))
    return out


def dominant_blocks(problem: PlacementProblem, n: int = 3) -> list[str]:
    """The ``n`` blocks with the largest execution weight ``F * C``."""
    order = sorted(range(len(problem)), key=lambda i: (-problem.blocks[i].freq * problem.blocks[i].cycles, i))
    return [problem.blocks[i].id for i in order[:n]]


def cluster_points(points: list[SpacePoint], blocks: list[str]) -> dict[int, list[SpacePoint]]:
    """Group points by which of ``blocks`` are in RAM (bit ``j`` = ``blocks[j]``)."""
    clusters: dict[int, list[SpacePoint]] = {}
    for p in points:
        key = sum(1 << j for j, b in enumerate(blocks) if b in p.subset)
        clusters.setdefault(key, []).append(p)
    return dict(sorted(clusters.items()))


# --------------------------------------------------------------------------
# CSV


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if v == math.inf:
        return "inf"
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return repr(v) if isinstance(v, float) else str(v)


def space_to_csv(points: list[SpacePoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["subset_bitmask", "energy", "cycles", "time_factor", "ram_bytes", "feasible_ram"])
    for p in points:
        w.writerow([p.mask, _fmt(p.energy), _fmt(p.cycles), _fmt(p.time_factor), _fmt(p.ram_bytes), _fmt(p.feasible_ram)])
    return buf.getvalue()


def sweep_to_csv(problem: PlacementProblem, which: str, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([which, "subset_bitmask", "in_ram", "energy", "cycles", "time_factor", "ram_bytes"])
    for v, sol in rows:
        m = sol.metrics
        mask = sum(1 << problem.index(b) for b in sol.in_ram)
        ram = " ".join(b for b in problem.ids if b in sol.in_ram)
        w.writerow([_fmt(v), mask, ram, _fmt(m.energy), _fmt(m.cycles), _fmt(m.time_factor), _fmt(m.ram_bytes)])
    return buf.getvalue()

"""Placement cost model: direct evaluation and 0-1 linear formulation.

For a RAM set ``R`` a block is *instrumented* when it and some successor sit
in different memories.  Its energy is::

    (C + T*[instrumented] + L*[in RAM]) * (e_ram if in RAM else e_flash) * F

The linear form uses three binaries per block: ``r`` (in RAM), ``i``
(instrumented) and ``y = i AND r``.  Expanding the product above with
``r*r = r`` gives the objective::

    sum F*C*e_flash
  + sum F*(C*(e_ram - e_flash) + L*e_ram) * r
  + sum F*T*e_flash * i
  + sum F*T*(e_ram - e_flash) * y

``i`` is bounded below by ``|r_b - r_s|`` on every edge and pushed down by the
objective; ``y`` is pinned to ``i AND r`` by the usual three inequalities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .analysis import PlacementProblem
from .errors import ModelError


@dataclass(frozen=True)
class SolveConstraints:
    r_spare: float = math.inf
    x_limit: float = math.inf

    def __post_init__(self):
        if self.r_spare < 0:
            raise ModelError("r_spare must be >= 0")
        if self.x_limit < 1:
            raise ModelError("x_limit must be >= 1")

    @classmethod
    def from_problem(cls, problem: PlacementProblem) -> SolveConstraints:
        return cls(problem.r_spare, problem.x_limit)


@dataclass(frozen=True)
class ModelMetrics:
    energy: float
    cycles: float
    baseline_cycles: float
    time_factor: float
    ram_bytes: float
    instrumented: frozenset
    in_ram: frozenset

    @property
    def overhead_cycles(self):
        return self.cycles - self.baseline_cycles


def _resolve(problem: PlacementProblem, R: Iterable[str]) -> frozenset:
    R = frozenset(R)
    unknown = [b for b in R if b not in problem._index]
    if unknown:
        raise ModelError(f"unknown block id(s): {sorted(unknown)}")
    return R


def instrumented_set(problem: PlacementProblem, R: Iterable[str]) -> frozenset:
    """Blocks with at least one successor in the other memory."""
    R = _resolve(problem, R)
    return frozenset(
        b.id for b in problem.blocks if any((b.id in R) != (s in R) for s in b.succ)
    )


def evaluate_assignment(problem: PlacementProblem, R: Iterable[str]) -> ModelMetrics:
    R = _resolve(problem, R)
    inst = instrumented_set(problem, R)
    energy = cycles = baseline = ram = 0
    for b in problem.blocks:
        in_ram = b.id in R
        c = b.cycles
        if b.id in inst:
            c += b.instr_cycles
        if in_ram:
            c += b.stall
        energy += c * (problem.e_ram if in_ram else problem.e_flash) * b.freq
        cycles += c * b.freq
        baseline += b.cycles * b.freq
        if in_ram:
            ram += b.size + (b.instr_size if b.id in inst else 0)
    if baseline:
        factor = cycles / baseline
    else:
        factor = 1.0 if cycles == 0 else math.inf
    return ModelMetrics(energy, cycles, baseline, factor, ram, inst, R)


def is_feasible(m: ModelMetrics, c: SolveConstraints) -> bool:
    """RAM and time limits, the latter in the form ``overhead <= (x - 1) * baseline``."""
    if m.ram_bytes > c.r_spare:
        return False
    if c.x_limit == math.inf:
        return True
    return m.overhead_cycles <= (c.x_limit - 1) * m.baseline_cycles


# --------------------------------------------------------------------------
# linear model


@dataclass(frozen=True)
class LinearConstraint:
    name: str
    terms: tuple[tuple[str, float], ...]
    sense: str  # "<=" or ">="
    rhs: float

    def lhs(self, values: Mapping[str, int]):
        return sum(coef * values[v] for v, coef in self.terms)

    def holds(self, values: Mapping[str, int]) -> bool:
        lhs = self.lhs(values)
        return lhs <= self.rhs if self.sense == "<=" else lhs >= self.rhs


@dataclass(frozen=True)
class LinearModel:
    variables: tuple[str, ...]
    constant: float
    objective: tuple[tuple[str, float], ...]
    constraints: tuple[LinearConstraint, ...]

    def objective_value(self, values: Mapping[str, int]):
        total = self.constant
        for v, coef in self.objective:
            total += coef * values[v]
        return total

    def constraint(self, name: str) -> LinearConstraint:
        for c in self.constraints:
            if c.name == name:
                return c
        raise KeyError(name)

    def violated(self, values: Mapping[str, int]) -> list[str]:
        return [c.name for c in self.constraints if not c.holds(values)]


def induced_assignment(problem: PlacementProblem, R: Iterable[str]) -> dict[str, int]:
    """Binary values of r, i, y for the RAM set ``R``."""
    R = _resolve(problem, R)
    inst = instrumented_set(problem, R)
    values = {}
    for b in problem.blocks:
        r, i = int(b.id in R), int(b.id in inst)
        values[f"r_{b.id}"] = r
        values[f"i_{b.id}"] = i
        values[f"y_{b.id}"] = r & i
    return values


def build_ilp(problem: PlacementProblem, c: SolveConstraints | None = None) -> LinearModel:
    c = SolveConstraints.from_problem(problem) if c is None else c
    ef, er = problem.e_flash, problem.e_ram
    variables, objective, cons = [], [], []
    constant = 0
    for b in problem.blocks:
        r, i, y = f"r_{b.id}", f"i_{b.id}", f"y_{b.id}"
        variables += [r, i, y]
        constant += b.freq * b.cycles * ef
        objective.append((r, b.freq * (b.cycles * (er - ef) + b.stall * er)))
        objective.append((i, b.freq * b.instr_cycles * ef))
        objective.append((y, b.freq * b.instr_cycles * (er - ef)))

    for b in problem.blocks:
        r, i, y = f"r_{b.id}", f"i_{b.id}", f"y_{b.id}"
        for s in b.succ:
            if s == b.id:
                continue
            rs = f"r_{s}"
            cons.append(LinearConstraint(f"inst_{b.id}_{s}_a", ((i, 1), (r, -1), (rs, 1)), ">=", 0))
            cons.append(LinearConstraint(f"inst_{b.id}_{s}_b", ((i, 1), (r, 1), (rs, -1)), ">=", 0))
        cons.append(LinearConstraint(f"and_{b.id}_i", ((y, 1), (i, -1)), "<=", 0))
        cons.append(LinearConstraint(f"and_{b.id}_r", ((y, 1), (r, -1)), "<=", 0))
        cons.append(LinearConstraint(f"and_{b.id}_lo", ((y, 1), (i, -1), (r, -1)), ">=", -1))

    if c.r_spare != math.inf:
        terms = []
        for b in problem.blocks:
            terms.append((f"r_{b.id}", b.size))
            terms.append((f"y_{b.id}", b.instr_size))
        terms = tuple(t for t in terms if t[1] != 0)
        cons.append(LinearConstraint("ram", terms, "<=", c.r_spare))

    if c.x_limit != math.inf:
        baseline = sum(b.freq * b.cycles for b in problem.blocks)
        terms = []
        for b in problem.blocks:
            terms.append((f"i_{b.id}", b.freq * b.instr_cycles))
            terms.append((f"r_{b.id}", b.freq * b.stall))
        terms = tuple(t for t in terms if t[1] != 0)
        cons.append(LinearConstraint("time", terms, "<=", (c.x_limit - 1) * baseline))

    return LinearModel(tuple(variables), constant, tuple(objective), tuple(cons))


# --------------------------------------------------------------------------
# LP text


def _num(x) -> str:
    x = float(x)
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _terms(terms, first_prefix="") -> list[str]:
    out = []
    for k, (v, coef) in enumerate(terms):
        sign = "-" if coef < 0 else "+"
        mag = _num(abs(coef))
        if k == 0 and sign == "+":
            out.append(f"{first_prefix}{mag} {v}")
        else:
            out.append(f"{first_prefix if k == 0 else ''}{sign} {mag} {v}")
    return out


def export_lp(m: LinearModel) -> str:
    """CPLEX-style LP text: objective terms one per line, then rows, then binaries."""
    lines = ["Minimize"]
    obj = _terms(m.objective)
    if m.constant != 0 or not obj:
        const = _num(abs(m.constant))
        if not obj:
            obj = [("-" if m.constant < 0 else "") + const]
        else:
            obj.append(("- " if m.constant < 0 else "+ ") + const)
    lines.append(f" obj: {obj[0]}")
    lines.extend(f"   {t}" for t in obj[1:])
    lines.append("Subject To")
    for c in m.constraints:
        if not c.terms:
            continue
        lhs = " ".join(_terms(c.terms))
        lines.append(f" {c.name}: {lhs} {c.sense} {_num(c.rhs)}")
    lines.append("Binary")
    lines.extend(f" {v}" for v in m.variables)
    lines.append("End")
    return "\n".join(lines) + "\n"

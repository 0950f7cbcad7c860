"""Extraction of per-block placement parameters from a program.

For every block the placement model needs its size, cycle count, execution
frequency, instrumentation cost (bytes and cycles), RAM load-stall cycles and
successor set.  Frequencies come either from a static loop-depth estimate or
from a profile (see :func:`blockplace.sim.profile_frequencies`).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Union

import networkx as nx

from .errors import AnalysisError
from .hwmodel import HardwareModel, TABLE_KINDS, block_size, instr_cycles, term_cycles
from .ir import BrCond, CmpBranchZero, Function, Program, block_ids, successors, validate


@dataclass(frozen=True)
class BlockParams:
    id: str
    size: int  # bytes
    cycles: int  # cycles per execution
    freq: float  # executions
    instr_size: int  # bytes added when instrumented
    instr_cycles: int  # cycles added per execution when instrumented
    stall: int  # extra cycles per execution when resident in RAM
    succ: tuple[str, ...] = ()


@dataclass(frozen=True)
class PlacementProblem:
    blocks: tuple[BlockParams, ...]
    r_spare: float = math.inf
    x_limit: float = math.inf
    e_flash: float = 1.0
    e_ram: float = 0.5
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        index = {}
        for i, b in enumerate(self.blocks):
            if b.id in index:
                raise AnalysisError(f"duplicate block id {b.id!r}")
            index[b.id] = i
        for b in self.blocks:
            for name in ("size", "cycles", "freq", "instr_size", "instr_cycles", "stall"):
                if getattr(b, name) < 0:
                    raise AnalysisError(f"block {b.id!r}: {name} must be >= 0")
            for s in b.succ:
                if s not in index:
                    raise AnalysisError(f"block {b.id!r}: unknown successor {s!r}")
        if self.r_spare < 0:
            raise AnalysisError("r_spare must be >= 0")
        if self.x_limit < 1:
            raise AnalysisError("x_limit must be >= 1")
        if not (self.e_flash > 0 and self.e_ram > 0):
            raise AnalysisError("energy coefficients must be positive")
        object.__setattr__(self, "_index", index)

    @property
    def ids(self) -> list[str]:
        return [b.id for b in self.blocks]

    def index(self, block_id: str) -> int:
        try:
            return self._index[block_id]
        except KeyError:
            raise KeyError(block_id) from None

    def __len__(self) -> int:
        return len(self.blocks)


@dataclass(frozen=True)
class Static:
    base: int = 10

    def __post_init__(self):
        if self.base < 1:
            raise AnalysisError("static frequency base must be >= 1")


@dataclass(frozen=True)
class Profile:
    counts: Mapping[str, int]


FrequencySource = Union[Static, Profile]


# --------------------------------------------------------------------------
# loops


def _cfg(f: Function) -> nx.DiGraph:
    g = nx.DiGraph()
    for i, b in enumerate(f.blocks):
        g.add_node(b.label)
        for s in successors(f, i):
            g.add_edge(b.label, s)
    return g


def _dominates(idom: dict, a, b) -> bool:
    while True:
        if b == a:
            return True
        parent = idom[b]
        if parent == b:
            return False
        b = parent


def _scc_nesting(g: nx.DiGraph, entries: set, depth: dict):
    """Add one level per enclosing cyclic SCC, recursing inside each SCC."""
    for scc in nx.strongly_connected_components(g):
        if len(scc) == 1:
            (n,) = scc
            if not g.has_edge(n, n):
                continue
        for n in scc:
            depth[n] += 1
        heads = {n for n in scc if n in entries or any(p not in scc for p in g.predecessors(n))}
        if not heads:
            heads = {min(scc)}
        sub = g.subgraph(scc).copy()
        sub.remove_edges_from([(u, v) for u, v in list(sub.edges) if v in heads])
        _scc_nesting(sub, heads, depth)


def loop_depths(f: Function) -> dict[str, int]:
    """Number of natural loops enclosing each block, keyed by label.

    Loops are found from back edges ``t -> h`` where ``h`` dominates ``t``;
    loops sharing a header count once.  Cycles left after removing back edges
    (irreducible regions) add one level per enclosing strongly connected
    component.  Unreachable blocks have depth 0.
    """
    depth = {b.label: 0 for b in f.blocks}
    if not f.blocks:
        return depth
    g = _cfg(f)
    entry = f.blocks[0].label
    reach = g.subgraph({entry} | nx.descendants(g, entry)).copy()
    idom = nx.immediate_dominators(reach, entry)

    back = [(t, h) for t, h in reach.edges if _dominates(idom, h, t)]
    bodies: dict[str, set] = {}
    for t, h in back:
        body = bodies.setdefault(h, {h})
        stack = [t]
        while stack:
            n = stack.pop()
            if n in body:
                continue
            body.add(n)
            stack.extend(reach.predecessors(n))
    for body in bodies.values():
        for n in body:
            depth[n] += 1

    residual = reach.copy()
    residual.remove_edges_from(back)
    if not nx.is_directed_acyclic_graph(residual):
        _scc_nesting(residual, {entry}, depth)
    return depth


def estimate_frequencies(p: Program, base: int = 10) -> dict[str, int]:
    """Static frequency estimate ``base ** loop_depth`` for every block id."""
    if base < 1:
        raise AnalysisError("static frequency base must be >= 1")
    ids = block_ids(p)
    out = {}
    for f in p.functions:
        for label, d in loop_depths(f).items():
            out[ids[(f.name, label)]] = base**d
    return out


# --------------------------------------------------------------------------
# extraction


def block_cycles(hw: HardwareModel, block, branch_cost: str = "worst") -> int:
    """Modeled cycles for one execution of ``block``.

    Conditional terminators charge the taken-branch penalty in full under
    ``"worst"`` and half the penalty (rounded up) under ``"expected"``.
    """
    c = sum(instr_cycles(hw, i) for i in block.body)
    t = block.terminator
    if isinstance(t, (BrCond, CmpBranchZero)):
        not_taken = term_cycles(hw, t, taken=False)
        if branch_cost == "worst":
            return c + not_taken + hw.branch_taken_penalty
        if branch_cost == "expected":
            return c + not_taken + math.ceil(hw.branch_taken_penalty / 2)
        raise AnalysisError(f"unknown branch cost model {branch_cost!r}")
    return c + term_cycles(hw, t)


def extract_problem(
    p: Program,
    hw: HardwareModel,
    freq: FrequencySource | None = None,
    r_spare: float = math.inf,
    x_limit: float = math.inf,
    branch_cost: str = "worst",
) -> PlacementProblem:
    diags = validate(p)
    if diags:
        raise AnalysisError(f"invalid program: {diags[0]}")
    freq = Static() if freq is None else freq
    if isinstance(freq, Static):
        freqs = estimate_frequencies(p, freq.base)
    else:
        freqs = dict(freq.counts)
    ids = block_ids(p)

    params = []
    for f in p.functions:
        for i, b in enumerate(f.blocks):
            bid = ids[(f.name, b.label)]
            if bid not in freqs:
                raise AnalysisError(f"profile has no count for block {bid!r}")
            if freqs[bid] < 0:
                raise AnalysisError(f"negative frequency for block {bid!r}")
            kind = b.terminator.kind
            k, t = hw.instr_table[kind] if kind in TABLE_KINDS else (0, 0)
            loads = sum(1 for instr in b.body if instr.opcode == "load")
            params.append(
                BlockParams(
                    id=bid,
                    size=block_size(hw, b),
                    cycles=block_cycles(hw, b, branch_cost),
                    freq=freqs[bid],
                    instr_size=k,
                    instr_cycles=t,
                    stall=loads * hw.ram_load_stall,
                    succ=tuple(ids[(f.name, s)] for s in successors(f, i)),
                )
            )
    return PlacementProblem(tuple(params), r_spare, x_limit, hw.e_flash, hw.e_ram)


# --------------------------------------------------------------------------
# problem.json


def _finite_or_none(v):
    return None if v == math.inf else v


def problem_to_dict(prob: PlacementProblem) -> dict:
    return {
        "blocks": [
            {
                "id": b.id, "S": b.size, "C": b.cycles, "F": b.freq,
                "K": b.instr_size, "T": b.instr_cycles, "L": b.stall, "succ": list(b.succ),
            }
            for b in prob.blocks
        ],
        "r_spare": _finite_or_none(prob.r_spare),
        "x_limit": _finite_or_none(prob.x_limit),
        "e_flash": prob.e_flash,
        "e_ram": prob.e_ram,
    }


def problem_to_json(prob: PlacementProblem) -> str:
    return json.dumps(problem_to_dict(prob), indent=2)


def problem_from_json(text: str) -> PlacementProblem:
    try:
        doc = json.loads(text)
        blocks = tuple(
            BlockParams(
                id=str(r["id"]), size=r["S"], cycles=r["C"], freq=r["F"],
                instr_size=r.get("K", 0), instr_cycles=r.get("T", 0), stall=r.get("L", 0),
                succ=tuple(r.get("succ", ())),
            )
            for r in doc["blocks"]
        )
        r_spare = doc.get("r_spare")
        x_limit = doc.get("x_limit")
        return PlacementProblem(
            blocks,
            math.inf if r_spare is None else r_spare,
            math.inf if x_limit is None else x_limit,
            doc.get("e_flash", 1.0),
            doc.get("e_ram", 0.5),
        )
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise AnalysisError(f"malformed problem document: {exc}") from exc

"""Hardware cost tables: energy coefficients, opcode costs, instrumentation costs.

Energy coefficients are relative, non-physical units (energy per cycle).  The
defaults make RAM execution half as expensive as flash execution; nothing in
the package other than tests relies on ``e_ram < e_flash``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .errors import HwConfigError
from .ir import (
    BasicBlock,
    CmpBranchZero,
    Fallthrough,
    Instruction,
    LongJump,
    TermKind,
    Terminator,
)

INSTRUMENTABLE = (TermKind.BR, TermKind.BRC, TermKind.CBZ, TermKind.FALLTHROUGH)
TABLE_KINDS = INSTRUMENTABLE + (TermKind.RET, TermKind.CALL)

DEFAULT_OPCODES = {
    "li": (1, 4),
    "mov": (1, 2),
    "add": (1, 2),
    "sub": (1, 2),
    "mul": (1, 2),
    "addi": (1, 2),
    "out": (1, 2),
    "load": (2, 2),
    "store": (2, 2),
    "br": (1, 2),
    "ret": (1, 2),
    "brc": (1, 2),
    "cbz": (1, 2),
    "cbnz": (1, 2),
    "call": (1, 4),
}

# (K bytes, T cycles) charged by the model when a block of this kind is instrumented
DEFAULT_INSTR_TABLE = {
    TermKind.BR: (6, 1),
    TermKind.BRC: (16, 6),
    TermKind.CBZ: (16, 6),
    TermKind.FALLTHROUGH: (8, 4),
    TermKind.RET: (0, 0),
    TermKind.CALL: (0, 0),
}


@dataclass(frozen=True)
class HardwareModel:
    e_flash: float = 1.0
    e_ram: float = 0.5
    opcode_table: dict = field(default_factory=lambda: dict(DEFAULT_OPCODES))
    branch_taken_penalty: int = 2
    ram_load_stall: int = 1
    ljmp_cost: tuple[int, int] = (4, 8)  # (cycles, bytes incl. address literal)
    instr_table: dict = field(default_factory=lambda: dict(DEFAULT_INSTR_TABLE))

    def __post_init__(self):
        for name in ("e_flash", "e_ram"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
                raise HwConfigError(f"{name} must be a positive number, got {v!r}")
        for name in ("branch_taken_penalty", "ram_load_stall"):
            _check_count(name, getattr(self, name))
        _check_pair("ljmp_cost", self.ljmp_cost)
        missing = set(DEFAULT_OPCODES) - set(self.opcode_table)
        if missing:
            raise HwConfigError(f"opcode_table lacks {sorted(missing)}")
        for op, pair in self.opcode_table.items():
            _check_pair(f"opcodes.{op}", pair)
        missing = set(TABLE_KINDS) - set(self.instr_table)
        if missing:
            raise HwConfigError(f"instr_table lacks {sorted(k.value for k in missing)}")
        for kind, pair in self.instr_table.items():
            _check_pair(f"instr_table.{kind.value}", pair)
        for kind in (TermKind.RET, TermKind.CALL):
            if tuple(self.instr_table[kind]) != (0, 0):
                raise HwConfigError(f"instr_table.{kind.value} must be (0, 0)")

    @property
    def ljmp_cycles(self) -> int:
        return self.ljmp_cost[0]

    @property
    def ljmp_size(self) -> int:
        return self.ljmp_cost[1]

    def opcode_cycles(self, op: str) -> int:
        return self.opcode_table[op][0]

    def opcode_size(self, op: str) -> int:
        return self.opcode_table[op][1]


def _check_count(name, v):
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise HwConfigError(f"{name} must be a non-negative integer, got {v!r}")


def _check_pair(name, pair):
    if not isinstance(pair, (tuple, list)) or len(pair) != 2:
        raise HwConfigError(f"{name} must be a pair of integers, got {pair!r}")
    for v in pair:
        _check_count(name, v)


def default_hw() -> HardwareModel:
    return HardwareModel()


_TOP_KEYS = {
    "e_flash", "e_ram", "branch_taken_penalty", "ram_load_stall",
    "ljmp_cycles", "ljmp_size", "opcodes", "instr_table",
}


def load_hw_config(text: str) -> HardwareModel:
    """Build a HardwareModel from a JSON document; absent keys keep their defaults."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise HwConfigError(f"malformed hardware config: {exc}") from exc
    if not isinstance(doc, dict):
        raise HwConfigError("hardware config must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise HwConfigError(f"unknown hardware config keys: {sorted(unknown)}")

    hw = default_hw()
    kw = {k: doc[k] for k in ("e_flash", "e_ram", "branch_taken_penalty", "ram_load_stall") if k in doc}
    kw["ljmp_cost"] = (doc.get("ljmp_cycles", hw.ljmp_cycles), doc.get("ljmp_size", hw.ljmp_size))

    opcodes = dict(hw.opcode_table)
    for op, pair in _as_object(doc, "opcodes").items():
        if op not in DEFAULT_OPCODES:
            raise HwConfigError(f"unknown opcode {op!r}")
        _check_pair(f"opcodes.{op}", pair)
        opcodes[op] = tuple(pair)

    table = dict(hw.instr_table)
    for key, pair in _as_object(doc, "instr_table").items():
        try:
            kind = TermKind(key)
        except ValueError:
            kind = None
        if kind not in TABLE_KINDS:
            raise HwConfigError(f"unknown terminator kind {key!r}")
        _check_pair(f"instr_table.{key}", pair)
        table[kind] = tuple(pair)

    return replace(hw, opcode_table=opcodes, instr_table=table, **kw)


def _as_object(doc, key):
    v = doc.get(key, {})
    if not isinstance(v, dict):
        raise HwConfigError(f"{key} must be a JSON object")
    return v


def hw_to_json(hw: HardwareModel) -> str:
    doc = {
        "e_flash": hw.e_flash,
        "e_ram": hw.e_ram,
        "branch_taken_penalty": hw.branch_taken_penalty,
        "ram_load_stall": hw.ram_load_stall,
        "ljmp_cycles": hw.ljmp_cycles,
        "ljmp_size": hw.ljmp_size,
        "opcodes": {k: list(v) for k, v in hw.opcode_table.items()},
        "instr_table": {k.value: list(v) for k, v in hw.instr_table.items()},
    }
    return json.dumps(doc, indent=2, sort_keys=True)


# --------------------------------------------------------------------------
# per-instruction costs


def instr_cycles(hw: HardwareModel, instr: Instruction) -> int:
    return hw.opcode_cycles(instr.opcode)


def instr_size(hw: HardwareModel, instr: Instruction) -> int:
    return hw.opcode_size(instr.opcode)


def term_opcode(term: Terminator) -> str | None:
    if isinstance(term, (Fallthrough, LongJump)):
        return None
    if isinstance(term, CmpBranchZero):
        return term.opcode
    return term.kind.value


def term_size(hw: HardwareModel, term: Terminator) -> int:
    if isinstance(term, LongJump):
        return hw.ljmp_size
    op = term_opcode(term)
    return 0 if op is None else hw.opcode_size(op)


def term_cycles(hw: HardwareModel, term: Terminator, taken: bool = True) -> int:
    """Cycles for executing ``term``; ``taken`` only matters for conditional kinds.

    Unconditional transfers (br, ret, call) always pay the taken-branch
    penalty.  A long jump costs exactly ``ljmp_cycles``.
    """
    if isinstance(term, LongJump):
        return hw.ljmp_cycles
    op = term_opcode(term)
    if op is None:
        return 0
    base = hw.opcode_cycles(op)
    if term.kind in (TermKind.BRC, TermKind.CBZ):
        return base + (hw.branch_taken_penalty if taken else 0)
    return base + hw.branch_taken_penalty


def block_size(hw: HardwareModel, block: BasicBlock) -> int:
    return sum(instr_size(hw, i) for i in block.body) + term_size(hw, block.terminator)


# --------------------------------------------------------------------------
# dominance of the instrumentation table over the literal rewrites


def rewrite_deltas(hw: HardwareModel, kind: TermKind) -> tuple[int, int]:
    """Worst-case (bytes, cycles) added by the rewrite of a block of ``kind``.

    The worst case is taken over which edges cross memories and, for
    conditional branches, over which way the branch goes at run time.  The
    rewrite sequences are the ones emitted by :func:`blockplace.transform.apply_placement`.
    """
    pen = hw.branch_taken_penalty
    lc, ls = hw.ljmp_cost
    if kind is TermKind.BR:
        return ls - hw.opcode_size("br"), lc - (hw.opcode_cycles("br") + pen)
    if kind is TermKind.FALLTHROUGH:
        return ls, lc
    if kind in (TermKind.RET, TermKind.CALL):
        return 0, 0
    pairs = [("brc", "brc")] if kind is TermKind.BRC else [("cbz", "cbnz"), ("cbnz", "cbz")]
    worst_b, worst_c = None, None
    for op, inv in pairs:
        c, c_inv = hw.opcode_cycles(op), hw.opcode_cycles(inv)
        d_size = hw.opcode_size(inv) - hw.opcode_size(op)
        sizes = [ls, d_size + ls, d_size + 2 * ls]
        cycles = [
            # only the fallthrough edge crosses: taken path unchanged
            0,
            lc,
            # only the taken edge crosses: inverted branch then ljmp
            c_inv + lc - (c + pen),
            (c_inv + pen) - c,
            # both cross: inverted skip over ljmp(taken), then ljmp(fallthrough)
            c_inv + lc - (c + pen),
            c_inv + pen + lc - c,
        ]
        b, cy = max(sizes), max(cycles)
        worst_b = b if worst_b is None else max(worst_b, b)
        worst_c = cy if worst_c is None else max(worst_c, cy)
    return worst_b, worst_c


def validate_dominance(hw: HardwareModel) -> list[str]:
    """Diagnostics for every kind whose table entry undercharges its literal rewrite."""
    diags = []
    for kind in TABLE_KINDS:
        k, t = hw.instr_table[kind]
        db, dc = rewrite_deltas(hw, kind)
        if k < db:
            diags.append(f"{kind.value}: instrumentation bytes {k} < rewrite delta {db}")
        if t < dc:
            diags.append(f"{kind.value}: instrumentation cycles {t} < rewrite delta {dc}")
    return diags

"""Realize a RAM set on a program: move blocks to the RAM section and rewrite
every control transfer that crosses between memories into a long jump."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable

from .errors import TransformError
from .hwmodel import HardwareModel, block_size
from .ir import (
    BasicBlock,
    Br,
    BrCond,
    CmpBranchZero,
    Fallthrough,
    Function,
    LongJump,
    MemSpace,
    Program,
    SYNTHETIC_SEP,
    block_ids,
    iter_blocks,
    validate,
)


@dataclass(frozen=True)
class TransformReport:
    moved: frozenset
    rewritten: dict = field(default_factory=dict)  # block id -> rewrite kind
    added_bytes_ram: int = 0
    added_bytes_flash: int = 0


def measure_image(p: Program, hw: HardwareModel) -> tuple[int, int]:
    """(flash bytes, RAM bytes) of the program's code image."""
    flash = ram = 0
    for _, _, b in iter_blocks(p):
        if b.section is MemSpace.RAM:
            ram += block_size(hw, b)
        else:
            flash += block_size(hw, b)
    return flash, ram


def _fresh(labels: set, parent: str) -> str:
    n = 0
    while f"{parent}{SYNTHETIC_SEP}lj{n}" in labels:
        n += 1
    label = f"{parent}{SYNTHETIC_SEP}lj{n}"
    labels.add(label)
    return label


def _rewrite_function(f: Function, in_ram: dict, ids: dict, rewritten: dict) -> Function:
    labels = {b.label for b in f.blocks}
    out: list[BasicBlock] = []
    for i, b in enumerate(f.blocks):
        section = MemSpace.RAM if in_ram[b.label] else MemSpace.FLASH
        nxt = f.blocks[i + 1].label if i + 1 < len(f.blocks) else None

        def crosses(label):
            return label is not None and in_ram[label] != in_ram[b.label]

        t = b.terminator
        extra: list[BasicBlock] = []
        kind = None
        if isinstance(t, Br) and crosses(t.target):
            t, kind = LongJump(t.target), "br"
        elif isinstance(t, Fallthrough) and crosses(nxt):
            t, kind = LongJump(nxt), "fallthrough"
        elif isinstance(t, (BrCond, CmpBranchZero)):
            ct, cn = crosses(t.target), crosses(nxt)
            tag = t.kind.value
            if cn and not ct:
                extra = [BasicBlock(_fresh(labels, b.label), (), LongJump(nxt), section)]
                kind = f"{tag}:fallthrough"
            elif ct and not cn:
                extra = [BasicBlock(_fresh(labels, b.label), (), LongJump(t.target), section)]
                t, kind = t.inverted(nxt), f"{tag}:taken"
            elif ct and cn:
                taken = BasicBlock(_fresh(labels, b.label), (), LongJump(t.target), section)
                skip = BasicBlock(_fresh(labels, b.label), (), LongJump(nxt), section)
                extra = [taken, skip]
                t, kind = t.inverted(skip.label), f"{tag}:both"
        if kind is not None:
            rewritten[ids[(f.name, b.label)]] = kind
        out.append(replace(b, terminator=t, section=section))
        out.extend(extra)
    return Function(f.name, tuple(out))


def apply_placement(p: Program, R: Iterable[str], hw: HardwareModel) -> tuple[Program, TransformReport]:
    """Place the blocks with ids in ``R`` in RAM and instrument crossing edges.

    Calls and returns are never rewritten.  Synthetic long-jump blocks are
    inserted directly after their parent, in the parent's section.
    """
    diags = validate(p)
    if diags:
        raise TransformError(f"invalid program: {diags[0]}")
    for _, _, b in iter_blocks(p):
        if b.section is MemSpace.RAM or isinstance(b.terminator, LongJump):
            raise TransformError("program already carries a placement")
    ids = block_ids(p)
    R = frozenset(R)
    unknown = R - set(ids.values())
    if unknown:
        raise TransformError(f"unknown block id(s): {sorted(unknown)}")

    rewritten: dict[str, str] = {}
    funcs = []
    for f in p.functions:
        in_ram = {b.label: ids[(f.name, b.label)] in R for b in f.blocks}
        funcs.append(_rewrite_function(f, in_ram, ids, rewritten))
    out = Program(tuple(funcs), p.entry)

    flash0, ram0 = measure_image(p, hw)
    flash1, ram1 = measure_image(out, hw)
    moved_bytes = sum(block_size(hw, b) for f, _, b in iter_blocks(p) if ids[(f.name, b.label)] in R)
    report = TransformReport(
        moved=R,
        rewritten=rewritten,
        added_bytes_ram=ram1 - ram0 - moved_bytes,
        added_bytes_flash=flash1 - (flash0 - moved_bytes),
    )
    return out, report

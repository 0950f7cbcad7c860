"""Cycle- and energy-accounting interpreter for the toy IR.

Every instruction charges its opcode cycles to the memory the executing block
lives in.  Loads executed from a RAM block pay an extra contention stall.
"""

from __future__ import annotations

from dataclasses import dataclass

from .analysis import Profile
from .errors import CallDepthExceeded, MemoryFault, SimError, StepLimitExceeded
from .hwmodel import HardwareModel, term_cycles
from .ir import (
    Br,
    BrCond,
    Call,
    CmpBranchZero,
    Fallthrough,
    LongJump,
    MemSpace,
    Program,
    Ret,
    block_ids,
    is_synthetic,
    validate,
)

_MASK = (1 << 32) - 1


def _wrap(v: int) -> int:
    v &= _MASK
    return v - (1 << 32) if v >> 31 else v


@dataclass(frozen=True)
class SimConfig:
    data_memory_words: int = 256
    initial_memory: tuple[int, ...] | None = None
    max_steps: int = 1_000_000
    max_call_depth: int = 256
    mode: str = "literal"

    def __post_init__(self):
        if self.max_steps < 1:
            raise SimError("max_steps must be >= 1")
        if self.mode != "literal":
            raise SimError(f"unsupported simulation mode {self.mode!r}")
        if self.initial_memory is not None and len(self.initial_memory) > self.data_memory_words:
            raise SimError("initial memory larger than data memory")


@dataclass(frozen=True)
class SimResult:
    trace: tuple[int, ...]
    final_memory: tuple[int, ...]
    cycles_flash: int
    cycles_ram: int
    energy: float
    block_counts: dict
    steps: int

    @property
    def cycles(self) -> int:
        return self.cycles_flash + self.cycles_ram


def _cond(cond: str, a: int, b: int) -> bool:
    if cond == "eq":
        return a == b
    if cond == "ne":
        return a != b
    if cond == "lt":
        return a < b
    return a >= b


def simulate(p: Program, hw: HardwareModel, cfg: SimConfig | None = None) -> SimResult:
    cfg = SimConfig() if cfg is None else cfg
    diags = validate(p)
    if diags:
        raise SimError(f"invalid program: {diags[0]}")
    ids = block_ids(p)
    funcs = {f.name: f for f in p.functions}
    index = {f.name: {b.label: i for i, b in enumerate(f.blocks)} for f in p.functions}
    counts = {bid: 0 for bid in ids.values()}

    regs = [0] * 16
    mem = [0] * cfg.data_memory_words
    if cfg.initial_memory:
        mem[: len(cfg.initial_memory)] = [_wrap(v) for v in cfg.initial_memory]
    trace: list[int] = []
    frames: list[tuple[str, int]] = []
    cycles = {MemSpace.FLASH: 0, MemSpace.RAM: 0}
    steps = 0
    pen = hw.branch_taken_penalty
    stall = hw.ram_load_stall

    fname, i = p.entry, 0
    while True:
        f = funcs[fname]
        b = f.blocks[i]
        bid = ids[(fname, b.label)]
        counts[bid] += 1
        sec = b.section
        for instr in b.body:
            if steps >= cfg.max_steps:
                raise StepLimitExceeded(cfg.max_steps)
            steps += 1
            op, a = instr.opcode, instr.args
            c = hw.opcode_cycles(op)
            if op == "li":
                regs[a[0]] = _wrap(a[1])
            elif op == "mov":
                regs[a[0]] = regs[a[1]]
            elif op == "add":
                regs[a[0]] = _wrap(regs[a[1]] + regs[a[2]])
            elif op == "sub":
                regs[a[0]] = _wrap(regs[a[1]] - regs[a[2]])
            elif op == "mul":
                regs[a[0]] = _wrap(regs[a[1]] * regs[a[2]])
            elif op == "addi":
                regs[a[0]] = _wrap(regs[a[1]] + a[2])
            elif op == "out":
                trace.append(regs[a[0]])
            else:
                addr = regs[a[1]] + a[2]
                if not 0 <= addr < len(mem):
                    raise MemoryFault(addr, bid)
                if op == "load":
                    regs[a[0]] = mem[addr]
                    if sec is MemSpace.RAM:
                        c += stall
                else:
                    mem[addr] = regs[a[0]]
            cycles[sec] += c

        t = b.terminator
        if isinstance(t, Fallthrough):
            i += 1
            continue
        if steps >= cfg.max_steps:
            raise StepLimitExceeded(cfg.max_steps)
        steps += 1
        if isinstance(t, (Br, LongJump)):
            cycles[sec] += term_cycles(hw, t)
            i = index[fname][t.target]
        elif isinstance(t, (BrCond, CmpBranchZero)):
            if isinstance(t, BrCond):
                taken = _cond(t.cond, regs[t.ra], regs[t.rb])
            else:
                taken = (regs[t.ra] != 0) == t.nonzero
            cycles[sec] += term_cycles(hw, t, taken)
            i = index[fname][t.target] if taken else i + 1
        elif isinstance(t, Call):
            cycles[sec] += term_cycles(hw, t)
            if len(frames) >= cfg.max_call_depth:
                raise CallDepthExceeded(f"call depth exceeds {cfg.max_call_depth} in block {bid}")
            frames.append((fname, i + 1))
            fname, i = t.function, 0
        elif isinstance(t, Ret):
            cycles[sec] += term_cycles(hw, t)
            if not frames:
                break
            fname, i = frames.pop()
        else:  # pragma: no cover
            raise SimError(f"unknown terminator {t!r}")

    cf, cr = cycles[MemSpace.FLASH], cycles[MemSpace.RAM]
    return SimResult(
        trace=tuple(trace),
        final_memory=tuple(mem),
        cycles_flash=cf,
        cycles_ram=cr,
        energy=cf * hw.e_flash + cr * hw.e_ram,
        block_counts=counts,
        steps=steps,
    )


def profile_frequencies(res: SimResult) -> Profile:
    """Block execution counts as a frequency source, without synthetic blocks.

    A synthetic long-jump block only runs right after its parent, so dropping
    it leaves the parent's count unchanged.
    """
    return Profile({bid: n for bid, n in res.block_counts.items() if not is_synthetic(bid)})

"""Random generators for terminating programs and placement problems.

Programs are built from structured pieces (straight-line code, if/else,
counted loops in two shapes, calls) so every generated program halts, every
memory access stays inside a 64-word window, and every terminator kind shows
up.  Problem energy coefficients are multiples of 1/64 so that model sums are
exact in binary floating point.
"""

from __future__ import annotations

import math
import random

from .analysis import BlockParams, PlacementProblem
from .ir import (
    BasicBlock,
    Br,
    BrCond,
    Call,
    CmpBranchZero,
    Fallthrough,
    Function,
    Instruction,
    Program,
    Ret,
    Terminator,
    CONDS,
)

DATA_REGS = range(10)
BASE_REG = 10  # always zero
ZERO_REG = 11  # always zero
MEM_WINDOW = 64


class _FunctionBuilder:
    def __init__(self, rng: random.Random, name: str, counters: list[int], helper: str | None):
        self.rng = rng
        self.name = name
        self.counters = counters
        self.helper = helper
        self.blocks: list[BasicBlock] = []
        self.n = 0
        self.label = self.fresh()
        self.body: list[Instruction] = []

    def fresh(self) -> str:
        self.n += 1
        return f"{self.name[0]}{self.n}"

    def close(self, term: Terminator, next_label: str | None = None) -> str:
        self.blocks.append(BasicBlock(self.label, tuple(self.body), term))
        self.label = next_label or self.fresh()
        self.body = []
        return self.label

    def instr(self):
        rng = self.rng
        r = lambda: rng.choice(DATA_REGS)
        op = rng.choice(("li", "mov", "add", "sub", "mul", "addi", "load", "store", "out"))
        if op == "li":
            return Instruction(op, (r(), rng.randint(-1000, 1000)))
        if op == "mov":
            return Instruction(op, (r(), r()))
        if op in ("add", "sub", "mul"):
            return Instruction(op, (r(), r(), r()))
        if op == "addi":
            return Instruction(op, (r(), r(), rng.randint(-50, 50)))
        if op in ("load", "store"):
            return Instruction(op, (r(), BASE_REG, rng.randrange(MEM_WINDOW)))
        return Instruction(op, (r(),))

    def straight(self):
        for _ in range(self.rng.randint(0, 3)):
            self.body.append(self.instr())
        if self.rng.random() < 0.25:
            nxt = self.fresh()
            self.close(Br(nxt) if self.rng.random() < 0.5 else Fallthrough(), nxt)

    def cond_branch(self, target: str) -> Terminator:
        rng = self.rng
        if rng.random() < 0.6:
            return BrCond(rng.choice(CONDS), rng.choice(DATA_REGS), rng.choice(DATA_REGS), target)
        return CmpBranchZero(rng.random() < 0.5, rng.choice(DATA_REGS), target)

    def piece(self, depth: int):
        rng = self.rng
        choice = rng.random()
        if choice < 0.35 or depth >= 3:
            self.straight()
        elif choice < 0.55:
            other, join = self.fresh(), self.fresh()
            self.close(self.cond_branch(other))
            self.seq(depth + 1)
            if rng.random() < 0.5:
                self.close(Br(join), other)
                self.seq(depth + 1)
                self.close(Fallthrough(), join)
            else:
                # no else arm: the branch target is the join block itself
                self.close(Fallthrough(), other)
        elif choice < 0.85 and depth < len(self.counters):
            self.loop(depth)
        elif self.helper is not None:
            self.close(Call(self.helper))
        else:
            self.straight()

    def loop(self, depth: int):
        rng = self.rng
        rc = self.counters[depth]
        self.body.append(Instruction("li", (rc, rng.randint(1, 4))))
        if rng.random() < 0.5:
            # bottom-tested
            head = self.fresh()
            self.close(Fallthrough() if rng.random() < 0.5 else Br(head), head)
            self.seq(depth + 1)
            self.body.append(Instruction("addi", (rc, rc, -1)))
            if rng.random() < 0.5:
                self.close(CmpBranchZero(True, rc, head))
            else:
                self.close(BrCond("lt", ZERO_REG, rc, head))
        else:
            # top-tested
            head = self.fresh()
            self.close(Fallthrough(), head)
            exit_label = self.fresh()
            self.close(CmpBranchZero(False, rc, exit_label))
            self.seq(depth + 1)
            self.body.append(Instruction("addi", (rc, rc, -1)))
            self.close(Br(head), exit_label)

    def seq(self, depth: int):
        for _ in range(self.rng.randint(1, 3)):
            self.piece(depth)

    def finish(self) -> Function:
        self.close(Ret())
        return Function(self.name, tuple(self.blocks))


def random_program(rng: random.Random, with_helper: bool | None = None) -> Program:
    """A random terminating program over the full instruction and terminator set."""
    if with_helper is None:
        with_helper = rng.random() < 0.5
    funcs = []
    helper = None
    if with_helper:
        hb = _FunctionBuilder(rng, "helper", [15], None)
        hb.seq(0)
        funcs.append(hb.finish())
        helper = "helper"
    mb = _FunctionBuilder(rng, "main", [12, 13, 14], helper)
    mb.seq(0)
    mb.body.append(Instruction("out", (rng.choice(DATA_REGS),)))
    funcs.insert(0, mb.finish())
    return Program(tuple(funcs), "main")


def random_problem(
    rng: random.Random, k: int | None = None, max_blocks: int = 12, constrained: bool = True
) -> PlacementProblem:
    """A random placement problem with integer parameters and dyadic energy coefficients."""
    k = rng.randint(1, max_blocks) if k is None else k
    blocks = []
    for i in range(k):
        n_succ = rng.choice((0, 1, 1, 2, 2))
        succ = sorted({f"b{rng.randrange(k)}" for _ in range(n_succ)})
        blocks.append(
            BlockParams(
                id=f"b{i}",
                size=rng.randint(1, 24),
                cycles=rng.randint(1, 12),
                freq=rng.choice((0, 1, 1, 10, 10, 100, rng.randint(1, 60))),
                instr_size=rng.randint(0, 16),
                instr_cycles=rng.randint(0, 6),
                stall=rng.randint(0, 3),
                succ=tuple(succ),
            )
        )
    r_spare, x_limit = math.inf, math.inf
    if constrained:
        total = sum(b.size + b.instr_size for b in blocks)
        if rng.random() < 0.8:
            r_spare = rng.randint(0, total)
        if rng.random() < 0.6:
            x_limit = 1 + rng.randint(0, 32) / 32
    return PlacementProblem(tuple(blocks), r_spare, x_limit, 1.0, rng.randint(1, 96) / 64)

"""Toy control-flow-graph IR: data types, text format, and structural checks.

A program is a list of functions, each an ordered list of basic blocks.  Each
block carries a straight-line body and exactly one terminator; a block without
an explicit terminator falls through to the lexically next block.

The text format is line oriented::

    func main {
      block entry { li r1, 0 ; li r2, 5 ; li r3, 0 }
      block loop  { addi r3, r3, 1 ; add r1, r1, r3 ; brc lt r3, r2, loop }
      block exit  { out r1 ; ret }
    }

The entry function is ``main`` when present, otherwise the first function.
Labels containing ``$`` are reserved for blocks synthesized by
:mod:`blockplace.transform`; the part before the ``$`` names the parent block.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import ClassVar, Iterator, Union

from .errors import ParseError

NUM_REGS = 16
WORD_MIN = -(2**31)
WORD_MAX = 2**31 - 1
SYNTHETIC_SEP = "$"


class MemSpace(str, Enum):
    FLASH = "flash"
    RAM = "ram"


class TermKind(str, Enum):
    BR = "br"
    BRC = "brc"
    CBZ = "cbz"
    FALLTHROUGH = "fallthrough"
    LJMP = "ljmp"
    RET = "ret"
    CALL = "call"


# operand slots per opcode: "reg", "imm", or "mem" (base register + offset)
OPERANDS = {
    "li": ("reg", "imm"),
    "mov": ("reg", "reg"),
    "add": ("reg", "reg", "reg"),
    "sub": ("reg", "reg", "reg"),
    "mul": ("reg", "reg", "reg"),
    "addi": ("reg", "reg", "imm"),
    "load": ("reg", "mem"),
    "store": ("reg", "mem"),
    "out": ("reg",),
}
CONDS = ("eq", "ne", "lt", "ge")
INVERSE_COND = {"eq": "ne", "ne": "eq", "lt": "ge", "ge": "lt"}


@dataclass(frozen=True)
class Instruction:
    """One non-terminator instruction.

    ``args`` is flat: a ``mem`` slot contributes two entries (base register,
    offset), so ``load r1, [r2 + 4]`` is ``Instruction("load", (1, 2, 4))``.
    """

    opcode: str
    args: tuple[int, ...] = ()

    def __str__(self) -> str:
        parts = []
        it = iter(self.args)
        for slot in OPERANDS.get(self.opcode, ()):
            if slot == "reg":
                parts.append(f"r{next(it)}")
            elif slot == "imm":
                parts.append(str(next(it)))
            else:
                base, off = next(it), next(it)
                parts.append(f"[r{base} + {off}]")
        return f"{self.opcode} {', '.join(parts)}" if parts else self.opcode


@dataclass(frozen=True)
class Br:
    target: str
    kind: ClassVar[TermKind] = TermKind.BR

    def __str__(self) -> str:
        return f"br {self.target}"


@dataclass(frozen=True)
class BrCond:
    cond: str
    ra: int
    rb: int
    target: str
    kind: ClassVar[TermKind] = TermKind.BRC

    def __str__(self) -> str:
        return f"brc {self.cond} r{self.ra}, r{self.rb}, {self.target}"

    def inverted(self, target: str) -> BrCond:
        return BrCond(INVERSE_COND[self.cond], self.ra, self.rb, target)


@dataclass(frozen=True)
class CmpBranchZero:
    nonzero: bool
    ra: int
    target: str
    kind: ClassVar[TermKind] = TermKind.CBZ

    @property
    def opcode(self) -> str:
        return "cbnz" if self.nonzero else "cbz"

    def __str__(self) -> str:
        return f"{self.opcode} r{self.ra}, {self.target}"

    def inverted(self, target: str) -> CmpBranchZero:
        return CmpBranchZero(not self.nonzero, self.ra, target)


@dataclass(frozen=True)
class Fallthrough:
    kind: ClassVar[TermKind] = TermKind.FALLTHROUGH

    def __str__(self) -> str:
        return ""


@dataclass(frozen=True)
class LongJump:
    target: str
    kind: ClassVar[TermKind] = TermKind.LJMP

    def __str__(self) -> str:
        return f"ljmp {self.target}"


@dataclass(frozen=True)
class Ret:
    kind: ClassVar[TermKind] = TermKind.RET

    def __str__(self) -> str:
        return "ret"


@dataclass(frozen=True)
class Call:
    function: str
    kind: ClassVar[TermKind] = TermKind.CALL

    def __str__(self) -> str:
        return f"call {self.function}"


Terminator = Union[Br, BrCond, CmpBranchZero, Fallthrough, LongJump, Ret, Call]


@dataclass(frozen=True)
class BasicBlock:
    label: str
    body: tuple[Instruction, ...] = ()
    terminator: Terminator = field(default_factory=Fallthrough)
    section: MemSpace = MemSpace.FLASH


@dataclass(frozen=True)
class Function:
    name: str
    blocks: tuple[BasicBlock, ...]

    def index_of(self, label: str) -> int:
        for i, b in enumerate(self.blocks):
            if b.label == label:
                return i
        raise KeyError(label)


@dataclass(frozen=True)
class Program:
    functions: tuple[Function, ...]
    entry: str = "main"

    def function(self, name: str) -> Function:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)

    @property
    def entry_function(self) -> Function:
        return self.function(self.entry)


@dataclass(frozen=True)
class Diagnostic:
    function: str
    block: str | None
    message: str

    def __str__(self) -> str:
        where = f"{self.function}.{self.block}" if self.block else self.function
        return f"{where}: {self.message}"


def default_entry(names) -> str:
    names = list(names)
    if "main" in names:
        return "main"
    return names[0] if names else "main"


# --------------------------------------------------------------------------
# CFG helpers


def parent_label(label: str) -> str:
    return label.split(SYNTHETIC_SEP, 1)[0]


def is_synthetic(label: str) -> bool:
    return SYNTHETIC_SEP in label


def successors(func: Function, index: int) -> tuple[str, ...]:
    """Labels control can reach from the terminator of ``func.blocks[index]``.

    Calls continue at the next block; the callee is not a successor.
    """
    term = func.blocks[index].terminator
    nxt = func.blocks[index + 1].label if index + 1 < len(func.blocks) else None
    if isinstance(term, (Br, LongJump)):
        out = [term.target]
    elif isinstance(term, (BrCond, CmpBranchZero)):
        out = [term.target, nxt]
    elif isinstance(term, (Fallthrough, Call)):
        out = [nxt]
    else:
        out = []
    seen: list[str] = []
    for s in out:
        if s is not None and s not in seen:
            seen.append(s)
    return tuple(seen)


def iter_blocks(p: Program) -> Iterator[tuple[Function, int, BasicBlock]]:
    for f in p.functions:
        for i, b in enumerate(f.blocks):
            yield f, i, b


def block_ids(p: Program) -> dict[tuple[str, str], str]:
    """Program-wide block ids keyed by ``(function, label)``.

    A block's id is its label when that label (or, for synthetic blocks, the
    parent label) is used by only one function; otherwise ``function.label``.
    """
    owners: dict[str, set[str]] = {}
    for f, _, b in iter_blocks(p):
        owners.setdefault(parent_label(b.label), set()).add(f.name)
    ids = {}
    for f, _, b in iter_blocks(p):
        ambiguous = len(owners[parent_label(b.label)]) > 1
        ids[(f.name, b.label)] = f"{f.name}.{b.label}" if ambiguous else b.label
    return ids


# --------------------------------------------------------------------------
# validation


def _check_instruction(instr: Instruction) -> str | None:
    slots = OPERANDS.get(instr.opcode)
    if slots is None:
        return f"unknown opcode {instr.opcode!r}"
    kinds = []
    for s in slots:
        kinds.extend(("reg", "imm") if s == "mem" else (s,))
    if len(instr.args) != len(kinds):
        return f"{instr.opcode} expects {len(kinds)} operands, got {len(instr.args)}"
    for k, v in zip(kinds, instr.args):
        if k == "reg" and not 0 <= v < NUM_REGS:
            return f"register r{v} out of range"
        if k == "imm" and not WORD_MIN <= v <= WORD_MAX:
            return f"immediate {v} does not fit a word"
    return None


def validate(p: Program) -> list[Diagnostic]:
    """Return one diagnostic per violated structural invariant (empty if valid)."""
    diags: list[Diagnostic] = []
    names = [f.name for f in p.functions]
    if not p.functions:
        diags.append(Diagnostic("<program>", None, "program has no functions"))
    for name in sorted({n for n in names if names.count(n) > 1}):
        diags.append(Diagnostic(name, None, f"duplicate function {name!r}"))
    if names and p.entry not in names:
        diags.append(Diagnostic("<program>", None, f"entry function {p.entry!r} not found"))
    fnames = set(names)

    for f in p.functions:
        if not f.blocks:
            diags.append(Diagnostic(f.name, None, "function has no blocks"))
            continue
        labels = [b.label for b in f.blocks]
        dups = {l for l in labels if labels.count(l) > 1}
        for l in sorted(dups):
            diags.append(Diagnostic(f.name, l, f"duplicate label {l!r}"))
        known = set(labels)
        last = len(f.blocks) - 1
        for i, b in enumerate(f.blocks):
            for instr in b.body:
                msg = _check_instruction(instr)
                if msg:
                    diags.append(Diagnostic(f.name, b.label, msg))
            t = b.terminator
            target = getattr(t, "target", None)
            if target is not None and target not in known:
                diags.append(Diagnostic(f.name, b.label, f"unresolved target {target!r}"))
            if isinstance(t, BrCond):
                if t.cond not in CONDS:
                    diags.append(Diagnostic(f.name, b.label, f"unknown condition {t.cond!r}"))
                if not (0 <= t.ra < NUM_REGS and 0 <= t.rb < NUM_REGS):
                    diags.append(Diagnostic(f.name, b.label, "register out of range"))
            if isinstance(t, CmpBranchZero) and not 0 <= t.ra < NUM_REGS:
                diags.append(Diagnostic(f.name, b.label, "register out of range"))
            if isinstance(t, Call) and t.function not in fnames:
                diags.append(Diagnostic(f.name, b.label, f"call to unknown function {t.function!r}"))
            if i == last and isinstance(t, (Fallthrough, BrCond, CmpBranchZero, Call)):
                what = "falls through" if isinstance(t, Fallthrough) else "needs a following block"
                diags.append(Diagnostic(f.name, b.label, f"last block {what}"))
    return diags


# --------------------------------------------------------------------------
# text format

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<int>[-+]?(?:0[xX][0-9a-fA-F]+|[0-9]+))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*(?:\$[A-Za-z0-9_]+)?)
  | (?P<at>@ram\b)
  | (?P<punct>[{},\[\]+;])
    """,
    re.VERBOSE,
)
_REG = re.compile(r"r([0-9]+)\Z")


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            toks.append(_Tok("sep", "\n", line, pos - line_start + 1))
            line += 1
            line_start = m.end()
        elif kind == "punct" and m.group() == ";":
            toks.append(_Tok("sep", ";", line, pos - line_start + 1))
        elif kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0
        self.lines: dict[tuple[str, str | None], int] = {}

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def next(self) -> _Tok:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def fail(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        raise ParseError(msg, tok.line, tok.col)

    def skip_seps(self):
        while self.peek().kind == "sep":
            self.pos += 1

    def expect(self, text: str) -> _Tok:
        tok = self.next()
        if tok.text != text or tok.kind in ("sep", "eof"):
            self.fail(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok)
        return tok

    def ident(self) -> str:
        tok = self.next()
        if tok.kind != "ident":
            self.fail(f"expected identifier, found {tok.text or 'end of input'!r}", tok)
        return tok.text

    def reg(self) -> int:
        tok = self.next()
        m = _REG.match(tok.text) if tok.kind == "ident" else None
        if m is None:
            self.fail(f"expected register, found {tok.text!r}", tok)
        n = int(m.group(1))
        if n >= NUM_REGS:
            self.fail(f"register r{n} out of range", tok)
        return n

    def imm(self) -> int:
        tok = self.next()
        if tok.kind != "int":
            self.fail(f"expected integer, found {tok.text!r}", tok)
        v = int(tok.text, 0)
        if not WORD_MIN <= v <= WORD_MAX:
            self.fail(f"immediate {v} does not fit a word", tok)
        return v

    def program(self) -> Program:
        funcs = []
        self.skip_seps()
        if self.peek().kind == "eof":
            self.fail("expected 'func'")
        while self.peek().kind != "eof":
            funcs.append(self.function())
            self.skip_seps()
        return Program(tuple(funcs), default_entry(f.name for f in funcs))

    def function(self) -> Function:
        tok = self.expect("func")
        name = self.ident()
        self.lines[(name, None)] = tok.line
        self.skip_seps()
        self.expect("{")
        blocks = []
        while True:
            self.skip_seps()
            if self.peek().text == "}":
                self.next()
                break
            blocks.append(self.block(name))
        return Function(name, tuple(blocks))

    def block(self, fname: str) -> BasicBlock:
        tok = self.expect("block")
        label = self.ident()
        self.lines.setdefault((fname, label), tok.line)
        section = MemSpace.FLASH
        if self.peek().kind == "at":
            self.next()
            section = MemSpace.RAM
        self.skip_seps()
        self.expect("{")
        body: list[Instruction] = []
        term: Terminator | None = None
        while True:
            self.skip_seps()
            tok = self.peek()
            if tok.text == "}" and tok.kind == "punct":
                self.next()
                break
            op = self.ident()
            if term is not None:
                self.fail(f"{op!r} after terminator of block {label!r}", tok)
            if op in OPERANDS:
                body.append(self.instruction(op))
            else:
                term = self.terminator(op, tok)
            nxt = self.peek()
            if nxt.kind != "sep" and nxt.text != "}":
                self.fail(f"expected ';', newline or '}}', found {nxt.text!r}", nxt)
        return BasicBlock(label, tuple(body), term or Fallthrough(), section)

    def instruction(self, op: str) -> Instruction:
        args: list[int] = []
        for i, slot in enumerate(OPERANDS[op]):
            if i:
                self.expect(",")
            if slot == "reg":
                args.append(self.reg())
            elif slot == "imm":
                args.append(self.imm())
            else:
                self.expect("[")
                args.append(self.reg())
                nxt = self.peek()
                if not (nxt.kind == "int" and nxt.text.startswith("+")):
                    self.expect("+")
                args.append(self.imm())
                self.expect("]")
        return Instruction(op, tuple(args))

    def terminator(self, op: str, tok: _Tok) -> Terminator:
        if op == "br":
            return Br(self.ident())
        if op == "ljmp":
            return LongJump(self.ident())
        if op == "ret":
            return Ret()
        if op == "call":
            return Call(self.ident())
        if op == "brc":
            cond = self.ident()
            if cond not in CONDS:
                self.fail(f"unknown condition {cond!r}", tok)
            ra = self.reg()
            self.expect(",")
            rb = self.reg()
            self.expect(",")
            return BrCond(cond, ra, rb, self.ident())
        if op in ("cbz", "cbnz"):
            ra = self.reg()
            self.expect(",")
            return CmpBranchZero(op == "cbnz", ra, self.ident())
        self.fail(f"unknown opcode {op!r}", tok)


def parse_program(text: str) -> Program:
    """Parse CFG-IR source, raising :class:`ParseError` on syntax or structure errors."""
    parser = _Parser(text)
    prog = parser.program()
    diags = validate(prog)
    if diags:
        d = diags[0]
        line = parser.lines.get((d.function, d.block)) or parser.lines.get((d.function, None))
        raise ParseError(str(d), line)
    return prog


def print_program(p: Program) -> str:
    """Canonical text; ``parse_program(print_program(p)) == p`` for valid programs."""
    lines = []
    for f in p.functions:
        lines.append(f"func {f.name} {{")
        for b in f.blocks:
            head = f"  block {b.label}" + (" @ram" if b.section is MemSpace.RAM else "") + " {"
            stmts = [str(i) for i in b.body]
            if not isinstance(b.terminator, Fallthrough):
                stmts.append(str(b.terminator))
            if stmts:
                lines.append(head)
                lines.extend(f"    {s}" for s in stmts)
                lines.append("  }")
            else:
                lines.append(head + " }")
        lines.append("}")
    return "\n".join(lines) + "\n"

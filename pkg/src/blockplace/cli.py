"""Command-line front end: ``blockplace <subcommand> ...``.

Exit codes:
  0  success
  2  usage error
  3  file could not be read or written
  4  program text failed to parse or validate
  5  hardware configuration rejected
  6  problem extraction or problem document error
  7  model or solver error
  8  transformation error
  9  simulation error
 10  case-study parameter error
 11  transformed program changed observable behavior
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field

from . import casestudy, tradeoff
from .analysis import PlacementProblem, Profile, Static, extract_problem, problem_from_json
from .errors import (
    AnalysisError,
    CaseStudyError,
    HwConfigError,
    ModelError,
    ParseError,
    SimError,
    SolverError,
    TransformError,
)
from .hwmodel import default_hw, load_hw_config
from .ilpmodel import SolveConstraints, build_ilp, evaluate_assignment, export_lp
from .ir import Program, parse_program, print_program
from .sim import SimConfig, profile_frequencies, simulate
from .solver import placement_from_json, solution_to_json, solve
from .transform import apply_placement, measure_image

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_PARSE = 4
EXIT_HW = 5
EXIT_ANALYSIS = 6
EXIT_SOLVER = 7
EXIT_TRANSFORM = 8
EXIT_SIM = 9
EXIT_CASE = 10
EXIT_MISMATCH = 11

_EXIT_FOR = [
    (ParseError, EXIT_PARSE),
    (HwConfigError, EXIT_HW),
    (AnalysisError, EXIT_ANALYSIS),
    (ModelError, EXIT_SOLVER),
    (SolverError, EXIT_SOLVER),
    (TransformError, EXIT_TRANSFORM),
    (SimError, EXIT_SIM),
    (CaseStudyError, EXIT_CASE),
    (OSError, EXIT_IO),
]


class SemanticMismatch(Exception):
    pass


class UsageError(Exception):
    pass


@dataclass
class RunArtifacts:
    exit_code: int
    files: list = field(default_factory=list)  # (path, kind)


# --------------------------------------------------------------------------
# helpers


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _commit(outputs: list[tuple[str, str, str]]) -> list[tuple[str, str]]:
    """Write every (path, kind, text) atomically; nothing is written before all
    outputs have been computed."""
    written = []
    for path, kind, text in outputs:
        d = os.path.dirname(os.path.abspath(path))
        os.makedirs(d, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        written.append((path, kind))
    return written


def _hw(args):
    return load_hw_config(_read(args.hw)) if args.hw else default_hw()


def _limit(text: str | None) -> float:
    if text is None or text.lower() in ("inf", "none", "unbounded"):
        return math.inf
    return float(text)


def _ram_budget(text: str | None, program: Program | None, hw) -> float:
    if text is not None and text.endswith("%"):
        if program is None:
            raise UsageError("a percentage RAM budget needs a program input")
        flash, _ = measure_image(program, hw)
        return flash * float(text[:-1]) / 100
    return _limit(text)


def _freq(text: str | None):
    if text is None:
        return Static(10)
    kind, _, arg = text.partition(":")
    if kind == "static":
        return Static(int(arg) if arg else 10)
    if kind == "profile" and arg:
        counts = json.loads(_read(arg))
        if not isinstance(counts, dict):
            raise AnalysisError("profile file must map block ids to counts")
        return Profile({str(k): v for k, v in counts.items()})
    raise UsageError(f"--freq must be static:<base> or profile:<file>, not {text!r}")


def _load(args, hw) -> tuple[Program | None, PlacementProblem]:
    """Program (or None) and placement problem for ``-i``; ``.json`` inputs are problem documents."""
    text = _read(args.input)
    ram = getattr(args, "ram", None)
    xlimit = getattr(args, "xlimit", None)
    if args.input.endswith(".json"):
        prob = problem_from_json(text)
        r_spare = prob.r_spare if ram is None else _ram_budget(ram, None, hw)
        x_limit = prob.x_limit if xlimit is None else _limit(xlimit)
        return None, PlacementProblem(prob.blocks, r_spare, x_limit, prob.e_flash, prob.e_ram)
    program = parse_program(text)
    prob = extract_problem(
        program, hw, _freq(getattr(args, "freq", None)),
        _ram_budget(ram, program, hw), _limit(xlimit),
    )
    return program, prob


def _out(args, name: str) -> str:
    return os.path.join(args.out_dir, name)


def _pct(new, old) -> str:
    if old == 0:
        return "n/a"
    return f"{(new - old) / old * 100:+.2f} %"


def _fmt(v) -> str:
    if v == math.inf:
        return "unbounded"
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return f"{v:.6g}" if isinstance(v, float) else str(v)


def _report_section(title: str, prob: PlacementProblem, sol) -> list[str]:
    base = evaluate_assignment(prob, ())
    m = sol.metrics
    p0 = base.energy / base.cycles if base.cycles else 0.0
    p1 = m.energy / m.cycles if m.cycles else 0.0
    rows = [
        ("energy", base.energy, m.energy),
        ("cycles", base.cycles, m.cycles),
        ("avg power", p0, p1),
    ]
    lines = [title, f"  {'quantity (model units)':<24}{'baseline':>14}{'optimized':>14}{'change':>12}"]
    for name, a, b in rows:
        lines.append(f"  {name:<24}{_fmt(a):>14}{_fmt(b):>14}{_pct(b, a):>12}")
    lines.append(f"  {'RAM bytes':<24}{_fmt(base.ram_bytes):>14}{_fmt(m.ram_bytes):>14}")
    lines.append(f"  time factor: {m.time_factor:.4f}")
    order = prob.ids
    lines.append("  blocks in RAM: " + (" ".join(b for b in order if b in sol.in_ram) or "(none)"))
    lines.append("  instrumented: " + (" ".join(b for b in order if b in m.instrumented) or "(none)"))
    lines.append(f"  solver: optimal={sol.optimal} nodes_explored={sol.nodes_explored}")
    return lines


def _constraint_line(prob):
    return f"constraints: r_spare={_fmt(prob.r_spare)} bytes, x_limit={_fmt(prob.x_limit)}"


# --------------------------------------------------------------------------
# subcommands


def cmd_optimize(args):
    hw = _hw(args)
    _, prob = _load(args, hw)
    sol = solve(prob, None, args.solver)
    lines = [f"placement report for {args.input}", _constraint_line(prob), f"frequencies: {args.freq or 'static:10'}", ""]
    lines += _report_section("model", prob, sol)
    return [
        (_out(args, "placement.json"), "placement.json", solution_to_json(prob, sol) + "\n"),
        (_out(args, "report.txt"), "report.txt", "\n".join(lines) + "\n"),
    ]


def cmd_transform(args):
    hw = _hw(args)
    program = parse_program(_read(args.input))
    R = placement_from_json(_read(args.placement))
    out, report = apply_placement(program, R, hw)
    print(f"moved {len(report.moved)} block(s), rewrote {len(report.rewritten)}; "
          f"+{report.added_bytes_ram} B RAM, +{report.added_bytes_flash} B flash")
    return [(_out(args, "transformed.cfgir"), "transformed.cfgir", print_program(out))]


def cmd_simulate(args):
    hw = _hw(args)
    program = parse_program(_read(args.input))
    res = simulate(program, hw, SimConfig(data_memory_words=args.memory_words, max_steps=args.max_steps))
    print(f"trace: {' '.join(map(str, res.trace))}")
    print(f"cycles: flash={res.cycles_flash} ram={res.cycles_ram} total={res.cycles}")
    print(f"energy: {_fmt(res.energy)} (model units)  steps: {res.steps}")
    outputs = []
    if args.trace_out:
        outputs.append((args.trace_out, "trace", "".join(f"{v}\n" for v in res.trace)))
    if args.profile_out:
        prof = profile_frequencies(res).counts
        outputs.append((args.profile_out, "profile", json.dumps(prof, indent=2) + "\n"))
    return outputs


def cmd_enumerate(args):
    hw = _hw(args)
    _, prob = _load(args, hw)
    points = tradeoff.enumerate_space(prob, args.max_blocks)
    return [(_out(args, "space.csv"), "space.csv", tradeoff.space_to_csv(points))]


def cmd_sweep(args):
    hw = _hw(args)
    program, prob = _load(args, hw)
    try:
        if args.which == "ram":
            values = [_ram_budget(v, program, hw) for v in args.values.split(",")]
        else:
            values = [_limit(v) for v in args.values.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad --values: {exc}") from None
    kw = {"x_limit": prob.x_limit} if args.which == "ram" else {"r_spare": prob.r_spare}
    rows = tradeoff.sweep_constraint(prob, args.which, values, method=args.solver, **kw)
    return [(_out(args, "sweep.csv"), "sweep.csv", tradeoff.sweep_to_csv(prob, args.which, rows))]


def _case_params(args) -> casestudy.CaseStudyParams:
    if args.params:
        return casestudy.CaseStudyParams.from_json(_read(args.params))
    missing = [n for n in ("e0", "ta", "ps", "ke", "kt") if getattr(args, n) is None]
    if missing:
        raise UsageError("case-study needs --params or all of --e0 --ta --ps --ke --kt")
    return casestudy.CaseStudyParams(args.e0, args.ta, args.ps, args.ke, args.kt)


def _sci(v: float) -> str:
    mant, exp = f"{v:.2e}".split("e")
    return f"{mant}e{int(exp)}"


def cmd_case_study(args):
    params = _case_params(args)
    if args.saved:
        print(_sci(casestudy.energy_saved(params)))
        return []
    if args.periods:
        periods = [float(v) for v in args.periods.split(",")]
    else:
        periods = casestudy.period_multiples(params, args.multiples)
    rows = casestudy.sweep_period(params, periods)
    return [(_out(args, "case.csv"), "case.csv", casestudy.sweep_to_csv(rows))]


def cmd_export_lp(args):
    hw = _hw(args)
    _, prob = _load(args, hw)
    return [(_out(args, "model.lp"), "model.lp", export_lp(build_ilp(prob)))]


def cmd_full(args):
    hw = _hw(args)
    program = parse_program(_read(args.input))
    r_spare = _ram_budget(args.ram, program, hw)
    x_limit = _limit(args.xlimit)
    cfg = SimConfig(data_memory_words=args.memory_words, max_steps=args.max_steps)

    static_prob = extract_problem(program, hw, Static(args.base), r_spare, x_limit)
    static_sol = solve(static_prob, None, args.solver)
    transformed, _ = apply_placement(program, static_sol.in_ram, hw)
    original_run = simulate(program, hw, cfg)
    transformed_run = simulate(transformed, hw, cfg)
    if (original_run.trace, original_run.final_memory) != (transformed_run.trace, transformed_run.final_memory):
        raise SemanticMismatch("transformed program diverged from the original (trace or memory differs)")

    profile_prob = extract_problem(program, hw, profile_frequencies(original_run), r_spare, x_limit)
    profile_sol = solve(profile_prob, None, args.solver)

    lines = [f"pipeline report for {args.input}", _constraint_line(static_prob), ""]
    lines += _report_section(f"static estimate (base {args.base})", static_prob, static_sol)
    lines.append("")
    lines += _report_section("profiled frequencies", profile_prob, profile_sol)
    lines.append("")
    lines.append("simulation of the static placement (model units)")
    e0, e1 = original_run.energy, transformed_run.energy
    c0, c1 = original_run.cycles, transformed_run.cycles
    lines.append(f"  energy {_fmt(e0)} -> {_fmt(e1)} ({_pct(e1, e0)})")
    lines.append(f"  cycles {c0} -> {c1} ({_pct(c1, c0)})")
    if c0 and c1:
        lines.append(f"  avg power {_fmt(e0 / c0)} -> {_fmt(e1 / c1)} ({_pct(e1 / c1, e0 / c0)})")
    lines.append("  traces equal: yes")
    return [
        (_out(args, "placement.static.json"), "placement.json", solution_to_json(static_prob, static_sol) + "\n"),
        (_out(args, "placement.profile.json"), "placement.json", solution_to_json(profile_prob, profile_sol) + "\n"),
        (_out(args, "transformed.cfgir"), "transformed.cfgir", print_program(transformed)),
        (_out(args, "report.txt"), "report.txt", "\n".join(lines) + "\n"),
    ]


# --------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="blockplace",
        description="Choose which basic blocks run from RAM instead of flash to minimize modeled energy.",
        epilog=__doc__.split("\n", 2)[2],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, input_help="program (.cfgir) or problem document (.json)"):
        sp.add_argument("-i", "--input", required=True, help=input_help)
        sp.add_argument("--hw", help="hardware model JSON (defaults apply to absent keys)")
        sp.add_argument("-o", "--out-dir", default=".", help="directory for output files")

    def limits(sp):
        sp.add_argument("--ram", help="RAM budget for code in bytes, or N%% of the flash image")
        sp.add_argument("--xlimit", help="maximum modeled time factor (>= 1)")

    def solver(sp):
        sp.add_argument("--solver", choices=("bnb", "exhaustive"), default="bnb")

    def simcfg(sp):
        sp.add_argument("--max-steps", type=int, default=1_000_000)
        sp.add_argument("--memory-words", type=int, default=256)

    sp = sub.add_parser("optimize", help="solve for the minimum-energy RAM set")
    common(sp)
    limits(sp)
    solver(sp)
    sp.add_argument("--freq", help="static:<base> (default static:10) or profile:<file>")
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("transform", help="apply a placement.json to a program")
    common(sp, "program (.cfgir)")
    sp.add_argument("--placement", required=True, help="placement.json from optimize")
    sp.set_defaults(func=cmd_transform)

    sp = sub.add_parser("simulate", help="run a program and report cycles and energy")
    common(sp, "program (.cfgir)")
    simcfg(sp)
    sp.add_argument("--trace-out", help="write the output trace, one decimal value per line")
    sp.add_argument("--profile-out", help="write block execution counts as JSON")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("enumerate", help="write every placement's model metrics to space.csv")
    common(sp)
    sp.add_argument("--ram", help="RAM budget used for the feasible_ram column")
    sp.add_argument("--max-blocks", type=int, default=tradeoff.DEFAULT_MAX_BLOCKS)
    sp.add_argument("--freq", help="static:<base> or profile:<file>")
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("sweep", help="solve along ascending values of one constraint")
    common(sp)
    limits(sp)
    solver(sp)
    sp.add_argument("--which", choices=("ram", "time"), required=True)
    sp.add_argument("--values", required=True, help="comma-separated ascending values")
    sp.add_argument("--freq", help="static:<base> or profile:<file>")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("case-study", help="periodic wake/sleep energy model")
    sp.add_argument("--params", help="JSON with e0, t_a, p_s, k_e, k_t")
    sp.add_argument("--e0", type=float, help="active-region energy, J")
    sp.add_argument("--ta", type=float, help="active-region duration, s")
    sp.add_argument("--ps", type=float, help="sleep power, W")
    sp.add_argument("--ke", type=float, help="energy factor of the optimization")
    sp.add_argument("--kt", type=float, help="time factor of the optimization")
    sp.add_argument("--saved", action="store_true", help="print the energy saved per period and exit")
    sp.add_argument("--periods", help="comma-separated periods in seconds")
    sp.add_argument("--multiples", type=int, default=10, help="periods t_a, 2 t_a, ... (default 10)")
    sp.add_argument("-o", "--out-dir", default=".")
    sp.set_defaults(func=cmd_case_study)

    sp = sub.add_parser("export-lp", help="write the 0-1 linear model in LP format")
    common(sp)
    limits(sp)
    sp.add_argument("--freq", help="static:<base> or profile:<file>")
    sp.set_defaults(func=cmd_export_lp)

    sp = sub.add_parser("full", help="optimize, transform, simulate, re-optimize from the profile")
    common(sp, "program (.cfgir)")
    limits(sp)
    solver(sp)
    simcfg(sp)
    sp.add_argument("--base", type=int, default=10, help="static frequency base")
    sp.set_defaults(func=cmd_full)
    return p


def run(argv=None) -> RunArtifacts:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"blockplace: error: {exc}", file=sys.stderr)
        return RunArtifacts(EXIT_USAGE)
    except SystemExit as exc:  # --help
        return RunArtifacts(int(exc.code or 0))
    try:
        outputs = args.func(args)
        files = _commit(outputs)
    except SemanticMismatch as exc:
        print(f"blockplace: semantic-preservation failure: {exc}", file=sys.stderr)
        return RunArtifacts(EXIT_MISMATCH)
    except UsageError as exc:
        print(f"blockplace: error: {exc}", file=sys.stderr)
        return RunArtifacts(EXIT_USAGE)
    except json.JSONDecodeError as exc:
        print(f"blockplace: error: malformed JSON: {exc}", file=sys.stderr)
        return RunArtifacts(EXIT_ANALYSIS)
    except Exception as exc:
        for cls, code in _EXIT_FOR:
            if isinstance(exc, cls):
                print(f"blockplace: error: {exc}", file=sys.stderr)
                return RunArtifacts(code)
        raise
    for path, _ in files:
        print(f"wrote {path}")
    return RunArtifacts(EXIT_OK, files)


def cmd_pipeline(argv) -> RunArtifacts:
    """``run`` for the ``full`` subcommand; ``argv`` excludes the subcommand name."""
    return run(["full", *argv])


def main():
    sys.exit(run().exit_code)


if __name__ == "__main__":
    main()

"""Command-line driver.

Five subcommands mirror the pipeline stages:

    translate    program.mfun -> clause system (+ source-map sidecar)
    transform    clause system -> basic-sorted bundle
    solve        bundle -> predicate model (external solver or fixture)
    strengthen   bundle + model + program -> strengthened program
    verify       program -> everything above in one run

Reports are `key=value` lines on stdout followed by one `VERDICT: ...` line.
Exit codes: 0 success, 1 negative verdict (counterexample, unsat/unknown,
invalid model, untransformable system), 2 usage error, 3 tool failure
(unreadable input, missing solver).  Output files and default stdout are
byte-deterministic for a fixed invocation; timing lines appear only under
--timings.
"""

from __future__ import annotations

import argparse
import pathlib
import shlex
import sys
import time
from typing import Dict, List, Optional, Sequence, Tuple

from . import minifun as mf
from .cata import recognize_all
from .chc_text import ChcParseError, parse_chc, print_chc
from .horn import (ModelError, SolverConfig, SolverError, check_model,
                   emit_horn, format_model, invoke, parse_model)
from .ir import IrError
from .strengthen import StrengthenError, strengthen_program
from .transform import TransformError, read_bundle, t_cata, write_bundle
from .translate import translate_to_chcs

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_USAGE = 2
EXIT_ERROR = 3


class CliError(Exception):
    """Tool failure: bad input, missing file, unusable configuration."""


class Report:
    """Collects key=value lines; prints as it goes, keeps a copy for files."""

    def __init__(self, timings: bool = False) -> None:
        self.lines: List[str] = []
        self.timings = timings
        self._t0 = time.monotonic()

    def line(self, key: str, value: object) -> None:
        text = "%s=%s" % (key, value)
        self.lines.append(text)
        print(text)

    def timing(self, phase: str) -> None:
        # opt-in so default stdout stays identical across runs
        if self.timings:
            print("time_%s=%.3f" % (phase, time.monotonic() - self._t0))
        self._t0 = time.monotonic()

    def verdict(self, text: str) -> str:
        line = "VERDICT: %s" % text
        self.lines.append(line)
        print(line)
        return line


def _read(path: str) -> str:
    p = pathlib.Path(path)
    if not p.is_file():
        raise CliError("no such file: %s" % path)
    return p.read_text()


def _write(report: Report, path: pathlib.Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    report.line("wrote", path)


def _int_range(text: str) -> Tuple[int, int]:
    try:
        lo_s, hi_s = text.split(":")
        lo, hi = int(lo_s), int(hi_s)
    except ValueError:
        raise argparse.ArgumentTypeError("expected LO:HI, got %r" % text)
    if lo > hi:
        raise argparse.ArgumentTypeError("empty range %r" % text)
    return lo, hi


def _violation_line(v: mf.ContractViolation) -> str:
    args = ", ".join(repr(a) for a in v.args)
    return "%s(%s) -> %r (%s)" % (v.function, args, v.result, v.reason)


def _load_program(path: str) -> mf.Program:
    prog = mf.parse_program(_read(path))
    if not prog.functions:
        raise CliError("no functions in %s" % path)
    mf.typecheck(prog)
    return prog


def _solver_config(args: argparse.Namespace) -> Optional[SolverConfig]:
    if getattr(args, "solver", None):
        return SolverConfig(tuple(shlex.split(args.solver)), args.timeout)
    return SolverConfig.from_env(args.timeout)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_translate(args: argparse.Namespace) -> int:
    report = Report(args.timings)
    prog = _load_program(args.input)
    system, smap = translate_to_chcs(prog)
    report.line("functions", len(prog.functions))
    report.line("predicates", len(system.preds))
    report.line("clauses", len(system.clauses))
    report.line("goals", len(system.goals))
    out = pathlib.Path(args.output)
    _write(report, out, print_chc(system))
    _write(report, pathlib.Path(str(out) + ".map.json"), smap.to_json())
    report.timing("translate")
    report.verdict("translated")
    return EXIT_OK


def cmd_transform(args: argparse.Namespace) -> int:
    report = Report(args.timings)
    system = parse_chc(_read(args.input))
    catas, rejected = recognize_all(system)
    report.line("catamorphisms", ",".join(sorted(catas)) or "-")
    for name in sorted(rejected):
        report.line("rejected", "%s (%s)" % (name, rejected[name].message))
    try:
        result = t_cata(system, catas)
    except TransformError as e:
        report.verdict("not transformable: %s" % e)
        return EXIT_VERDICT
    for key in sorted(result.statistics):
        report.line(key, result.statistics[key])
    _write(report, pathlib.Path(args.output), write_bundle(result))
    report.timing("transform")
    report.verdict("basic-sorted clause system emitted")
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    report = Report(args.timings)
    result = read_bundle(_read(args.input))
    system = result.system

    def check(model: Dict[str, object]) -> int:
        res = check_model(system, model, mode="bounded",
                          int_range=args.int_range, seed=args.seed)
        report.line("model_predicates", ",".join(sorted(model)))
        report.line("checked_assignments", res.checked_assignments)
        report.timing("check")
        if not res.ok:
            for f in res.failures:
                report.line("failed_clause", "%s:%d" % (f.kind, f.index))
                if f.env is not None:
                    report.line("witness", sorted(f.env.items()))
            report.verdict("model invalid")
            return EXIT_VERDICT
        return EXIT_OK

    if args.model_in:
        model = parse_model(_read(args.model_in), system)
        rc = check(model)
        if rc != EXIT_OK:
            return rc
        if args.model_out:
            _write(report, pathlib.Path(args.model_out), format_model(model))
        report.verdict("model ok")
        return EXIT_OK

    config = _solver_config(args)
    if config is None:
        raise CliError("no solver configured; set STRONGPOST_SOLVER, "
                       "pass --solver, or supply --model-in")
    script = emit_horn(system, get_model=True)
    res = invoke(script, config)
    report.line("solver_status", res.status)
    report.timing("solve")
    if res.status == "error":
        raise CliError("solver failed:\n%s" % res.output)
    if res.status != "sat":
        report.verdict(res.status)
        return EXIT_VERDICT
    model = parse_model(res.model_text(), system)
    rc = check(model)
    if rc != EXIT_OK:
        return rc
    if args.model_out:
        _write(report, pathlib.Path(args.model_out), format_model(model))
    report.verdict("sat")
    return EXIT_OK


def cmd_strengthen(args: argparse.Namespace) -> int:
    report = Report(args.timings)
    prog = _load_program(args.program)
    original, smap = translate_to_chcs(prog)
    # the definition clauses mention the source predicates, so parse them in
    # the context of the original system to recover the ADT sorts
    result = read_bundle(_read(args.input), context=print_chc(original))
    model = parse_model(_read(args.model), result.system)
    outcome = strengthen_program(prog, result, model, smap,
                                 partial=args.partial)
    for c in outcome.contracts:
        added = mf.format_expr(c.added_formula) if c.added else "-"
        report.line("added_%s" % c.function, added)
    report.timing("strengthen")
    _write(report, pathlib.Path(args.output), outcome.source)
    strengthened = mf.parse_program(outcome.source)
    mf.typecheck(strengthened)
    violations = mf.check_contracts_bounded(strengthened, depth=args.depth,
                                            int_range=args.int_range)
    report.line("recheck_violations", len(violations))
    report.timing("recheck")
    if violations:
        for v in violations:
            report.line("violation", _violation_line(v))
        report.verdict("strengthened contracts violated in bounded check")
        return EXIT_VERDICT
    report.verdict("strengthened contracts emitted")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    report = Report(args.timings)
    out_dir = pathlib.Path(args.out_dir if args.out_dir is not None
                           else pathlib.Path(args.input).stem + "_out")

    def finish(text: str, code: int) -> int:
        report.verdict(text)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.txt").write_text("\n".join(report.lines) + "\n")
        return code

    prog = _load_program(args.input)
    report.line("functions", len(prog.functions))

    violations = mf.check_contracts_bounded(prog, depth=args.depth,
                                            int_range=args.int_range)
    report.timing("precheck")
    if violations:
        for v in violations:
            report.line("counterexample", _violation_line(v))
        return finish("contracts violated (bounded counterexample)",
                      EXIT_VERDICT)
    report.line("precheck", "ok")

    system, smap = translate_to_chcs(prog)
    report.line("predicates", len(system.preds))
    report.line("goals", len(system.goals))
    _write(report, out_dir / "program.chc", print_chc(system))
    _write(report, out_dir / "program.chc.map.json", smap.to_json())
    if not system.goals:
        return finish("contracts trivially valid (no contracts)", EXIT_OK)

    catas, _rej = recognize_all(system)
    report.line("catamorphisms", ",".join(sorted(catas)) or "-")
    try:
        result = t_cata(system, catas)
    except TransformError as e:
        report.line("transform_error", e)
        return finish("not transformable", EXIT_VERDICT)
    report.line("definitions", result.statistics["definitions"])
    _write(report, out_dir / "transformed.bundle", write_bundle(result))
    report.timing("transform")

    if args.model_in:
        model = parse_model(_read(args.model_in), result.system)
        report.line("solver_status", "fixture")
    else:
        config = _solver_config(args)
        if config is None:
            report.line("solver_status", "none")
            return finish("unknown (no solver configured; pass --model-in "
                          "or set STRONGPOST_SOLVER)", EXIT_VERDICT)
        res = invoke(emit_horn(result.system, get_model=True), config)
        report.line("solver_status", res.status)
        if res.status == "error":
            raise CliError("solver failed:\n%s" % res.output)
        if res.status == "unsat":
            return finish("contracts invalid (solver reported unsat)",
                          EXIT_VERDICT)
        if res.status != "sat":
            return finish("unknown (solver reported %s)" % res.status,
                          EXIT_VERDICT)
        model = parse_model(res.model_text(), result.system)
    report.timing("solve")

    mres = check_model(result.system, model, mode="bounded",
                       int_range=(-4, 4), seed=args.seed)
    report.line("model_check", "ok" if mres.ok else "failed")
    report.line("checked_assignments", mres.checked_assignments)
    if not mres.ok:
        for f in mres.failures:
            report.line("failed_clause", "%s:%d" % (f.kind, f.index))
        return finish("model invalid", EXIT_VERDICT)
    _write(report, out_dir / "model.smt2", format_model(model))
    report.timing("check_model")

    outcome = strengthen_program(prog, result, model, smap,
                                 partial=args.partial)
    for c in outcome.contracts:
        added = mf.format_expr(c.added_formula) if c.added else "-"
        report.line("added_%s" % c.function, added)
    _write(report, out_dir / "strengthened.mfun", outcome.source)
    report.timing("strengthen")

    strengthened = mf.parse_program(outcome.source)
    mf.typecheck(strengthened)
    violations = mf.check_contracts_bounded(strengthened, depth=args.depth,
                                            int_range=args.int_range)
    report.line("recheck_violations", len(violations))
    report.timing("recheck")
    if violations:
        return finish("strengthened contracts violated in bounded check",
                      EXIT_VERDICT)
    return finish("contracts valid; strengthened contracts emitted", EXIT_OK)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, int_range: str = "-2:2") -> None:
    p.add_argument("--depth", type=int, default=3,
                   help="ADT depth bound for bounded checks (default 3)")
    p.add_argument("--int-range", type=_int_range, default=_int_range(int_range),
                   metavar="LO:HI",
                   help="integer window for bounded checks (default %s)" % int_range)
    p.add_argument("--seed", type=int, default=0,
                   help="seed for sampled model checking (default 0)")
    p.add_argument("--timings", action="store_true",
                   help="print per-phase timing lines")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="strongpost",
        description="strengthen function contracts via ADT-free Horn clauses")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("translate",
                       help="compile a program to a clause system")
    p.add_argument("input", help="source program (.mfun)")
    p.add_argument("-o", "--output", required=True,
                   help="clause system output (.chc); a .map.json sidecar "
                        "is written next to it")
    _add_common(p)
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("transform",
                       help="remove ADT arguments from a clause system")
    p.add_argument("input", help="clause system (.chc)")
    p.add_argument("-o", "--output", required=True,
                   help="transformation bundle output")
    _add_common(p)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("solve",
                       help="find or check a model for a transformed bundle")
    p.add_argument("input", help="transformation bundle")
    p.add_argument("--solver", help="solver command (overrides STRONGPOST_SOLVER)")
    p.add_argument("--timeout", type=float, default=120.0,
                   help="solver timeout in seconds (default 120)")
    p.add_argument("--model-out", help="write the (checked) model here")
    p.add_argument("--model-in", help="check this model instead of solving")
    _add_common(p, int_range="-4:4")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("strengthen",
                       help="back-translate a model into stronger contracts")
    p.add_argument("input", help="transformation bundle")
    p.add_argument("--model", required=True, help="predicate model (.smt2)")
    p.add_argument("--program", required=True,
                   help="the source program the bundle came from (.mfun)")
    p.add_argument("-o", "--output", required=True,
                   help="strengthened program output (.mfun)")
    p.add_argument("--partial", nargs="?", const="min", choices=["min"],
                   help="keep only a minimal strictly-strengthening suffix")
    _add_common(p)
    p.set_defaults(func=cmd_strengthen)

    p = sub.add_parser("verify",
                       help="run the whole pipeline on a program")
    p.add_argument("input", help="source program (.mfun)")
    p.add_argument("--out-dir", help="artifact directory "
                                     "(default: <input stem>_out)")
    p.add_argument("--solver", help="solver command (overrides STRONGPOST_SOLVER)")
    p.add_argument("--timeout", type=float, default=120.0,
                   help="solver timeout in seconds (default 120)")
    p.add_argument("--model-in", help="use this model instead of solving")
    p.add_argument("--partial", nargs="?", const="min", choices=["min"],
                   help="keep only a minimal strictly-strengthening suffix")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, mf.MiniFunError, ChcParseError, IrError,
            TransformError, StrengthenError, SolverError, ModelError) as e:
        print("error: %s" % e, file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

    intervalsens contract|compare|sensitivity|check --problem PATH [options]
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from decimal import ROUND_CEILING, ROUND_FLOOR, Decimal
from typing import Sequence, TextIO

from .contractors import Operator, OperatorConfig, Status
from .expressions import EvaluationError, ProblemInstance, ProblemSyntaxError, load_problem, to_text
from .interval import Interval
from .sensitivity import InflationConfig, IterationTrace, compare_operators, inflate_and_prove, refine

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_EMPTY = 2
EXIT_USAGE = 64

_OPERATORS = {"hs": Operator.HANSEN_SENGUPTA, "krawczyk": Operator.KRAWCZYK}


class UsageError(Exception):
    pass


def fmt_endpoint(v: float, precision: int, upward: bool) -> str:
    """Decimal rendering rounded outward so the printed value still bounds ``v``."""
    if v == float("inf"):
        return "inf"
    if v == float("-inf"):
        return "-inf"
    q = Decimal(1).scaleb(-precision)
    d = Decimal(v).quantize(q, rounding=ROUND_CEILING if upward else ROUND_FLOOR)
    if d == 0:
        d = abs(d)
    return f"{d:f}"


def fmt_interval(c: Interval, precision: int) -> str:
    if c.is_empty:
        return "empty"
    return f"[{fmt_endpoint(c.lo, precision, False)}, {fmt_endpoint(c.hi, precision, True)}]"


def fmt_box(box: Sequence[Interval], precision: int) -> str:
    return "(" + ", ".join(fmt_interval(c, precision) for c in box) + ")"


def _num(v: float | None) -> str:
    return "" if v is None else repr(float(v))


def exit_code(status: Status) -> int:
    if status is Status.EXISTENCE_PROVED:
        return EXIT_OK
    if status is Status.EMPTY:
        return EXIT_EMPTY
    return EXIT_FAIL


def _trace_rows(trace: IterationTrace, names: Sequence[str]) -> tuple[list[str], list[list[str]]]:
    header = ["k"]
    for nm in names:
        header += [f"{nm}_lo", f"{nm}_hi"]
    header += ["width_norm", "existence"]
    rows = []
    for s in trace.steps:
        row = [str(s.k)]
        for c in s.box:
            row += (["", ""] if c.is_empty else [_num(c.lo), _num(c.hi)])
        row += [_num(s.width_norm), "1" if s.existence else "0"]
        rows.append(row)
    return header, rows


def write_csv(path: str | None, header: list[str], rows: list[list[str]], fallback: TextIO | None = None) -> None:
    if path is None and fallback is None:
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    if path is None:
        fallback.write(buf.getvalue())  # type: ignore[union-attr]
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())


def _print_trace(trace: IterationTrace, precision: int, out: TextIO) -> None:
    for s in trace.steps:
        w = "-" if s.width_norm is None else fmt_endpoint(s.width_norm, precision + 3, True)
        flag = "  existence" if s.existence else ""
        out.write(f"  k={s.k:<3d} {fmt_box(s.box, precision)}  width={w}{flag}\n")


def _operator_config(args: argparse.Namespace) -> OperatorConfig:
    return OperatorConfig(_OPERATORS[args.operator], args.krawczyk_intersect)


def cmd_contract(args: argparse.Namespace, inst: ProblemInstance, out: TextIO) -> int:
    if inst.initial_box is None:
        raise UsageError("problem has no 'box' declaration")
    cfg = _operator_config(args)
    trace = refine(inst.system, inst.param_box, inst.initial_box, cfg, args.max_iter)
    out.write(f"operator: {cfg.operator.name.lower().replace('_', '-')}\n")
    _print_trace(trace, args.precision, out)
    step = trace.existence_step
    out.write(f"existence step: {step if step is not None else 'none'}\n")
    out.write(f"final enclosure: {fmt_box(trace.final_box, args.precision)}\n")
    out.write(f"status: {trace.final_status.value}\n")
    if args.csv:
        write_csv(args.csv, *_trace_rows(trace, inst.system.var_names))
    return exit_code(trace.final_status)


def cmd_compare(args: argparse.Namespace, inst: ProblemInstance, out: TextIO) -> int:
    if inst.initial_box is None:
        raise UsageError("problem has no 'box' declaration")
    rows = compare_operators(inst.system, inst.param_box, inst.initial_box, args.max_iter, args.krawczyk_intersect)
    table = [[str(r.k), _num(r.hs_width), _num(r.kr_width), _num(r.ratio)] for r in rows]
    write_csv(args.csv, ["k", "hs_width", "kr_width", "ratio"], table, fallback=out)
    later = [r for r in rows if r.k >= 1]
    if later:
        peak = max(later, key=lambda r: r.ratio)
        out.write(f"# peak ratio {peak.ratio:.6g} at step {peak.k}\n")
    return EXIT_OK


def cmd_sensitivity(args: argparse.Namespace, inst: ProblemInstance, out: TextIO) -> int:
    if inst.nominal_point is None:
        raise UsageError("problem has no 'nominal' declaration")
    cfg = InflationConfig(k_max=args.kmax, delta=args.delta)
    res = inflate_and_prove(inst.system, inst.param_box, inst.nominal_point, cfg, _operator_config(args))
    _print_trace(res.trace, args.precision, out)
    if res.success:
        out.write(f"success at iteration {res.trace.existence_step}\n")
        out.write(f"certified enclosure: {fmt_box(res.result, args.precision)}\n")
    else:
        out.write("FAILED (returned whole space)\n")
    if args.csv:
        write_csv(args.csv, *_trace_rows(res.trace, inst.system.var_names))
    return EXIT_OK if res.success else EXIT_FAIL


def cmd_check(args: argparse.Namespace, inst: ProblemInstance, out: TextIO) -> int:
    sys_ = inst.system
    vn, pn = sys_.var_names, sys_.param_names

    def show(e) -> str:
        return to_text(e, vn, pn)

    out.write(f"variables ({sys_.n}): {', '.join(vn)}\n")
    out.write(f"parameters ({sys_.p}): {', '.join(pn)}\n")
    out.write("parameter box: " + ", ".join(f"{nm} in {c}" for nm, c in zip(pn, inst.param_box)) + "\n")
    if inst.initial_box is not None:
        out.write("box: " + ", ".join(f"{nm} in {c}" for nm, c in zip(vn, inst.initial_box)) + "\n")
    if inst.nominal_point is not None:
        out.write("nominal: " + ", ".join(f"{nm} = {v!r}" for nm, v in zip(vn, inst.nominal_point)) + "\n")
    out.write("equations:\n")
    for i, fi in enumerate(sys_.f):
        out.write(f"  f{i + 1} = {show(fi)}\n")
    out.write(f"df/dx ({sys_.n}x{sys_.n}):\n")
    for row in sys_.jac_x:
        out.write("  [" + "; ".join(show(e) for e in row) + "]\n")
    out.write(f"df/da ({sys_.n}x{sys_.p}):\n")
    for row in sys_.jac_a:
        out.write("  [" + "; ".join(show(e) for e in row) + "]\n")
    return EXIT_OK


_COMMANDS = {
    "contract": cmd_contract,
    "compare": cmd_compare,
    "sensitivity": cmd_sensitivity,
    "check": cmd_check,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="intervalsens",
        description="Verified enclosures and existence proofs for parametric nonlinear systems.",
    )
    p.add_argument("command", choices=sorted(_COMMANDS))
    p.add_argument("--problem", required=True, help="problem file")
    p.add_argument("--operator", choices=sorted(_OPERATORS), default="hs")
    p.add_argument("--krawczyk-intersect", action="store_true", help="intersect Krawczyk images with their argument")
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("--delta", type=float, default=1.01)
    p.add_argument("--kmax", type=int, default=10)
    p.add_argument("--csv", default=None, help="write the per-step trace to this CSV file")
    p.add_argument("--precision", type=int, default=3, help="decimals for printed endpoints")
    return p


def _validate(args: argparse.Namespace) -> None:
    if args.max_iter < 1:
        raise UsageError("--max-iter must be at least 1")
    if args.kmax < 1:
        raise UsageError("--kmax must be at least 1")
    if not args.delta > 1.0:
        raise UsageError("--delta must be greater than 1")
    if args.precision < 0:
        raise UsageError("--precision must be non-negative")


def main(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        _validate(args)
        inst = load_problem(args.problem)
        return _COMMANDS[args.command](args, inst, out)
    except ProblemSyntaxError as exc:
        err.write(f"{args.problem}:{exc.line}:{exc.col}: error: {exc.message}\n")
        return EXIT_USAGE
    except (UsageError, OSError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except EvaluationError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_FAIL


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_entry()

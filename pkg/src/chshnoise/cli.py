"""Command-line front end: ``chshnoise <subcommand> [flags]``.

Subcommands: state, beta, maximize, scan, curve, threshold, fit, table.
Output goes to stdout or ``--out``; diagnostics go to stderr. Exit status is
0 on success, 1 when an error (or a skipped fit record) was produced and 2 on
usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from . import __version__
from .chsh import MeasurementAngles, bell_value_trace, beta_cw_closed, observables
from .fit import ExperimentPoint, check_table, fit_batch
from .optimize import (
    EQUAL_SPLIT,
    NO_COLORED,
    NO_WHITE,
    Constraint,
    NoSignChangeError,
    curve,
    fixed_white_fraction,
    fixed_white_weight,
    horodecki_max,
    maximize_beta,
    scan,
    threshold_p,
)
from .qstate import Basis, NoiseParams, colored_white, validate

SCAN_HEADER = ("p", "r", "beta_max", "theta_star", "phi_star", "degenerate")
CURVE_HEADER = ("p", "beta_max", "theta_star", "phi_star")
FIT_HEADER = (
    "p", "beta_exp", "sigma", "r", "white_of_noise", "colored_of_noise",
    "beta_model", "status", "reason",
)
TABLE_HEADER = (
    "nr", "p", "one_minus_p", "white_pct", "colored_pct", "r",
    "printed_one_minus_p", "printed_r", "flags",
)
FAMILIES = ("no-white", "no-colored", "equal-split", "fixed-white", "white-weight")
DEFAULT_STEPS = 101
DEFAULT_WHITE_FRAC = 0.035


class CLIError(Exception):
    pass


def fmt(value: Any) -> str:
    """Text form of a CSV cell; floats use the shortest round-trip repr."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (list, tuple)):
        return ";".join(fmt(v) for v in value)
    return str(value)


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def render_json(obj: Any) -> str:
    return json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n"


def emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise CLIError(f"cannot write {out}: {exc.strerror or exc}") from exc


def _angle(value: float, degrees: bool) -> float:
    return math.degrees(value) if degrees else value


def _params(args) -> NoiseParams:
    try:
        return NoiseParams(args.p, args.r)
    except ValueError as exc:
        raise CLIError(str(exc)) from exc


def _p_axis(steps: int) -> np.ndarray:
    if steps < 2:
        raise CLIError(f"--p-steps/--r-steps must be at least 2, got {steps}")
    return np.linspace(0.0, 1.0, steps)


def _constraint(args) -> Constraint:
    family = args.family
    if family == "no-white":
        return NO_WHITE
    if family == "no-colored":
        return NO_COLORED
    if family == "equal-split":
        return EQUAL_SPLIT
    try:
        if family == "fixed-white":
            return fixed_white_fraction(args.white_frac)
        return fixed_white_weight(args.white_weight)
    except ValueError as exc:
        raise CLIError(str(exc)) from exc


def cmd_state(args) -> int:
    params = _params(args)
    rho = colored_white(params, args.basis)
    report = validate(rho)
    if args.format == "json":
        record = {
            "p": params.p,
            "r": params.r,
            "basis": Basis(args.basis).value,
            "entries": [[[float(z.real), float(z.imag)] for z in row] for row in rho],
            "trace": float(np.trace(rho).real),
            "hermiticity_defect": report.hermiticity_defect,
            "trace_defect": report.trace_defect,
            "min_eigenvalue": report.min_eigenvalue,
            "valid": report.ok,
        }
        emit(render_json(record), args.out)
    else:
        rows = [(i, j, rho[i, j].real, rho[i, j].imag) for i in range(4) for j in range(4)]
        text = render_csv(("row", "col", "re", "im"), rows)
        text += (
            f"# trace={fmt(float(np.trace(rho).real))} "
            f"hermiticity_defect={fmt(report.hermiticity_defect)} "
            f"trace_defect={fmt(report.trace_defect)} "
            f"min_eigenvalue={fmt(report.min_eigenvalue)} valid={fmt(report.ok)}\n"
        )
        emit(text, args.out)
    return 0 if report.ok else 1


def cmd_beta(args) -> int:
    params = _params(args)
    angles = MeasurementAngles(args.theta, args.phi)
    rho = colored_white(params, args.basis)
    record = {
        "p": params.p,
        "r": params.r,
        "theta": _angle(angles.theta, args.degrees),
        "phi": _angle(angles.phi, args.degrees),
        "basis": Basis(args.basis).value,
        "beta_trace": bell_value_trace(rho, observables(angles)),
        "beta_closed": beta_cw_closed(params, angles),
    }
    emit(render_json(record), args.out)
    return 0


def cmd_maximize(args) -> int:
    params = _params(args)
    try:
        opt = maximize_beta(params, args.tol)
    except ValueError as exc:
        raise CLIError(str(exc)) from exc
    record = {"p": params.p, "r": params.r, "tol": args.tol, **opt.as_dict()}
    record["theta_star"] = _angle(opt.theta_star, args.degrees)
    record["phi_star"] = _angle(opt.phi_star, args.degrees)
    record["horodecki_max"] = horodecki_max(colored_white(params))
    emit(render_json(record), args.out)
    return 0


def cmd_scan(args) -> int:
    result = scan(_p_axis(args.p_steps), _p_axis(args.r_steps), args.tol)
    rows = [
        (p, r, o.beta_max, _angle(o.theta_star, args.degrees),
         _angle(o.phi_star, args.degrees), o.degenerate)
        for p, r, o in result.present()
    ]
    if args.format == "json":
        emit(render_json([dict(zip(SCAN_HEADER, row)) for row in rows]), args.out)
    else:
        emit(render_csv(SCAN_HEADER, rows), args.out)
    return 0


def cmd_curve(args) -> int:
    result = curve(_constraint(args), _p_axis(args.p_steps), args.tol)
    rows = [
        (p, o.beta_max, _angle(o.theta_star, args.degrees), _angle(o.phi_star, args.degrees))
        for p, o in result.samples
    ]
    if args.format == "json":
        emit(render_json([dict(zip(CURVE_HEADER, row)) for row in rows]), args.out)
    else:
        emit(render_csv(CURVE_HEADER, rows), args.out)
    return 0


def cmd_threshold(args) -> int:
    constraint = _constraint(args)
    try:
        p_star = threshold_p(constraint, (args.p_lo, args.p_hi), args.tol)
    except NoSignChangeError as exc:
        raise CLIError(str(exc)) from exc
    except ValueError as exc:
        raise CLIError(f"invalid bracket for {constraint.label}: {exc}") from exc
    record = {
        "family": args.family,
        "constraint": constraint.label,
        "p_lo": args.p_lo,
        "p_hi": args.p_hi,
        "tol": args.tol,
        "threshold_p": p_star,
    }
    emit(render_json(record), args.out)
    return 0


def _parse_float(text: str, name: str, lineno: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise CLIError(f"line {lineno}: cannot parse {name} value {text!r}") from None
    if not math.isfinite(value):
        raise CLIError(f"line {lineno}: {name} must be finite, got {text!r}")
    return value


def read_experiment_csv(text: str) -> list[ExperimentPoint]:
    """Parse ``p,beta_exp[,sigma]`` records; '#' lines and blank lines are skipped.

    Extra columns are ignored, so fit output can be fed back in.
    """
    lines = [
        (n, line) for n, line in enumerate(text.splitlines(), start=1)
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not lines:
        raise CLIError("input has no header line (expected p,beta_exp[,sigma])")
    header_no, header_line = lines[0]
    header = [h.strip() for h in next(csv.reader([header_line]))]
    if header[:2] != ["p", "beta_exp"]:
        raise CLIError(
            f"line {header_no}: header must start with p,beta_exp, got {header_line.strip()!r}"
        )
    has_sigma = "sigma" in header
    sigma_idx = header.index("sigma") if has_sigma else -1

    points = []
    for lineno, line in lines[1:]:
        fields = [f.strip() for f in next(csv.reader([line]))]
        if len(fields) != len(header):
            raise CLIError(
                f"line {lineno}: expected {len(header)} fields, got {len(fields)}"
            )
        p = _parse_float(fields[0], "p", lineno)
        beta = _parse_float(fields[1], "beta_exp", lineno)
        sigma = None
        if has_sigma and fields[sigma_idx] != "":
            sigma = _parse_float(fields[sigma_idx], "sigma", lineno)
        try:
            points.append(ExperimentPoint(p, beta, sigma))
        except ValueError as exc:
            raise CLIError(f"line {lineno}: {exc}") from None
    return points


def cmd_fit(args) -> int:
    try:
        if args.input == "-":
            text = sys.stdin.read()
        else:
            text = Path(args.input).read_text(encoding="utf-8")
    except OSError as exc:
        raise CLIError(f"cannot read {args.input}: {exc.strerror or exc}") from exc
    results = fit_batch(read_experiment_csv(text), args.tol)
    if args.format == "json":
        emit(render_json([res.as_dict() for res in results]), args.out)
    else:
        rows = [[res.as_dict()[k] for k in FIT_HEADER] for res in results]
        emit(render_csv(FIT_HEADER, rows), args.out)
    skipped = [res for res in results if not res.ok]
    for res in skipped:
        print(f"warning: p={res.p!r} skipped ({res.status}): {res.reason}", file=sys.stderr)
    return 1 if skipped else 0


def _pct(x: float) -> str:
    return f"{x:.1f}"


def cmd_table(args) -> int:
    checks = check_table()
    if args.format == "json":
        emit(render_json([c.as_dict() for c in checks]), args.out)
    elif args.format == "csv":
        rows = [[c.as_dict()[k] for k in TABLE_HEADER] for c in checks]
        emit(render_csv(TABLE_HEADER, rows), args.out)
    else:
        lines = [
            f"{'Nr':>3} {'p':>5} {'1-p':>6} {'white%':>7} {'colored%':>9} {'r':>7}"
            f"  {'printed 1-p':>11} {'printed r':>9}  flags"
        ]
        for c in checks:
            row = c.row
            lines.append(
                f"{row.nr:>3} {row.p:>5.2f} {c.one_minus_p:>6.3f} {_pct(row.white_pct):>7}"
                f" {_pct(row.colored_pct):>9} {c.r:>7.4f}  {row.one_minus_p:>11.2f}"
                f" {row.r:>9.2f}  {','.join(c.flags) or '-'}"
            )
        emit("\n".join(lines) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chshnoise",
        description="CHSH violation of Bell states under white and colored noise.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_out(sp, formats=("csv", "json"), default="json"):
        sp.add_argument("--format", choices=formats, default=default)
        sp.add_argument("--out", metavar="PATH", default=None, help="output file (default stdout)")

    def add_pr(sp, p_default):
        sp.add_argument("--p", type=float, default=p_default, help="entangled fraction")
        sp.add_argument("--r", type=float, default=0.0, help="colored-noise weight")

    def add_family(sp, default):
        sp.add_argument("--family", choices=FAMILIES, default=default)
        sp.add_argument("--white-frac", type=float, default=DEFAULT_WHITE_FRAC,
                        help="white share of the total noise (fixed-white)")
        sp.add_argument("--white-weight", type=float, default=0.1,
                        help="absolute white-noise weight 1-p-r (white-weight)")

    basis_choices = [b.value for b in Basis]

    sp = sub.add_parser("state", help="density matrix and validation report")
    add_pr(sp, 1.0)
    sp.add_argument("--basis", choices=basis_choices, default=Basis.PSI_MINUS.value)
    add_out(sp)
    sp.set_defaults(func=cmd_state)

    sp = sub.add_parser("beta", help="Bell value at given angles")
    add_pr(sp, 1.0)
    sp.add_argument("--theta", type=float, default=math.pi / 2)
    sp.add_argument("--phi", type=float, default=math.pi / 4)
    sp.add_argument("--basis", choices=basis_choices, default=Basis.PSI_MINUS.value)
    sp.add_argument("--degrees", action="store_true", help="report angles in degrees")
    add_out(sp, formats=("json",))
    sp.set_defaults(func=cmd_beta)

    sp = sub.add_parser("maximize", help="maximize the Bell value over the angles")
    add_pr(sp, 1.0)
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--degrees", action="store_true")
    add_out(sp, formats=("json",))
    sp.set_defaults(func=cmd_maximize)

    sp = sub.add_parser("scan", help="beta_max over the (p, r) simplex")
    sp.add_argument("--p-steps", type=int, default=DEFAULT_STEPS)
    sp.add_argument("--r-steps", type=int, default=DEFAULT_STEPS)
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--degrees", action="store_true")
    add_out(sp, default="csv")
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("curve", help="beta_max along a noise family")
    add_family(sp, "no-white")
    sp.add_argument("--p-steps", type=int, default=DEFAULT_STEPS)
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--degrees", action="store_true")
    add_out(sp, default="csv")
    sp.set_defaults(func=cmd_curve)

    sp = sub.add_parser("threshold", help="p at which beta_max crosses 2 along a family")
    add_family(sp, "no-colored")
    sp.add_argument("--p-lo", type=float, default=0.5)
    sp.add_argument("--p-hi", type=float, default=0.9)
    sp.add_argument("--tol", type=float, default=1e-9)
    add_out(sp, formats=("json",))
    sp.set_defaults(func=cmd_threshold)

    sp = sub.add_parser("fit", help="fit r to measured (p, beta_exp) points")
    sp.add_argument("input", help="CSV with header p,beta_exp[,sigma]; '-' for stdin")
    sp.add_argument("--tol", type=float, default=1e-8)
    add_out(sp, default="csv")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("table", help="recompute the reference noise-proportion table")
    add_out(sp, formats=("text", "csv", "json"), default="text")
    sp.set_defaults(func=cmd_table)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

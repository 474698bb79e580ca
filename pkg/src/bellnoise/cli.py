"""Command-line entry point: ``bellnoise <subcommand> [options]``.

Exit codes: 0 on success, 2 for bad input, 3 when an internal invariant fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .channels import InteractionMode, channel_builder, interact
from .criteria import evaluate_all, unsteerable_sufficient
from .errors import InvalidArgumentError, InvariantError
from .scenarios import (
    CRITERIA_ORDER,
    DEFAULT_GRID,
    DEFAULT_TOL,
    breaking_epsilon,
    epsilon_to_p,
    lhs_scenario,
    nonlocal_region,
    predicate_scan,
    reproduce_tables,
)
from .states import chi_form, state_from_spec, state_to_spec

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INTERNAL = 3

CHANNEL_CHOICES = (
    "phase-flip",
    "bit-flip",
    "depolarizing",
    "phase-damping",
    "dephasing-effective",
    "depolarizing-shrink",
)
MODE_CHOICES = ("single", "single-bob", "single-alice", "double")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _add_state(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--state", help="JSON state specification")
    src.add_argument("--state-file", type=Path, help="file holding a JSON state specification")


def _add_channel(p: argparse.ArgumentParser, mode_default: str = "single-bob") -> None:
    p.add_argument("--channel", required=True, choices=CHANNEL_CHOICES)
    p.add_argument("--mode", choices=MODE_CHOICES, default=mode_default)
    p.add_argument("--convention", choices=("stated", "effective"), default="stated",
                   help="phase-damping parametrization")


def _add_output(p: argparse.ArgumentParser, default: str = "json") -> None:
    p.add_argument("--format", choices=("csv", "json"), default=default)
    p.add_argument("--out", type=Path, help="write the document here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bellnoise", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"bellnoise {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("criteria", help="evaluate M, A and B on a state")
    _add_state(p)
    _add_output(p)

    p = sub.add_parser("apply", help="apply a channel and print the resulting state")
    _add_state(p)
    _add_channel(p)
    p.add_argument("--p", type=float, help="channel strength")
    p.add_argument("--epsilon", type=float, help="shrink factor (depolarizing channels)")
    _add_output(p)

    p = sub.add_parser("scan", help="strength ranges where a criterion value is <= 1")
    _add_state(p)
    _add_channel(p)
    p.add_argument("--criterion", choices=CRITERIA_ORDER, required=True)
    p.add_argument("--grid", type=int, default=DEFAULT_GRID)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    _add_output(p)

    p = sub.add_parser("tables", help="recompute both published range tables")
    p.add_argument("--grid", type=int, default=DEFAULT_GRID)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    _add_output(p, default="csv")

    p = sub.add_parser("region", help="CHSH value over the (lambda, theta) family")
    p.add_argument("--grid", type=int, default=101, help="points per axis")
    _add_output(p, default="csv")

    p = sub.add_parser("lhs", help="strength bringing a mixture state closest to rho_f")
    _add_state(p)
    _add_channel(p)
    _add_output(p)

    p = sub.add_parser("bound", help="steerability-breaking shrink factor for a chi-form state")
    _add_state(p)
    p.add_argument("--tol", type=float, default=1e-9, help="chi-form tolerance")
    _add_output(p)
    return parser


# -- serialization -------------------------------------------------------------------


def _num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.9g}"
    return str(x)


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def render(payload, rows: list[dict] | None, fmt: str) -> str:
    if fmt == "json":
        doc = {"meta": {"version": __version__}, "result": payload}
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"
    if rows is None:
        raise InvalidArgumentError("field 'format': csv is not available for this command")
    buf = io.StringIO()
    buf.write(f"# bellnoise {__version__}\n")
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _num(v) for k, v in row.items()})
    return buf.getvalue()


# -- commands -------------------------------------------------------------------------


def _unwrap(spec):
    """Accept a JSON document written by ``apply`` in place of a bare spec."""
    if isinstance(spec, dict) and set(spec) == {"meta", "result"}:
        return spec["result"]
    return spec


def _state(args):
    if args.state is not None:
        text = args.state
    else:
        try:
            text = args.state_file.read_text(encoding="utf-8")
        except OSError as exc:
            raise InvalidArgumentError(f"field 'state-file': cannot read {args.state_file} ({exc.strerror})") from exc
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"state: malformed JSON ({exc.msg})") from exc
    return state_from_spec(_unwrap(spec))


def _mode(args) -> InteractionMode:
    return InteractionMode.parse(args.mode)


def cmd_criteria(args):
    report = evaluate_all(_state(args)).as_dict()
    return report, [report]


def cmd_apply(args):
    rho = _state(args)
    builder = channel_builder(args.channel, args.convention)
    if args.channel == "depolarizing-shrink":
        if args.epsilon is None:
            raise InvalidArgumentError("field 'epsilon': required for depolarizing-shrink")
        strength = args.epsilon
    elif args.epsilon is not None:
        if args.channel != "depolarizing" or args.p is not None:
            raise InvalidArgumentError("field 'epsilon': only valid alone with depolarizing channels")
        strength = epsilon_to_p(args.epsilon)
    elif args.p is None:
        raise InvalidArgumentError("field 'p': channel strength required")
    else:
        strength = args.p
    out = interact(rho, builder, strength, _mode(args))
    spec = state_to_spec(out)
    rows = [
        {"row": i, "col": j, "re": out.mat[i, j].real, "im": out.mat[i, j].imag}
        for i in range(4)
        for j in range(4)
    ]
    return spec, rows


def cmd_scan(args):
    ivs = predicate_scan(
        _state(args), args.channel, _mode(args), args.criterion, args.grid, args.tol, args.convention
    )
    rows = [{"lo": lo, "hi": hi} for lo, hi in ivs.intervals]
    return {"criterion": args.criterion, "intervals": ivs.as_list()}, rows


def _table_rows(rows) -> list[dict]:
    out = []

    def emit(channel, row, ranges, check):
        for crit, got, want in zip(CRITERIA_ORDER, ranges, row.published):
            flag = got.deviation(want) > check
            for k in range(max(len(got), len(want), 1)):
                lo, hi = got.intervals[k] if k < len(got) else (None, None)
                plo, phi = want.intervals[k] if k < len(want) else (None, None)
                out.append({
                    "channel": channel, "lambda": row.lam, "theta": row.theta, "mode": row.mode,
                    "criterion": crit, "lo": lo, "hi": hi, "paper_lo": plo, "paper_hi": phi, "flag": flag,
                })

    for row in rows:
        emit(row.channel, row, row.ranges, 0.01)
        if row.stated_ranges is not None:
            emit(f"{row.channel}-stated", row, row.stated_ranges, 0.01)
    return out


def cmd_tables(args):
    rows, report = reproduce_tables(args.grid, args.tol)
    flat = _table_rows(rows)
    discrepancies = [
        {
            "mode": e.mode, "channel": e.channel, "lambda": e.lam, "criterion": e.criterion,
            "computed": e.computed.as_list(), "paper": e.published.as_list(),
            "deviation": _json_safe(e.deviation),
        }
        for e in report.entries
    ]
    return {"rows": flat, "threshold": report.threshold, "discrepancies": discrepancies}, flat


def cmd_region(args):
    if args.grid < 2:
        raise InvalidArgumentError("field 'grid': need at least 2 points per axis")
    pts = nonlocal_region(np.linspace(0, 1, args.grid), np.linspace(0, np.pi / 2, args.grid))
    rows = [{"lambda": p.lam, "theta": p.theta, "m_value": p.m_value, "nonlocal": p.nonlocal_} for p in pts]
    return rows, rows


def cmd_lhs(args):
    if args.state is None:
        raise InvalidArgumentError("field 'state': lhs needs an inline mixture specification")
    spec = json.loads(args.state) if args.state.strip().startswith("{") else None
    if not isinstance(spec, dict) or spec.get("kind") != "mixture":
        raise InvalidArgumentError("field 'state': lhs needs {\"kind\":\"mixture\",\"q\":..,\"s\":..}")
    state_from_spec(spec)  # reject unknown keys and out-of-range parameters
    res = lhs_scenario(spec["q"], spec["s"], args.channel, _mode(args), args.convention)
    payload = {"p_star": res.p_star, "distance": res.distance, "report": res.report.as_dict()}
    return payload, [{"p_star": res.p_star, "distance": res.distance, **res.report.as_dict()}]


def cmd_bound(args):
    chi = chi_form(_state(args), args.tol)
    eps = breaking_epsilon(chi)
    suff = unsteerable_sufficient(chi)
    payload = {
        "epsilon_max": eps,
        "p_min": epsilon_to_p(eps),
        "exact_lhs_max": suff.exact_lhs_max,
        "relaxed_bound": suff.relaxed_bound,
        "verdict_exact": suff.verdict_exact,
        "verdict_relaxed": suff.verdict_relaxed,
    }
    return payload, [payload]


COMMANDS = {
    "criteria": cmd_criteria,
    "apply": cmd_apply,
    "scan": cmd_scan,
    "tables": cmd_tables,
    "region": cmd_region,
    "lhs": cmd_lhs,
    "bound": cmd_bound,
}


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        payload, rows = COMMANDS[args.command](args)
        text = render(payload, rows, args.format)
    except (InvalidArgumentError, json.JSONDecodeError) as exc:
        print(f"bellnoise: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InvariantError as exc:
        print(f"bellnoise: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    if args.out is not None:
        try:
            args.out.write_text(text, encoding="utf-8")
        except OSError as exc:
            print(f"bellnoise: error: field 'out': cannot write {args.out} ({exc.strerror})", file=sys.stderr)
            return EXIT_INPUT
    else:
        stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Command-line interface.

Exit codes: 0 success, 1 usage or input error, 2 degraded (optimizer failures
or indeterminate verdicts), 3 a requested freezing check failed.
"""
from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .coherence import DEFAULT_SEED
from .densmat import InvalidStateError
from .dynamics import (
    MEASURE_SELECTORS,
    SweepSpec,
    default_grid,
    evaluate_measure,
    format_float,
    initial_state,
    parse_triple,
    point_seed,
    run_sweep,
    series_to_csv,
    series_to_json,
    spec_from_config,
)
from .channels import CHANNEL_KINDS
from .verify import SUITES, format_table, run_suite

EXIT_OK, EXIT_USAGE, EXIT_DEGRADED, EXIT_NOT_FROZEN = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def load_schema() -> dict:
    text = resources.files("frozencoh").joinpath("data/run_config.schema.json").read_text()
    return json.loads(text)


def load_config(path: str) -> dict:
    """Parse and schema-check a run config; errors name the line or JSON path."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.absolute_path) or "(root)"
        line = _line_of(text, err.absolute_path)
        prefix = f"{path}:{line}" if line else path
        raise UsageError(f"{prefix}: schema error at {where}: {err.message}")
    return doc


def _line_of(text: str, path) -> int | None:
    """Best-effort line of the innermost object key on ``path``."""
    keys = [p for p in path if isinstance(p, str)]
    if not keys:
        return None
    needle = f'"{keys[-1]}"'
    for i, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return i
    return None


def _floats(text: str, count: int | None = None) -> list:
    parts = [p.strip() for p in text.split(",")]
    if count is not None and len(parts) != count:
        raise UsageError(f"expected {count} comma-separated values, got {text!r}")
    return parts


def _number(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"not a number: {text!r}") from None


def state_from_args(args):
    given = [a for a in ("m3", "bloch") if getattr(args, a) is not None]
    if len(given) != 1:
        raise UsageError("give exactly one of --m3 or --bloch")
    if args.m3 is not None:
        c1, c2, c3 = _floats(args.m3, 3)
        c2 = c2 if c2 == "freeze" else _number(c2)
        return parse_triple([_number(c1), c2, _number(c3)], args.n)
    return np.array([_number(x) for x in _floats(args.bloch, 3)])


def _measures(text: str) -> tuple[str, ...]:
    out = tuple(m.strip() for m in text.split(",") if m.strip())
    bad = [m for m in out if m not in MEASURE_SELECTORS]
    if bad or not out:
        raise UsageError(f"unknown measure(s) {bad}; choose from {', '.join(MEASURE_SELECTORS)}")
    return out


def _spec_from_args(args) -> SweepSpec:
    return SweepSpec(
        initial=state_from_args(args),
        channel=args.channel,
        measures=_measures(args.measures),
        grid=tuple(default_grid(args.grid)),
        seed=args.seed,
        extra_points=args.extra_points,
        gamma=args.gamma,
        optimizer=args.optimizer,
    )


def _write(path: str | None, text: str, out):
    if path is None:
        out.write(text)
        return
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def cmd_sweep(args, out) -> int:
    if args.config:
        doc = load_config(args.config)
        spec = spec_from_config(doc)
        output = doc.get("output", {})
        fmt = output.get("format", "csv")
        csv_path = output.get("path") if fmt == "csv" else args.csv
        json_path = output.get("path") if fmt == "json" else args.json
    else:
        spec = _spec_from_args(args)
        csv_path, json_path = args.csv, args.json
    series = run_sweep(spec)
    if json_path is not None:
        _write(json_path, series_to_json(series), out)
    if csv_path is not None or json_path is None:
        _write(csv_path, series_to_csv(series), out)
    for f in series.failures:
        print(f"warning: {f.measure} did not converge at q={f.q!r}", file=sys.stderr)
    return EXIT_DEGRADED if series.degraded else EXIT_OK


def cmd_freeze(args, out) -> int:
    series = run_sweep(_spec_from_args(args))
    rows = [("measure", "frozen", "max deviation", "tolerance", "status")]
    for m, v in series.verdicts.items():
        rows.append((m, "yes" if v.frozen else "no", f"{v.max_deviation:.3e}", f"{v.tolerance:.0e}", v.status))
    widths = [max(len(r[i]) for r in rows) for i in range(5)]
    for r in rows:
        out.write("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n")
    if series.trivial:
        out.write(f"trivial: initial state is {series.trivial}\n")
    if series.q_star is not None:
        out.write(f"q*: {format_float(series.q_star)}\n")
    verdicts = series.verdicts.values()
    if any(v.status == "indeterminate" for v in verdicts):
        return EXIT_DEGRADED
    return EXIT_OK if all(v.frozen for v in verdicts) else EXIT_NOT_FROZEN


def cmd_measure(args, out) -> int:
    rho, triple = initial_state(state_from_args(args))
    results = {}
    degraded = False
    for m in _measures(args.measures):
        mv = evaluate_measure(m, rho, triple, seed=point_seed(args.seed, 0.0), optimizer=args.optimizer)
        results[m] = {"value": mv.value, "method": mv.method, "converged": mv.ok}
        degraded |= not mv.ok
    if args.json:
        out.write(json.dumps(results, indent=2) + "\n")
    else:
        for m, r in results.items():
            out.write(f"{m}\t{format_float(r['value'])}\n")
    return EXIT_DEGRADED if degraded else EXIT_OK


def cmd_verify(args, out) -> int:
    reports = run_suite(args.suite, samples=args.samples, seed=args.seed)
    out.write(format_table(reports) + "\n")
    if args.json:
        doc = {"seed": args.seed, "samples": args.samples, "reports": [r.to_dict() for r in reports]}
        Path(args.json).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_NOT_FROZEN


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return value


def _grid(text: str) -> int:
    value = int(text)
    if value < 2:
        raise argparse.ArgumentTypeError("grid needs at least two points")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="frozencoh", description="Coherence freezing under local incoherent noise.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def state_flags(sp, measures_default):
        sp.add_argument("--m3", metavar="C1,C2,C3", help="M3 triple; C2 may be 'freeze'")
        sp.add_argument("--n", type=int, default=2, help="qubit count for --m3 (default 2)")
        sp.add_argument("--bloch", metavar="N1,N2,N3", help="single-qubit Bloch vector")
        sp.add_argument("--measures", default=measures_default, help="comma-separated selectors")
        sp.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
        sp.add_argument("--optimizer", choices=("auto", "full"), default="auto")

    def sweep_flags(sp):
        sp.add_argument("--channel", choices=CHANNEL_KINDS, default="bit_flip")
        sp.add_argument("--grid", type=_grid, default=101, help="number of q points in [0, 1]")
        sp.add_argument("--extra-points", type=int, default=20, help="random off-grid points")
        sp.add_argument("--gamma", type=float, help="decay rate, adds t = -ln(1-q)/gamma to JSON")

    sp = sub.add_parser("sweep", help="evaluate measures along a noise sweep")
    state_flags(sp, "l1,re")
    sweep_flags(sp)
    sp.add_argument("--config", help="JSON run config (overrides state flags)")
    sp.add_argument("--csv", help="write CSV here (default: stdout)")
    sp.add_argument("--json", help="write JSON diagnostics here")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("freeze", help="freeze verdict per measure")
    state_flags(sp, "l1,re,tr")
    sweep_flags(sp)
    sp.set_defaults(func=cmd_freeze)

    sp = sub.add_parser("measure", help="coherence measures of one state")
    state_flags(sp, "l1,re,tr")
    sp.add_argument("--json", action="store_true", help="machine-readable output")
    sp.set_defaults(func=cmd_measure)

    sp = sub.add_parser("verify", help="run lemma verification suites")
    sp.add_argument("suite", choices=("all", *SUITES))
    sp.add_argument("--samples", type=int, default=50)
    sp.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    sp.add_argument("--json", help="write the reports here")
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except (UsageError, InvalidStateError, ValueError) as exc:
        print(f"frozencoh: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()

"""Command-line front end.

Exit codes: 0 all checks pass, 1 usage or I/O error, 2 certification
failure or indeterminate result.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cantor import CalibrationError, CantorModel, ConstructionError, build_model, verify_frostman
from .gauge import DecayProfile, DomainError, Gauge, InvalidProfileError
from .poisson import PrecisionError, log_modulus
from .scan import certify_estimate, reports_to_csv, reports_to_json
from .suites import run_all

log = logging.getLogger("slowdecay")

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2
PLOT_FIELDS = ["r", "min_modulus", "omega_r"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_radii(text: str) -> list[float]:
    """``"0.9,0.99"`` or ``"geo:R0:GAP_END:N"`` (N radii, 1 - r geometric)."""
    text = text.strip()
    if not text:
        return []
    if text.startswith("geo:"):
        try:
            _, r0, gap_end, count = text.split(":")
            r0, gap_end, count = float(r0), float(gap_end), int(count)
        except ValueError:
            raise UsageError(f"bad geometric radii {text!r}") from None
        if count < 1 or not 0 <= r0 < 1 or not 0 < gap_end <= 1:
            raise UsageError(f"bad geometric radii {text!r}")
        radii = list(1.0 - np.geomspace(1.0 - r0, gap_end, count))
    else:
        try:
            radii = [float(x) for x in text.split(",")]
        except ValueError:
            raise UsageError(f"bad radii list {text!r}") from None
    for r in radii:
        if not 0 <= r < 1:
            raise UsageError(f"radius {r!r} outside [0, 1)")
    return [float(r) for r in radii]


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None


def _write(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc.strerror}") from None


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def load_model(path: str) -> CantorModel:
    data = _read_json(path)
    try:
        return CantorModel.from_dict(data)
    except (KeyError, TypeError, ValueError, ConstructionError) as exc:
        raise UsageError(f"{path}: schema error: {exc}") from None


def cmd_build(args) -> int:
    try:
        profile = DecayProfile.from_dict(_read_json(args.profile))
    except InvalidProfileError as exc:
        raise UsageError(str(exc)) from None
    gauge = Gauge(profile)
    model = build_model(gauge, depth_hint=args.depth)
    rep = verify_frostman(model, gauge, endpoint_depth=min(25, model.depth))
    data = model.to_dict()
    data["calibration"] = dict(data["calibration"] or {}, frostman_max_ratio=rep.max_ratio,
                               frostman_passed=rep.passed)
    _write(_dumps(data), args.out)
    log.info("model: depth %d, mass scale %.6g, Frostman max ratio %.6g",
             model.depth, model.mass_scale, rep.max_ratio)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_eval(args) -> int:
    model = load_model(args.model)
    try:
        ev = log_modulus(model, args.r, args.theta, args.tol)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    except PrecisionError as exc:
        log.error("%s", exc)
        return EXIT_FAIL
    _write(_dumps(ev.to_dict()), args.out)
    return EXIT_OK


def cmd_scan(args) -> int:
    radii = parse_radii(args.radii)
    model = load_model(args.model)
    if model.gauge is None or model.gauge.profile is None:
        raise UsageError("model carries no decay profile to certify against")
    reports = certify_estimate(model, model.gauge, radii, args.tol)
    text = reports_to_json(reports) + "\n" if args.format == "json" else reports_to_csv(reports)
    _write(text, args.out)
    return EXIT_OK if all(rep.passed for rep in reports) else EXIT_FAIL


def cmd_verify(args) -> int:
    model = load_model(args.model)
    if model.gauge is None:
        raise UsageError("model carries no gauge")
    result = run_all(model, model.gauge)
    _write(_dumps(result), args.out)
    return EXIT_OK if result["passed"] else EXIT_FAIL


def cmd_export_plot(args) -> int:
    try:
        with open(args.scan, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise UsageError(f"cannot read {args.scan}: {exc.strerror}") from None
    lines = [",".join(PLOT_FIELDS)]
    for row in rows:
        try:
            lines.append(",".join([row["r"], row["min_modulus_lo"], row["omega_r"]]))
        except KeyError as exc:
            raise UsageError(f"{args.scan}: missing column {exc}") from None
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="slowdecay", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build", help="build and calibrate a model from a profile file")
    p.add_argument("--profile", required=True)
    p.add_argument("--depth", type=int, default=64)
    p.add_argument("--out")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("eval", help="evaluate -log|S| at one point")
    p.add_argument("--model", required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("scan", help="certify min |S| >= omega on circles")
    p.add_argument("--model", required=True)
    p.add_argument("--radii", required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("verify", help="run the invariant suites on a model")
    p.add_argument("--model", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("export-plot", help="reduce a scan CSV to r,min_modulus,omega_r")
    p.add_argument("--scan", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_plot)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if getattr(args, "tol", 1.0) is not None and not getattr(args, "tol", 1.0) > 0:
        parser.error("--tol must be positive")
    if getattr(args, "depth", 1) < 1:
        parser.error("--depth must be >= 1")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"slowdecay: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConstructionError, CalibrationError) as exc:
        print(f"slowdecay: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

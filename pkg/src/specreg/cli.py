"""specreg command line: batch runs over spectrum/orbit JSON inputs.

Subcommands: detreg (determinant report), zeta (zeta evaluations), bridge
(dual-route determinant check), orbit (minimality certificate), gamma
(Euler-constant self-check).  Reports are JSON (default) or plot-ready CSV;
floats serialise with repr, so identical inputs give byte-identical output.
Exit codes: 0 success, 1 verification/numeric failure, 2 input or usage
error (malformed JSON reports line and column on stderr).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .errors import DomainError, NumericError, UnsupportedSpectrumError
from .special import euler_gamma_integral, euler_gamma_series
from .spectra import spectrum_from_dict, spectrum_to_dict
from .regdet import build_report, report_to_dict
from .zeta import bridge_to_dict, verify_bridge, zeta_value
from .orbit import curvature_to_dict, minimality_report, orbit_from_dict

DEFAULT_EPS_GRID = (1e-1, 1e-2, 1e-3, 1e-4)
DEFAULT_ORBIT_EPS = (1e-1, 1e-2, 1e-3)
DEFAULT_S_VALUES = (0.25, 0.75, 1.5, 2.0, 3.0)
DEFAULT_GAMMA_TOL = 1e-10


@dataclass(frozen=True)
class RunConfig:
    command: str
    input_path: str | None = None
    output_path: str | None = None
    format: str = "json"
    eps: tuple[float, ...] | None = None
    abs_tol: float | None = None


def _load_json(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DomainError(f"cannot read input {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(
            f"malformed JSON in {path} at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc


def _emit(text: str, config: RunConfig) -> None:
    if config.output_path:
        Path(config.output_path).write_text(text)
    else:
        sys.stdout.write(text)


def _json_block(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _csv_lines(comments: list[tuple[str, object]], header: list[str],
               rows: list[list[object]]) -> str:
    out = [f"# {key}={value!r}" if isinstance(value, float) else f"# {key}={value}"
           for key, value in comments]
    out.append(",".join(header))
    out.extend(",".join(repr(cell) if isinstance(cell, float) else str(cell)
                        for cell in row) for row in rows)
    return "\n".join(out) + "\n"


def _cmd_detreg(config: RunConfig) -> int:
    spec = spectrum_from_dict(_load_json(config.input_path))
    grid = config.eps or DEFAULT_EPS_GRID
    report = report_to_dict(build_report(spec, eps_grid=grid))
    if config.format == "csv":
        comments = [(key, report[key]) for key in
                    ("log_det_reg", "log_Det_reg", "b0", "b0_primed", "kernel_dim",
                     "quadrature_error")]
        comments += [(f"counterterm_{j}", val)
                     for j, val in sorted(report["counterterms"].items(), key=lambda kv: int(kv[0]))]
        rows = [[eps, val] for eps, val in zip(report["eps_grid"], report["log_det_eps"])]
        _emit(_csv_lines(comments, ["eps", "log_det_eps"], rows), config)
    else:
        _emit(_json_block(report), config)
    if config.output_path:
        print(f"detreg: log_det_reg={report['log_det_reg']!r} "
              f"log_Det_reg={report['log_Det_reg']!r} -> {config.output_path}")
    return 0


def _cmd_zeta(config: RunConfig) -> int:
    raw = _load_json(config.input_path)
    spec = spectrum_from_dict(raw)
    s_values = raw.get("s_values", list(DEFAULT_S_VALUES))
    if (not isinstance(s_values, list) or not s_values
            or not all(isinstance(s, (int, float)) for s in s_values)):
        raise DomainError("'s_values' must be a non-empty array of numbers")
    evaluations = [zeta_value(spec, float(s)) for s in s_values]
    payload = {
        "spectrum": spectrum_to_dict(spec),
        "evaluations": [
            {"s": ev.s, "value": ev.value, "error": ev.error, "route": ev.route}
            for ev in evaluations
        ],
    }
    if config.format == "csv":
        rows = [[ev.s, ev.value, ev.error, ev.route] for ev in evaluations]
        _emit(_csv_lines([], ["s", "value", "error", "route"], rows), config)
    else:
        _emit(_json_block(payload), config)
    if config.output_path:
        print(f"zeta: {len(evaluations)} evaluation(s) -> {config.output_path}")
    return 0


def _cmd_bridge(config: RunConfig) -> int:
    spec = spectrum_from_dict(_load_json(config.input_path))
    report = verify_bridge(spec, abs_tol=config.abs_tol)
    payload = bridge_to_dict(report)
    if config.format == "csv":
        rows = [[key, payload[key]] for key in sorted(payload)]
        _emit(_csv_lines([], ["quantity", "value"], rows), config)
    else:
        _emit(_json_block(payload), config)
    if config.output_path:
        verdict = "OK" if report.passed else "FAIL"
        print(f"bridge: discrepancy={report.discrepancy!r} "
              f"threshold={report.threshold!r} {verdict} -> {config.output_path}")
    if not report.passed:
        print(f"bridge check failed: discrepancy {report.discrepancy!r} "
              f"exceeds threshold {report.threshold!r}", file=sys.stderr)
        return 1
    return 0


def _cmd_orbit(config: RunConfig) -> int:
    ospec = orbit_from_dict(_load_json(config.input_path))
    grid = config.eps or DEFAULT_ORBIT_EPS
    report = curvature_to_dict(minimality_report(ospec, eps_grid=grid))
    if config.format == "csv":
        comments = [(key, report[key]) for key in
                    ("tr_reg_H", "Tr_reg_H", "gateaux_log_vol_eps_analytic",
                     "gateaux_log_vol_eps_fd", "strongly_minimal", "heat_minimal",
                     "zeta_minimal")]
        rows = [[eps, val] for eps, val in zip(report["eps_grid"], report["tr_H_eps"])]
        _emit(_csv_lines(comments, ["eps", "tr_H_eps"], rows), config)
    else:
        _emit(_json_block(report), config)
    if config.output_path:
        print(f"orbit: strongly_minimal={report['strongly_minimal']} "
              f"-> {config.output_path}")
    return 0


def _cmd_gamma(config: RunConfig) -> int:
    integral, integral_err = euler_gamma_integral()
    series = euler_gamma_series()
    difference = abs(integral - series)
    tolerance = config.abs_tol if config.abs_tol is not None else DEFAULT_GAMMA_TOL
    passed = difference <= tolerance
    payload = {
        "integral_route": integral,
        "integral_error": integral_err,
        "series_route": series,
        "difference": difference,
        "tolerance": tolerance,
        "passed": passed,
    }
    if config.format == "csv":
        rows = [[key, payload[key]] for key in sorted(payload)]
        _emit(_csv_lines([], ["quantity", "value"], rows), config)
    else:
        _emit(_json_block(payload), config)
    if config.output_path:
        print(f"gamma: integral={integral!r} series={series!r} "
              f"difference={difference!r} -> {config.output_path}")
    if not passed:
        print(f"gamma routes disagree by {difference!r} (tolerance {tolerance!r})",
              file=sys.stderr)
        return 1
    return 0


_HANDLERS = {
    "detreg": _cmd_detreg,
    "zeta": _cmd_zeta,
    "bridge": _cmd_bridge,
    "orbit": _cmd_orbit,
    "gamma": _cmd_gamma,
}


def run(config: RunConfig) -> int:
    """Execute one command; returns the process exit code."""
    handler = _HANDLERS.get(config.command)
    if handler is None:
        print(f"unknown command {config.command!r}", file=sys.stderr)
        return 2
    try:
        return handler(config)
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 1
    except (DomainError, UnsupportedSpectrumError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2


def _parse_eps(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise DomainError(f"bad --eps list {text!r}: {exc}") from exc
    if not values or any(not v > 0.0 for v in values):
        raise DomainError(f"--eps needs positive comma-separated values, got {text!r}")
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specreg",
        description="Regularised determinants, zeta values, and orbit volumes "
                    "for explicit spectra.")
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "detreg": "cutoff and regularised determinant report for a spectrum",
        "zeta": "spectral zeta evaluations for a spectrum",
        "bridge": "compare the zeta and heat determinant routes",
        "orbit": "minimality certificate for a coadjoint orbit",
        "gamma": "Euler constant by two routes (self check)",
    }
    for name, help_text in specs.items():
        cmd = sub.add_parser(name, help=help_text)
        if name != "gamma":
            cmd.add_argument("--input", required=True, help="input JSON path")
        cmd.add_argument("--output", help="write the report here (default stdout)")
        cmd.add_argument("--format", choices=("json", "csv"), default="json")
        if name in ("detreg", "orbit"):
            cmd.add_argument("--eps", help="comma-separated cutoff grid override")
        if name in ("bridge", "gamma"):
            cmd.add_argument("--abs-tol", type=float, dest="abs_tol",
                             help="override the pass/fail threshold")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    eps = None
    if getattr(args, "eps", None):
        try:
            eps = _parse_eps(args.eps)
        except DomainError as exc:
            print(f"input error: {exc}", file=sys.stderr)
            return 2
    config = RunConfig(
        command=args.command,
        input_path=getattr(args, "input", None),
        output_path=args.output,
        format=args.format,
        eps=eps,
        abs_tol=getattr(args, "abs_tol", None),
    )
    return run(config)


if __name__ == "__main__":
    sys.exit(main())

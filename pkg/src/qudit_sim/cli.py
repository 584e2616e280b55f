"""``qudit-sim`` command-line entry point.

Exit codes: 0 success, 2 configuration or usage error, 3 numerical error,
4 I/O error. Failures print one JSON record to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import MM, SCHEMA_VERSION, ExperimentConfig, apply_overrides, config_hash, parse_config, serialize
from .detection import ScanResult
from .errors import ConfigError, NumericalError, QuditSimError
from .pipeline import Pipeline, run_oracle_check, run_scan_fringes, run_scan_image, run_state

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4
COMMANDS = ("state", "scan-image", "scan-fringes", "oracle-check")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qudit-sim", description="Spatial qudit entanglement simulator.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", type=Path, help="key = value configuration file (defaults if omitted)")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--version", action="version", version=f"qudit-sim {__version__}")
    return p


# -- formatting --------------------------------------------------------------


def fmt(x: float) -> str:
    """Fixed 12-significant-digit representation used in every output."""
    x = float(x)
    if not np.isfinite(x):
        return "nan" if np.isnan(x) else ("inf" if x > 0 else "-inf")
    return f"{x:.12g}"


def _jsonable(v):
    if isinstance(v, np.ndarray):
        v = v.tolist()
    if isinstance(v, complex):
        return [_jsonable(v.real), _jsonable(v.imag)]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return float(fmt(v)) if np.isfinite(v) else None
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def header_lines(cfg: ExperimentConfig, command: str) -> list:
    return [
        f"qudit-sim schema {SCHEMA_VERSION}",
        f"version {__version__}",
        f"command {command}",
        f"config-hash {config_hash(cfg)}",
        "config:",
        *("  " + line for line in serialize(cfg).splitlines()),
    ]


def write_json(path: Path, cfg: ExperimentConfig, command: str, payload: dict):
    doc = {
        "schema": SCHEMA_VERSION,
        "version": __version__,
        "command": command,
        "config_hash": config_hash(cfg),
        "config": serialize(cfg),
        **_jsonable(payload),
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n")


def write_scan_csv(path: Path, cfg: ExperimentConfig, command: str, scan: ScanResult, note: str = ""):
    lines = ["# " + h for h in header_lines(cfg, command)]
    if note:
        lines.append(f"# {note}")
    lines.append("position_mm,rate,kind,fixed_arm_position_mm")
    fixed = "" if scan.fixed_arm_position is None else fmt(scan.fixed_arm_position / MM)
    for x, r in zip(scan.positions, scan.rate):
        lines.append(f"{fmt(x / MM)},{fmt(r)},{scan.kind},{fixed}")
    path.write_text("\n".join(lines) + "\n")


def _label(l: float) -> str:
    return f"{l:+g}".replace("+", "p").replace("-", "m").replace(".", "_")


def _mm(x: float) -> str:
    return f"{x:g}".replace("-", "m").replace(".", "_")


# -- commands ----------------------------------------------------------------


def cmd_state(cfg, out: Path):
    res = run_state(cfg)
    write_json(out / "state_summary.json", cfg, "state", res)


def cmd_scan_image(cfg, out: Path):
    res = run_scan_image(cfg)
    written = []
    for l, scan in res["coincidences"].items():
        name = f"scan_image_fixed_l{_label(l)}.csv"
        write_scan_csv(out / name, cfg, "scan-image", scan, f"arm-1 detector behind the image of slit l = {l:g}")
        written.append(name)
    for arm, scan in res["singles"].items():
        name = f"singles_arm{arm}.csv"
        write_scan_csv(out / name, cfg, "scan-image", scan, f"singles, arm {arm}")
        written.append(name)
    summary = {
        "files": written,
        "fixed_positions_mm": [p / MM for p in res["fixed_positions"]],
        "peak_positions_mm": {f"{l:g}": p / MM for l, p in res["peak_positions"].items()},
    }
    write_json(out / "scan_image_summary.json", cfg, "scan-image", summary)


def cmd_scan_fringes(cfg, out: Path):
    res = run_scan_fringes(cfg)
    summary = {"expected_period_mm": res["expected_period"] / MM, "captured_fraction": res["captured"], "files": []}
    for model in ("entangled", "classical"):
        per = {}
        for x2, m in res[model].items():
            name = f"fringes_{model}_x2_{_mm(x2)}mm.csv"
            write_scan_csv(out / name, cfg, "scan-fringes", m["scan"], f"{model} prediction, arm-2 detector at x2 = {x2:g} mm")
            summary["files"].append(name)
            per[f"{x2:g}"] = {
                "visibility": m["visibility"],
                "visibility_at_fringe_period": m["contrast_at_expected_period"],
                "period_mm": m["period"] / MM,
            }
        summary[model] = per
        summary[f"{model}_conditional_shift_mm"] = [s / MM for s in res[f"{model}_shifts"]]
    ent = summary["entangled"].values()
    cls = summary["classical"].values()
    summary["entangled_min_visibility"] = min(v["visibility"] for v in ent)
    summary["classical_max_visibility_at_fringe_period"] = max(v["visibility_at_fringe_period"] for v in cls)
    write_json(out / "scan_fringes_summary.json", cfg, "scan-fringes", summary)


def cmd_oracle_check(cfg, out: Path):
    res = run_oracle_check(cfg)
    write_json(out / "oracle_check_summary.json", cfg, "oracle-check", res)


HANDLERS = {"state": cmd_state, "scan-image": cmd_scan_image, "scan-fringes": cmd_scan_fringes, "oracle-check": cmd_oracle_check}


def _fail(code: int, kind: str, message: str, **extra) -> int:
    rec = {"error": kind, "exit_code": code, "message": message, **extra}
    sys.stderr.write(json.dumps(rec, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail(EXIT_CONFIG, "UsageError", str(exc), usage=build_parser().format_usage().strip())
    try:
        text = args.config.read_text(encoding="utf-8") if args.config else ""
    except (OSError, UnicodeDecodeError) as exc:
        return _fail(EXIT_IO, type(exc).__name__, str(exc))
    try:
        cfg = apply_overrides(parse_config(text), args.override)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, type(exc).__name__, str(exc), line=getattr(exc, "line", None))
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        HANDLERS[args.command](cfg, args.out)
    except OSError as exc:
        return _fail(EXIT_IO, type(exc).__name__, str(exc))
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, type(exc).__name__, str(exc))
    except (NumericalError, QuditSimError, ValueError) as exc:
        return _fail(EXIT_NUMERICAL, type(exc).__name__, str(exc))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

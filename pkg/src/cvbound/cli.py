"""Command line entry point: ``cvbound certify | sweep | version``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import BlockLeakage, CertificationError, ConfigError, CutoffExceeded, DegenerateAngle
from .errors import EmptyInput, FactorOverflow, FilterOverflow, InvalidParameter, InvalidScaling
from .errors import NonHermitian, ZeroTrace
from .pipeline import Config, bisect_omega, load_grid, report_bytes, run_certify, run_sweep

_EXIT_ERRORS = (
    ConfigError, InvalidParameter, CutoffExceeded, NonHermitian, EmptyInput, ZeroTrace,
    BlockLeakage, FilterOverflow, FactorOverflow, InvalidScaling, DegenerateAngle,
)

EPILOG = "exit codes:\n  0  run completed (whatever the verdict)\n  1  unexpected error\n" + "".join(
    f"  {cls.exit_code:<2} {cls.__name__}\n" for cls in sorted(_EXIT_ERRORS, key=lambda c: c.exit_code)
) + "\nCVBOUND_MAX_WORKERS caps worker threads for range-search restarts and sweep points."


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cvbound",
        description="Certify PPT and look for entanglement evidence in the two-mode mixture.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("certify", help="run the full pipeline for one configuration")
    c.add_argument("--config", required=True, type=Path)
    c.add_argument("--out", type=Path, help="report path (default: outputs.report_path or stdout)")
    c.add_argument("--dump-dir", type=Path, help="write rho' and its partial transpose as .bent files")

    s = sub.add_parser("sweep", help="run a parameter grid or an omega bisection")
    s.add_argument("--config", required=True, type=Path)
    s.add_argument("--grid", type=Path, help="YAML mapping of parameter -> list of values")
    s.add_argument("--bisect", choices=["omega"], help="locate the PPT boundary in |omega|")
    s.add_argument("--out", type=Path, help="directory for reports and summary.csv (default: stdout)")

    sub.add_parser("version", help="print the package version")
    return p


def _emit(data: bytes | str, path: Path | None) -> None:
    if isinstance(data, str):
        data = data.encode()
    if path is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)


def _certify(args) -> int:
    config = Config.load(args.config)
    report = run_certify(config, dump_dir=args.dump_dir)
    out = args.out or (Path(p) if (p := config.raw["outputs"]["report_path"]) else None)
    _emit(report_bytes(report), out)
    if out is not None:
        print(f"{report['verdict']}  ->  {out}", file=sys.stderr)
    return 0


def _sweep(args) -> int:
    config = Config.load(args.config)
    grid = load_grid(args.grid) if args.grid else {}
    if args.bisect:
        bounds = grid.get("bisect", {}) if isinstance(grid, dict) else {}
        result = bisect_omega(config, float(bounds.get("lo", 1e-6)), float(bounds.get("hi", 0.99)))
        text = json.dumps(result.to_dict(), sort_keys=True, indent=2) + "\n"
        _emit(text, args.out / "bisect_omega.json" if args.out else None)
        return 0
    if args.grid is None:
        raise ConfigError("sweep needs --grid unless --bisect is given")
    reports, table = run_sweep(config, grid)
    if args.out:
        for i, rep in enumerate(reports):
            _emit(report_bytes(rep), args.out / f"report_{i:04d}.json")
        _emit(table, args.out / "summary.csv")
    else:
        _emit(table, None)
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "version":
            print(__version__)
            return 0
        if args.command == "certify":
            return _certify(args)
        return _sweep(args)
    except CertificationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Command line entry points.

tdcoop run -c cfg.yaml [overrides]      run the sweep, write or print CSV
tdcoop export-placements -c cfg.yaml -o placements.csv

Exit codes: 0 success, 2 invalid configuration or usage, 3 output not
writable.
"""

from __future__ import annotations

import argparse
import sys

import yaml

from .config import ConfigError, config_from_dict
from .harness import format_rows, run_experiment

__all__ = ["main"]


def _parse_snr(text: str) -> list[float]:
    """Grid override: comma list '0,5,10' or inclusive range '0:45:5'."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError("snr range must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ConfigError("snr range needs step > 0 and stop >= start")
        out = []
        x = start
        while x <= stop + 1e-9:
            out.append(round(x, 9))
            x += step
        return out
    return [float(p) for p in text.split(",") if p.strip()]


def _entry_name(entry) -> str:
    return entry if isinstance(entry, str) else entry.get("name", "")


def _load_raw(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("configuration root must be a mapping")
    return raw


def _build_config(args):
    raw = _load_raw(args.config)
    if args.strategies:
        wanted = [s.strip() for s in args.strategies.split(",") if s.strip()]
        have = {_entry_name(e): e for e in raw.get("strategies", [])}
        missing = [w for w in wanted if w not in have]
        if missing:
            raise ConfigError(f"strategies not in config: {missing}")
        raw["strategies"] = [have[w] for w in wanted]
    overrides = {
        "seed": args.seed,
        "workers": args.workers,
        "target_events": args.target_events,
        "trial_ceiling": args.trial_ceiling,
        "output": args.output,
        "snr_db": _parse_snr(args.snr_db) if args.snr_db else None,
        "bounds_only": args.bounds_only,
        "per_user_rows": args.per_user_rows,
    }
    return config_from_dict(raw, **overrides)


def _cmd_run(args) -> int:
    try:
        cfg = _build_config(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        rows = run_experiment(cfg)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 3
    if cfg.output_path is None:
        sys.stdout.write(format_rows(rows))
    else:
        print(f"wrote {len(rows)} rows to {cfg.output_path}")
    return 0


def _cmd_export_placements(args) -> int:
    try:
        cfg = _build_config(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    lines = ["placement,node,x,y"]
    for idx, placement in enumerate(cfg.placements()):
        for node in placement.node_ids:
            x, y = placement.positions[node]
            lines.append(f"{idx},{node},{format(x, '.12g')},{format(y, '.12g')}")
    text = "\n".join(lines) + "\n"
    if args.output is None:
        sys.stdout.write(text)
        return 0
    try:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {cfg.num_placements} placements to {args.output}")
    return 0


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("-c", "--config", required=True, help="YAML config path")
    parser.add_argument("--seed", type=int, default=None, help="master seed override")
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--target-events", type=int, default=None)
    parser.add_argument("--trial-ceiling", type=int, default=None)
    parser.add_argument("--snr-db", default=None, help="'0,5,10' or '0:45:5'")
    parser.add_argument("--strategies", default=None, help="comma-separated subset")
    parser.add_argument("-o", "--output", default=None, help="output CSV path")
    parser.add_argument(
        "--bounds-only", action="store_const", const=True, default=None,
        help="skip Monte Carlo, emit bounds columns only",
    )
    parser.add_argument(
        "--per-user-rows", action="store_const", const=True, default=None,
        help="emit per-user rows after each averaged row",
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="tdcoop",
        description="Outage simulation for time-duplexed cooperative networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run a sweep and emit the results CSV")
    _add_common(run_p)
    run_p.set_defaults(fn=_cmd_run)
    exp_p = sub.add_parser("export-placements", help="emit the placement ensemble")
    _add_common(exp_p)
    exp_p.set_defaults(fn=_cmd_export_placements)
    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())

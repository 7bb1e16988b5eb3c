"""Command line entry point: ``bessel-hardy <suite> --config <path> [--seed N] [--out DIR] [--emit WHAT]``.

Exit status is 0 when every check passes, 1 when any check fails and 2 for
usage or configuration errors. ``BESSEL_HARDY_WORKERS`` sets the number of
worker processes; it never changes the report body.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, config_from_mapping, load_config
from .suites import SUITES, merge, run_task, suite_tasks

__all__ = ["RunConfig", "load_config", "config_from_mapping", "run_suite", "emit_plot_data",
           "report_json", "main", "EMIT_KINDS"]

VERSION = "0.1.0"
EMIT_KINDS = ("annulus-decay", "kernel-slice", "maximal-profile", "ratio-bands")
WORKERS_ENV = "BESSEL_HARDY_WORKERS"


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1").strip()
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return n


def _plain(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else ("nan" if math.isnan(v) else ("inf" if v > 0 else "-inf"))
    return obj


def run_suite(config: RunConfig, suite: str, workers: int | None = None) -> dict:
    """Run ``suite`` and return ``{"meta": ..., "body": ...}``.

    The body holds only deterministic content; timing and versions go in ``meta``.
    """
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    workers = worker_count() if workers is None else int(workers)
    tasks = suite_tasks(config, suite)
    start = time.perf_counter()
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            results = list(pool.map(run_task, [config.data] * len(tasks), tasks))
    else:
        results = [run_task(config.data, t) for t in tasks]
    merged = merge(config, suite, results)
    checks = merged["checks"]
    failed = [c["name"] for c in checks if not c["passed"]]
    body = {
        "suite": suite,
        "seed": config.seed,
        "config": config.data,
        "passed": not failed and bool(checks),
        "summary": {"checks": len(checks), "failed": len(failed), "failed_names": failed},
        "checks": checks,
        "series": merged["series"],
        "diagnostics": merged["diagnostics"],
    }
    meta = {
        "tool": "bessel-hardy",
        "version": VERSION,
        "wall_time_s": time.perf_counter() - start,
        "workers": workers,
        "tasks": len(tasks),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    return {"meta": _plain(meta), "body": _plain(body)}


def report_json(report: dict) -> str:
    """Serialized report; the body part is byte-stable for a given config and seed."""
    return json.dumps({"meta": report["meta"], "body": report["body"]}, sort_keys=True, indent=1,
                      ensure_ascii=False) + "\n"


def body_json(report: dict) -> str:
    return json.dumps(report["body"], sort_keys=True, indent=1, ensure_ascii=False) + "\n"


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, bool):
        return str(int(v))
    return "%.17g" % float(v)


def emit_plot_data(report: dict, what: str, path) -> Path:
    """Write one series as comma-separated columns under a ``#`` header line."""
    if what not in EMIT_KINDS:
        raise ConfigError(f"unknown plot kind {what!r}; choose from {', '.join(EMIT_KINDS)}")
    series = report["body"]["series"].get(what)
    if series is None:
        raise ConfigError(f"report of suite {report['body']['suite']!r} has no {what!r} series")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    extras = {k: v for k, v in series.items() if k not in ("columns", "rows")}
    note = " ".join(f"{k}={_fmt(v)}" for k, v in sorted(extras.items()))
    header = "# " + ",".join(series["columns"]) + " (dimensionless)" + (f" {note}" if note else "")
    lines = [header] + [",".join(_fmt(v) for v in row) for row in series["rows"]]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bessel-hardy",
                                 description="Numerical checks for Hardy spaces of the Bessel operator.")
    ap.add_argument("suite", choices=SUITES)
    ap.add_argument("--config", required=True, help="TOML configuration file")
    ap.add_argument("--seed", type=int, default=None, help="override the configured seed")
    ap.add_argument("--out", default=None, help="output directory (default: output.dir)")
    ap.add_argument("--emit", action="append", default=[], choices=EMIT_KINDS,
                    help="also write this plot series; may be repeated")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        report = run_suite(cfg, args.suite)
        out = Path(args.out if args.out is not None else cfg["output"]["dir"])
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{args.suite}-report.json").write_text(report_json(report), encoding="utf-8")
        for what in args.emit:
            emit_plot_data(report, what, out / f"{args.suite}-{what}.csv")
    except ConfigError as exc:
        print(f"bessel-hardy: error: {exc}", file=sys.stderr)
        return 2
    body = report["body"]
    for c in body["checks"]:
        status = "PASS" if c["passed"] else "FAIL"
        line = f"{status} {c['name']}"
        if not c["passed"]:
            line += f" [{c['anchor']}] violated: {c['inequality']} with lhs={c['lhs']!r} rhs={c['rhs']!r}"
        print(line)
    s = body["summary"]
    print(f"{args.suite}: {s['checks'] - s['failed']}/{s['checks']} checks passed")
    return 0 if body["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 infeasible or aborted result.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys

import numpy as np

from . import checks
from .config import ConfigError, ScenarioConfig
from .optimizer import InfeasibleError, SweepResult, SweepRow, optimize_point, sweep

EXIT_OK, EXIT_CONFIG, EXIT_ABORT = 0, 2, 3
CSV_HEADER = ("var", "mu", "t", "R", "Y11_ZL", "e11_phU", "H_min", "status")
COMMANDS = ("keyrate", "optimize", "sweep-distance", "sweep-datasize", "selftest")

DEFAULT_GRIDS = {"sweep-distance": "0:120:5", "sweep-datasize": "1e8,1e9,1e10,1e11,1e12"}

log = logging.getLogger("passive_mdi")


def parse_grid(spec):
    """``"a,b,c"`` list, ``"start:stop:step"`` (inclusive) or ``"log:start:stop:count"``."""
    spec = spec.strip()
    try:
        if spec.startswith("log:"):
            start, stop, count = spec[4:].split(":")
            return [float(v) for v in np.logspace(math.log10(float(start)), math.log10(float(stop)), int(count))]
        if ":" in spec:
            start, stop, step = (float(v) for v in spec.split(":"))
            if step <= 0:
                raise ValueError("step must be positive")
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [start + i * step for i in range(n)]
        return [float(v) for v in spec.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad grid spec {spec!r}: {exc}") from exc


def _fmt(x):
    return "nan" if isinstance(x, float) and math.isnan(x) else f"{x:.17e}"


def emit_csv(result, path):
    """Write one row per grid point; byte-identical for identical input."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in result.rows:
        writer.writerow([_fmt(row.var), _fmt(row.mu), _fmt(row.t), _fmt(row.R), _fmt(row.Y11_ZL),
                         _fmt(row.e11_phU), _fmt(row.H_min), row.status])
    text = buf.getvalue()
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [SweepRow(*(float(r[k]) for k in CSV_HEADER[:-1]), r["status"]) for r in rows]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="passive-mdi",
        description="Finite-key rates of passive decoy-state MDI-QKD with heralded sources.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON object of scenario keys")
    parser.add_argument("--distance", type=float, help="Alice-Bob distance in km")
    parser.add_argument("--n-pulses", dest="n_pulses", type=float, help="pulse pairs N_t")
    parser.add_argument("--mu", type=float)
    parser.add_argument("--t", type=float)
    parser.add_argument("--out", help="CSV output path ('-' for stdout)")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--grid", help="sweep grid: 'a,b,c', 'start:stop:step' or 'log:start:stop:count'")
    parser.add_argument("--epsilon", type=float, help="fluctuation failure probability")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def load_config(args):
    cfg = ScenarioConfig.load(args.config) if args.config else ScenarioConfig()
    return cfg.override(
        command=args.command, distance=args.distance, n_pulses=args.n_pulses, mu=args.mu, t=args.t,
        out=args.out, seed=args.seed, grid=args.grid, epsilon=args.epsilon,
    )


def _row(var, mu, t, res):
    status = "ok" if not res.abort else f"abort: {res.reason}"
    return SweepRow(float(var), float(mu), float(t), res.R, res.Y11_ZL, res.e11_phU, res.h_min, status)


def _all_aborted(result):
    return all(r.status != "ok" for r in result.rows)


def run(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        model, spec = cfg.model(), cfg.spec()
        grid = parse_grid(cfg.grid or DEFAULT_GRIDS.get(cfg.command, "0"))
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if cfg.command == "selftest":
        results = checks.run_selftest()
        for name, verdict, detail in checks.as_rows(results):
            print(f"{verdict:4s} {name}: {detail}")
        return EXIT_OK if all(r.passed for r in results) else 1

    try:
        if cfg.command == "keyrate":
            res = model.evaluate(cfg.mu, cfg.t, cfg.distance, cfg.n_pulses)
            result = SweepResult("distance", [_row(cfg.distance, cfg.mu, cfg.t, res)])
        elif cfg.command == "optimize":
            point = optimize_point(cfg.distance, cfg.n_pulses, model, spec)
            result = SweepResult("distance", [_row(cfg.distance, point.mu, point.t, point.result)])
        elif cfg.command == "sweep-distance":
            result = sweep("distance", grid, model, spec, N_t=cfg.n_pulses)
        else:
            result = sweep("data_size", grid, model, spec, distance=cfg.distance)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        emit_csv(result, cfg.out)
    except OSError as exc:
        print(f"cannot write {cfg.out}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    positive = [r for r in result.rows if r.status == "ok"]
    best = max(positive, key=lambda r: r.R) if positive else None
    summary = (f"{cfg.command}: {len(result.rows)} point(s), {len(positive)} with positive rate"
               + (f", max R={best.R:.4e} at {result.variable}={best.var:g}" if best else ""))
    print(summary, file=sys.stderr)
    return EXIT_ABORT if _all_aborted(result) else EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

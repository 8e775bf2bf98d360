"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from . import analysis
from .errors import ConfigError, NumericalError
from .estimators import ALGORITHMS, estimate
from .experiments import (TABLE1_DEFAULT_EPSILON, TABLE1_XI, ExperimentConfig, cells_to_csv,
                          figure2_experiment, table1_experiment)
from .hankel import build_stack, cadzow_denoise
from .reconstruction import full_pipeline
from .signal import NoiseSpec, add_spectral_noise, fold_points, synthesize, trial_rng

log = logging.getLogger("dynsamp")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def _write(path, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load_config(args) -> ExperimentConfig:
    if not args.config:
        raise ConfigError("--config is required for this subcommand")
    try:
        text = sys.stdin.read() if args.config == "-" else Path(args.config).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{args.config}: malformed JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    for key in ("seed", "algorithm", "noise"):
        if getattr(args, key, None) is not None:
            data[key] = getattr(args, key)
    if getattr(args, "cadzow", False):
        data["cadzow"] = True
    return ExperimentConfig.from_dict(data)


def cmd_synthesize(args) -> int:
    cfg = _load_config(args)
    noise = NoiseSpec(cfg.noise, cfg.seed) if cfg.noise > 0 else None
    ms = synthesize(cfg.filter, cfg.state, cfg.m, cfg.N, noise=noise)
    _write(args.out or cfg.output, json.dumps(ms.to_dict(), indent=1) + "\n")
    return EXIT_OK


def cmd_estimate(args) -> int:
    cfg = _load_config(args)
    ms = synthesize(cfg.filter, cfg.state, cfg.m, cfg.N)
    rows = [["xi", "index", "eta", "node_re", "node_im", "algorithm"]]
    for j, xi in enumerate(cfg.xi):
        stack = build_stack(ms, xi, cfg.L)
        if cfg.noise > 0:
            stack = stack.with_values(
                add_spectral_noise(stack.values, cfg.noise, trial_rng(cfg.seed, j))[0])
        if cfg.cadzow:
            stack = cadzow_denoise(stack.with_L(cfg.m), threshold=cfg.cadzow_threshold).stack.with_L(cfg.L)
        est = estimate(stack, cfg.algorithm, L=cfg.L, degenerate=cfg.degenerate or args.degenerate)
        log.debug("xi=%g %s diagnostics %s", xi, est.algorithm, est.diagnostics)
        for i, (eta, v) in enumerate(zip(fold_points(xi, cfg.m), est.nodes)):
            rows.append([f"{xi:.16e}", i, f"{eta:.16e}", f"{v.real:.16e}", f"{v.imag:.16e}", est.algorithm])
    _write(args.out or cfg.output, _csv(rows))
    return EXIT_OK


def cmd_recover(args) -> int:
    cfg = _load_config(args)
    noise = NoiseSpec(cfg.noise, cfg.seed) if cfg.noise > 0 else None
    ms = synthesize(cfg.filter, cfg.state, cfg.m, cfg.N, noise=noise)
    L = cfg.L if cfg.algorithm != "prony" else None
    rep = full_pipeline(ms, cfg.r, cfg.algorithm, schedule=None if args.default_schedule else cfg.xi,
                        L=L, cadzow=cfg.cadzow)
    log.debug("cosine system condition %.3g, max node imag %.3g", rep.filter_condition, rep.max_node_imag)
    out = rep.to_dict()
    out["truth"] = {"filter": cfg.filter.to_dict(), "state": cfg.state.to_dict()}
    _write(args.out or cfg.output, json.dumps(out, indent=1) + "\n")
    return EXIT_OK


def cmd_bounds(args) -> int:
    cfg = _load_config(args)
    if cfg.N != 2 * cfg.m:
        raise ConfigError("bounds are defined for the square system; set N = 2m")
    rows = []
    for xi in cfg.xi:
        rep = analysis.bounds_at(cfg.filter, cfg.state, xi, cfg.m, cfg.noise)
        rows.append((xi, cfg.m, rep.hm_inv_norm, rep.lower_bound, rep.upper_bound))
    if args.out or cfg.output:
        analysis.write_bounds_csv(args.out or cfg.output, rows)
    else:
        sys.stdout.write(_csv([["xi", "m", "value", "lower", "upper"]]
                              + [[f"{v:.16e}" if isinstance(v, float) else v for v in r] for r in rows]))
    return EXIT_OK


def cmd_figure2(args) -> int:
    res = figure2_experiment(epsilon=args.noise if args.noise is not None else 1e-10,
                             seed=args.seed or 0)
    _write(args.out, res.panels_csv())
    if args.out and args.out != "-":
        p = Path(args.out)
        _write(p.with_name(p.stem + "_growth" + p.suffix), res.growth_csv())
    else:
        _write(None, res.growth_csv())
    return EXIT_OK


def cmd_table1(args) -> int:
    eps = args.noise if args.noise is not None else TABLE1_DEFAULT_EPSILON
    cells = table1_experiment(epsilon=eps, trials=args.trials, seed=args.seed or 0)
    meta = {"epsilon": eps, "trials": args.trials, "seed": args.seed or 0, "xi": TABLE1_XI,
            "note": "epsilon set by --noise"}
    _write(args.out, cells_to_csv(cells, meta))
    return EXIT_OK


def _csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dynsamp", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", help="JSON experiment config ('-' for stdin)")
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--noise", type=float, help="uniform noise half-width epsilon")
        return sp

    sp = common(sub.add_parser("synthesize", help="write the measurement sequences as JSON"))
    sp.set_defaults(func=cmd_synthesize)

    sp = common(sub.add_parser("estimate", help="estimate nodes at each configured xi (CSV)"))
    sp.add_argument("--algorithm", choices=ALGORITHMS)
    sp.add_argument("--cadzow", action="store_true", help="denoise each stack first")
    sp.add_argument("--degenerate", action="store_true",
                    help="allow xi in {0, 1/2} via the reduced Prony system")
    sp.set_defaults(func=cmd_estimate)

    sp = common(sub.add_parser("recover", help="recover filter and state (JSON report)"))
    sp.add_argument("--algorithm", choices=ALGORITHMS)
    sp.add_argument("--cadzow", action="store_true")
    sp.add_argument("--default-schedule", action="store_true",
                    help="ignore the config's xi list and use the default schedule")
    sp.set_defaults(func=cmd_recover)

    sp = common(sub.add_parser("bounds", help="inverse-Hankel norm and its estimates (CSV)"))
    sp.set_defaults(func=cmd_bounds)

    sp = common(sub.add_parser("figure2", help="conditioning study near xi = 1/2 (CSV)"), config=False)
    sp.set_defaults(func=cmd_figure2)

    sp = common(sub.add_parser("table1", help="algorithm comparison table (CSV)"), config=False)
    sp.add_argument("--trials", type=int, default=100)
    sp.set_defaults(func=cmd_table1)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: experiment orchestration and CSV emission.

Subcommands: mean-length, sinr-sweep, env-sample, selftest.  Outputs are
deterministic for a given (config, seed) regardless of worker-thread count;
every CSV starts with '#'-prefixed provenance lines (config hash, seed,
version, resolved defaults).

Exit codes: 0 ok, 2 configuration error, 3 numeric non-convergence,
4 selftest failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .backend import BACKEND_NAME
from .config import ConfigError, ExperimentConfig, config_sha256, load_config
from .coverage import mc_mean_covered_length
from .mean_length import (SeriesConvergenceError, gap0_convention_offset,
                          mean_covered_length_approx,
                          mean_covered_length_closed_form,
                          mean_covered_length_series)
from .numerics import EvaluationError, QuadratureError, SeriesConfig
from .selftest import run_selftest
from .sinr import (AcceptanceRateError, coverage_probability_analytic,
                   effective_intensity, mc_coverage_dependent_curve,
                   mc_coverage_h0_curve, radio_constants, SinrQuery)
from .street import ExpoEnvParams, default_window, sample_environment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_SELFTEST = 4


def _fmt(value) -> str:
    """CSV cell: floats at 17 significant digits, blanks for None."""
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _write_csv(path: str | None, metadata: list[tuple[str, object]],
               header: list[str], rows: list[list]) -> None:
    lines = [f"# {key}: {_fmt(val)}" for key, val in metadata]
    lines.append(",".join(header))
    lines.extend(",".join(_fmt(cell) for cell in row) for row in rows)
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def _base_metadata(cfg: ExperimentConfig, subcommand: str,
                   seed: int) -> list[tuple[str, object]]:
    meta: list[tuple[str, object]] = [
        ("ris-street", __version__),
        ("subcommand", subcommand),
        ("config-sha256", config_sha256(cfg)),
        ("seed", seed),
        ("backend", BACKEND_NAME),
        ("geometry", f"l={cfg.geometry.l} d={cfg.geometry.d} "
                     f"a={cfg.geometry.a} delta={cfg.geometry.delta} "
                     f"rho={cfg.geometry.rho}"),
        ("env", f"gamma1={cfg.env.gamma1} gamma2={cfg.env.gamma2}"),
    ]
    if cfg.defaults_used:
        meta.append(("artifact-defaults", " ".join(cfg.defaults_used)))
    return meta


def _series_cfg(cfg: ExperimentConfig) -> SeriesConfig:
    # allow slowly decaying gap series (ratio near 1) to converge
    return SeriesConfig(i_max=5000)


def cmd_mean_length(cfg: ExperimentConfig, args) -> int:
    series_cfg = _series_cfg(cfg)
    seed = cfg.mc.seed
    include_gap0 = cfg.include_gap0

    def evaluate(env: ExpoEnvParams, with_series: bool = True):
        # the integral-by-integral route is the expensive cross-check; sweeps
        # emit only the closed form, the approximation, and Monte-Carlo
        sr = sr_total = None
        if with_series:
            sr = mean_covered_length_series(env, cfg.geometry, series=series_cfg)
            sr_total = sr.total if include_gap0 else sr.total - sr.leading_term
        cf = mean_covered_length_closed_form(env, cfg.geometry, series=series_cfg)
        ap = mean_covered_length_approx(env, cfg.geometry)
        mc = None
        if cfg.mc.n_trials > 0:
            mc = mc_mean_covered_length(
                env, cfg.geometry, cfg.mc.n_trials, seed=seed,
                window_t=cfg.mc.window_t, include_gap0=include_gap0,
                threads=cfg.mc.threads, chunk_size=cfg.mc.chunk_size)
        return sr, sr_total, cf, ap, mc

    meta = _base_metadata(cfg, "mean-length", seed)
    meta.append(("include-gap0", include_gap0))
    meta.append(("gap0-convention-offset",
                 gap0_convention_offset(cfg.env, cfg.geometry)))
    meta.append(("window-t", cfg.mc.window_t if cfg.mc.window_t is not None
                 else default_window(cfg.env, cfg.geometry)))

    if cfg.sweep is None:
        sr, sr_total, cf, ap, mc = evaluate(cfg.env)
        header = ["method", "value", "stderr", "r", "terms", "n_trials"]
        rows = [
            ["series", sr_total, None, sr.r, sr.truncation_index, None],
            ["closed_form", cf.total, None, cf.r, cf.truncation_index, None],
            ["approx", ap, None, None, None, None],
        ]
        if mc is not None:
            rows.append(["mc", mc.mean, mc.stderr, None, None, mc.n_trials])
        _write_csv(args.out or cfg.output, meta, header, rows)
        return EXIT_OK

    header = ["alpha", "el_closed_form", "el_approx",
              "el_mc", "el_mc_stderr", "r", "terms"]
    rows = []
    for alpha in cfg.sweep.grid:
        env = ExpoEnvParams(cfg.env.gamma1, alpha * cfg.env.gamma1)
        _, _, cf, ap, mc = evaluate(env, with_series=False)
        rows.append([alpha, cf.total, ap,
                     mc.mean if mc else None, mc.stderr if mc else None,
                     cf.r, cf.truncation_index])
    meta.append(("sweep", "alpha over gamma2 = alpha * gamma1"))
    _write_csv(args.out or cfg.output, meta, header, rows)
    return EXIT_OK


def cmd_sinr_sweep(cfg: ExperimentConfig, args) -> int:
    seed = cfg.mc.seed
    convention = "thinned" if cfg.sinr.use_thinned_intensity else "full"
    consts = radio_constants(cfg.radio, cfg.geometry)
    x = cfg.sinr.x
    thetas = list(cfg.sinr.theta_grid)

    analytic = [coverage_probability_analytic(
        SinrQuery.build(x, th, consts, cfg.geometry.a), cfg.radio, consts,
        cfg.env, cfg.geometry, convention=convention) for th in thetas]
    h0 = mc_coverage_h0_curve(x, thetas, cfg.radio, consts, cfg.env,
                              cfg.geometry, cfg.sinr.n_trials_h0, seed=seed,
                              convention=convention, threads=cfg.mc.threads,
                              chunk_size=cfg.mc.chunk_size)
    dep, rate, n_phi = mc_coverage_dependent_curve(
        x, thetas, cfg.radio, consts, cfg.env, cfg.geometry,
        cfg.sinr.n_configs_dependent, seed=seed,
        resample_phi=cfg.sinr.resample_phi, threads=cfg.mc.threads,
        chunk_size=cfg.mc.chunk_size)

    meta = _base_metadata(cfg, "sinr-sweep", seed)
    meta.extend([
        ("x", x),
        ("k-const", consts.k),
        ("intensity-convention", convention),
        ("lambda", cfg.radio.intensity),
        ("lambda-effective", effective_intensity(cfg.radio, cfg.env, convention)),
        ("phi-points", n_phi),
        ("resample-phi", cfg.sinr.resample_phi),
        ("n-configs-dependent", cfg.sinr.n_configs_dependent),
        ("acceptance-rate", rate),
    ])
    header = ["theta", "p_analytic", "p_mc_h0", "p_mc_h0_stderr",
              "p_mc_dep", "p_mc_dep_stderr", "acceptance_rate", "n_trials", "seed"]
    rows = [[th, pa, e0.mean, e0.stderr, ed.mean, ed.stderr, rate,
             cfg.sinr.n_trials_h0, seed]
            for th, pa, e0, ed in zip(thetas, analytic, h0, dep)]
    _write_csv(args.out or cfg.output, meta, header, rows)
    return EXIT_OK


def cmd_env_sample(cfg: ExperimentConfig, args) -> int:
    seed = cfg.mc.seed
    t_max = cfg.mc.window_t if cfg.mc.window_t is not None \
        else default_window(cfg.env, cfg.geometry)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    env = sample_environment(cfg.env, t_max, rng)
    meta = _base_metadata(cfg, "env-sample", seed)
    meta.append(("window-t", t_max))
    meta.append(("n-obstacles", env.n_obstacles))
    rows = [[float(b), float(e)] for b, e in zip(env.starts, env.ends)]
    _write_csv(args.out or cfg.output, meta, ["B", "E"], rows)
    return EXIT_OK


def cmd_selftest(cfg: ExperimentConfig, args) -> int:
    ok = run_selftest(report=print)
    print("selftest:", "PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_SELFTEST


def _add_bool_flag(parser: argparse.ArgumentParser, name: str, help_text: str):
    parser.add_argument(name, type=lambda s: s.lower() in ("1", "true", "yes"),
                        metavar="BOOL", default=None, help=help_text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ris-street",
        description="Street-level reflecting-surface coverage: analytic "
                    "formulas with Monte-Carlo validation")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("mean-length", cmd_mean_length),
                     ("sinr-sweep", cmd_sinr_sweep),
                     ("env-sample", cmd_env_sample),
                     ("selftest", cmd_selftest)):
        p = sub.add_parser(name)
        p.set_defaults(fn=fn)
        p.add_argument("--config", metavar="PATH", default=None)
        p.add_argument("--seed", type=int, default=None, metavar="U64")
        p.add_argument("--trials", type=int, default=None, metavar="N")
        p.add_argument("--out", default=None, metavar="PATH")
        p.add_argument("--threads", type=int, default=None, metavar="N")
        _add_bool_flag(p, "--use-thinned-intensity",
                       "intensity convention for the coverage closed form")
        _add_bool_flag(p, "--resample-phi",
                       "redraw interferer positions every iteration")
        _add_bool_flag(p, "--include-gap0",
                       "count the free interval holding the origin")
    return parser


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    import dataclasses
    mc = cfg.mc
    if args.seed is not None:
        mc = dataclasses.replace(mc, seed=args.seed)
    if args.trials is not None:
        mc = dataclasses.replace(mc, n_trials=args.trials)
    if args.threads is not None:
        mc = dataclasses.replace(mc, threads=args.threads)
    sinr = cfg.sinr
    if args.trials is not None:
        sinr = dataclasses.replace(sinr, n_trials_h0=args.trials)
    if args.use_thinned_intensity is not None:
        sinr = dataclasses.replace(sinr, use_thinned_intensity=args.use_thinned_intensity)
    if args.resample_phi is not None:
        sinr = dataclasses.replace(sinr, resample_phi=args.resample_phi)
    include_gap0 = cfg.include_gap0 if args.include_gap0 is None else args.include_gap0
    return dataclasses.replace(cfg, mc=mc, sinr=sinr, include_gap0=include_gap0)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = _apply_overrides(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.fn(cfg, args)
    except (SeriesConvergenceError, QuadratureError, EvaluationError,
            AcceptanceRateError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: ``memsl-imaging <subcommand>``.

Exit codes: 0 success, 1 a reference check failed, 2 invalid configuration,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from .checks import REPORT_HEADER, run_checks
from .config import ConfigError, RunConfig, build_config, load_config
from .errors import DomainError, ImagingError, ProtocolMismatch
from .geometry import derive_dimensionless
from .io import csv_text, write_atomic, write_csv
from .light import ProbeSource, Protocol, photons_on_sample
from .objects import LOBE_PEAK_RAD, PhaseObject, three_lobe_object
from .optimizer import order_constant, optimize, resolution, select_Q_auto, sigma_for_source
from .pswf import build_basis, write_table
from .simulation import reconstruct, simulate_measurement

log = logging.getLogger("memsl_imaging")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

OPTIMIZE_HEADER = ("protocol", "M", "N", "tau", "r_opt", "alpha_opt", "sigma_opt", "Q", "resolution_nm")
PREDICT_HEADER = ("protocol", "M", "N", "tau", "N_avg", "c", "rayleigh_nm", "Q", "r", "alpha",
                  "squeezing_db", "sigma", "resolution_nm")
SUMMARY_HEADER = ("sigma_predicted", "sigma_empirical", "Q", "seed", "trials",
                  "sigma_empirical_interval", "low_confidence", "small_phase_margin")

# command-line flag -> dotted config key
CONFIG_FLAGS = {
    "f_m": "imaging.f_m",
    "lambda_m": "imaging.lambda_m",
    "d_m": "imaging.d_m",
    "Y_m": "imaging.Y_m",
    "protocol": "source.protocol",
    "M": "source.M",
    "N": "source.N",
    "tau": "source.tau",
    "r": "source.r",
    "alpha": "source.alpha",
    "Q": "reconstruction.Q",
    "N_avg": "reconstruction.N_avg",
    "exact_sum": "reconstruction.exact_sum",
    "trials": "simulation.trials",
    "seed": "simulation.seed",
    "grid_points": "simulation.grid_points",
    "mode": "simulation.mode",
    "object": "simulation.object",
    "object_peak_rad": "simulation.object_peak_rad",
    "protocols": "optimize.protocols",
    "tau_list": "optimize.tau_list",
    "out": "output.directory",
}


def _add_config_flags(p: argparse.ArgumentParser, groups=("imaging", "source", "reconstruction")):
    p.add_argument("--config", help="key = value configuration file")
    if "imaging" in groups:
        g = p.add_argument_group("imaging (SI units)")
        g.add_argument("--f-m", dest="f_m", type=float)
        g.add_argument("--lambda-m", dest="lambda_m", type=float)
        g.add_argument("--d-m", dest="d_m", type=float)
        g.add_argument("--Y-m", dest="Y_m", type=float)
    if "source" in groups:
        g = p.add_argument_group("source")
        g.add_argument("--protocol")
        g.add_argument("--M", type=int)
        g.add_argument("--N", type=float)
        g.add_argument("--tau", type=float)
        g.add_argument("--r", type=float)
        g.add_argument("--alpha", type=float)
    if "reconstruction" in groups:
        g = p.add_argument_group("reconstruction")
        g.add_argument("--Q", type=int)
        g.add_argument("--N-avg", dest="N_avg", type=int)
        g.add_argument("--exact-sum", dest="exact_sum", action="store_const", const=True)
    if "simulation" in groups:
        g = p.add_argument_group("simulation")
        g.add_argument("--trials", type=int)
        g.add_argument("--seed", type=int)
        g.add_argument("--grid-points", dest="grid_points", type=int)
        g.add_argument("--mode")
        g.add_argument("--object")
        g.add_argument("--object-peak-rad", dest="object_peak_rad", type=float)
    if "optimize" in groups:
        g = p.add_argument_group("optimize")
        g.add_argument("--protocols", help="comma separated")
        g.add_argument("--tau-list", dest="tau_list", help="comma separated transmissions")
    out_help = "output directory" if "simulation" in groups else "output directory (default: print to stdout)"
    p.add_argument("--out", help=out_help)


def _config_from_args(args) -> RunConfig:
    overrides = {}
    for attr, key in CONFIG_FLAGS.items():
        val = getattr(args, attr, None)
        if val is not None:
            overrides[key] = val
    if args.config:
        return load_config(args.config, overrides)
    return build_config({}, overrides)


def _system(cfg: RunConfig):
    return derive_dimensionless(cfg.f_m, cfg.lambda_m, cfg.d_m, cfg.Y_m)


def _source(cfg: RunConfig) -> ProbeSource:
    if cfg.explicit_source:
        return ProbeSource(Protocol.parse(cfg.protocol), cfg.M, cfg.alpha, cfg.r, cfg.tau)
    return optimize(cfg.protocol, cfg.M, cfg.N, cfg.tau).source(cfg.M)


def _photons(cfg: RunConfig, src: ProbeSource) -> float:
    return cfg.N if cfg.N is not None else photons_on_sample(src)


def _cutoff(cfg: RunConfig, c: float, protocol, N: float) -> int:
    if cfg.Q is not None:
        return cfg.Q
    return select_Q_auto(c, cfg.M, N, cfg.N_avg, protocol)


def _emit(out_dir, name: str, header, rows) -> None:
    rows = list(rows)
    if out_dir is None:
        sys.stdout.write(csv_text(header, rows))
        return
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    write_csv(path / name, header, rows)
    log.info("wrote %s", path / name)


def cmd_basis(args) -> int:
    if not (math.isfinite(args.c) and args.c > 0):
        raise ConfigError(f"--c must be positive, got {args.c}")
    if args.jmax < 0:
        raise ConfigError(f"--jmax must be >= 0, got {args.jmax}")
    basis = build_basis(args.c, args.jmax)
    if args.out is None:
        _emit(None, "", ("c", "j", "lambda_j", "A_j", "parity"), basis.table_rows())
    else:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        write_table(basis, args.out)
    return EXIT_OK


def cmd_optimize(args) -> int:
    cfg = _config_from_args(args)
    if cfg.N is None:
        raise ConfigError("optimize needs a photon budget source.N")
    system = _system(cfg)
    Q = _cutoff(cfg, system.c, cfg.protocol, cfg.N)
    basis = build_basis(system.c, max(Q, 1))
    K = order_constant(basis, Q, cfg.exact_sum)
    rows = []
    for proto in cfg.protocols:
        for tau in cfg.tau_list:
            opt = optimize(proto, cfg.M, cfg.N, tau, K)
            rows.append((opt.protocol.value, cfg.M, float(cfg.N), float(tau), opt.r_opt, opt.alpha_opt,
                         opt.sigma_opt, Q, resolution(system, Q) * 1e9))
    _emit(cfg.directory, "optimize.csv", OPTIMIZE_HEADER, rows)
    return EXIT_OK


def cmd_predict(args) -> int:
    cfg = _config_from_args(args)
    system = _system(cfg)
    src = _source(cfg)
    N = _photons(cfg, src)
    Q = _cutoff(cfg, system.c, src.protocol, N)
    basis = build_basis(system.c, max(Q, 1))
    sigma = sigma_for_source(src, order_constant(basis, Q, cfg.exact_sum))
    row = (src.protocol.value, cfg.M, float(N), cfg.tau, cfg.N_avg, system.c, system.rayleigh * 1e9, Q,
           src.r, src.alpha, 0.0 - 20.0 * src.r / math.log(10.0), sigma, resolution(system, Q) * 1e9)
    _emit(cfg.directory, "predict.csv", PREDICT_HEADER, [row])
    return EXIT_OK


def _object(cfg: RunConfig) -> PhaseObject:
    if cfg.object == "zero":
        return PhaseObject.zero()
    peak = LOBE_PEAK_RAD if cfg.object_peak_rad is None else cfg.object_peak_rad
    return three_lobe_object(peak)


def cmd_simulate(args) -> int:
    cfg = _config_from_args(args)
    if cfg.seed is None:
        raise ConfigError("simulation.seed is required (--seed or config file)")
    if cfg.directory is None:
        raise ConfigError("simulate needs an output directory (--out or output.directory)")
    system = _system(cfg)
    src = _source(cfg)
    Q = _cutoff(cfg, system.c, src.protocol, _photons(cfg, src))
    basis = build_basis(system.c, max(Q + 1, 12))
    obj = _object(cfg)
    meas = simulate_measurement(obj, src, basis, cfg.trials, cfg.seed, cfg.mode, cfg.grid_points, system=system)
    rec = reconstruct(meas, basis, Q, src, obj, exact_sum=cfg.exact_sum)
    log.info("small-phase margin %.4g", meas.small_phase_margin)
    if rec.low_confidence:
        log.warning("only %d trials: empirical sigma is low-confidence", rec.trials)

    out = Path(cfg.directory)
    out.mkdir(parents=True, exist_ok=True)
    # the output block is left out so that runs into different directories match byte for byte
    write_atomic(out / "config.txt", cfg.to_text(include_output=False))
    grid = meas.grid.tolist()
    write_csv(out / "mean.csv", ("s", "analytic_mean", "sample_mean"),
              zip(grid, meas.analytic_mean.tolist(), meas.mean.tolist()))
    write_csv(out / "samples.csv", ("s", "trial_mean", "trial_std"),
              zip(grid, meas.mean.tolist(), meas.trial_std().tolist()))
    traces = meas.samples
    write_csv(out / "traces.csv", ("s",) + tuple(f"trial_{k}" for k in range(traces.shape[0])),
              zip(grid, *(t.tolist() for t in traces)))
    write_csv(out / "reconstruction.csv", ("s", "phi_true", "phi_hat", "ci_low", "ci_high"),
              zip(rec.grid.tolist(), rec.phi_true.tolist(), rec.phi_hat.tolist(),
                  rec.ci_low.tolist(), rec.ci_high.tolist()))
    write_csv(out / "summary.csv", SUMMARY_HEADER,
              [(rec.sigma_predicted, rec.sigma_empirical, rec.Q, rec.seed, rec.trials,
                rec.sigma_empirical_interval, rec.low_confidence, meas.small_phase_margin)])
    return EXIT_OK


def cmd_reproduce(args) -> int:
    checks = run_checks(args.perturb_lambda, trials=args.trials, seed=args.seed)
    for chk in checks:
        print(f"{'PASS' if chk.passed else 'FAIL'}  {chk.check_id}: expected {chk.expected:g}, "
              f"got {chk.actual:.6g} (tol {chk.tolerance:g})")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "report.csv", REPORT_HEADER, (c.row() for c in checks))
    n_fail = sum(not c.passed for c in checks)
    print(f"{len(checks) - n_fail}/{len(checks)} checks passed")
    return EXIT_OK if n_fail == 0 else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="memsl-imaging", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("basis", help="tabulate eigenvalues and couplings")
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--jmax", type=int, default=10)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("optimize", help="optimal probe parameters for each protocol and transmission")
    _add_config_flags(p, ("imaging", "source", "reconstruction", "optimize"))
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("predict", help="closed-form error, cutoff and resolution for one configuration")
    _add_config_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("simulate", help="seeded Monte Carlo run with reconstruction")
    _add_config_flags(p, ("imaging", "source", "reconstruction", "simulation"))
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reproduce-paper", help="run the reference-value checks and write report.csv")
    p.add_argument("--out", default="reproduce-report")
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--perturb-lambda", dest="perturb_lambda", type=float, default=0.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, DomainError, ProtocolMismatch) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ImagingError, ArithmeticError) as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

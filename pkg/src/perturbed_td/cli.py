"""Command-line front end: ``run``, ``analyze``, ``sweep`` and ``describe``.

Exit codes: 0 success, 2 configuration error, 3 coverage violation,
4 analysis failure (reducible or periodic behavior chain, singular system).
"""

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import kernels
from .analysis import (
    eta_lower_bound,
    expected_system,
    fixed_point,
    min_sym_eigenvalue,
    perturbed_state_matrix,
)
from .benchmarks import BUILDERS
from .config import DEFAULTS, benchmark_from, check_algorithm, describe, parse_schedule, parse_text
from .errors import ConfigError, CoverageError, PerturbedTDError, RankError
from .experiments import RunConfig, run_experiment
from .linear import approx_value, has_full_column_rank, project, weighted_rmse
from .mdp import exact_value, policy_kernel, stationary_distribution

EXIT_OK, EXIT_CONFIG, EXIT_COVERAGE, EXIT_ANALYSIS = 0, 2, 3, 4


def fmt(x):
    # + 0.0 folds -0.0 into 0.0
    return f"{float(x) + 0.0:.12g}"


def fmt_vec(v):
    return "[" + ", ".join(fmt(x) for x in np.ravel(v)) + "]"


def fmt_mat(m):
    return "[" + ", ".join(fmt_vec(row) for row in np.atleast_2d(m)) + "]"


def parse_eta_list(text):
    """``"0,1"`` or ``"start:stop:step"`` (stop inclusive) -> list of floats."""
    try:
        if ":" in text:
            start, stop, step = (float(t) for t in text.split(":"))
            if step <= 0:
                raise ValueError("step must be positive")
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            values = [round(start + i * step, 12) for i in range(count)]
        else:
            values = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"field 'eta': cannot parse {text!r}: {exc}") from None
    if not values or any(v < 0 for v in values):
        raise ConfigError(f"field 'eta': need nonnegative values, got {text!r}")
    return values


class Settings:
    """Merged settings: command-line flag > config file > default."""

    def __init__(self, args):
        parsed = parse_text(Path(args.config).read_text(encoding="utf-8")) if args.config else parse_text("")
        if args.env is not None:
            if args.env not in BUILDERS:
                raise ConfigError(f"field 'env': unknown benchmark {args.env!r}; choose from {sorted(BUILDERS)}")
            self.benchmark = BUILDERS[args.env]()
        else:
            self.benchmark = benchmark_from(parsed)
        self.values = dict(DEFAULTS)
        self.values.update({k: v for k, v in parsed.scalars.items() if k in DEFAULTS})
        flag_map = {
            "algo": args.algo, "eta": args.eta, "alpha": args.alpha, "beta": args.beta,
            "schedule": args.schedule, "iters": args.iters, "runs": args.runs,
            "seed": args.seed, "stride": args.stride, "out": args.out,
        }
        self.values.update({k: v for k, v in flag_map.items() if v is not None})

    def __getitem__(self, key):
        return self.values[key]

    def run_config(self, eta=None, workers=1):
        v = self.values
        alpha = float(v["alpha"])
        if not alpha > 0:
            raise ConfigError(f"field 'alpha': must be positive, got {alpha!r}")
        schedule = parse_schedule(v["schedule"], alpha)
        try:
            return RunConfig(
                algorithm=check_algorithm(v["algo"]),
                eta=float(v["eta"] if eta is None else eta),
                schedule=schedule,
                iterations=int(v["iters"]),
                num_runs=int(v["runs"]),
                base_seed=int(v["seed"]),
                eval_stride=int(v["stride"]),
                beta=None if v["beta"] is None else float(v["beta"]),
                workers=workers,
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from None


def write_trajectory(path, log):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", "run", "rmse"])
        for k, series in enumerate(log.rmse):
            for it, value in zip(log.iterations, series):
                writer.writerow([int(it), k, fmt(value)])
        for it, value in zip(log.iterations, log.mean):
            writer.writerow([int(it), "mean", fmt(value)])


def summary_text(benchmark, config, log):
    flags = " ".join("1" if f else "0" for f in log.diverged)
    lines = [
        f"benchmark: {benchmark.name}",
        f"algorithm: {config.algorithm}",
        f"eta: {fmt(config.effective_eta)}",
        f"alpha: {fmt(config.schedule.alpha0)}",
        f"schedule: {config.schedule.kind}"
        + (f":{fmt(config.schedule.exponent)}" if config.schedule.kind == "polynomial" else ""),
        f"iterations: {config.iterations}",
        f"runs: {config.num_runs}",
        f"seed: {config.base_seed}",
        f"final_rmse: {fmt(log.final_mean)} +- {fmt(log.final_std)}",
        f"diverged_runs: {int(log.diverged.sum())}/{config.num_runs}",
        f"diverged: {flags}",
    ]
    return "\n".join(lines) + "\n"


def cmd_run(args):
    settings = Settings(args)
    config = settings.run_config(workers=args.workers)
    log = run_experiment(settings.benchmark, config)
    out = Path(settings["out"])
    out.mkdir(parents=True, exist_ok=True)
    write_trajectory(out / "trajectory.csv", log)
    summary = summary_text(settings.benchmark, config, log)
    (out / "summary.txt").write_text(summary, encoding="utf-8")
    sys.stdout.write(summary)
    print(f"backend: {kernels.BACKEND}; wrote {out / 'trajectory.csv'} and {out / 'summary.txt'}", file=sys.stderr)
    return EXIT_OK


def analysis_report(benchmark, etas):
    """Lines of the ``analyze`` report; per-eta failures are reported inline."""
    mdp, target, behavior, phi = benchmark.mdp, benchmark.target, benchmark.behavior, benchmark.features
    d_mu = stationary_distribution(policy_kernel(mdp, behavior))
    v_exact = exact_value(mdp, target)
    lines = [
        f"benchmark: {benchmark.name}",
        f"states: {mdp.num_states}",
        f"features: {phi.shape[1]}",
        f"discount: {fmt(mdp.discount)}",
        f"stationary_distribution: {fmt_vec(d_mu)}",
        f"exact_value: {fmt_vec(v_exact)}",
        f"eta_lower_bound: {fmt(eta_lower_bound(mdp, target, behavior))}",
    ]
    full_rank = has_full_column_rank(phi)
    if full_rank:
        _, v_best = project(phi, d_mu, v_exact)
        lines.append(f"best_rmse: {fmt(weighted_rmse(v_exact, v_best, d_mu))}")
    else:
        lines.append("best_rmse: n/a (features not full column rank)")
    for eta in etas:
        lines.append(f"[eta = {fmt(eta)}]")
        system = expected_system(mdp, target, behavior, phi, eta)
        lines += [
            f"A: {fmt_mat(system.a_matrix)}",
            f"b: {fmt_vec(system.b_vector)}",
            f"min_sym_eigenvalue: {fmt(system.min_sym_eigenvalue)}",
            f"positive_definite: {system.pd_verdict}",
        ]
        state_lam = min_sym_eigenvalue(perturbed_state_matrix(mdp, target, behavior, eta))
        lines.append(f"state_matrix_min_sym_eigenvalue: {fmt(state_lam)}")
        try:
            theta = fixed_point(system)
        except RankError as exc:
            lines.append(f"theta_star: n/a ({exc})")
            continue
        lines.append(f"theta_star: {fmt_vec(theta)}")
        lines.append(f"fixed_point_rmse: {fmt(weighted_rmse(v_exact, approx_value(phi, theta), d_mu))}")
    return lines


def cmd_analyze(args):
    settings = Settings(args)
    etas = parse_eta_list(args.eta_list) if args.eta_list else [float(settings["eta"])]
    sys.stdout.write("\n".join(analysis_report(settings.benchmark, etas)) + "\n")
    return EXIT_OK


def sweep_rows(benchmark, settings, etas, workers=1):
    mdp, phi = benchmark.mdp, benchmark.features
    d_mu = stationary_distribution(policy_kernel(mdp, benchmark.behavior))
    v_exact = exact_value(mdp, benchmark.target)
    rows = []
    for eta in etas:
        system = expected_system(mdp, benchmark.target, benchmark.behavior, phi, eta)
        try:
            theta = fixed_point(system)
            fp_rmse = fmt(weighted_rmse(v_exact, approx_value(phi, theta), d_mu))
        except RankError:
            fp_rmse = ""
        config = settings.run_config(eta=eta, workers=workers)
        if config.algorithm != "perturbed":
            raise ConfigError("field 'algo': sweep varies eta and needs algo 'perturbed'")
        log = run_experiment(benchmark, config)
        rows.append([fmt(eta), system.pd_verdict, fmt(system.min_sym_eigenvalue), fp_rmse, fmt(log.final_mean)])
    return rows


def cmd_sweep(args):
    settings = Settings(args)
    if args.eta_range is None:
        raise ConfigError("field 'eta': sweep needs --eta-range")
    rows = sweep_rows(settings.benchmark, settings, parse_eta_list(args.eta_range), args.workers)
    out = Path(settings["out"])
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sweep.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["eta", "pd", "min_sym_eig", "fixed_point_rmse", "final_mean_rmse"])
        writer.writerows(rows)
    for row in rows:
        print(",".join(row))
    return EXIT_OK


def cmd_describe(args):
    settings = Settings(args)
    sys.stdout.write(describe(settings.benchmark))
    return EXIT_OK


def _common(p):
    p.add_argument("--env", help=f"named benchmark: {', '.join(sorted(BUILDERS))}")
    p.add_argument("--config", help="experiment config file")
    p.add_argument("--algo", help="td0, perturbed, etd or tdc")
    p.add_argument("--alpha", type=float, help="step size (alpha_0 for polynomial schedules)")
    p.add_argument("--beta", type=float, help="TDC secondary step size (default: alpha)")
    p.add_argument("--schedule", help="'constant' or 'polynomial:EXP'")
    p.add_argument("--iters", type=int, help="iterations per run")
    p.add_argument("--runs", type=int, help="independent runs")
    p.add_argument("--seed", type=int, help="base seed; run k uses seed + k")
    p.add_argument("--stride", type=int, help="record RMSE every STRIDE iterations")
    p.add_argument("--out", help="output directory")
    p.add_argument("--workers", type=int, default=1, help="threads for independent runs")


def build_parser():
    parser = argparse.ArgumentParser(prog="perturbed-td", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a learner and write trajectory.csv and summary.txt")
    _common(p)
    p.add_argument("--eta", type=float, help="perturbation for the perturbed learner")
    p.set_defaults(func=cmd_run, eta_list=None)

    p = sub.add_parser("analyze", help="expected-update matrices, PD verdicts and fixed points")
    _common(p)
    p.add_argument("--eta", dest="eta_list", help="comma list or start:stop:step")
    p.set_defaults(func=cmd_analyze, eta=None)

    p = sub.add_parser("sweep", help="PD verdict, fixed-point and learned RMSE over a range of eta")
    _common(p)
    p.add_argument("--eta-range", required=False, help="comma list or start:stop:step")
    p.set_defaults(func=cmd_sweep, eta=None)

    p = sub.add_parser("describe", help="print a benchmark as an inline config")
    _common(p)
    p.set_defaults(func=cmd_describe, eta=None)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CoverageError as exc:
        print(f"coverage violation: {exc}", file=sys.stderr)
        return EXIT_COVERAGE
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PerturbedTDError as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())

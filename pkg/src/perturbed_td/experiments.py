"""Seeded multi-run experiment harness producing RMSE learning curves."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .learners import ALGORITHMS, StepSchedule, TransitionSample
from .mdp import exact_value, policy_kernel, stationary_distribution

CHUNK = 1 << 16
DIVERGENCE_THRESHOLD = 1e8


@dataclass(frozen=True)
class RunConfig:
    algorithm: str = "perturbed"
    eta: float = 0.0
    schedule: StepSchedule = field(default_factory=StepSchedule)
    iterations: int = 10_000
    num_runs: int = 10
    base_seed: int = 0
    eval_stride: int = 100
    beta: float | None = None
    divergence_threshold: float = DIVERGENCE_THRESHOLD
    workers: int = 1

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        if self.eta < 0:
            raise ValueError(f"eta must be nonnegative, got {self.eta}")
        if self.iterations < 1 or self.num_runs < 1 or self.eval_stride < 1:
            raise ValueError("iterations, num_runs and eval_stride must be positive")
        if self.beta is not None and not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")

    @property
    def effective_eta(self):
        """Only the perturbed learner uses eta."""
        return self.eta if self.algorithm == "perturbed" else 0.0

    @property
    def beta0(self):
        return self.schedule.alpha0 if self.beta is None else self.beta


@dataclass
class RunLog:
    iterations: np.ndarray
    rmse: np.ndarray  # (num_runs, num_points)
    diverged: np.ndarray
    diverged_at: np.ndarray
    final_theta: np.ndarray  # (num_runs, d)
    seeds: np.ndarray

    @property
    def mean(self):
        return self.rmse.mean(axis=0)

    @property
    def final_mean(self):
        return float(self.rmse[:, -1].mean())

    @property
    def final_std(self):
        return float(self.rmse[:, -1].std())


def record_points(iterations, stride):
    """Update counts at which RMSE is recorded: 0, stride, 2 stride, ..., iterations."""
    pts = list(range(0, iterations + 1, stride))
    if pts[-1] != iterations:
        pts.append(iterations)
    return np.array(pts, dtype=np.int64)


def sample_transition(mdp, behavior, current_state, rng):
    """Draw ``a ~ mu(s, .)`` then ``s' ~ p(. | s, a)``, one uniform each, in that order."""
    u_action = rng.random()
    u_next = rng.random()
    # first index whose cumulative probability exceeds u, same rule as the kernels
    cum_mu = np.cumsum(behavior.probs[current_state])
    a = int(np.searchsorted(cum_mu[:-1], u_action, side="right"))
    cum_p = np.cumsum(mdp.transitions[current_state, a])
    s2 = int(np.searchsorted(cum_p[:-1], u_next, side="right"))
    return TransitionSample(int(current_state), a, float(mdp.rewards[current_state, a]), s2)


class _Prepared:
    """Arrays shared by every run of one experiment."""

    def __init__(self, benchmark, config):
        mdp = benchmark.mdp
        self.phi = np.ascontiguousarray(benchmark.features, dtype=float)
        self.d_mu = stationary_distribution(policy_kernel(mdp, benchmark.behavior))
        self.v_exact = exact_value(mdp, benchmark.target)
        mu, pi = benchmark.behavior.probs, benchmark.target.probs
        self.rho = np.divide(pi, mu, out=np.zeros_like(pi), where=mu > 0)
        self.cum_mu = np.cumsum(mu, axis=1)
        self.cum_p = np.ascontiguousarray(np.cumsum(mdp.transitions, axis=2))
        self.rewards = np.ascontiguousarray(mdp.rewards)
        self.gamma = mdp.discount
        self.theta0 = np.array(benchmark.theta0, dtype=float)
        self.points = record_points(config.iterations, config.eval_stride)


def _single_run(prep, config, seed, backend):
    rng = np.random.default_rng(seed)
    theta = prep.theta0.copy()
    w = np.zeros_like(theta)
    trace = np.array([0.0, 1.0])
    out = np.empty(len(prep.points))
    out[0] = backend.weighted_error(prep.phi, theta, prep.v_exact, prep.d_mu)
    algo = kernels.ALGO_CODES[config.algorithm]
    state, done, diverged_at = 0, 0, -1
    while done < config.iterations:
        m = min(CHUNK, config.iterations - done)
        uniforms = rng.random((m, 2))
        state, diverged_at = backend.run_block(
            algo, prep.phi, prep.rho, prep.cum_mu, prep.cum_p, prep.rewards,
            prep.gamma, config.effective_eta, config.schedule.alpha0,
            config.schedule.decay, config.beta0, prep.v_exact, prep.d_mu,
            theta, w, trace, uniforms, state, done, config.eval_stride,
            config.iterations, config.divergence_threshold, out,
        )
        done += m
        if diverged_at >= 0:
            # truncate and carry the last RMSE forward
            first = (diverged_at + config.eval_stride - 1) // config.eval_stride
            out[first + 1:] = out[first]
            break
    return out, diverged_at, theta


def run_experiment(benchmark, config, backend=None):
    """Run ``config.num_runs`` independent trajectories from state 0.

    Run ``k`` uses seed ``config.base_seed + k``.  RMSE is weighted by the exact
    behavior stationary distribution against the exact target values.
    """
    impl = kernels.load_backend(backend) if backend else kernels.active
    prep = _Prepared(benchmark, config)
    seeds = config.base_seed + np.arange(config.num_runs)

    def one(seed):
        return _single_run(prep, config, int(seed), impl)

    if config.workers > 1 and config.num_runs > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(one, seeds))
    else:
        results = [one(s) for s in seeds]

    return RunLog(
        iterations=prep.points,
        rmse=np.array([r[0] for r in results]),
        diverged=np.array([r[1] >= 0 for r in results]),
        diverged_at=np.array([r[1] for r in results], dtype=np.int64),
        final_theta=np.array([r[2] for r in results]),
        seeds=seeds,
    )

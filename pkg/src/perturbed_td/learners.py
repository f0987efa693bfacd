"""Single-step off-policy learners over sampled transitions.

Four updaters share one signature style: they take the current
:class:`LearnerState` and a :class:`TransitionSample` and return a new state.

* :func:`step_offpolicy_td`   off-policy TD(0) with importance ratios
* :func:`step_perturbed_td`   perturbed off-policy TD(0), TD error with ``(1 + eta)``
* :func:`step_etd`            emphatic TD(0), interest 1, follow-on trace ``F``
* :func:`step_tdc`            TD with gradient correction, secondary weights ``w``

The run loop in :mod:`perturbed_td.kernels` inlines the same arithmetic; these
functions are the readable reference and are cross-checked against it in tests.
"""

from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .errors import CoverageError

ALGORITHMS = ("td0", "perturbed", "etd", "tdc")
FOLLOW_ON_LIMIT = 1e100


class TransitionSample(NamedTuple):
    state: int
    action: int
    reward: float
    next_state: int


@dataclass(frozen=True)
class StepSchedule:
    """Step sizes ``alpha_n = alpha0`` (constant) or ``alpha0 / (n + 1)**exponent``."""

    kind: str = "constant"
    alpha0: float = 0.01
    exponent: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "polynomial"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if not self.alpha0 > 0:
            raise ValueError(f"alpha0 must be positive, got {self.alpha0}")
        if self.kind == "polynomial" and not 0 < self.exponent <= 1:
            raise ValueError(f"polynomial exponent must lie in (0, 1], got {self.exponent}")

    @property
    def decay(self):
        """Exponent applied to ``n + 1`` (0 for constant steps)."""
        return self.exponent if self.kind == "polynomial" else 0.0

    def __call__(self, n):
        if self.kind == "constant":
            return self.alpha0
        return self.alpha0 / float(n + 1) ** self.exponent

    @property
    def robbins_monro(self):
        """True when sum alpha_n diverges and sum alpha_n^2 converges."""
        return self.kind == "polynomial" and 0.5 < self.exponent <= 1.0


@dataclass(frozen=True)
class LearnerState:
    """Weights plus algorithm-specific extras.

    ``w`` is TDC's secondary weight vector.  ``follow_on`` and ``rho_prev`` hold
    ETD's previous trace ``F_{n-1}`` and ratio ``rho_{n-1}``; the initial values
    ``(0, 1)`` make the first trace ``F_0 = 1``.
    """

    theta: np.ndarray
    w: np.ndarray | None = None
    follow_on: float | None = None
    rho_prev: float | None = None
    diverged: bool = field(default=False)

    @classmethod
    def initial(cls, algorithm, theta0):
        theta = np.array(theta0, dtype=float)
        if algorithm == "tdc":
            return cls(theta, w=np.zeros_like(theta))
        if algorithm == "etd":
            return cls(theta, follow_on=0.0, rho_prev=1.0)
        if algorithm in ("td0", "perturbed"):
            return cls(theta)
        raise ValueError(f"unknown algorithm {algorithm!r}")


def importance_ratio(target, behavior, s, a):
    mu = behavior.probs[s, a]
    if mu <= 0:
        raise CoverageError(f"behavior policy never takes action {a} in state {s}")
    return target.probs[s, a] / mu


def td_error(theta, sample, features, gamma, eta=0.0):
    """``r + gamma phi(s')^T theta - (1 + eta) phi(s)^T theta``."""
    phi = np.asarray(features)
    return (
        sample.reward
        + gamma * float(phi[sample.next_state] @ theta)
        - (1.0 + eta) * float(phi[sample.state] @ theta)
    )


def step_perturbed_td(state, sample, features, target, behavior, gamma, eta, alpha_n):
    if eta < 0:
        raise ValueError(f"eta must be nonnegative, got {eta}")
    rho = importance_ratio(target, behavior, sample.state, sample.action)
    delta = td_error(state.theta, sample, features, gamma, eta)
    theta = state.theta + (alpha_n * rho * delta) * np.asarray(features)[sample.state]
    return replace(state, theta=theta)


def step_offpolicy_td(state, sample, features, target, behavior, gamma, alpha_n):
    return step_perturbed_td(state, sample, features, target, behavior, gamma, 0.0, alpha_n)


def step_etd(state, sample, features, target, behavior, gamma, alpha_n):
    """Emphatic TD(0): ``F_n = 1 + gamma rho_{n-1} F_{n-1}``, step scaled by ``F_n``."""
    rho = importance_ratio(target, behavior, sample.state, sample.action)
    follow_on = 1.0 + gamma * state.rho_prev * state.follow_on
    delta = td_error(state.theta, sample, features, gamma)
    theta = state.theta + (alpha_n * follow_on * rho * delta) * np.asarray(features)[sample.state]
    return replace(
        state,
        theta=theta,
        follow_on=follow_on,
        rho_prev=rho,
        diverged=state.diverged or not follow_on <= FOLLOW_ON_LIMIT,
    )


def step_tdc(state, sample, features, target, behavior, gamma, alpha_n, beta_n):
    phi = np.asarray(features)
    rho = importance_ratio(target, behavior, sample.state, sample.action)
    delta = td_error(state.theta, sample, features, gamma)
    x, x_next = phi[sample.state], phi[sample.next_state]
    correction = float(x @ state.w)
    theta = state.theta + (alpha_n * rho) * (delta * x - (gamma * correction) * x_next)
    w = state.w + (beta_n * rho * (delta - correction)) * x
    return replace(state, theta=theta, w=w)


def sample_matrices(sample, features, target, behavior, gamma, eta):
    """Per-sample ``(A_n, b_n)`` so that the perturbed step is ``theta + alpha (b_n - A_n theta)``."""
    phi = np.asarray(features, dtype=float)
    rho = importance_ratio(target, behavior, sample.state, sample.action)
    x, x_next = phi[sample.state], phi[sample.next_state]
    a_n = -rho * (gamma * np.outer(x, x_next) - (1.0 + eta) * np.outer(x, x))
    b_n = rho * sample.reward * x
    return a_n, b_n

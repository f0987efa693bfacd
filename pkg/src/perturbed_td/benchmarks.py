"""The three off-policy prediction benchmarks: theta->2theta, Baird's 7-star and a 3-state chain."""

from dataclasses import dataclass

import numpy as np

from .errors import CoverageError, ShapeError
from .linear import as_features
from .mdp import Mdp, Policy


@dataclass(frozen=True)
class Benchmark:
    name: str
    mdp: Mdp
    target: Policy
    behavior: Policy
    features: np.ndarray
    theta0: np.ndarray

    def __post_init__(self):
        shape = (self.mdp.num_states, self.mdp.num_actions)
        for label, policy in (("target", self.target), ("behavior", self.behavior)):
            if policy.probs.shape != shape:
                raise ShapeError(f"{label} policy shape {policy.probs.shape} != {shape}")
        phi = as_features(self.features, self.mdp.num_states)
        theta0 = np.array(self.theta0, dtype=float)
        if theta0.shape != (phi.shape[1],):
            raise ShapeError(f"theta0 must have length {phi.shape[1]}, got {theta0.shape}")
        uncovered = np.argwhere((self.target.probs > 0) & (self.behavior.probs <= 0))
        if len(uncovered):
            s, a = uncovered[0]
            raise CoverageError(
                f"target takes action {a} in state {s} but the behavior policy never does"
            )
        phi = phi.copy()
        phi.flags.writeable = False
        theta0.flags.writeable = False
        object.__setattr__(self, "features", phi)
        object.__setattr__(self, "theta0", theta0)

    @property
    def num_features(self):
        return self.features.shape[1]


def _deterministic_transitions(next_state):
    """``next_state[s][a]`` -> transition tensor."""
    next_state = np.asarray(next_state)
    n_states, n_actions = next_state.shape
    p = np.zeros((n_states, n_actions, n_states))
    for s in range(n_states):
        for a in range(n_actions):
            p[s, a, next_state[s, a]] = 1.0
    return p


def build_theta_2theta():
    """Two states, actions (left, right); left always leads to state 0, right to state 1.

    Rewards are zero so the true values are zero and the only representable
    solution is theta = 0.
    """
    p = _deterministic_transitions([[0, 1], [0, 1]])
    mdp = Mdp(p, np.zeros((2, 2)), 0.9)
    return Benchmark(
        name="theta2theta",
        mdp=mdp,
        target=Policy([[0.0, 1.0], [0.0, 1.0]]),
        behavior=Policy([[0.5, 0.5], [0.5, 0.5]]),
        features=np.array([[1.0], [2.0]]),
        theta0=np.array([1.0]),
    )


def build_baird(discount=0.99, theta0=(1, 1, 1, 1, 1, 1, 10, 1)):
    """Baird's 7-star counterexample.

    Actions are (dashed, solid).  Dashed moves uniformly to one of the six outer
    states, solid moves to the center state 6.  The target always takes solid;
    the behavior takes dashed with probability 6/7.  Outer state ``i`` has value
    ``2 theta_i + theta_7`` and the center ``theta_6 + 2 theta_7`` (0-based).
    """
    n = 7
    p = np.zeros((n, 2, n))
    p[:, 0, :6] = 1.0 / 6.0
    p[:, 1, 6] = 1.0
    mdp = Mdp(p, np.zeros((n, 2)), discount)
    phi = np.zeros((n, 8))
    for s in range(6):
        phi[s, s] = 2.0
        phi[s, 7] = 1.0
    phi[6, 6] = 1.0
    phi[6, 7] = 2.0
    return Benchmark(
        name="baird",
        mdp=mdp,
        target=Policy(np.tile([0.0, 1.0], (n, 1))),
        behavior=Policy(np.tile([6.0 / 7.0, 1.0 / 7.0], (n, 1))),
        features=phi,
        theta0=np.array(theta0, dtype=float),
    )


def build_chain3():
    """Three states, actions (left, right), unit rewards, gamma = 0.9.

    Left: 0->0, 1->0, 2->1.  Right: 0->1, 1->2, 2->2.
    """
    p = _deterministic_transitions([[0, 1], [0, 2], [1, 2]])
    mdp = Mdp(p, np.ones((3, 2)), 0.9)
    return Benchmark(
        name="chain3",
        mdp=mdp,
        target=Policy([[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]]),
        behavior=Policy([[0.9, 0.1], [0.5, 0.5], [0.1, 0.9]]),
        features=np.array([[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]),
        theta0=np.zeros(2),
    )


BUILDERS = {
    "theta2theta": build_theta_2theta,
    "baird": build_baird,
    "chain3": build_chain3,
}


def get_benchmark(name):
    try:
        return BUILDERS[name]()
    except KeyError:
        raise KeyError(f"unknown benchmark {name!r}; choose from {sorted(BUILDERS)}") from None

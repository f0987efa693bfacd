"""Finite MDPs, policies, induced Markov chains and Bellman operators."""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, NumericError, ReducibilityError, ShapeError

PROB_ATOL = 1e-12


def _check_stochastic(rows, what):
    if np.any(rows < 0):
        raise ValueError(f"{what} has negative entries")
    sums = rows.sum(axis=-1)
    if np.any(np.abs(sums - 1.0) > PROB_ATOL):
        raise ValueError(f"{what} rows must sum to 1 (max error {np.abs(sums - 1.0).max():.3g})")


@dataclass(frozen=True)
class Mdp:
    """Finite discounted MDP.

    Attributes:
        transitions: array ``(S, A, S)`` with ``transitions[s, a, s2] = p(s2 | s, a)``.
        rewards: array ``(S, A)`` of deterministic expected rewards ``r(s, a)``.
        discount: discount factor in (0, 1).
    """

    transitions: np.ndarray
    rewards: np.ndarray
    discount: float

    def __post_init__(self):
        p = np.array(self.transitions, dtype=float)
        r = np.array(self.rewards, dtype=float)
        if p.ndim != 3 or p.shape[0] != p.shape[2] or p.shape[0] < 1 or p.shape[1] < 1:
            raise ShapeError(f"transitions must have shape (S, A, S), got {p.shape}")
        if r.shape != p.shape[:2]:
            raise ShapeError(f"rewards must have shape {p.shape[:2]}, got {r.shape}")
        if not np.all(np.isfinite(r)):
            raise ValueError("rewards must be finite")
        _check_stochastic(p, "transitions")
        if not 0.0 < self.discount < 1.0:
            raise ValueError(f"discount must lie in (0, 1), got {self.discount}")
        p.flags.writeable = False
        r.flags.writeable = False
        object.__setattr__(self, "transitions", p)
        object.__setattr__(self, "rewards", r)
        object.__setattr__(self, "discount", float(self.discount))

    @property
    def num_states(self):
        return self.transitions.shape[0]

    @property
    def num_actions(self):
        return self.transitions.shape[1]


@dataclass(frozen=True)
class Policy:
    """Stationary randomized policy, ``probs[s, a]`` = probability of ``a`` in ``s``."""

    probs: np.ndarray

    def __post_init__(self):
        q = np.array(self.probs, dtype=float)
        if q.ndim != 2:
            raise ShapeError(f"policy must be a 2-d table, got shape {q.shape}")
        _check_stochastic(q, "policy")
        q.flags.writeable = False
        object.__setattr__(self, "probs", q)

    @property
    def num_states(self):
        return self.probs.shape[0]

    @property
    def num_actions(self):
        return self.probs.shape[1]

    @classmethod
    def deterministic(cls, actions, num_actions):
        """Policy choosing ``actions[s]`` with probability one in state ``s``."""
        probs = np.zeros((len(actions), num_actions))
        probs[np.arange(len(actions)), actions] = 1.0
        return cls(probs)


def _check_policy(mdp, policy):
    if policy.probs.shape != (mdp.num_states, mdp.num_actions):
        raise ShapeError(
            f"policy shape {policy.probs.shape} does not match MDP "
            f"({mdp.num_states}, {mdp.num_actions})"
        )


def policy_kernel(mdp, policy):
    """State transition matrix ``P[i, j] = sum_a policy(i, a) p(j | i, a)``."""
    _check_policy(mdp, policy)
    return np.einsum("ia,iaj->ij", policy.probs, mdp.transitions)


def policy_reward(mdp, policy):
    """Expected one-step reward ``r_pi(i) = sum_a r(i, a) policy(i, a)``."""
    _check_policy(mdp, policy)
    return np.einsum("ia,ia->i", policy.probs, mdp.rewards)


def _reachable(adj):
    # boolean transitive closure; S is small
    n = adj.shape[0]
    reach = adj | np.eye(n, dtype=bool)
    for _ in range(max(1, int(np.ceil(np.log2(max(n, 2)))) + 1)):
        reach = reach | ((reach.astype(np.int64) @ reach.astype(np.int64)) > 0)
    return reach


def is_irreducible(kernel):
    adj = np.asarray(kernel) > 0
    return bool(np.all(_reachable(adj)))


def is_aperiodic(kernel):
    """For an irreducible kernel: True iff some power is strictly positive.

    Uses Wielandt's bound ``(n - 1)**2 + 1`` on the exponent of a primitive matrix.
    """
    adj = (np.asarray(kernel) > 0).astype(np.int64)
    n = adj.shape[0]
    power = adj.copy()
    for _ in range((n - 1) ** 2 + 1):
        if np.all(power > 0):
            return True
        power = ((power @ adj) > 0).astype(np.int64)
    return bool(np.all(power > 0))


def stationary_distribution(kernel, tol=1e-12, max_iter=1_000_000):
    """Stationary distribution of an irreducible, aperiodic row-stochastic kernel.

    Power iteration on ``d^T P`` from the uniform vector.  Converged once successive
    iterates differ by at most ``tol`` in the 1-norm; iteration then continues
    until the step stops shrinking, which removes the geometric tail error.

    Raises:
        ReducibilityError: the chain is not irreducible.
        ConvergenceError: the chain is periodic or the iteration cap is reached.
    """
    P = np.asarray(kernel, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ShapeError(f"kernel must be square, got {P.shape}")
    _check_stochastic(P, "kernel")
    if not is_irreducible(P):
        raise ReducibilityError("behavior chain is reducible; some state has zero stationary mass")
    if not is_aperiodic(P):
        raise ConvergenceError("chain is periodic; power iteration does not converge")

    n = P.shape[0]
    d = np.full(n, 1.0 / n)
    converged = False
    prev = np.inf
    for _ in range(max_iter):
        nxt = d @ P
        nxt /= nxt.sum()
        step = np.abs(nxt - d).sum()
        d = nxt
        if step <= tol:
            converged = True
        # past tol, keep polishing until the step stops shrinking (rounding floor)
        if converged and (step == 0.0 or step >= prev):
            break
        prev = step
    if not converged:
        raise ConvergenceError(f"power iteration did not converge in {max_iter} iterations")

    if np.any(d <= 0):
        raise ReducibilityError("stationary distribution has a zero-mass state")
    residual = np.abs(d @ P - d).max()
    if residual > 1e-10:
        raise ConvergenceError(f"stationary residual {residual:.3g} exceeds 1e-10")
    return d


def exact_value(mdp, policy):
    """Value function ``(I - gamma P_pi)^{-1} r_pi`` of ``policy``."""
    P = policy_kernel(mdp, policy)
    r = policy_reward(mdp, policy)
    system = np.eye(mdp.num_states) - mdp.discount * P
    try:
        v = np.linalg.solve(system, r)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"value system is singular: {exc}") from exc
    residual = np.abs(system @ v - r).max()
    if not np.all(np.isfinite(v)) or residual > 1e-10 * max(1.0, np.abs(v).max()):
        raise NumericError(f"value solve residual {residual:.3g} too large")
    return v


def bellman_apply(mdp, policy, v, eta=0.0):
    """Perturbed Bellman operator ``(r_pi + gamma P_pi v) / (1 + eta)``.

    ``eta = 0`` gives the ordinary policy-evaluation operator.
    """
    if eta < 0:
        raise ValueError(f"eta must be nonnegative, got {eta}")
    v = np.asarray(v, dtype=float)
    if v.shape != (mdp.num_states,):
        raise ShapeError(f"value vector must have length {mdp.num_states}, got {v.shape}")
    P = policy_kernel(mdp, policy)
    r = policy_reward(mdp, policy)
    return (r + mdp.discount * (P @ v)) / (1.0 + eta)

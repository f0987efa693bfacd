import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perturbed_td import (
    ConvergenceError,
    Mdp,
    Policy,
    ReducibilityError,
    ShapeError,
    bellman_apply,
    exact_value,
    policy_kernel,
    policy_reward,
    stationary_distribution,
)

from conftest import random_benchmark
from oracles import stationary_by_solve, value_by_iteration


class TestValidation:
    def test_rejects_non_stochastic_transitions(self):
        p = np.zeros((2, 1, 2))
        p[0, 0, 0] = 1.0
        p[1, 0, 0] = 0.5
        with pytest.raises(ValueError):
            Mdp(p, np.zeros((2, 1)), 0.9)

    @pytest.mark.parametrize("gamma", [0.0, 1.0, -0.1, 1.5])
    def test_rejects_discount_outside_unit_interval(self, gamma):
        with pytest.raises(ValueError):
            Mdp(np.ones((1, 1, 1)), np.zeros((1, 1)), gamma)

    def test_rejects_reward_shape(self):
        with pytest.raises(ShapeError):
            Mdp(np.ones((1, 1, 1)), np.zeros((2, 1)), 0.5)

    def test_policy_rows_must_sum_to_one(self):
        with pytest.raises(ValueError):
            Policy([[0.5, 0.4]])
        with pytest.raises(ValueError):
            Policy([[1.5, -0.5]])

    def test_policy_shape_mismatch(self, chain3):
        with pytest.raises(ShapeError):
            policy_kernel(chain3.mdp, Policy([[1.0], [1.0], [1.0]]))

    def test_arrays_are_frozen(self, chain3):
        with pytest.raises(ValueError):
            chain3.mdp.transitions[0, 0, 0] = 0.5


class TestPolicyKernel:
    def test_theta2theta_target(self, theta2theta):
        P = policy_kernel(theta2theta.mdp, theta2theta.target)
        np.testing.assert_array_equal(P, [[0, 1], [0, 1]])

    def test_deterministic_policy_selects_rows(self, chain3):
        for a in range(2):
            pol = Policy.deterministic([a, a, a], 2)
            np.testing.assert_array_equal(policy_kernel(chain3.mdp, pol), chain3.mdp.transitions[:, a, :])

    def test_chain3_behavior(self, chain3):
        P = policy_kernel(chain3.mdp, chain3.behavior)
        np.testing.assert_allclose(P, [[0.9, 0.1, 0], [0.5, 0, 0.5], [0, 0.1, 0.9]], atol=1e-15)


class TestPolicyReward:
    def test_constant_rewards(self, chain3):
        np.testing.assert_array_equal(policy_reward(chain3.mdp, chain3.behavior), [1, 1, 1])

    def test_zero_rewards(self, baird):
        np.testing.assert_array_equal(policy_reward(baird.mdp, baird.behavior), np.zeros(7))

    def test_hand_expansion(self):
        p = np.zeros((2, 2, 2))
        p[:, 0, 0] = 1.0
        p[:, 1, 1] = 1.0
        mdp = Mdp(p, [[0.0, 0.0], [2.0, 0.0]], 0.9)
        r = policy_reward(mdp, Policy([[1.0, 0.0], [0.5, 0.5]]))
        assert r[1] == 1.0


class TestStationaryDistribution:
    def test_doubly_stochastic(self):
        np.testing.assert_allclose(stationary_distribution([[0.5, 0.5], [0.5, 0.5]]), [0.5, 0.5], atol=1e-12)

    def test_chain3_behavior(self, chain3):
        d = stationary_distribution(policy_kernel(chain3.mdp, chain3.behavior))
        np.testing.assert_allclose(d, [5 / 11, 1 / 11, 5 / 11], atol=1e-12)

    def test_identity_rejected(self):
        with pytest.raises(ReducibilityError):
            stationary_distribution(np.eye(3))

    def test_transient_state_rejected(self):
        with pytest.raises(ReducibilityError):
            stationary_distribution([[0.5, 0.5], [0.0, 1.0]])

    def test_periodic_rejected(self):
        with pytest.raises(ConvergenceError):
            stationary_distribution([[0.0, 1.0], [1.0, 0.0]])

    def test_benchmark_behavior_chains_accepted(self, any_benchmark):
        b = any_benchmark
        P = policy_kernel(b.mdp, b.behavior)
        d = stationary_distribution(P)
        assert np.all(d > 0)
        np.testing.assert_allclose(d, stationary_by_solve(P), atol=1e-10)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_balance_and_normalization(self, seed):
        b = random_benchmark(np.random.default_rng(seed), max_states=6)
        P = policy_kernel(b.mdp, b.behavior)
        d = stationary_distribution(P)
        assert abs(d.sum() - 1) <= 1e-12
        assert np.abs(d @ P - d).max() <= 1e-10
        np.testing.assert_allclose(d, stationary_by_solve(P), atol=1e-10)


class TestExactValue:
    def test_chain3_constant_reward(self, chain3):
        np.testing.assert_allclose(exact_value(chain3.mdp, chain3.target), [10, 10, 10], atol=1e-12)

    def test_zero_rewards(self, theta2theta, baird):
        np.testing.assert_array_equal(exact_value(theta2theta.mdp, theta2theta.target), [0, 0])
        np.testing.assert_array_equal(exact_value(baird.mdp, baird.target), np.zeros(7))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_bellman_equation_and_value_iteration(self, seed):
        b = random_benchmark(np.random.default_rng(seed), max_states=6)
        v = exact_value(b.mdp, b.target)
        P, r = policy_kernel(b.mdp, b.target), policy_reward(b.mdp, b.target)
        assert np.abs(v - (r + b.mdp.discount * P @ v)).max() <= 1e-9
        # value iteration tolerance 1e-13 leaves error <= 1e-13 / (1 - gamma) <= 1e-11
        np.testing.assert_allclose(v, value_by_iteration(b.mdp, b.target), atol=1e-9)


class TestBellman:
    def test_fixed_point_at_zero_eta(self, chain3):
        v = exact_value(chain3.mdp, chain3.target)
        np.testing.assert_allclose(bellman_apply(chain3.mdp, chain3.target, v), v, atol=1e-12)

    def test_chain3_hand_arithmetic(self, chain3):
        out = bellman_apply(chain3.mdp, chain3.target, [10.0, 20.0, 10.0], 0.5)
        expected = [(1 + 0.9 * 20) / 1.5, (1 + 0.9 * 10) / 1.5, (1 + 0.9 * 20) / 1.5]
        np.testing.assert_allclose(out, expected, rtol=1e-14)
        np.testing.assert_allclose(out, [12.666666666666666, 6.666666666666667, 12.666666666666666])

    def test_pointwise_limit(self, chain3):
        v = np.array([3.0, -1.0, 7.0])
        base = bellman_apply(chain3.mdp, chain3.target, v)
        gaps = [np.abs(bellman_apply(chain3.mdp, chain3.target, v, eta) - base).max() for eta in (1e-1, 1e-3, 1e-6)]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 1e-4

    def test_negative_eta_rejected(self, chain3):
        with pytest.raises(ValueError):
            bellman_apply(chain3.mdp, chain3.target, np.zeros(3), -0.1)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.0, 10.0))
    def test_contraction(self, seed, eta):
        rng = np.random.default_rng(seed)
        b = random_benchmark(rng, max_states=6)
        for _ in range(5):
            v, w = rng.normal(scale=10, size=(2, b.mdp.num_states))
            lhs = np.abs(bellman_apply(b.mdp, b.target, v, eta) - bellman_apply(b.mdp, b.target, w, eta)).max()
            assert lhs <= b.mdp.discount / (1 + eta) * np.abs(v - w).max() + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 1.0))
def test_linear_in_policy(seed, lam):
    rng = np.random.default_rng(seed)
    b = random_benchmark(rng)
    mix = Policy(lam * b.target.probs + (1 - lam) * b.behavior.probs)
    for f in (policy_kernel, policy_reward):
        expected = lam * f(b.mdp, b.target) + (1 - lam) * f(b.mdp, b.behavior)
        np.testing.assert_allclose(f(b.mdp, mix), expected, atol=1e-12)

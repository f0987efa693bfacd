import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perturbed_td import (
    CoverageError,
    LearnerState,
    Policy,
    StepSchedule,
    TransitionSample,
    expected_system,
    importance_ratio,
    is_positive_definite,
    policy_kernel,
    stationary_distribution,
    step_etd,
    step_offpolicy_td,
    step_perturbed_td,
    step_tdc,
)
from perturbed_td.learners import sample_matrices, td_error

from conftest import random_benchmark
from oracles import expected_by_enumeration

LEFT, RIGHT = 0, 1
# theta -> 2 theta: state 0 to state 1 under "right", reward 0
RIGHT_0_TO_1 = TransitionSample(0, RIGHT, 0.0, 1)


def args(b):
    return b.features, b.target, b.behavior, b.mdp.discount


class TestImportanceRatio:
    def test_theta2theta(self, theta2theta):
        assert importance_ratio(theta2theta.target, theta2theta.behavior, 0, RIGHT) == 2.0
        assert importance_ratio(theta2theta.target, theta2theta.behavior, 0, LEFT) == 0.0

    def test_on_policy(self, chain3):
        for s in range(3):
            for a in range(2):
                if chain3.behavior.probs[s, a] > 0:
                    assert importance_ratio(chain3.behavior, chain3.behavior, s, a) == 1.0

    def test_baird(self, baird):
        assert importance_ratio(baird.target, baird.behavior, 3, 1) == pytest.approx(7.0, rel=1e-15)
        assert importance_ratio(baird.target, baird.behavior, 3, 0) == 0.0

    def test_coverage_violation(self):
        with pytest.raises(CoverageError):
            importance_ratio(Policy([[0.0, 1.0]]), Policy([[1.0, 0.0]]), 0, 1)


class TestHandArithmetic:
    def test_perturbed(self, theta2theta):
        s0 = LearnerState.initial("perturbed", [1.0])
        assert td_error(s0.theta, RIGHT_0_TO_1, theta2theta.features, 0.9, 1.0) == pytest.approx(-0.2, abs=1e-15)
        s1 = step_perturbed_td(s0, RIGHT_0_TO_1, *args(theta2theta), 1.0, 0.01)
        assert s1.theta[0] == pytest.approx(0.996, abs=1e-15)

    def test_offpolicy_td(self, theta2theta):
        s1 = step_offpolicy_td(LearnerState.initial("td0", [1.0]), RIGHT_0_TO_1, *args(theta2theta), 0.01)
        assert s1.theta[0] == pytest.approx(1.016, abs=1e-15)

    def test_etd_follow_on(self, theta2theta):
        s = LearnerState.initial("etd", [1.0])
        s = step_etd(s, RIGHT_0_TO_1, *args(theta2theta), 0.01)
        assert s.follow_on == 1.0
        s = step_etd(s, TransitionSample(1, RIGHT, 0.0, 1), *args(theta2theta), 0.01)
        assert s.follow_on == pytest.approx(2.8, abs=1e-15)

    def test_tdc(self, theta2theta):
        s1 = step_tdc(LearnerState.initial("tdc", [1.0]), RIGHT_0_TO_1, *args(theta2theta), 0.01, 0.01)
        assert s1.theta[0] == pytest.approx(1.016, abs=1e-15)
        assert s1.w[0] == pytest.approx(0.016, abs=1e-15)


class TestTrivialCases:
    def test_zero_ratio_is_noop(self, theta2theta):
        left = TransitionSample(0, LEFT, 0.0, 0)
        for algo, step, extra in [
            ("td0", step_offpolicy_td, ()),
            ("perturbed", step_perturbed_td, (1.0,)),
            ("tdc", step_tdc, None),
        ]:
            s0 = LearnerState.initial(algo, [1.0])
            tail = (0.01, 0.01) if extra is None else (*extra, 0.01)
            np.testing.assert_array_equal(step(s0, left, *args(theta2theta), *tail).theta, s0.theta)

    def test_eta_zero_matches_td0(self, chain3):
        rng = np.random.default_rng(0)
        for _ in range(20):
            theta = rng.normal(size=2)
            sample = TransitionSample(1, int(rng.integers(2)), 1.0, int(rng.integers(3)))
            a = step_perturbed_td(LearnerState(theta), sample, *args(chain3), 0.0, 0.1)
            b = step_offpolicy_td(LearnerState(theta), sample, *args(chain3), 0.1)
            np.testing.assert_array_equal(a.theta, b.theta)

    def test_negative_eta_rejected(self, chain3):
        with pytest.raises(ValueError):
            step_perturbed_td(LearnerState(np.zeros(2)), TransitionSample(0, 0, 1.0, 0), *args(chain3), -0.1, 0.1)

    def test_uncovered_sample_raises(self, chain3):
        behavior = Policy([[0.0, 1.0], [0.5, 0.5], [0.5, 0.5]])
        with pytest.raises(CoverageError):
            step_offpolicy_td(LearnerState(np.zeros(2)), TransitionSample(0, 0, 1.0, 0), chain3.features,
                              chain3.target, behavior, 0.9, 0.1)

    def test_etd_zero_ratios_keep_trace_at_one(self, theta2theta):
        s = LearnerState.initial("etd", [1.0])
        s = step_etd(s, TransitionSample(0, LEFT, 0.0, 0), *args(theta2theta), 0.01)
        for _ in range(5):
            s = step_etd(s, TransitionSample(0, LEFT, 0.0, 0), *args(theta2theta), 0.01)
            assert s.follow_on == 1.0

    def test_etd_on_policy_trace_limit(self, chain3):
        s = LearnerState.initial("etd", np.zeros(2))
        for _ in range(400):
            s = step_etd(s, TransitionSample(0, 0, 1.0, 0), chain3.features, chain3.behavior, chain3.behavior, 0.9, 0.01)
        assert s.follow_on == pytest.approx(10.0, rel=1e-12)

    def test_etd_overflow_flags_divergence(self, theta2theta):
        s = LearnerState(np.array([1.0]), follow_on=1e100, rho_prev=2.0)
        s = step_etd(s, RIGHT_0_TO_1, *args(theta2theta), 0.01)
        assert s.diverged

    def test_tdc_zero_w_matches_td0(self, chain3):
        rng = np.random.default_rng(1)
        for _ in range(20):
            theta = rng.normal(size=2)
            sample = TransitionSample(int(rng.integers(3)), 1, 1.0, int(rng.integers(3)))
            if chain3.behavior.probs[sample.state, 1] == 0:
                continue
            a = step_tdc(LearnerState(theta, w=np.zeros(2)), sample, *args(chain3), 0.1, 0.1)
            b = step_offpolicy_td(LearnerState(theta), sample, *args(chain3), 0.1)
            np.testing.assert_allclose(a.theta, b.theta, rtol=0, atol=1e-15)

    def test_tdc_full_noop(self, theta2theta):
        # theta = 0, reward 0: delta = 0 and w = 0
        s = step_tdc(LearnerState.initial("tdc", [0.0]), RIGHT_0_TO_1, *args(theta2theta), 0.01, 0.01)
        np.testing.assert_array_equal(s.theta, [0.0])
        np.testing.assert_array_equal(s.w, [0.0])

    def test_initial_state_extras(self):
        assert LearnerState.initial("tdc", [1.0, 2.0]).w.tolist() == [0.0, 0.0]
        e = LearnerState.initial("etd", [1.0])
        assert (e.follow_on, e.rho_prev, e.w) == (0.0, 1.0, None)
        with pytest.raises(ValueError):
            LearnerState.initial("gtd2", [1.0])


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 5.0), st.floats(1e-4, 0.5))
def test_sample_matrix_form_matches_step(seed, eta, alpha):
    rng = np.random.default_rng(seed)
    b = random_benchmark(rng)
    s = int(rng.integers(b.mdp.num_states))
    a = int(rng.integers(b.mdp.num_actions))
    sample = TransitionSample(s, a, float(b.mdp.rewards[s, a]), int(rng.integers(b.mdp.num_states)))
    theta = rng.normal(size=b.features.shape[1])
    stepped = step_perturbed_td(LearnerState(theta), sample, *args(b), eta, alpha).theta
    a_n, b_n = sample_matrices(sample, b.features, b.target, b.behavior, b.mdp.discount, eta)
    np.testing.assert_allclose(stepped, theta + alpha * (b_n - a_n @ theta), rtol=0, atol=1e-12)


class TestExpectation:
    @pytest.mark.parametrize("eta", [0.0, 0.5, 3.0])
    def test_benchmarks(self, any_benchmark, eta):
        b = any_benchmark
        d = stationary_distribution(policy_kernel(b.mdp, b.behavior))
        a_ref, b_ref = expected_by_enumeration(b, eta, d)
        s = expected_system(b.mdp, b.target, b.behavior, b.features, eta)
        np.testing.assert_allclose(s.a_matrix, a_ref, rtol=0, atol=1e-10)
        np.testing.assert_allclose(s.b_vector, b_ref, rtol=0, atol=1e-10)

    def test_random(self):
        rng = np.random.default_rng(2024)
        for _ in range(50):
            b = random_benchmark(rng)
            eta = float(rng.uniform(0, 3))
            d = stationary_distribution(policy_kernel(b.mdp, b.behavior))
            a_ref, b_ref = expected_by_enumeration(b, eta, d)
            s = expected_system(b.mdp, b.target, b.behavior, b.features, eta)
            np.testing.assert_allclose(s.a_matrix, a_ref, rtol=0, atol=1e-10)
            np.testing.assert_allclose(s.b_vector, b_ref, rtol=0, atol=1e-10)


class TestMeanIterationStability:
    @pytest.mark.parametrize("name,eta", [("theta2theta", 1.0), ("chain3", 0.5), ("chain3", 8.5)])
    def test_benchmarks(self, request, name, eta):
        b = request.getfixturevalue(name)
        s = expected_system(b.mdp, b.target, b.behavior, b.features, eta)
        assert is_positive_definite(s)[0]
        A = s.a_matrix
        # ||(I - aA)y||^2 = |y|^2 - a y^T(A+A^T)y + a^2 |Ay|^2 < |y|^2 below this bound
        limit = s.min_sym_eigenvalue / np.linalg.norm(A, 2) ** 2
        for frac in (0.01, 0.5, 0.99):
            step = np.eye(A.shape[0]) - frac * limit * A
            assert np.abs(np.linalg.eigvals(step)).max() < 1
            assert np.linalg.norm(step, 2) < 1

    def test_random(self):
        rng = np.random.default_rng(9)
        checked = 0
        for _ in range(100):
            b = random_benchmark(rng)
            s = expected_system(b.mdp, b.target, b.behavior, b.features, float(rng.uniform(0, 3)))
            if not is_positive_definite(s)[0]:
                continue
            checked += 1
            limit = s.min_sym_eigenvalue / np.linalg.norm(s.a_matrix, 2) ** 2
            step = np.eye(s.a_matrix.shape[0]) - 0.9 * limit * s.a_matrix
            assert np.abs(np.linalg.eigvals(step)).max() < 1
        assert checked > 20


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 10.0))
def test_td_error_scale_invariant(seed, c):
    rng = np.random.default_rng(seed)
    b = random_benchmark(rng)
    theta = rng.normal(size=b.features.shape[1])
    s, s2 = (int(x) for x in rng.integers(b.mdp.num_states, size=2))
    sample = TransitionSample(s, 0, float(b.mdp.rewards[s, 0]), s2)
    base = td_error(theta, sample, b.features, b.mdp.discount)
    scaled = td_error(theta / c, sample, c * b.features, b.mdp.discount)
    assert scaled == pytest.approx(base, rel=1e-12, abs=1e-12)


class TestStepSchedule:
    def test_constant(self):
        sched = StepSchedule("constant", 0.01)
        assert [sched(n) for n in (0, 1, 10**6)] == [0.01] * 3
        assert sched.decay == 0.0 and not sched.robbins_monro

    def test_polynomial_values(self):
        sched = StepSchedule("polynomial", 0.5, 1.0)
        assert sched(0) == 0.5 and sched(3) == 0.125

    @pytest.mark.parametrize("exponent,expected", [(0.5, False), (0.51, True), (0.75, True), (1.0, True), (0.3, False)])
    def test_robbins_monro(self, exponent, expected):
        assert StepSchedule("polynomial", 1.0, exponent).robbins_monro is expected

    @pytest.mark.parametrize("kind,alpha0,exponent", [("constant", 0.0, 0.0), ("constant", -1.0, 0.0),
                                                      ("polynomial", 1.0, 0.0), ("polynomial", 1.0, 1.5),
                                                      ("harmonic", 1.0, 1.0)])
    def test_invalid(self, kind, alpha0, exponent):
        with pytest.raises(ValueError):
            StepSchedule(kind, alpha0, exponent)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(1e-6, 10.0), st.floats(0.01, 1.0), st.integers(0, 10**9))
    def test_positive_and_nonincreasing(self, alpha0, exponent, n):
        sched = StepSchedule("polynomial", alpha0, exponent)
        assert 0 < sched(n + 1) <= sched(n) <= alpha0

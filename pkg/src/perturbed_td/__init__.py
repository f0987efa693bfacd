"""Perturbed off-policy TD(0) under linear function approximation.

Policy evaluation on finite MDPs: the perturbed learner and its baselines,
expected-update stability analysis, and the classic divergence benchmarks.
"""

from .analysis import (
    ExpectedSystem,
    eta_lower_bound,
    expected_system,
    fixed_point,
    fixed_point_consistency,
    is_positive_definite,
    min_sym_eigenvalue,
    perturbed_state_matrix,
)
from .benchmarks import Benchmark, build_baird, build_chain3, build_theta_2theta, get_benchmark
from .errors import (
    ConfigError,
    ConvergenceError,
    CoverageError,
    NumericError,
    PerturbedTDError,
    RankError,
    ReducibilityError,
    ShapeError,
)
from .experiments import RunConfig, RunLog, run_experiment, sample_transition
from .kernels import BACKEND
from .learners import (
    LearnerState,
    StepSchedule,
    TransitionSample,
    importance_ratio,
    sample_matrices,
    step_etd,
    step_offpolicy_td,
    step_perturbed_td,
    step_tdc,
)
from .linear import approx_value, project, weighted_rmse
from .mdp import (
    Mdp,
    Policy,
    bellman_apply,
    exact_value,
    policy_kernel,
    policy_reward,
    stationary_distribution,
)

__version__ = "0.1.0"

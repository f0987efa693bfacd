import numpy as np
import pytest

from perturbed_td import Mdp, Policy, build_baird, build_chain3, build_theta_2theta
from perturbed_td.benchmarks import Benchmark

ACCEPTANCE_LINES = []


def random_benchmark(rng, max_states=5, max_actions=3, full_rank=True, gamma=None):
    """Dense random MDP: every transition and behavior probability is positive,
    so the behavior chain is irreducible and aperiodic."""
    n_s = int(rng.integers(2, max_states + 1))
    n_a = int(rng.integers(1, max_actions + 1))
    p = rng.dirichlet(np.ones(n_s), size=(n_s, n_a))
    r = rng.normal(size=(n_s, n_a))
    if gamma is None:
        gamma = float(rng.uniform(0.1, 0.99))
    target = rng.dirichlet(np.ones(n_a), size=n_s)
    behavior = rng.dirichlet(np.ones(n_a), size=n_s)
    d = int(rng.integers(1, n_s + 1)) if full_rank else int(rng.integers(1, n_s + 3))
    while True:
        phi = rng.normal(size=(n_s, d))
        if not full_rank or np.linalg.matrix_rank(phi) == d and np.linalg.cond(phi) < 1e4:
            break
    return Benchmark("random", Mdp(p, r, gamma), Policy(target), Policy(behavior), phi, np.zeros(d))


@pytest.fixture
def theta2theta():
    return build_theta_2theta()


@pytest.fixture
def chain3():
    return build_chain3()


@pytest.fixture
def baird():
    return build_baird()


@pytest.fixture(params=["theta2theta", "baird", "chain3"])
def any_benchmark(request):
    return {"theta2theta": build_theta_2theta, "baird": build_baird, "chain3": build_chain3}[request.param]()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

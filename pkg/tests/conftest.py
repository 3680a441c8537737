import numpy as np
import pytest

from aoicontract import kernels
from aoicontract.config import ScenarioConfig
from aoicontract.economics import ProviderEconomics, WorkerType
from aoicontract.freshness import TimingParams

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance_report():
    def report(number, ok, detail):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
    return report


@pytest.fixture
def default_config():
    return ScenarioConfig()


@pytest.fixture
def econ():
    return ProviderEconomics()


@pytest.fixture
def timing():
    return TimingParams()


def make_types(gammas, q=None, alpha=0.5):
    n = len(gammas)
    q = [1.0 / n] * n if q is None else q
    alphas = [alpha] * n if np.isscalar(alpha) else alpha
    return [WorkerType(i + 1, float(g), float(p), float(a)) for i, (g, p, a) in enumerate(zip(gammas, q, alphas))]


@pytest.fixture
def default_types():
    return make_types(np.linspace(0.001, 0.01, 10))


@pytest.fixture(params=["numpy", "numba"])
def backend(request):
    if request.param == "numba" and kernels.NUMBA is None:
        pytest.skip("numba unavailable")
    previous = kernels.active().name
    kernels.use(request.param)
    yield request.param
    kernels.use(previous)


def random_scenario(rng, *, grid_points=400, shared_alpha=None):
    """Random population, economics and timing with a coarse frequency grid."""
    from aoicontract.solver import SolverParams

    n = int(rng.integers(1, 11))
    gammas = np.sort(rng.uniform(0.001, 0.01, n))
    q = rng.dirichlet(np.full(n, 0.7))
    q = np.maximum(q, 1e-3)
    q /= q.sum()
    q[-1] = 1.0 - float(np.sum(q[:-1]))
    if shared_alpha is None:
        shared_alpha = bool(rng.integers(0, 2))
    alpha = float(rng.uniform(0, 1)) if shared_alpha else list(rng.uniform(0, 1, n))
    types = make_types(gammas, q=list(q), alpha=alpha)
    econ = ProviderEconomics(beta=float(rng.uniform(5, 40)), K=float(rng.uniform(50, 300)),
                             H=float(rng.uniform(20, 100)), M=int(rng.integers(1, 50)))
    timing = TimingParams(t=float(rng.uniform(0.5, 3.0)), a=int(rng.integers(1, 16)))
    f_max = 1.0 / ((1 + timing.a) * timing.t)
    f_min = 1e-5
    params = SolverParams(f_min=f_min, f_max=f_max, phi=(f_max - f_min) / (grid_points - 1),
                          variant=["paper", "oracle"][int(rng.integers(0, 2))])
    return types, econ, timing, params

import os
import subprocess
import sys

import numpy as np
import pytest

from aoicontract import kernels
from aoicontract.economics import performance, ProviderEconomics
from aoicontract.freshness import TimingParams

needs_numba = pytest.mark.skipif(kernels.NUMBA is None, reason="numba unavailable")


def _grid(n=5000):
    return np.linspace(1e-5, 1 / 6, n)


@pytest.mark.parametrize("paper", [True, False])
@pytest.mark.parametrize("alpha", [0.0, 0.3, 1.0])
def test_satisfaction_grid_matches_direct_formula(backend, paper, alpha):
    f = _grid()
    G = kernels.satisfaction_grid(f, alpha, 20, 200, 50, 2, 2.0, paper)
    g = performance(f, alpha, ProviderEconomics(), TimingParams(), "paper" if paper else "oracle")
    expected = np.where(g > 0, 20 * np.log(np.where(g > 0, g, 1.0)), -np.inf)
    # near g = 1 the log is close to 0, so relative error alone is too strict
    np.testing.assert_allclose(G, expected, rtol=1e-12, atol=1e-12)
    assert np.array_equal(np.isneginf(G), g <= 0)


@needs_numba
@pytest.mark.parametrize("paper", [True, False])
def test_backends_agree(paper):
    rng = np.random.default_rng(3)
    f = _grid()
    G = np.vstack([kernels.NUMPY.satisfaction_grid(f, al, 20.0, 200.0, 50.0, 2.0, 2.0, paper)
                   for al in (0.0, 0.5, 1.0)])
    Gb = np.vstack([kernels.NUMBA.satisfaction_grid(f, al, 20.0, 200.0, 50.0, 2.0, 2.0, paper)
                    for al in (0.0, 0.5, 1.0)])
    np.testing.assert_allclose(Gb, G, rtol=1e-12, atol=1e-12)
    for _ in range(20):
        w = rng.uniform(0, 1, 3)
        cost = float(rng.uniform(0, 5000))
        i_np, v_np = kernels.NUMPY.weighted_argmax(G, w, f, cost, 20.0)
        i_nb, v_nb = kernels.NUMBA.weighted_argmax(G, w, f, cost, 20.0)
        assert i_np == i_nb
        assert v_nb == pytest.approx(v_np, rel=1e-12)


def test_weighted_argmax_ties_and_exclusion(backend):
    f = np.array([1.0, 2.0, 3.0, 4.0])
    G = np.array([[-np.inf, 5.0, 5.0, 5.0]])
    idx, val = kernels.weighted_argmax(G, [1.0], f, 0.0, 1.0)
    assert (idx, val) == (1, 5.0)
    idx, _ = kernels.weighted_argmax(np.full((2, 4), -np.inf), [0.5, 0.5], f, 1.0, 1.0)
    assert idx == -1


def test_use_rejects_unknown():
    with pytest.raises(ValueError):
        kernels.use("fortran")


@pytest.mark.parametrize("flag,expected", [("0", "numpy"), ("1", "numba")])
def test_env_flag_selects_backend(flag, expected):
    if expected == "numba" and kernels.NUMBA is None:
        pytest.skip("numba unavailable")
    env = dict(os.environ, AOICONTRACT_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", "from aoicontract import kernels; print(kernels.active().name)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == expected


def test_solver_same_menu_on_both_backends(default_types, econ, timing, backend):
    from aoicontract.solver import SolverParams, solve_ca

    res = solve_ca(default_types, econ, timing, SolverParams(phi=1e-5))
    kernels.use("numpy")
    ref = solve_ca(default_types, econ, timing, SolverParams(phi=1e-5))
    np.testing.assert_array_equal(res.f_star, ref.f_star)

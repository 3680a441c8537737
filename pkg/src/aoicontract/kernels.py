"""Grid kernels used by the contract solver.

Two interchangeable implementations live here: numba-compiled loops and a
vectorized numpy path.  The numba path is used when numba imports and the
environment variable ``AOICONTRACT_NUMBA`` is not set to ``0``; tests and the
benchmark can switch explicitly with :func:`use`.

Kernel contract
---------------
``satisfaction_grid(f, alpha, beta, K, H, a, t, paper)``
    ``beta * log(g)`` on every grid frequency, ``-inf`` where ``g <= 0``.
``weighted_argmax(G, weights, f, cost, scale)``
    First index maximizing ``scale * (weights @ G[:, z] - cost * f[z])``,
    skipping columns with any ``-inf``.  Returns ``(index, value)``; index is
    ``-1`` when every column is excluded.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .freshness import aoi_theta_oracle, aoi_theta_paper, latency_theta_oracle, latency_theta_paper

log = logging.getLogger(__name__)

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def _satisfaction_grid_np(f, alpha, beta, K, H, a, t, paper):
    theta = 1.0 / f
    if paper:
        aoi = aoi_theta_paper(theta, a, t)
        lat = latency_theta_paper(theta, a, t)
    else:
        aoi = aoi_theta_oracle(theta, a, t)
        lat = latency_theta_oracle(theta, a, t)
    g = alpha * (K - aoi) + (1.0 - alpha) * (H - lat)
    out = np.full(f.shape, -np.inf)
    ok = g > 0
    out[ok] = beta * np.log(g[ok])
    return out


def _weighted_argmax_np(G, weights, f, cost, scale):
    pooled = weights @ G if G.shape[0] > 1 else weights[0] * G[0]
    val = scale * (pooled - cost * f)
    val[~np.isfinite(pooled)] = -np.inf
    if val.size == 0:
        return -1, -np.inf
    idx = int(np.argmax(val))
    if val[idx] == -np.inf:
        return -1, -np.inf
    return idx, float(val[idx])


if HAVE_NUMBA:
    _lat_p = numba.njit(cache=True)(latency_theta_paper)
    _lat_o = numba.njit(cache=True)(latency_theta_oracle)
    _aoi_p = numba.njit(cache=True)(aoi_theta_paper)
    _aoi_o = numba.njit(cache=True)(aoi_theta_oracle)

    @numba.njit(cache=True)
    def _satisfaction_grid_nb(f, alpha, beta, K, H, a, t, paper):
        out = np.empty(f.shape[0])
        for z in range(f.shape[0]):
            theta = 1.0 / f[z]
            if paper:
                aoi = _aoi_p(theta, a, t)
                lat = _lat_p(theta, a, t)
            else:
                aoi = _aoi_o(theta, a, t)
                lat = _lat_o(theta, a, t)
            g = alpha * (K - aoi) + (1.0 - alpha) * (H - lat)
            out[z] = beta * np.log(g) if g > 0 else -np.inf
        return out

    @numba.njit(cache=True)
    def _weighted_argmax_nb(G, weights, f, cost, scale):
        best = -np.inf
        idx = -1
        for z in range(G.shape[1]):
            s = 0.0
            ok = True
            for k in range(G.shape[0]):
                v = G[k, z]
                if v == -np.inf:
                    ok = False
                    break
                s += weights[k] * v
            if not ok:
                continue
            val = scale * (s - cost * f[z])
            if val > best:
                best = val
                idx = z
        return idx, best


@dataclass(frozen=True)
class Backend:
    name: str
    satisfaction_grid: Callable
    weighted_argmax: Callable


NUMPY = Backend("numpy", _satisfaction_grid_np, _weighted_argmax_np)
NUMBA = Backend("numba", _satisfaction_grid_nb, _weighted_argmax_nb) if HAVE_NUMBA else None


def _default() -> Backend:
    flag = os.environ.get("AOICONTRACT_NUMBA", "1").strip().lower()
    if flag in ("0", "false", "no", "off") or NUMBA is None:
        return NUMPY
    return NUMBA


_active = _default()


def active() -> Backend:
    return _active


def use(name: str) -> Backend:
    """Select the kernel backend by name ("numba" or "numpy")."""
    global _active
    if name == "numpy":
        _active = NUMPY
    elif name == "numba":
        if NUMBA is None:
            raise RuntimeError("numba is not available")
        _active = NUMBA
    else:
        raise ValueError(f"unknown backend {name!r}")
    log.debug("kernel backend: %s", _active.name)
    return _active


def satisfaction_grid(f, alpha, beta, K, H, a, t, paper):
    f = np.ascontiguousarray(f, dtype=np.float64)
    return _active.satisfaction_grid(f, float(alpha), float(beta), float(K), float(H),
                                     float(a), float(t), bool(paper))


def weighted_argmax(G, weights, f, cost, scale):
    G = np.ascontiguousarray(np.atleast_2d(G), dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64).reshape(-1)
    f = np.ascontiguousarray(f, dtype=np.float64)
    idx, val = _active.weighted_argmax(G, weights, f, float(cost), float(scale))
    return int(idx), float(val)

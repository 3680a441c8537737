"""Service latency and age-of-information models for a cached-update worker.

A worker cycles through ``c`` collection periods and ``a`` idle periods, each
of length ``t``.  Requests arrive uniformly over the ``c + a`` periods.

Two families of closed forms are provided:

* ``Variant.PAPER``: the reference expressions exactly as printed (default).
* ``Variant.ORACLE``: expressions that agree with exhaustive enumeration of
  the arrival periods (see :func:`oracle_metrics`).

The latency form differs between the two for ``c >= 2`` (the printed
collection-phase term carries an extra factor ``c``) and the theta-form AoI
differs for every ``a`` (printed denominator ``theta - a t``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np


class DomainError(ValueError):
    """Raised when an argument is outside the model's domain."""


class Variant(str, enum.Enum):
    PAPER = "paper"
    ORACLE = "oracle"

    @classmethod
    def parse(cls, value: "Variant | str") -> "Variant":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"unknown variant {value!r}; expected 'paper' or 'oracle'") from None


@dataclass(frozen=True)
class TimingParams:
    """Period length ``t`` (seconds), idle periods ``a`` and collection bounds."""

    t: float = 2.0
    a: int = 2
    c_min: int = 1
    c_max: int = 15

    def __post_init__(self):
        if not (self.t > 0 and np.isfinite(self.t)):
            raise DomainError(f"t must be positive, got {self.t}")
        if int(self.a) != self.a or self.a < 1:
            raise DomainError(f"a must be a positive integer, got {self.a}")
        if int(self.c_min) != self.c_min or int(self.c_max) != self.c_max:
            raise DomainError("c_min and c_max must be integers")
        if not 1 <= self.c_min <= self.c_max:
            raise DomainError(f"need 1 <= c_min <= c_max, got {self.c_min}, {self.c_max}")

    @property
    def theta_floor(self) -> float:
        """Every admissible update cycle lies strictly above this value."""
        return self.a * self.t

    def with_a(self, a: int) -> "TimingParams":
        return TimingParams(t=self.t, a=a, c_min=self.c_min, c_max=self.c_max)


@dataclass(frozen=True)
class CycleMetrics:
    avg_latency: float
    avg_aoi: float
    theta: float


def _check_ca(c, a, t):
    if c < 1 or a < 1 or not t > 0:
        raise DomainError(f"need c >= 1, a >= 1, t > 0; got c={c}, a={a}, t={t}")


def _check_theta(theta, a, t):
    if not t > 0 or a < 1:
        raise DomainError(f"need a >= 1 and t > 0; got a={a}, t={t}")
    if np.any(np.asarray(theta) <= a * t):
        raise DomainError(f"update cycle must exceed a*t = {a * t}")


# Raw formulas.  These accept floats or numpy arrays and are also compiled by
# numba in ``aoicontract.kernels``; keep them free of Python-only constructs.

def latency_theta_paper(theta, a, t):
    u = theta - a * t
    return u ** 3 / (2.0 * t * theta) + 3.0 * u ** 2 / (2.0 * theta) + a * t * t / theta


def latency_theta_oracle(theta, a, t):
    u = theta - a * t
    return (u * (u + 3.0 * t) / 2.0 + a * t * t) / theta


def aoi_theta_paper(theta, a, t):
    u = theta - a * t
    return t * theta / u + (t * t / u) * ((a * a - a) / 2.0)


def aoi_theta_oracle(theta, a, t):
    return t + t * t * (a * a - a) / (2.0 * theta)


def update_cycle(c, a, t):
    """Update cycle length ``(c + a) t``."""
    _check_ca(c, a, t)
    return (c + a) * t


def avg_latency_ca(c, a, t, variant=Variant.PAPER):
    _check_ca(c, a, t)
    if Variant.parse(variant) is Variant.PAPER:
        return (c / (c + a)) * (c * t / 2.0) * (c + 3) + a * t / (c + a)
    return (c * t * (c + 3) / 2.0 + a * t) / (c + a)


def avg_aoi_ca(c, a, t, variant=Variant.PAPER):
    # Both variants share this form; only the theta rewrite differs.
    Variant.parse(variant)
    _check_ca(c, a, t)
    return (t / (c + a)) * (c + 1 + (a - 1) * (a + 2) / 2.0)


def avg_latency_theta(theta, a, t, variant=Variant.PAPER):
    _check_theta(theta, a, t)
    if Variant.parse(variant) is Variant.PAPER:
        return latency_theta_paper(theta, a, t)
    return latency_theta_oracle(theta, a, t)


def avg_aoi_theta(theta, a, t, variant=Variant.PAPER):
    _check_theta(theta, a, t)
    if Variant.parse(variant) is Variant.PAPER:
        return aoi_theta_paper(theta, a, t)
    return aoi_theta_oracle(theta, a, t)


def cycle_metrics(theta, timing: TimingParams, variant=Variant.PAPER) -> CycleMetrics:
    return CycleMetrics(
        avg_latency=float(avg_latency_theta(theta, timing.a, timing.t, variant)),
        avg_aoi=float(avg_aoi_theta(theta, timing.a, timing.t, variant)),
        theta=float(theta),
    )


def oracle_metrics(c: int, a: int, t: float) -> CycleMetrics:
    """Average latency and AoI by enumerating every arrival period in one cycle.

    Arrival in collection period ``z`` waits ``c t + t - (z - 1) t``; any other
    arrival waits ``t``.  AoI is ``t`` for periods ``1..c+1`` and
    ``(l - c) t`` for period ``l`` beyond that.  Period counts are summed as
    exact integers and divided once, so the result is the correctly rounded
    average.
    """
    if int(c) != c or int(a) != a:
        raise DomainError("oracle enumeration needs integer c and a")
    c, a = int(c), int(a)
    _check_ca(c, a, t)
    periods = c + a
    latency_units = 0
    aoi_units = 0
    for period in range(1, periods + 1):
        if period <= c:
            latency_units += c + 1 - (period - 1)
        else:
            latency_units += 1
        if period <= c + 1:
            aoi_units += 1
        else:
            aoi_units += period - c
    t_exact = Fraction(t)
    return CycleMetrics(
        avg_latency=float(t_exact * latency_units / periods),
        avg_aoi=float(t_exact * aoi_units / periods),
        theta=float(t_exact * periods),
    )


def convexity_probe(a, t, variant, theta_grid: Sequence[float], *, which=("latency", "aoi"),
                    tol: float = 1e-9) -> bool:
    """True iff second differences of the chosen curves are >= -tol on the grid.

    The grid may be non-uniform; the divided second difference is used.
    """
    grid = np.asarray(theta_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 3:
        raise DomainError("convexity probe needs at least 3 grid points")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("theta grid must be strictly increasing")
    _check_theta(grid, a, t)
    curves = []
    if "latency" in which:
        curves.append(avg_latency_theta(grid, a, t, variant))
    if "aoi" in which:
        curves.append(avg_aoi_theta(grid, a, t, variant))
    h = np.diff(grid)
    for y in curves:
        slope = np.diff(y) / h
        second = 2.0 * np.diff(slope) / (h[1:] + h[:-1])
        if np.any(second < -tol):
            return False
    return True

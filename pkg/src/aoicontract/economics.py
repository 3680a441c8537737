"""Worker types, contract items, utilities and constraint checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .freshness import TimingParams, Variant, avg_aoi_theta, avg_latency_theta, DomainError

TOL = 1e-9


class NonpositivePerformance(ArithmeticError):
    """The performance ``g`` is not positive, so its logarithm is undefined."""


@dataclass(frozen=True)
class WorkerType:
    index: int
    gamma: float
    q: float
    alpha: float = 0.5

    def __post_init__(self):
        if not self.gamma > 0:
            raise DomainError(f"type {self.index}: gamma must be positive, got {self.gamma}")
        if not 0 < self.q <= 1:
            raise DomainError(f"type {self.index}: probability must lie in (0, 1], got {self.q}")
        if not 0 <= self.alpha <= 1:
            raise DomainError(f"type {self.index}: alpha must lie in [0, 1], got {self.alpha}")


@dataclass(frozen=True)
class ContractItem:
    f: float
    r: float

    def __post_init__(self):
        if not self.f > 0:
            raise DomainError(f"contract frequency must be positive, got {self.f}")

    @property
    def theta(self) -> float:
        return 1.0 / self.f


@dataclass(frozen=True)
class Violation:
    kind: str  # "IC" or "IR"
    indices: tuple[int, ...]
    slack: float


@dataclass(frozen=True)
class ContractMenu:
    items: tuple[ContractItem, ...]
    feasible: bool | None = None
    violations: tuple[Violation, ...] = ()

    @classmethod
    def from_arrays(cls, f: Sequence[float], r: Sequence[float]) -> "ContractMenu":
        if len(f) != len(r):
            raise DomainError("frequency and reward vectors differ in length")
        return cls(tuple(ContractItem(float(fi), float(ri)) for fi, ri in zip(f, r)))

    @property
    def f(self) -> np.ndarray:
        return np.array([item.f for item in self.items])

    @property
    def r(self) -> np.ndarray:
        return np.array([item.r for item in self.items])

    def __len__(self):
        return len(self.items)


@dataclass(frozen=True)
class ProviderEconomics:
    beta: float = 20.0
    K: float = 200.0
    H: float = 50.0
    M: int = 20

    def __post_init__(self):
        if not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta}")
        # zero tolerances are allowed; they simply leave no feasible frequency
        if not (self.K >= 0 and self.H >= 0):
            raise DomainError(f"K and H must be nonnegative, got K={self.K}, H={self.H}")
        if int(self.M) != self.M or self.M < 1:
            raise DomainError(f"M must be a positive integer, got {self.M}")


def validate_population(types: Sequence[WorkerType]) -> None:
    if not types:
        raise DomainError("population is empty")
    gammas = [w.gamma for w in types]
    if any(g2 < g1 for g1, g2 in zip(gammas, gammas[1:])):
        raise DomainError("types must be sorted by nondecreasing gamma")
    total = math.fsum(w.q for w in types)
    if abs(total - 1.0) > 1e-12:
        raise DomainError(f"type probabilities sum to {total!r}, not 1")


def worker_utility(item: ContractItem, wtype: WorkerType) -> float:
    return item.r - item.f / wtype.gamma


def performance(f, alpha, econ: ProviderEconomics, timing: TimingParams, variant=Variant.PAPER):
    """Weighted freshness margin ``alpha (K - AoI) + (1 - alpha) (H - latency)``."""
    theta = 1.0 / np.asarray(f, dtype=float)
    aoi = avg_aoi_theta(theta, timing.a, timing.t, variant)
    latency = avg_latency_theta(theta, timing.a, timing.t, variant)
    g = alpha * (econ.K - aoi) + (1.0 - alpha) * (econ.H - latency)
    return g if np.ndim(g) else float(g)


def satisfaction(f: float, wtype: WorkerType, econ: ProviderEconomics, timing: TimingParams,
                 variant=Variant.PAPER) -> float:
    g = performance(f, wtype.alpha, econ, timing, variant)
    if not g > 0:
        raise NonpositivePerformance(f"performance g={g!r} at f={f!r} for type {wtype.index}")
    return econ.beta * math.log(g)


def provider_utility(menu: ContractMenu, types: Sequence[WorkerType], econ: ProviderEconomics,
                     timing: TimingParams, variant=Variant.PAPER) -> float:
    if len(menu) != len(types):
        raise DomainError(f"menu has {len(menu)} items for {len(types)} types")
    return math.fsum(
        econ.M * w.q * (satisfaction(item.f, w, econ, timing, variant) - item.r)
        for item, w in zip(menu.items, types)
    )


def verify_ic_ir(menu: ContractMenu, types: Sequence[WorkerType], tol: float = TOL) -> ContractMenu:
    """Check every IC and IR inequality and return the menu with its certificate."""
    n = len(types)
    if len(menu) != n or n < 1:
        raise DomainError(f"menu has {len(menu)} items for {n} types")
    f, r = menu.f, menu.r
    gamma = np.array([w.gamma for w in types])
    # table[i, j]: utility of type i taking item j
    table = r[None, :] - f[None, :] / gamma[:, None]
    violations = []
    for i in range(n):
        own = table[i, i]
        if own < -tol:
            violations.append(Violation("IR", (i + 1,), float(own)))
        for j in range(n):
            if j != i and own - table[i, j] < -tol:
                violations.append(Violation("IC", (i + 1, j + 1), float(own - table[i, j])))
    return replace(menu, feasible=not violations, violations=tuple(violations))


@dataclass(frozen=True)
class Lemma1Check:
    ir_lowest: bool
    monotone: bool
    ldic: bool
    luic: bool

    def all(self) -> bool:
        return self.ir_lowest and self.monotone and self.ldic and self.luic


def check_lemma1(menu: ContractMenu, types: Sequence[WorkerType], tol: float = TOL) -> Lemma1Check:
    """Evaluate the four reduced conditions: IR of type 1, monotonicity, LDIC, LUIC."""
    f, r = menu.f, menu.r
    gamma = np.array([w.gamma for w in types])
    ir_lowest = r[0] - f[0] / gamma[0] >= -tol
    monotone = bool(np.all(np.diff(r) >= -tol) and np.all(np.diff(f) >= -tol))
    own = r - f / gamma
    # LDIC: type n against item n-1; LUIC: type n against item n+1
    down = r[:-1] - f[:-1] / gamma[1:]
    up = r[1:] - f[1:] / gamma[:-1]
    ldic = bool(np.all(own[1:] - down >= -tol))
    luic = bool(np.all(own[:-1] - up >= -tol))
    return Lemma1Check(bool(ir_lowest), monotone, ldic, luic)


def reduced_coefficients(types: Sequence[WorkerType]) -> np.ndarray:
    """Per-type marginal cost ``b_n`` of frequency once rewards are substituted."""
    gamma = np.array([w.gamma for w in types], dtype=float)
    q = np.array([w.q for w in types], dtype=float)
    inv = 1.0 / gamma
    # mass strictly above each type
    tail = np.concatenate([np.cumsum(q[::-1])[::-1][1:], [0.0]])
    b = q * inv
    b[:-1] += (inv[:-1] - inv[1:]) * tail[:-1]
    return b


def reduced_provider_utility(f: Sequence[float], types: Sequence[WorkerType], econ: ProviderEconomics,
                             timing: TimingParams, variant=Variant.PAPER) -> float:
    f = np.asarray(f, dtype=float)
    if np.any(np.diff(f) < 0):
        raise DomainError("frequencies must be nondecreasing in type")
    b = reduced_coefficients(types)
    return math.fsum(
        econ.M * (w.q * satisfaction(fn, w, econ, timing, variant) - bn * fn)
        for fn, w, bn in zip(f, types, b)
    )


def welfare(menu: ContractMenu, types: Sequence[WorkerType], econ: ProviderEconomics,
            timing: TimingParams, variant=Variant.PAPER) -> float:
    """Provider utility plus population-weighted worker utility; rewards cancel."""
    workers = math.fsum(econ.M * w.q * worker_utility(item, w) for item, w in zip(menu.items, types))
    return provider_utility(menu, types, econ, timing, variant) + workers

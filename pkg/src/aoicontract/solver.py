"""Optimal contract design by grid search, ironing and closed-form rewards.

Three mechanisms are supported:

``CA``  asymmetric information.  Each type's frequency maximizes
        ``M (Q_n G_n(f) - b_n f)`` on the grid; a non-monotone result is
        repaired by bunching and ironing; rewards follow the binding-LDIC
        recursion.
``CC``  complete information.  Each type's frequency maximizes
        ``M Q_n (G_n(f) - f / gamma_n)`` and the reward equals the cost.
``CS``  social welfare under asymmetric information.  Welfare-maximizing
        frequencies, ironed on the welfare objective, paid with the same
        reward recursion as CA so IC and IR hold.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .economics import (
    ContractMenu,
    ProviderEconomics,
    WorkerType,
    provider_utility,
    reduced_coefficients,
    validate_population,
    verify_ic_ir,
    welfare,
)
from .freshness import DomainError, TimingParams, Variant

log = logging.getLogger(__name__)


class Infeasible(RuntimeError):
    """No grid frequency gives a positive performance for some type or bunch."""


class Mechanism(str, enum.Enum):
    CA = "CA"
    CC = "CC"
    CS = "CS"


@dataclass(frozen=True)
class SolverParams:
    f_min: float = 1e-5
    f_max: float | None = None
    phi: float = 1e-6
    variant: Variant = Variant.PAPER

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        if not self.phi > 0:
            raise DomainError(f"grid step phi must be positive, got {self.phi}")
        if not self.f_min > 0:
            raise DomainError(f"f_min must be positive, got {self.f_min}")

    def resolve(self, timing: TimingParams) -> "SolverParams":
        """Fill in ``f_max`` from the timing (shortest cycle, ``c = c_min``) and validate."""
        f_max = self.f_max
        if f_max is None:
            f_max = 1.0 / ((timing.c_min + timing.a) * timing.t)
        if not f_max < 1.0 / timing.theta_floor:
            raise DomainError(f"f_max={f_max} must stay below 1/(a t) = {1.0 / timing.theta_floor}")
        if not self.f_min <= f_max:
            raise DomainError(f"need f_min <= f_max, got {self.f_min} > {f_max}")
        return SolverParams(self.f_min, f_max, self.phi, self.variant)


def grid_size(f_min: float, f_max: float, phi: float) -> int:
    return int(math.floor((f_max - f_min) / phi + 1e-9)) + 1


def frequency_grid(params: SolverParams) -> np.ndarray:
    """``f_min + z * phi`` for every ``z`` with the point not beyond ``f_max``."""
    n = grid_size(params.f_min, params.f_max, params.phi)
    return params.f_min + np.arange(n, dtype=np.float64) * params.phi


def complexity_report(f_min: float, f_max: float, phi: float, n_types: int = 1) -> dict:
    """Grid points scanned per type and in total.

    The scan is linear in the grid size.  ``claimed_bound`` is the
    ``N log2((f_max - f_min) / phi)`` figure sometimes quoted for this search,
    reported only for comparison.
    """
    points = grid_size(f_min, f_max, phi)
    span = (f_max - f_min) / phi
    return {
        "grid_points_per_type": points,
        "total_evaluations": n_types * points,
        "claimed_bound": n_types * math.log2(span) if span > 1 else float(n_types),
    }


class GridProblem:
    """Frequency grid plus satisfaction curves cached per preference value."""

    def __init__(self, types: Sequence[WorkerType], econ: ProviderEconomics, timing: TimingParams,
                 params: SolverParams):
        validate_population(types)
        self.types = list(types)
        self.econ = econ
        self.timing = timing
        self.params = params.resolve(timing)
        self.f = frequency_grid(self.params)
        self.q = np.array([w.q for w in self.types])
        self.gamma = np.array([w.gamma for w in self.types])
        self.b = reduced_coefficients(self.types)
        self._curves: dict[float, np.ndarray] = {}

    def curve(self, alpha: float) -> np.ndarray:
        G = self._curves.get(alpha)
        if G is None:
            e, tm = self.econ, self.timing
            G = kernels.satisfaction_grid(self.f, alpha, e.beta, e.K, e.H, tm.a, tm.t,
                                          self.params.variant is Variant.PAPER)
            self._curves[alpha] = G
        return G

    def costs(self, mechanism: Mechanism) -> np.ndarray:
        if mechanism is Mechanism.CA:
            return self.b
        return self.q / self.gamma

    def pooled_argmax(self, members: Sequence[int], costs: np.ndarray) -> int:
        """Grid index maximizing the summed objective of the given 0-based types."""
        by_alpha: dict[float, float] = {}
        for n in members:
            a = self.types[n].alpha
            by_alpha[a] = by_alpha.get(a, 0.0) + self.q[n]
        alphas = sorted(by_alpha)
        G = np.vstack([self.curve(a) for a in alphas])
        weights = np.array([by_alpha[a] for a in alphas])
        cost = math.fsum(costs[n] for n in members)
        idx, _ = kernels.weighted_argmax(G, weights, self.f, cost, self.econ.M)
        if idx < 0:
            label = ", ".join(str(self.types[n].index) for n in members)
            raise Infeasible(f"no grid frequency gives positive performance for type(s) {label}")
        return idx

    def index_of(self, f: float) -> int:
        z = int(round((f - self.params.f_min) / self.params.phi))
        if not 0 <= z < self.f.size or not math.isclose(self.f[z], f, rel_tol=1e-9, abs_tol=1e-15):
            raise DomainError(f"frequency {f!r} is not a grid point")
        return z


def _iron_indices(problem: GridProblem, raw: Sequence[int], costs: np.ndarray):
    """Pool adjacent violators on grid indices.

    Each block keeps the pooled argmax of its members; a block whose argmax
    lies below its left neighbour's is merged into it and re-optimized.
    """
    blocks: list[list] = []  # [start, end (exclusive), grid index]
    for n, z in enumerate(raw):
        cur = [n, n + 1, z]
        while blocks and blocks[-1][2] > cur[2]:
            prev = blocks.pop()
            members = range(prev[0], cur[1])
            cur = [prev[0], cur[1], problem.pooled_argmax(members, costs)]
        blocks.append(cur)
    out = np.empty(len(raw), dtype=np.int64)
    groups = []
    for start, end, z in blocks:
        out[start:end] = z
        if end - start > 1:
            groups.append((start + 1, end))
    return out, groups


def per_type_grid_argmax(n: int, types: Sequence[WorkerType], econ: ProviderEconomics,
                         timing: TimingParams, params: SolverParams, *,
                         mechanism: Mechanism = Mechanism.CA, problem: GridProblem | None = None) -> float:
    """Best grid frequency for the ``n``-th type (1-based), smallest on ties."""
    problem = problem or GridProblem(types, econ, timing, params)
    z = problem.pooled_argmax([n - 1], problem.costs(Mechanism(mechanism)))
    return float(problem.f[z])


def iron_monotone(f_raw: Sequence[float], types: Sequence[WorkerType], econ: ProviderEconomics,
                  timing: TimingParams, params: SolverParams, *,
                  mechanism: Mechanism = Mechanism.CA, problem: GridProblem | None = None):
    """Make per-type frequencies nondecreasing by bunching and ironing.

    Returns ``(f, groups)`` where ``groups`` lists the pooled type ranges as
    1-based inclusive ``(first, last)`` pairs.
    """
    f_raw = np.asarray(f_raw, dtype=float)
    if np.all(np.diff(f_raw) >= 0):
        return f_raw.copy(), []
    problem = problem or GridProblem(types, econ, timing, params)
    raw = [problem.index_of(x) for x in f_raw]
    idx, groups = _iron_indices(problem, raw, problem.costs(Mechanism(mechanism)))
    return problem.f[idx], groups


def optimal_rewards(f: Sequence[float], types: Sequence[WorkerType]) -> np.ndarray:
    """Rewards that bind IR for type 1 and every local downward IC constraint."""
    f = np.asarray(f, dtype=float)
    gamma = np.array([w.gamma for w in types], dtype=float)
    if f.size != gamma.size:
        raise DomainError("frequency vector and type list differ in length")
    if np.any(np.diff(f) < 0):
        raise DomainError("rewards are defined for nondecreasing frequencies only")
    r = np.empty_like(f)
    r[0] = f[0] / gamma[0]
    for n in range(1, f.size):
        r[n] = r[n - 1] + f[n] / gamma[n] - f[n - 1] / gamma[n]
    return r


@dataclass
class SolveResult:
    mechanism: Mechanism
    menu: ContractMenu
    f_star: np.ndarray
    r_star: np.ndarray
    provider_utility: float
    worker_utilities: np.ndarray
    ironed_groups: list = field(default_factory=list)
    f_raw: np.ndarray | None = None
    welfare: float = float("nan")
    timing: TimingParams | None = None

    def cycles(self) -> np.ndarray:
        """Implied number of collection periods ``1 / (f t) - a`` (continuous)."""
        return 1.0 / (self.f_star * self.timing.t) - self.timing.a

    def to_dict(self) -> dict:
        cycles = self.cycles()
        return {
            "mechanism": self.mechanism.value,
            "feasible": bool(self.menu.feasible),
            "violations": [
                {"kind": v.kind, "indices": list(v.indices), "slack": v.slack}
                for v in self.menu.violations
            ],
            "f_star": self.f_star.tolist(),
            "r_star": self.r_star.tolist(),
            "theta": (1.0 / self.f_star).tolist(),
            "cycles_raw": cycles.tolist(),
            "cycles_rounded": [int(x) for x in np.rint(cycles)],
            "f_raw": None if self.f_raw is None else self.f_raw.tolist(),
            "provider_utility": self.provider_utility,
            "welfare": self.welfare,
            "worker_utilities": self.worker_utilities.tolist(),
            "ironed_groups": [list(g) for g in self.ironed_groups],
        }


def _finish(mechanism, problem: GridProblem, idx, raw, groups, rewards=None) -> SolveResult:
    f = problem.f[idx]
    r = optimal_rewards(f, problem.types) if rewards is None else rewards(f)
    args = (problem.types, problem.econ, problem.timing, problem.params.variant)
    menu = verify_ic_ir(ContractMenu.from_arrays(f, r), problem.types)
    return SolveResult(
        mechanism=mechanism,
        menu=menu,
        f_star=f,
        r_star=r,
        provider_utility=provider_utility(menu, *args),
        worker_utilities=r - f / problem.gamma,
        ironed_groups=groups,
        f_raw=problem.f[np.asarray(raw)],
        welfare=welfare(menu, *args),
        timing=problem.timing,
    )


def solve_problem(mechanism: Mechanism | str, problem: GridProblem) -> SolveResult:
    mechanism = Mechanism(mechanism)
    costs = problem.costs(mechanism)
    raw = [problem.pooled_argmax([n], costs) for n in range(len(problem.types))]
    if mechanism is Mechanism.CC:
        return _finish(mechanism, problem, raw, raw, [], rewards=lambda f: f / problem.gamma)
    idx, groups = _iron_indices(problem, raw, costs)
    if groups:
        log.debug("%s: ironed groups %s", mechanism.value, groups)
    return _finish(mechanism, problem, idx, raw, groups)


def solve(mechanism, types, econ, timing, params) -> SolveResult:
    return solve_problem(mechanism, GridProblem(types, econ, timing, params))


def solve_ca(types, econ, timing, params) -> SolveResult:
    return solve(Mechanism.CA, types, econ, timing, params)


def solve_cc(types, econ, timing, params) -> SolveResult:
    return solve(Mechanism.CC, types, econ, timing, params)


def solve_cs(types, econ, timing, params) -> SolveResult:
    return solve(Mechanism.CS, types, econ, timing, params)

"""Age-of-information contract incentives for federated learning workers."""

from .economics import (
    ContractItem,
    ContractMenu,
    NonpositivePerformance,
    ProviderEconomics,
    WorkerType,
    check_lemma1,
    provider_utility,
    reduced_coefficients,
    reduced_provider_utility,
    satisfaction,
    verify_ic_ir,
    worker_utility,
)
from .freshness import CycleMetrics, DomainError, TimingParams, Variant, oracle_metrics
from .solver import (
    Infeasible,
    Mechanism,
    SolveResult,
    SolverParams,
    iron_monotone,
    optimal_rewards,
    per_type_grid_argmax,
    solve_ca,
    solve_cc,
    solve_cs,
)

__version__ = "0.1.0"

__all__ = [
    "ContractItem",
    "ContractMenu",
    "NonpositivePerformance",
    "ProviderEconomics",
    "WorkerType",
    "check_lemma1",
    "provider_utility",
    "reduced_coefficients",
    "reduced_provider_utility",
    "satisfaction",
    "verify_ic_ir",
    "worker_utility",
    "CycleMetrics",
    "DomainError",
    "TimingParams",
    "Variant",
    "oracle_metrics",
    "Infeasible",
    "Mechanism",
    "SolveResult",
    "SolverParams",
    "iron_monotone",
    "optimal_rewards",
    "per_type_grid_argmax",
    "solve_ca",
    "solve_cc",
    "solve_cs",
]

"""Scenario construction, parameter sweeps and mechanism comparison."""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import ConfigError, ScenarioConfig
from .economics import WorkerType, verify_ic_ir, ContractMenu
from .solver import GridProblem, Infeasible, Mechanism, SolveResult, SolverParams, solve_problem

log = logging.getLogger(__name__)

MECHANISMS = (Mechanism.CA, Mechanism.CC, Mechanism.CS)


def fmt(x) -> str:
    """CSV number formatting: 12 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".12g")


def write_csv(path, header: Sequence[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def build_population(config: ScenarioConfig, alpha: float | None = None) -> list[WorkerType]:
    """Worker types sorted by ``gamma``, equally likely.

    ``grid`` spaces ``gamma`` evenly over the range (endpoints included);
    ``sampled`` draws ``N`` uniform values from the scenario seed and sorts them.
    A non-None ``alpha`` overrides every type's preference.
    """
    pop = config.population
    if not 0 < pop.gamma_min <= pop.gamma_max:
        raise ConfigError("population: need 0 < gamma_min <= gamma_max")
    n = pop.N
    if pop.distribution == "grid":
        gammas = np.linspace(pop.gamma_min, pop.gamma_max, n) if n > 1 else np.array([pop.gamma_min])
    else:
        rng = np.random.default_rng(config.seed)
        gammas = np.sort(rng.uniform(pop.gamma_min, pop.gamma_max, n))
    if alpha is not None:
        alphas = [alpha] * n
    elif pop.alpha is not None:
        alphas = list(pop.alpha)
    else:
        alphas = [config.provider.alpha] * n
    q = 1.0 / n
    return [WorkerType(i + 1, float(g), q, float(al)) for i, (g, al) in enumerate(zip(gammas, alphas))]


def scenario_problem(config: ScenarioConfig, *, a: int | None = None, alpha: float | None = None) -> GridProblem:
    timing = config.timing_params()
    params = config.solver_params()
    if a is not None:
        timing = timing.with_a(a)
        # the admissible frequency range follows the idle duration
        params = SolverParams(params.f_min, None, params.phi, params.variant)
    return GridProblem(build_population(config, alpha), config.economics(), timing, params)


def solve_config(config: ScenarioConfig, mechanism: str | None = None) -> SolveResult:
    return solve_problem(mechanism or config.mechanism, scenario_problem(config))


def choice_matrix(config: ScenarioConfig) -> np.ndarray:
    """Entry ``(i, j)``: utility of type ``i`` when it picks item ``j`` of the CA menu."""
    problem = scenario_problem(config)
    res = solve_problem(Mechanism.CA, problem)
    return res.r_star[None, :] - res.f_star[None, :] / problem.gamma[:, None]


def expected_worker_utility(res: SolveResult, types: Sequence[WorkerType]) -> float:
    return math.fsum(w.q * u for w, u in zip(types, res.worker_utilities))


@dataclass
class SweepResult:
    axis: str
    values: list
    results: list[dict] = field(default_factory=list)  # mechanism -> SolveResult or None per value
    errors: list[dict] = field(default_factory=list)
    types: list[list[WorkerType]] = field(default_factory=list)

    def feasible_rows(self):
        for v, res in zip(self.values, self.results):
            if all(r is not None for r in res.values()):
                yield v, res


def _solve_all(problem: GridProblem, mechanisms) -> tuple[dict, dict]:
    out, errs = {}, {}
    for m in mechanisms:
        try:
            out[m] = solve_problem(m, problem)
        except Infeasible as err:
            out[m] = None
            errs[m] = str(err)
    return out, errs


def sweep_duration(config: ScenarioConfig, a_values: Sequence[int] | None = None) -> SweepResult:
    a_values = list(config.sweep.a_values if a_values is None else a_values)
    sweep = SweepResult("a", a_values)
    for a in a_values:
        problem = scenario_problem(config, a=a)
        res, errs = _solve_all(problem, MECHANISMS)
        if errs:
            log.warning("a=%s: infeasible for %s", a, ", ".join(m.value for m in errs))
        sweep.results.append(res)
        sweep.errors.append(errs)
        sweep.types.append(problem.types)
    return sweep


def sweep_alpha(config: ScenarioConfig, alpha_values: Sequence[float] | None = None) -> SweepResult:
    alpha_values = list(config.sweep.alpha_values if alpha_values is None else alpha_values)
    if any(not 0 <= x <= 1 for x in alpha_values):
        raise ConfigError("alpha values must lie in [0, 1]")
    sweep = SweepResult("alpha", alpha_values)
    for alpha in alpha_values:
        problem = scenario_problem(config, alpha=alpha)
        res, errs = _solve_all(problem, (Mechanism.CA,))
        sweep.results.append(res)
        sweep.errors.append(errs)
        sweep.types.append(problem.types)
    return sweep


@dataclass
class CompareRow:
    mechanism: Mechanism
    provider_utility: float
    welfare: float
    mean_worker_utility: float
    min_worker_utility: float
    max_worker_utility: float
    feasible: bool
    wall_time: float
    result: SolveResult | None = None


def compare_mechanisms(config: ScenarioConfig) -> list[CompareRow]:
    problem = scenario_problem(config)
    # evaluate the satisfaction curves once so timings compare the mechanisms only
    for w in problem.types:
        problem.curve(w.alpha)
    rows = []
    for m in MECHANISMS:
        start = time.perf_counter()
        res = solve_problem(m, problem)
        elapsed = time.perf_counter() - start
        u = res.worker_utilities
        rows.append(CompareRow(m, res.provider_utility, res.welfare, expected_worker_utility(res, problem.types),
                               float(u.min()), float(u.max()), bool(res.menu.feasible), elapsed, res))
    return rows


def load_menu(path) -> ContractMenu:
    """Read a menu from a solve JSON file (``f_star`` and ``r_star`` arrays)."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return ContractMenu.from_arrays(data["f_star"], data["r_star"])
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as err:
        raise ConfigError(f"cannot read menu from {path}: {err}") from None


def reverify(path, types: Sequence[WorkerType]) -> ContractMenu:
    return verify_ic_ir(load_menu(path), types)


# --- writers --------------------------------------------------------------

def write_choice_matrix(path, table: np.ndarray) -> None:
    n = table.shape[0]
    write_csv(path, ("worker_type", "item_index", "utility"),
              ((i + 1, j + 1, table[i, j]) for i in range(n) for j in range(n)))


def write_sweep_a(path, sweep: SweepResult) -> None:
    rows = []
    for a, res, types in zip(sweep.values, sweep.results, sweep.types):
        row = [a]
        row += [res[m].provider_utility if res[m] is not None else float("nan") for m in MECHANISMS]
        row += [expected_worker_utility(res[m], types) if res[m] is not None else float("nan") for m in MECHANISMS]
        rows.append(row)
    write_csv(path, ("a", "us_ca", "us_cc", "us_cs", "mean_uw_ca", "mean_uw_cc", "mean_uw_cs"), rows)


def write_sweep_alpha(path, sweep: SweepResult) -> None:
    rows = []
    for alpha, res in zip(sweep.values, sweep.results):
        r = res[Mechanism.CA]
        if r is None:
            rows.append([alpha, "", *(["nan"] * 6)])
            continue
        cycles = r.cycles()
        for n in range(r.f_star.size):
            rows.append([alpha, n + 1, r.f_star[n], cycles[n], int(np.rint(cycles[n])), r.r_star[n],
                         r.worker_utilities[n], r.provider_utility])
    write_csv(path, ("alpha", "type", "f_star", "cycles_raw", "cycles_rounded", "reward",
                     "worker_utility", "provider_utility"), rows)


def write_compare(path, rows: Sequence[CompareRow]) -> None:
    write_csv(path, ("mechanism", "provider_utility", "welfare", "mean_worker_utility",
                     "min_worker_utility", "max_worker_utility", "feasible"),
              ((r.mechanism.value, r.provider_utility, r.welfare, r.mean_worker_utility,
                r.min_worker_utility, r.max_worker_utility, r.feasible) for r in rows))

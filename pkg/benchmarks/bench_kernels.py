"""Time the numba and numpy kernel backends on the default frequency grid.

    python3 benchmarks/bench_kernels.py [--repeat 20]
"""

import argparse
import timeit

import numpy as np

from aoicontract import kernels
from aoicontract.config import ScenarioConfig
from aoicontract.experiments import build_population
from aoicontract.solver import SolverParams, frequency_grid, solve_ca


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args()

    cfg = ScenarioConfig()
    timing, econ = cfg.timing_params(), cfg.economics()
    params = cfg.solver_params().resolve(timing)
    f = frequency_grid(params)
    types = build_population(cfg)
    weights = np.full(3, 1 / 3)

    backends = ["numpy"] + (["numba"] if kernels.NUMBA is not None else [])
    print(f"grid points: {f.size}, repeats: {args.repeat}")
    print(f"{'backend':8} {'satisfaction_grid':>18} {'weighted_argmax':>16} {'solve_ca':>10}  (ms, best of)")
    for name in backends:
        kernels.use(name)
        G = np.vstack([kernels.satisfaction_grid(f, al, econ.beta, econ.K, econ.H, timing.a, timing.t, True)
                       for al in (0.2, 0.5, 0.8)])
        kernels.weighted_argmax(G, weights, f, 100.0, 1.0)  # compile
        solve_ca(types, econ, timing, SolverParams())
        t_sat = min(timeit.repeat(
            lambda: kernels.satisfaction_grid(f, 0.5, econ.beta, econ.K, econ.H, timing.a, timing.t, True),
            number=1, repeat=args.repeat))
        t_arg = min(timeit.repeat(lambda: kernels.weighted_argmax(G, weights, f, 100.0, 1.0),
                                  number=1, repeat=args.repeat))
        t_solve = min(timeit.repeat(lambda: solve_ca(types, econ, timing, SolverParams()),
                                    number=1, repeat=max(3, args.repeat // 4)))
        print(f"{name:8} {1e3 * t_sat:18.3f} {1e3 * t_arg:16.3f} {1e3 * t_solve:10.2f}")


if __name__ == "__main__":
    main()

"""Command-line entry point.

Exit codes: 0 success, 1 configuration or validation error, 2 infeasible
scenario, 3 internal numeric failure.  Diagnostics go to standard error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path


from . import experiments as ex
from . import flsim
from .config import ConfigError, ScenarioConfig, load_config
from .economics import NonpositivePerformance
from .freshness import DomainError
from .solver import Infeasible

log = logging.getLogger("aoicontract")

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_NUMERIC = 0, 1, 2, 3

COMMANDS = ("solve", "verify", "choice-matrix", "sweep-a", "sweep-alpha", "compare", "simulate-timing")


def _cmd_solve(cfg: ScenarioConfig, out: Path, args) -> int:
    res = ex.solve_config(cfg)
    ex.write_json(out / "solve.json", res.to_dict())
    print(f"{res.mechanism.value}: provider utility {res.provider_utility:.6g}, feasible={res.menu.feasible}")
    return EXIT_OK


def _cmd_verify(cfg: ScenarioConfig, out: Path, args) -> int:
    types = ex.build_population(cfg)
    if args.menu:
        source = Path(args.menu)
    else:
        # round trip: solve, write, re-read, verify
        source = out / "solve.json"
        ex.write_json(source, ex.solve_config(cfg).to_dict())
    menu = ex.reverify(source, types)
    if len(menu) != len(types):
        raise ConfigError(f"menu has {len(menu)} items but the scenario has {len(types)} types")
    ex.write_json(out / "verify.json", {
        # as given on the command line, so the report does not depend on --out
        "menu": args.menu or "solve.json",
        "feasible": menu.feasible,
        "violations": [{"kind": v.kind, "indices": list(v.indices), "slack": v.slack} for v in menu.violations],
    })
    print(f"feasible={menu.feasible}, violations={len(menu.violations)}")
    return EXIT_OK if menu.feasible else EXIT_CONFIG


def _cmd_choice(cfg, out, args) -> int:
    ex.write_choice_matrix(out / "choice_matrix.csv", ex.choice_matrix(cfg))
    return EXIT_OK


def _cmd_sweep_a(cfg, out, args) -> int:
    sweep = ex.sweep_duration(cfg)
    ex.write_sweep_a(out / "sweep_a.csv", sweep)
    if not any(True for _ in sweep.feasible_rows()):
        log.error("every sweep point is infeasible")
        return EXIT_INFEASIBLE
    return EXIT_OK


def _cmd_sweep_alpha(cfg, out, args) -> int:
    sweep = ex.sweep_alpha(cfg)
    ex.write_sweep_alpha(out / "sweep_alpha.csv", sweep)
    if not any(True for _ in sweep.feasible_rows()):
        log.error("every sweep point is infeasible")
        return EXIT_INFEASIBLE
    return EXIT_OK


def _cmd_compare(cfg, out, args) -> int:
    rows = ex.compare_mechanisms(cfg)
    ex.write_compare(out / "compare.csv", rows)
    # wall times vary run to run, so they stay out of compare.csv
    ex.write_json(out / "timings.json", {r.mechanism.value: r.wall_time for r in rows})
    for r in rows:
        print(f"{r.mechanism.value}: U_s={r.provider_utility:.6g} welfare={r.welfare:.6g} "
              f"mean U_w={r.mean_worker_utility:.6g}")
    return EXIT_OK


def _cmd_simulate(cfg, out, args) -> int:
    wf = cfg.workflow()
    rounds = flsim.simulate(wf)
    flsim.write_trace(out / "trace.jsonl", flsim.emit_trace(wf, 0))
    n = len(rounds)
    summary = {
        "epochs": n,
        "t_u": sum(r.t_u for r in rounds) / n,
        "t_c": sum(r.t_c for r in rounds) / n,
        "t": flsim.average_round_time(wf),
        "rounds": [r.to_dict() for r in rounds],
    }
    ex.write_json(out / "timing_summary.json", summary)
    print(f"t_u={summary['t_u']:.6g} t_c={summary['t_c']:.6g} t={summary['t']:.6g}")
    return EXIT_OK


HANDLERS = {
    "solve": _cmd_solve,
    "verify": _cmd_verify,
    "choice-matrix": _cmd_choice,
    "sweep-a": _cmd_sweep_a,
    "sweep-alpha": _cmd_sweep_alpha,
    "compare": _cmd_compare,
    "simulate-timing": _cmd_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario JSON file (defaults apply to missing keys)")
    common.add_argument("--out", default=".", help="output directory (default: current directory)")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config value by dotted key, e.g. provider.alpha=0.9")
    common.add_argument("--seed", type=int, help="random seed (overrides config)")
    common.add_argument("--variant", choices=("paper", "oracle"), help="freshness formulas to use")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="aoicontract", description="AoI-based contract design for FL workers")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "verify":
            p.add_argument("--menu", help="solve JSON to verify (default: solve the scenario and round-trip it)")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        overrides = list(args.overrides)
        if args.seed is not None:
            overrides.append(f"seed={args.seed}")
        if args.variant is not None:
            overrides.append(f'solver.variant="{args.variant}"')
        cfg = load_config(args.config, overrides)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "effective_config.json").write_text(cfg.to_json(), encoding="utf-8")
        return HANDLERS[args.command](cfg, out, args)
    except (ConfigError, DomainError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except Infeasible as err:
        print(f"infeasible: {err}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ArithmeticError, NonpositivePerformance) as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except Exception as err:  # noqa: BLE001
        log.debug("unexpected failure", exc_info=True)
        print(f"internal error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

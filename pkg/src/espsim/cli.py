"""Command-line front end.

    espsim run SCENARIO [-o OUT]
    espsim sweep SCENARIO --param {alpha,P,n_jobs} --values V1,V2,... [-o OUT]
    espsim bounds SCENARIO [-o OUT]
    espsim game --P N --alpha A [--budget B]

Exit status: 0 all good, 1 some theorem bound violated, 2 bad input,
3 a simulation failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from dataclasses import replace
from typing import Iterable, Optional, Sequence

from .adversarial import adversary_best_h, game_lower_bound, robust_speed_vector
from .analysis import THEOREM_FOR, RatioReport, ratio_harness
from .baselines import NotBatched, NotParseq, g1_lower_bound, h_lower_bound
from .engine import SimulationError
from .model import Metrics, ModelError, PowerParams, kappa
from .scenario import Case, Scenario, ScenarioError, expand, load_scenario

log = logging.getLogger("espsim")

EXIT_OK, EXIT_BOUND, EXIT_PARSE, EXIT_SIM = 0, 1, 2, 3

RUN_COLUMNS = ["instance_id", "policy", "alpha", "P", "n_jobs", "F", "E", "M", "G", "H",
               "lower_bound", "ratio", "theorem_bound", "bound_ok", "objective"]
SWEEP_COLUMNS = ["sweep_param", "sweep_value"] + RUN_COLUMNS + ["ratio_scaled"]
BOUNDS_COLUMNS = ["instance_id", "alpha", "P", "n_jobs", "g1_lower_bound", "h_lower_bound"]
GAME_COLUMNS = ["P", "alpha", "budget", "best_h", "ratio", "lower_bound", "bound_ok", "speeds"]

# ratio / ln(P)^exponent should stay flat for these
_LOG_EXPONENT = {"T1": lambda a: 1.0, "T3": lambda a: 0.0,
                 "T4": lambda a: 1.0 - 1.0 / a, "game": lambda a: 1.0 / a}


class SimulationFailed(Exception):
    pass


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.12g}"
    return str(x)


def write_csv(columns: Sequence[str], rows: Iterable[dict], dest: str) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c)) for c in columns])
    text = buf.getvalue()
    if dest == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _report_row(rep: RatioReport) -> dict:
    m = rep.metrics
    return {
        "instance_id": rep.instance_id, "policy": rep.policy, "objective": rep.objective,
        "alpha": float(rep.alpha), "P": rep.P, "n_jobs": rep.n_jobs,
        "F": m.flow_total, "E": m.energy, "M": m.makespan, "G": m.g, "H": m.h,
        "lower_bound": rep.lower_bound, "ratio": rep.ratio,
        "theorem_bound": rep.theorem_bound, "bound_ok": rep.bound_ok,
        "_theorem": THEOREM_FOR.get((rep.policy, rep.objective)),
    }


def play_game(params: PowerParams, budget: float, case_id: str = "game") -> dict:
    """One row for the fixed-speed game: a unit-work job at the adversary's parallelism."""
    vec = robust_speed_vector(params, budget)
    h, ratio = adversary_best_h(vec, params)
    alpha = params.alpha
    u = vec.power(alpha)
    flow = 1.0 / math.fsum(vec.speeds[:h])
    opt = kappa(alpha) / h ** (1.0 - 1.0 / alpha)
    lb = game_lower_bound(params)
    m = Metrics(flow, u * flow, flow)
    return {
        "instance_id": case_id, "policy": "robust", "objective": "G",
        "alpha": float(alpha), "P": params.P, "n_jobs": 1,
        "F": m.flow_total, "E": m.energy, "M": m.makespan, "G": m.g, "H": m.h,
        "lower_bound": opt, "ratio": ratio, "theorem_bound": lb,
        "bound_ok": ratio >= lb * (1.0 - 1e-9), "_theorem": "game",
        "best_h": h, "budget": budget, "speeds": ";".join(fmt(s) for s in vec.speeds),
    }


def evaluate(scenario: Scenario, n_jobs: Optional[int] = None) -> list[dict]:
    rows = []
    for case in expand(scenario, n_jobs=n_jobs):
        rows.extend(_evaluate_case(scenario, case))
    return rows


def _evaluate_case(scenario: Scenario, case: Case) -> list[dict]:
    if case.instance is None:
        return [play_game(scenario.params, case.budget, case.case_id)]
    policies = case.section.policies or scenario.policies
    objectives = case.section.objectives or scenario.objectives
    rows = []
    for pol in policies:
        for obj in objectives:
            try:
                rep = ratio_harness(case.instance, pol, obj, case.case_id)
            except (SimulationError, ModelError, NotBatched, NotParseq) as exc:
                raise SimulationFailed(f"{case.case_id}/{pol}/{obj}: {exc}") from exc
            rows.append(_report_row(rep))
    return rows


def _status(rows: Iterable[dict]) -> int:
    return EXIT_OK if all(r["bound_ok"] for r in rows) else EXIT_BOUND


def cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    rows = evaluate(scenario)
    write_csv(RUN_COLUMNS, rows, args.output or scenario.output)
    return _status(rows)


def _parse_values(param: str, raw: str) -> list:
    vals = [v.strip() for v in raw.split(",") if v.strip()]
    if not vals:
        raise ScenarioError("sweep needs at least one value", key="values")
    out = []
    for v in vals:
        try:
            x = float(v) if param == "alpha" else int(v)
        except ValueError:
            raise ScenarioError(f"bad sweep value {v!r}", key="values") from None
        if param == "alpha" and not x > 1:
            raise ScenarioError(f"alpha must exceed 1 (got {v})", key="values")
        if param != "alpha" and x < 1:
            raise ScenarioError(f"{param} must be >= 1 (got {v})", key="values")
        out.append(x)
    return out


def cmd_sweep(args) -> int:
    scenario = load_scenario(args.scenario)
    values = _parse_values(args.param, args.values)
    rows = []
    for v in values:
        if args.param == "alpha":
            rows_v = evaluate(replace(scenario, alpha=v))
        elif args.param == "P":
            rows_v = evaluate(replace(scenario, P=v))
        else:
            rows_v = evaluate(scenario, n_jobs=v)
        for r in rows_v:
            r["sweep_param"] = args.param
            r["sweep_value"] = v
            r["ratio_scaled"] = _scaled(r)
        rows.extend(rows_v)
    write_csv(SWEEP_COLUMNS, rows, args.output or scenario.output)
    return _status(rows)


def _scaled(row: dict) -> float:
    theorem = row.get("_theorem")
    exp = _LOG_EXPONENT[theorem](row["alpha"]) if theorem else 0.0
    if exp == 0:
        return row["ratio"]
    lnp = math.log(row["P"])
    return row["ratio"] / lnp ** exp if lnp > 0 else math.nan


def cmd_bounds(args) -> int:
    scenario = load_scenario(args.scenario)
    rows = []
    for case in expand(scenario):
        if case.instance is None:
            continue
        inst = case.instance
        try:
            hb = h_lower_bound(inst)
        except (NotBatched, NotParseq):
            hb = math.nan
        rows.append({"instance_id": case.case_id, "alpha": float(inst.alpha), "P": inst.P,
                     "n_jobs": len(inst.jobs), "g1_lower_bound": g1_lower_bound(inst),
                     "h_lower_bound": hb})
    write_csv(BOUNDS_COLUMNS, rows, args.output or scenario.output)
    return EXIT_OK


def cmd_game(args) -> int:
    try:
        params = PowerParams(args.alpha, args.P)
    except ModelError as exc:
        raise ScenarioError(str(exc)) from None
    budget = args.budget if args.budget is not None else 1.0 / (args.alpha - 1.0)
    if not budget > 0:
        raise ScenarioError("budget must be positive", key="budget")
    row = play_game(params, budget)
    row["lower_bound"] = row["theorem_bound"]
    write_csv(GAME_COLUMNS, [row], args.output or "-")
    return _status([row])


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="espsim", description=__doc__.split("\n\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate every instance with every policy")
    r.add_argument("scenario")
    r.add_argument("-o", "--output", help="CSV path or '-' for stdout")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="repeat a scenario over a parameter")
    s.add_argument("scenario")
    s.add_argument("--param", required=True, choices=["alpha", "P", "n_jobs"])
    s.add_argument("--values", required=True, help="comma-separated list")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_sweep)

    b = sub.add_parser("bounds", help="print lower bounds only")
    b.add_argument("scenario")
    b.add_argument("-o", "--output")
    b.set_defaults(func=cmd_bounds)

    g = sub.add_parser("game", help="robust speed vector vs the parallelism adversary")
    g.add_argument("--P", type=int, required=True)
    g.add_argument("--alpha", type=float, required=True)
    g.add_argument("--budget", type=float)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_game)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"espsim: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SimulationFailed as exc:
        print(f"espsim: simulation error: {exc}", file=sys.stderr)
        return EXIT_SIM


if __name__ == "__main__":
    sys.exit(main())

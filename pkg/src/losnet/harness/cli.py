"""Command-line entry point: ``losnet <subcommand> --scenario file.json ...``.

Exit codes: 0 valid/success, 2 invalid state or failed outcome, 1 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path as FsPath

from ..connectivity import communication_check, distributed_check
from ..errors import LosnetError, RelayBroken
from ..geometry import visibility_region
from ..motion.tour import patrol_tour
from ..placement import component_graph, place, tour_sequence
from ..recovery import single_move_recover
from .metrics import metrics_report
from .plans import deployment_to_dict, recovery_to_dict, region_from_list, tour_to_dict
from .render import render_svg
from .scenario import load_plan, load_scenario, save_plan
from .simulate import simulate

EXIT_OK, EXIT_USAGE, EXIT_INVALID = 0, 1, 2


def _scenario(args):
    sc = load_scenario(args.scenario)
    if getattr(args, "seed", None) is not None:
        sc = sc.with_(seed=args.seed)
    if getattr(args, "steps", None) is not None:
        sc = sc.with_(steps=args.steps)
    if getattr(args, "planner", None) is not None:
        sc = sc.with_(planner=replace(sc.planner, kind=args.planner))
    return sc


def _write(path, text):
    if path == "-":
        sys.stdout.write(text)
    else:
        FsPath(path).write_text(text)


def cmd_validate(args) -> int:
    sc = _scenario(args)
    chk = communication_check(sc.state, sc.env)
    out = {
        "verdict": chk.verdict.value,
        "lambda2_relay": chk.lambda2_relay if chk.lambda2_relay != float("inf") else None,
        "lambda2_union": chk.lambda2_union if chk.lambda2_union not in (None, float("inf")) else None,
    }
    ok = chk.valid
    if args.distributed:
        dist_ok, trace = distributed_check(sc.state, sc.env, args.initiator)
        out["distributed"] = dist_ok
        out["messages"] = len(trace)
        out["rounds"] = trace.rounds
        if args.trace:
            _write(args.trace, trace.to_lines())
        ok = ok and dist_ok
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK if ok else EXIT_INVALID


def cmd_recover(args) -> int:
    sc = _scenario(args)
    try:
        res = single_move_recover(sc.env, sc.state, sc.planner, seed=sc.seed)
    except RelayBroken as exc:
        print(f"recover: {exc}", file=sys.stderr)
        return EXIT_INVALID
    doc = recovery_to_dict(res, sc.vehicle_ids, sc.unit_ids)
    if args.out:
        save_plan(args.out, doc)
    if args.svg:
        state = res.state or sc.state
        ov = {"paths": [mv.path for mv in res.moves], "gamma": [mv.goal_region for mv in res.moves], "graphs": True}
        _write(args.svg, render_svg(sc.env, state, ov))
    print(json.dumps({"success": res.success, "moves": len(res.moves), "cost": res.cost}, sort_keys=True))
    return EXIT_OK if res.success else EXIT_INVALID


def cmd_place(args) -> int:
    sc = _scenario(args)
    n = args.vehicles if args.vehicles is not None else sc.state.n
    plan = place(sc.env, sc.state.units, n, sc.score, seed=sc.seed)
    doc = deployment_to_dict(plan, sc.unit_ids)
    if args.out:
        save_plan(args.out, doc)
    if args.svg:
        state = plan.vehicle_state(sc.state.units)
        ov = {"gamma": [f.polygon for f in plan.cover.selected], "tour": plan.tour}
        _write(args.svg, render_svg(sc.env, state, ov))
    print(json.dumps({"case": plan.case, "cover": len(plan.cover), "patroller": plan.patroller}, sort_keys=True))
    return EXIT_OK


def cmd_patrol(args) -> int:
    sc = _scenario(args)
    plan = load_plan(args.plan)
    verts = [region_from_list(v, f"tour_vertices[{i}]") for i, v in enumerate(plan.get("tour_vertices", []))]
    if not verts:
        print("patrol: plan has no tour vertices", file=sys.stderr)
        return EXIT_INVALID
    order = tour_sequence(component_graph(verts, sc.env), seed=sc.seed) if len(verts) > 1 else [0]
    tour = patrol_tour(sc.env, [verts[i] for i in order])
    doc = {"kind": "tour", "order": order, "tour": tour_to_dict(tour)}
    if args.out:
        save_plan(args.out, doc)
    if args.svg:
        _write(args.svg, render_svg(sc.env, sc.state, {"faces": verts, "tour": tour}))
    print(json.dumps({"length": tour.length, "order": order}, sort_keys=True))
    return EXIT_OK


def cmd_simulate(args) -> int:
    sc = _scenario(args)
    report = simulate(sc)
    if args.out:
        _write(args.out, report.to_json())
    table, summary = metrics_report(report)
    sys.stdout.write(table)
    print(json.dumps(summary, sort_keys=True))
    if args.svg:
        _write(args.svg, render_svg(sc.env, sc.state, {"graphs": True}))
    bad = any(r["verdict_after"] != "valid" for r in report.records)
    return EXIT_INVALID if bad else EXIT_OK


def cmd_render(args) -> int:
    sc = _scenario(args)
    ov = {"graphs": True}
    if args.visibility:
        ov["visibility"] = [visibility_region(sc.env, u) for u in sc.state.units]
    if args.plan:
        plan = load_plan(args.plan)
        if plan.get("kind") == "placement":
            ov["gamma"] = [region_from_list(c["polygon"]) for c in plan["cover"]]
    _write(args.svg, render_svg(sc.env, sc.state, ov))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="losnet", description="Line-of-sight relay network tools")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, planner=False):
        sp.add_argument("--scenario", required=True, help="scenario JSON file")
        sp.add_argument("--seed", type=int, default=None)
        if planner:
            sp.add_argument("--planner", choices=("visgraph", "rrtstar"), default=None)

    sp = sub.add_parser("validate", help="centralized (and optionally distributed) validity check")
    common(sp)
    sp.add_argument("--distributed", action="store_true")
    sp.add_argument("--initiator", type=int, default=0)
    sp.add_argument("--trace", help="write the message trace (JSON lines); '-' for stdout")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("recover", help="single-vehicle recovery plan")
    common(sp, planner=True)
    sp.add_argument("--out")
    sp.add_argument("--svg")
    sp.set_defaults(func=cmd_recover)

    sp = sub.add_parser("place", help="cover the units and deploy vehicles")
    common(sp)
    sp.add_argument("--vehicles", type=int)
    sp.add_argument("--out")
    sp.add_argument("--svg")
    sp.set_defaults(func=cmd_place)

    sp = sub.add_parser("patrol", help="patrol tour for a placement plan")
    common(sp)
    sp.add_argument("--plan", required=True)
    sp.add_argument("--out")
    sp.add_argument("--svg")
    sp.set_defaults(func=cmd_patrol)

    sp = sub.add_parser("simulate", help="run the move/validate/repair loop")
    common(sp, planner=True)
    sp.add_argument("--steps", type=int)
    sp.add_argument("--out", help="write the report JSON; '-' for stdout")
    sp.add_argument("--svg")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("render", help="draw the scenario as SVG")
    common(sp)
    sp.add_argument("--svg", required=True)
    sp.add_argument("--plan")
    sp.add_argument("--visibility", action="store_true")
    sp.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (LosnetError, OSError, ValueError) as exc:
        print(f"losnet {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

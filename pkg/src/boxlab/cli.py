"""Batch experiment runner.

Every subcommand writes a machine-readable payload (JSON by default, CSV
where a row schema exists) that embeds the resolved config, the seed, and
the tool version, so identical invocations produce byte-identical files.

Exit codes: 0 success, 2 precondition violation, 3 acceptance-suite failure.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys

import numpy as np

from . import __version__, acceptance, analysis, boxes, games, protocols, sphere
from .protocols import AffineFunction, BINARY, Alphabets
from .quantum import SINGLET, bell_box
from .sphere import cover_bell_spec

DEFAULT_SEED = 20230405


def _thread_cap() -> int:
    # execution is serial; the cap is honored trivially but still validated
    raw = os.environ.get("NBL_THREADS", "1")
    cap = int(raw)
    if cap < 1:
        raise ValueError("NBL_THREADS must be a positive integer")
    return cap


def _parse_box(token: str) -> boxes.CorrelationBox:
    """Box forms: 'pr', 'octahedron', 'local:f0,f1:g0,g1', 'file:PATH'."""
    if token == "pr":
        return boxes.pr_box()
    if token == "octahedron":
        return sphere.discretized_box(sphere.octahedron_cover())
    if token.startswith("local:"):
        _, f, g = token.split(":")
        return boxes.local_box([int(v) for v in f.split(",")],
                               [int(v) for v in g.split(",")],
                               a_size=2, b_size=2)
    if token.startswith("file:"):
        with open(token[5:], "r", encoding="utf-8") as fh:
            return boxes.box_from_json(fh.read())
    raise ValueError("unknown box form %r" % token)


def _emit(args, payload: dict, csv_rows=None, csv_header=None) -> None:
    config = {k: v for k, v in sorted(vars(args).items())
              if k not in ("func",) and v is not None}
    if getattr(args, "format", "json") == "csv" and csv_rows is not None:
        buf = io.StringIO()
        buf.write("# config=%s version=%s\n"
                  % (json.dumps(config, sort_keys=True), __version__))
        buf.write(",".join(csv_header) + "\n")
        for row in csv_rows:
            buf.write(",".join(repr(v) if isinstance(v, float) else str(v)
                               for v in row) + "\n")
        text = buf.getvalue()
    else:
        text = json.dumps({"config": config, "version": __version__,
                           "result": payload}, sort_keys=True, indent=2) + "\n"
    out = getattr(args, "out", None)
    if out:
        tmp = out + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, out)       # never leave a partial output file
    else:
        sys.stdout.write(text)


# --- box ---------------------------------------------------------------

def cmd_box_show(args):
    box = _parse_box(args.box)
    _emit(args, json.loads(boxes.box_to_json(box)))


def cmd_box_sample(args):
    box = _parse_box(args.box)
    rng = np.random.default_rng(np.random.SeedSequence([args.seed]))
    counts = np.zeros((box.a_size, box.b_size), dtype=np.int64)
    rows = []
    for i in range(args.n):
        a, b = boxes.sample(box, args.x, args.y, rng)
        counts[a, b] += 1
        rows.append((i, a, b))
    _emit(args, {"counts": counts.tolist(),
                 "frequencies": (counts / args.n).tolist()},
          csv_rows=rows, csv_header=("trial", "a", "b"))


def cmd_box_tv(args):
    value = boxes.tv_closeness(_parse_box(args.box), _parse_box(args.other))
    _emit(args, {"tv_closeness": value})


# --- game --------------------------------------------------------------

def cmd_game_eval(args):
    value = games.win_prob(_parse_box(args.box), args.p, args.q)
    _emit(args, {"win_prob": value})


def cmd_game_omega(args):
    _emit(args, {"omega": round(games.omega(args.p), 10)})


def cmd_game_bound(args):
    _emit(args, {"biased_bound": games.biased_bound(args.p, args.q)})


def cmd_game_optimize(args):
    strategy = games.optimal_strategy(args.p, grid=args.grid)
    achieved = games.win_prob(strategy.to_box(), args.p, 0.5)
    _emit(args, {"alice_angles": list(strategy.alice_angles),
                 "bob_angles": list(strategy.bob_angles),
                 "achieved": achieved,
                 "omega": games.omega(args.p),
                 "shortfall": games.omega(args.p) - achieved})


# --- protocol ----------------------------------------------------------

def cmd_protocol_run(args):
    with open(args.protocol, "r", encoding="utf-8") as fh:
        protocol = protocols.protocol_from_json(fh.read())
    target = _parse_box(args.target)
    induced = protocols.induced_box(protocol, target)
    payload = {"induced_box": json.loads(boxes.box_to_json(induced))}
    if args.source is not None:
        ok, tv = protocols.check_reduction(protocol, target,
                                           _parse_box(args.source),
                                           args.epsilon)
        payload["reduction"] = {"epsilon": args.epsilon, "ok": ok,
                                "achieved_tv": tv}
    _emit(args, payload)


def _alphabets_from_args(args) -> Alphabets:
    if args.binary:
        return BINARY
    return Alphabets(2, 2, 2, 2, args.x2, args.y2, args.a2, args.b2)


def cmd_protocol_enumerate(args):
    al = _alphabets_from_args(args)
    count = protocols.count_protocols(al, args.k)
    payload = {"count": count, "bound": protocols.counting_bound(al, args.k)}
    if not args.count_only:
        if count > 10 ** 4:
            raise ValueError("refusing to list more than 10^4 protocols; "
                             "use --count-only")
        payload["protocols"] = [
            json.loads(protocols.protocol_to_json(pi))
            for pi in protocols.enumerate_protocols(al, args.k)]
    _emit(args, payload)


def cmd_protocol_family(args):
    target = _parse_box(args.target)
    family = protocols.affine_family(target, args.k, up_to_k=args.up_to_k)
    rows = sorted((ell.intercept, ell.slope) for ell in family)
    _emit(args, {"size": len(rows), "lines": [list(r) for r in rows]},
          csv_rows=rows, csv_header=("intercept", "slope"))


# --- analysis ----------------------------------------------------------

def cmd_analysis_intersections(args):
    ell = AffineFunction(args.intercept, args.slope)
    _emit(args, {"roots": analysis.line_intersections(ell)})


def cmd_analysis_measure(args):
    ell = AffineFunction(args.intercept, args.slope)
    _emit(args, {"measure": analysis.measure_near(ell, args.epsilon)})


def cmd_analysis_gap(args):
    target = _parse_box(args.target)
    family = protocols.affine_family(target, args.k)
    cert = analysis.find_hard_p(family, resolution=args.resolution,
                                description=args.target, k=args.k)
    _emit(args, json.loads(analysis.certificate_to_json(cert, __version__)))


def cmd_analysis_schedule(args):
    sched = analysis.epsilon_schedule(args.x2, args.y2, args.a2, args.b2,
                                      args.k_max, args.c)
    rows = [(k + 1, str(b), e)
            for k, (b, e) in enumerate(zip(sched.bounds, sched.eps))]
    _emit(args, {"bounds": [str(b) for b in sched.bounds],
                 "eps": list(sched.eps),
                 "identity_exact": sched.verify_identity()},
          csv_rows=rows, csv_header=("k", "bound", "epsilon"))


# --- cover -------------------------------------------------------------

def cmd_cover_build(args):
    cover = sphere.build_cover(args.epsilon)
    _emit(args, json.loads(sphere.cover_to_json(cover)))


def cmd_cover_box(args):
    cover = _load_cover(args)
    box = sphere.discretized_box(cover)
    _emit(args, json.loads(boxes.box_to_json(box)))


def cmd_cover_verify(args):
    cover = _load_cover(args)
    max_tv, mean_tv = sphere.verify_reduction(cover, args.trials, seed=args.seed)
    _emit(args, {"T": cover.size, "covering_radius": cover.covering_radius,
                 "max_tv": max_tv, "mean_tv": mean_tv})


def _load_cover(args) -> sphere.SphereCover:
    if args.cover:
        with open(args.cover, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        # accept both a bare cover file and a `cover build` output file
        if "result" in payload and "points" not in payload:
            payload = payload["result"]
        return sphere.cover_from_json(json.dumps(payload))
    if args.epsilon is None:
        raise ValueError("need --epsilon or --cover")
    return sphere.build_cover(args.epsilon)


# --- suite -------------------------------------------------------------

def cmd_suite_acceptance(args):
    results = acceptance.run_all()
    for result in results:
        print(result.line())
    payload = {"results": [{"name": r.name, "passed": r.passed,
                            "details": _jsonable(r.details)}
                           for r in results],
               "all_passed": all(r.passed for r in results)}
    if args.out:
        _emit(args, payload)
    if not payload["all_passed"]:
        sys.exit(3)


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


# --- parser ------------------------------------------------------------

CSV_SCHEMAS = {
    "box sample": "trial,a,b  (one row per draw)",
    "protocol family": "intercept,slope  (one row per distinct line)",
    "analysis schedule": "k,bound,epsilon  (one row per query count)",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boxlab",
        description="correlation-box simulation and verification experiments")
    parser.add_argument("--schema", action="store_true",
                        help="print the CSV schemas and exit")
    top = parser.add_subparsers(dest="group")

    def common(sub, seed=False, fmt=False):
        sub.add_argument("--out", help="output file (default: stdout)")
        if seed:
            sub.add_argument("--seed", type=int, default=DEFAULT_SEED)
        if fmt:
            sub.add_argument("--format", choices=("json", "csv"),
                             default="json")

    box = top.add_parser("box").add_subparsers(dest="cmd", required=True)
    p = box.add_parser("show"); p.add_argument("--box", required=True)
    common(p); p.set_defaults(func=cmd_box_show)
    p = box.add_parser("sample")
    p.add_argument("--box", required=True)
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--y", type=int, required=True)
    p.add_argument("--n", type=int, default=1000)
    common(p, seed=True, fmt=True); p.set_defaults(func=cmd_box_sample)
    p = box.add_parser("tv")
    p.add_argument("--box", required=True); p.add_argument("--other", required=True)
    common(p); p.set_defaults(func=cmd_box_tv)

    game = top.add_parser("game").add_subparsers(dest="cmd", required=True)
    p = game.add_parser("eval")
    p.add_argument("--box", required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", type=float, default=0.5)
    common(p); p.set_defaults(func=cmd_game_eval)
    p = game.add_parser("omega"); p.add_argument("--p", type=float, required=True)
    common(p); p.set_defaults(func=cmd_game_omega)
    p = game.add_parser("bound")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", type=float, default=0.5)
    common(p); p.set_defaults(func=cmd_game_bound)
    p = game.add_parser("optimize")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--grid", type=int, default=64)
    common(p); p.set_defaults(func=cmd_game_optimize)

    proto = top.add_parser("protocol").add_subparsers(dest="cmd", required=True)
    p = proto.add_parser("run")
    p.add_argument("--protocol", required=True, help="protocol JSON file")
    p.add_argument("--target", required=True)
    p.add_argument("--source", help="check an epsilon-error reduction")
    p.add_argument("--epsilon", type=float, default=0.0)
    common(p); p.set_defaults(func=cmd_protocol_run)
    p = proto.add_parser("enumerate")
    p.add_argument("--binary", action="store_true")
    p.add_argument("--x2", type=int, default=2); p.add_argument("--y2", type=int, default=2)
    p.add_argument("--a2", type=int, default=2); p.add_argument("--b2", type=int, default=2)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--count-only", action="store_true")
    common(p); p.set_defaults(func=cmd_protocol_enumerate)
    p = proto.add_parser("family")
    p.add_argument("--target", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--up-to-k", action="store_true")
    common(p, fmt=True); p.set_defaults(func=cmd_protocol_family)

    ana = top.add_parser("analysis").add_subparsers(dest="cmd", required=True)
    p = ana.add_parser("intersections")
    p.add_argument("--intercept", type=float, required=True)
    p.add_argument("--slope", type=float, required=True)
    common(p); p.set_defaults(func=cmd_analysis_intersections)
    p = ana.add_parser("measure")
    p.add_argument("--intercept", type=float, required=True)
    p.add_argument("--slope", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    common(p); p.set_defaults(func=cmd_analysis_measure)
    p = ana.add_parser("gap")
    p.add_argument("--target", default="octahedron")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--resolution", type=int, default=10 ** 4)
    common(p); p.set_defaults(func=cmd_analysis_gap)
    p = ana.add_parser("schedule")
    p.add_argument("--x2", type=int, default=2); p.add_argument("--y2", type=int, default=2)
    p.add_argument("--a2", type=int, default=2); p.add_argument("--b2", type=int, default=2)
    p.add_argument("--k-max", type=int, default=3)
    p.add_argument("--c", type=float, default=0.01)
    common(p, fmt=True); p.set_defaults(func=cmd_analysis_schedule)

    cover = top.add_parser("cover").add_subparsers(dest="cmd", required=True)
    p = cover.add_parser("build")
    p.add_argument("--epsilon", type=float, required=True)
    common(p); p.set_defaults(func=cmd_cover_build)
    p = cover.add_parser("box")
    p.add_argument("--epsilon", type=float); p.add_argument("--cover")
    common(p); p.set_defaults(func=cmd_cover_box)
    p = cover.add_parser("verify")
    p.add_argument("--epsilon", type=float); p.add_argument("--cover")
    p.add_argument("--trials", type=int, default=1000)
    common(p, seed=True); p.set_defaults(func=cmd_cover_verify)

    suite = top.add_parser("suite").add_subparsers(dest="cmd", required=True)
    p = suite.add_parser("acceptance")
    common(p); p.set_defaults(func=cmd_suite_acceptance)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "schema", False):
        for cmd, schema in CSV_SCHEMAS.items():
            print("%s: %s" % (cmd, schema))
        return 0
    if not hasattr(args, "func"):
        parser.print_help()
        return 2
    try:
        _thread_cap()
        args.func(args)
    except (ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except SystemExit as exc:
        return int(exc.code or 0)
    return 0


if __name__ == "__main__":
    sys.exit(main())

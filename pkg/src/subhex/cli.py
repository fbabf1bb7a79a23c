"""Command line front end.  Every command prints one JSON report on stdout.

Exit codes: 0 passed or complete, 2 failed with a counterexample, 3 budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from pathlib import Path

from .constructions import FAMILIES, construct, self_check
from .errors import SubhexError
from .exact_cover import UNLIMITED, SearchBudget, Status
from .geometry import IncidenceGeometry, load, save, verify_generalized_hexagon
from .harness import (
    check_h3,
    check_no_ovoids,
    check_semisingular_pairs,
    deduce,
    covering_identity,
)
from .hyperplanes import enumerate_ovoids, enumerate_semisingular
from .symmetry import automorphisms

EXIT_OK = 0
EXIT_FAILED = 2
EXIT_BUDGET = 3

_SPEC = re.compile(r"^(?P<family>[a-z_]+):(?P<q>\d+)$")


def _budget(nodes: int | None, limit: int | None = None, seconds: float | None = None) -> SearchBudget:
    if nodes is None and limit is None and seconds is None:
        return UNLIMITED
    return SearchBudget(nodes, limit, seconds)


def load_geometry(spec: str) -> IncidenceGeometry:
    """A geometry file, or ``family:q`` (for example ``split_cayley:3``) to build one."""
    path = Path(spec)
    if path.exists():
        return load(path)
    m = _SPEC.match(spec)
    if m:
        return construct(m["family"], int(m["q"]))
    raise FileNotFoundError(f"no geometry file {spec!r}")


def _report(command: str, geometry: str | None, parameters: dict, results, *,
            nodes: int = 0, seconds: float = 0.0, status: str = "Complete", deductions=()) -> dict:
    return {
        "command": command,
        "geometry": geometry,
        "parameters": parameters,
        "results": results,
        "nodes_expanded": int(nodes),
        "wall_seconds": round(float(seconds), 6),
        "status": status,
        "deductions": [d.to_dict() for d in deductions],
    }


def _status_code(passed: bool, status: str) -> int:
    if passed:
        return EXIT_OK
    if status == Status.BUDGET_EXHAUSTED.value:
        return EXIT_BUDGET
    return EXIT_FAILED


# -- commands ------------------------------------------------------------------

def cmd_construct(args) -> tuple[dict, int]:
    start = time.monotonic()
    g = construct(args.family, args.q)
    checked = False
    if args.seed_check and args.family != "plane":
        self_check(g, args.family, args.q)
        checked = True
    if args.out:
        save(g, args.out)
    results = {"num_points": g.num_points, "num_lines": g.num_lines, "out": args.out, "self_check": checked}
    params = {"family": args.family, "q": args.q}
    return _report("construct", g.name, params, results, seconds=time.monotonic() - start), EXIT_OK


def cmd_verify(args) -> tuple[dict, int]:
    start = time.monotonic()
    g = load_geometry(args.file)
    rep = verify_generalized_hexagon(g)
    status = "Complete"
    return (
        _report("verify", g.name, {"file": args.file}, rep.to_dict(), seconds=time.monotonic() - start, status=status),
        EXIT_OK if rep.passed else EXIT_FAILED,
    )


def cmd_ovoids(args) -> tuple[dict, int]:
    g = load_geometry(args.file)
    stream = enumerate_ovoids(g, _budget(args.nodes, args.limit))
    found = []
    sizes = set()
    handle = open(args.out, "w") if args.out else None
    try:
        for ov in stream:
            idx = ov.points.indices().tolist()
            sizes.add(len(idx))
            if args.enumerate and len(found) < 1000:
                found.append(idx)
            if handle:
                handle.write(json.dumps(idx) + "\n")
    finally:
        if handle:
            handle.close()
    out = stream.outcome
    results = {"count": out.solutions_found, "sizes": sorted(sizes)}
    if args.enumerate:
        results["ovoids"] = found
    params = {"file": args.file, "limit": args.limit, "nodes": args.nodes}
    code = EXIT_OK if out.status is Status.COMPLETE or args.limit else EXIT_BUDGET
    return _report("ovoids", g.name, params, results, nodes=out.nodes_expanded,
                   seconds=out.wall_seconds, status=out.status.value), code


def cmd_semisingular(args) -> tuple[dict, int]:
    g = load_geometry(args.file)
    stream = enumerate_semisingular(g, args.center, _budget(args.nodes))
    found = [h.points.indices().tolist() for h in stream]
    out = stream.outcome
    results = {"center": args.center, "count": len(found), "sizes": sorted({len(h) for h in found})}
    if not args.count:
        results["hyperplanes"] = found
    code = EXIT_OK if out.status is Status.COMPLETE else EXIT_BUDGET
    return _report("semisingular", g.name, {"file": args.file, "center": args.center}, results,
                   nodes=out.nodes_expanded, seconds=out.wall_seconds, status=out.status.value), code


def cmd_check_h3(args) -> tuple[dict, int]:
    g = load_geometry(args.file)
    policy = "all_points" if args.all_points else "fixed_point"
    r = check_h3(g, policy, point=args.point, threshold=args.threshold, exhaustive=args.exhaustive)
    params = {"file": args.file, "policy": policy, "point": args.point, "threshold": r.threshold}
    return _report("check-h3", g.name, params, r.to_dict(), nodes=r.nodes_expanded, seconds=r.wall_seconds,
                   status=r.status.value, deductions=deduce([r])), _status_code(r.passed, r.status.value)


def cmd_check_pairs(args) -> tuple[dict, int]:
    g = load_geometry(args.file)
    if args.all_pairs:
        policy, pair = "all_pairs", None
    elif args.pair:
        policy, pair = "fixed_pair", tuple(args.pair)
    else:
        policy, pair = "fixed_pair", None
    r = check_semisingular_pairs(
        g, policy, pair=pair, threshold=args.threshold, exhaustive=args.exhaustive,
        budget=_budget(args.nodes, None, args.seconds),
        checkpoint_path=args.checkpoint or args.resume, resume=args.resume,
    )
    params = {"file": args.file, "policy": policy, "pair": pair, "threshold": r.threshold}
    return _report("check-pairs", g.name, params, r.to_dict(), nodes=r.nodes_expanded, seconds=r.wall_seconds,
                   status=r.status.value, deductions=deduce([r])), _status_code(r.passed, r.status.value)


def cmd_check_no_ovoids(args) -> tuple[dict, int]:
    g = load_geometry(args.file)
    r = check_no_ovoids(g, _budget(args.nodes))
    return _report("check-no-ovoids", g.name, {"file": args.file, "nodes": args.nodes}, r.to_dict(),
                   nodes=r.nodes_expanded, seconds=r.wall_seconds, status=r.status.value,
                   deductions=deduce([r])), _status_code(r.passed, r.status.value)


def cmd_aut(args) -> tuple[dict, int]:
    g = load_geometry(args.file)
    res = automorphisms(g, max_nodes=args.nodes)
    return _report("aut", g.name, {"file": args.file, "nodes": args.nodes}, res.to_dict(), nodes=res.nodes,
                   status=res.status.value), EXIT_OK if res.complete else EXIT_BUDGET


def cmd_identity(args) -> tuple[dict, int]:
    start = time.monotonic()
    rep = covering_identity(range(1, args.max + 1), range(1, args.max + 1))
    return _report("identity", None, {"max": args.max}, rep.to_dict(),
                   seconds=time.monotonic() - start), EXIT_OK if rep.passed else EXIT_FAILED


def cmd_report(args) -> tuple[dict, int]:
    """All checks behind the non-containment results, in one run."""
    start = time.monotonic()
    runs = []
    h2 = construct("split_cayley", 2)
    h3 = construct("split_cayley", 3)
    runs.append(check_no_ovoids(construct("dual_split_cayley", 2)))
    runs.append(check_h3(h3))
    runs.append(check_semisingular_pairs(h2, "all_pairs"))
    if not args.quick:
        runs.append(check_semisingular_pairs(construct("split_cayley", 4), "fixed_pair"))
        runs.append(check_no_ovoids(construct("dual_split_cayley", 4), _budget(args.nodes)))
    identity = covering_identity()
    deductions = deduce(runs)
    nodes = sum(r.nodes_expanded for r in runs)
    results = {"identity": identity.to_dict(), "checks": [r.to_dict() for r in runs]}
    cited = [r.geometry for r in runs if getattr(r, "check", "") == "no_ovoids" and not r.passed and r.solutions_found == 0]
    if cited:
        results["not_established_here"] = [
            f"absence of 1-ovoids in {name} beyond the node budget rests on an external exhaustive search"
            for name in cited
        ]
    failed = [r for r in runs if not r.passed and r.geometry not in cited]
    if failed or not identity.passed:
        code = EXIT_FAILED
    else:
        code = EXIT_BUDGET if cited else EXIT_OK
    status = Status.BUDGET_EXHAUSTED.value if cited else Status.COMPLETE.value
    return _report("report", None, {"quick": args.quick, "nodes": args.nodes}, results, nodes=nodes,
                   seconds=time.monotonic() - start, status=status, deductions=deductions), code


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subhex", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build a hexagon and optionally save it")
    p.add_argument("family", choices=FAMILIES + ("plane",))
    p.add_argument("q", type=int)
    p.add_argument("--out")
    p.add_argument("--seed-check", action="store_true", help="verify counts, axioms and automorphism group")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", help="check the generalized hexagon axioms")
    p.add_argument("file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("ovoids", help="count or list 1-ovoids")
    p.add_argument("file")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--count", action="store_true")
    mode.add_argument("--enumerate", action="store_true")
    p.add_argument("--limit", type=int)
    p.add_argument("--nodes", type=int)
    p.add_argument("--out", help="write ovoids as JSON lines")
    p.set_defaults(func=cmd_ovoids)

    p = sub.add_parser("semisingular", help="semi-singular hyperplanes with a given center")
    p.add_argument("file")
    p.add_argument("--center", type=int, required=True)
    p.add_argument("--count", action="store_true")
    p.add_argument("--nodes", type=int)
    p.set_defaults(func=cmd_semisingular)

    p = sub.add_parser("check-h3", help="ovoid x semi-singular intersections at a common point")
    p.add_argument("file")
    p.add_argument("--all-points", action="store_true")
    p.add_argument("--point", type=int, default=0)
    p.add_argument("--threshold", type=int)
    p.add_argument("--exhaustive", action="store_true")
    p.set_defaults(func=cmd_check_h3)

    p = sub.add_parser("check-pairs", help="semi-singular intersections for opposite centers")
    p.add_argument("file")
    which = p.add_mutually_exclusive_group()
    which.add_argument("--all-pairs", action="store_true")
    which.add_argument("--pair", type=int, nargs=2, metavar=("X1", "X2"))
    p.add_argument("--nodes", type=int)
    p.add_argument("--seconds", type=float)
    p.add_argument("--threshold", type=int)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--checkpoint", help="file to persist progress to")
    p.add_argument("--resume", help="checkpoint file to resume from (and keep updating)")
    p.set_defaults(func=cmd_check_pairs)

    p = sub.add_parser("check-no-ovoids", help="exhaustive search for 1-ovoids")
    p.add_argument("file")
    p.add_argument("--nodes", type=int)
    p.set_defaults(func=cmd_check_no_ovoids)

    p = sub.add_parser("aut", help="automorphism group order and generators")
    p.add_argument("file")
    p.add_argument("--nodes", type=int)
    p.set_defaults(func=cmd_aut)

    p = sub.add_parser("identity", help="check the hyperplane covering identity on a parameter grid")
    p.add_argument("--max", type=int, default=32)
    p.set_defaults(func=cmd_identity)

    p = sub.add_parser("report", help="run every check and list the deductions")
    p.add_argument("--json", action="store_true", help="compact single-line JSON")
    p.add_argument("--quick", action="store_true", help="skip the order-4 runs")
    p.add_argument("--nodes", type=int, default=10**7, help="node budget for the order-4 ovoid search")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report, code = args.func(args)
    except (SubhexError, ValueError, FileNotFoundError) as exc:
        report = {"command": args.command, "error": type(exc).__name__, "message": str(exc)}
        code = 1
    compact = getattr(args, "json", False)
    print(json.dumps(report, indent=None if compact else 2, default=str))
    return code


if __name__ == "__main__":
    sys.exit(main())

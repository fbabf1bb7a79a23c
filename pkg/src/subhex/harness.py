"""Computational checks behind the non-containment results, and their deductions.

Three searches are run against concrete hexagons:

* ``check_no_ovoids``: the geometry has no 1-ovoid at all;
* ``check_h3``: every 1-ovoid through ``p`` meets every semi-singular
  hyperplane centred at ``p`` in more than ``s`` points;
* ``check_semisingular_pairs``: semi-singular hyperplanes with opposite
  centres always meet in more than ``s + 1`` points.

Passed checks are turned into conclusions by a fixed rule table (``deduce``).
No ambient hexagon is ever built; the rules only record what follows.
"""

from __future__ import annotations

import enum
import json
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .bitset import intersection_sizes, pack_masks
from .errors import NoDistance3Pair, NoOvoidThroughPoint, UnsupportedPremiseCombination
from .exact_cover import UNLIMITED, SearchBudget, Status
from .geometry import IncidenceGeometry
from .hyperplanes import enumerate_ovoids, enumerate_semisingular, hexagon_order, ovoid_size, semisingular_size
from .symmetry import automorphisms, transitivity_report


class Rule(str, enum.Enum):
    NO_OVOIDS = "Cor-ovoids"
    DISTANCE_AT_MOST_ONE = "Lem-main2"
    SEMISINGULAR_PAIRS = "Lem-intersecting"


CONCLUSIONS = {
    Rule.NO_OVOIDS: "no semi-finite generalized hexagon contains {g} as a full subgeometry",
    Rule.DISTANCE_AT_MOST_ONE: (
        "S is finite for every generalized hexagon S containing {g} as a full subgeometry "
        "(each point of S is at distance at most 1 from {g})"
    ),
    Rule.SEMISINGULAR_PAIRS: "S = H: no generalized hexagon S contains H = {g} as a full proper subgeometry",
}


@dataclass
class Deduction:
    premises: list[str]
    conclusion: str
    rule: Rule

    def to_dict(self) -> dict:
        return {"premises": self.premises, "conclusion": self.conclusion, "rule": self.rule.value}


@dataclass
class NoOvoidsResult:
    geometry: str
    passed: bool
    status: Status
    solutions_found: int
    nodes_expanded: int
    wall_seconds: float
    thick: bool = True
    note: str = ""

    check = "no_ovoids"

    @property
    def check_id(self) -> str:
        return f"{self.check}:{self.geometry}"

    def to_dict(self) -> dict:
        out = asdict(self)
        out["status"] = self.status.value
        out["check"] = self.check
        return out


@dataclass
class IntersectionCheckResult:
    check: str
    geometry: str
    pair_policy: str
    pairs_checked: int
    hyperplane_pairs_checked: int
    min_intersection: int | None
    threshold: int
    passed: bool
    status: Status = Status.COMPLETE
    counterexample: dict | None = None
    symmetry_assumption_used: bool = False
    transitivity_source: str = "not needed"
    nodes_expanded: int = 0
    wall_seconds: float = 0.0
    thick: bool = True
    details: dict = field(default_factory=dict)

    @property
    def check_id(self) -> str:
        return f"{self.check}:{self.geometry}"

    def to_dict(self) -> dict:
        out = asdict(self)
        out["status"] = self.status.value
        return out


# -- the counting identity ----------------------------------------------------

@dataclass
class IdentityReport:
    cases: int
    failures: list[tuple[int, int, int]]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {"cases": self.cases, "failures": [list(f) for f in self.failures], "passed": self.passed}


def solve_overlap(s: int, t: int, n_l: int) -> Fraction:
    """Common overlap ``k`` of s+1 hyperplanes covering the hexagon (n_l of them ovoidal).

    The covering count ``n_l (A - k) + (s + 1 - n_l)(B - k) + k = (1 + s) A``
    is linear in ``k`` with coefficient ``-s``, so the solution is unique.
    """
    a = ovoid_size(s, t)
    b = semisingular_size(s, t)
    const = n_l * a + (s + 1 - n_l) * b
    return Fraction(const - (1 + s) * a, s)


def covering_identity(s_range=range(1, 33), t_range=range(1, 33), n_range=None) -> IdentityReport:
    """Check that ``k = s + 1 - n_l`` solves the covering count, uniquely, over a grid."""
    failures = []
    cases = 0
    for s in s_range:
        for t in t_range:
            ns = range(0, s + 2) if n_range is None else [n for n in n_range if 0 <= n <= s + 1]
            for n_l in ns:
                cases += 1
                k = s + 1 - n_l
                a, b = ovoid_size(s, t), semisingular_size(s, t)
                lhs = n_l * (a - k) + (s + 1 - n_l) * (b - k) + k
                unique = s != 0  # coefficient of k is -s
                if lhs != (1 + s) * a or not unique or solve_overlap(s, t, n_l) != k:
                    failures.append((s, t, n_l))
    return IdentityReport(cases, failures)


# -- no 1-ovoids --------------------------------------------------------------

def check_no_ovoids(geometry: IncidenceGeometry, budget: SearchBudget = UNLIMITED) -> NoOvoidsResult:
    """Passed only when the search is complete and found nothing."""
    s, t = hexagon_order(geometry)
    stream = enumerate_ovoids(geometry, SearchBudget(budget.max_nodes, 1, budget.wall_clock_limit))
    for _ in stream:
        pass
    out = stream.outcome
    found = out.solutions_found
    status = Status.COMPLETE if found else out.status
    passed = found == 0 and out.status is Status.COMPLETE
    note = ""
    if found:
        note = "1-ovoids exist"
    elif not passed:
        note = "search budget exhausted before the tree was exhausted; no 1-ovoid found so far"
    return NoOvoidsResult(
        geometry=geometry.name,
        passed=passed,
        status=status,
        solutions_found=found,
        nodes_expanded=out.nodes_expanded,
        wall_seconds=out.wall_seconds,
        thick=s >= 2 and t >= 2,
        note=note,
    )


# -- ovoid x semi-singular at a common point ---------------------------------

def _collect(stream) -> tuple[np.ndarray, int, Status]:
    masks = [h.points.words for h in stream]
    out = stream.outcome
    words = np.array(masks, dtype=np.uint64) if masks else np.zeros((0, 1), dtype=np.uint64)
    return words, out.nodes_expanded, out.status


def check_h3(
    geometry: IncidenceGeometry,
    policy: str = "fixed_point",
    point: int = 0,
    threshold: int | None = None,
    exhaustive: bool = False,
    budget: SearchBudget = UNLIMITED,
) -> IntersectionCheckResult:
    """Every 1-ovoid through p meets every semi-singular hyperplane centred at p in > s points."""
    start = time.monotonic()
    s, t = hexagon_order(geometry)
    if threshold is None:
        threshold = s
    if policy == "fixed_point":
        centers = [int(point)]
    elif policy == "all_points":
        centers = list(range(geometry.num_points))
    else:
        raise ValueError(f"unknown policy {policy!r}")

    ovoids, nodes, status = _collect(enumerate_ovoids(geometry, budget))
    result = IntersectionCheckResult(
        check="h3_intersections",
        geometry=geometry.name,
        pair_policy=policy,
        pairs_checked=0,
        hyperplane_pairs_checked=0,
        min_intersection=None,
        threshold=threshold,
        passed=False,
        status=status,
        thick=s >= 2,
        details={"num_ovoids": int(len(ovoids)), "semisingular_per_center": {}},
    )
    if status is not Status.COMPLETE:
        result.nodes_expanded = nodes
        result.wall_seconds = time.monotonic() - start
        return result

    best = None
    for p in centers:
        word, bit = divmod(p, 64)
        through = ovoids[(ovoids[:, word] >> np.uint64(bit)) & np.uint64(1) == 1]
        if len(through) == 0:
            raise NoOvoidThroughPoint(f"no 1-ovoid of {geometry.name} contains point {p}")
        family, n2, status = _collect(enumerate_semisingular(geometry, p, budget))
        nodes += n2
        result.details["semisingular_per_center"][str(p)] = int(len(family))
        if status is not Status.COMPLETE:
            result.status = status
            break
        result.pairs_checked += 1
        if len(family) == 0:
            continue
        sizes = intersection_sizes(through, family)
        result.hyperplane_pairs_checked += sizes.size
        low = int(sizes.min())
        best = low if best is None else min(best, low)
        if low <= threshold and result.counterexample is None:
            i, j = np.unravel_index(int(np.argmin(sizes)), sizes.shape)
            result.counterexample = {
                "center": p,
                "intersection": low,
                "ovoid": _indices(through[i], geometry.num_points),
                "semisingular": _indices(family[j], geometry.num_points),
            }
            if not exhaustive:
                break
    result.min_intersection = best
    result.passed = (
        result.status is Status.COMPLETE
        and result.counterexample is None
        and result.pairs_checked == len(centers)
    )
    result.nodes_expanded = nodes
    result.wall_seconds = time.monotonic() - start
    return result


def _indices(words: np.ndarray, n: int) -> list[int]:
    bits = np.unpackbits(np.ascontiguousarray(words, dtype="<u8").view(np.uint8), bitorder="little")
    return np.flatnonzero(bits[:n]).tolist()


# -- semi-singular pairs with opposite centres --------------------------------

def distance3_pairs(geometry: IncidenceGeometry) -> np.ndarray:
    a, b = np.nonzero(geometry.distances.dist == 3)
    return np.stack([a, b], axis=1)


def _transitivity(geometry: IncidenceGeometry, max_nodes: int | None, wall: float | None) -> tuple[bool, str]:
    aut = automorphisms(geometry, max_nodes=max_nodes, wall_clock_limit=wall)
    if not aut.complete:
        return False, "literature (automorphism search budget exhausted)"
    report = transitivity_report(geometry, aut)
    if report.point_transitive and report.pair_orbits.get(3) == 1:
        return True, f"verified (|Aut| = {aut.group_order}, one orbit on opposite pairs)"
    return False, "refuted: opposite pairs form several orbits"


def check_semisingular_pairs(
    geometry: IncidenceGeometry,
    policy: str = "fixed_pair",
    pair: tuple[int, int] | None = None,
    threshold: int | None = None,
    exhaustive: bool = False,
    budget: SearchBudget = UNLIMITED,
    checkpoint_path: str | Path | None = None,
    resume: str | Path | None = None,
    aut_nodes: int | None = None,
    aut_wall_clock: float | None = 600.0,
) -> IntersectionCheckResult:
    """All semi-singular hyperplanes with opposite centres meet in more than ``s + 1`` points."""
    start = time.monotonic()
    s, t = hexagon_order(geometry)
    if threshold is None:
        threshold = s + 1
    dist = geometry.distances.dist
    opposite = distance3_pairs(geometry)
    if len(opposite) == 0:
        raise NoDistance3Pair(f"{geometry.name} has no pair of points at distance 3")

    assumption = False
    source = "not needed"
    if policy == "all_pairs":
        pairs = [tuple(map(int, p)) for p in opposite]
    elif policy in ("fixed_pair", "orbit_representative"):
        if pair is None:
            pair = tuple(map(int, opposite[0]))
        if dist[pair[0], pair[1]] != 3:
            raise NoDistance3Pair(f"points {pair} are not at distance 3")
        pairs = [(int(pair[0]), int(pair[1]))]
        verified, source = _transitivity(geometry, aut_nodes, aut_wall_clock)
        if not verified:
            if policy == "orbit_representative":
                raise UnsupportedPremiseCombination(f"cannot use one orbit representative: {source}")
            assumption = True
    else:
        raise ValueError(f"unknown policy {policy!r}")

    state = {
        "geometry": geometry.name,
        "policy": policy,
        "pairs": [list(p) for p in pairs],
        "pair_index": 0,
        "x1_state": None,
        "x1_seen": 0,
        "min_intersection": None,
        "hyperplane_pairs_checked": 0,
        "pairs_checked": 0,
        "counterexample": None,
        "nodes": 0,
        "family_sizes": {},
    }
    if resume is not None and Path(resume).exists():
        saved = json.loads(Path(resume).read_text())
        if saved["pairs"] != state["pairs"] or saved["geometry"] != geometry.name:
            raise ValueError("checkpoint belongs to a different run")
        state = saved

    def save() -> None:
        if checkpoint_path is not None:
            tmp = Path(str(checkpoint_path) + ".tmp")
            tmp.write_text(json.dumps(state))
            tmp.replace(checkpoint_path)

    # one deadline for the whole check, including the transitivity search
    deadline = None if budget.wall_clock_limit is None else start + budget.wall_clock_limit
    cache: dict[int, np.ndarray] = {}
    keep_all = policy == "all_pairs"
    status = Status.COMPLETE

    def family(center: int) -> np.ndarray | None:
        nonlocal status
        if center in cache:
            return cache[center]
        remaining = None if deadline is None else max(deadline - time.monotonic(), 1e-6)
        words, nodes, st = _collect(
            enumerate_semisingular(geometry, center, SearchBudget(budget.max_nodes, None, remaining))
        )
        state["nodes"] += nodes
        if st is not Status.COMPLETE:
            status = st
            save()
            return None
        state["family_sizes"][str(center)] = int(len(words))
        if keep_all:
            cache[center] = words
        return words

    stop = False
    while state["pair_index"] < len(pairs) and not stop:
        x1, x2 = pairs[state["pair_index"]]
        second = family(x2)
        if second is None:
            break
        if keep_all and x2 not in cache:
            cache[x2] = second
        if x1 in cache:
            firsts = iter(cache[x1])
            stream = None
        else:
            stream = enumerate_semisingular(
                geometry, x1, SearchBudget(budget.max_nodes, None, None), checkpoint=state["x1_state"]
            )
            firsts = (h.points.words for h in stream)
        collected = []
        seen = 0 if stream is None else state["x1_seen"]
        for words in firsts:
            if stream is not None:
                seen += 1
                if keep_all:
                    collected.append(words)
            if len(second):
                sizes = intersection_sizes(words[None, :], second)[0]
                state["hyperplane_pairs_checked"] += int(sizes.size)
                low = int(sizes.min())
                if state["min_intersection"] is None or low < state["min_intersection"]:
                    state["min_intersection"] = low
                if low <= threshold and state["counterexample"] is None:
                    j = int(np.argmin(sizes))
                    state["counterexample"] = {
                        "centers": [x1, x2],
                        "intersection": low,
                        "first": _indices(words, geometry.num_points),
                        "second": _indices(second[j], geometry.num_points),
                    }
                    if not exhaustive:
                        stop = True
                        break
            if stream is not None and seen % 32 == 0:
                state["x1_state"] = stream.checkpoint()
                state["x1_seen"] = seen
                save()
            if deadline is not None and time.monotonic() > deadline:
                status = Status.BUDGET_EXHAUSTED
                if stream is not None:
                    state["x1_state"] = stream.checkpoint()
                    state["x1_seen"] = seen
                save()
                stop = True
                break
        if stop:
            break
        if stream is not None:
            stream_out = stream.outcome
            if stream_out is None or stream_out.status is not Status.COMPLETE:
                status = Status.BUDGET_EXHAUSTED
                state["x1_state"] = stream.checkpoint()
                state["x1_seen"] = seen
                save()
                break
            state["nodes"] += stream_out.nodes_expanded
            state["family_sizes"][str(x1)] = seen
            if keep_all:
                cache[x1] = np.array(collected, dtype=np.uint64).reshape(-1, second.shape[1])
        state["pairs_checked"] += 1
        state["pair_index"] += 1
        state["x1_state"] = None
        state["x1_seen"] = 0
        save()

    complete = status is Status.COMPLETE and state["pair_index"] == len(pairs)
    found_counter = state["counterexample"] is not None
    if found_counter:
        status = Status.COMPLETE
    low = state["min_intersection"]
    passed = complete and not found_counter and (low is None or low > threshold)
    sizes = state["family_sizes"]
    return IntersectionCheckResult(
        check="semisingular_pairs",
        geometry=geometry.name,
        pair_policy=policy,
        pairs_checked=state["pairs_checked"],
        hyperplane_pairs_checked=state["hyperplane_pairs_checked"],
        min_intersection=low,
        threshold=threshold,
        passed=passed,
        status=status if not found_counter else Status.COMPLETE,
        counterexample=state["counterexample"],
        symmetry_assumption_used=assumption,
        transitivity_source=source,
        nodes_expanded=state["nodes"],
        wall_seconds=time.monotonic() - start,
        thick=s >= 2,
        details={
            "semisingular_per_center": dict(sorted(sizes.items(), key=lambda kv: int(kv[0]))[:8]),
            "distinct_family_sizes": sorted({int(v) for v in sizes.values()}),
            "hyperplane_size": semisingular_size(s, t),
        },
    )


# -- deductions ---------------------------------------------------------------

def deduce(results) -> list[Deduction]:
    """Map passed checks to conclusions; failed or incomplete checks yield nothing."""
    out = []
    for r in results:
        if isinstance(r, NoOvoidsResult):
            rule = Rule.NO_OVOIDS
        elif isinstance(r, IntersectionCheckResult) and r.check == "h3_intersections":
            rule = Rule.DISTANCE_AT_MOST_ONE
        elif isinstance(r, IntersectionCheckResult) and r.check == "semisingular_pairs":
            rule = Rule.SEMISINGULAR_PAIRS
        else:
            raise UnsupportedPremiseCombination(f"no rule consumes {type(r).__name__}")
        if not r.passed or r.status is not Status.COMPLETE:
            continue
        if rule in (Rule.NO_OVOIDS, Rule.DISTANCE_AT_MOST_ONE) and not r.thick:
            raise UnsupportedPremiseCombination(f"{r.geometry}: finiteness argument needs thick lines")
        out.append(Deduction([r.check_id], CONCLUSIONS[rule].format(g=r.geometry), rule))
    return out

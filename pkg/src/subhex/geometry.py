"""Finite partial linear spaces: canonical storage, distances, axiom checks.

Points are the integers ``0 .. num_points-1`` and every line is stored as a
strictly ascending tuple of point indices.  Lines are kept in lexicographic
order, so two geometries with the same incidence structure and labelling
compare equal.
"""

from __future__ import annotations

import json
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import shortest_path

from .bitset import PointSet
from .errors import (
    Disconnected,
    DuplicateLine,
    EmptySelection,
    LineTooShort,
    NonUniformLineSize,
    NonUniformPointDegree,
    NotNearPolygon,
    OutOfRangeIndex,
    RepeatedCollinearPair,
    ShortInducedLine,
    ThinPoint,
)

INF = np.iinfo(np.int32).max


@dataclass(frozen=True)
class IncidenceGeometry:
    num_points: int
    lines: tuple[tuple[int, ...], ...]
    name: str = field(default="", compare=False)

    @property
    def num_lines(self) -> int:
        return len(self.lines)

    @cached_property
    def point_lines(self) -> tuple[tuple[int, ...], ...]:
        """For each point, the ascending indices of the lines through it."""
        through: list[list[int]] = [[] for _ in range(self.num_points)]
        for i, line in enumerate(self.lines):
            for p in line:
                through[p].append(i)
        return tuple(tuple(ls) for ls in through)

    @cached_property
    def incidence(self) -> sparse.csr_matrix:
        """Point-by-line 0/1 incidence matrix."""
        rows = np.fromiter((p for line in self.lines for p in line), dtype=np.int64)
        cols = np.repeat(np.arange(self.num_lines), [len(line) for line in self.lines])
        data = np.ones(rows.size, dtype=np.int32)
        return sparse.csr_matrix((data, (rows, cols)), shape=(self.num_points, self.num_lines))

    @cached_property
    def collinearity(self) -> sparse.csr_matrix:
        """Adjacency matrix of the point graph."""
        inc = self.incidence
        adj = (inc @ inc.T).tocsr()
        adj.setdiag(0)
        adj.eliminate_zeros()
        adj.data[:] = 1
        return adj

    @cached_property
    def distances(self) -> DistanceOracle:
        return DistanceOracle(self)

    @cached_property
    def line_masks(self) -> np.ndarray:
        """Boolean ``(num_lines, num_points)`` membership table."""
        return self.incidence.T.toarray().astype(bool)

    def line_sizes(self) -> np.ndarray:
        return np.array([len(line) for line in self.lines], dtype=np.int64)

    def point_degrees(self) -> np.ndarray:
        return np.array([len(ls) for ls in self.point_lines], dtype=np.int64)

    def line_groups(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Lines bucketed by size: ``(line indices, (m, k) point array)`` pairs."""
        sizes = self.line_sizes()
        groups = []
        for k in np.unique(sizes):
            idx = np.flatnonzero(sizes == k)
            groups.append((idx, np.array([self.lines[i] for i in idx], dtype=np.int64)))
        return groups

    def pointset(self, indices: Iterable[int]) -> PointSet:
        return PointSet.from_indices(self.num_points, indices)

    def __repr__(self) -> str:
        label = f"{self.name!r}, " if self.name else ""
        return f"IncidenceGeometry({label}points={self.num_points}, lines={self.num_lines})"


def build_geometry(num_points: int, raw_lines: Iterable[Iterable[int]], name: str = "") -> IncidenceGeometry:
    """Validate and canonicalize a partial linear space."""
    num_points = int(num_points)
    lines = []
    for raw in raw_lines:
        pts = sorted({int(p) for p in raw})
        if len(pts) < 2:
            raise LineTooShort(f"line {list(raw)!r} has fewer than 2 points")
        if pts[0] < 0 or pts[-1] >= num_points:
            raise OutOfRangeIndex(f"line {pts} has an index outside 0..{num_points - 1}")
        lines.append(tuple(pts))
    lines.sort()
    for a, b in zip(lines, lines[1:]):
        if a == b:
            raise DuplicateLine(f"line {a} occurs twice")
    if lines:
        pairs = np.fromiter(
            (x * num_points + y for line in lines for i, x in enumerate(line) for y in line[i + 1:]),
            dtype=np.int64,
        )
        uniq, counts = np.unique(pairs, return_counts=True)
        if counts.max(initial=0) > 1:
            bad = int(uniq[np.argmax(counts)])
            raise RepeatedCollinearPair(
                f"points {bad // num_points} and {bad % num_points} lie on two common lines"
            )
    return IncidenceGeometry(num_points, tuple(lines), name)


def dual(geometry: IncidenceGeometry, name: str | None = None) -> IncidenceGeometry:
    """Swap points and lines; line ``i`` of ``geometry`` becomes point ``i``."""
    for p, ls in enumerate(geometry.point_lines):
        if len(ls) < 2:
            raise ThinPoint(f"point {p} lies on {len(ls)} line(s)")
    if name is None:
        name = f"{geometry.name}^D" if geometry.name else ""
    return build_geometry(geometry.num_lines, geometry.point_lines, name)


def relabel_doubly_lexical(geometry: IncidenceGeometry) -> tuple[IncidenceGeometry, np.ndarray]:
    """Relabel points so that both lines and points are lexicographically sorted.

    Returns the relabelled geometry and ``old_of_new`` (new index -> old index).
    After this, ``dual(dual(g)) == g`` exactly.
    """
    n = geometry.num_points
    old_of_new = np.arange(n)
    current = geometry
    for _ in range(4 * (n + geometry.num_lines) + 10):
        order = sorted(range(n), key=current.point_lines.__getitem__)
        if order == list(range(n)):
            return IncidenceGeometry(current.num_points, current.lines, geometry.name), old_of_new
        new_index = np.empty(n, dtype=np.int64)
        new_index[order] = np.arange(n)
        current = build_geometry(n, ([int(new_index[p]) for p in line] for line in current.lines), geometry.name)
        old_of_new = old_of_new[order]
    raise RuntimeError("doubly lexical relabelling did not converge")


class DistanceOracle:
    """All-pairs point-graph distances, computed once."""

    def __init__(self, geometry: IncidenceGeometry) -> None:
        self.geometry = geometry
        raw = shortest_path(geometry.collinearity, method="D", unweighted=True, directed=False)
        dist = np.full(raw.shape, INF, dtype=np.int32)
        finite = np.isfinite(raw)
        dist[finite] = raw[finite].astype(np.int32)
        dist.flags.writeable = False
        self.dist = dist

    def __call__(self, x: int, y: int) -> int:
        return int(self.dist[x, y])

    @property
    def connected(self) -> bool:
        return bool((self.dist != INF).all())

    @property
    def diameter(self) -> int:
        return int(self.dist.max()) if self.dist.size else 0

    def from_point(self, p: int) -> np.ndarray:
        return self.dist[p]

    def gamma(self, p: int, i: int) -> np.ndarray:
        return np.flatnonzero(self.dist[p] == i)

    def to_set(self, points: Iterable[int] | PointSet) -> np.ndarray:
        """Distance from every point to the nearest member of ``points``."""
        idx = points.indices() if isinstance(points, PointSet) else np.fromiter(points, dtype=np.int64)
        if idx.size == 0:
            raise EmptySelection("distance to an empty set is undefined")
        return self.dist[:, idx].min(axis=1)

    def census(self, p: int) -> tuple[int, ...]:
        row = self.dist[p]
        finite = row[row != INF]
        return tuple(np.bincount(finite).tolist())

    def line_distances(self, p: int) -> np.ndarray:
        """Distance from ``p`` to each line (minimum over the line's points)."""
        out = np.empty(self.geometry.num_lines, dtype=np.int32)
        row = self.dist[p]
        for idx, arr in self.geometry.line_groups():
            out[idx] = row[arr].min(axis=1)
        return out


def distances_from(geometry: IncidenceGeometry, p: int) -> np.ndarray:
    return geometry.distances.from_point(p)


def gamma(geometry: IncidenceGeometry, p: int, i: int) -> np.ndarray:
    """Points at distance exactly ``i`` from ``p``."""
    if i < 0:
        raise ValueError("distance must be non-negative")
    return geometry.distances.gamma(p, i)


def nearest_point_on_line(geometry: IncidenceGeometry, p: int, line: int) -> tuple[int, int]:
    pts = np.asarray(geometry.lines[line])
    d = geometry.distances.dist[p, pts]
    best = d.min()
    hits = pts[d == best]
    if hits.size != 1:
        raise NotNearPolygon(f"point {p} has {hits.size} nearest points on line {line}: {hits.tolist()}")
    return int(hits[0]), int(best)


@dataclass(frozen=True)
class GeometryProfile:
    s: int | None
    t: int | None
    num_points: int
    num_lines: int
    diameter: int | None = None
    incidence_diameter: int | None = None
    incidence_girth: int | None = None


def detect_order(geometry: IncidenceGeometry) -> tuple[int, int]:
    sizes = np.unique(geometry.line_sizes())
    if sizes.size != 1:
        raise NonUniformLineSize(f"line sizes {sizes.tolist()}")
    degrees = np.unique(geometry.point_degrees())
    if degrees.size != 1:
        raise NonUniformPointDegree(f"point degrees {degrees.tolist()}")
    return int(sizes[0]) - 1, int(degrees[0]) - 1


def incidence_graph(geometry: IncidenceGeometry) -> sparse.csr_matrix:
    """Bipartite adjacency: vertices ``0..P-1`` are points, ``P..P+L-1`` lines."""
    inc = geometry.incidence
    return sparse.bmat([[None, inc], [inc.T, None]], format="csr")


def _graph_girth(adj: sparse.csr_matrix, dist: np.ndarray) -> int | None:
    """Exact girth from an all-pairs distance matrix.

    A vertex ``w`` with two neighbours one step closer to a root ``r`` closes
    an even cycle of length at most ``2 d(r, w)``; an edge between two vertices
    equidistant from ``r`` closes an odd one of length at most ``2 d + 1``.  The
    minimum over all roots is attained by a root on a shortest cycle.
    """
    best = None
    adj = adj.astype(np.float64)
    finite = dist[dist != INF]
    for k in range(int(finite.max(initial=0)) + 1):
        level = (dist == k).astype(np.float64)
        counts = np.asarray((adj @ level.T).T)
        if (counts[level.astype(bool)] >= 1).any():
            cand = 2 * k + 1
            best = cand if best is None else min(best, cand)
        nxt = dist == k + 1
        if (counts[nxt] >= 2).any():
            cand = 2 * (k + 1)
            best = cand if best is None else min(best, cand)
        if best is not None and best <= 2 * (k + 1):
            break
    return best


def incidence_graph_stats(geometry: IncidenceGeometry) -> tuple[int, int | None]:
    """Diameter and girth of the point/line incidence graph."""
    adj = incidence_graph(geometry)
    raw = shortest_path(adj, method="D", unweighted=True, directed=False)
    if not np.isfinite(raw).all():
        raise Disconnected("incidence graph is disconnected")
    dist = raw.astype(np.int32)
    return int(dist.max()), _graph_girth(adj, dist)


@dataclass
class VerificationReport:
    name: str
    num_points: int
    num_lines: int
    order: tuple[int, int] | None
    censuses: list[tuple[int, ...]]
    route_a: bool
    route_b: bool
    incidence_diameter: int | None = None
    incidence_girth: int | None = None
    thick: bool = False
    failures: list[str] = field(default_factory=list)

    @property
    def agree(self) -> bool:
        return self.route_a == self.route_b

    @property
    def passed(self) -> bool:
        return self.route_a and self.route_b

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "num_points": self.num_points,
            "num_lines": self.num_lines,
            "order": list(self.order) if self.order else None,
            "censuses": [list(c) for c in self.censuses],
            "route_a": self.route_a,
            "route_b": self.route_b,
            "agree": self.agree,
            "passed": self.passed,
            "incidence_diameter": self.incidence_diameter,
            "incidence_girth": self.incidence_girth,
            "thick": self.thick,
            "failures": list(self.failures),
        }


def near_polygon_failures(geometry: IncidenceGeometry, diameter: int) -> list[str]:
    """NP1 and NP2 violations (empty list when both hold)."""
    oracle = geometry.distances
    if not oracle.connected:
        return ["NP1: point graph is disconnected"]
    failures = []
    if oracle.diameter != diameter:
        failures.append(f"NP1: point graph has diameter {oracle.diameter}, expected {diameter}")
    for idx, arr in geometry.line_groups():
        sub = oracle.dist[:, arr]
        nearest = (sub == sub.min(axis=2, keepdims=True)).sum(axis=2)
        bad = np.argwhere(nearest != 1)
        if bad.size:
            p, j = bad[0]
            failures.append(f"NP2: point {p} has no unique nearest point on line {int(idx[j])}")
            break
    return failures


def _route_b_failures(geometry: IncidenceGeometry) -> list[str]:
    failures = near_polygon_failures(geometry, 3)
    if failures and failures[0].startswith("NP1: point graph is disconnected"):
        return failures
    degrees = geometry.point_degrees()
    if (degrees < 2).any():
        failures.append(f"point {int(np.argmin(degrees))} lies on fewer than two lines")
    adj = geometry.collinearity
    common = (adj @ adj).toarray()
    at2 = geometry.distances.dist == 2
    if (common[at2] != 1).any():
        x, y = np.argwhere(at2 & (common != 1))[0]
        failures.append(f"points {x} and {y} at distance 2 have {common[x, y]} common neighbours")
    return failures


def verify_generalized_hexagon(geometry: IncidenceGeometry, routes: str = "ab") -> VerificationReport:
    """Check the generalized-hexagon axioms by two independent routes.

    Route ``a`` asks for incidence-graph diameter 6 and girth 12.  Route ``b``
    checks the near-hexagon axioms, unique common neighbours at distance 2 and
    that every point is on at least two lines.
    """
    try:
        order = detect_order(geometry)
    except (NonUniformLineSize, NonUniformPointDegree):
        order = None
    failures: list[str] = []
    diam = girth = None
    route_a = route_b = False
    if "a" in routes:
        try:
            diam, girth = incidence_graph_stats(geometry)
        except Disconnected:
            failures.append("a: incidence graph is disconnected")
        else:
            route_a = diam == 6 and girth == 12
            if not route_a:
                failures.append(f"a: incidence diameter {diam}, girth {girth}")
    if "b" in routes:
        b_fail = _route_b_failures(geometry)
        route_b = not b_fail
        failures.extend(f"b: {f}" for f in b_fail)
    if routes == "a":
        route_b = route_a
    elif routes == "b":
        route_a = route_b
    oracle = geometry.distances
    censuses = sorted({oracle.census(p) for p in range(geometry.num_points)})
    thick = bool((geometry.line_sizes() >= 3).all() and (geometry.point_degrees() >= 3).all())
    return VerificationReport(
        name=geometry.name,
        num_points=geometry.num_points,
        num_lines=geometry.num_lines,
        order=order,
        censuses=censuses,
        route_a=route_a,
        route_b=route_b,
        incidence_diameter=diam,
        incidence_girth=girth,
        thick=thick,
        failures=failures,
    )


def hexagon_census(s: int, t: int) -> tuple[int, int, int, int]:
    return (1, s * (t + 1), s * s * t * (t + 1), s ** 3 * t * t)


def induced_subgeometry(
    geometry: IncidenceGeometry,
    keep_points: Iterable[int] | PointSet,
    line_rule: Callable[[int], bool],
    name: str = "",
) -> tuple[IncidenceGeometry, np.ndarray, np.ndarray]:
    """Restrict to ``keep_points`` and the lines accepted by ``line_rule``.

    Returns the reindexed geometry together with ``point_map`` and
    ``line_map`` arrays sending new indices back to indices of ``geometry``.
    """
    if isinstance(keep_points, PointSet):
        keep = keep_points.indices()
    else:
        keep = np.unique(np.fromiter((int(p) for p in keep_points), dtype=np.int64))
    if keep.size == 0:
        raise EmptySelection("no points selected")
    new_index = np.full(geometry.num_points, -1, dtype=np.int64)
    new_index[keep] = np.arange(keep.size)
    restricted = {}
    for i, line in enumerate(geometry.lines):
        if not line_rule(i):
            continue
        pts = tuple(int(new_index[p]) for p in line if new_index[p] >= 0)
        if len(pts) < 2:
            raise ShortInducedLine(f"line {i} keeps only {len(pts)} point(s)")
        restricted[pts] = i
    sub = build_geometry(keep.size, restricted.keys(), name)
    line_map = np.array([restricted[line] for line in sub.lines], dtype=np.int64)
    return sub, keep, line_map


def opposite_lines(geometry: IncidenceGeometry, l1: int, l2: int) -> bool:
    """Lines at maximal distance: nearest points two apart in a hexagon."""
    a = np.asarray(geometry.lines[l1])
    b = np.asarray(geometry.lines[l2])
    return int(geometry.distances.dist[np.ix_(a, b)].min()) == 2


# -- file formats -----------------------------------------------------------

def to_dict(geometry: IncidenceGeometry) -> dict:
    return {"name": geometry.name, "num_points": geometry.num_points, "lines": [list(l) for l in geometry.lines]}


def from_dict(data: dict) -> IncidenceGeometry:
    return build_geometry(int(data["num_points"]), data["lines"], str(data.get("name", "")))


def to_text(geometry: IncidenceGeometry) -> str:
    out = [f"p {geometry.num_points} l {geometry.num_lines}"]
    out.extend(" ".join(map(str, line)) for line in geometry.lines)
    return "\n".join(out) + "\n"


def from_text(text: str, name: str = "") -> IncidenceGeometry:
    rows = [r.split() for r in text.splitlines() if r.strip() and not r.lstrip().startswith("#")]
    if not rows or rows[0][0] != "p" or len(rows[0]) != 4 or rows[0][2] != "l":
        raise ValueError("expected header 'p <num_points> l <num_lines>'")
    num_points, num_lines = int(rows[0][1]), int(rows[0][3])
    body = [[int(x) for x in r] for r in rows[1:]]
    if len(body) != num_lines:
        raise ValueError(f"header announces {num_lines} lines, found {len(body)}")
    return build_geometry(num_points, body, name)


def save(geometry: IncidenceGeometry, path: str | Path) -> None:
    path = Path(path)
    if path.suffix == ".txt":
        path.write_text(to_text(geometry))
    else:
        path.write_text(json.dumps(to_dict(geometry)) + "\n")


def load(path: str | Path) -> IncidenceGeometry:
    path = Path(path)
    text = path.read_text()
    if text.lstrip().startswith("{"):
        return from_dict(json.loads(text))
    return from_text(text, name=path.stem)


def lines_through(geometry: IncidenceGeometry, points: Sequence[int]) -> list[int]:
    """Indices of lines containing every point in ``points``."""
    common = set(geometry.point_lines[points[0]])
    for p in points[1:]:
        common &= set(geometry.point_lines[p])
    return sorted(common)

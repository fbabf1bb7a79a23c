"""Hyperplanes, 1-ovoids and valuations of generalized hexagons."""

from __future__ import annotations

import enum
import json
from collections.abc import Callable, Iterable, Iterator
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bitset import PointSet
from .errors import NotAHexagon, NotValuationType
from .exact_cover import UNLIMITED, SearchBudget, SearchOutcome, SolutionStream, hitting_instance
from .geometry import IncidenceGeometry, detect_order, induced_subgeometry, verify_generalized_hexagon


class HyperplaneClass(str, enum.Enum):
    SINGULAR = "singular"
    SEMI_SINGULAR = "semi_singular"
    OVOIDAL = "ovoidal"
    OTHER = "other"
    UNCLASSIFIED = "unclassified"


@dataclass(frozen=True)
class Hyperplane:
    points: PointSet
    kind: HyperplaneClass = HyperplaneClass.UNCLASSIFIED
    center: int | None = None

    def __len__(self) -> int:
        return len(self.points)

    def to_dict(self) -> dict:
        return {"points": self.points.indices().tolist(), "class": self.kind.value, "center": self.center}


@dataclass(frozen=True)
class OvoidSet:
    points: PointSet
    host: IncidenceGeometry = field(repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class Valuation:
    values: np.ndarray
    max_value: int

    @classmethod
    def from_values(cls, values: Iterable[int]) -> Valuation:
        arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=np.int64)
        return cls(arr, int(arr.max()))

    def hyperplane(self) -> PointSet:
        """Points of non-maximal value."""
        return PointSet.from_mask(self.values < self.max_value)


# -- host checks ------------------------------------------------------------

def hexagon_order(geometry: IncidenceGeometry) -> tuple[int, int]:
    """Order ``(s, t)`` of a verified generalized hexagon; the verdict is cached."""
    cached = geometry.__dict__.get("_hexagon_order")
    if cached is None:
        report = verify_generalized_hexagon(geometry, routes="b")
        if not report.passed:
            raise NotAHexagon(f"{geometry.name or 'geometry'} is not a generalized hexagon: {report.failures}")
        cached = detect_order(geometry)
        geometry.__dict__["_hexagon_order"] = cached
    return cached


def singular_size(s: int, t: int) -> int:
    return 1 + s * (t + 1) + s * s * t * (t + 1)


def semisingular_size(s: int, t: int) -> int:
    return 1 + s * (t + 1) + s * s * t * t


def ovoid_size(s: int, t: int) -> int:
    return 1 + s * t + s * s * t * t


def _as_mask(geometry: IncidenceGeometry, points) -> np.ndarray:
    if isinstance(points, Hyperplane):
        points = points.points
    if isinstance(points, PointSet):
        return points.mask()
    if isinstance(points, np.ndarray) and points.dtype == bool:
        if points.shape != (geometry.num_points,):
            raise ValueError("boolean mask has the wrong length")
        return points
    mask = np.zeros(geometry.num_points, dtype=bool)
    mask[np.fromiter((int(p) for p in points), dtype=np.int64)] = True
    return mask


def line_hits(geometry: IncidenceGeometry, points) -> np.ndarray:
    """Number of points of ``points`` on each line."""
    mask = _as_mask(geometry, points).astype(np.int64)
    return np.asarray(geometry.incidence.T @ mask).ravel()


def is_hyperplane(geometry: IncidenceGeometry, points) -> bool:
    mask = _as_mask(geometry, points)
    if mask.all():
        return False
    hits = line_hits(geometry, mask)
    return bool(((hits == 1) | (hits == geometry.line_sizes())).all())


def is_one_ovoid(geometry: IncidenceGeometry, points) -> bool:
    return bool((line_hits(geometry, points) == 1).all())


# -- the three families -----------------------------------------------------

def singular_hyperplane(geometry: IncidenceGeometry, p: int) -> Hyperplane:
    hexagon_order(geometry)
    mask = geometry.distances.from_point(p) <= 2
    return Hyperplane(PointSet.from_mask(mask), HyperplaneClass.SINGULAR, int(p))


class MappedStream:
    """Wraps a :class:`SolutionStream`, converting each exact cover as it arrives."""

    def __init__(self, stream: SolutionStream, convert: Callable[[tuple[int, ...]], object]) -> None:
        self.stream = stream
        self.convert = convert

    @property
    def outcome(self) -> SearchOutcome | None:
        return self.stream.outcome

    def stop(self) -> None:
        self.stream.stop()

    def checkpoint(self) -> dict:
        return self.stream.checkpoint()

    def __iter__(self) -> Iterator:
        for sol in self.stream:
            yield self.convert(sol)


def enumerate_ovoids(
    geometry: IncidenceGeometry,
    budget: SearchBudget = UNLIMITED,
    checkpoint: dict | None = None,
    on_chunk=None,
) -> MappedStream:
    """Stream every 1-ovoid (exact hitting set of the lines)."""
    inst = hitting_instance(geometry)

    def convert(rows: tuple[int, ...]) -> OvoidSet:
        pts = PointSet.from_indices(geometry.num_points, rows)
        if not is_one_ovoid(geometry, pts):
            raise AssertionError(f"search produced a non-ovoid {rows}")
        return OvoidSet(pts, geometry)

    return MappedStream(SolutionStream(inst, budget, checkpoint, on_chunk), convert)


def gamma3_subgeometry(geometry: IncidenceGeometry, p: int) -> tuple[IncidenceGeometry, np.ndarray, np.ndarray]:
    """Points opposite ``p`` with the traces of the lines at distance 2 from ``p``."""
    hexagon_order(geometry)
    oracle = geometry.distances
    line_dist = oracle.line_distances(p)
    name = f"{geometry.name}:Gamma3({p})" if geometry.name else f"Gamma3({p})"
    return induced_subgeometry(geometry, oracle.gamma(p, 3), lambda i: line_dist[i] == 2, name)


def enumerate_semisingular(
    geometry: IncidenceGeometry,
    p: int,
    budget: SearchBudget = UNLIMITED,
    checkpoint: dict | None = None,
) -> MappedStream:
    """Stream the semi-singular hyperplanes with center ``p``."""
    s, t = hexagon_order(geometry)
    sub, point_map, _ = gamma3_subgeometry(geometry, p)
    base = geometry.distances.from_point(p) <= 1
    want = semisingular_size(s, t)

    def convert(rows: tuple[int, ...]) -> Hyperplane:
        mask = base.copy()
        mask[point_map[list(rows)]] = True
        if int(mask.sum()) != want or not is_hyperplane(geometry, mask):
            raise AssertionError(f"semi-singular candidate at {p} fails validation")
        return Hyperplane(PointSet.from_mask(mask), HyperplaneClass.SEMI_SINGULAR, int(p))

    return MappedStream(SolutionStream(hitting_instance(sub), budget, checkpoint), convert)


# -- valuations -------------------------------------------------------------

@dataclass
class ValuationReport:
    pv1: bool
    pv2: bool
    pv3: bool
    max_value: int
    witnesses: dict[str, object] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.pv1 and self.pv2 and self.pv3

    def first_failure(self) -> str | None:
        for axiom in ("PV1", "PV2", "PV3"):
            if not getattr(self, axiom.lower()):
                return axiom
        return None


def check_valuation_axioms(geometry: IncidenceGeometry, values) -> ValuationReport:
    """Evaluate PV1-PV3, recording a witness line or point for each failure."""
    if isinstance(values, Valuation):
        values = values.values
    f = np.asarray(values, dtype=np.int64)
    if f.shape != (geometry.num_points,):
        raise ValueError("values must be given on every point")
    top = int(f.max())
    witnesses: dict[str, object] = {}

    pv1 = bool((f == 0).any())
    if not pv1:
        witnesses["PV1"] = int(f.min())

    pv2 = True
    lower_lines = np.zeros(geometry.num_points, dtype=np.int64)
    for idx, arr in geometry.line_groups():
        vals = f[arr]
        low = vals.min(axis=1, keepdims=True)
        good = ((vals == low).sum(axis=1) == 1) & ((vals == low + 1).sum(axis=1) == arr.shape[1] - 1)
        if pv2 and not good.all():
            pv2 = False
            witnesses["PV2"] = int(idx[np.flatnonzero(~good)[0]])
        for j in range(arr.shape[1]):
            has_lower = (vals == (vals[:, j:j + 1] - 1)).any(axis=1)
            np.add.at(lower_lines, arr[:, j], has_lower.astype(np.int64))
    bad3 = np.flatnonzero((f < top) & (lower_lines > 1))
    pv3 = bad3.size == 0
    if not pv3:
        witnesses["PV3"] = int(bad3[0])
    return ValuationReport(pv1, pv2, pv3, top, witnesses)


def valuation_from_hyperplane(geometry: IncidenceGeometry, hyperplane) -> Valuation:
    """Recover ``f = M - d(., complement)`` and insist that it is a valuation."""
    hexagon_order(geometry)
    mask = _as_mask(geometry, hyperplane)
    if not is_hyperplane(geometry, mask):
        raise ValueError("not a hyperplane")
    to_outside = geometry.distances.to_set(np.flatnonzero(~mask))
    top = int(to_outside.max())
    values = top - to_outside.astype(np.int64)
    report = check_valuation_axioms(geometry, values)
    axiom = report.first_failure()
    if axiom is not None:
        raise NotValuationType(axiom, report.witnesses[axiom])
    return Valuation(values, top)


def classical_valuation(geometry: IncidenceGeometry, p: int) -> Valuation:
    return Valuation.from_values(geometry.distances.from_point(p).astype(np.int64))


def ovoidal_valuation(geometry: IncidenceGeometry, ovoid) -> Valuation:
    mask = _as_mask(geometry, ovoid)
    return Valuation.from_values(np.where(mask, 0, 1))


def semi_classical_valuation(geometry: IncidenceGeometry, p: int, opposite_ovoid) -> Valuation:
    """``d(p, .)`` up to distance 2, then 1 on the ovoid of Gamma_3(p) and 2 elsewhere."""
    dist = geometry.distances.from_point(p).astype(np.int64)
    mask = _as_mask(geometry, opposite_ovoid)
    values = np.where(dist <= 2, dist, np.where(mask, 1, 2))
    return Valuation.from_values(values)


# -- classification ---------------------------------------------------------

def _semisingular_center(geometry: IncidenceGeometry, mask: np.ndarray) -> int | None:
    s, t = hexagon_order(geometry)
    dist = geometry.distances.dist
    near = dist <= 1
    # candidates: ball of radius 1 inside X and no point of Gamma_2 in X
    inside = (near & mask[None, :]).sum(axis=1) == 1 + s * (t + 1)
    clear = ((dist == 2) & mask[None, :]).sum(axis=1) == 0
    for p in np.flatnonzero(inside & clear):
        sub, point_map, _ = gamma3_subgeometry(geometry, int(p))
        if is_one_ovoid(sub, mask[point_map]):
            return int(p)
    return None


def classify_hyperplane(geometry: IncidenceGeometry, points) -> Hyperplane:
    """Tag a hyperplane as singular, ovoidal, semi-singular or other."""
    s, t = hexagon_order(geometry)
    mask = _as_mask(geometry, points)
    pts = PointSet.from_mask(mask)
    size = int(mask.sum())
    if size == singular_size(s, t):
        balls = geometry.distances.dist <= 2
        hits = np.flatnonzero((balls == mask[None, :]).all(axis=1))
        if hits.size:
            return Hyperplane(pts, HyperplaneClass.SINGULAR, int(hits[0]))
    if is_one_ovoid(geometry, mask):
        return Hyperplane(pts, HyperplaneClass.OVOIDAL)
    if size == semisingular_size(s, t):
        center = _semisingular_center(geometry, mask)
        if center is not None:
            return Hyperplane(pts, HyperplaneClass.SEMI_SINGULAR, center)
    return Hyperplane(pts, HyperplaneClass.OTHER)


# -- file format ------------------------------------------------------------

def write_hyperplanes(path: Path | str, hyperplanes: Iterable[Hyperplane]) -> int:
    n = 0
    with open(path, "w") as fh:
        for h in hyperplanes:
            fh.write(json.dumps(h.to_dict()) + "\n")
            n += 1
    return n


def read_hyperplanes(geometry: IncidenceGeometry, path: Path | str) -> list[Hyperplane]:
    out = []
    for lineno, text in enumerate(Path(path).read_text().splitlines(), 1):
        if not text.strip():
            continue
        data = json.loads(text)
        pts = PointSet.from_indices(geometry.num_points, data["points"])
        if not is_hyperplane(geometry, pts):
            raise ValueError(f"line {lineno}: not a hyperplane of {geometry.name or 'the geometry'}")
        out.append(Hyperplane(pts, HyperplaneClass(data.get("class", "unclassified")), data.get("center")))
    return out

"""Coordinate constructions of PG(2,q), the flag hexagons and H(q)."""

from __future__ import annotations

from functools import cache

import numpy as np

from .errors import ConstructionSelfCheckFailed, UnsupportedOrder
from .fields import SUPPORTED_ORDERS, encode, finite_field, normalize, projective_points
from .geometry import (
    GeometryProfile,
    IncidenceGeometry,
    build_geometry,
    detect_order,
    dual,
    hexagon_census,
    relabel_doubly_lexical,
    verify_generalized_hexagon,
)

FAMILIES = ("split_cayley", "dual_split_cayley", "flag", "dual_flag")

# Grassmann-coordinate pairs (i, j), (k, l) with p_ij = p_kl on every line of H(q)
SPLIT_CAYLEY_RELATIONS = (
    ((1, 2), (3, 4)),
    ((5, 4), (3, 2)),
    ((2, 0), (3, 5)),
    ((6, 5), (3, 0)),
    ((0, 1), (3, 6)),
    ((4, 6), (3, 1)),
)


def _check_order(q: int) -> None:
    if q not in SUPPORTED_ORDERS:
        raise UnsupportedOrder(f"q = {q} is not supported; choose from {SUPPORTED_ORDERS}")


@cache
def _plane_incidence(q: int) -> tuple[np.ndarray, list[tuple[int, ...]]]:
    field = finite_field(q)
    pts = projective_points(field, 3)
    # the line with coordinates u holds the points x with u . x = 0
    prods = field.mul[pts[:, None, :], pts[None, :, :]]
    dots = field.add[field.add[prods[..., 0], prods[..., 1]], prods[..., 2]]
    lines = [tuple(np.flatnonzero(dots[u] == 0).tolist()) for u in range(len(pts))]
    return pts, lines


def projective_plane(q: int) -> IncidenceGeometry:
    _check_order(q)
    pts, lines = _plane_incidence(q)
    return build_geometry(len(pts), lines, f"PG(2,{q})")


def flag_hexagon(q: int) -> tuple[IncidenceGeometry, IncidenceGeometry]:
    """``(H(1,q), H(q,1))`` from the incidence graph of PG(2,q)."""
    _check_order(q)
    pts, lines = _plane_incidence(q)
    n = len(pts)
    flags = [(p, n + u) for u, line in enumerate(lines) for p in line]
    thin = build_geometry(2 * n, flags, f"H(1,{q})")
    thin, _ = relabel_doubly_lexical(thin)
    return thin, dual(thin, name=f"H({q},1)")


def quadric_points(q: int) -> np.ndarray:
    """Points of X0X4 + X1X5 + X2X6 = X3^2 in PG(6,q), lexicographic order."""
    field = finite_field(q)
    pts = projective_points(field, 7)
    m, a = field.mul, field.add
    lhs = a[a[m[pts[:, 0], pts[:, 4]], m[pts[:, 1], pts[:, 5]]], m[pts[:, 2], pts[:, 6]]]
    return pts[lhs == m[pts[:, 3], pts[:, 3]]]


def _polar(field, x: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Bilinear form of the quadric evaluated at ``x`` against every row of ``ys``."""
    m, a = field.mul, field.add
    acc = np.zeros(len(ys), dtype=np.int64)
    for i, j in ((0, 4), (4, 0), (1, 5), (5, 1), (2, 6), (6, 2)):
        acc = a[acc, m[x[i], ys[:, j]]]
    two_x3 = a[x[3], x[3]]
    return field.sub(acc, m[two_x3, ys[:, 3]])


def _grassmann(field, x: np.ndarray, ys: np.ndarray, i: int, j: int) -> np.ndarray:
    return field.sub(field.mul[x[i], ys[:, j]], field.mul[x[j], ys[:, i]])


@cache
def _split_cayley_raw(q: int) -> tuple[np.ndarray, tuple[tuple[int, ...], ...]]:
    field = finite_field(q)
    pts = quadric_points(q)
    lookup = np.full(q ** 7, -1, dtype=np.int64)
    lookup[encode(field, pts)] = np.arange(len(pts))
    scalars = np.arange(q)
    found: set[tuple[int, ...]] = set()
    for a in range(len(pts)):
        x, ys = pts[a], pts[a + 1:]
        ok = _polar(field, x, ys) == 0
        for (i, j), (k, l) in SPLIT_CAYLEY_RELATIONS:
            ok &= _grassmann(field, x, ys, i, j) == _grassmann(field, x, ys, k, l)
        for b in np.flatnonzero(ok) + a + 1:
            y = pts[b]
            # x + c*y for every scalar c, plus y itself
            span = field.add[x[None, :], field.mul[scalars[:, None], y[None, :]]]
            members = lookup[encode(field, normalize(field, span))]
            found.add(tuple(sorted({int(b), *members.tolist()})))
    return pts, tuple(sorted(found))


def split_cayley_hexagon(q: int, check: bool = True) -> IncidenceGeometry:
    """The split Cayley hexagon H(q) on the parabolic quadric Q(6,q)."""
    geometry, _ = split_cayley_with_coordinates(q, check=check)
    return geometry


def split_cayley_with_coordinates(q: int, check: bool = True) -> tuple[IncidenceGeometry, np.ndarray]:
    """H(q) together with the quadric coordinates of each (relabelled) point."""
    _check_order(q)
    pts, lines = _split_cayley_raw(q)
    if -1 in {p for line in lines for p in line}:
        raise ConstructionSelfCheckFailed("a selected line leaves the quadric")
    geometry = build_geometry(len(pts), lines, f"H({q})")
    geometry, old_of_new = relabel_doubly_lexical(geometry)
    if check:
        self_check(geometry, "split_cayley", q)
    return geometry, pts[old_of_new]


def dual_split_cayley_hexagon(q: int, check: bool = True) -> IncidenceGeometry:
    return dual(split_cayley_hexagon(q, check=check), name=f"H({q})^D")


def construct(family: str, q: int, check: bool = True) -> IncidenceGeometry:
    if family == "split_cayley":
        return split_cayley_hexagon(q, check=check)
    if family == "dual_split_cayley":
        return dual_split_cayley_hexagon(q, check=check)
    if family == "flag":
        return flag_hexagon(q)[0]
    if family == "dual_flag":
        return flag_hexagon(q)[1]
    if family == "plane":
        return projective_plane(q)
    raise ValueError(f"unknown family {family!r}; choose from {FAMILIES + ('plane',)}")


def expected_profile(family: str, q: int) -> GeometryProfile:
    _check_order(q)
    s, t = {
        "split_cayley": (q, q),
        "dual_split_cayley": (q, q),
        "flag": (1, q),
        "dual_flag": (q, 1),
    }[family]
    base = 1 + s * t + s * s * t * t
    return GeometryProfile(
        s=s,
        t=t,
        num_points=(1 + s) * base,
        num_lines=(1 + t) * base,
        diameter=3,
        incidence_diameter=6,
        incidence_girth=12,
    )


def prime_power(q: int) -> tuple[int, int]:
    """``(p, r)`` with ``q = p**r``."""
    if q < 2:
        raise UnsupportedOrder(f"{q} is not a prime power")
    p = next(d for d in range(2, q + 1) if q % d == 0)
    r, rest = 0, q
    while rest % p == 0:
        rest //= p
        r += 1
    if rest != 1:
        raise UnsupportedOrder(f"{q} is not a prime power")
    return p, r


def expected_aut_order(family: str, q: int) -> int:
    _, r = prime_power(q)
    if family in ("split_cayley", "dual_split_cayley"):
        return r * q ** 6 * (q ** 6 - 1) * (q ** 2 - 1)
    if family in ("flag", "dual_flag"):
        return 2 * r * (q ** 3 - 1) * (q ** 3 - q) * (q ** 3 - q * q) // (q - 1)
    raise ValueError(f"unknown family {family!r}")


def self_check(geometry: IncidenceGeometry, family: str, q: int) -> None:
    """Raise ConstructionSelfCheckFailed unless counts, census and both axiom routes agree."""
    want = expected_profile(family, q)
    if (geometry.num_points, geometry.num_lines) != (want.num_points, want.num_lines):
        raise ConstructionSelfCheckFailed(
            f"{geometry.name}: {geometry.num_points}/{geometry.num_lines} points/lines, "
            f"expected {want.num_points}/{want.num_lines}"
        )
    try:
        order = detect_order(geometry)
    except ValueError as exc:
        raise ConstructionSelfCheckFailed(f"{geometry.name}: {exc}") from exc
    if order != (want.s, want.t):
        raise ConstructionSelfCheckFailed(f"{geometry.name}: order {order}, expected {(want.s, want.t)}")
    report = verify_generalized_hexagon(geometry)
    if not report.passed:
        raise ConstructionSelfCheckFailed(f"{geometry.name}: {report.failures}")
    if report.censuses != [hexagon_census(want.s, want.t)]:
        raise ConstructionSelfCheckFailed(f"{geometry.name}: censuses {report.censuses}")

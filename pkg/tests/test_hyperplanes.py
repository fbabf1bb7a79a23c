from __future__ import annotations

import numpy as np
import pytest

from subhex.bitset import PointSet
from subhex.errors import NotAHexagon, NotValuationType
from subhex.exact_cover import SearchBudget, Status
from subhex.geometry import build_geometry
from subhex.hyperplanes import (
    HyperplaneClass,
    check_valuation_axioms,
    classical_valuation,
    classify_hyperplane,
    enumerate_ovoids,
    enumerate_semisingular,
    gamma3_subgeometry,
    is_hyperplane,
    is_one_ovoid,
    ovoid_size,
    ovoidal_valuation,
    read_hyperplanes,
    semi_classical_valuation,
    semisingular_size,
    singular_hyperplane,
    singular_size,
    valuation_from_hyperplane,
    write_hyperplanes,
)

SIZES = {2: (31, 23, 21), 3: (121, 94, 91), 4: (341, 277, 273)}


def naive_hyperplane(geometry, points) -> bool:
    pts = set(points)
    if len(pts) == geometry.num_points:
        return False
    return all(len(pts & set(l)) in (1, len(l)) for l in geometry.lines)


@pytest.mark.parametrize("q", [2, 3, 4])
def test_size_formulas(q):
    assert (singular_size(q, q), semisingular_size(q, q), ovoid_size(q, q)) == SIZES[q]


def test_is_hyperplane_basics(ordinary, h2):
    assert is_hyperplane(h2, singular_hyperplane(h2, 0).points)
    assert not is_hyperplane(h2, PointSet.full(h2.num_points))
    assert not is_hyperplane(ordinary, [0])


def test_hyperplane_check_matches_naive(h2):
    rng = np.random.default_rng(2)
    for _ in range(200):
        pts = np.flatnonzero(rng.random(h2.num_points) < 0.5)
        assert is_hyperplane(h2, pts) == naive_hyperplane(h2, pts)
    for p in range(h2.num_points):
        pts = singular_hyperplane(h2, p).points.indices()
        assert naive_hyperplane(h2, pts)


def test_boolean_mask_input(h2):
    mask = h2.distances.from_point(0) <= 2
    assert is_hyperplane(h2, mask)
    assert is_hyperplane(h2, np.flatnonzero(mask))


@pytest.mark.parametrize("q", [2, 3, 4])
def test_singular_sizes(request, q):
    g = request.getfixturevalue(f"h{q}")
    h = singular_hyperplane(g, 7)
    assert len(h) == SIZES[q][0]
    assert h.kind is HyperplaneClass.SINGULAR and h.center == 7


def test_hyperplane_ops_reject_non_hexagons(grid):
    with pytest.raises(NotAHexagon):
        singular_hyperplane(grid, 0)


def test_h2d_has_no_ovoids(h2d):
    stream = enumerate_ovoids(h2d)
    assert list(stream) == []
    assert stream.outcome.status is Status.COMPLETE


def test_h3_ovoids(h3):
    stream = enumerate_ovoids(h3)
    sizes = {len(o) for o in stream}
    assert sizes == {91}
    assert stream.outcome.solutions_found == 3888


def test_h4d_budgeted_search(h4d):
    stream = enumerate_ovoids(h4d, SearchBudget(max_nodes=200_000))
    assert list(stream) == []
    assert stream.outcome.status is Status.BUDGET_EXHAUSTED


@pytest.mark.parametrize("q, points, lines", [(2, 32, 48), (3, 243, 324), (4, 1024, 1280)])
def test_gamma3_subgeometry(request, q, points, lines):
    g = request.getfixturevalue(f"h{q}")
    sub, pmap, _ = gamma3_subgeometry(g, 0)
    assert (sub.num_points, sub.num_lines) == (points, lines)
    assert set(sub.line_sizes().tolist()) == {q}
    assert (g.distances.dist[0, pmap] == 3).all()


@pytest.mark.parametrize("q, count", [(2, 2), (3, 24)])
def test_semisingular_family(request, q, count):
    g = request.getfixturevalue(f"h{q}")
    for p in (0, g.num_points - 1):
        fam = list(enumerate_semisingular(g, p))
        assert len(fam) == count
        sub, pmap, _ = gamma3_subgeometry(g, p)
        for h in fam:
            mask = h.points.mask()
            assert len(h) == SIZES[q][1]
            assert naive_hyperplane(g, np.flatnonzero(mask))
            assert is_one_ovoid(sub, mask[pmap])
            assert mask[g.distances.from_point(p) <= 1].all()
            assert not mask[g.distances.from_point(p) == 2].any()


@pytest.mark.slow
def test_semisingular_family_h4(h4):
    fam = enumerate_semisingular(h4, 0)
    sizes = {len(h) for h in fam}
    assert sizes == {277}
    assert fam.outcome.solutions_found == 504


# -- valuations -----------------------------------------------------------------------

def test_classical_valuation(h2):
    v = valuation_from_hyperplane(h2, singular_hyperplane(h2, 4))
    # f = d(p, .) reaches the diameter on the points opposite p
    assert v.max_value == 3
    assert (v.values == h2.distances.from_point(4)).all()
    assert check_valuation_axioms(h2, classical_valuation(h2, 4)).passed


def test_ovoidal_valuation(h3):
    ovoid = next(iter(enumerate_ovoids(h3)))
    v = valuation_from_hyperplane(h3, ovoid.points)
    assert v.max_value == 1 and set(v.values.tolist()) == {0, 1}
    assert (v.values == ovoidal_valuation(h3, ovoid.points).values).all()
    assert check_valuation_axioms(h3, v).passed


@pytest.mark.parametrize("q", [2, 3])
def test_semi_classical_valuation(request, q):
    g = request.getfixturevalue(f"h{q}")
    p = 3
    sub, pmap, _ = gamma3_subgeometry(g, p)
    for h in enumerate_semisingular(g, p):
        opposite = pmap[h.points.mask()[pmap]]
        v = semi_classical_valuation(g, p, opposite)
        rep = check_valuation_axioms(g, v)
        assert rep.passed and rep.max_value == 2
        assert (v.hyperplane().mask() == h.points.mask()).all()
        back = valuation_from_hyperplane(g, h)
        assert (back.values == v.values).all()


@pytest.mark.parametrize("q", [2, 3])
def test_round_trip_all_families(request, q):
    g = request.getfixturevalue(f"h{q}")
    hyperplanes = [singular_hyperplane(g, 0), next(iter(enumerate_semisingular(g, 0)))]
    hyperplanes += [o.points for o in enumerate_ovoids(g, SearchBudget(max_solutions=3))]
    for h in hyperplanes:
        pts = h.points if hasattr(h, "kind") else h
        v = valuation_from_hyperplane(g, pts)
        assert v.max_value <= 3
        assert v.hyperplane() == pts


def test_designed_negative_fixture(ordinary):
    # {0,1,3,4} is a hyperplane of the ordinary hexagon, but the line {0,1} gets no unique minimum
    h = [0, 1, 3, 4]
    assert is_hyperplane(ordinary, h)
    with pytest.raises(NotValuationType) as info:
        valuation_from_hyperplane(ordinary, h)
    assert info.value.axiom == "PV2"
    assert ordinary.lines[info.value.witness] == (0, 1)


def test_point_complement_is_singular(ordinary):
    # the complement of one point is the radius-2 ball of the opposite point, so it is of valuation type
    h = [1, 2, 3, 4, 5]
    v = valuation_from_hyperplane(ordinary, h)
    assert (v.values == ordinary.distances.from_point(3)).all()


def test_constant_zero_fails_pv2_everywhere(ordinary):
    rep = check_valuation_axioms(ordinary, np.zeros(6, dtype=int))
    assert rep.pv1 and not rep.pv2
    # each line taken on its own violates PV2 under the zero map
    assert all(not check_valuation_axioms(build_geometry(6, [l]), np.zeros(6, dtype=int)).pv2 for l in ordinary.lines)


def test_pv1_and_pv3_failures(ordinary):
    rep = check_valuation_axioms(ordinary, np.ones(6, dtype=int) + ordinary.distances.from_point(0))
    assert not rep.pv1
    # two lines through 0 carrying a value one lower: PV3 fails at 0
    values = np.array([1, 0, 1, 2, 1, 0])
    rep = check_valuation_axioms(ordinary, values)
    assert not rep.pv3 and rep.witnesses["PV3"] == 0


# -- classification and files -------------------------------------------------------------

def test_classify(h2, h3):
    ball = singular_hyperplane(h3, 11)
    c = classify_hyperplane(h3, ball.points)
    assert c.kind is HyperplaneClass.SINGULAR and c.center == 11
    ovoid = next(iter(enumerate_ovoids(h3)))
    assert classify_hyperplane(h3, ovoid.points).kind is HyperplaneClass.OVOIDAL
    for h in enumerate_semisingular(h2, 5):
        c = classify_hyperplane(h2, h.points)
        assert c.kind is HyperplaneClass.SEMI_SINGULAR and c.center == 5


def test_classify_other(ordinary):
    assert classify_hyperplane(ordinary, [0, 1, 3, 4]).kind is HyperplaneClass.OTHER


def test_hyperplane_file_round_trip(h2, tmp_path):
    fam = list(enumerate_semisingular(h2, 0))
    path = tmp_path / "hyp.jsonl"
    assert write_hyperplanes(path, fam) == 2
    back = read_hyperplanes(h2, path)
    assert [b.points for b in back] == [h.points for h in fam]
    assert all(b.kind is HyperplaneClass.SEMI_SINGULAR and b.center == 0 for b in back)
    path.write_text('{"points": [0, 1], "class": "other"}\n')
    with pytest.raises(ValueError):
        read_hyperplanes(h2, path)

from __future__ import annotations

import json

import pytest

from subhex.errors import NoDistance3Pair, NotAHexagon, NoOvoidThroughPoint, UnsupportedPremiseCombination
from subhex.exact_cover import SearchBudget, Status
from subhex.geometry import build_geometry
from subhex.harness import (
    IntersectionCheckResult,
    NoOvoidsResult,
    Rule,
    check_h3,
    check_no_ovoids,
    check_semisingular_pairs,
    deduce,
    distance3_pairs,
    covering_identity,
    solve_overlap,
)
from subhex.hyperplanes import enumerate_ovoids, enumerate_semisingular


# -- counting identity --------------------------------------------------------------

def test_identity_examples():
    assert solve_overlap(3, 3, 1) == 3
    assert solve_overlap(2, 2, 3) == 0


def test_identity_full_range():
    rep = covering_identity()
    assert rep.passed
    assert rep.cases == sum(32 * (s + 2) for s in range(1, 33))


def test_identity_restricted_n_range():
    rep = covering_identity(range(2, 4), range(1, 3), n_range=[0, 1, 99])
    assert rep.passed and rep.cases == 2 * 2 * 2


# -- no ovoids ----------------------------------------------------------------------

def test_no_ovoids_h2d(h2d):
    r = check_no_ovoids(h2d)
    assert r.passed and r.status is Status.COMPLETE
    (d,) = deduce([r])
    assert d.rule is Rule.NO_OVOIDS and d.premises == ["no_ovoids:H(2)^D"]


def test_no_ovoids_h3_fails(h3):
    r = check_no_ovoids(h3)
    assert not r.passed and r.solutions_found >= 1
    assert deduce([r]) == []


def test_no_ovoids_budget(h4d):
    r = check_no_ovoids(h4d, SearchBudget(max_nodes=100_000))
    assert not r.passed
    assert r.status is Status.BUDGET_EXHAUSTED and r.solutions_found == 0
    assert deduce([r]) == []


# -- ovoid x semi-singular -----------------------------------------------------------

def test_h3_fixed_point(h3):
    r = check_h3(h3)
    assert r.passed and r.threshold == 3
    assert r.min_intersection > 3
    assert r.hyperplane_pairs_checked == r.details["num_ovoids"] * 24 // 4
    (d,) = deduce([r])
    assert d.rule is Rule.DISTANCE_AT_MOST_ONE and "finite" in d.conclusion


def test_h3_min_by_brute_force(h3):
    ovoids = [set(o.points.indices().tolist()) for o in enumerate_ovoids(h3)]
    through = [o for o in ovoids if 0 in o]
    family = [set(h.points.indices().tolist()) for h in enumerate_semisingular(h3, 0)]
    low = min(len(o & h) for o in through for h in family)
    assert check_h3(h3, exhaustive=True).min_intersection == low


def test_h3_misconfigured_threshold(h3):
    r = check_h3(h3, threshold=91)
    assert not r.passed
    c = r.counterexample
    assert c["center"] == 0 and c["intersection"] <= 91
    assert len(set(c["ovoid"]) & set(c["semisingular"])) == c["intersection"]
    assert deduce([r]) == []


def test_h3_no_ovoid_through_point(h2d):
    with pytest.raises(NoOvoidThroughPoint):
        check_h3(h2d)


def test_h3_deterministic(h3):
    a, b = check_h3(h3, point=5), check_h3(h3, point=5)
    assert (a.min_intersection, a.hyperplane_pairs_checked) == (b.min_intersection, b.hyperplane_pairs_checked)


# -- semi-singular pairs ---------------------------------------------------------------

def test_pairs_h2_all_vs_fixed(h2):
    full = check_semisingular_pairs(h2, "all_pairs")
    fixed = check_semisingular_pairs(h2, "fixed_pair")
    assert full.passed and fixed.passed
    assert full.pairs_checked == len(distance3_pairs(h2)) == 63 * 32
    assert full.min_intersection == fixed.min_intersection > 3
    assert not fixed.symmetry_assumption_used
    assert fixed.transitivity_source.startswith("verified")
    assert deduce([full])[0].conclusion.startswith("S = H")


def test_pairs_h2_brute_force_min(h2):
    x1, x2 = map(int, distance3_pairs(h2)[0])
    a = [set(h.points.indices().tolist()) for h in enumerate_semisingular(h2, x1)]
    b = [set(h.points.indices().tolist()) for h in enumerate_semisingular(h2, x2)]
    low = min(len(u & v) for u in a for v in b)
    r = check_semisingular_pairs(h2, "fixed_pair", pair=(x1, x2), exhaustive=True)
    assert r.min_intersection == low


def test_pairs_h2_threshold_23(h2):
    r = check_semisingular_pairs(h2, threshold=23)
    assert not r.passed and r.counterexample is not None
    assert r.counterexample["intersection"] <= 23
    assert deduce([r]) == []


def test_orbit_representative(h2):
    r = check_semisingular_pairs(h2, "orbit_representative")
    assert r.passed and not r.symmetry_assumption_used


def test_fixed_pair_records_assumption_when_group_unknown(h2):
    r = check_semisingular_pairs(h2, aut_nodes=1)
    assert r.passed and r.symmetry_assumption_used
    assert r.transitivity_source.startswith("literature")
    with pytest.raises(UnsupportedPremiseCombination):
        check_semisingular_pairs(h2, "orbit_representative", aut_nodes=1)


def test_pairs_need_opposite_points(h2):
    with pytest.raises(NoDistance3Pair):
        check_semisingular_pairs(h2, pair=(0, 1))
    plane = build_geometry(3, [(0, 1), (1, 2), (0, 2)])
    with pytest.raises(NotAHexagon):
        check_semisingular_pairs(plane)


@pytest.mark.slow
def test_pairs_h4_fixed(h4):
    r = check_semisingular_pairs(h4)
    assert r.passed and r.threshold == 5 and r.min_intersection > 5
    assert r.hyperplane_pairs_checked == 504 * 504


@pytest.mark.slow
def test_pairs_h4_checkpoint_resume(h4, tmp_path):
    ck = tmp_path / "ck.json"
    first = check_semisingular_pairs(h4, budget=SearchBudget(wall_clock_limit=2.0), checkpoint_path=ck)
    assert first.status is Status.BUDGET_EXHAUSTED and ck.exists()
    saved = json.loads(ck.read_text())
    assert saved["pair_index"] == 0
    rest = check_semisingular_pairs(h4, checkpoint_path=ck, resume=ck)
    assert rest.passed and rest.hyperplane_pairs_checked == 504 * 504


def test_checkpoint_written_when_first_family_runs_out(h2, tmp_path):
    ck = tmp_path / "ck.json"
    first = check_semisingular_pairs(h2, budget=SearchBudget(max_nodes=1), checkpoint_path=ck)
    assert first.status is Status.BUDGET_EXHAUSTED and not first.passed and first.pairs_checked == 0
    assert json.loads(ck.read_text())["pair_index"] == 0
    rest = check_semisingular_pairs(h2, checkpoint_path=ck, resume=ck)
    assert rest.passed and rest.hyperplane_pairs_checked == 2 * 2


def test_resume_all_pairs_h2(h2, tmp_path):
    ck = tmp_path / "ck.json"
    full = check_semisingular_pairs(h2, "all_pairs", checkpoint_path=ck)
    state = json.loads(ck.read_text())
    assert state["pair_index"] == full.pairs_checked
    # a half-finished state resumes to the same verdict
    state.update(pair_index=1000, pairs_checked=1000, hyperplane_pairs_checked=4000)
    ck.write_text(json.dumps(state))
    again = check_semisingular_pairs(h2, "all_pairs", resume=ck)
    assert again.passed and again.hyperplane_pairs_checked == full.hyperplane_pairs_checked


# -- deductions ------------------------------------------------------------------------

def test_deduce_rejects_unknown_premises():
    with pytest.raises(UnsupportedPremiseCombination):
        deduce(["not a check"])


def test_deduce_needs_thick_lines():
    r = NoOvoidsResult("thin", True, Status.COMPLETE, 0, 1, 0.0, thick=False)
    with pytest.raises(UnsupportedPremiseCombination):
        deduce([r])


def test_deduce_only_from_passed():
    r = IntersectionCheckResult("semisingular_pairs", "X", "fixed_pair", 1, 4, 2, 3, passed=False)
    assert deduce([r]) == []

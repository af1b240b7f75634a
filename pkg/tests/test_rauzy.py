import random
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from ietspec.errors import (
    InvalidPermutationError,
    NoCandidateError,
    NotFoundError,
    TowerAbortedError,
    UndefinedStepError,
)
from ietspec.iet import GOLDEN, Iet, Permutation, golden_rotation, orbit_symbols, rotation
from ietspec.rauzy import (
    LAST_LONGER,
    LAST_SHORTER,
    build_tower,
    candidate_report,
    default_delta,
    gordon_lengths_via_tower,
    periodic_iet,
    rauzy_class,
    rauzy_orbit,
    rauzy_step,
    rauzy_step_perm,
    rauzy_step_via_induce,
    tower_reports,
)
from ietspec.symbolic import gordon_scan, has_triple_repetition

NEAR_PERIODIC = Fraction(1, 2) + Fraction(1, 50) + Fraction(1, 5000)


@st.composite
def irreducible_instances(draw, max_n=5):
    n = draw(st.integers(2, max_n))
    images = tuple(draw(st.permutations(range(1, n + 1))))
    assume(Permutation(images).is_irreducible)
    raw = draw(st.lists(st.integers(1, 60), min_size=n, max_size=n))
    total = sum(raw)
    lam = tuple(Fraction(r, total) for r in raw)
    beta = Permutation(images).inverse()(n)
    assume(lam[n - 1] != lam[beta - 1])
    return Permutation(images), lam


def test_step_examples():
    st_ = rauzy_step((2, 1), (Fraction(1, 3), Fraction(2, 3)))
    assert st_.step_type == LAST_LONGER
    assert st_.nu == Fraction(1, 3)
    assert st_.after_perm == Permutation((2, 1))
    assert st_.after_lengths == (Fraction(1, 2), Fraction(1, 2))


def test_golden_orbit_period_two():
    lam = (1 - GOLDEN, GOLDEN)
    first = rauzy_step((2, 1), lam)
    assert first.after_lengths == (GOLDEN, 1 - GOLDEN)
    second = rauzy_step(first.after_perm, first.after_lengths)
    assert second.after_lengths == lam
    assert {first.step_type, second.step_type} == {LAST_LONGER, LAST_SHORTER}


def test_step_errors():
    with pytest.raises(UndefinedStepError):
        rauzy_step((2, 1), (Fraction(1, 2), Fraction(1, 2)))
    with pytest.raises(InvalidPermutationError):
        rauzy_step((2, 1, 3), (Fraction(1, 3),) * 3)


@settings(max_examples=200, deadline=None)
@given(irreducible_instances())
def test_step_matches_first_return_oracle(inst):
    perm, lam = inst
    st_ = rauzy_step(perm, lam)
    assert (st_.after_perm, st_.after_lengths) == rauzy_step_via_induce(perm, lam)
    assert sum(st_.after_lengths) == 1
    assert all(v > 0 for v in st_.after_lengths)


@settings(max_examples=100, deadline=None)
@given(irreducible_instances())
def test_step_stays_in_rauzy_class(inst):
    perm, lam = inst
    cls = rauzy_class(perm)
    for st_ in rauzy_orbit(perm, lam, 6):
        assert st_.after_perm in cls
        assert st_.after_perm.is_irreducible


def test_rauzy_class_closed():
    cls = rauzy_class((4, 3, 2, 1))
    for p in cls.members:
        for kind in (LAST_LONGER, LAST_SHORTER):
            assert rauzy_step_perm(p, kind) in cls
    assert len(rauzy_class((2, 1))) == 1


def test_default_delta():
    assert default_delta(1, 3) == Fraction(1, 12)
    assert default_delta(3, 3) == Fraction(1, 24)


def test_golden_tower_schedule_and_search_limit():
    # the golden Rauzy orbit has period two, alternating between two length vectors
    # at distance (3 - sqrt 5)/2 - 1/2 ~ 0.118 from the center
    tower = build_tower(golden_rotation(), 3, [Fraction(2, 10), Fraction(15, 100), Fraction(12, 100)])
    assert [lev.steps for lev in tower.levels] == [0, 1, 2]
    with pytest.raises(NotFoundError) as info:
        build_tower(golden_rotation(), 3, [Fraction(2, 10), Fraction(1, 10), Fraction(5, 100)])
    assert len(info.value.tower.levels) == 1
    assert not info.value.tower.complete


def test_vacuous_first_level():
    tower = build_tower(Iet(Permutation((3, 2, 1)), (Fraction(1, 2), Fraction(1, 3), Fraction(1, 6))),
                        1, [Fraction(1)])
    assert tower.levels[0].steps == 0


def test_rational_rotation_aborts():
    with pytest.raises(TowerAbortedError) as info:
        build_tower(rotation(Fraction(2, 3)), 3)
    assert len(info.value.tower.levels) == 1


def test_tower_levels_consistent_with_induction():
    tower, _ = tower_reports(rotation(NEAR_PERIODIC), 4)
    assert len(tower.levels) >= 3
    for lev in tower.levels:
        if lev.steps:
            assert tower.consistency_errors(lev.m) == []
            assert lev.length == tower.induced_on_level(lev.m).J[1]
    steps = [lev.steps for lev in tower.levels]
    assert steps == sorted(set(steps))


def test_periodic_candidate_fraction_one():
    P = periodic_iet(3, (3, 2, 1))
    assert P.cycle_lengths == (1, 0, 1)
    assert P.period == 2
    assert P.interval(2) == (Fraction(1, 3), Fraction(2, 3))
    tower = build_tower(P.iet, 1)
    report = candidate_report(tower, 1)
    assert all(f == 1 for f in report.fractions)
    assert all(rec.certified for rec in report.records)
    assert [rec.return_time for rec in report.records] == list(P.cycle_lengths)
    assert report.covered_measure == 1


def test_periodic_emits_cycle_block_lengths():
    P = periodic_iet(4, (2, 4, 1, 3))
    x = Fraction(3, 10)
    lengths = gordon_lengths_via_tower(P.iet, x, 1)
    assert lengths == [P.cycle_lengths[P.iet.index(x) - 1] + 1]


def test_far_from_center_has_empty_candidate():
    E = Iet(Permutation((3, 2, 1)), (Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)))
    tower = build_tower(E, 1, [Fraction(1)])
    with pytest.raises(NoCandidateError) as info:
        candidate_report(tower, 1)
    assert info.value.indices
    lax = candidate_report(tower, 1, strict=False)
    assert any(rec.M is None for rec in lax.records)


def test_candidates_are_sound():
    # every candidate midpoint of the near-periodic tower carries the triple repetition
    tower, reports = tower_reports(rotation(NEAR_PERIODIC), 4, certify=True)
    checked = 0
    for rep in reports:
        for rec in rep.records:
            if rec.M is not None:
                assert rec.certified
                checked += 1
    assert checked >= 6


def test_tower_lengths_found_by_brute_scan():
    E = rotation(NEAR_PERIODIC)
    rng = random.Random(7)
    for _ in range(5):
        x = Fraction(rng.randrange(1, 10**6), 10**6)
        lengths = gordon_lengths_via_tower(E, x, 4)
        if not lengths:
            continue
        k = max(lengths)
        cert = gordon_scan(orbit_symbols(E, x, -k, 2 * k - 1), k)
        assert set(lengths) <= set(cert.lengths)


def test_candidate_towers_reproduce_return_words():
    E = rotation(NEAR_PERIODIC)
    tower, reports = tower_reports(E, 3)
    for rep in reports:
        for rec in rep.records:
            if rec.M is None:
                continue
            x = (rec.M[0] + rec.M[1]) / 2
            assert orbit_symbols(E, x, 0, rec.return_time).word(0, rec.length) == rec.word
            assert has_triple_repetition(orbit_symbols(E, x, -rec.length, 2 * rec.length - 1), rec.length)

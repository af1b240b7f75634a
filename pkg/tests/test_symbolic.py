import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ietspec.errors import InsufficientWindowError
from ietspec.iet import Iet, Itinerary, Permutation, golden_rotation, orbit_symbols, rotation
from ietspec.symbolic import (
    aperiodicity_check,
    build_cylinders,
    condition_b_scores,
    gordon_scan,
    has_triple_repetition,
)

THIRD = Fraction(1, 3)


def test_identity_cylinders():
    tree = build_cylinders(Iet(Permutation((1, 2, 3)), (THIRD,) * 3), 2)
    assert [w for w, _, _ in tree.nodes(2)] == [(1, 1), (2, 2), (3, 3)]
    assert tree.node((1, 2)) is None


def test_rational_rotation_cylinders():
    tree = build_cylinders(rotation(Fraction(2, 3)), 3)
    assert tree.counts == (2, 3, 3)
    assert tree.eta[-1] == THIRD
    assert not aperiodicity_check(tree)


def test_golden_complexity_and_three_gaps():
    G = golden_rotation()
    tree = build_cylinders(G, 60)
    assert tree.counts == tuple(m + 1 for m in range(1, 61))
    assert aperiodicity_check(tree)
    for m in range(1, 61):
        widths = {hi - lo for lo, hi in tree.level(m)}
        assert len(widths) <= 3


def test_cylinders_partition_and_eta_monotone():
    G = golden_rotation()
    tree = build_cylinders(G, 40)
    for m in (1, 10, 40):
        cells = tree.level(m)
        assert sum(hi - lo for lo, hi in cells) == 1
        assert min(hi - lo for lo, hi in cells) == tree.eta[m - 1]
    assert all(a >= b for a, b in zip(tree.eta, tree.eta[1:]))


@st.composite
def rational_iets(draw):
    n = draw(st.integers(2, 4))
    images = tuple(draw(st.permutations(range(1, n + 1))))
    raw = draw(st.lists(st.integers(1, 30), min_size=n, max_size=n))
    total = sum(raw)
    return Iet(Permutation(images), tuple(Fraction(r, total) for r in raw))


@settings(max_examples=40, deadline=None)
@given(rational_iets())
def test_cylinder_words_match_orbits(E):
    depth = 6
    tree = build_cylinders(E, depth)
    rng = random.Random(3)
    nodes = {w: (lo, hi) for w, lo, hi in tree.nodes(depth)}
    assert len(nodes) == tree.complexity(depth)
    for _ in range(30):
        x = Fraction(rng.randrange(10**5), 10**5)
        word = orbit_symbols(E, x, 0, depth - 1).word(0, depth)
        lo, hi = nodes[word]
        assert lo <= x < hi


def test_condition_b_golden():
    rep = condition_b_scores(build_cylinders(golden_rotation(), 500), threshold=Fraction(1, 4))
    assert rep.above_threshold
    assert rep.aperiodic
    assert not rep.keane_collision
    assert 0.38 < float(rep.min_score) < 0.3820
    lines = rep.to_csv().splitlines()
    assert lines[0] == "n,eta_num,eta_den,score,score_approx"
    assert len(lines) == 501
    assert rep.to_csv() == condition_b_scores(build_cylinders(golden_rotation(), 500),
                                              threshold=Fraction(1, 4)).to_csv()


def test_condition_b_tail_max_matches_definition():
    rep = condition_b_scores(build_cylinders(golden_rotation(), 200))
    scores = [s for _, _, s in rep.scores]
    for m in range(1, 201):
        assert rep.tail_max[m - 1] == max(scores[(m + 1) // 2 - 1:m])


def test_condition_b_rational_rotation():
    rep = condition_b_scores(build_cylinders(rotation(Fraction(2, 3)), 10))
    assert rep.keane_collision
    assert not rep.aperiodic


def test_periodic_itinerary_scan():
    it = orbit_symbols(rotation(Fraction(2, 3)), 0, -60, 119)
    cert = gordon_scan(it, 60)
    assert set(range(3, 61, 3)) <= set(cert.lengths)
    assert cert.verify()


def test_distinct_symbols_have_no_repetition():
    it = Itinerary(bytes(range(1, 31)), 0, -10)
    assert gordon_scan(it, 10).lengths == ()


def test_insufficient_window():
    it = orbit_symbols(golden_rotation(), Fraction(1, 3), -5, 10)
    with pytest.raises(InsufficientWindowError):
        gordon_scan(it, 10)
    with pytest.raises(InsufficientWindowError):
        has_triple_repetition(it, 6)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(1, 3), min_size=60, max_size=60), st.integers(1, 20))
def test_scan_agrees_with_direct_check(symbols, max_k):
    it = Itinerary(bytes(symbols), 0, -20)
    cert = gordon_scan(it, max_k)
    direct = [k for k in range(1, max_k + 1)
              if symbols[20 - k:20] == symbols[20:20 + k] == symbols[20 + k:20 + 2 * k]]
    assert list(cert.lengths) == direct


def test_certificate_serialization():
    it = orbit_symbols(rotation(Fraction(2, 3)), 0, -9, 17)
    cert = gordon_scan(it, 9)
    doc = cert.to_json()
    assert doc["lengths"] == [3, 6, 9]
    assert doc["windows"][0] == [-3, 6]
    assert cert.to_csv().splitlines()[0] == "k,start,stop"

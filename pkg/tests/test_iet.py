import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ietspec.errors import InvalidLengthsError, NonReturnError, OutOfDomainError
from ietspec.scalar import floor_div
from ietspec.iet import (
    GOLDEN,
    Iet,
    Permutation,
    evaluate,
    golden_rotation,
    induce,
    invert,
    keane_check,
    make_iet,
    orbit_symbols,
    rotation,
)

THIRD = Fraction(1, 3)


def identity3():
    return make_iet(Permutation.identity(3), (THIRD, THIRD, THIRD))


@st.composite
def rational_iets(draw, max_n=5):
    n = draw(st.integers(2, max_n))
    images = draw(st.permutations(range(1, n + 1)))
    raw = draw(st.lists(st.integers(1, 40), min_size=n, max_size=n))
    total = sum(raw)
    return Iet(Permutation(tuple(images)), tuple(Fraction(r, total) for r in raw))


def test_irreducibility():
    assert Permutation((2, 1)).is_irreducible
    assert not Permutation((1, 2)).is_irreducible
    assert not Permutation((2, 1, 3)).is_irreducible
    assert Permutation((3, 2, 1)).is_irreducible


def test_make_iet_examples():
    E = make_iet(Permutation((2, 1)), (THIRD, 2 * THIRD))
    assert E.displacements == (Fraction(2, 3), Fraction(-1, 3))
    assert identity3().displacements == (0, 0, 0)
    # (3,2,1) with lengths (1/2, 1/4, 1/4): slot 3 starts after the images of I_3 and I_2
    E = make_iet(Permutation((3, 2, 1)), (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)))
    assert E(0) == Fraction(1, 2)
    assert sorted(E.image_intervals()) == [(0, Fraction(1, 4)), (Fraction(1, 4), Fraction(1, 2)),
                                           (Fraction(1, 2), 1)]


def test_rotation_bijective_on_grid():
    E = rotation(Fraction(2, 3))
    images = {E(Fraction(k, 10**4)) for k in range(10**4)}
    assert len(images) == 10**4
    assert all(0 <= y < 1 for y in images)


def test_invalid_lengths():
    with pytest.raises(InvalidLengthsError):
        make_iet(Permutation((2, 1)), (Fraction(1, 2), Fraction(0)))
    with pytest.raises(InvalidLengthsError):
        make_iet(Permutation((2, 1)), (Fraction(1, 2),))


def test_evaluate_examples():
    assert evaluate(rotation(Fraction(2, 3)), 0) == Fraction(2, 3)
    assert evaluate(identity3(), Fraction(5, 7)) == Fraction(5, 7)
    assert evaluate(golden_rotation(), 0) == GOLDEN
    with pytest.raises(OutOfDomainError):
        evaluate(identity3(), 1)


def test_orbit_examples():
    assert orbit_symbols(identity3(), Fraction(1, 2), 0, 3).word(0, 4) == (2, 2, 2, 2)
    assert orbit_symbols(rotation(Fraction(2, 3)), 0, 0, 5).word(0, 6) == (1, 2, 2, 1, 2, 2)


def test_golden_orbit_is_rotation_coding():
    # E(x) = x + g mod 1; symbol 2 marks the points that wrap around
    G = golden_rotation()
    it = orbit_symbols(G, 0, 0, 199)
    for j in range(200):
        assert it[j] == 1 + floor_div((j + 1) * GOLDEN, 1) - floor_div(j * GOLDEN, 1)


def test_two_sided_orbit_matches_inverse():
    G = golden_rotation()
    x = Fraction(2, 7)
    it = orbit_symbols(G, x, -50, 50)
    y = x
    F = G.inverse
    for j in range(1, 51):
        y = F(y)
        assert it[-j] == G.index(y)


def test_invert_examples():
    assert invert(identity3()) == identity3()
    assert invert(rotation(Fraction(2, 3))) == rotation(Fraction(1, 3))


@settings(max_examples=60)
@given(rational_iets())
def test_invert_is_inverse_and_involution(E):
    F = invert(E)
    rng = random.Random(1)
    for _ in range(50):
        x = Fraction(rng.randrange(10**6), 10**6)
        assert F(E(x)) == x
        assert E(F(x)) == x
    assert invert(F) == E


@settings(max_examples=60)
@given(rational_iets())
def test_images_tile_domain(E):
    imgs = sorted(E.image_intervals())
    assert imgs[0][0] == E.origin and imgs[-1][1] == E.end
    assert all(a[1] == b[0] for a, b in zip(imgs, imgs[1:]))


def _preimage_measure(E, lo, hi):
    total = 0
    for i in range(1, E.n + 1):
        a, b = E.interval(i)
        d = E.displacements[i - 1]
        lo_i, hi_i = max(a + d, lo), min(b + d, hi)
        if lo_i < hi_i:
            total += hi_i - lo_i
    return total


@settings(max_examples=60)
@given(rational_iets(), st.fractions(0, 1, max_denominator=97), st.fractions(0, 1, max_denominator=97))
def test_measure_preservation(E, a, b):
    lo, hi = min(a, b), max(a, b)
    assert _preimage_measure(E, lo, hi) == hi - lo


def test_induce_rotation_example():
    S = induce(rotation(Fraction(2, 3)), (0, Fraction(2, 3)))
    assert S.pieces == ((0, THIRD), (THIRD, 2 * THIRD))
    assert S.return_times == (1, 0)
    assert S.return_words == ((1, 2), (2,))
    assert S.induced(0) == THIRD and S.induced(THIRD) == 0


def test_induce_identity():
    S = induce(identity3(), identity3().interval(2))
    assert S.return_times == (0,)
    assert S.induced(Fraction(1, 2)) == Fraction(1, 2)


def test_induce_golden_is_two_exchange():
    G = golden_rotation()
    S = induce(G, (G.field(0), GOLDEN))
    assert S.induced.n == 2
    assert S.tiling_measure() == 1


def test_induce_non_return():
    G = golden_rotation()
    with pytest.raises(NonReturnError):
        induce(G, (G.field(0), G.field(Fraction(1, 10**6))), step_cap=100)


def test_return_words_reproduce_orbit():
    G = golden_rotation()
    J = (G.field(Fraction(1, 5)), G.field(Fraction(3, 5)))
    S = induce(G, J)
    x = G.field(Fraction(1, 4))
    word = []
    while len(word) < 300:
        k = S.piece_index(x)
        word.extend(S.return_words[k - 1])
        x = S.induced(x)
    assert tuple(word[:300]) == orbit_symbols(G, Fraction(1, 4), 0, 299).word(0, 300)


def test_keane_examples():
    assert keane_check(rotation(Fraction(2, 3)), 10).collision
    assert keane_check(identity3(), 1).collision
    assert not keane_check(golden_rotation(), 10**4).collision

import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from totalfol import sl2z
from totalfol.sl2z import A1, A2, A_STAR, A_XY, IDENTITY, MINUS_IDENTITY, GL2ZMatrix


def as_np(A):
    return np.array([[A.a, A.b], [A.c, A.d]], dtype=object)


def test_named_matrices():
    assert A_XY @ A_XY == IDENTITY
    assert A_XY @ A1 @ A_XY == A2
    assert sl2z.inv(A2) @ A1 == A_STAR
    assert sl2z.power(A_STAR, 3) == MINUS_IDENTITY
    assert sl2z.power(A_STAR, 6) == IDENTITY


def test_mul_matches_numpy():
    rng = random.Random(3)
    for _ in range(200):
        A = sl2z.evaluate_word(rng.choice(list(sl2z.GENERATORS)) for _ in range(8))
        B = sl2z.evaluate_word(rng.choice(list(sl2z.GENERATORS)) for _ in range(8))
        assert (as_np(A) @ as_np(B)).tolist() == [list(r) for r in (A @ B).rows()]


def test_construction_errors():
    with pytest.raises(sl2z.DeterminantError):
        GL2ZMatrix(2, 0, 0, 1)
    with pytest.raises(sl2z.IntegerOverflow):
        GL2ZMatrix(2**63, 1, 2**63 - 1, 1)
    with pytest.raises(TypeError):
        GL2ZMatrix(1.0, 0, 0, 1)


def test_inverse_and_det_minus_one():
    F = GL2ZMatrix(0, 1, 1, 0)
    assert F.det == -1
    assert sl2z.inv(F) @ F == IDENTITY
    with pytest.raises(sl2z.DetMinusOne):
        sl2z.decompose(F)


def test_decompose_small_cases():
    assert sl2z.decompose(IDENTITY) == ((), 1)
    assert sl2z.decompose(MINUS_IDENTITY) == ((), -1)
    word, sign = sl2z.decompose(A_STAR)
    assert sign * 1 == 1 and sl2z.evaluate_word(word) == A_STAR


def _random_word(rng, length):
    return [rng.choice(list(sl2z.GENERATORS)) for _ in range(length)]


def test_decompose_round_trip_random():
    rng = random.Random(20261019)
    for _ in range(1000):
        target = sl2z.evaluate_word(_random_word(rng, rng.randint(0, 30)))
        if rng.random() < 0.5:
            target = -target
        word, sign = sl2z.decompose(target)
        W = sl2z.evaluate_word(word)
        assert (W if sign == 1 else -W) == target


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from(["A1", "A1inv", "A2", "A2inv"]), max_size=40), st.booleans())
def test_decompose_round_trip_property(letters, negate):
    A = sl2z.evaluate_word(letters)
    A = -A if negate else A
    word, sign = sl2z.decompose(A)
    W = sl2z.evaluate_word(word)
    assert (W if sign == 1 else -W) == A


def test_decompose_length_is_sum_of_quotients():
    # parabolic powers need linear length: SL(2,Z) is virtually free, so
    # no polylog bound in the entries exists for these
    for k in (1, 10, 1000):
        word, sign = sl2z.decompose(sl2z.power(A1, k))
        assert sign == 1 and len(word) == k


def test_decompose_large_entries():
    # entries are consecutive Fibonacci numbers, so every partial quotient is 1
    A =sl2z.power(GL2ZMatrix(1, 1, 1, 2), 40)
    assert A.a > 10**15
    word, sign = sl2z.decompose(A)
    W = sl2z.evaluate_word(word)
    assert (W if sign == 1 else -W) == A
    assert len(word) < 200


def test_decompose_refuses_huge_words():
    with pytest.raises(sl2z.WordTooLong):
        sl2z.decompose(GL2ZMatrix(10**18, 10**18 - 1, 1, 1))


def test_conj_xy_swaps_generators():
    assert sl2z.conj_xy(A1) == A2
    assert sl2z.conj_xy(sl2z.conj_xy(A_STAR)) == A_STAR

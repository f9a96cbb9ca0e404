from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from oracles import riemann_signature
from sigforest.path import FunctionalPath, Window, from_observations, restrict, uniform_grid
from sigforest.sigcore import (
    SignatureError,
    SignatureVector,
    batch_fold_signature,
    batch_signature,
    batch_word_signature,
    chen_concat,
    coordinate_signature,
    exp_increment,
    level_offsets,
    path_signatures,
    segment_signature,
    segmentwise_kernel,
    signature_kernel,
    signature_length,
    tensor_product,
    truncated_signature,
    word_index,
    words,
)


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def _random_path(rng: np.random.Generator, p: int, d: int) -> FunctionalPath:
    return FunctionalPath(uniform_grid(p), rng.normal(size=(p, d)))


def test_layout_and_word_index():
    assert list(words(2, 2)) == [(1,), (2,), (1, 1), (1, 2), (2, 1), (2, 2)]
    for r, w in enumerate(words(3, 3)):
        assert word_index(w, 3) == r + 1
    assert level_offsets(2, 3) == [0, 1, 3, 7, 15]
    with pytest.raises(SignatureError):
        word_index((0,), 2)
    with pytest.raises(SignatureError):
        word_index((), 2)


def test_closed_form_segment():
    s = segment_signature([0.0], [2.0], 1.0, 3)
    np.testing.assert_array_equal(s.coefficients, [1.0, 2.0, 2.0, 4.0 / 3.0])
    # 2D segment: level 2 is the outer product over 2
    s2 = segment_signature([0.0, 0.0], [1.0, 3.0], 0.5, 2)
    assert s2[(1, 2)] == 1.5 and s2[(2, 2)] == 4.5 and s2[()] == 1.0
    with pytest.raises(SignatureError):
        segment_signature([0.0], [1.0], 0.0, 2)


def test_signature_vector_validation():
    with pytest.raises(SignatureError):
        SignatureVector(2, 2, np.zeros(5))
    t = SignatureVector.trivial(2, 2)
    assert t[()] == 1.0 and np.all(t.level(2) == 0)
    with pytest.raises(SignatureError):
        t[(1, 1, 1)]


def test_matches_nested_quadrature_oracle():
    rng = np.random.default_rng(11)
    for _ in range(20):
        d, p, k = int(rng.integers(1, 4)), int(rng.integers(2, 15)), int(rng.integers(1, 5))
        x = _random_path(rng, p, d)
        got = truncated_signature(x, k).coefficients
        assert _rel(got, riemann_signature(x.values, k)) <= 1e-9


def test_three_routes_agree():
    rng = np.random.default_rng(3)
    inc = rng.normal(size=(4, 7, 2))
    full = batch_signature(inc, 3)
    np.testing.assert_allclose(full, batch_fold_signature(inc, 3), rtol=1e-13, atol=1e-14)
    for w in words(2, 3):
        np.testing.assert_allclose(batch_word_signature(inc, w), full[:, word_index(w, 2)], rtol=1e-12, atol=1e-14)


def test_one_dimensional_shortcut_is_exact():
    values = np.array([[[5.0], [7.3], [1.1], [5.0]]])
    sig = path_signatures(values, 3)
    np.testing.assert_array_equal(sig[0], [1.0, 0.0, 0.0, 0.0])


def test_chen_identity():
    rng = np.random.default_rng(5)
    x = _random_path(rng, 12, 3)
    whole = truncated_signature(x, 4)
    left = truncated_signature(restrict(x, Window(0, 6)), 4)
    right = truncated_signature(restrict(x, Window(5, 7)), 4)
    assert _rel(chen_concat(left, right).coefficients, whole.coefficients) <= 1e-12


def test_chen_rejects_mismatch():
    with pytest.raises(SignatureError):
        chen_concat(SignatureVector.trivial(2, 2), SignatureVector.trivial(2, 3))


def test_tensor_product_identity_and_inverse():
    rng = np.random.default_rng(2)
    delta = rng.normal(size=3)
    a = exp_increment(delta, 3)
    one = SignatureVector.trivial(3, 3).coefficients
    np.testing.assert_allclose(tensor_product(a, one, 3, 3), a)
    np.testing.assert_allclose(tensor_product(a, exp_increment(-delta, 3), 3, 3), one, atol=1e-14)


def test_level_two_shuffle_identity():
    # S^{(i,j)} + S^{(j,i)} = S^{(i)} S^{(j)} for any path
    rng = np.random.default_rng(8)
    s = truncated_signature(_random_path(rng, 9, 2), 2)
    assert math.isclose(s[(1, 2)] + s[(2, 1)], s[(1,)] * s[(2,)], rel_tol=1e-12)
    assert math.isclose(s[(1, 1)], s[(1,)] ** 2 / 2, rel_tol=1e-12)


def test_levy_area_of_unit_square():
    # counter-clockwise unit square: signed area 1 = (S^{12} - S^{21}) / 2
    sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]], dtype=float)
    s = truncated_signature(FunctionalPath(uniform_grid(5), sq), 2)
    assert s[(1, 2)] - s[(2, 1)] == pytest.approx(2.0, abs=1e-14)


def test_coordinate_signature_and_kernel():
    rng = np.random.default_rng(4)
    x, y = _random_path(rng, 10, 2), _random_path(rng, 10, 2)
    sx, sy = truncated_signature(x, 3), truncated_signature(y, 3)
    assert coordinate_signature(x, (2, 1, 2)) == pytest.approx(sx[(2, 1, 2)], rel=1e-12)
    assert signature_kernel(x, y, 3) == pytest.approx(float(sx.coefficients @ sy.coefficients), rel=1e-14)
    with pytest.raises(SignatureError):
        signature_kernel(x, _random_path(rng, 10, 3), 2)


def test_segmentwise_kernel_level_one():
    rng = np.random.default_rng(9)
    x, y = _random_path(rng, 8, 2), _random_path(rng, 8, 2)
    expected = 1.0 + float(np.sum(np.diff(x.values, axis=0) * np.diff(y.values, axis=0)))
    assert segmentwise_kernel(x, y, 1) == pytest.approx(expected, rel=1e-14)


def test_coefficient_counts_by_enumeration():
    for d in range(1, 5):
        for k in range(1, 5):
            assert signature_length(d, k) == 1 + len(list(words(d, k)))


@settings(max_examples=60, deadline=None)
@given(
    hnp.arrays(np.float64, st.tuples(st.integers(2, 8), st.integers(1, 3)), elements=st.floats(-3, 3)),
    st.integers(1, 4),
)
def test_reparametrisation_invariance(values, depth):
    p = values.shape[0]
    uniform = FunctionalPath(uniform_grid(p), values)
    warped = FunctionalPath(uniform_grid(p) ** 2, values)
    np.testing.assert_allclose(
        truncated_signature(uniform, depth).coefficients,
        truncated_signature(warped, depth).coefficients,
        rtol=0,
        atol=0,
    )


@settings(max_examples=60, deadline=None)
@given(
    hnp.arrays(np.float64, st.tuples(st.integers(2, 8), st.integers(1, 3)), elements=st.floats(-3, 3)),
    st.integers(1, 3),
)
def test_translation_invariance_and_reverse_inverse(values, depth):
    p, d = values.shape
    x = FunctionalPath(uniform_grid(p), values)
    shifted = FunctionalPath(uniform_grid(p), values + 7.0)
    a = truncated_signature(x, depth).coefficients
    np.testing.assert_allclose(truncated_signature(shifted, depth).coefficients, a, rtol=1e-9, atol=1e-9)
    back = truncated_signature(FunctionalPath(uniform_grid(p), values[::-1]), depth).coefficients
    prod = tensor_product(a, back, d, depth)
    scale = max(1.0, float(np.abs(a).max()) ** 2)
    np.testing.assert_allclose(prod, SignatureVector.trivial(d, depth).coefficients, atol=1e-9 * scale)


def test_exact_rational_golden():
    # 2D path (0,0) -> (1,0) -> (1,2): S^{(1,2)} = 1 * 2 = 2, S^{(2,1)} = 0, S^{(1,1,2)} = 1/2 * 2
    x = from_observations([0.0, 0.5, 1.0], [[0, 0], [1, 0], [1, 2]])
    s = truncated_signature(x, 3)
    assert s[(1, 2)] == 2.0 and s[(2, 1)] == 0.0
    assert Fraction(s[(1, 1, 2)]) == Fraction(1)
    assert Fraction(s[(1, 2, 2)]) == Fraction(2)

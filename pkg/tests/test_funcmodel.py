from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from imgsearch.errors import DomainRangeError, VerticalPairError
from imgsearch.funcmodel import (Box, OrdinateCodec, doubled_area_key, doubled_area_keys,
                                 hyperplane_distance_key, hyperplane_keys, intersection_key,
                                 intersection_keys, slope_key, slope_keys, slope_sentinel)

W = 4
GRID = list(product(range(1 << W), repeat=2))


def test_eval(f3x, fgrid):
    assert f3x.eval(3) == (9,)
    assert fgrid.eval(6) == (2, 1)
    with pytest.raises(DomainRangeError):
        f3x.eval(8)


def test_eval_deterministic_and_bounded(f3x):
    xs = np.arange(8)
    a, b = f3x.eval_batch(xs), f3x.eval_batch(xs)
    assert all(np.array_equal(u, v) for u, v in zip(a, b))
    assert all(int(v) < 1 << 4 for v in a[0])


def test_slope_key_values():
    assert slope_key((0, 0), (1, 1), 4).value == 33792
    assert slope_key((0, 0), (2, 1), 4).value == 33280
    with pytest.raises(VerticalPairError):
        slope_key((1, 0), (1, 3), 4)


def test_slope_key_order_matches_rationals():
    pts = [(0, 0), (1, 3), (2, 1), (3, 2), (5, 5), (7, 1), (15, 15), (9, 0), (4, 12)]
    pairs = [(p, q) for p in pts for q in pts if p[0] != q[0]]
    for (p, q), (r, s) in product(pairs, repeat=2):
        a = Fraction(q[1] - p[1], q[0] - p[0])
        b = Fraction(s[1] - r[1], s[0] - r[0])
        ka, kb = slope_key(p, q, W).value, slope_key(r, s, W).value
        assert (a < b) == (ka < kb) and (a == b) == (ka == kb)


@given(st.integers(2, 8))
def test_third_below_half(w):
    assert slope_key((0, 0), (3, 1), w) < slope_key((0, 0), (2, 1), w)


def test_vectorized_slope_matches_scalar():
    rng = np.random.default_rng(0)
    c = rng.integers(0, 16, (4, 200))
    keys = slope_keys(*c, W)
    for i in range(200):
        p, q = (c[0, i], c[1, i]), (c[2, i], c[3, i])
        want = slope_sentinel(W) if p[0] == q[0] else slope_key(p, q, W).value
        assert int(keys[i]) == want


def test_doubled_area():
    assert doubled_area_key((0, 0), (4, 0), (0, 4)) == 16
    assert doubled_area_key((0, 0), (1, 1), (2, 2)) == 0
    assert doubled_area_key((4, 0), (0, 4), (1, 1)) == 8
    c = np.array([[4, 0], [0, 0], [0, 4], [4, 0], [1, 0], [1, 4]])
    assert doubled_area_keys(*c).tolist() == [8, 16]


def test_hyperplane_keys():
    half = hyperplane_distance_key([(1, 0), (0, 1)], W)
    assert half.approx() == Fraction(1, 2)
    assert hyperplane_distance_key([(1, 0), (2, 0)], W).value == 0
    a = hyperplane_distance_key([(1, 0), (2, 2)], W)
    b = hyperplane_distance_key([(0, 1), (2, 2)], W)
    assert a == b and abs(a.approx() - Fraction(4, 5)) < Fraction(1, 1 << a.frac_bits)
    cols = [[np.array([1, 0]), np.array([0, 1])], [np.array([0, 2]), np.array([1, 2])]]
    assert hyperplane_keys(cols, 2, W).tolist() == [half.value, b.value]


def test_intersection_keys():
    codec = OrdinateCodec(W, 4)
    assert intersection_key((0, 0), (2, 2), 4, W) == codec.ordinate(4)
    assert intersection_key((0, 1), (2, 1), 100, W) == OrdinateCodec(W, 100).ordinate(1)


def test_half_integer_crossing_never_matches_grid():
    codec = OrdinateCodec(W, 1)
    assert intersection_key((0, 3), (2, 4), 1, W) not in (codec.ordinate(3), codec.ordinate(4))
    pts = GRID[::7]
    for p, q in product(pts, repeat=2):
        key = intersection_key(p, q, 1, W).value
        for y in range(-2, 20):
            hit = (q[0] - p[0]) * (y - p[1]) - (q[1] - p[1]) * (1 - p[0]) == 0
            if p[0] == q[0]:
                continue
            assert (key == codec.ordinate(y).value) == hit


def test_intersection_vector_matches_scalar():
    rng = np.random.default_rng(3)
    c = rng.integers(0, 16, (4, 300))
    codec = OrdinateCodec(W, 5)
    keys = intersection_keys(*c, codec)
    for i in range(300):
        assert int(keys[i]) == intersection_key((c[0, i], c[1, i]), (c[2, i], c[3, i]), 5, W).value


def test_box_validation():
    with pytest.raises(ValueError):
        Box((3,), (2,))
    b = Box.of((1, 2), (0, 1))
    assert b.contains((2, 1)) and not b.contains((3, 1))
    assert Box.full((2, 1)) == Box((0, 0), (3, 1))

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from imgsearch.app_geometry import (PointSet, build_collinearity, build_tuple_index,
                                    collinear_query, hyperplane_select, theil_sen,
                                    triangle_select, tuple_median_in_boxes,
                                    tuple_rank_in_boxes, tuple_select_in_boxes)
from imgsearch.errors import InsufficientDataError
from imgsearch.funcmodel import Box, OrdinateCodec, hyperplane_distance_key, slope_key
from imgsearch.oracle import bf_query, exact_hyperplane_sqdist, exact_slope

from conftest import ENGINES

FOUR = [(0, 0), (1, 1), (2, 4), (3, 3)]


def full(W, d=2):
    return Box.full((W,) * d)


@pytest.mark.parametrize("engine", ENGINES)
def test_slope_tuple_examples(engine):
    S = PointSet(np.array(FOUR), 3)
    idx = build_tuple_index(S, 2, "slope", 0.5, engine=engine)
    boxes = [full(3)] * 2
    assert tuple_rank_in_boxes(idx, boxes, slope_key((0, 0), (1, 2), 3).value) == 8
    p, q = idx.points_of(tuple_median_in_boxes(idx, boxes))
    assert exact_slope(p, q) == 1
    assert tuple_select_in_boxes(idx, boxes, 13) is None


@pytest.mark.parametrize("engine", ENGINES)
def test_theil_sen_examples(engine):
    S = PointSet(np.array(FOUR), 3)
    (num, den), (p, q) = theil_sen(build_tuple_index(S, 2, "slope", 0.5, engine=engine), full(3))
    assert Fraction(num, den) == 1 and exact_slope(p, q) == 1
    two = build_tuple_index(PointSet(np.array([(0, 0), (2, 6)]), 3), 2, "slope", 0.5,
                            engine=engine)
    assert theil_sen(two, full(3))[0] == (3, 1)
    vertical = build_tuple_index(PointSet(np.array([(2, 0), (2, 5), (2, 7)]), 3), 2, "slope",
                                 0.5, engine=engine)
    with pytest.raises(InsufficientDataError):
        theil_sen(vertical, full(3))


@pytest.mark.parametrize("engine", ENGINES)
def test_triangle_examples(engine):
    S = PointSet(np.array([(0, 0), (4, 0), (0, 4), (1, 1)]), 3)
    idx = build_tuple_index(S, 3, "area", 0.5, engine=engine)
    b = Box.of((0, 4), (0, 4))
    pts, area2 = triangle_select(idx, b, b, b, 1)
    assert area2 == 16 and set(pts) == {(0, 0), (4, 0), (0, 4)}
    assert triangle_select(idx, b, b, b, 25) is None
    S = PointSet(np.array([(0, 0), (4, 0), (0, 4), (1, 1), (2, 2)]), 3)
    idx = build_tuple_index(S, 3, "area", 0.5, engine=engine)
    diag = Box.of((0, 2), (0, 2))
    pts, area2 = triangle_select(idx, diag, diag, diag, 1)
    assert area2 == 0 and set(pts) == {(0, 0), (1, 1), (2, 2)}


@pytest.mark.parametrize("engine", ENGINES)
def test_hyperplane_examples(engine):
    S = PointSet(np.array([(1, 0), (0, 1), (2, 2)]), 2)
    idx = build_tuple_index(S, 2, "hyperplane", 0.5, engine=engine)
    boxes = [full(2)] * 2
    pts, key = hyperplane_select(idx, boxes, 1)
    assert exact_hyperplane_sqdist(pts) == Fraction(4, 5) and (2, 2) in pts
    pts, key = hyperplane_select(idx, boxes, 6)
    assert set(pts) == {(1, 0), (0, 1)}
    origin = build_tuple_index(PointSet(np.array([(1, 1), (2, 2), (3, 0)]), 2), 2, "hyperplane",
                               0.5, engine=engine)
    one = Box.of((1, 2), (1, 2))
    pts, key = hyperplane_select(origin, [one, one], 1)
    assert key == 0


@pytest.mark.parametrize("engine", ENGINES)
def test_collinearity_examples(engine):
    idx = build_collinearity(PointSet(np.array([(0, 0)]), 3), PointSet(np.array([(2, 2)]), 3),
                             4, 0.5, engine=engine)
    assert collinear_query(idx, 4) == ((0, 0), (2, 2))
    assert collinear_query(idx, 3) is None


def test_collinearity_random_exhaustive():
    rng = np.random.default_rng(11)
    W = 8
    a, b = rng.integers(0, 1 << W, (32, 2)), rng.integers(0, 1 << W, (32, 2))
    idx = build_collinearity(PointSet(a, W), PointSet(b, W), 100, 0.5, engine="dictionary")
    inst = {"S1": a.tolist(), "S2": b.tolist(), "line_x": 100}
    for qy in range(0, 1 << W, 3):
        want = bf_query("collinear", inst, {"q_y": qy})
        got = collinear_query(idx, qy)
        assert (got is None) == (not want) and (got is None or got in want)


@settings(max_examples=12)
@given(st.lists(st.tuples(st.integers(0, 7), st.integers(0, 7)), min_size=2, max_size=7,
                unique=True),
       st.tuples(st.integers(0, 7), st.integers(0, 7), st.integers(0, 7), st.integers(0, 7)))
def test_property_theil_sen(points, raw):
    S = PointSet(np.array(points), 3)
    idx = build_tuple_index(S, 2, "slope", 0.5)
    b = Box.of((min(raw[0], raw[1]), max(raw[0], raw[1])), (min(raw[2], raw[3]), max(raw[2], raw[3])))
    want = bf_query("theil-sen", {"points": points}, {"box": b})
    if want is None:
        with pytest.raises(InsufficientDataError):
            theil_sen(idx, b)
    else:
        (num, den), (p, q) = theil_sen(idx, b)
        assert Fraction(num, den) == want == exact_slope(p, q)

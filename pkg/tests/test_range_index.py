import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from imgsearch.dyadic import DyadicBox
from imgsearch.funcmodel import Box, GridFunction, LinearCoord, linear_function
from imgsearch.oracle import bf_query
from imgsearch.range_index import (build_count_index, build_range_index, build_report_index,
                                   count, count_threshold, levelled_key_function, report, search)

from conftest import ENGINES


def table_function(values, w):
    values = np.asarray(values, dtype=np.int64)
    if values.ndim == 1:
        values = values[:, None]
    return GridFunction(len(values), (w,) * values.shape[1],
                        lambda xs: [values[xs, j] for j in range(values.shape[1])])


@pytest.mark.parametrize("engine", ENGINES)
def test_search_examples(f3x, engine):
    idx = build_range_index(f3x, 0.5, seed=0, engine=engine)
    assert search(idx, Box.of((7, 11))) == 3
    assert search(idx, Box.of((10, 11))) is None
    assert search(idx, Box.full((4,))) in range(8)


@pytest.mark.parametrize("engine", ENGINES)
def test_count_examples(f3x, fmod4, engine):
    assert count(build_count_index(f3x, 0.5, engine=engine), Box.of((0, 6))) == 5
    assert count(build_count_index(fmod4, 0.5, engine=engine), Box.of((1, 2))) == 2
    weighted = build_count_index(f3x, 0.5, engine=engine, weight=lambda cols: cols[0])
    assert count(weighted, Box.of((2, 3))) == 5


@pytest.mark.parametrize("engine", ENGINES)
def test_report_examples(f3x, engine):
    idx = build_report_index(f3x, 0.5, engine=engine)
    assert report(idx, Box.of((0, 6)), 3) == [0, 1, 2]
    assert report(idx, Box.of((10, 11)), 5) == []
    assert report(idx, Box.full((4,)), 100) == list(range(8))


def test_identity_top_level_key():
    f = linear_function(16, [LinearCoord(1)], [4])
    idx = build_range_index(f, 0.5, engine="dictionary")
    kf = levelled_key_function(f)
    top = idx.key_rows([DyadicBox((0,), (4,))])
    for x in range(16):
        e = x * idx.levels_per_x + 4
        assert np.array_equal(kf.words(np.array([e])), top)


def test_threshold():
    assert count_threshold(1 << 12, 0.5) == int(np.ceil((1 << 12) ** 0.125))


def test_heavy_dictionary_is_exact(f3x):
    idx = build_count_index(f3x, 0.9, engine="dictionary")
    for row, s in zip(idx.heavy_rows, idx.heavy_sums):
        assert s >= idx.threshold
    assert idx.space_words() == idx.ranges.space_words() + idx.dictionary_words()


def test_deterministic_rebuild(f3x):
    a = build_count_index(f3x, 0.5, seed=4)
    b = build_count_index(f3x, 0.5, seed=4)
    assert np.array_equal(a.ranges.inverter.starts, b.ranges.inverter.starts)
    assert np.array_equal(a.heavy_rows, b.heavy_rows)


boxes_2d = st.tuples(st.integers(0, 15), st.integers(0, 15), st.integers(0, 15),
                     st.integers(0, 15))


@settings(max_examples=25)
@given(st.lists(st.tuples(st.integers(0, 15), st.integers(0, 15)), min_size=1, max_size=40),
       st.lists(boxes_2d, min_size=1, max_size=6), st.sampled_from(ENGINES))
def test_property_matches_oracle(points, raw_boxes, engine):
    f = table_function(points, 4)
    inst = {"table": points}
    s = build_range_index(f, 0.5, engine=engine)
    c = build_count_index(f, 0.5, engine=engine)
    r = build_report_index(f, 0.5, engine=engine)
    for a, b, u, v in raw_boxes:
        box = Box.of((min(a, b), max(a, b)), (min(u, v), max(u, v)))
        wit = set(bf_query("range-witnesses", inst, {"box": box}))
        x = s.search(box)
        assert (x is None) == (not wit) and (x is None or x in wit)
        assert c.count(box) == bf_query("range-count", inst, {"box": box})
        assert r.report(box, 4) == bf_query("range-report", inst, {"box": box, "k": 4})

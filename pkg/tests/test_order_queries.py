import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from imgsearch.funcmodel import Box, GridFunction, LinearCoord, linear_function
from imgsearch.oracle import bf_query
from imgsearch.order_queries import (build_order_index, median_in_box, predecessor,
                                     preimage_median, preimage_rank, preimage_select, rank,
                                     rank_in_box, select, select_in_box)
from imgsearch.packing import column

from conftest import ENGINES

ALL = ("values", "pairs")


def sum_mu(cols):
    return column(sum(np.asarray(c, dtype=np.int64) for c in cols), 3)


@pytest.mark.parametrize("engine", ENGINES)
def test_value_examples(f3x, fmod3, engine):
    idx = build_order_index(f3x, 0.5, families=ALL, engine=engine)
    assert f3x.eval(predecessor(idx, 7))[0] == 6
    assert predecessor(idx, 0) == 0
    assert rank(idx, 7) == 5
    assert rank(idx, 0) == 0
    assert select(idx, 1) == 5
    assert select(idx, 8) == 0
    assert select(idx, 9) is None
    assert rank(build_order_index(fmod3, 0.5, families=ALL, engine=engine), 1) == 3
    shifted = linear_function(8, [LinearCoord(1, 5)], [4])
    assert predecessor(build_order_index(shifted, 0.5, families=ALL, engine=engine), 4) is None


@pytest.mark.parametrize("engine", ENGINES)
def test_box_examples(fgrid, engine):
    idx = build_order_index(fgrid, 0.5, families=("scored",), mu=sum_mu, mu_bits=3,
                            engine=engine)
    b = Box.of((1, 2), (0, 1))
    assert rank_in_box(idx, b, 2) == 1
    assert select_in_box(idx, b, 1) == 6
    x = median_in_box(idx, b)
    assert sum(fgrid.eval(x)) == 2


@pytest.mark.parametrize("engine", ENGINES)
def test_preimage_examples(fmod3, engine):
    idx = build_order_index(fmod3, 0.5, families=ALL, engine=engine)
    assert preimage_rank(idx, 1, 5) == 2
    assert preimage_select(idx, 0, 2) == 3
    assert preimage_median(idx, 0) == 3


@settings(max_examples=20)
@given(st.lists(st.integers(0, 31), min_size=1, max_size=48), st.integers(0, 40),
       st.integers(1, 50), st.sampled_from(ENGINES))
def test_property_value_queries(values, y, k, engine):
    arr = np.array(values, dtype=np.int64)
    f = GridFunction(len(values), (5,), lambda xs: [arr[xs]])
    idx = build_order_index(f, 0.5, families=ALL, engine=engine)
    inst = {"table": values}
    yq = min(y, 31)
    p = idx.predecessor(yq)
    want = bf_query("predecessor", inst, {"y": yq})
    assert (p is None and want is None) or values[p] == want
    assert idx.rank(yq) == bf_query("rank", inst, {"y": yq})
    assert idx.rank_distinct(yq) == bf_query("rank-distinct", inst, {"y": yq})
    s = idx.select(k)
    want = bf_query("select", inst, {"k": k})
    assert (s is None and want is None) or values[s] == want
    z = y % (len(values) + 1)
    assert idx.preimage_rank(arr[0], z) == bf_query("preimage-rank", inst, {"y": arr[0], "z": z})
    assert idx.preimage_select(arr[0], k) == bf_query("preimage-select", inst,
                                                      {"y": arr[0], "k": k})
    assert idx.preimage_median(arr[0]) == bf_query("preimage-median", inst, {"y": arr[0]})

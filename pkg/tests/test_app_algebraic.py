from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from imgsearch.app_algebraic import Polynomial, build_kpol, kpol_query
from imgsearch.oracle import bf_query

from conftest import ENGINES

S1, S2 = [1, 3, 8], [2, 5, 7]
SUM2 = Polynomial.parse("1*x1^1*x2^0 + 1*x1^0*x2^1")


def test_parse_and_eval():
    assert SUM2.arity == 2 and SUM2(3, 7) == 10
    p = Polynomial.parse("2*x1^2 + 3*x2^1*x1^1 + 5")
    assert p(2, 1) == 2 * 4 + 3 * 2 + 5
    with pytest.raises(ValueError):
        Polynomial.parse("x1 - x2")


@pytest.mark.parametrize("engine", ENGINES)
def test_three_sum_examples(engine):
    idx = build_kpol([S1, S2], SUM2, 0.5, engine=engine)
    assert kpol_query(idx, [(0, 9), (0, 9)], 10) in {(3, 7), (8, 2)}
    assert kpol_query(idx, [(0, 9), (0, 9)], 4) is None
    assert kpol_query(idx, [(3, 3), (7, 7)], 10) == (3, 7)
    assert idx.count([(0, 9), (0, 9)], 10) == 2


def test_single_set_is_range_search():
    idx = build_kpol([S1], Polynomial.parse("x1"), 0.5)
    for y in range(10):
        assert (kpol_query(idx, [(0, 15)], y) is not None) == (y in S1)


def test_domain_size_three_sets():
    sets = [list(range(j, j + 8)) for j in (0, 10, 20)]
    idx = build_kpol(sets, Polynomial.parse("x1 + x2 + x3"), 0.5)
    assert idx.order.f.domain_size == 512


@settings(max_examples=15)
@given(st.lists(st.lists(st.integers(0, 20), min_size=1, max_size=6), min_size=2, max_size=2),
       st.integers(0, 40), st.tuples(st.integers(0, 20), st.integers(0, 20)),
       st.sampled_from(ENGINES))
def test_property_matches_oracle(sets, y, box, engine):
    lo, hi = min(box), max(box)
    idx = build_kpol(sets, SUM2, 0.5, engine=engine)
    want = bf_query("kpol", {"sets": sets, "p": lambda a, b: a + b},
                    {"boxes": [(lo, hi), (0, 20)], "y": y})
    got = kpol_query(idx, [(lo, hi), (0, 20)], y)
    assert (got is None) == (not want) and (got is None or got in want)
    assert idx.count([(lo, hi), (0, 20)], y) == len(want)

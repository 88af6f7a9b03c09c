from fractions import Fraction

import pytest

from imgsearch.errors import SizeGuardError
from imgsearch.funcmodel import Box
from imgsearch.oracle import OracleConfig, bf_query, exact_hyperplane_sqdist


def test_spec_examples(f3x):
    assert bf_query("range-search", {"f": f3x}, {"box": Box.of((7, 11))}) == 3
    pts = [(0, 0), (1, 1), (2, 4), (3, 3)]
    assert bf_query("theil-sen", {"points": pts}, {"box": Box.full((3, 3))}) == 1
    pairs = bf_query("gapped", {"text": b"banana"}, {"p1": b"a", "p2": b"na", "gap": (1, 1)})
    assert pairs == {(1, 2), (3, 2), (3, 4), (5, 4)}


def test_guard():
    with pytest.raises(SizeGuardError):
        bf_query("suffix-array", {"text": b"abcdef"}, config=OracleConfig(max_size=5))


def test_multiset_and_distinct_semantics(fmod4):
    inst = {"f": fmod4}
    assert bf_query("range-count", inst, {"box": Box.of((1, 2))}) == 2
    assert bf_query("range-count", inst, {"box": Box.of((1, 2))},
                    OracleConfig(distinct_counting=False)) == 4
    assert bf_query("rank", inst, {"y": 2}) == 4
    assert bf_query("rank-distinct", inst, {"y": 2}) == 2


def test_tuple_kinds():
    inst = {"points": [(0, 0), (1, 1), (2, 4), (3, 3)], "delta": "slope", "t": 2}
    boxes = [((0, 0), (7, 7))] * 2
    assert bf_query("tuple-rank", inst, {"boxes": boxes, "y": Fraction(2)}) == 8
    assert bf_query("tuple-count", inst, {"boxes": boxes}) == 12
    assert bf_query("tuple-median", inst, {"boxes": boxes}) == 1
    assert bf_query("tuple-select", inst, {"boxes": boxes, "k": 1}) == 3


def test_hyperplane_exact():
    assert exact_hyperplane_sqdist([(1, 0), (0, 1)]) == Fraction(1, 2)
    assert exact_hyperplane_sqdist([(1, 0), (2, 2)]) == Fraction(4, 5)
    assert exact_hyperplane_sqdist([(1, 1), (2, 2)]) == 0


def test_unknown_kind():
    with pytest.raises(ValueError):
        bf_query("nope", {})

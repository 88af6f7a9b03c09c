from itertools import product

from hypothesis import given, strategies as st

from imgsearch.dyadic import DyadicBox, children, contains, decompose, level_floor
from imgsearch.funcmodel import Box


def test_contains():
    db = DyadicBox((1,), (2,))
    assert contains(db, (5,)) and not contains(db, (8,))
    assert contains(DyadicBox((0, 1), (1, 0)), (1, 1))


def test_children():
    assert set(children(DyadicBox((1,), (2,)))) == {DyadicBox((2,), (1,)), DyadicBox((3,), (1,))}
    assert set(children(DyadicBox((0, 1), (1, 0)))) == {DyadicBox((0, 1), (0, 0)),
                                                        DyadicBox((1, 1), (0, 0))}
    assert children(DyadicBox((5,), (0,))) == []


def test_decompose_examples():
    assert sorted(d.as_box().intervals[0] for d in decompose(Box.of((3, 9)), 4)) == \
        [(3, 3), (4, 7), (8, 9)]
    assert decompose(Box.of((0, 15)), 4) == [DyadicBox((0,), (4,))]
    assert decompose(Box.of((5, 5)), 4) == [DyadicBox((5,), (0,))]


def test_level_floor():
    assert level_floor((13,), (2,)) == (3,)
    assert level_floor((13,), (0,)) == (13,)
    assert level_floor((9, 6), (3, 1)) == (1, 3)


@given(st.lists(st.tuples(st.integers(0, 15), st.integers(0, 15)), min_size=1, max_size=2))
def test_decompose_is_disjoint_cover(ivs):
    b = Box.of(*((min(a, c), max(a, c)) for a, c in ivs))
    pieces = decompose(b, 4)
    for p in product(range(16), repeat=b.dimension):
        hits = sum(contains(db, p) for db in pieces)
        assert hits == (1 if b.contains(p) else 0)
    per_dim = 2 * 4
    assert len(pieces) <= per_dim ** b.dimension


@given(st.integers(0, 15), st.integers(0, 4))
def test_children_partition_parent(y, i):
    db = DyadicBox((y >> i,), (i,))
    kids = children(db)
    if i == 0:
        assert kids == []
        return
    lo, hi = db.interval(0)
    covered = sorted(v for k in kids for v in range(k.interval(0)[0], k.interval(0)[1] + 1))
    assert covered == list(range(lo, hi + 1))

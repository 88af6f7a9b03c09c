import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from imgsearch.bench import random_key_function
from imgsearch.errors import BuildFailure, CapacityError
from imgsearch.inversion import (KeyFunction, TradeoffParams, build_dictionary_inverter,
                                 build_tradeoff_inverter, eval_counter, invert,
                                 space_words)


def table_kf(values, width=16):
    values = np.asarray(values, dtype=np.int64)
    return KeyFunction(len(values), (width,), lambda xs: [values[xs]])


def test_dictionary_examples():
    inv = build_dictionary_inverter(table_kf([2 * x % 16 for x in range(8)]))
    assert invert(inv, 6) == 3
    assert invert(inv, 7) is None
    assert invert(inv, 0) == 0
    sq = build_dictionary_inverter(table_kf([x * x for x in range(8)]))
    assert invert(sq, 49) == 7
    assert space_words(sq) >= 8


def test_identity_256():
    inv = build_tradeoff_inverter(table_kf(np.arange(256)), 0.5, seed=0)
    assert [invert(inv, k) for k in range(256)] == list(range(256))
    assert invert(inv, 300) is None


def test_3x_mod_2_16_exhaustive():
    kf = table_kf(3 * np.arange(1 << 12) % (1 << 16))
    inv = build_tradeoff_inverter(kf, 0.6, seed=1)
    got = inv.invert_rows(kf.words(np.arange(1 << 12)))
    assert np.array_equal(got, np.arange(1 << 12))


def test_results_always_verify():
    kf = random_key_function(3000, 4)
    inv = build_tradeoff_inverter(kf, 0.4, seed=2)
    rng = np.random.default_rng(0)
    for y in rng.integers(0, 1 << 32, 300):
        x = inv.invert(int(y))
        assert x is None or kf.key(x) == (int(y),)


def test_agreement_with_dictionary():
    kf = table_kf(np.random.default_rng(1).integers(0, 1 << 13, 4096), 13)
    a = build_tradeoff_inverter(kf, 0.5, seed=3)
    b = build_dictionary_inverter(kf)
    rows = np.random.default_rng(2).integers(0, 1 << 13, (10_000, 1)).astype(np.uint64)
    assert np.array_equal(a.invert_rows(rows) >= 0, b.invert_rows(rows) >= 0)


def test_counter_and_walk_budget():
    kf = random_key_function(4096, 0)
    inv = build_tradeoff_inverter(kf, 0.6, seed=0)
    inv.reset_counter()
    assert eval_counter(inv) == 0
    worst = 0
    for x in range(0, 4096, 97):
        inv.reset_counter()
        inv.invert(kf.key(x))
        worst = max(worst, eval_counter(inv))
    assert worst <= inv.params.walk_budget
    inv.invert(12345678901)
    inv.reset_counter()
    assert eval_counter(inv) == 0


def test_space_audit_is_exact():
    inv = build_tradeoff_inverter(random_key_function(2048, 5), 0.5, seed=1)
    K = inv.kf.n_words
    want = 2 * len(inv.starts) + len(inv.heavy_pre) * (K + 1) + inv.coeffs.size + 1
    assert inv.space_words() == want


def test_chain_and_heavy_invariants():
    kf = random_key_function(2048, 6)
    inv = build_tradeoff_inverter(kf, 0.6, seed=2)
    assert np.array_equal(kf.words(inv.heavy_pre), inv.heavy_keys)
    table = np.repeat(np.arange(inv.n_tables), np.diff(inv.offsets))
    z = inv.starts.copy()
    for _ in range(inv.params.chain_length):
        z = inv._step(kf.words(z), z, table)
    assert np.array_equal(z, inv.ends)


def test_deterministic_rebuild():
    kf = random_key_function(1024, 7)
    a = build_tradeoff_inverter(kf, 0.5, seed=9)
    b = build_tradeoff_inverter(kf, 0.5, seed=9)
    assert np.array_equal(a.starts, b.starts) and np.array_equal(a.ends, b.ends)
    assert np.array_equal(a.coeffs, b.coeffs)


def test_params_sizing():
    p = TradeoffParams.for_domain(1 << 12, 0.6)
    assert p.subtables == 12
    assert p.tables == p.chain_length == int(np.ceil((1 << 12) ** 0.2 - 1e-9))
    assert p.heavy == int(np.ceil((1 << 12) ** 0.8 - 1e-9))


def test_capacity_guard(monkeypatch):
    monkeypatch.setenv("IMGSEARCH_MAX_DOMAIN", "1000")
    with pytest.raises(CapacityError):
        build_tradeoff_inverter(random_key_function(2000, 0), 0.5)


def test_retry_budget(monkeypatch):
    monkeypatch.setenv("IMGSEARCH_MAX_BUILD_RETRIES", "0")
    kf = random_key_function(4096, 3)
    try:
        inv = build_tradeoff_inverter(kf, 0.3, seed=0)
    except BuildFailure:
        return
    assert inv.attempt == 0


@settings(max_examples=15)
@given(st.lists(st.integers(0, 255), min_size=1, max_size=300), st.floats(0.2, 0.9),
       st.integers(0, 1000))
def test_property_complete_inversion(values, alpha, seed):
    kf = table_kf(values, 8)
    inv = build_tradeoff_inverter(kf, alpha, seed)
    got = inv.invert_rows(kf.words(np.arange(len(values))))
    assert all(values[int(x)] == v for x, v in zip(got, values))

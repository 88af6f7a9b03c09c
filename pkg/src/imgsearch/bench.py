"""Exponent benchmarks: audited space and per-query evaluation counts over a size grid."""

from __future__ import annotations

import csv
import time
from dataclasses import asdict, dataclass

import numpy as np

from .funcmodel import Box, GridFunction
from .inversion import KeyFunction, build_tradeoff_inverter
from .range_index import build_count_index, build_range_index

BENCH_APPS = ("inversion", "range", "count")
MAX_BENCH_N = 1 << 20
COLUMNS = ("app", "N", "alpha", "seed", "space_words", "max_query_evals", "mean_query_evals",
           "build_seconds")


@dataclass
class Cell:
    app: str
    N: int
    alpha: float
    seed: int
    space_words: int
    max_query_evals: int
    mean_query_evals: float
    build_seconds: float
    dictionary_words: int = 0


def random_table(N: int, W: int, seed: int) -> np.ndarray:
    return np.random.default_rng([seed, N, W]).integers(0, 1 << W, N, dtype=np.int64)


def random_grid_function(N: int, W: int, seed: int) -> GridFunction:
    table = random_table(N, W, seed)
    return GridFunction(N, (W,), lambda xs: [table[xs]], name="random")


def random_key_function(N: int, seed: int) -> KeyFunction:
    table = random_table(N, 32, seed)
    return KeyFunction(N, (32,), lambda xs: [table[xs]])


def _intervals(rng, W: int, q: int):
    out = []
    for _ in range(q):
        a, b = sorted(int(v) for v in rng.integers(0, 1 << W, 2))
        out.append(Box.of((a, b)))
    return out


def run_cell(app: str, N: int, alpha: float, seed: int, queries: int = 50,
             W: int = 32) -> Cell:
    rng = np.random.default_rng([seed, N, 7])
    t0 = time.perf_counter()
    evals = []
    dict_words = 0
    if app == "inversion":
        kf = random_key_function(N, seed)
        inv = build_tradeoff_inverter(kf, alpha, seed)
        build = time.perf_counter() - t0
        space = inv.space_words()
        for x in rng.integers(0, N, queries):
            inv.reset_counter()
            inv.invert(kf.key(int(x)))
            evals.append(inv.eval_counter)
    elif app == "range":
        idx = build_range_index(random_grid_function(N, W, seed), alpha, seed)
        build = time.perf_counter() - t0
        space = idx.space_words()
        for b in _intervals(rng, W, queries):
            idx.inverter.reset_counter()
            idx.search(b)
            evals.append(idx.inverter.eval_counter)
    elif app == "count":
        idx = build_count_index(random_grid_function(N, W, seed), alpha, seed)
        build = time.perf_counter() - t0
        space = idx.space_words()
        dict_words = idx.dictionary_words()
        for b in _intervals(rng, W, queries):
            idx.ranges.inverter.reset_counter()
            idx.count(b)
            evals.append(idx.ranges.inverter.eval_counter)
    else:
        raise ValueError(f"unknown bench app {app!r}; expected one of {BENCH_APPS}")
    return Cell(app, N, alpha, seed, space, int(max(evals)), float(np.mean(evals)), build,
                dict_words)


def fit_slope(ns, values) -> float:
    """Least-squares slope of ``log2 value`` against ``log2 N``."""
    x = np.log2(np.asarray(ns, dtype=float))
    y = np.log2(np.maximum(np.asarray(values, dtype=float), 1.0))
    return float(np.polyfit(x, y, 1)[0])


def slopes(cells: list[Cell]) -> dict[tuple[str, float], dict[str, float]]:
    """Per (app, alpha): slopes of mean space, worst query evals and dictionary words."""
    out = {}
    for key in sorted({(c.app, c.alpha) for c in cells}):
        group = [c for c in cells if (c.app, c.alpha) == key]
        ns = sorted({c.N for c in group})
        if len(ns) < 2:
            continue
        space = [np.mean([c.space_words for c in group if c.N == n]) for n in ns]
        worst = [max(c.max_query_evals for c in group if c.N == n) for n in ns]
        fit = {"space": fit_slope(ns, space), "query_evals": fit_slope(ns, worst)}
        if key[0] == "count":
            dwords = [np.mean([c.dictionary_words for c in group if c.N == n]) for n in ns]
            fit["dictionary"] = fit_slope(ns, dwords)
        out[key] = fit
    return out


def run_grid(app: str, sizes, alphas, trials: int, queries: int = 50, seed0: int = 0):
    return [run_cell(app, n, a, seed0 + s, queries)
            for a in alphas for n in sizes for s in range(trials)]


def write_csv(cells: list[Cell], path: str):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(COLUMNS)
        for c in cells:
            row = asdict(c)
            w.writerow([row["app"], row["N"], row["alpha"], row["seed"], row["space_words"],
                        row["max_query_evals"], f"{row['mean_query_evals']:.2f}",
                        f"{row['build_seconds']:.4f}"])

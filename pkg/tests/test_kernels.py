"""Compiled and numpy kernels must agree with brute force and with each other."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlgap import _fallback, kernels
from mlgap.core import LabeledCodeSet

BACKEND_MODULES = [kernels.BACKENDS[n] for n in sorted(kernels.BACKENDS)]


def random_set(rng, k, n, n_labels=3):
    values = [int(v) for v in rng.integers(0, 2, size=(n, k)) @ (1 << np.arange(k, dtype=object))]
    return LabeledCodeSet.from_values(k, values, rng.integers(0, n_labels, size=n).tolist())


def test_selected_backend_is_listed():
    assert kernels.BACKEND in kernels.BACKENDS
    assert kernels.BACKENDS["numpy"] is _fallback


@pytest.mark.parametrize("impl", BACKEND_MODULES)
@pytest.mark.parametrize("k", [1, 7, 64, 65, 130, 256])
def test_hamming_against_python_ints(impl, k):
    rng = np.random.default_rng(k)
    db = random_set(rng, k, 30)
    q = random_set(rng, k, 1)[0].code
    got = impl.hamming_to_query(db.words, q.words())
    assert got.tolist() == [(v ^ q.value).bit_count() for v in db.values()]
    m = impl.hamming_matrix(db.words, db.words)
    vals = db.values()
    assert m.tolist() == [[(a ^ b).bit_count() for b in vals] for a in vals]


@pytest.mark.parametrize("impl", BACKEND_MODULES)
def test_resolve_extreme_orders_blocks(impl):
    dist = np.array([2, 0, 2, 1, 0, 2], dtype=np.int32)
    rel = np.array([1, 0, 0, 1, 1, 1], dtype=np.uint8)
    assert impl.resolve_extreme(dist, rel, 2, True).tolist() == [1, 0, 1, 1, 1, 0]
    assert impl.resolve_extreme(dist, rel, 2, False).tolist() == [0, 1, 1, 0, 1, 1]


def ap_oracle(rel, K):
    hits, s = 0, 0.0
    for i, r in enumerate(rel[:K]):
        if r:
            hits += 1
            s += hits / (i + 1)
    return s / hits if hits else 0.0


@pytest.mark.parametrize("impl", BACKEND_MODULES)
@settings(max_examples=200)
@given(st.lists(st.booleans(), max_size=50), st.integers(1, 60))
def test_ap_sorted_matches_sequential_sum(impl, rel, K):
    arr = np.array(rel, dtype=np.uint8)
    assert impl.ap_sorted(arr, K) == ap_oracle(rel, K)


def lgap_agg_oracle(dist, ids, rel, r):
    out = []
    for j in range(r + 1):
        inside = [i for i in range(len(dist)) if dist[i] <= j]
        counts = {}
        for i in inside:
            counts[ids[i]] = counts.get(ids[i], 0) + 1
        out.append((len(inside), sum(rel[i] for i in inside), max(counts.values(), default=0)))
    return out


@pytest.mark.parametrize("impl", BACKEND_MODULES)
@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.integers(0, 60))
def test_lgap_aggregates(impl, seed, k, n):
    rng = np.random.default_rng(seed)
    db = random_set(rng, k, n) if n else LabeledCodeSet(k, [])
    q = random_set(rng, k, 1)[0].code
    dist = np.ascontiguousarray(_fallback.hamming_to_query(db.words, q.words()) if n else
                                np.zeros(0, np.int32), dtype=np.int32)
    rel = rng.integers(0, 2, size=n).astype(np.uint8)
    r = int(rng.integers(0, k + 1))
    got = impl.lgap_aggregates(dist, np.ascontiguousarray(db.code_ids, dtype=np.int64), rel, db.n_distinct, r)
    assert list(zip(*(a.tolist() for a in got))) == lgap_agg_oracle(dist.tolist(), db.code_ids.tolist(),
                                                                       rel.tolist(), r)


@pytest.mark.skipif("cython" not in kernels.BACKENDS, reason="compiled extension not built")
def test_backends_bit_identical_on_metrics():
    from mlgap import metrics

    rng = np.random.default_rng(7)
    db = random_set(rng, 6, 200, 4)
    results = {}
    previous = kernels.BACKEND
    for name in ("numpy", "cython"):
        kernels.use(name)
        try:
            results[name] = (
                metrics.per_query_ap(db, db, None, metrics.BEST, exclude_self=True),
                metrics.per_query_ap(db, db, 17, metrics.WORST),
                metrics.per_query_lgap(db, db, 3, exclude_self=True),
            )
        finally:
            kernels.use(previous)
    assert results["numpy"] == results["cython"]


def test_benchmark_smoke():
    import importlib.util
    from pathlib import Path

    path = Path(__file__).parent.parent / "benchmarks" / "bench_kernels.py"
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    bench = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(bench)
    rows = bench.run(n=500, k=20, repeat=1, seed=0)
    assert {r["kernel"] for r in rows} >= {"hamming_to_query", "ap_sorted", "lgap_aggregates"}
    assert all(set(kernels.BACKENDS) <= set(r) for r in rows)

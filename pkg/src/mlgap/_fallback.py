"""Numpy implementations of the compiled kernels (same signatures and results)."""
import numpy as np


def hamming_to_query(words: np.ndarray, q: np.ndarray) -> np.ndarray:
    x = np.bitwise_xor(words, q[np.newaxis, :])
    return np.bitwise_count(x).sum(axis=1, dtype=np.int32)


def hamming_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((a.shape[0], b.shape[0]), dtype=np.int32)
    for w in range(a.shape[1]):
        out += np.bitwise_count(np.bitwise_xor(a[:, w, np.newaxis], b[np.newaxis, :, w]))
    return out


def resolve_extreme(dist: np.ndarray, rel: np.ndarray, width: int, best: bool) -> np.ndarray:
    key = (1 - rel) if best else rel
    order = np.lexsort((key, dist))
    return np.ascontiguousarray(rel[order], dtype=np.uint8)


def ap_sorted(rel: np.ndarray, K: int) -> float:
    top = rel[:K].astype(bool)
    hits = np.cumsum(top)
    if hits.size == 0 or hits[-1] == 0:
        return 0.0
    ranks = np.arange(1, top.size + 1, dtype=np.float64)
    terms = hits[top].astype(np.float64) / ranks[top]
    # cumsum adds strictly left to right, matching the compiled loop
    return float(np.cumsum(terms)[-1] / float(hits[-1]))


def lgap_aggregates(dist, code_ids, rel, n_codes, r):
    inside = dist <= r
    d = dist[inside]
    retrieved = np.cumsum(np.bincount(d, minlength=r + 1)[: r + 1]).astype(np.int64)
    relevant = np.cumsum(np.bincount(d[rel[inside] == 1], minlength=r + 1)[: r + 1]).astype(np.int64)
    counts = np.bincount(code_ids[inside], minlength=n_codes)
    per_entry = counts[code_ids[inside]]
    maxcount = np.zeros(r + 1, dtype=np.int64)
    np.maximum.at(maxcount, d, per_entry)
    return retrieved, relevant, np.maximum.accumulate(maxcount)

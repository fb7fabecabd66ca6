"""Retrieval metrics over Hamming rankings.

Precision (top-K and within a radius), average precision under explicit
tie-resolution policies, the dispersion penalty and local group average
precision (LGAP / mLGAP).

Rankings group database items into tie blocks of equal Hamming distance.
Which order the items of a block take is decided by a :class:`TiePolicy`;
AP depends on that choice, LGAP does not.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .core import (
    BinaryCode,
    CodeHistogram,
    Entry,
    LabeledCodeSet,
    UsageError,
    ball_volume,
    distances_to,
    hamming_distance,
)


class RelevanceMode(enum.Enum):
    FINE = "fine"
    COARSE = "coarse"


@dataclass(frozen=True)
class TiePolicy:
    """How items at equal distance are ordered.

    ``best`` puts relevant items first inside each tie block, ``worst`` puts
    them last, ``stable`` keeps database input order and ``random`` shuffles
    each block with a generator seeded from ``seed``.
    """

    kind: str
    seed: int | None = None

    KINDS = ("best", "worst", "random", "stable")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise UsageError(f"unknown tie policy {self.kind!r}; expected one of {self.KINDS}")
        if self.kind == "random":
            if self.seed is None or not 0 <= int(self.seed) < 2**64:
                raise UsageError("random tie policy needs an unsigned 64-bit seed")
        elif self.seed is not None:
            raise UsageError(f"tie policy {self.kind!r} takes no seed")

    @classmethod
    def random(cls, seed: int) -> TiePolicy:
        return cls("random", int(seed))

    @classmethod
    def parse(cls, name: str, seed: int = 0) -> TiePolicy:
        name = name.strip().lower()
        return cls(name, seed) if name == "random" else cls(name)

    def __str__(self) -> str:
        return self.kind


BEST = TiePolicy("best")
WORST = TiePolicy("worst")
STABLE = TiePolicy("stable")


def _label_pair(x) -> tuple[int, int | None]:
    if isinstance(x, Entry):
        return x.label, x.superlabel
    if isinstance(x, tuple):
        return x[0], (x[1] if len(x) > 1 else None)
    return int(x), None


def indicator(item, query, mode: RelevanceMode = RelevanceMode.FINE) -> int:
    """1 if ``item`` is a true positive for ``query``.

    ``item`` and ``query`` are entries, ``(label, superlabel)`` tuples or plain
    integer labels.
    """
    il, isup = _label_pair(item)
    ql, qsup = _label_pair(query)
    if mode is RelevanceMode.COARSE:
        if isup is None or qsup is None:
            raise UsageError("coarse relevance needs superlabels on both item and query")
        return int(isup == qsup)
    return int(il == ql)


def relevance(db: LabeledCodeSet, query: Entry, mode: RelevanceMode) -> np.ndarray:
    """uint8 relevance flag of every database entry for ``query``."""
    if mode is RelevanceMode.COARSE:
        if db.superlabels is None or query.superlabel is None:
            raise UsageError("coarse relevance needs superlabels on database and query")
        return (db.superlabels == query.superlabel).astype(np.uint8)
    return (db.labels == query.label).astype(np.uint8)


@dataclass(frozen=True)
class TieBlock:
    distance: int
    relevant: tuple[bool, ...]
    ids: tuple[int, ...]

    def __post_init__(self):
        if len(self.relevant) != len(self.ids):
            raise UsageError("tie block relevance and ids differ in length")
        if not self.ids:
            raise UsageError("tie blocks are never empty")


@dataclass(frozen=True)
class RankedRetrieval:
    """Distance-sorted retrieval result with explicit tie blocks."""

    blocks: tuple[TieBlock, ...]
    query_label: int = 0
    total_relevant_in_db: int = 0

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        ds = [b.distance for b in self.blocks]
        if any(b <= a for a, b in zip(ds, ds[1:])):
            raise UsageError("tie block distances must be strictly increasing")

    @classmethod
    def from_arrays(cls, dist, rel, ids=None, query_label: int = 0,
                    total_relevant_in_db: int | None = None) -> RankedRetrieval:
        """Group items by distance; items keep their given order inside a block."""
        dist = np.asarray(dist, dtype=np.int64)
        rel = np.asarray(rel).astype(bool)
        ids = np.arange(dist.size) if ids is None else np.asarray(ids)
        if not (dist.size == rel.size == ids.size):
            raise UsageError("distance, relevance and id arrays differ in length")
        order = np.argsort(dist, kind="stable")
        blocks = []
        for d in np.unique(dist):
            sel = order[dist[order] == d]
            blocks.append(TieBlock(int(d), tuple(bool(x) for x in rel[sel]),
                                   tuple(int(x) for x in ids[sel])))
        if total_relevant_in_db is None:
            total_relevant_in_db = int(rel.sum())
        return cls(tuple(blocks), query_label, total_relevant_in_db)

    @property
    def n_items(self) -> int:
        return sum(len(b.ids) for b in self.blocks)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(distance int32, relevance uint8) in block order."""
        dist = np.array([b.distance for b in self.blocks for _ in b.ids], dtype=np.int32)
        rel = np.array([r for b in self.blocks for r in b.relevant], dtype=np.uint8)
        return dist, rel


def rank(db: LabeledCodeSet, query: Entry, mode: RelevanceMode = RelevanceMode.FINE,
         exclude: int | None = None) -> RankedRetrieval:
    """Rank the whole database by distance to ``query``; ``exclude`` drops one entry index."""
    dist = distances_to(db, query.code)
    rel = relevance(db, query, mode)
    ids = np.arange(len(db))
    if exclude is not None:
        keep = ids != exclude
        dist, rel, ids = dist[keep], rel[keep], ids[keep]
    return RankedRetrieval.from_arrays(dist, rel, ids, query_label=query.label)


def _resolve(dist: np.ndarray, rel: np.ndarray, policy: TiePolicy, rng=None) -> np.ndarray:
    """Relevance flags in final rank order after tie resolution."""
    if dist.size == 0:
        return np.zeros(0, dtype=np.uint8)
    dist = np.ascontiguousarray(dist, dtype=np.int32)
    rel = np.ascontiguousarray(rel, dtype=np.uint8)
    if policy.kind in ("best", "worst"):
        return kernels.resolve_extreme(dist, rel, int(dist.max()), policy.kind == "best")
    if policy.kind == "stable":
        order = np.argsort(dist, kind="stable")
    else:
        if rng is None:
            rng = np.random.default_rng(policy.seed)
        order = np.lexsort((rng.permutation(dist.size), dist))
    return np.ascontiguousarray(rel[order])


def resolve_ties(ranking: RankedRetrieval, policy: TiePolicy) -> np.ndarray:
    dist, rel = ranking.arrays()
    return _resolve(dist, rel, policy)


def _check_k(K):
    if K is not None and K <= 0:
        raise UsageError(f"K must be >= 1, got {K}")


def _precision_sorted(rel_sorted: np.ndarray, K: int | None) -> float:
    top = rel_sorted if K is None else rel_sorted[:K]
    if top.size == 0:
        return 0.0
    return int(top.sum()) / top.size


def precision_at_k(ranking: RankedRetrieval, K: int, policy: TiePolicy = STABLE) -> float:
    """Fraction of relevant items among the top K; fewer items than K truncates."""
    _check_k(K)
    return _precision_sorted(resolve_ties(ranking, policy), K)


def _ap_sorted(rel_sorted: np.ndarray, K: int | None) -> float:
    K = rel_sorted.size if K is None else K
    return float(kernels.ap_sorted(rel_sorted, K))


def average_precision(ranking: RankedRetrieval, K: int | None = None,
                      policy: TiePolicy = STABLE) -> float:
    """AP over the top K after tie resolution; 0 when no relevant item is in the top K.

    The denominator is the number of relevant items inside the top K.
    ``K=None`` ranks the whole list.
    """
    _check_k(K)
    return _ap_sorted(resolve_ties(ranking, policy), K)


def _ap_extremes(dist: np.ndarray, rel: np.ndarray, K: int | None) -> tuple[float, float]:
    """Exact (min, max) AP over all within-block orderings.

    Relevant-first / relevant-last orderings are extremal unless K cuts a tie
    block: then the number x of that block's relevant items landing inside the
    top K also changes the denominator, so every feasible x is tried.
    """
    n = dist.size
    if K is None or K >= n:
        return _ap_sorted(_resolve(dist, rel, WORST), K), _ap_sorted(_resolve(dist, rel, BEST), K)
    ds, inverse = np.unique(dist, return_inverse=True)
    n_all = np.bincount(inverse, minlength=ds.size)
    n_rel = np.bincount(inverse, weights=rel.astype(np.float64), minlength=ds.size).astype(np.int64)
    ends = np.cumsum(n_all)
    b = int(np.searchsorted(ends, K, side="left"))
    before = int(ends[b - 1]) if b else 0
    if ends[b] == K:
        return _ap_sorted(_resolve(dist, rel, WORST), K), _ap_sorted(_resolve(dist, rel, BEST), K)
    slots = K - before
    head_best = np.concatenate([np.r_[np.ones(r, np.uint8), np.zeros(a - r, np.uint8)]
                                for a, r in zip(n_all[:b], n_rel[:b])] or [np.zeros(0, np.uint8)])
    head_worst = np.concatenate([np.r_[np.zeros(a - r, np.uint8), np.ones(r, np.uint8)]
                                 for a, r in zip(n_all[:b], n_rel[:b])] or [np.zeros(0, np.uint8)])
    r_b, i_b = int(n_rel[b]), int(n_all[b] - n_rel[b])
    lo, hi = math.inf, -math.inf
    for x in range(max(0, slots - i_b), min(slots, r_b) + 1):
        up = np.concatenate([head_best, np.ones(x, np.uint8), np.zeros(slots - x, np.uint8)])
        down = np.concatenate([head_worst, np.zeros(slots - x, np.uint8), np.ones(x, np.uint8)])
        hi = max(hi, _ap_sorted(up, K))
        lo = min(lo, _ap_sorted(down, K))
    return lo, hi


def ap_bounds(ranking: RankedRetrieval, K: int | None = None) -> tuple[float, float]:
    """(worst, best) AP over every ordering of the tie blocks."""
    _check_k(K)
    dist, rel = ranking.arrays()
    return _ap_extremes(dist, rel, K)


def precision_at_radius(db: LabeledCodeSet, query: Entry, r: int,
                        mode: RelevanceMode = RelevanceMode.FINE,
                        exclude: int | None = None) -> float:
    """Relevant fraction of everything within Hamming radius r (0 if nothing is retrieved)."""
    if not 0 <= r <= db.width:
        raise UsageError(f"radius must be in [0, {db.width}], got {r}")
    dist = distances_to(db, query.code)
    rel = relevance(db, query, mode)
    inside = dist <= r
    if exclude is not None:
        inside[exclude] = False
    n = int(inside.sum())
    if n == 0:
        return 0.0
    return int(rel[inside].sum()) / n


def penalty_phi(S: CodeHistogram, k: int, r: int, center: BinaryCode | None = None) -> float:
    """Dispersion penalty of the codes retrieved inside a radius-r ball.

    Total count divided by (largest single-code count x ball volume). It is 1
    when every code of the ball holds the same number of samples and 0 for an
    empty histogram. Passing ``center`` checks that all codes lie in the ball.
    """
    if S.width != k:
        raise UsageError(f"histogram width {S.width} != k {k}")
    vol = ball_volume(k, r)
    if center is not None:
        for v in S.counts:
            if hamming_distance(center, BinaryCode(k, v)) > r:
                raise UsageError(f"code {BinaryCode(k, v)} lies outside the radius-{r} ball")
    a = S.total
    if a == 0:
        return 0.0
    return a / (S.max_count * vol)


def _lgap_value(retrieved, relevant, maxcount, k: int, r: int) -> float:
    total = 0.0
    for j in range(r + 1):
        a = int(retrieved[j])
        if a == 0:
            continue
        p = int(relevant[j]) / a
        phi = a / (int(maxcount[j]) * ball_volume(k, j))
        total += p * phi
    return total / (r + 1)


def _lgap_arrays(db: LabeledCodeSet, dist: np.ndarray, rel: np.ndarray, r: int,
                 exclude: int | None) -> float:
    code_ids = db.code_ids
    if exclude is not None:
        keep = np.ones(dist.size, dtype=bool)
        keep[exclude] = False
        dist, rel, code_ids = dist[keep], rel[keep], code_ids[keep]
    agg = kernels.lgap_aggregates(np.ascontiguousarray(dist, dtype=np.int32),
                                  np.ascontiguousarray(code_ids, dtype=np.int64),
                                  np.ascontiguousarray(rel, dtype=np.uint8),
                                  db.n_distinct, r)
    return _lgap_value(*agg, db.width, r)


def lgap(db: LabeledCodeSet, query: Entry, r: int, mode: RelevanceMode = RelevanceMode.FINE,
         exclude: int | None = None) -> float:
    """Local group average precision of one query at radius r.

    Mean over radii j = 0..r of (precision within j) x (penalty of the codes
    within j); empty balls contribute 0.
    """
    if not 0 <= r <= db.width:
        raise UsageError(f"radius must be in [0, {db.width}], got {r}")
    dist = distances_to(db, query.code)
    return _lgap_arrays(db, dist, relevance(db, query, mode), r, exclude)


def _check_pair(queries: LabeledCodeSet, db: LabeledCodeSet, exclude_self: bool):
    if len(queries) == 0:
        raise UsageError("query set is empty")
    if queries.width != db.width:
        raise UsageError(f"width mismatch: queries {queries.width} vs database {db.width}")
    if exclude_self and len(queries) != len(db):
        raise UsageError("exclude_self needs the query set to be the database itself")


def _query_rng(seed: int, index: int) -> np.random.Generator:
    # one independent stream per query index, so results do not depend on scheduling
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _map_queries(fn, n: int, workers: int):
    if workers <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n)))


def mean(values: Sequence[float]) -> float:
    """Order-independent mean (exactly rounded sum)."""
    if len(values) == 0:
        raise UsageError("mean of an empty sequence")
    return math.fsum(values) / len(values)


def per_query_ap(queries: LabeledCodeSet, db: LabeledCodeSet, K: int | None = None,
                 policy: TiePolicy = STABLE, mode: RelevanceMode = RelevanceMode.FINE,
                 exclude_self: bool = False, workers: int = 1) -> list[float]:
    _check_k(K)
    _check_pair(queries, db, exclude_self)

    def one(i):
        q = queries[i]
        dist = distances_to(db, q.code)
        rel = relevance(db, q, mode)
        if exclude_self:
            keep = np.arange(len(db)) != i
            dist, rel = dist[keep], rel[keep]
        rng = _query_rng(policy.seed, i) if policy.kind == "random" else None
        return _ap_sorted(_resolve(dist, rel, policy, rng), K)

    return _map_queries(one, len(queries), workers)


def mean_average_precision(queries: LabeledCodeSet, db: LabeledCodeSet, K: int | None = None,
                           policy: TiePolicy = STABLE, mode: RelevanceMode = RelevanceMode.FINE,
                           exclude_self: bool = False, workers: int = 1) -> float:
    """Mean AP over the query set. ``exclude_self`` drops database entry i for query i."""
    return mean(per_query_ap(queries, db, K, policy, mode, exclude_self, workers))


def per_query_lgap(queries: LabeledCodeSet, db: LabeledCodeSet, r: int,
                   mode: RelevanceMode = RelevanceMode.FINE, exclude_self: bool = False,
                   workers: int = 1) -> list[float]:
    _check_pair(queries, db, exclude_self)
    if not 0 <= r <= db.width:
        raise UsageError(f"radius must be in [0, {db.width}], got {r}")

    def one(i):
        q = queries[i]
        return _lgap_arrays(db, distances_to(db, q.code), relevance(db, q, mode), r,
                            i if exclude_self else None)

    return _map_queries(one, len(queries), workers)


def mlgap(queries: LabeledCodeSet, db: LabeledCodeSet, r: int,
          mode: RelevanceMode = RelevanceMode.FINE, exclude_self: bool = False,
          workers: int = 1) -> float:
    """Mean LGAP over the query set at radius r."""
    return mean(per_query_lgap(queries, db, r, mode, exclude_self, workers))


@dataclass
class QueryMetrics:
    index: int
    label: int
    ap: dict[str, float]
    ap_worst: float
    ap_best: float
    precision_at_k: float
    precision_at_radius: float
    lgap: float


def evaluate(queries: LabeledCodeSet, db: LabeledCodeSet, *, radius: int, K: int | None,
             policies: Sequence[TiePolicy], mode: RelevanceMode = RelevanceMode.FINE,
             exclude_self: bool = False, workers: int = 1) -> list[QueryMetrics]:
    """All per-query metrics from one distance scan per query.

    P@K is reported under the first policy in ``policies``.
    """
    _check_k(K)
    _check_pair(queries, db, exclude_self)
    if not 0 <= radius <= db.width:
        raise UsageError(f"radius must be in [0, {db.width}], got {radius}")
    if not policies:
        raise UsageError("at least one tie policy is required")

    def one(i):
        q = queries[i]
        dist = distances_to(db, q.code)
        rel = relevance(db, q, mode)
        lg = _lgap_arrays(db, dist, rel, radius, i if exclude_self else None)
        if exclude_self:
            keep = np.arange(len(db)) != i
            dist, rel = dist[keep], rel[keep]
        ap = {}
        first = None
        for pol in policies:
            rng = _query_rng(pol.seed, i) if pol.kind == "random" else None
            ordered = _resolve(dist, rel, pol, rng)
            if first is None:
                first = ordered
            ap[str(pol)] = _ap_sorted(ordered, K)
        inside = dist <= radius
        n_in = int(inside.sum())
        p_r = int(rel[inside].sum()) / n_in if n_in else 0.0
        lo, hi = _ap_extremes(dist, rel, K)
        return QueryMetrics(
            index=i,
            label=int(q.label),
            ap=ap,
            ap_worst=lo,
            ap_best=hi,
            precision_at_k=_precision_sorted(first, K),
            precision_at_radius=p_r,
            lgap=lg,
        )

    return _map_queries(one, len(queries), workers)

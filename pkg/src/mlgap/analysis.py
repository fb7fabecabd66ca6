"""Hamming-space geometry of labelled code sets.

Class diameters and margins, the separation condition under which a global
ranking can be perfect, orthodromes (great-circle cycles of 2k codes through
a code and its complement) and hash-space utilization.

A class is represented by the set of distinct codes its entries occupy.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from . import kernels
from .core import BinaryCode, LabeledCodeSet, UsageError, _int_to_words, n_words

UTILIZATION_BOUND = Fraction(2, 3)
EXHAUSTIVE_MAX_WIDTH = 4


@dataclass(frozen=True)
class ClassGeometry:
    class_id: int
    diameter: int
    margin: int | None  # None when the set has a single class


class SeparationResult(NamedTuple):
    holds: bool
    h_tilde_s: int


def class_codes(db: LabeledCodeSet) -> dict[int, list[int]]:
    """Distinct code values per class id, ascending."""
    out: dict[int, set[int]] = {}
    for e in db:
        out.setdefault(int(e.label), set()).add(e.code.value)
    return {c: sorted(v) for c, v in sorted(out.items())}


def _words(values: Sequence[int], width: int) -> np.ndarray:
    nw = n_words(width)
    if not values:
        return np.zeros((0, nw), dtype=np.uint64)
    return np.stack([_int_to_words(v, nw) for v in values])


def _lookup(db: LabeledCodeSet, class_id) -> tuple[dict[int, list[int]], list[int]]:
    groups = class_codes(db)
    if class_id not in groups:
        raise UsageError(f"unknown class {class_id}")
    return groups, groups[class_id]


def class_diameter(db: LabeledCodeSet, class_id: int) -> int:
    """Largest Hamming distance between two codes of the class (0 for one code)."""
    _, codes = _lookup(db, class_id)
    w = _words(codes, db.width)
    return int(kernels.hamming_matrix(w, w).max())


def class_margin(db: LabeledCodeSet, class_id: int) -> int:
    """Smallest Hamming distance from the class to any code of another class."""
    groups, codes = _lookup(db, class_id)
    if len(groups) < 2:
        raise UsageError("class margin needs at least two classes")
    others = sorted({v for c, vs in groups.items() if c != class_id for v in vs})
    d = kernels.hamming_matrix(_words(codes, db.width), _words(others, db.width))
    return int(d.min())


def class_geometry(db: LabeledCodeSet) -> list[ClassGeometry]:
    groups = class_codes(db)
    multi = len(groups) >= 2
    return [ClassGeometry(c, class_diameter(db, c), class_margin(db, c) if multi else None)
            for c in groups]


def separation_check(db: LabeledCodeSet) -> SeparationResult:
    """Whether every class diameter is below its margin, plus the smallest diameter.

    A smallest diameter of 0 means some class sits on a single code, which the
    utilization bound excludes; both facts are reported as-is.
    """
    geo = class_geometry(db)
    if len(geo) < 2:
        raise UsageError("separation check needs at least two classes")
    holds = all(g.diameter < g.margin for g in geo)
    return SeparationResult(holds, min(g.diameter for g in geo))


@dataclass(frozen=True)
class Orthodrome:
    start: BinaryCode
    flip_order: tuple[int, ...]
    codes: tuple[BinaryCode, ...] = field(repr=False)

    @property
    def values(self) -> frozenset[int]:
        return frozenset(c.value for c in self.codes)

    def __len__(self) -> int:
        return len(self.codes)


def _check_order(flip_order: Sequence[int], k: int) -> tuple[int, ...]:
    order = tuple(int(i) for i in flip_order)
    if sorted(order) != list(range(k)):
        raise UsageError(f"flip order must be a permutation of 0..{k - 1}, got {flip_order}")
    return order


def orthodrome(start: BinaryCode, flip_order: Sequence[int]) -> Orthodrome:
    """Flip the bits of ``start`` one at a time in ``flip_order`` until reaching its
    complement, then repeat the same order to come back: a cycle of 2k codes.

    ``flip_order`` uses 0-based bit indices.
    """
    k = start.width
    order = _check_order(flip_order, k)
    codes = [start]
    v = start.value
    for step in range(2 * k - 1):
        v ^= 1 << order[step % k]
        codes.append(BinaryCode(k, v))
    return Orthodrome(start, order, tuple(codes))


def _cycle_values(start: int, order: Sequence[int]) -> list[int]:
    k = len(order)
    out = [start]
    v = start
    for step in range(2 * k - 1):
        v ^= 1 << order[step % k]
        out.append(v)
    return out


@functools.lru_cache(maxsize=8)
def all_orthodromes(k: int) -> tuple[frozenset[int], ...]:
    """Code sets of every orthodrome in the k-bit space, duplicates removed.

    Enumerates all 2^k * k! start/order pairs, so only meant for small k.
    """
    if not 1 <= k <= 8:
        raise UsageError("exhaustive orthodrome enumeration supports k <= 8")
    seen = set()
    out = []
    for order in itertools.permutations(range(k)):
        for start in range(1 << k):
            s = frozenset(_cycle_values(start, order))
            if s not in seen:
                seen.add(s)
                out.append(s)
    return tuple(out)


def sample_orthodromes(k: int, count: int, seed: int, chunk: int = 1024) -> Iterator[frozenset[int]]:
    """Seeded random orthodromes.

    Chunk i draws from child stream i of ``SeedSequence(seed)``, so chunks can
    be produced independently and the sequence never depends on scheduling.
    """
    children = np.random.SeedSequence(seed).spawn((count + chunk - 1) // chunk)
    produced = 0
    for child in children:
        rng = np.random.default_rng(child)
        for _ in range(min(chunk, count - produced)):
            bits = rng.integers(0, 2, size=k)
            start = int(sum(1 << i for i in range(k) if bits[i]))
            order = [int(i) for i in rng.permutation(k)]
            produced += 1
            yield frozenset(_cycle_values(start, order))


def _occupied(db: LabeledCodeSet) -> set[int]:
    return {e.code.value for e in db}


def orthodrome_utilization(db: LabeledCodeSet, o: Orthodrome) -> float:
    """Fraction of the 2k orthodrome codes occupied by some database entry."""
    if o.start.width != db.width:
        raise UsageError(f"width mismatch: orthodrome {o.start.width} vs database {db.width}")
    occ = _occupied(db)
    return sum(1 for c in o.codes if c.value in occ) / len(o.codes)


@dataclass
class PropositionReport:
    status: str  # "ok", "violation" or "precondition unmet"
    n_classes: int
    separation_holds: bool | None
    h_tilde_s: int | None
    orthodromes_checked: int = 0
    exhaustive: bool = False
    max_utilization: float | None = None
    violated: bool = False
    global_utilization: float = 0.0
    reason: str | None = None
    bound: float = float(UTILIZATION_BOUND)


def proposition_check(db: LabeledCodeSet, orthodrome_budget: int = 10_000, seed: int = 0) -> PropositionReport:
    """Search for an orthodrome whose occupancy exceeds 2/3.

    Only meaningful when the classes are separated (every diameter below its
    margin) and no class sits on a single code; otherwise the report says the
    precondition is unmet. All orthodromes are checked for k <= 4, otherwise
    ``orthodrome_budget`` seeded samples. This is a falsification harness, not
    a proof.
    """
    k = db.width
    occ = _occupied(db)
    groups = class_codes(db)
    glob = len(occ) / 2**k
    if len(groups) < 2:
        return PropositionReport("precondition unmet", len(groups), None, None,
                                 global_utilization=glob, reason="fewer than two classes")
    sep = separation_check(db)
    if not sep.holds or sep.h_tilde_s < 1:
        why = "class diameter not below margin" if not sep.holds else "a class occupies a single code"
        return PropositionReport("precondition unmet", len(groups), sep.holds, sep.h_tilde_s,
                                 global_utilization=glob, reason=why)
    exhaustive = k <= EXHAUSTIVE_MAX_WIDTH
    cycles = all_orthodromes(k) if exhaustive else sample_orthodromes(k, orthodrome_budget, seed)
    best = 0
    n = 0
    for cyc in cycles:
        n += 1
        hit = len(cyc & occ) if len(occ) > len(cyc) else sum(1 for v in occ if v in cyc)
        best = max(best, hit)
    violated = Fraction(best, 2 * k) > UTILIZATION_BOUND
    return PropositionReport(
        "violation" if violated else "ok", len(groups), sep.holds, sep.h_tilde_s,
        orthodromes_checked=n, exhaustive=exhaustive, max_utilization=best / (2 * k),
        violated=violated, global_utilization=glob,
    )


@dataclass
class UtilizationReport:
    distinct_codes: int
    total_codes: int
    global_utilization: float
    per_orthodrome: list[tuple[int, float]] = field(default_factory=list)


def utilization_report(db: LabeledCodeSet, orthodromes: Iterable[frozenset[int] | Orthodrome] | None = None
                       ) -> UtilizationReport:
    """Distinct-code count over the whole 2^k space, optionally per orthodrome."""
    occ = _occupied(db)
    per = []
    if orthodromes is not None:
        for i, o in enumerate(orthodromes):
            vals = o.values if isinstance(o, Orthodrome) else o
            per.append((i, len(vals & occ) / len(vals)))
    return UtilizationReport(len(occ), 2**db.width, len(occ) / 2**db.width, per)


def separated_assignments(k: int, min_classes: int = 2) -> Iterator[tuple[frozenset[int], ...]]:
    """Every partition of a subset of the k-bit space into classes that satisfy
    diameter < margin for each class and diameter >= 1 for every class.

    Classes are unlabelled (each partition appears once). Backtracks over the
    codes in ascending order; a violated pair stays violated as codes are
    added, which keeps the search small for k <= 4.
    """
    if not 1 <= k <= 5:
        raise UsageError("exhaustive assignment enumeration supports k <= 5")
    n = 1 << k
    dist = [[(a ^ b).bit_count() for b in range(n)] for a in range(n)]

    def rec(x, classes, diam, cross):
        if x == n:
            if len(classes) >= min_classes and all(d >= 1 for d in diam):
                yield tuple(frozenset(c) for c in classes)
            return
        yield from rec(x + 1, classes, diam, cross)
        for j in range(len(classes) + 1):
            new = j == len(classes)
            dj = 0 if new else max([diam[j]] + [dist[x][v] for v in classes[j]])
            upd = {}
            ok = True
            for i, ci in enumerate(classes):
                if i == j:
                    continue
                key = (i, j) if i < j else (j, i)
                cm = min(cross.get(key, k + 1), min(dist[x][v] for v in ci))
                if cm <= max(dj, diam[i]):
                    ok = False
                    break
                upd[key] = cm
            if not ok:
                continue
            nc = [list(c) for c in classes]
            nd = list(diam)
            if new:
                nc.append([x])
                nd.append(0)
            else:
                nc[j].append(x)
                nd[j] = dj
            yield from rec(x + 1, nc, nd, {**cross, **upd})

    yield from rec(0, [], [], {})


def from_classes(k: int, classes: Iterable[Iterable[int]]) -> LabeledCodeSet:
    """One entry per code, labelled by the index of its class."""
    vals, labels = [], []
    for label, cls in enumerate(classes):
        for v in sorted(cls):
            vals.append(v)
            labels.append(label)
    return LabeledCodeSet.from_values(k, vals, labels)

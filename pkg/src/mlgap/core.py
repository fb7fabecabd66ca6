"""Bit-packed binary codes, Hamming arithmetic and code histograms.

Codes are stored as {0,1} bits with bit 1 standing for +1 and bit 0 for -1.
Bit index ``i`` is bit ``i`` of the integer ``value`` (least significant
first); in text form the leftmost character is bit 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

MAX_WIDTH = 256
WORD_BITS = 64


class UsageError(ValueError):
    """Raised when an operation is called with invalid arguments."""


class InvariantError(RuntimeError):
    """Raised when an internal consistency check fails."""


def _check_width(width: int) -> None:
    if not isinstance(width, (int, np.integer)) or isinstance(width, bool):
        raise UsageError(f"width must be an integer, got {width!r}")
    if not 1 <= width <= MAX_WIDTH:
        raise UsageError(f"width must be in [1, {MAX_WIDTH}], got {width}")


def n_words(width: int) -> int:
    return (width + WORD_BITS - 1) // WORD_BITS


@dataclass(frozen=True, order=True)
class BinaryCode:
    """A k-bit hash code.

    ``value`` holds the packed bits; bits at positions >= width are always zero.
    """

    width: int
    value: int

    def __post_init__(self):
        _check_width(self.width)
        v = int(self.value)
        if v < 0 or v >> self.width:
            raise UsageError(f"value {self.value} does not fit in {self.width} bits")
        object.__setattr__(self, "value", v)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> BinaryCode:
        bits = list(bits)
        value = 0
        for i, b in enumerate(bits):
            if b not in (0, 1, True, False):
                raise UsageError(f"bit {i} must be 0 or 1, got {b!r}")
            if b:
                value |= 1 << i
        return cls(len(bits), value)

    @classmethod
    def from_signs(cls, signs: Iterable[int]) -> BinaryCode:
        """Build a code from a {-1, +1} vector (+1 -> bit 1)."""
        bits = []
        for s in signs:
            if s not in (-1, 1):
                raise UsageError(f"sign entries must be -1 or 1, got {s!r}")
            bits.append(1 if s == 1 else 0)
        return cls.from_bits(bits)

    @classmethod
    def from_string(cls, text: str) -> BinaryCode:
        if not text or set(text) - {"0", "1"}:
            raise UsageError(f"not a bitstring: {text!r}")
        return cls.from_bits(1 if c == "1" else 0 for c in text)

    def bits(self) -> list[int]:
        return [(self.value >> i) & 1 for i in range(self.width)]

    def signs(self) -> list[int]:
        return [1 if b else -1 for b in self.bits()]

    def to_string(self) -> str:
        return "".join("1" if (self.value >> i) & 1 else "0" for i in range(self.width))

    def complement(self) -> BinaryCode:
        return BinaryCode(self.width, self.value ^ ((1 << self.width) - 1))

    def flip(self, index: int) -> BinaryCode:
        if not 0 <= index < self.width:
            raise UsageError(f"bit index {index} out of range for width {self.width}")
        return BinaryCode(self.width, self.value ^ (1 << index))

    def words(self) -> np.ndarray:
        """Packed uint64 words, least significant word first."""
        return _int_to_words(self.value, n_words(self.width))

    def __str__(self) -> str:
        return self.to_string()


def _int_to_words(value: int, nw: int) -> np.ndarray:
    mask = (1 << WORD_BITS) - 1
    return np.array([(value >> (WORD_BITS * w)) & mask for w in range(nw)], dtype=np.uint64)


def hamming_distance(a: BinaryCode, b: BinaryCode) -> int:
    if a.width != b.width:
        raise UsageError(f"width mismatch: {a.width} vs {b.width}")
    return (a.value ^ b.value).bit_count()


def ball_volume(k: int, r: int) -> int:
    """Number of k-bit codes within Hamming distance r of a fixed center."""
    if not 0 <= r <= k:
        raise UsageError(f"radius must be in [0, {k}], got {r}")
    return sum(math.comb(k, i) for i in range(r + 1))


@dataclass(frozen=True)
class HammingBall:
    center: BinaryCode
    radius: int

    def __post_init__(self):
        if not 0 <= self.radius <= self.center.width:
            raise UsageError(f"radius must be in [0, {self.center.width}], got {self.radius}")

    @property
    def volume(self) -> int:
        return ball_volume(self.center.width, self.radius)

    def __contains__(self, code: BinaryCode) -> bool:
        return hamming_distance(self.center, code) <= self.radius


class Entry(NamedTuple):
    code: BinaryCode
    label: int
    superlabel: int | None = None


class LabeledCodeSet:
    """Immutable ordered collection of labelled codes (duplicates kept)."""

    __slots__ = ("_width", "_entries", "_labels", "_superlabels", "_words", "_code_ids", "_n_codes")

    def __init__(self, width: int, entries: Iterable[Entry | tuple]):
        _check_width(width)
        items = []
        for i, e in enumerate(entries):
            e = Entry(*e)
            if not isinstance(e.code, BinaryCode):
                raise UsageError(f"entry {i}: code must be a BinaryCode")
            if e.code.width != width:
                raise UsageError(f"entry {i}: code width {e.code.width} != set width {width}")
            if int(e.label) < 0:
                raise UsageError(f"entry {i}: label must be >= 0")
            if e.superlabel is not None and int(e.superlabel) < 0:
                raise UsageError(f"entry {i}: superlabel must be >= 0")
            items.append(e)
        has_super = {e.superlabel is not None for e in items}
        if len(has_super) > 1:
            raise UsageError("either all entries carry a superlabel or none do")
        self._width = int(width)
        self._entries = tuple(items)
        labels = np.array([int(e.label) for e in items], dtype=np.int64)
        labels.setflags(write=False)
        self._labels = labels
        if items and items[0].superlabel is not None:
            sup = np.array([int(e.superlabel) for e in items], dtype=np.int64)
            sup.setflags(write=False)
            self._superlabels = sup
        else:
            self._superlabels = None
        self._words = None
        self._code_ids = None
        self._n_codes = 0

    @classmethod
    def from_values(cls, width: int, values: Sequence[int], labels: Sequence[int],
                    superlabels: Sequence[int] | None = None) -> LabeledCodeSet:
        if len(values) != len(labels):
            raise UsageError("values and labels differ in length")
        if superlabels is not None and len(superlabels) != len(labels):
            raise UsageError("superlabels and labels differ in length")
        sup = superlabels if superlabels is not None else [None] * len(labels)
        return cls(width, (Entry(BinaryCode(width, int(v)), int(l), None if s is None else int(s))
                           for v, l, s in zip(values, labels, sup)))

    @property
    def width(self) -> int:
        return self._width

    @property
    def entries(self) -> tuple[Entry, ...]:
        return self._entries

    @property
    def labels(self) -> np.ndarray:
        return self._labels

    @property
    def superlabels(self) -> np.ndarray | None:
        return self._superlabels

    @property
    def has_superlabels(self) -> bool:
        return self._superlabels is not None

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def __getitem__(self, i: int) -> Entry:
        return self._entries[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabeledCodeSet):
            return NotImplemented
        return self._width == other._width and self._entries == other._entries

    def __hash__(self) -> int:
        return hash((self._width, self._entries))

    def __repr__(self) -> str:
        return f"LabeledCodeSet(width={self._width}, n={len(self)})"

    def values(self) -> list[int]:
        return [e.code.value for e in self._entries]

    @property
    def words(self) -> np.ndarray:
        """(n, ceil(k/64)) uint64 matrix of packed codes."""
        if self._words is None:
            nw = n_words(self._width)
            w = np.zeros((len(self), nw), dtype=np.uint64)
            mask = (1 << WORD_BITS) - 1
            for i, e in enumerate(self._entries):
                v = e.code.value
                for j in range(nw):
                    w[i, j] = (v >> (WORD_BITS * j)) & mask
            w.setflags(write=False)
            self._words = w
        return self._words

    @property
    def code_ids(self) -> np.ndarray:
        """Dense id per entry; equal codes share an id (ids follow first appearance)."""
        if self._code_ids is None:
            seen: dict[int, int] = {}
            ids = np.empty(len(self), dtype=np.int64)
            for i, e in enumerate(self._entries):
                ids[i] = seen.setdefault(e.code.value, len(seen))
            ids.setflags(write=False)
            self._code_ids = ids
            self._n_codes = len(seen)
        return self._code_ids

    @property
    def n_distinct(self) -> int:
        self.code_ids
        return self._n_codes

    def class_ids(self) -> list[int]:
        return sorted(set(int(x) for x in self._labels))

    def subset(self, indices: Iterable[int]) -> LabeledCodeSet:
        return LabeledCodeSet(self._width, (self._entries[i] for i in indices))


def _check_query_width(db: LabeledCodeSet, q: BinaryCode) -> None:
    if q.width != db.width:
        raise UsageError(f"width mismatch: query {q.width} vs database {db.width}")


def distances_to(db: LabeledCodeSet, q: BinaryCode) -> np.ndarray:
    """Hamming distance from ``q`` to every database entry (int32, input order)."""
    from . import kernels

    _check_query_width(db, q)
    if len(db) == 0:
        return np.zeros(0, dtype=np.int32)
    return kernels.hamming_to_query(db.words, q.words())


def retrieve_within(db: LabeledCodeSet, q: BinaryCode, r: int) -> list[tuple[Entry, int]]:
    _check_query_width(db, q)
    if not 0 <= r <= db.width:
        raise UsageError(f"radius must be in [0, {db.width}], got {r}")
    d = distances_to(db, q)
    return [(db[i], int(d[i])) for i in np.flatnonzero(d <= r)]


@dataclass(frozen=True)
class CodeHistogram:
    """Multiplicity of each code value; zero counts are never stored."""

    width: int
    counts: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        _check_width(self.width)
        clean = {}
        for v, c in dict(self.counts).items():
            if isinstance(v, BinaryCode):
                if v.width != self.width:
                    raise UsageError("histogram code width mismatch")
                v = v.value
            if v < 0 or v >> self.width:
                raise UsageError(f"code value {v} does not fit in {self.width} bits")
            if c < 0:
                raise UsageError("histogram counts must be non-negative")
            if c:
                clean[int(v)] = int(c)
        object.__setattr__(self, "counts", MappingProxyType(clean))

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def distinct(self) -> int:
        return len(self.counts)

    @property
    def max_count(self) -> int:
        return max(self.counts.values(), default=0)

    def __getitem__(self, code: BinaryCode | int) -> int:
        v = code.value if isinstance(code, BinaryCode) else code
        return self.counts.get(v, 0)

    def items_sorted(self) -> list[tuple[BinaryCode, int]]:
        """(code, count) pairs in ascending code value."""
        return [(BinaryCode(self.width, v), c) for v, c in sorted(self.counts.items())]

    def scaled(self, factor: int) -> CodeHistogram:
        if factor <= 0:
            raise UsageError("scale factor must be positive")
        return CodeHistogram(self.width, {v: c * factor for v, c in self.counts.items()})


def histogram(codes: Iterable[BinaryCode], width: int | None = None) -> CodeHistogram:
    """Count code multiplicities. ``width`` is needed only for an empty input."""
    counts: dict[int, int] = {}
    for c in codes:
        if width is None:
            width = c.width
        elif c.width != width:
            raise UsageError(f"mixed widths in histogram input: {c.width} vs {width}")
        counts[c.value] = counts.get(c.value, 0) + 1
    if width is None:
        width = 1
    return CodeHistogram(width, counts)

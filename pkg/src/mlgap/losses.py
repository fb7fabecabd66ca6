"""Pairwise hashing losses on real-valued (pre-binarization) code vectors.

``y = 0`` means the two samples share a class and ``y = 1`` that they do
not; ``Y`` is the same flag at superclass level. Every loss is per pair; a
batch loss is the plain sum over pairs.

The quantization regularizer is ``sum(| |b1| - 1 |) + sum(| |b2| - 1 |)``,
pulling every entry towards -1 or +1.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .core import UsageError


class DatasetKind(enum.Enum):
    SINGLE_LABEL = "single"
    TWO_LEVEL = "two-level"


@dataclass(frozen=True)
class RealCodePair:
    b1: np.ndarray
    b2: np.ndarray
    y: int
    Y: int | None = None

    def __post_init__(self):
        b1 = np.asarray(self.b1, dtype=np.float64)
        b2 = np.asarray(self.b2, dtype=np.float64)
        if b1.ndim != 1 or b1.size < 1:
            raise UsageError("code vectors must be one-dimensional and non-empty")
        if b1.shape != b2.shape:
            raise UsageError(f"code length mismatch: {b1.size} vs {b2.size}")
        if not (np.all(np.isfinite(b1)) and np.all(np.isfinite(b2))):
            raise UsageError("code vectors must be finite")
        if self.y not in (0, 1):
            raise UsageError(f"y must be 0 or 1, got {self.y!r}")
        if self.Y is not None and self.Y not in (0, 1):
            raise UsageError(f"Y must be 0 or 1, got {self.Y!r}")
        object.__setattr__(self, "b1", b1)
        object.__setattr__(self, "b2", b2)

    @property
    def k(self) -> int:
        return self.b1.size

    def swapped(self) -> RealCodePair:
        return RealCodePair(self.b2, self.b1, self.y, self.Y)


@dataclass(frozen=True)
class LossConfig:
    m: float
    alpha: float
    r1: float | None = None
    r2: float | None = None
    r3: float | None = None
    r4: float | None = None

    def __post_init__(self):
        if not self.m > 0:
            raise UsageError(f"margin m must be positive, got {self.m}")
        if self.alpha is None or not self.alpha >= 0:
            raise UsageError(f"alpha must be given and non-negative, got {self.alpha}")
        if (self.r1 is None) != (self.r2 is None):
            raise UsageError("r1 and r2 must be given together")
        if self.r1 is not None and not 0 < self.r1 < self.r2:
            raise UsageError(f"need 0 < r1 < r2, got r1={self.r1}, r2={self.r2}")
        if (self.r3 is None) != (self.r4 is None):
            raise UsageError("r3 and r4 must be given together")
        if self.r3 is not None:
            if self.r1 is None:
                raise UsageError("r3/r4 need r1/r2")
            if not self.r2 <= self.r3 < self.r4:
                raise UsageError(f"need r2 <= r3 < r4, got r2={self.r2}, r3={self.r3}, r4={self.r4}")


def default_config(k: int, kind: DatasetKind | str, alpha: float) -> LossConfig:
    """Heuristic margins for k-bit codes: m = 2k, and buffer zones
    [k/6, k/3] (single label) or [k/12, k/6] and [k/6, k/3] (class/superclass).
    """
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    kind = DatasetKind(kind)
    if kind is DatasetKind.SINGLE_LABEL:
        return LossConfig(m=2.0 * k, alpha=alpha, r1=k / 6, r2=k / 3)
    return LossConfig(m=2.0 * k, alpha=alpha, r1=k / 12, r2=k / 6, r3=k / 6, r4=k / 3)


def regularizer(b1: np.ndarray, b2: np.ndarray) -> float:
    return float(np.abs(np.abs(b1) - 1.0).sum() + np.abs(np.abs(b2) - 1.0).sum())


def _regularizer_grad(b: np.ndarray) -> np.ndarray:
    return np.sign(np.abs(b) - 1.0) * np.sign(b)


def _buffer(d: float, lo: float, hi: float) -> float:
    return max(lo - d, 0.0) + max(d - hi, 0.0)


def _buffer_slope(d: float, lo: float, hi: float) -> float:
    return (-1.0 if d < lo else 0.0) + (1.0 if d > hi else 0.0)


def dsh_loss(pair: RealCodePair, cfg: LossConfig) -> float:
    """Contrastive loss on the squared Euclidean distance."""
    d2 = float(np.sum((pair.b1 - pair.b2) ** 2))
    return (0.5 * (1 - pair.y) * d2
            + 0.5 * pair.y * max(cfg.m - d2, 0.0)
            + cfg.alpha * regularizer(pair.b1, pair.b2))


def dsh_loss_grad(pair: RealCodePair, cfg: LossConfig) -> tuple[np.ndarray, np.ndarray]:
    diff = pair.b1 - pair.b2
    d2 = float(np.sum(diff**2))
    coef = (1 - pair.y) - (pair.y if cfg.m - d2 > 0 else 0)
    g = coef * diff
    return (g + cfg.alpha * _regularizer_grad(pair.b1),
            -g + cfg.alpha * _regularizer_grad(pair.b2))


def _l1(pair: RealCodePair) -> float:
    return float(np.abs(pair.b1 - pair.b2).sum())


def _need_zone(cfg: LossConfig, two_level: bool):
    if cfg.r1 is None:
        raise UsageError("buffer-zone loss needs r1 and r2")
    if two_level and cfg.r3 is None:
        raise UsageError("two-level buffer-zone loss needs r3 and r4")


def buffer_loss_single(pair: RealCodePair, cfg: LossConfig) -> float:
    """L1 contrastive loss where same-class pairs are free inside [r1, r2]."""
    _need_zone(cfg, False)
    d = _l1(pair)
    return (0.5 * (1 - pair.y) * _buffer(d, cfg.r1, cfg.r2)
            + 0.5 * pair.y * max(cfg.m - d, 0.0)
            + cfg.alpha * regularizer(pair.b1, pair.b2))


def buffer_loss_single_grad(pair: RealCodePair, cfg: LossConfig) -> tuple[np.ndarray, np.ndarray]:
    _need_zone(cfg, False)
    d = _l1(pair)
    slope = 0.5 * (1 - pair.y) * _buffer_slope(d, cfg.r1, cfg.r2)
    slope -= 0.5 * pair.y * (1.0 if cfg.m - d > 0 else 0.0)
    g = slope * np.sign(pair.b1 - pair.b2)
    return (g + cfg.alpha * _regularizer_grad(pair.b1),
            -g + cfg.alpha * _regularizer_grad(pair.b2))


def buffer_loss_two_level(pair: RealCodePair, cfg: LossConfig) -> float:
    """L1 loss with a class zone [r1, r2], a superclass zone [r3, r4] and a
    margin hinge for pairs from different superclasses."""
    _need_zone(cfg, True)
    if pair.Y is None:
        raise UsageError("two-level loss needs the superclass flag Y")
    d = _l1(pair)
    return (0.5 * (1 - pair.y) * _buffer(d, cfg.r1, cfg.r2)
            + 0.5 * (1 - pair.Y) * _buffer(d, cfg.r3, cfg.r4)
            + 0.5 * pair.Y * max(cfg.m - d, 0.0)
            + cfg.alpha * regularizer(pair.b1, pair.b2))


def buffer_loss_two_level_grad(pair: RealCodePair, cfg: LossConfig) -> tuple[np.ndarray, np.ndarray]:
    _need_zone(cfg, True)
    if pair.Y is None:
        raise UsageError("two-level loss needs the superclass flag Y")
    d = _l1(pair)
    slope = (0.5 * (1 - pair.y) * _buffer_slope(d, cfg.r1, cfg.r2)
             + 0.5 * (1 - pair.Y) * _buffer_slope(d, cfg.r3, cfg.r4)
             - 0.5 * pair.Y * (1.0 if cfg.m - d > 0 else 0.0))
    g = slope * np.sign(pair.b1 - pair.b2)
    return (g + cfg.alpha * _regularizer_grad(pair.b1),
            -g + cfg.alpha * _regularizer_grad(pair.b2))


LOSSES: dict[str, Callable[[RealCodePair, LossConfig], float]] = {
    "dsh": dsh_loss,
    "single": buffer_loss_single,
    "two-level": buffer_loss_two_level,
}


def total_loss(pairs: Iterable[RealCodePair], loss: Callable[[RealCodePair, LossConfig], float],
               cfg: LossConfig) -> float:
    return float(sum(loss(p, cfg) for p in pairs))

"""Ruspini strong partitions of triangular fuzzy sets on [0, 1]."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pit import QuantileTable, cdf, quantile_fn


@dataclass(frozen=True)
class TriangularFuzzySet:
    left: float
    core: float
    right: float
    label: int

    def __post_init__(self):
        if not (0.0 <= self.left <= self.core <= self.right <= 1.0):
            raise ValueError(f"invalid triangle ({self.left}, {self.core}, {self.right})")


@dataclass(frozen=True)
class FuzzyPartition:
    attribute_index: int
    sets: tuple[TriangularFuzzySet, ...]

    @property
    def size(self) -> int:
        return len(self.sets)

    @property
    def cores(self) -> np.ndarray:
        return np.array([s.core for s in self.sets])

    def to_dict(self) -> dict:
        return {"attribute_index": self.attribute_index,
                "sets": [[s.left, s.core, s.right] for s in self.sets]}

    @classmethod
    def from_dict(cls, d: dict) -> "FuzzyPartition":
        return cls(int(d["attribute_index"]),
                   tuple(TriangularFuzzySet(l, c, r, k) for k, (l, c, r) in enumerate(d["sets"])))


def uniform_cores(T: int) -> np.ndarray:
    """Equally spaced cores ``k/(T-1)``; the single source for every membership kernel."""
    return np.arange(T, dtype=np.float64) / (T - 1)


def build_uniform_partition(T: int, attribute_index: int = 0) -> FuzzyPartition:
    if T < 2:
        raise ValueError("a partition needs at least 2 fuzzy sets")
    c = uniform_cores(T).tolist()
    sets = tuple(
        TriangularFuzzySet(c[k - 1] if k > 0 else 0.0, c[k], c[k + 1] if k < T - 1 else 1.0, k)
        for k in range(T)
    )
    return FuzzyPartition(attribute_index, sets)


def membership(s: TriangularFuzzySet, u: float) -> float:
    if u == s.core:
        return 1.0
    if u < s.core:
        if s.left == s.core:
            return 1.0  # left shoulder
        return (u - s.left) / (s.core - s.left) if u > s.left else 0.0
    if s.right == s.core:
        return 1.0  # right shoulder
    return (s.right - u) / (s.right - s.core) if u < s.right else 0.0


def memberships(p: FuzzyPartition, u) -> np.ndarray:
    """Membership degrees of ``u`` in every set of ``p``.

    A scalar gives a length-T vector, an array of shape (n,) gives (n, T).
    Inputs are clamped into [0, 1].
    """
    ua = np.clip(np.asarray(u, dtype=np.float64), 0.0, 1.0)
    out = np.zeros(ua.shape + (p.size,))
    for k, s in enumerate(p.sets):
        if s.left < s.core:
            rise = (ua > s.left) & (ua < s.core)
            out[..., k] = np.where(rise, (ua - s.left) / (s.core - s.left), out[..., k])
        else:
            out[..., k] = np.where(ua < s.core, 1.0, out[..., k])
        if s.core < s.right:
            fall = (ua > s.core) & (ua < s.right)
            out[..., k] = np.where(fall, (s.right - ua) / (s.right - s.core), out[..., k])
        else:
            out[..., k] = np.where(ua > s.core, 1.0, out[..., k])
        out[..., k] = np.where(ua == s.core, 1.0, out[..., k])
    return out


def map_to_original(p: FuzzyPartition, t: QuantileTable) -> list[tuple[float, float, float]]:
    """Vertices (left, core, right) of every set expressed in attribute units."""
    return [tuple(quantile_fn(t, np.array([s.left, s.core, s.right])).tolist()) for s in p.sets]


def original_shape(p: FuzzyPartition, t: QuantileTable, k: int):
    """Breakpoints ``(xs, mus)`` of set ``k``'s membership in attribute units.

    Between the mapped vertices the membership is piecewise linear with kinks
    at the quantile anchors, so the polyline through these points reproduces
    ``membership(cdf(x))`` exactly inside the anchor range.
    """
    s = p.sets[k]
    lo, hi = quantile_fn(t, s.left), quantile_fn(t, s.right)
    inner = t.values[(t.values > lo) & (t.values < hi)]
    xs = np.unique(np.concatenate([[lo, quantile_fn(t, s.core), hi], inner]))
    mus = np.array([membership(s, float(np.clip(cdf(t, x), 0.0, 1.0))) for x in xs])
    return xs, mus


def original_membership(p: FuzzyPartition, t: QuantileTable, k: int, x):
    xs, mus = original_shape(p, t, k)
    return np.interp(x, xs, mus)

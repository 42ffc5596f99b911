"""Quantile tables and the piecewise-linear probability integral transform.

A :class:`QuantileTable` holds the nearest-rank q-quantiles of one training
attribute. ``cdf`` maps raw values onto [0, 1] by linear interpolation
between the anchors and ``quantile_fn`` inverts that map.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .dataset import Dataset

DEFAULT_Q = 1000


@dataclass(frozen=True, eq=False)
class QuantileTable:
    attribute_index: int
    q: int
    values: np.ndarray = field(repr=False)
    levels: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        l = np.array(self.levels, dtype=np.float64)
        if v.ndim != 1 or v.shape != l.shape or v.size == 0:
            raise ValueError("anchors must be a non-empty list of (value, level) pairs")
        if np.any(np.diff(v) <= 0) or np.any(np.diff(l) <= 0):
            raise ValueError("anchor values and levels must be strictly increasing")
        v.flags.writeable = False
        l.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "levels", l)

    @property
    def anchors(self) -> list[tuple[float, float]]:
        return list(zip(self.values.tolist(), self.levels.tolist()))

    @property
    def degenerate(self) -> bool:
        """True when every quantile collapsed onto one value (constant attribute)."""
        return self.values.size == 1

    def to_dict(self) -> dict:
        return {"attribute_index": self.attribute_index, "q": self.q,
                "anchors": [[v, l] for v, l in self.anchors]}

    @classmethod
    def from_dict(cls, d: dict) -> "QuantileTable":
        anchors = np.asarray(d["anchors"], dtype=np.float64).reshape(-1, 2)
        return cls(int(d["attribute_index"]), int(d["q"]), anchors[:, 0], anchors[:, 1])


def compute_quantiles(values, q: int = DEFAULT_Q, attribute_index: int = 0) -> QuantileTable:
    """Nearest-rank quantiles ``Q_i = sorted[ceil(i*n/q) - 1]`` for i = 1..q-1.

    If ``q >= n`` it is lowered to ``n``. Runs of equal quantile values are
    collapsed onto the highest level so anchors stay strictly increasing.
    """
    x = np.asarray(values, dtype=np.float64).ravel()
    n = x.size
    if n == 0:
        raise ValueError("cannot compute quantiles of an empty vector")
    if q < 2:
        raise ValueError("q must be >= 2")
    if not np.all(np.isfinite(x)):
        raise ValueError("values must be finite")
    q = min(q, n)
    if q < 2:
        # single observation: one anchor at level 1/2
        return QuantileTable(attribute_index, 2, x[:1], np.array([0.5]))
    s = np.sort(x, kind="stable")
    i = np.arange(1, q, dtype=np.int64)
    ranks = (i * n + q - 1) // q  # ceil(i*n/q), exact in integers
    qv = s[ranks - 1]
    levels = i / q
    keep = np.append(qv[1:] != qv[:-1], True)
    return QuantileTable(attribute_index, q, qv[keep], levels[keep])


def cdf(t: QuantileTable, x):
    """Approximate CDF. Scalars in, scalars out; arrays are mapped elementwise."""
    xa = np.asarray(x, dtype=np.float64)
    v, l = t.values, t.levels
    j = np.searchsorted(v, xa, side="left")
    jc = np.clip(j, 1, max(v.size - 1, 1))
    if v.size > 1:
        v0, v1, l0, l1 = v[jc - 1], v[jc], l[jc - 1], l[jc]
        xc = np.clip(xa, v0, v1)  # out-of-range points are overwritten below
        out = l0 + (xc - v0) * (l1 - l0) / (v1 - v0)
    else:
        out = np.zeros_like(xa)
    jj = np.minimum(j, v.size - 1)
    hit = v[jj] == xa
    out = np.where(hit, l[jj], out)
    out = np.where(xa < v[0], 0.0, out)
    out = np.where(xa > v[-1], 1.0, out)
    return float(out) if out.ndim == 0 else out


def quantile_fn(t: QuantileTable, u):
    """Inverse of :func:`cdf` on [0, 1], clamped to the first and last anchor values."""
    ua = np.asarray(u, dtype=np.float64)
    if np.any((ua < 0) | (ua > 1)) or np.any(np.isnan(ua)):
        raise ValueError("u must lie in [0, 1]")
    v, l = t.values, t.levels
    j = np.searchsorted(l, ua, side="left")
    jc = np.clip(j, 1, max(l.size - 1, 1))
    if l.size > 1:
        v0, v1, l0, l1 = v[jc - 1], v[jc], l[jc - 1], l[jc]
        out = v0 + (ua - l0) * (v1 - v0) / (l1 - l0)
    else:
        out = np.full_like(ua, v[0])
    jj = np.minimum(j, l.size - 1)
    out = np.where(l[jj] == ua, v[jj], out)
    out = np.where(ua <= l[0], v[0], out)
    out = np.where(ua >= l[-1], v[-1], out)
    return float(out) if out.ndim == 0 else out


def fit_tables(ds: Dataset, q: int = DEFAULT_Q) -> dict[int, QuantileTable]:
    """One table per continuous attribute, keyed by attribute index."""
    return {f: compute_quantiles(ds.X[:, f], q, f) for f in ds.schema.continuous_indices()}


def transform_matrix(X: np.ndarray, tables: Mapping[int, QuantileTable], continuous) -> np.ndarray:
    U = np.array(X, dtype=np.float64, copy=True)
    for f in continuous:
        if f not in tables:
            raise KeyError(f"no quantile table for continuous attribute {f}")
        U[:, f] = cdf(tables[f], X[:, f])
    return U


def transform_dataset(ds: Dataset, tables: Mapping[int, QuantileTable]) -> Dataset:
    """Replace every continuous column by its approximate CDF value.

    Tables must come from the training split; categorical columns and labels
    are passed through unchanged.
    """
    return ds.with_values(transform_matrix(ds.X, tables, ds.schema.continuous_indices()))

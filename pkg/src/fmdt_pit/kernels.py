"""Backend selection and the chunked, order-stable split-statistics driver.

The compiled kernel is used when importable; set ``FMDT_PIT_BACKEND=python``
to force the numpy fallback. Rows are cut into chunks of ``CHUNK_ROWS``
regardless of worker count and chunk partials are merged in chunk order, so
results are bit-identical for any number of workers.
"""
from __future__ import annotations

import os
from concurrent.futures import Executor
from typing import Optional

import numpy as np

from . import _pykernels

CHUNK_ROWS = 16384

if os.environ.get("FMDT_PIT_BACKEND", "").lower() in ("python", "numpy", "pure"):
    _native = None
else:
    try:
        from . import _ckernels as _native
    except ImportError:  # extension not built
        _native = None

BACKEND = "cython" if _native is not None else "python"


def get_kernel(backend: Optional[str] = None):
    name = backend or BACKEND
    if name == "cython":
        if _native is None:
            raise RuntimeError("compiled kernel is not available")
        return _native.accumulate_chunk
    if name == "python":
        return _pykernels.accumulate_chunk
    raise ValueError(f"unknown backend {name!r}")


locate = _pykernels.locate


def split_stats(data, y, w, rows, attrs, nbranch, is_cat, cores, n_classes,
                executor: Optional[Executor] = None, backend: Optional[str] = None) -> np.ndarray:
    """Per-attribute, per-branch, per-class fuzzy cardinalities of a node.

    ``rows`` selects the node's examples from ``data`` and ``w`` holds their
    matching degrees (aligned with ``rows``). Returns an array of shape
    ``(len(attrs), max(nbranch), n_classes)``.
    """
    kernel = get_kernel(backend)
    attrs = np.ascontiguousarray(attrs, dtype=np.int64)
    nbranch = np.ascontiguousarray(nbranch, dtype=np.int64)
    is_cat = np.ascontiguousarray(is_cat, dtype=np.int64)
    shape = (attrs.size, int(nbranch.max()) if attrs.size else 0, n_classes)
    n = rows.size
    bounds = [(s, min(s + CHUNK_ROWS, n)) for s in range(0, n, CHUNK_ROWS)]

    def run(b):
        part = np.zeros(shape)
        kernel(data, y, w, rows, b[0], b[1], attrs, nbranch, is_cat, cores, part)
        return part

    if executor is None or len(bounds) <= 1:
        parts = map(run, bounds)
    else:
        parts = executor.map(run, bounds)
    total = np.zeros(shape)
    for p in parts:
        total += p
    return total

"""Numpy implementation of the split-statistics kernel.

Must stay bit-identical to ``_ckernels.pyx``: every bin is accumulated in
row order and, within a row, the lower fuzzy set is added before the upper
one. ``np.bincount`` adds weights sequentially, which gives that order once
the two contributions of each row are interleaved.
"""
import numpy as np


def locate(u, cores):
    """Lower set index and the (lower, upper) membership pair for each ``u``."""
    u = np.clip(u, 0.0, 1.0)
    T = cores.size
    k = np.clip(np.searchsorted(cores, u, side="right") - 1, 0, T - 2)
    c0 = cores[k]
    c1 = cores[k + 1]
    d = c1 - c0
    return k, (c1 - u) / d, (u - c0) / d


def accumulate_chunk(data, y, w, rows, start, stop, attrs, nbranch, is_cat, cores, out):
    """Add the weighted class histograms of rows[start:stop] into ``out[a, branch, class]``."""
    r = rows[start:stop]
    ww = w[start:stop]
    yy = y[r]
    n = r.size
    _, B, M = out.shape
    for a in range(attrs.size):
        v = data[r, attrs[a]]
        if is_cat[a]:
            code = v.astype(np.int64)
            ok = (code >= 0) & (code < nbranch[a])
            out[a] += np.bincount(code[ok] * M + yy[ok], weights=ww[ok], minlength=B * M).reshape(B, M)
        else:
            k, lo, hi = locate(v, cores)
            idx = np.empty(2 * n, dtype=np.int64)
            wt = np.empty(2 * n)
            idx[0::2] = k * M + yy
            idx[1::2] = (k + 1) * M + yy
            wt[0::2] = ww * lo
            wt[1::2] = ww * hi
            out[a] += np.bincount(idx, weights=wt, minlength=B * M).reshape(B, M)

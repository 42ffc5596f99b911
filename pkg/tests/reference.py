"""Straightforward double-loop tree induction used as an oracle.

Shares no code with the library's kernels: memberships are evaluated per
example and per fuzzy set with the triangle formula, and statistics are
summed example by example. Rules (stops, tie-breaking, fallbacks) are the
library's documented ones.
"""
import math

GAIN_EPS = 1e-12


def _tri(u, left, core, right):
    if u == core:
        return 1.0
    if u < core:
        if left == core:
            return 1.0
        return (u - left) / (core - left) if u > left else 0.0
    if right == core:
        return 1.0
    return (right - u) / (right - core) if u < right else 0.0


def _entropy(stats):
    total = sum(stats)
    h = 0.0
    for s in stats:
        p = s / total
        if p > 0:
            h -= p * math.log2(p)
    return h


def reference_tree(U, y, n_cats, T, M, max_depth, gamma, lam):
    """``n_cats[f]`` is None for continuous attributes, else the category count."""
    n, F = len(U), len(U[0])
    cores = [k / (T - 1) for k in range(T)]
    sets = [(cores[k - 1] if k > 0 else 0.0, cores[k], cores[k + 1] if k < T - 1 else 1.0)
            for k in range(T)]

    def branch_mu(f, u):
        if n_cats[f] is not None:
            return [1.0 if int(u) == j else 0.0 for j in range(n_cats[f])]
        return [_tri(u, *s) for s in sets]

    def leaf(stats, depth, fallback):
        total = sum(stats)
        w = [s / total for s in stats] if total > 0 else list(fallback)
        return {"leaf": True, "weights": w, "stats": list(stats), "depth": depth}

    def node(items, stats, depth, used, fallback):
        total = sum(stats)
        if not total > 0:
            return leaf(stats, depth, fallback)
        props = [s / total for s in stats]
        cands = [f for f in range(F) if f not in used]
        if depth >= max_depth or max(props) >= 1.0 - gamma or total < lam * n or not cands:
            return leaf(stats, depth, fallback)
        gains, child_stats = [], []
        for f in cands:
            nb = n_cats[f] if n_cats[f] is not None else T
            cs = [[0.0] * M for _ in range(nb)]
            for i, md in items:
                mus = branch_mu(f, U[i][f])
                for j in range(nb):
                    if mus[j] > 0:
                        cs[j][y[i]] += mus[j] * md
            g = _entropy(stats)
            for c in cs:
                ct = sum(c)
                if ct > 0:
                    g -= (ct / total) * _entropy(c)
            gains.append(g)
            child_stats.append(cs)
        best = max(gains)
        if best <= GAIN_EPS:
            return leaf(stats, depth, fallback)
        a = next(i for i, g in enumerate(gains) if g >= best - GAIN_EPS)
        f = cands[a]
        children = []
        for j, cs in enumerate(child_stats[a]):
            if sum(cs) < lam * n:
                children.append(leaf(cs, depth + 1, props))
                continue
            sub = []
            for i, md in items:
                mu = branch_mu(f, U[i][f])[j]
                if mu > 0:
                    sub.append((i, mu * md))
            children.append(node(sub, cs, depth + 1, used | {f}, props))
        return {"leaf": False, "attr": f, "gain": gains[a], "stats": list(stats),
                "children": children, "depth": depth}

    root_stats = [0.0] * M
    for i in range(n):
        root_stats[y[i]] += 1.0
    return node([(i, 1.0) for i in range(n)], root_stats, 0, frozenset(), None)


def compare_trees(node, ref, path=()):
    """List of mismatches between a library tree and a reference tree."""
    from fmdt_pit.fmdt import Leaf

    out = []
    if isinstance(node, Leaf) != ref["leaf"]:
        return [f"{path}: leaf/internal mismatch"]
    if node.class_cardinality.tolist() != ref["stats"]:
        out.append(f"{path}: stats {node.class_cardinality.tolist()} != {ref['stats']}")
    if ref["leaf"]:
        if node.class_weights.tolist() != ref["weights"]:
            out.append(f"{path}: weights {node.class_weights.tolist()} != {ref['weights']}")
        return out
    if node.attribute_index != ref["attr"]:
        return out + [f"{path}: split {node.attribute_index} != {ref['attr']}"]
    if abs(node.gain - ref["gain"]) > 1e-9:
        out.append(f"{path}: gain {node.gain} vs {ref['gain']}")
    for j, (c, rc) in enumerate(zip(node.children, ref["children"])):
        out += compare_trees(c, rc, path + (j,))
    return out

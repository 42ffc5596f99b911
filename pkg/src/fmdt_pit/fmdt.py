"""Multi-way fuzzy decision tree induction and inference.

Training runs on PIT-transformed data: every continuous attribute is split
into ``T`` children (one per fuzzy set of its uniform partition) and every
categorical attribute into one child per category. Examples are not copied
into nodes; a node keeps the indices of the examples that reach it and their
matching degrees, multiplied by the branch membership at every level.
"""
from __future__ import annotations

import logging
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import kernels
from .dataset import Dataset, Schema
from .partition import FuzzyPartition, build_uniform_partition, uniform_cores
from .pit import DEFAULT_Q, QuantileTable, fit_tables, transform_dataset, transform_matrix

log = logging.getLogger(__name__)

MAX_MATCHING = "max_matching"
WEIGHTED_VOTE = "weighted_vote"
INFERENCE_MODES = (MAX_MATCHING, WEIGHTED_VOTE)

# Gains at or below this are treated as zero, and gains within it of the best
# one count as ties (resolved by lowest attribute index).
GAIN_EPS = 1e-12

# Callables run on every model returned by train(); used by the test suite.
post_train_hooks: list = []


@dataclass(frozen=True)
class Hyperparameters:
    """Induction settings.

    ``gamma`` is the purity stop: a node whose majority class reaches
    ``1 - gamma`` of its fuzzy cardinality becomes a leaf. ``lam * N`` is the
    minimum fuzzy cardinality of a node to be split; smaller children are
    attached as leaves. ``phi`` is the stop parameter of the entropy-based
    discretizer of the original pipeline. It is kept for configuration parity
    but has no effect on the tree, because the quantile partition replaces
    that discretizer. ``max_bins`` is likewise accepted and ignored.
    """

    fuzzy_sets: int = 5
    quantiles: int = DEFAULT_Q
    max_depth: int = 5
    gamma: float = 0.001
    phi: float = 0.02
    lam: float = 1e-4
    tnorm: str = "product"
    inference: str = WEIGHTED_VOTE
    max_bins: Optional[int] = None

    def __post_init__(self):
        if self.fuzzy_sets < 2:
            raise ValueError("fuzzy_sets must be >= 2")
        if self.quantiles < 2:
            raise ValueError("quantiles must be >= 2")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        for name in ("gamma", "phi", "lam"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if self.tnorm != "product":
            raise ValueError(f"unsupported t-norm {self.tnorm!r}; only 'product' is available")
        if self.inference not in INFERENCE_MODES:
            raise ValueError(f"inference must be one of {INFERENCE_MODES}")
        if self.max_bins is not None:
            warnings.warn("max_bins has no effect here: the fuzzy set count plays that role",
                          stacklevel=3)

    def to_dict(self) -> dict:
        return {"fuzzy_sets": self.fuzzy_sets, "quantiles": self.quantiles,
                "max_depth": self.max_depth, "gamma": self.gamma, "phi": self.phi,
                "lambda": self.lam, "tnorm": self.tnorm, "inference": self.inference}

    @classmethod
    def from_dict(cls, d: dict) -> "Hyperparameters":
        d = dict(d)
        d["lam"] = d.pop("lambda")
        return cls(**d)


@dataclass(eq=False)
class Leaf:
    class_weights: np.ndarray
    class_cardinality: np.ndarray
    depth: int

    @property
    def cardinality(self) -> float:
        return _total(self.class_cardinality)


@dataclass(eq=False)
class Internal:
    attribute_index: int
    children: list
    class_cardinality: np.ndarray
    depth: int
    gain: float

    @property
    def cardinality(self) -> float:
        return _total(self.class_cardinality)


TreeNode = Union[Leaf, Internal]


@dataclass(eq=False)
class FMDTModel:
    root: TreeNode
    partitions: dict[int, FuzzyPartition]
    tables: dict[int, QuantileTable]
    schema: Schema
    class_labels: tuple[str, ...]
    hyperparameters: Hyperparameters
    priors: np.ndarray
    timings: dict = field(default_factory=dict, compare=False)

    @property
    def n_classes(self) -> int:
        return len(self.class_labels)

    def iter_nodes(self):
        """Depth-first (node, path) pairs; ``path`` lists branch indices from the root."""
        stack = [(self.root, ())]
        while stack:
            node, path = stack.pop()
            yield node, path
            if isinstance(node, Internal):
                for j in range(len(node.children) - 1, -1, -1):
                    stack.append((node.children[j], path + (j,)))

    def leaves(self):
        return [(n, p) for n, p in self.iter_nodes() if isinstance(n, Leaf)]


def _total(stats) -> float:
    # left-to-right so every caller agrees to the last bit
    t = 0.0
    for s in stats:
        t += float(s)
    return t


def fuzzy_entropy(stats) -> float:
    total = _total(stats)
    if not total > 0:
        raise ValueError("fuzzy entropy is undefined for zero cardinality")
    h = 0.0
    for s in stats:
        p = float(s) / total
        if p > 0:
            h -= p * math.log2(p)
    return h


def fuzzy_info_gain(parent, children) -> float:
    """Parent entropy minus the cardinality-weighted entropy of the children."""
    total = _total(parent)
    child_totals = [_total(c) for c in children]
    if _total(child_totals) > total * (1 + 1e-9) + 1e-6:
        raise ValueError("children carry more fuzzy cardinality than their parent")
    g = fuzzy_entropy(parent)
    for c, ct in zip(children, child_totals):
        if ct > 0:
            g -= (ct / total) * fuzzy_entropy(c)
    return g


def class_weights(stats, fallback=None) -> np.ndarray:
    """Normalised class cardinalities of a leaf; ``fallback`` when the leaf is empty."""
    stats = np.asarray(stats, dtype=np.float64)
    total = _total(stats)
    if total > 0:
        return stats / total
    if fallback is None:
        return np.full(stats.size, 1.0 / stats.size)
    return np.array(fallback, dtype=np.float64)


def select_split(gains) -> int:
    """Index of the best gain; near-ties go to the lowest index, -1 if no gain is positive."""
    if len(gains) == 0:
        return -1
    best = max(gains)
    if best <= GAIN_EPS:
        return -1
    for i, g in enumerate(gains):
        if g >= best - GAIN_EPS:
            return i
    return -1


def branch_memberships(values, n_branches: int, categorical: bool, cores) -> np.ndarray:
    """Membership of each value in each branch of one attribute, shape (n, n_branches)."""
    values = np.asarray(values, dtype=np.float64)
    mu = np.zeros((values.size, n_branches))
    rows = np.arange(values.size)
    if categorical:
        code = values.astype(np.int64)
        ok = (code >= 0) & (code < n_branches)
        mu[rows[ok], code[ok]] = 1.0
    else:
        k, lo, hi = kernels.locate(values, cores)
        mu[rows, k] = lo
        mu[rows, k + 1] = hi
    return mu


class _Grower:
    def __init__(self, U, y, schema: Schema, n_classes: int, hp: Hyperparameters,
                 executor=None, backend=None):
        self.U = np.ascontiguousarray(U, dtype=np.float64)
        self.y = np.ascontiguousarray(y, dtype=np.int64)
        self.M = n_classes
        self.hp = hp
        self.N = float(self.U.shape[0])
        self.cores = uniform_cores(hp.fuzzy_sets)
        attrs = schema.attributes
        self.is_cat = np.array([a.is_categorical for a in attrs], dtype=np.int64)
        self.nbranch = np.array([len(a.categories) if a.is_categorical else hp.fuzzy_sets
                                 for a in attrs], dtype=np.int64)
        self.executor = executor
        self.backend = backend

    def grow(self) -> TreeNode:
        rows = np.arange(self.U.shape[0], dtype=np.int64)
        w = np.ones(rows.size)
        stats = np.bincount(self.y, weights=w, minlength=self.M)
        return self._node(rows, w, stats, 0, frozenset(), None)

    def _leaf(self, stats, depth, fallback):
        return Leaf(class_weights(stats, fallback), np.asarray(stats, dtype=np.float64), depth)

    def _node(self, rows, w, stats, depth, used, fallback) -> TreeNode:
        hp = self.hp
        total = _total(stats)
        if not total > 0:
            return self._leaf(stats, depth, fallback)
        props = stats / total
        candidates = [f for f in range(self.U.shape[1]) if f not in used]
        if (depth >= hp.max_depth or props.max() >= 1.0 - hp.gamma
                or total < hp.lam * self.N or not candidates):
            return self._leaf(stats, depth, fallback)

        cand = np.array(candidates, dtype=np.int64)
        S = kernels.split_stats(self.U, self.y, w, rows, cand, self.nbranch[cand],
                                self.is_cat[cand], self.cores, self.M,
                                executor=self.executor, backend=self.backend)
        gains = [fuzzy_info_gain(stats, S[a, :self.nbranch[f]]) for a, f in enumerate(candidates)]
        a = select_split(gains)
        if a < 0:
            return self._leaf(stats, depth, fallback)
        f = candidates[a]
        nb = int(self.nbranch[f])
        mu = branch_memberships(self.U[rows, f], nb, bool(self.is_cat[f]), self.cores)
        children = []
        for j in range(nb):
            child_stats = S[a, j].copy()
            if _total(child_stats) < hp.lam * self.N:
                children.append(self._leaf(child_stats, depth + 1, props))
                continue
            m = mu[:, j] > 0
            children.append(self._node(rows[m], w[m] * mu[m, j], child_stats,
                                       depth + 1, used | {f}, props))
        return Internal(f, children, np.asarray(stats, dtype=np.float64), depth, gains[a])


def grow_tree(U, y, schema: Schema, n_classes: int, hp: Hyperparameters,
              workers: int = 1, backend: Optional[str] = None) -> TreeNode:
    """Induce a tree on already-transformed data ``U``."""
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return _Grower(U, y, schema, n_classes, hp, ex, backend).grow()
    return _Grower(U, y, schema, n_classes, hp, None, backend).grow()


def train(ds: Dataset, hp: Optional[Hyperparameters] = None, seed: int = 42,
          workers: int = 1, backend: Optional[str] = None) -> FMDTModel:
    """Quantile tables, transform, uniform partitions, then recursive growth.

    Induction is deterministic; ``seed`` is accepted for interface symmetry
    with the evaluation harness.
    """
    hp = hp or Hyperparameters()
    if ds.n_attributes < 1:
        raise ValueError("dataset has no attributes")
    t0 = time.perf_counter()
    tables = fit_tables(ds, hp.quantiles)
    for f, t in tables.items():
        if t.degenerate:
            log.warning("attribute %s is constant; its quantile table has a single anchor",
                        ds.schema.attributes[f].name)
    tds = transform_dataset(ds, tables)
    partitions = {f: build_uniform_partition(hp.fuzzy_sets, f) for f in tables}
    t1 = time.perf_counter()
    root = grow_tree(tds.X, tds.y, ds.schema, ds.n_classes, hp, workers, backend)
    t2 = time.perf_counter()
    priors = class_weights(np.bincount(ds.y, minlength=ds.n_classes).astype(np.float64))
    model = FMDTModel(root, partitions, tables, ds.schema, ds.class_labels, hp, priors)
    model.timings = {"partitioning": t1 - t0, "learning": t2 - t1, "total": t2 - t0}
    for hook in post_train_hooks:
        hook(model)
    return model


def transform_rows(model: FMDTModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.schema.n_attributes:
        raise ValueError(f"expected {model.schema.n_attributes} attributes, got {X.shape[1]}")
    return transform_matrix(X, model.tables, model.schema.continuous_indices())


def _branch_info(model: FMDTModel, f: int):
    a = model.schema.attributes[f]
    if a.is_categorical:
        return len(a.categories), True
    return model.hyperparameters.fuzzy_sets, False


def matching_degree(model: FMDTModel, path, u) -> float:
    """Matching degree of a transformed example ``u`` with the node at ``path``."""
    cores = uniform_cores(model.hyperparameters.fuzzy_sets)
    node, md = model.root, 1.0
    for j in path:
        if not isinstance(node, Internal):
            raise ValueError("path descends below a leaf")
        nb, cat = _branch_info(model, node.attribute_index)
        mu = branch_memberships([u[node.attribute_index]], nb, cat, cores)[0, j]
        md = mu * md
        node = node.children[j]
    return float(md)


def association_degrees(model: FMDTModel, x, transformed: bool = False):
    """``[(path, md, AD vector)]`` for every leaf activated by the example ``x``."""
    u = np.asarray(x, dtype=np.float64) if transformed else transform_rows(model, x)[0]
    cores = uniform_cores(model.hyperparameters.fuzzy_sets)
    out = []
    stack = [(model.root, (), 1.0)]
    while stack:
        node, path, md = stack.pop()
        if isinstance(node, Leaf):
            out.append((path, md, md * node.class_weights))
            continue
        nb, cat = _branch_info(model, node.attribute_index)
        mu = branch_memberships([u[node.attribute_index]], nb, cat, cores)[0]
        for j in range(nb - 1, -1, -1):
            if mu[j] > 0:
                stack.append((node.children[j], path + (j,), mu[j] * md))
    return out


def predict_scores(model: FMDTModel, X, transformed: bool = False):
    """Per-class (vote sums, maximum association degrees, activated mask) for rows of ``X``."""
    U = np.atleast_2d(np.asarray(X, dtype=np.float64)) if transformed else transform_rows(model, X)
    n, M = U.shape[0], model.n_classes
    votes = np.zeros((n, M))
    best = np.zeros((n, M))
    active = np.zeros(n, dtype=bool)
    cores = uniform_cores(model.hyperparameters.fuzzy_sets)
    stack = [(model.root, np.arange(n), np.ones(n))]
    while stack:
        node, rows, md = stack.pop()
        if rows.size == 0:
            continue
        if isinstance(node, Leaf):
            ad = md[:, None] * node.class_weights[None, :]
            votes[rows] += ad
            best[rows] = np.maximum(best[rows], ad)
            active[rows] = True
            continue
        nb, cat = _branch_info(model, node.attribute_index)
        mu = branch_memberships(U[rows, node.attribute_index], nb, cat, cores)
        for j in range(nb - 1, -1, -1):
            m = mu[:, j] > 0
            stack.append((node.children[j], rows[m], mu[m, j] * md[m]))
    return votes, best, active


def predict(model: FMDTModel, X, mode: Optional[str] = None, transformed: bool = False):
    """Predicted class indices and the score matrix used to pick them.

    Ties go to the lowest class index; rows activating no leaf get the
    majority class of the training data.
    """
    mode = mode or model.hyperparameters.inference
    if mode not in INFERENCE_MODES:
        raise ValueError(f"unknown inference mode {mode!r}")
    votes, best, active = predict_scores(model, X, transformed)
    scores = best if mode == MAX_MATCHING else votes
    pred = np.argmax(scores, axis=1)
    pred[~active] = int(np.argmax(model.priors))
    return pred, scores


def complexity(model: FMDTModel) -> dict:
    depths = [leaf.depth for leaf, _ in model.leaves()]
    cont = model.schema.continuous_indices()
    sets = [model.partitions[f].size for f in cont] if cont else []
    return {
        "leaf_count": len(depths),
        "avg_depth": float(np.mean(depths)),
        "avg_fuzzy_sets": float(np.mean(sets)) if sets else 0.0,
    }


def check_invariants(model: FMDTModel, rel_tol: float = 1e-6) -> list[str]:
    """Structural problems found in ``model``; an empty list means it is sound."""
    hp = model.hyperparameters
    problems = []
    F = model.schema.n_attributes

    def walk(node, depth, used):
        if node.depth != depth:
            problems.append(f"node at depth {depth} records depth {node.depth}")
        if depth > hp.max_depth:
            problems.append(f"node deeper than max_depth at depth {depth}")
        if isinstance(node, Leaf):
            s = _total(node.class_weights)
            if abs(s - 1.0) > 1e-9 or np.any(node.class_weights < 0):
                problems.append(f"leaf weights do not form a distribution: {node.class_weights}")
            return
        f = node.attribute_index
        if not 0 <= f < F:
            problems.append(f"unknown attribute {f}")
            return
        if f in used:
            problems.append(f"attribute {f} repeated on a path")
        nb, _ = _branch_info(model, f)
        if len(node.children) != nb:
            problems.append(f"attribute {f} has {len(node.children)} children, expected {nb}")
        if node.gain < 0:
            problems.append(f"negative gain {node.gain}")
        parent = node.cardinality
        kids = _total([c.cardinality for c in node.children])
        if abs(kids - parent) > rel_tol * max(parent, 1e-300):
            problems.append(f"cardinality not conserved: {parent} -> {kids}")
        for c in node.children:
            walk(c, depth + 1, used | {f})

    walk(model.root, 0, frozenset())
    if not model.schema.attributes or all(not a.is_categorical for a in model.schema.attributes):
        limit = hp.fuzzy_sets ** hp.max_depth
        n_leaves = len(model.leaves())
        if n_leaves > limit:
            problems.append(f"{n_leaves} leaves exceed T^max_depth = {limit}")
    return problems

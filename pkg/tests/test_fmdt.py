import itertools
import math

import numpy as np
import pytest

from conftest import make_mixed
from fmdt_pit import (Dataset, FMDTModel, Hyperparameters, Internal, Leaf, association_degrees,
                      build_uniform_partition, class_weights, complexity, fuzzy_entropy,
                      fuzzy_info_gain, grow_tree, matching_degree, memberships, predict, train)
from fmdt_pit import model_io
from fmdt_pit.dataset import AttributeSchema, Schema
from fmdt_pit.fmdt import MAX_MATCHING, WEIGHTED_VOTE, check_invariants, select_split
from fmdt_pit.pit import cdf, fit_tables, transform_dataset
from reference import compare_trees, reference_tree


def schema_of(kinds):
    return Schema(tuple(AttributeSchema(f"a{i}", i, k) for i, k in enumerate(kinds)))


def hand_model(root, kinds, T, n_classes=2, priors=None):
    schema = schema_of(kinds)
    parts = {f: build_uniform_partition(T, f) for f in schema.continuous_indices()}
    labels = tuple(str(i) for i in range(n_classes))
    priors = np.full(n_classes, 1 / n_classes) if priors is None else np.asarray(priors)
    return FMDTModel(root, parts, {}, schema, labels, Hyperparameters(fuzzy_sets=T), priors)


def leaf(w, depth=1):
    w = np.asarray(w, dtype=float)
    return Leaf(w, w.copy(), depth)


# --- entropy and gain -------------------------------------------------------

def test_entropy_examples():
    assert fuzzy_entropy([1, 1]) == 1.0
    assert fuzzy_entropy([3, 0]) == 0.0
    expected = -(0.25 * math.log2(0.25) + 0.75 * math.log2(0.75))
    assert fuzzy_entropy([0.5, 1.5]) == pytest.approx(expected, abs=1e-15)
    assert expected == pytest.approx(0.811278, abs=1e-6)
    with pytest.raises(ValueError):
        fuzzy_entropy([0, 0])


def test_gain_examples():
    assert fuzzy_info_gain([2, 2], [[2, 0], [0, 2]]) == 1.0
    assert fuzzy_info_gain([4, 2], [[2, 1], [2, 1]]) == pytest.approx(0.0, abs=1e-15)
    g = fuzzy_info_gain([1, 1], [[0.75, 0.25], [0.25, 0.75]])
    assert g == pytest.approx(1 - fuzzy_entropy([0.5, 1.5]), abs=1e-15)
    assert g == pytest.approx(0.188722, abs=1e-6)
    with pytest.raises(ValueError, match="more fuzzy cardinality"):
        fuzzy_info_gain([1, 1], [[1, 1], [1, 0]])


def test_select_split_ties_and_zero():
    assert select_split([0.3, 0.5, 0.5]) == 1
    assert select_split([0.5, 0.5 + 1e-14]) == 0
    assert select_split([0.0, -0.1]) == -1
    assert select_split([]) == -1


def test_class_weights():
    assert class_weights([2.0, 0.0]).tolist() == [1, 0]
    assert class_weights([1.0, 3.0]).tolist() == [0.25, 0.75]
    assert class_weights([0.0, 0.0], fallback=[0.4, 0.6]).tolist() == [0.4, 0.6]


# --- induction ----------------------------------------------------------------

def test_single_class_is_root_leaf():
    ds = Dataset.from_arrays(np.random.default_rng(0).normal(size=(30, 2)), np.zeros(30), ("a", "b"))
    m = train(ds)
    assert isinstance(m.root, Leaf)
    assert m.root.class_weights.tolist() == [1.0, 0.0]


def test_max_depth_zero_gives_priors():
    ds = make_mixed(200)
    m = train(ds, Hyperparameters(max_depth=0))
    assert isinstance(m.root, Leaf)
    priors = np.bincount(ds.y, minlength=3) / ds.n
    np.testing.assert_allclose(m.root.class_weights, priors, rtol=0, atol=1e-15)


def xor_style():
    # unequal cell counts give a positive gain at the root, so greedy search
    # can find the depth-2 solution a balanced XOR would hide
    cells = {(0, 0): (0, 3), (0, 1): (1, 1), (1, 0): (1, 1), (1, 1): (0, 1)}
    U, y = [], []
    for (a, b), (cls, count) in cells.items():
        U += [[float(a), float(b)]] * count
        y += [cls] * count
    return np.array(U), np.array(y)


def test_xor_style_tree():
    U, y = xor_style()
    hp = Hyperparameters(fuzzy_sets=2)
    root = grow_tree(U, y, schema_of([None, None]), 2, hp)
    m = hand_model(root, [None, None], 2)
    c = complexity(m)
    assert (c["leaf_count"], c["avg_depth"]) == (4, 2.0)
    assert root.attribute_index == 0  # both attributes tie, lowest index wins
    pred, _ = predict(m, U, transformed=True)
    assert np.array_equal(pred, y)
    # brute force over the 2x2 grid
    for a, b in itertools.product((0.0, 1.0), repeat=2):
        p, _ = predict(m, [[a, b]], transformed=True)
        assert p[0] == (1 if a != b else 0)


def test_zero_cardinality_child_inherits_parent():
    rng = np.random.default_rng(3)
    U = np.column_stack([rng.uniform(0, 0.5, 300), rng.random(300)])
    y = (U[:, 0] > 0.25).astype(int)
    hp = Hyperparameters(fuzzy_sets=3, max_depth=1)
    root = grow_tree(U, y, schema_of([None, None]), 2, hp)
    assert root.attribute_index == 0
    empty = root.children[2]
    assert isinstance(empty, Leaf) and empty.cardinality == 0.0
    np.testing.assert_array_equal(empty.class_weights, root.class_cardinality / root.cardinality)


def test_small_children_become_leaves():
    U, y = xor_style()
    root = grow_tree(U, y, schema_of([None, None]), 2, Hyperparameters(fuzzy_sets=2, lam=0.4))
    # children of the root hold 4 and 2 of the 6 examples; only the first is >= 0.4 * 6
    assert isinstance(root.children[0], Internal) and isinstance(root.children[1], Leaf)


def test_categorical_training(mixed_ds):
    m = train(mixed_ds, Hyperparameters(fuzzy_sets=3, max_depth=3))
    cats = [n for n, _ in m.iter_nodes() if isinstance(n, Internal) and n.attribute_index == 2]
    assert cats and all(len(n.children) == 3 for n in cats)
    assert check_invariants(m) == []


def test_train_equals_grow_on_transformed(mixed_ds):
    hp = Hyperparameters(fuzzy_sets=4, quantiles=50)
    m = train(mixed_ds, hp)
    t = transform_dataset(mixed_ds, fit_tables(mixed_ds, 50))
    root = grow_tree(t.X, t.y, mixed_ds.schema, 3, hp)
    assert model_io._node_to_dict(root) == model_io._node_to_dict(m.root)


@pytest.mark.parametrize("seed", range(12))
def test_matches_reference(seed):
    rng = np.random.default_rng(seed)
    n, F, M, T = int(rng.integers(20, 120)), int(rng.integers(1, 4)), int(rng.integers(2, 4)), int(rng.integers(2, 4))
    kinds = [None if rng.random() < 0.7 else ("a", "b", "c") for _ in range(F)]
    U = rng.random((n, F))
    U[rng.random((n, F)) < 0.2] = 0.5
    for f, k in enumerate(kinds):
        if k:
            U[:, f] = rng.integers(0, 3, size=n)
    y = rng.integers(0, M, size=n)
    hp = Hyperparameters(fuzzy_sets=T, max_depth=3, lam=float(rng.choice([1e-4, 0.05])))
    root = grow_tree(U, y, schema_of(kinds), M, hp)
    ref = reference_tree(U.tolist(), y.tolist(), [None if k is None else 3 for k in kinds],
                         T, M, 3, hp.gamma, hp.lam)
    assert compare_trees(root, ref) == []


def test_training_deterministic_and_worker_independent():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(40_000, 3))
    y = (X[:, 0] + X[:, 1] ** 2 > 1).astype(int)
    ds = Dataset.from_arrays(X, y)
    ref = model_io.dumps(train(ds))
    assert model_io.dumps(train(ds)) == ref
    assert model_io.dumps(train(ds, workers=3)) == ref


# --- inference ----------------------------------------------------------------

def test_matching_degree_product():
    inner = Internal(1, [leaf([1, 0], 2), leaf([0, 1], 2)], np.array([1.0, 1.0]), 1, 0.1)
    root = Internal(0, [inner, leaf([0.5, 0.5])], np.array([2.0, 2.0]), 0, 0.1)
    m = hand_model(root, [None, None], 2)
    u = [0.5, 0.7]  # mu = 0.5 on the first attribute, 0.3 on the second
    assert matching_degree(m, (), u) == 1.0
    assert matching_degree(m, (0,), u) == 0.5
    assert matching_degree(m, (0, 0), u) == pytest.approx(0.15, abs=1e-15)
    assert matching_degree(m, (0, 0), [0.5, 1.0]) == 0.0


def test_association_degree_arithmetic():
    root = Internal(0, [leaf([0.25, 0.75])] + [leaf([0.5, 0.5]) for _ in range(4)],
                    np.array([1.0, 1.0]), 0, 0.1)
    m = hand_model(root, [None], 5)
    ads = dict((p, (md, ad)) for p, md, ad in association_degrees(m, [0.2], transformed=True))
    md, ad = ads[(0,)]
    assert md == pytest.approx(0.2, abs=1e-15)
    np.testing.assert_allclose(ad, [0.05, 0.15], atol=1e-15)


def test_root_leaf_association():
    m = hand_model(leaf([0.9, 0.1], 0), [None], 3)
    (path, md, ad), = association_degrees(m, [0.4], transformed=True)
    assert path == () and md == 1.0 and ad.tolist() == [0.9, 0.1]
    for mode in (MAX_MATCHING, WEIGHTED_VOTE):
        assert predict(m, [[0.4]], mode, transformed=True)[0][0] == 0


def test_modes_diverge():
    root = Internal(0, [leaf([1.0, 0.0]), leaf([0.25, 0.75])], np.array([1.0, 1.0]), 0, 0.1)
    m = hand_model(root, [None], 2)
    ads = {p: ad for p, _, ad in association_degrees(m, [0.6], transformed=True)}
    np.testing.assert_allclose(ads[(0,)], [0.4, 0.0], atol=1e-15)
    np.testing.assert_allclose(ads[(1,)], [0.15, 0.45], atol=1e-15)
    pm, sm = predict(m, [[0.6]], MAX_MATCHING, transformed=True)
    pv, sv = predict(m, [[0.6]], WEIGHTED_VOTE, transformed=True)
    assert pm[0] == 1 and pv[0] == 0
    np.testing.assert_allclose(sv[0], [0.55, 0.45], atol=1e-15)


def test_tie_goes_to_lowest_class():
    m = hand_model(leaf([0.5, 0.5], 0), [None], 2)
    for mode in (MAX_MATCHING, WEIGHTED_VOTE):
        assert predict(m, [[0.3]], mode, transformed=True)[0][0] == 0


def test_zero_activation_uses_majority():
    root = Internal(0, [leaf([1.0, 0.0]), leaf([0.0, 1.0])], np.array([1.0, 3.0]), 0, 0.5)
    m = hand_model(root, [("x", "y")], 2, priors=[0.25, 0.75])
    pred, scores = predict(m, [[5.0], [0.0]], transformed=True)
    assert pred.tolist() == [1, 0]
    assert scores[0].tolist() == [0.0, 0.0]


def test_leaf_matching_degrees_sum_to_one():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(3000, 3))
    ds = Dataset.from_arrays(X, (X[:, 0] * X[:, 2] > 0).astype(int))
    m = train(ds, Hyperparameters(fuzzy_sets=3, max_depth=3))
    leaves = m.leaves()
    parts = m.partitions
    for x in rng.normal(size=(25, 3)):
        u = np.array([cdf(m.tables[f], x[f]) for f in range(3)])
        # brute force: product of memberships along every root-to-leaf path
        total = 0.0
        for node, path in leaves:
            md, cur = 1.0, m.root
            for j in path:
                md *= memberships(parts[cur.attribute_index], u[cur.attribute_index])[j]
                cur = cur.children[j]
            total += md
        assert total == pytest.approx(1.0, abs=1e-12)
        assert sum(md for _, md, _ in association_degrees(m, x)) == pytest.approx(1.0, abs=1e-12)


# --- complexity -----------------------------------------------------------------

def test_complexity_root_leaf():
    c = complexity(hand_model(leaf([1, 0], 0), [None], 5))
    assert (c["leaf_count"], c["avg_depth"], c["avg_fuzzy_sets"]) == (1, 0.0, 5.0)


def test_complexity_full_tree():
    def full(depth, f):
        if depth == 2:
            return leaf([1, 0], 2)
        return Internal(f, [full(depth + 1, f + 1) for _ in range(3)], np.ones(2), depth, 0.1)
    c = complexity(hand_model(full(0, 0), [None, None], 3))
    assert (c["leaf_count"], c["avg_depth"], c["avg_fuzzy_sets"]) == (9, 2.0, 3.0)


@pytest.mark.parametrize("T", [5, 7])
def test_avg_fuzzy_sets_is_T(T, mixed_ds):
    assert complexity(train(mixed_ds, Hyperparameters(fuzzy_sets=T)))["avg_fuzzy_sets"] == T


# --- hyperparameters and persistence -------------------------------------------

def test_hyperparameter_defaults():
    hp = Hyperparameters()
    assert (hp.max_depth, hp.gamma, hp.phi, hp.lam, hp.tnorm) == (5, 0.001, 0.02, 1e-4, "product")


@pytest.mark.parametrize("kw", [dict(fuzzy_sets=1), dict(quantiles=1), dict(gamma=0.0),
                                dict(phi=1.5), dict(lam=-1.0), dict(tnorm="min"),
                                dict(inference="vote")])
def test_hyperparameter_validation(kw):
    with pytest.raises(ValueError):
        Hyperparameters(**kw)


def test_max_bins_warns():
    with pytest.warns(UserWarning, match="max_bins"):
        Hyperparameters(max_bins=32)


def test_model_json_round_trip(mixed_ds, tmp_path):
    m = train(mixed_ds, Hyperparameters(fuzzy_sets=3))
    path = tmp_path / "m.json"
    model_io.save(m, path)
    back = model_io.load(path)
    assert model_io.dumps(back) == path.read_text()
    assert '"version": "fmdt-pit/1"' in path.read_text()
    a, sa = predict(m, mixed_ds.X)
    b, sb = predict(back, mixed_ds.X)
    assert np.array_equal(a, b) and sa.tobytes() == sb.tobytes()


def test_model_version_checked():
    with pytest.raises(model_io.ModelFormatError):
        model_io.loads('{"version": "other/9"}')

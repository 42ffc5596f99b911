import sys
from pathlib import Path

import numpy as np
import pytest

from fmdt_pit import Dataset, check_invariants
from fmdt_pit import fmdt

sys.path.insert(0, str(Path(__file__).parent))

CHECKED = {"models": 0}


def _verify(model):
    problems = check_invariants(model)
    assert not problems, problems
    CHECKED["models"] += 1


@pytest.fixture(autouse=True, scope="session")
def _invariant_hook():
    """Every model trained anywhere in the suite gets its structure checked."""
    fmdt.post_train_hooks.append(_verify)
    yield
    fmdt.post_train_hooks.remove(_verify)


def make_mixed(n=400, seed=0):
    """Two continuous attributes and one categorical, 3 classes."""
    from fmdt_pit import AttributeSchema, Schema

    rng = np.random.default_rng(seed)
    x0 = rng.normal(size=n)
    x1 = rng.exponential(size=n)
    cat = rng.integers(0, 3, size=n)
    score = x0 + (cat == 2) * 1.5 - x1
    y = np.digitize(score, [-0.8, 0.4])
    schema = Schema((AttributeSchema("x0", 0), AttributeSchema("x1", 1),
                     AttributeSchema("colour", 2, ("red", "green", "blue"))),
                    class_labels=("lo", "mid", "hi"))
    return Dataset(schema, ("lo", "mid", "hi"), np.column_stack([x0, x1, cat]), y)


def make_two_gaussians(n=10_000, seed=1, noise_dims=1):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, size=n)
    X = rng.normal(size=(n, 1 + noise_dims))
    X[:, 0] += 2.0 * y
    return Dataset.from_arrays(X, y, ("a", "b"))


@pytest.fixture
def mixed_ds():
    return make_mixed()


def pytest_terminal_summary(terminalreporter):
    terminalreporter.write_line(f"structural invariants checked on {CHECKED['models']} trained models")

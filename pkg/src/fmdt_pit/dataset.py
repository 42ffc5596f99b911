"""Tabular data ingestion, schema typing and stratified fold assignment.

Rows are held as a float64 matrix. Continuous columns store the raw value,
categorical columns store the integer code of the category (its position in
the schema's category list).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np


class DataError(ValueError):
    """Raised for malformed data or schema files."""


@dataclass(frozen=True)
class AttributeSchema:
    name: str
    index: int
    categories: Optional[tuple[str, ...]] = None

    @property
    def is_categorical(self) -> bool:
        return self.categories is not None

    @property
    def kind(self) -> str:
        return "categorical" if self.is_categorical else "continuous"

    def __post_init__(self):
        if self.categories is not None:
            if len(self.categories) == 0:
                raise DataError(f"attribute {self.name!r}: empty category list")
            if len(set(self.categories)) != len(self.categories):
                raise DataError(f"attribute {self.name!r}: duplicate categories")


@dataclass(frozen=True)
class Schema:
    """Column layout of a data file.

    ``class_position`` is the column index of the class label in the file;
    attribute columns are the remaining ones, in file order.
    """

    attributes: tuple[AttributeSchema, ...]
    class_name: str = "class"
    class_labels: Optional[tuple[str, ...]] = None
    class_position: Optional[int] = None

    def __post_init__(self):
        for i, a in enumerate(self.attributes):
            if a.index != i:
                raise DataError("attribute indices must be contiguous 0..F-1")
        if self.class_labels is not None and len(set(self.class_labels)) != len(self.class_labels):
            raise DataError("duplicate class labels in schema")

    @property
    def n_attributes(self) -> int:
        return len(self.attributes)

    @property
    def n_columns(self) -> int:
        return len(self.attributes) + 1

    @property
    def class_column(self) -> int:
        return self.n_attributes if self.class_position is None else self.class_position

    def continuous_indices(self) -> list[int]:
        return [a.index for a in self.attributes if not a.is_categorical]

    def to_dict(self) -> dict:
        return {
            "attributes": [
                {"name": a.name, "kind": a.kind,
                 **({"categories": list(a.categories)} if a.is_categorical else {})}
                for a in self.attributes
            ],
            "class_name": self.class_name,
            "class_position": self.class_column,
        }

    @classmethod
    def from_dict(cls, d: dict, class_labels: Optional[Sequence[str]] = None) -> "Schema":
        attrs = tuple(
            AttributeSchema(a["name"], i, tuple(a["categories"]) if a["kind"] == "categorical" else None)
            for i, a in enumerate(d["attributes"])
        )
        return cls(attrs, d.get("class_name", "class"),
                   tuple(class_labels) if class_labels is not None else None,
                   d.get("class_position"))

    def same_layout(self, other: "Schema") -> bool:
        return (self.attributes == other.attributes
                and self.class_column == other.class_column)


_CONTINUOUS_KINDS = {"continuous", "real", "integer", "numeric", "r", "i"}
_CATEGORICAL_KINDS = {"categorical", "nominal", "c"}


def parse_schema(text: str) -> Schema:
    """Parse a schema declaration.

    One line per file column, in column order::

        name,continuous
        colour,categorical,red|green|blue
        label,class[,pos|neg]

    Without a ``class`` line the last column of the data file is the class.
    Blank lines and lines starting with ``#`` are skipped.
    """
    attrs: list[AttributeSchema] = []
    class_name = "class"
    class_labels = None
    class_position = None
    column = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) < 2:
            raise DataError(f"schema line {lineno}: expected 'name,kind[,values]'")
        name, kind = parts[0], parts[1].lower()
        values = tuple(v.strip() for v in parts[2].split("|")) if len(parts) > 2 and parts[2] else None
        if kind == "class":
            if class_position is not None:
                raise DataError(f"schema line {lineno}: second class line")
            class_name, class_labels, class_position = name, values, column
        elif kind in _CONTINUOUS_KINDS:
            attrs.append(AttributeSchema(name, len(attrs)))
        elif kind in _CATEGORICAL_KINDS:
            if not values:
                raise DataError(f"schema line {lineno}: categorical attribute needs a value list")
            attrs.append(AttributeSchema(name, len(attrs), values))
        else:
            raise DataError(f"schema line {lineno}: unknown kind {parts[1]!r}")
        column += 1
    if not attrs:
        raise DataError("schema declares no attributes")
    return Schema(tuple(attrs), class_name, class_labels, class_position)


def load_schema(path) -> Schema:
    return parse_schema(Path(path).read_text(encoding="utf-8"))


def format_schema(schema: Schema) -> str:
    lines = []
    attrs = iter(schema.attributes)
    for col in range(schema.n_columns):
        if col == schema.class_column:
            labels = "|".join(schema.class_labels) if schema.class_labels else ""
            lines.append(f"{schema.class_name},class" + (f",{labels}" if labels else ""))
        else:
            a = next(attrs)
            if a.is_categorical:
                lines.append(f"{a.name},categorical,{'|'.join(a.categories)}")
            else:
                lines.append(f"{a.name},continuous")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class Dataset:
    schema: Schema
    class_labels: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.ascontiguousarray(self.X, dtype=np.float64)
        y = np.ascontiguousarray(self.y, dtype=np.int64)
        if X.ndim != 2 or X.shape[1] != self.schema.n_attributes:
            raise DataError(f"expected {self.schema.n_attributes} attribute columns, got shape {X.shape}")
        if X.shape[0] < 1 or y.shape != (X.shape[0],):
            raise DataError("dataset needs at least one row and one label per row")
        if len(self.class_labels) < 2:
            raise DataError("at least two classes are required")
        if y.min() < 0 or y.max() >= len(self.class_labels):
            raise DataError("class index out of range")
        for a in self.schema.attributes:
            col = X[:, a.index]
            if a.is_categorical:
                if np.any((col < 0) | (col >= len(a.categories)) | (col != np.floor(col))):
                    raise DataError(f"attribute {a.name!r}: invalid category code")
            elif not np.all(np.isfinite(col)):
                raise DataError(f"attribute {a.name!r}: non-finite value")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def n_attributes(self) -> int:
        return self.X.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_labels)

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset(self.schema, self.class_labels, self.X[rows], self.y[rows])

    def with_values(self, X: np.ndarray) -> "Dataset":
        return Dataset(self.schema, self.class_labels, X, self.y)

    def equals(self, other: "Dataset") -> bool:
        return (self.schema.same_layout(other.schema)
                and self.class_labels == other.class_labels
                and np.array_equal(self.X, other.X)
                and np.array_equal(self.y, other.y))

    @classmethod
    def from_arrays(cls, X, y, class_labels=None, schema: Optional[Schema] = None) -> "Dataset":
        """Wrap in-memory arrays; attributes default to continuous ``x0..x{F-1}``."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        y = np.asarray(y, dtype=np.int64)
        if class_labels is None:
            class_labels = tuple(str(i) for i in range(max(int(y.max()) + 1, 2)))
        if schema is None:
            schema = Schema(tuple(AttributeSchema(f"x{i}", i) for i in range(X.shape[1])),
                            class_labels=tuple(class_labels))
        return cls(schema, tuple(class_labels), X, y)


def _format_value(v: float) -> str:
    return repr(float(v))


def _parse_row(parts, schema, lineno, label_index, labels_growing, allow_missing_class):
    F = schema.n_attributes
    cls_col = schema.class_column
    if len(parts) == schema.n_columns:
        has_class = True
    elif allow_missing_class and len(parts) == F:
        has_class = False
    else:
        raise DataError(f"line {lineno}: expected {schema.n_columns} fields, got {len(parts)}")
    values = [0.0] * F
    a = 0
    label = -1
    for col, tok in enumerate(parts):
        tok = tok.strip()
        if has_class and col == cls_col:
            if tok not in label_index:
                if not labels_growing:
                    raise DataError(f"line {lineno}: unknown class label {tok!r}")
                label_index[tok] = len(label_index)
            label = label_index[tok]
            continue
        attr = schema.attributes[a]
        if attr.is_categorical:
            try:
                values[a] = float(attr.categories.index(tok))
            except ValueError:
                raise DataError(f"line {lineno}: unknown category {tok!r} for {attr.name!r}") from None
        else:
            try:
                v = float(tok)
            except ValueError:
                raise DataError(f"line {lineno}: non-numeric value {tok!r} for {attr.name!r}") from None
            if not math.isfinite(v):
                raise DataError(f"line {lineno}: non-finite value {tok!r} for {attr.name!r}")
            values[a] = v
        a += 1
    return values, label


def _read_rows(path, schema, has_header, allow_missing_class):
    labels_growing = schema.class_labels is None
    label_index = {} if labels_growing else {l: i for i, l in enumerate(schema.class_labels)}
    rows, ys = [], []
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as e:
        raise DataError(f"cannot read {path}: {e.strerror}") from e
    with fh:
        reader = csv.reader(fh)
        for lineno, parts in enumerate(reader, 1):
            if has_header and lineno == 1:
                continue
            if not parts or (len(parts) == 1 and not parts[0].strip()):
                continue
            v, lab = _parse_row(parts, schema, lineno, label_index, labels_growing, allow_missing_class)
            rows.append(v)
            ys.append(lab)
    labels = tuple(label_index)
    X = np.array(rows, dtype=np.float64).reshape(len(rows), schema.n_attributes)
    return X, np.array(ys, dtype=np.int64), labels


def load_csv(path, schema: Schema, has_header: bool = False) -> Dataset:
    """Load a comma-separated file into a :class:`Dataset`.

    Class labels come from the schema's class line when it lists them,
    otherwise from the data in order of first appearance. Row order is
    preserved. Raises :class:`DataError` with the offending line number.
    """
    X, y, labels = _read_rows(path, schema, has_header, allow_missing_class=False)
    if X.shape[0] == 0:
        raise DataError(f"{path}: no data rows")
    return Dataset(schema, labels, X, y)


def load_features(path, schema: Schema, has_header: bool = False):
    """Read rows for prediction. The class column may be absent.

    Returns ``(X, y)`` with ``y`` entries of -1 where no label was given.
    """
    X, y, _ = _read_rows(path, schema, has_header, allow_missing_class=True)
    return X, y


def write_csv(ds: Dataset, path, header: bool = False) -> None:
    schema = ds.schema
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            names = [a.name for a in schema.attributes]
            names.insert(schema.class_column, schema.class_name)
            w.writerow(names)
        for row, label in zip(ds.X, ds.y):
            out = []
            for a in schema.attributes:
                v = row[a.index]
                out.append(a.categories[int(v)] if a.is_categorical else _format_value(v))
            out.insert(schema.class_column, ds.class_labels[label])
            w.writerow(out)


@dataclass(frozen=True, eq=False)
class FoldAssignment:
    k: int
    assignment: np.ndarray = field(repr=False)

    def indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == fold)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for i, f in enumerate(self.assignment):
                fh.write(f"{i},{int(f)}\n")

    @classmethod
    def load(cls, path, k: Optional[int] = None) -> "FoldAssignment":
        pairs = np.loadtxt(path, delimiter=",", dtype=np.int64, ndmin=2)
        order = np.argsort(pairs[:, 0], kind="stable")
        assignment = pairs[order, 1]
        return cls(int(k if k is not None else assignment.max() + 1), assignment)


def stratified_folds(ds: Dataset, k: int = 5, seed: int = 42) -> FoldAssignment:
    """Seeded per-class shuffle followed by round-robin dealing into ``k`` folds.

    Each class starts dealing where the previous class stopped, so total fold
    sizes stay balanced as well as the per-class counts.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    y = ds.y
    counts = np.bincount(y, minlength=ds.n_classes)
    for c, cnt in enumerate(counts):
        if 0 < cnt < k:
            raise ValueError(f"class {ds.class_labels[c]!r} has {cnt} examples, fewer than k={k}")
    rng = np.random.default_rng(seed)
    assignment = np.empty(ds.n, dtype=np.int64)
    offset = 0
    for c in range(ds.n_classes):
        idx = np.flatnonzero(y == c)
        if idx.size == 0:
            continue
        idx = idx[rng.permutation(idx.size)]
        assignment[idx] = (offset + np.arange(idx.size)) % k
        offset += idx.size
    return FoldAssignment(k, assignment)


def split_by_fold(ds: Dataset, fa: FoldAssignment, test_fold: int) -> tuple[Dataset, Dataset]:
    if not 0 <= test_fold < fa.k:
        raise ValueError(f"test_fold must be in 0..{fa.k - 1}")
    mask = fa.assignment == test_fold
    return ds.subset(np.flatnonzero(~mask)), ds.subset(np.flatnonzero(mask))

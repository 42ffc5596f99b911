"""JSON persistence for :class:`~fmdt_pit.fmdt.FMDTModel` (format ``fmdt-pit/1``).

Floats are written with ``repr``, the shortest string that round-trips to
the same double, so a saved model reloads bit for bit.
"""
from __future__ import annotations

import json

import numpy as np

from .dataset import Schema
from .fmdt import FMDTModel, Hyperparameters, Internal, Leaf
from .partition import FuzzyPartition
from .pit import QuantileTable

FORMAT_VERSION = "fmdt-pit/1"


class ModelFormatError(ValueError):
    pass


def _floats(a) -> list:
    return [float(v) for v in a]


def _node_to_dict(node) -> dict:
    if isinstance(node, Leaf):
        return {"type": "leaf", "depth": node.depth,
                "class_weights": _floats(node.class_weights),
                "class_cardinality": _floats(node.class_cardinality)}
    return {"type": "internal", "depth": node.depth, "attribute": node.attribute_index,
            "gain": float(node.gain), "class_cardinality": _floats(node.class_cardinality),
            "children": [_node_to_dict(c) for c in node.children]}


def _node_from_dict(d: dict):
    kind = d.get("type")
    if kind == "leaf":
        return Leaf(np.array(d["class_weights"], dtype=np.float64),
                    np.array(d["class_cardinality"], dtype=np.float64), int(d["depth"]))
    if kind == "internal":
        return Internal(int(d["attribute"]), [_node_from_dict(c) for c in d["children"]],
                        np.array(d["class_cardinality"], dtype=np.float64),
                        int(d["depth"]), float(d["gain"]))
    raise ModelFormatError(f"unknown node type {kind!r}")


def model_to_dict(model: FMDTModel) -> dict:
    return {
        "version": FORMAT_VERSION,
        "schema": model.schema.to_dict(),
        "class_labels": list(model.class_labels),
        "hyperparameters": model.hyperparameters.to_dict(),
        "priors": _floats(model.priors),
        "tables": [model.tables[f].to_dict() for f in sorted(model.tables)],
        "partitions": [model.partitions[f].to_dict() for f in sorted(model.partitions)],
        "tree": _node_to_dict(model.root),
    }


def model_from_dict(d: dict) -> FMDTModel:
    if d.get("version") != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model version {d.get('version')!r}")
    labels = tuple(d["class_labels"])
    tables = {t.attribute_index: t for t in map(QuantileTable.from_dict, d["tables"])}
    partitions = {p.attribute_index: p for p in map(FuzzyPartition.from_dict, d["partitions"])}
    return FMDTModel(
        root=_node_from_dict(d["tree"]),
        partitions=partitions,
        tables=tables,
        schema=Schema.from_dict(d["schema"], labels),
        class_labels=labels,
        hyperparameters=Hyperparameters.from_dict(d["hyperparameters"]),
        priors=np.array(d["priors"], dtype=np.float64),
    )


def dumps(model: FMDTModel) -> str:
    return json.dumps(model_to_dict(model), indent=1) + "\n"


def loads(text: str) -> FMDTModel:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"model file is not valid JSON: {e}") from e
    return model_from_dict(d)


def save(model: FMDTModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(model))


def load(path) -> FMDTModel:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())

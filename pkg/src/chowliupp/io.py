"""Readers and writers for the model JSON and matrix/sample CSV formats."""

import json
from pathlib import Path

import numpy as np

from chowliupp.metric import SteinerTree
from chowliupp.model import TreeIsingModel
from chowliupp.validation import check_correlation_matrix, check_distance_matrix, check_spins


def model_to_dict(model):
    return {
        "n": model.n,
        "edges": [[int(u), int(v), float(t)] for (u, v), t in zip(model.edges, model.theta)],
    }


def model_from_dict(data):
    try:
        n = int(data["n"])
        edges = [(int(u), int(v), float(t)) for u, v, t in data["edges"]]
    except (KeyError, TypeError, ValueError) as err:
        raise ValueError(f"malformed model: {err}") from err
    return TreeIsingModel.from_edges(n, edges)


def read_model(path):
    return model_from_dict(json.loads(Path(path).read_text()))


def write_model(model, path):
    write_json(model_to_dict(model), path)


def write_json(data, path):
    Path(path).write_text(json.dumps(data, indent=2, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _read_csv(path, dtype=float):
    arr = np.loadtxt(path, delimiter=",", dtype=dtype, ndmin=2)
    return arr


def read_correlations(path):
    return check_correlation_matrix(_read_csv(path))


def write_correlations(mu, path):
    np.savetxt(path, np.asarray(mu, dtype=float), delimiter=",", fmt="%.17g")


def read_distances(path):
    """Distance CSV; the token `inf` marks unknown or infinite entries."""
    return check_distance_matrix(_read_csv(path))


def write_distances(d, path):
    np.savetxt(path, np.asarray(d, dtype=float), delimiter=",", fmt="%.17g")


def read_samples(path):
    return check_spins(_read_csv(path, dtype=np.int64))


def write_samples(x, path_or_file):
    np.savetxt(path_or_file, np.asarray(x, dtype=np.int64), delimiter=",", fmt="%d")


def read_steiner(path):
    return SteinerTree.from_dict(json.loads(Path(path).read_text()))


def write_steiner(tree, path):
    write_json(tree.to_dict(), path)

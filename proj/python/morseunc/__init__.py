"""Topological uncertainty summaries for ensembles of 2-D scalar fields."""

import json

from ._core import (
    DataError,
    FormatError,
    agreement_cells,
    feature_persistence,
    generate,
    persistence_pairs,
    quantize,
    segment,
    survival_map,
)
from . import _core

__all__ = [
    "DataError",
    "FormatError",
    "agreement_cells",
    "compute",
    "feature_persistence",
    "generate",
    "mandatory_maxima",
    "perturb",
    "persistence_pairs",
    "probabilistic_map",
    "quantize",
    "query",
    "segment",
    "survival_map",
]


def perturb(field, noise, n, seed=0):
    if not isinstance(noise, str):
        noise = json.dumps(noise)
    return _core.perturb(field, noise, n, seed)


def mandatory_maxima(members):
    return json.loads(_core.mandatory_maxima(members))


def probabilistic_map(members):
    result = _core.probabilistic_map(members)
    result["mandatory"] = json.loads(result["mandatory"])
    return result


def query(counts, n, row, col):
    return json.loads(_core.query(counts, n, row, col))


def compute(config):
    if not isinstance(config, str):
        config = json.dumps(config)
    return json.loads(_core.compute(config))

"""Cluster validity indices as objective functions over k-partitions.

The package loads benchmark datasets, treats each cluster validity index
as a maximization objective via tabu-assisted steepest-ascent hill
climbing with incremental (single-move) evaluation, and scores the optima
against expert reference partitions using the adjusted Rand index.
"""

from . import cvi, dataio, evaluation, nngraph, optim, owa, partition
from .cvi import CVISpec, make_evaluator, parse_spec
from .dataio import Dataset, ReferenceSet, load_dataset, load_labels, preprocess, save_labels
from .evaluation import adjusted_rand, best_reference_score, clamp_score
from .optim import optimise_dataset, tabu_hill_climb
from .partition import Partition, from_labels

__version__ = "0.1.0"

__all__ = [
    "CVISpec",
    "Dataset",
    "Partition",
    "ReferenceSet",
    "adjusted_rand",
    "best_reference_score",
    "clamp_score",
    "cvi",
    "dataio",
    "evaluation",
    "from_labels",
    "load_dataset",
    "load_labels",
    "make_evaluator",
    "nngraph",
    "optim",
    "optimise_dataset",
    "owa",
    "parse_spec",
    "partition",
    "preprocess",
    "save_labels",
    "tabu_hill_climb",
]

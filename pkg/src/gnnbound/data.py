"""Graph samples and datasets: validation, statistics, splitting, persistence.

A sample is one undirected simple graph (dense 0/1 adjacency, no self-loops)
with a real node-feature matrix and a binary label in {-1, +1}. Node identity
is positional: node j is row/column j of the adjacency and row j of the
feature matrix. A dataset is an ordered, immutable collection of samples
sharing one feature dimension.

Datasets persist as a single JSON document:

    {"name": ..., "feature_dim": k,
     "graphs": [{"n": ..., "edges": [[i, j], ...], "features": [[...], ...],
                 "label": -1 or 1}, ...]}

with 0-based edge pairs i < j. Floats are written with shortest round-trip
formatting, so save -> load reproduces feature values bit-identically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np


class DatasetFormatError(ValueError):
    """A dataset file could not be parsed."""


class ValidationError(ValueError):
    """Data violates a structural invariant."""


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GraphSample:
    """One undirected graph: N x N adjacency, N x k features, label in {-1,+1}."""

    adjacency: np.ndarray
    features: np.ndarray
    label: int

    def __post_init__(self):
        object.__setattr__(self, "adjacency", _frozen_array(self.adjacency))
        object.__setattr__(self, "features", _frozen_array(self.features))
        object.__setattr__(self, "label", int(self.label))
        if self.adjacency.ndim != 2 or self.adjacency.shape[0] != self.adjacency.shape[1]:
            raise ValidationError("adjacency must be a square matrix")
        if self.features.ndim != 2 or self.features.shape[0] != self.adjacency.shape[0]:
            raise ValidationError("features must have one row per node")

    @property
    def node_count(self) -> int:
        return self.adjacency.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class GraphDataset:
    """Nonempty ordered collection of samples with a common feature dimension."""

    samples: tuple[GraphSample, ...]
    feature_dim: int
    name: str

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        if not self.samples:
            raise ValidationError("dataset must contain at least one sample")
        for idx, sample in enumerate(self.samples):
            if sample.feature_dim != self.feature_dim:
                raise ValidationError(
                    f"graph {idx}: feature dimension {sample.feature_dim} "
                    f"!= dataset feature_dim {self.feature_dim}"
                )

    @classmethod
    def from_samples(cls, samples: Sequence[GraphSample], name: str) -> "GraphDataset":
        samples = tuple(samples)
        if not samples:
            raise ValidationError("dataset must contain at least one sample")
        return cls(samples=samples, feature_dim=samples[0].feature_dim, name=name)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[GraphSample]:
        return iter(self.samples)

    def __getitem__(self, idx: int) -> GraphSample:
        return self.samples[idx]


@dataclass(frozen=True)
class DatasetStats:
    """Dataset-level extrema: node count, degrees, feature-row norm."""

    n_graphs: int
    n_max: int
    d_max: int
    d_min: int
    b_f: float
    feature_dim: int


def validate_sample(sample: GraphSample) -> list[str]:
    """Return a list of invariant violations (empty means the sample is valid)."""
    violations = []
    adj = sample.adjacency
    if not np.all(np.isin(adj, (0.0, 1.0))):
        violations.append("adjacency entries must be 0 or 1")
    if np.any(np.diagonal(adj) != 0.0):
        violations.append("nonzero diagonal (self-loops are not allowed)")
    if not np.array_equal(adj, adj.T):
        violations.append("asymmetric adjacency (graphs are undirected)")
    if not np.all(np.isfinite(sample.features)):
        violations.append("non-finite feature values")
    if sample.label not in (-1, 1):
        violations.append("label must be -1 or +1")
    return violations


def require_valid(sample: GraphSample, context: str = "sample") -> None:
    """Raise ValidationError listing every violated invariant."""
    violations = validate_sample(sample)
    if violations:
        raise ValidationError(f"{context}: " + "; ".join(violations))


def degrees(sample: GraphSample) -> np.ndarray:
    """Node degrees: entry j is the row sum of adjacency row j."""
    return sample.adjacency.sum(axis=1).astype(np.int64)


def permute_sample(sample: GraphSample, perm: Sequence[int]) -> GraphSample:
    """Relabel nodes so that old node i becomes new node perm[i].

    Adjacency, features, and (trivially) the label are relabeled consistently:
    the returned sample's node perm[i] carries node i's feature row, and
    (perm[i], perm[j]) is an edge iff (i, j) was.
    """
    perm = np.asarray(perm, dtype=np.int64)
    n = sample.node_count
    if perm.shape != (n,) or not np.array_equal(np.sort(perm), np.arange(n)):
        raise ValidationError("invalid permutation: must be a bijection on node indices")
    inverse = np.empty(n, dtype=np.int64)
    inverse[perm] = np.arange(n)
    return GraphSample(
        adjacency=sample.adjacency[np.ix_(inverse, inverse)],
        features=sample.features[inverse],
        label=sample.label,
    )


def dataset_stats(dataset: GraphDataset) -> DatasetStats:
    """Exact maxima/minima over all samples and nodes."""
    n_max = 0
    d_max = 0
    d_min = None
    b_f = 0.0
    for sample in dataset:
        degs = degrees(sample)
        n_max = max(n_max, sample.node_count)
        d_max = max(d_max, int(degs.max()))
        sample_min = int(degs.min())
        d_min = sample_min if d_min is None else min(d_min, sample_min)
        b_f = max(b_f, float(np.linalg.norm(sample.features, axis=1).max()))
    return DatasetStats(
        n_graphs=len(dataset),
        n_max=n_max,
        d_max=d_max,
        d_min=d_min,
        b_f=b_f,
        feature_dim=dataset.feature_dim,
    )


def split_dataset(
    dataset: GraphDataset, beta_sup: float, seed: int
) -> tuple[GraphDataset, GraphDataset]:
    """Random train/test split: shuffle indices, take the first round(beta*n) as train.

    Deterministic given the seed. The split must leave both sides nonempty.
    """
    if not 0.0 < beta_sup < 1.0:
        raise ValueError(f"beta_sup must lie strictly between 0 and 1, got {beta_sup}")
    n = len(dataset)
    if n < 2:
        raise ValueError("need at least 2 samples to split")
    n_train = int(round(beta_sup * n))
    if n_train == 0 or n_train == n:
        raise ValueError(
            f"beta_sup={beta_sup} with {n} samples leaves an empty train or test split"
        )
    order = np.random.default_rng(seed).permutation(n)
    train = [dataset[i] for i in order[:n_train]]
    test = [dataset[i] for i in order[n_train:]]
    return (
        GraphDataset.from_samples(train, name=dataset.name),
        GraphDataset.from_samples(test, name=dataset.name),
    )


def _sample_to_record(sample: GraphSample) -> dict:
    rows, cols = np.nonzero(np.triu(sample.adjacency, k=1))
    return {
        "n": sample.node_count,
        "edges": [[int(i), int(j)] for i, j in zip(rows, cols)],
        "features": sample.features.tolist(),
        "label": sample.label,
    }


def save_dataset(dataset: GraphDataset, path) -> None:
    """Write the dataset as a single JSON document."""
    document = {
        "name": dataset.name,
        "feature_dim": dataset.feature_dim,
        "graphs": [_sample_to_record(sample) for sample in dataset],
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(document, handle)
        handle.write("\n")


def _record_to_sample(record: dict, feature_dim: int, context: str) -> GraphSample:
    for key in ("n", "edges", "features", "label"):
        if key not in record:
            raise DatasetFormatError(f"{context}: missing field '{key}'")
    n = record["n"]
    if not isinstance(n, int) or n < 1:
        raise DatasetFormatError(f"{context}: 'n' must be a positive integer")
    features = np.asarray(record["features"], dtype=np.float64)
    if features.ndim != 2 or features.shape != (n, feature_dim):
        raise DatasetFormatError(
            f"{context}: features must be {n} rows of {feature_dim} reals"
        )
    adjacency = np.zeros((n, n), dtype=np.float64)
    seen = set()
    for pair in record["edges"]:
        if not (isinstance(pair, list) and len(pair) == 2):
            raise DatasetFormatError(f"{context}: edge entries must be [i, j] pairs")
        i, j = pair
        if not (isinstance(i, int) and isinstance(j, int) and 0 <= i < j < n):
            raise DatasetFormatError(
                f"{context}: edge [{i}, {j}] must satisfy 0 <= i < j < n={n}"
            )
        if (i, j) in seen:
            raise DatasetFormatError(f"{context}: duplicate edge [{i}, {j}]")
        seen.add((i, j))
        adjacency[i, j] = 1.0
        adjacency[j, i] = 1.0
    label = record["label"]
    if not isinstance(label, int) or label not in (-1, 1):
        raise ValidationError(f"{context}: label must be -1 or +1, got {label!r}")
    sample = GraphSample(adjacency=adjacency, features=features, label=label)
    require_valid(sample, context)
    return sample


def load_dataset(path) -> GraphDataset:
    """Read a dataset document, validating structure and sample invariants."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            document = json.load(handle)
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(document, dict):
        raise DatasetFormatError(f"{path}: top level must be an object")
    for key in ("name", "feature_dim", "graphs"):
        if key not in document:
            raise DatasetFormatError(f"{path}: missing top-level field '{key}'")
    feature_dim = document["feature_dim"]
    if not isinstance(feature_dim, int) or feature_dim < 1:
        raise DatasetFormatError(f"{path}: 'feature_dim' must be a positive integer")
    graphs = document["graphs"]
    if not isinstance(graphs, list) or not graphs:
        raise DatasetFormatError(f"{path}: 'graphs' must be a nonempty list")
    samples = [
        _record_to_sample(record, feature_dim, f"{path}: graph {idx}")
        for idx, record in enumerate(graphs)
    ]
    return GraphDataset(samples=tuple(samples), feature_dim=feature_dim, name=str(document["name"]))

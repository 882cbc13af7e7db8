"""One-hidden-layer GCN and MPGNN forward evaluation.

Both models keep their h hidden units as rows of parameter matrices — the
model is the empirical average over units, so unit order never matters.

Per node j of a graph with filter matrix G = G(A) and features F:

    GCN unit i:    w2[i] * phi( (G[j,:] F) . w1[i,:] )
    MPGNN unit i:  w2[i] * kappa( F[j,:] . w3[i,:] + rho(G[j,:] zeta(F)) . w1[i,:] )

with zeta and rho applied entrywise. The model output is

    yhat = psi( sum_j (1/h) sum_i unit(i, j) )

where the readout psi is x/N (mean) or x (sum).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .data import GraphSample
from .filters import FilterKind, apply_filter


class ModelKind(enum.Enum):
    GCN = "gcn"
    MPGNN = "mpgnn"


class Readout(enum.Enum):
    MEAN = "mean"
    SUM = "sum"


class Nonlinearity(enum.Enum):
    """Zero-centered nonlinearities (f(0) = 0, so zero inputs give zero outputs).

    The centered sigmoid is sigma(x) - 1/2; a plain sigmoid is deliberately
    not offered because it is not zero-centered.
    """

    TANH = "tanh"
    SIGMOID_CENTERED = "sigmoid-centered"
    IDENTITY = "identity"

    def apply(self, x: np.ndarray) -> np.ndarray:
        if self is Nonlinearity.TANH:
            return np.tanh(x)
        if self is Nonlinearity.SIGMOID_CENTERED:
            return 0.5 * np.tanh(0.5 * x)
        return np.asarray(x, dtype=np.float64)

    def derivative(self, x: np.ndarray) -> np.ndarray:
        if self is Nonlinearity.TANH:
            t = np.tanh(x)
            return 1.0 - t * t
        if self is Nonlinearity.SIGMOID_CENTERED:
            t = np.tanh(0.5 * x)
            return 0.25 * (1.0 - t * t)
        return np.ones_like(np.asarray(x, dtype=np.float64))

    @property
    def lipschitz(self) -> float:
        return 0.25 if self is Nonlinearity.SIGMOID_CENTERED else 1.0

    @property
    def cap(self) -> float | None:
        """Supremum of |f|, or None when unbounded."""
        if self is Nonlinearity.TANH:
            return 1.0
        if self is Nonlinearity.SIGMOID_CENTERED:
            return 0.5
        return None


@dataclass(frozen=True)
class ModelConfig:
    """Model family, graph filter, width, readout, and nonlinearities."""

    model_kind: ModelKind
    filter_kind: FilterKind
    width: int
    readout: Readout = Readout.MEAN
    activation: Nonlinearity = Nonlinearity.TANH
    zeta: Nonlinearity = Nonlinearity.TANH
    rho: Nonlinearity = Nonlinearity.TANH
    kappa: Nonlinearity = Nonlinearity.TANH

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("width must be >= 1")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GcnParams:
    """h unit rows: w1 is h x k, w2 is an h-vector."""

    w1: np.ndarray
    w2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "w1", _frozen(self.w1))
        object.__setattr__(self, "w2", _frozen(self.w2))
        if self.w1.ndim != 2 or self.w2.ndim != 1 or self.w1.shape[0] != self.w2.shape[0]:
            raise ValueError("w1 must be h x k and w2 an h-vector")

    @property
    def width(self) -> int:
        return self.w2.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.w1.shape[1]


@dataclass(frozen=True)
class MpgnnParams:
    """h unit rows: w1 and w3 are h x k, w2 is an h-vector."""

    w1: np.ndarray
    w2: np.ndarray
    w3: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "w1", _frozen(self.w1))
        object.__setattr__(self, "w2", _frozen(self.w2))
        object.__setattr__(self, "w3", _frozen(self.w3))
        if (
            self.w1.ndim != 2
            or self.w3.shape != self.w1.shape
            or self.w2.ndim != 1
            or self.w1.shape[0] != self.w2.shape[0]
        ):
            raise ValueError("w1/w3 must be h x k and w2 an h-vector")

    @property
    def width(self) -> int:
        return self.w2.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.w1.shape[1]


Params = GcnParams | MpgnnParams


def init_params(config: ModelConfig, feature_dim: int, seed: int) -> Params:
    """Fan-scaled Gaussian initialization, deterministic given the seed.

    Entries are zero-mean normals with variance 1/k for the input-side rows
    (w1, w3) and 1/h for the output weights (w2). The scaling keeps unit
    outputs and the extracted weight statistics O(1) at every width, so
    bound magnitudes are comparable across the width sweep.
    """
    if feature_dim < 1:
        raise ValueError("feature_dim must be >= 1")
    rng = np.random.default_rng(seed)
    h, k = config.width, feature_dim
    w1 = rng.standard_normal((h, k)) / np.sqrt(k)
    w2 = rng.standard_normal(h) / np.sqrt(h)
    if config.model_kind is ModelKind.GCN:
        return GcnParams(w1=w1, w2=w2)
    w3 = rng.standard_normal((h, k)) / np.sqrt(k)
    return MpgnnParams(w1=w1, w2=w2, w3=w3)


def gcn_unit_output(
    w1_row: np.ndarray,
    w2_scalar: float,
    filtered_row: np.ndarray,
    activation: Nonlinearity = Nonlinearity.TANH,
) -> float:
    """w2 * phi(filtered_row . w1) for one unit at one node."""
    return float(w2_scalar * activation.apply(float(np.dot(filtered_row, w1_row))))


def mpgnn_unit_output(
    w1_row: np.ndarray,
    w2_scalar: float,
    w3_row: np.ndarray,
    feature_row: np.ndarray,
    aggregated_row: np.ndarray,
    rho: Nonlinearity = Nonlinearity.TANH,
    kappa: Nonlinearity = Nonlinearity.TANH,
) -> float:
    """w2 * kappa(feature_row . w3 + rho(aggregated_row) . w1) for one unit.

    aggregated_row is the precomputed G(A)[j,:] zeta(F) vector; rho is applied
    entrywise here.
    """
    inner = float(np.dot(feature_row, w3_row)) + float(np.dot(rho.apply(aggregated_row), w1_row))
    return float(w2_scalar * kappa.apply(inner))


@dataclass(frozen=True)
class PreparedGraph:
    """Per-node input rows for fast forward/backward passes.

    GCN uses a single matrix (the filtered features G F); MPGNN uses the raw
    features plus rho(G zeta(F)). Neither depends on trainable parameters, so
    they are computed once per (sample, config).
    """

    node_count: int
    label: int
    rows_a: np.ndarray
    rows_b: np.ndarray | None


def prepare_sample(sample: GraphSample, config: ModelConfig) -> PreparedGraph:
    filtered = apply_filter(config.filter_kind, sample)
    if config.model_kind is ModelKind.GCN:
        return PreparedGraph(
            node_count=sample.node_count,
            label=sample.label,
            rows_a=filtered @ sample.features,
            rows_b=None,
        )
    aggregated = config.rho.apply(filtered @ config.zeta.apply(sample.features))
    return PreparedGraph(
        node_count=sample.node_count,
        label=sample.label,
        rows_a=np.array(sample.features),
        rows_b=aggregated,
    )


def unit_preactivations(params: Params, prepared: PreparedGraph) -> np.ndarray:
    """N x h matrix of per-node, per-unit arguments to the outer nonlinearity."""
    if isinstance(params, GcnParams):
        return prepared.rows_a @ params.w1.T
    return prepared.rows_a @ params.w3.T + prepared.rows_b @ params.w1.T


def _outer_nonlinearity(params: Params, config: ModelConfig) -> Nonlinearity:
    return config.activation if isinstance(params, GcnParams) else config.kappa


def forward_prepared(params: Params, prepared: PreparedGraph, config: ModelConfig) -> float:
    """Model output for one prepared graph."""
    z = unit_preactivations(params, prepared)
    node_values = _outer_nonlinearity(params, config).apply(z) @ params.w2 / params.width
    total = float(node_values.sum())
    if config.readout is Readout.MEAN:
        return total / prepared.node_count
    return total


def check_shapes(params: Params, feature_dim: int, config: ModelConfig) -> None:
    expected = GcnParams if config.model_kind is ModelKind.GCN else MpgnnParams
    if not isinstance(params, expected):
        raise ValueError(
            f"parameter container {type(params).__name__} does not match "
            f"model kind {config.model_kind.value}"
        )
    if params.feature_dim != feature_dim:
        raise ValueError(
            f"params expect feature_dim {params.feature_dim}, data has {feature_dim}"
        )
    if params.width != config.width:
        raise ValueError(f"params have width {params.width}, config says {config.width}")


def forward_graph(params: Params, sample: GraphSample, config: ModelConfig) -> float:
    """Model output yhat for one sample (filter applied once per call)."""
    check_shapes(params, sample.feature_dim, config)
    return forward_prepared(params, prepare_sample(sample, config), config)


def save_params(params: Params, path) -> None:
    """Write parameters as a JSON document (exact float round-trip)."""
    record: dict = {"w1": params.w1.tolist(), "w2": params.w2.tolist()}
    if isinstance(params, MpgnnParams):
        record["model"] = ModelKind.MPGNN.value
        record["w3"] = params.w3.tolist()
    else:
        record["model"] = ModelKind.GCN.value
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(record, handle)
        handle.write("\n")


def load_params(path) -> Params:
    with open(path, "r", encoding="utf-8") as handle:
        record = json.load(handle)
    try:
        kind = ModelKind(record["model"])
        if kind is ModelKind.GCN:
            return GcnParams(w1=record["w1"], w2=record["w2"])
        return MpgnnParams(w1=record["w1"], w2=record["w2"], w3=record["w3"])
    except (KeyError, ValueError, TypeError) as exc:
        raise ValueError(f"{path}: not a valid parameter file: {exc}") from exc

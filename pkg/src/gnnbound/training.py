"""Logistic-loss risks, analytic gradients, momentum SGD, and the train loop.

The regularized objective for a parameter container with h unit rows is

    regularized_risk = (1/n) sum_q log(1 + exp(-y_q yhat_q))
                       + (1/(h alpha)) sum_i ||W[i,:]||^2 / 2

where W[i,:] stacks every weight belonging to unit i (GCN: (w1[i], w2[i]);
MPGNN: (w1[i], w2[i], w3[i])). Gradients are hand-derived backpropagation
through the one-hidden-layer forward pass — no automatic differentiation —
and are checked against central finite differences in the test suite.

SGD uses classical momentum: v <- momentum*v + g; p <- p - lr*v, with g the
gradient of the regularized objective (so L2 weight decay 1/(h alpha) is part
of g). Minibatch indices are reshuffled every epoch from the run PRNG.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import GraphDataset, GraphSample
from .models import (
    GcnParams,
    ModelConfig,
    Params,
    PreparedGraph,
    Readout,
    check_shapes,
    prepare_sample,
    unit_preactivations,
)


class TrainingDivergenceError(RuntimeError):
    """Training hit a non-finite loss; results would be meaningless."""


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.005
    momentum: float = 0.9
    alpha: float = 100.0
    batch_size: int = 128
    epochs: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must lie in [0, 1)")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")


@dataclass(frozen=True)
class RunResult:
    """Risks of one trained model, measured with the unregularized loss."""

    train_risk: float
    test_risk: float
    abs_gen_error: float
    loss_history: tuple[float, ...]
    width: int
    seed: int | None


def logistic_loss(yhat, y):
    """log(1 + exp(-y*yhat)), overflow-safe via log1p(exp(-|z|)) + max(-z, 0)."""
    z = np.asarray(y, dtype=np.float64) * np.asarray(yhat, dtype=np.float64)
    return np.log1p(np.exp(-np.abs(z))) + np.maximum(-z, 0.0)


def logistic_loss_grad(yhat, y):
    """d loss / d yhat = -y / (1 + exp(y*yhat)); magnitude is always <= 1."""
    y = np.asarray(y, dtype=np.float64)
    z = y * np.asarray(yhat, dtype=np.float64)
    # 1/(1+exp(z)) written through tanh to stay finite for any z.
    return -y * 0.5 * (1.0 - np.tanh(0.5 * z))


def _param_names(params: Params) -> list[str]:
    return [f.name for f in dataclasses.fields(params)]


def _combine(a: Params, b: Params, fn) -> Params:
    return dataclasses.replace(
        a, **{name: fn(getattr(a, name), getattr(b, name)) for name in _param_names(a)}
    )


def zeros_like_params(params: Params) -> Params:
    return dataclasses.replace(
        params, **{name: np.zeros_like(getattr(params, name)) for name in _param_names(params)}
    )


def penalty(params: Params, alpha: float) -> float:
    """(1/(h alpha)) * sum over unit rows of half the squared row norm."""
    total = sum(float((getattr(params, name) ** 2).sum()) for name in _param_names(params))
    return total / (2.0 * params.width * alpha)


def penalty_grads(params: Params, alpha: float) -> Params:
    divisor = params.width * alpha
    return dataclasses.replace(
        params, **{name: getattr(params, name) / divisor for name in _param_names(params)}
    )


@dataclass(frozen=True)
class _Stacked:
    """All node rows of a set of prepared graphs, concatenated."""

    rows_a: np.ndarray
    rows_b: np.ndarray | None
    labels: np.ndarray
    node_counts: np.ndarray
    starts: np.ndarray


def _stack(prepared: Sequence[PreparedGraph]) -> _Stacked:
    counts = np.array([p.node_count for p in prepared], dtype=np.int64)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    rows_a = np.concatenate([p.rows_a for p in prepared])
    rows_b = None
    if prepared[0].rows_b is not None:
        rows_b = np.concatenate([p.rows_b for p in prepared])
    labels = np.array([p.label for p in prepared], dtype=np.float64)
    return _Stacked(rows_a=rows_a, rows_b=rows_b, labels=labels, node_counts=counts, starts=starts)


def _readout_scale(stacked: _Stacked, config: ModelConfig) -> np.ndarray:
    if config.readout is Readout.MEAN:
        return 1.0 / stacked.node_counts
    return np.ones(len(stacked.node_counts))


def _forward_stacked(params: Params, stacked: _Stacked, config: ModelConfig) -> np.ndarray:
    prep = PreparedGraph(node_count=0, label=0, rows_a=stacked.rows_a, rows_b=stacked.rows_b)
    z = unit_preactivations(params, prep)
    outer = config.activation if isinstance(params, GcnParams) else config.kappa
    node_values = outer.apply(z) @ params.w2 / params.width
    sums = np.add.reduceat(node_values, stacked.starts)
    return sums * _readout_scale(stacked, config)


def _risk_and_loss_grads(
    params: Params, stacked: _Stacked, config: ModelConfig
) -> tuple[float, Params]:
    """Batch-average empirical risk and its gradient (no penalty term)."""
    prep = PreparedGraph(node_count=0, label=0, rows_a=stacked.rows_a, rows_b=stacked.rows_b)
    z = unit_preactivations(params, prep)
    outer = config.activation if isinstance(params, GcnParams) else config.kappa
    fz = outer.apply(z)
    h = params.width
    node_values = fz @ params.w2 / h
    sums = np.add.reduceat(node_values, stacked.starts)
    scale = _readout_scale(stacked, config)
    yhat = sums * scale
    n_batch = len(stacked.labels)
    risk = float(logistic_loss(yhat, stacked.labels).mean())

    per_graph = logistic_loss_grad(yhat, stacked.labels) * scale / n_batch
    per_node = np.repeat(per_graph, stacked.node_counts)
    grad_w2 = fz.T @ per_node / h
    back = outer.derivative(z) * (per_node[:, None] * params.w2[None, :])
    if isinstance(params, GcnParams):
        grad_w1 = back.T @ stacked.rows_a / h
        return risk, GcnParams(w1=grad_w1, w2=grad_w2)
    grad_w3 = back.T @ stacked.rows_a / h
    grad_w1 = back.T @ stacked.rows_b / h
    return risk, dataclasses.replace(params, w1=grad_w1, w2=grad_w2, w3=grad_w3)


def _prepare_all(samples: Sequence[GraphSample], config: ModelConfig) -> list[PreparedGraph]:
    return [prepare_sample(sample, config) for sample in samples]


def empirical_risk(params: Params, samples, model_config: ModelConfig) -> float:
    """Mean logistic loss of the model over the samples (no penalty)."""
    samples = list(samples)
    if not samples:
        raise ValueError("empirical_risk needs at least one sample")
    check_shapes(params, samples[0].feature_dim, model_config)
    stacked = _stack(_prepare_all(samples, model_config))
    yhat = _forward_stacked(params, stacked, model_config)
    return float(logistic_loss(yhat, stacked.labels).mean())


def regularized_risk(params: Params, samples, model_config: ModelConfig, alpha: float) -> float:
    """empirical_risk plus the 1/(h alpha) L2 penalty over unit rows."""
    return empirical_risk(params, samples, model_config) + penalty(params, alpha)


def grad_empirical_risk(params: Params, batch, model_config: ModelConfig) -> Params:
    """Analytic gradient of the batch-average logistic loss."""
    batch = list(batch)
    if not batch:
        raise ValueError("gradient needs a nonempty batch")
    check_shapes(params, batch[0].feature_dim, model_config)
    stacked = _stack(_prepare_all(batch, model_config))
    _, grads = _risk_and_loss_grads(params, stacked, model_config)
    return grads


def grad_regularized_risk(
    params: Params, batch, model_config: ModelConfig, alpha: float
) -> Params:
    """Analytic gradient of the regularized objective on the batch average."""
    loss_grads = grad_empirical_risk(params, batch, model_config)
    return _combine(loss_grads, penalty_grads(params, alpha), np.add)


def sgd_step(
    params: Params, grads: Params, velocity: Params, config: TrainConfig
) -> tuple[Params, Params]:
    """Classical momentum update; returns the new (params, velocity)."""
    new_velocity = _combine(velocity, grads, lambda v, g: config.momentum * v + g)
    new_params = _combine(params, new_velocity, lambda p, v: p - config.learning_rate * v)
    return new_params, new_velocity


def train(
    params: Params,
    train_set: GraphDataset | Sequence[GraphSample],
    config: TrainConfig,
    model_config: ModelConfig,
) -> tuple[Params, list[float]]:
    """Momentum SGD over shuffled minibatches; deterministic given config.seed.

    Returns the final parameters and the per-epoch training risk (the
    graph-count-weighted mean of minibatch losses seen during that epoch).
    Aborts with TrainingDivergenceError the moment a batch loss is not finite.
    """
    samples = list(train_set)
    if not samples:
        raise ValueError("training set is empty")
    check_shapes(params, samples[0].feature_dim, model_config)
    prepared = _prepare_all(samples, model_config)
    n = len(prepared)
    rng = np.random.default_rng(config.seed)
    velocity = zeros_like_params(params)
    history: list[float] = []
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            chosen = order[start : start + config.batch_size]
            stacked = _stack([prepared[i] for i in chosen])
            # Float overflow on a diverging run is reported via the explicit
            # non-finite check below, not as numpy warnings.
            with np.errstate(over="ignore", invalid="ignore"):
                risk, loss_grads = _risk_and_loss_grads(params, stacked, model_config)
                if not np.isfinite(risk):
                    raise TrainingDivergenceError(
                        f"non-finite loss {risk!r} at epoch {epoch}, batch starting "
                        f"{start} (width {params.width}, lr {config.learning_rate})"
                    )
                grads = _combine(loss_grads, penalty_grads(params, config.alpha), np.add)
                params, velocity = sgd_step(params, grads, velocity, config)
            epoch_loss += risk * len(chosen)
        history.append(epoch_loss / n)
    return params, history


def measure_generalization(
    params: Params,
    train_set,
    test_set,
    model_config: ModelConfig,
    loss_history: Sequence[float] = (),
    seed: int | None = None,
) -> RunResult:
    """Unregularized train/test risks and their absolute gap."""
    train_risk = empirical_risk(params, train_set, model_config)
    test_risk = empirical_risk(params, test_set, model_config)
    return RunResult(
        train_risk=train_risk,
        test_risk=test_risk,
        abs_gen_error=abs(test_risk - train_risk),
        loss_history=tuple(loss_history),
        width=params.width,
        seed=seed,
    )

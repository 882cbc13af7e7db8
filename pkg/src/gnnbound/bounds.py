"""Closed-form generalization bounds for the one-hidden-layer graph models.

Two families are implemented, both computable from a trained parameter
container plus a handful of dataset/filter statistics:

* Functional-derivative bounds: O(alpha * C^2 / n) where C collects the
  Lipschitz chain through the network (readout, outer nonlinearity, filter
  norm cap g_max, feature norm cap, and the trained weight norms).
* A Rademacher-complexity bound: 4t*sqrt(t*alpha/n) + 3*M_ell*sqrt(log(2/delta)/(2n))
  with t the uniform cap on |loss'| * |model output| along the same chain.

Weight norms enter as the maximum unit-row norm (for w1, w3) and the maximum
absolute entry (for w2). When the outer nonlinearity is bounded (tanh,
centered sigmoid), the per-unit cap min(bound, Lipschitz-chain product) is
used; setting bounded_activation=False keeps the pure Lipschitz product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .models import ModelConfig, MpgnnParams, Params, Readout

DEFAULT_DELTA = 0.05
# The logistic loss has |d loss / d yhat| <= 1 everywhere.
LOGISTIC_GRAD_CAP = 1.0


@dataclass(frozen=True)
class ModelStats:
    """Trained-weight norms the bounds consume."""

    w1_row_norm_max: float
    w2_abs_max: float
    w3_row_norm_max: float | None

    def to_dict(self) -> dict:
        return {
            "w1_row_norm_max": self.w1_row_norm_max,
            "w2_abs_max": self.w2_abs_max,
            "w3_row_norm_max": self.w3_row_norm_max,
        }


@dataclass(frozen=True)
class BoundInputs:
    """Dataset- and training-level quantities shared by every bound."""

    n_train: int
    alpha: float
    n_max: int
    b_f: float
    g_max: float
    readout: Readout
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        if self.n_train < 1:
            raise ValueError("n_train must be >= 1")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if self.b_f <= 0:
            raise ValueError("b_f must be positive")
        if self.g_max <= 0:
            raise ValueError("g_max must be positive")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")

    @property
    def readout_node_factor(self) -> float:
        """The product (readout Lipschitz constant) * N_max.

        Mean readout divides the node sum by the graph size, so the product
        is exactly 1 and mean-readout bounds are independent of N_max; sum
        readout leaves the node sum unscaled, so the product is N_max.
        """
        if self.readout is Readout.MEAN:
            return 1.0
        return float(self.n_max)

    def to_dict(self) -> dict:
        return {
            "n_train": self.n_train,
            "alpha": self.alpha,
            "n_max": self.n_max,
            "b_f": self.b_f,
            "g_max": self.g_max,
            "readout": self.readout.value,
            "delta": self.delta,
        }


def extract_model_stats(params: Params) -> ModelStats:
    w1_norms = np.linalg.norm(params.w1, axis=1)
    stats = ModelStats(
        w1_row_norm_max=float(w1_norms.max()),
        w2_abs_max=float(np.abs(params.w2).max()),
        w3_row_norm_max=None,
    )
    if isinstance(params, MpgnnParams):
        w3_norms = np.linalg.norm(params.w3, axis=1)
        stats = ModelStats(
            w1_row_norm_max=stats.w1_row_norm_max,
            w2_abs_max=stats.w2_abs_max,
            w3_row_norm_max=float(w3_norms.max()),
        )
    return stats


def max_logistic_loss(output_bound: float) -> float:
    """Largest logistic loss reachable when |yhat| <= output_bound.

    The loss log(1+exp(-y*yhat)) over y in {-1,+1} and |yhat| <= B is
    maximised at yhat = -y*B, giving log(1+exp(B)).
    """
    if output_bound < 0:
        raise ValueError("output_bound must be >= 0")
    # Stable softplus: log(1+exp(B)) = B + log(1+exp(-B)) avoids overflow for
    # large caps (e.g. when reporting bounds for a nearly-diverged model).
    return output_bound + math.log1p(math.exp(-output_bound))


def _unit_cap(config: ModelConfig, stats: ModelStats, inputs: BoundInputs, bounded: bool) -> float:
    """Cap on one hidden unit's pre-w2 output |f(z)|, via the Lipschitz chain
    through the filtered features (and optionally the nonlinearity's range)."""
    if config.model_kind.value == "gcn":
        chain = config.activation.lipschitz * stats.w1_row_norm_max * inputs.g_max * inputs.b_f
        cap = config.activation.cap
    else:
        aggregated = inputs.g_max * config.rho.lipschitz * config.zeta.lipschitz * stats.w1_row_norm_max
        core = stats.w3_row_norm_max + aggregated
        chain = config.kappa.lipschitz * inputs.b_f * core
        cap = config.kappa.cap
    if bounded and cap is not None:
        return min(cap, chain)
    return chain


def model_output_cap(
    config: ModelConfig, stats: ModelStats, inputs: BoundInputs, bounded: bool = True
) -> float:
    """Uniform cap on |yhat| over graphs with at most n_max nodes."""
    per_unit = stats.w2_abs_max * _unit_cap(config, stats, inputs, bounded)
    return per_unit * inputs.readout_node_factor


def generic_fd_bound(m_phi: float, inputs: BoundInputs) -> float:
    """alpha * (|loss'| cap * per-unit output cap * readout node factor)^2 / n."""
    scaled = LOGISTIC_GRAD_CAP * m_phi * inputs.readout_node_factor
    return inputs.alpha * scaled * scaled / inputs.n_train


def gcn_fd_bound(
    config: ModelConfig,
    stats: ModelStats,
    inputs: BoundInputs,
    bounded_activation: bool = True,
) -> float:
    """Functional-derivative bound specialised to the GCN unit structure."""
    m_phi = stats.w2_abs_max * _unit_cap(config, stats, inputs, bounded_activation)
    return generic_fd_bound(m_phi, inputs)


def mpgnn_fd_bound(
    config: ModelConfig,
    stats: ModelStats,
    inputs: BoundInputs,
    bounded_kappa: bool = True,
) -> float:
    """Functional-derivative bound specialised to the MPGNN unit structure."""
    if stats.w3_row_norm_max is None:
        raise ValueError("MPGNN bound needs w3 statistics")
    m_phi = stats.w2_abs_max * _unit_cap(config, stats, inputs, bounded_kappa)
    return generic_fd_bound(m_phi, inputs)


def fd_bound(
    config: ModelConfig, stats: ModelStats, inputs: BoundInputs, bounded: bool = True
) -> float:
    if config.model_kind.value == "gcn":
        return gcn_fd_bound(config, stats, inputs, bounded_activation=bounded)
    return mpgnn_fd_bound(config, stats, inputs, bounded_kappa=bounded)


def rademacher_terms(
    config: ModelConfig, stats: ModelStats, inputs: BoundInputs, bounded: bool = True
) -> tuple[float, float]:
    """(complexity term, confidence term) of the Rademacher bound.

    t = |loss'| cap times the model-output cap; the first term is
    4*t*sqrt(t*alpha/n), the second 3*M_ell*sqrt(log(2/delta)/(2n)) with
    M_ell the loss value at the output cap.
    """
    out_cap = model_output_cap(config, stats, inputs, bounded)
    t = LOGISTIC_GRAD_CAP * out_cap
    complexity = 4.0 * t * math.sqrt(t * inputs.alpha / inputs.n_train)
    m_ell = max_logistic_loss(out_cap)
    confidence = 3.0 * m_ell * math.sqrt(math.log(2.0 / inputs.delta) / (2.0 * inputs.n_train))
    return complexity, confidence


def rademacher_bound(
    config: ModelConfig, stats: ModelStats, inputs: BoundInputs, bounded: bool = True
) -> float:
    complexity, confidence = rademacher_terms(config, stats, inputs, bounded)
    return complexity + confidence


@dataclass(frozen=True)
class BoundReport:
    """Both bounds for one trained model, with the quantities that built them.

    variant names the formula route taken, e.g. "gcn-bounded-mean": the model
    family, whether the bounded-nonlinearity cap was available, and the
    readout. The report recomputes exactly from the echoed stats and inputs.
    """

    fd_bound: float
    rademacher_bound: float
    rademacher_complexity_term: float
    rademacher_confidence_term: float
    model_output_cap: float
    variant: str
    stats: ModelStats
    inputs: BoundInputs

    def to_dict(self) -> dict:
        return {
            "fd_bound": self.fd_bound,
            "rademacher_bound": self.rademacher_bound,
            "rademacher_complexity_term": self.rademacher_complexity_term,
            "rademacher_confidence_term": self.rademacher_confidence_term,
            "model_output_cap": self.model_output_cap,
            "variant": self.variant,
            "stats": self.stats.to_dict(),
            "inputs": self.inputs.to_dict(),
        }


def bound_report(
    params: Params, config: ModelConfig, inputs: BoundInputs, bounded: bool = True
) -> BoundReport:
    stats = extract_model_stats(params)
    complexity, confidence = rademacher_terms(config, stats, inputs, bounded)
    form = "bounded" if bounded else "lipschitz"
    return BoundReport(
        fd_bound=fd_bound(config, stats, inputs, bounded),
        rademacher_bound=complexity + confidence,
        rademacher_complexity_term=complexity,
        rademacher_confidence_term=confidence,
        model_output_cap=model_output_cap(config, stats, inputs, bounded),
        variant=f"{config.model_kind.value}-{form}-{inputs.readout.value}",
        stats=stats,
        inputs=inputs,
    )

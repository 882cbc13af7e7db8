"""Experiment sweeps: width x seed x model x filter x readout training runs.

Every coordinate runs the full pipeline — split, init, train, measure the
train/test risk gap, evaluate both generalization bounds — and yields one
result row. Rows are emitted in canonical lexicographic order over
(dataset, beta, model, filter, readout, width, seed).

Reproducibility contract: the three PRNG streams a run needs (split, init,
minibatch shuffling) are derived from the coordinate values alone, never from
iteration order. A sweep over k seeds therefore produces exactly the union of
the k single-seed sweeps, and parallel execution yields the same rows as
sequential (only wall_time_s, a measurement, varies).
"""

from __future__ import annotations

import dataclasses
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .bounds import DEFAULT_DELTA, BoundInputs, BoundReport, bound_report
from .data import GraphDataset, dataset_stats, load_dataset, split_dataset
from .filters import FilterKind, FilterNormReport, filter_norm_report
from .models import ModelConfig, ModelKind, Readout, init_params
from .synth import PRESET_NAMES, make_dataset, preset_config
from .training import (
    TrainConfig,
    TrainingDivergenceError,
    measure_generalization,
    train,
)

DEFAULT_BETAS = (0.7, 0.9)
DEFAULT_WIDTHS = (4, 8, 16, 32, 64, 128, 256)
DEFAULT_SEEDS = tuple(range(10))


@dataclass(frozen=True)
class SweepConfig:
    """Everything a sweep needs: data source, grid, training, bound settings.

    dataset is a preset name (sbm1 sbm2 sbm3 er4 er5) or a path to a dataset
    JSON file. data_seed / n_graphs / feature_dim only matter for presets.
    The train config's own seed field is ignored; each run derives its
    shuffle seed from the sweep coordinate.
    """

    dataset: str
    betas: tuple[float, ...] = DEFAULT_BETAS
    widths: tuple[int, ...] = DEFAULT_WIDTHS
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    models: tuple[ModelKind, ...] = (ModelKind.GCN,)
    filters: tuple[FilterKind, ...] = (FilterKind.SYM_NORM,)
    readouts: tuple[Readout, ...] = (Readout.MEAN,)
    train: TrainConfig = field(default_factory=TrainConfig)
    delta: float = DEFAULT_DELTA
    bounded_nonlinearity: bool = True
    data_seed: int = 0
    n_graphs: int = 200
    feature_dim: int = 16
    workers: int = 1

    def __post_init__(self):
        for name in ("betas", "widths", "seeds", "models", "filters", "readouts"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be nonempty")
        if any(w < 1 for w in self.widths):
            raise ValueError("widths must be >= 1")
        if any(not 0.0 < b < 1.0 for b in self.betas):
            raise ValueError("betas must lie strictly between 0 and 1")
        if self.n_graphs < 2:
            raise ValueError("n_graphs must be >= 2 (the split needs both sides)")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "betas": list(self.betas),
            "widths": list(self.widths),
            "seeds": list(self.seeds),
            "models": [m.value for m in self.models],
            "filters": [f.value for f in self.filters],
            "readouts": [r.value for r in self.readouts],
            "train": dataclasses.asdict(self.train),
            "delta": self.delta,
            "bounded_nonlinearity": self.bounded_nonlinearity,
            "data_seed": self.data_seed,
            "n_graphs": self.n_graphs,
            "feature_dim": self.feature_dim,
            "workers": self.workers,
        }


@dataclass(frozen=True)
class SweepRow:
    """One completed run. Field order up to wall_time_s is the CSV column order.

    bounds carries the full bound report for the JSON echo; it is None for
    rows parsed back from CSV and for diverged runs (whose metrics are NaN).
    """

    dataset: str
    beta: float
    model: str
    filter: str
    readout: str
    width: int
    seed: int
    train_risk: float
    test_risk: float
    abs_gen_error: float
    fd_bound: float
    rademacher_bound: float
    wall_time_s: float
    bounds: BoundReport | None = None

    @property
    def coordinate(self) -> tuple:
        return (self.dataset, self.beta, self.model, self.filter, self.readout, self.width, self.seed)

    @property
    def diverged(self) -> bool:
        return not np.isfinite(self.train_risk)


def resolve_dataset(
    source: str, data_seed: int = 0, n_graphs: int = 200, feature_dim: int = 16
) -> GraphDataset:
    """Preset name -> freshly generated dataset; anything else -> JSON file."""
    if source in PRESET_NAMES:
        config = preset_config(source, seed=data_seed, n_graphs=n_graphs, feature_dim=feature_dim)
        return make_dataset(config)
    return load_dataset(source)


def coordinate_seeds(
    dataset_name: str,
    beta: float,
    model: ModelKind,
    filter_kind: FilterKind,
    readout: Readout,
    width: int,
    seed: int,
) -> tuple[int, int, int]:
    """Derive the (split, init, shuffle) seeds for one sweep coordinate.

    Deterministic in the coordinate values only, so identical coordinates get
    identical runs no matter which sweep they appear in.
    """
    entropy = [
        int(seed),
        int(width),
        int(round(beta * 1_000_000)),
        list(ModelKind).index(model),
        list(FilterKind).index(filter_kind),
        list(Readout).index(readout),
        zlib.crc32(dataset_name.encode("utf-8")),
    ]
    state = np.random.SeedSequence(entropy).generate_state(3)
    return int(state[0]), int(state[1]), int(state[2])


def _run_coordinate(
    dataset: GraphDataset,
    stats,
    filter_report: FilterNormReport,
    coord: tuple,
    config: SweepConfig,
) -> SweepRow:
    beta, model_kind, filter_kind, readout, width, seed = coord
    started = time.perf_counter()
    split_seed, init_seed, shuffle_seed = coordinate_seeds(
        dataset.name, beta, model_kind, filter_kind, readout, width, seed
    )
    train_set, test_set = split_dataset(dataset, beta, split_seed)
    model_config = ModelConfig(
        model_kind=model_kind, filter_kind=filter_kind, width=width, readout=readout
    )
    params = init_params(model_config, dataset.feature_dim, init_seed)
    train_config = dataclasses.replace(config.train, seed=shuffle_seed)
    common = {
        "dataset": dataset.name,
        "beta": beta,
        "model": model_kind.value,
        "filter": filter_kind.value,
        "readout": readout.value,
        "width": width,
        "seed": seed,
    }
    try:
        trained, history = train(params, train_set, train_config, model_config)
    except TrainingDivergenceError:
        nan = float("nan")
        return SweepRow(
            **common,
            train_risk=nan,
            test_risk=nan,
            abs_gen_error=nan,
            fd_bound=nan,
            rademacher_bound=nan,
            wall_time_s=time.perf_counter() - started,
        )
    run = measure_generalization(trained, train_set, test_set, model_config, history, seed)
    inputs = BoundInputs(
        n_train=len(train_set),
        alpha=train_config.alpha,
        n_max=stats.n_max,
        b_f=stats.b_f,
        g_max=filter_report.g_max,
        readout=readout,
        delta=config.delta,
    )
    report = bound_report(trained, model_config, inputs, config.bounded_nonlinearity)
    return SweepRow(
        **common,
        train_risk=run.train_risk,
        test_risk=run.test_risk,
        abs_gen_error=run.abs_gen_error,
        fd_bound=report.fd_bound,
        rademacher_bound=report.rademacher_bound,
        wall_time_s=time.perf_counter() - started,
        bounds=report,
    )


def sweep_coordinates(config: SweepConfig) -> list[tuple]:
    """The sweep grid in canonical order: beta, model, filter, readout, width, seed."""
    return sorted(
        product(config.betas, config.models, config.filters, config.readouts, config.widths, config.seeds),
        key=lambda c: (c[0], c[1].value, c[2].value, c[3].value, c[4], c[5]),
    )


def run_sweep_on(
    dataset: GraphDataset,
    config: SweepConfig,
    *,
    stats=None,
    filter_reports: dict[FilterKind, FilterNormReport] | None = None,
) -> list[SweepRow]:
    """Run the sweep grid against an already-resolved dataset.

    stats and filter_reports may be passed in when the caller has already
    computed them (they are pure functions of the dataset).
    """
    if stats is None:
        stats = dataset_stats(dataset)
    filter_reports = dict(filter_reports or {})
    for kind in dict.fromkeys(config.filters):
        if kind not in filter_reports:
            filter_reports[kind] = filter_norm_report(dataset, kind)
    coords = sweep_coordinates(config)

    def one(coord: tuple) -> SweepRow:
        return _run_coordinate(dataset, stats, filter_reports[coord[2]], coord, config)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(one, coords))
    return [one(coord) for coord in coords]


def run_sweep(config: SweepConfig) -> list[SweepRow]:
    """Resolve the dataset, run every coordinate, return rows in canonical order."""
    dataset = resolve_dataset(
        config.dataset, config.data_seed, config.n_graphs, config.feature_dim
    )
    return run_sweep_on(dataset, config)

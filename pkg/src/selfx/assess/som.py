"""Self-organizing map over experience records, one map per behavior.

Training z-scores the feature vectors, seeds a rows x cols grid of
prototypes with uniform noise, and for a fixed number of epochs presents
the records in seeded shuffled order, pulling the best-matching unit and
its Gaussian grid neighborhood toward each sample while the learning rate
and neighborhood radius decay linearly per epoch. Each node then stores
the mean outcome of the records it won, which is what predict() returns
for the node nearest a query.

Everything is deterministic given the seed; serialize_som round-trips
64-bit floats exactly via repr.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .experience import ExperienceRecord

FORMAT_VERSION = 1


@dataclass
class SomConfig:
    seed: int = 0
    rows: int = 4
    cols: int = 4
    epochs: int = 200
    initial_learning_rate: float = 0.5
    final_learning_rate: float = 0.01
    initial_radius: Optional[float] = None  # defaults to max(rows, cols) / 2
    final_radius: float = 0.5

    def radius_start(self) -> float:
        if self.initial_radius is not None:
            return self.initial_radius
        return max(self.rows, self.cols) / 2.0

    def validate(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid must be at least 1 x 1")
        if self.epochs < 1:
            raise ValueError("need at least one training epoch")


@dataclass
class SomMap:
    behavior: str
    feature_names: tuple[str, ...]
    config: SomConfig
    means: np.ndarray
    stds: np.ndarray
    prototypes: np.ndarray  # (rows * cols, dim), row-major by (row, col)
    member_counts: list[int]
    outcome_means: list[Optional[float]]

    @property
    def rows(self) -> int:
        return self.config.rows

    @property
    def cols(self) -> int:
        return self.config.cols

    def node_position(self, index: int) -> tuple[int, int]:
        return divmod(index, self.cols)


@dataclass
class Prediction:
    p_success: float
    bmu: tuple[int, int]
    position_inaccuracy: Optional[float] = None


def _vectors(records: Sequence[ExperienceRecord]):
    if not records:
        raise ValueError("cannot train on an empty record list")
    names = tuple(records[0].features.keys())
    for name in names:
        if any(ch.isspace() for ch in name):
            raise ValueError(f"feature name may not contain whitespace: {name!r}")
    rows = []
    for rec in records:
        if tuple(rec.features.keys()) != names:
            raise ValueError(
                f"ragged features: expected {list(names)}, got {list(rec.features)}")
        rows.append([float(rec.features[n]) for n in names])
    outcomes = np.array([1.0 if rec.outcome else 0.0 for rec in records])
    return names, np.array(rows, dtype=float), outcomes


def train_som(records: Sequence[ExperienceRecord],
              config: Optional[SomConfig] = None,
              behavior: Optional[str] = None) -> SomMap:
    config = config or SomConfig()
    config.validate()
    names, data, outcomes = _vectors(records)
    if behavior is None:
        behavior = records[0].behavior

    means = data.mean(axis=0)
    stds = data.std(axis=0)
    stds = np.where(stds == 0.0, 1.0, stds)  # constant features stay centered
    z = (data - means) / stds

    n_nodes = config.rows * config.cols
    dim = data.shape[1]
    rng = np.random.default_rng(config.seed)
    prototypes = rng.uniform(-1.0, 1.0, size=(n_nodes, dim))
    grid = np.array([divmod(k, config.cols) for k in range(n_nodes)], dtype=float)

    lr0, lr1 = config.initial_learning_rate, config.final_learning_rate
    r0, r1 = config.radius_start(), config.final_radius
    for epoch in range(config.epochs):
        frac = epoch / (config.epochs - 1) if config.epochs > 1 else 0.0
        lr = lr0 + (lr1 - lr0) * frac
        sigma = max(r0 + (r1 - r0) * frac, 1e-9)
        for idx in rng.permutation(len(records)):
            sample = z[idx]
            bmu = int(np.argmin(((prototypes - sample) ** 2).sum(axis=1)))
            grid_d2 = ((grid - grid[bmu]) ** 2).sum(axis=1)
            pull = lr * np.exp(-grid_d2 / (2.0 * sigma * sigma))
            prototypes += pull[:, None] * (sample - prototypes)

    counts = [0] * n_nodes
    sums = [0.0] * n_nodes
    for idx in range(len(records)):
        bmu = int(np.argmin(((prototypes - z[idx]) ** 2).sum(axis=1)))
        counts[bmu] += 1
        sums[bmu] += outcomes[idx]
    outcome_means: list[Optional[float]] = [
        sums[k] / counts[k] if counts[k] else None for k in range(n_nodes)]

    return SomMap(behavior=behavior, feature_names=names, config=config,
                  means=means, stds=stds, prototypes=prototypes,
                  member_counts=counts, outcome_means=outcome_means)


def predict(som: SomMap, features) -> Prediction:
    """Success probability at the best-matching unit for the query features.

    `features` is a name->value mapping or a vector in feature order.
    Ties go to the lowest (row, col); an empty BMU falls back to the
    nearest node that saw training data.
    """
    if isinstance(features, dict):
        missing = [n for n in som.feature_names if n not in features]
        if missing:
            raise ValueError(f"missing features for this map: {missing}")
        vector = [float(features[n]) for n in som.feature_names]
    else:
        vector = [float(v) for v in features]
        if len(vector) != len(som.feature_names):
            raise ValueError(f"expected {len(som.feature_names)} features, "
                             f"got {len(vector)}")
    z = (np.asarray(vector) - som.means) / som.stds
    d2 = ((som.prototypes - z) ** 2).sum(axis=1)
    bmu = int(np.argmin(d2))  # argmin takes the first = lowest (row, col)
    node = bmu
    if som.member_counts[node] == 0:
        node = -1
        best = None
        for k in range(len(d2)):
            if som.member_counts[k] and (best is None or d2[k] < best):
                node, best = k, d2[k]
        if node < 0:
            raise ValueError("map has no node with training members")
    return Prediction(p_success=float(som.outcome_means[node]),
                      bmu=som.node_position(node))


# ----- flat-file serialization ------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def serialize_som(som: SomMap) -> str:
    cfg = som.config
    lines = [
        f"somap {FORMAT_VERSION}",
        f"behavior {som.behavior}",
        "features " + " ".join(som.feature_names),
        f"rows {cfg.rows}",
        f"cols {cfg.cols}",
        f"seed {cfg.seed}",
        f"epochs {cfg.epochs}",
        f"learning_rate {_fmt(cfg.initial_learning_rate)} {_fmt(cfg.final_learning_rate)}",
        f"radius {_fmt(cfg.radius_start())} {_fmt(cfg.final_radius)}",
        "mean " + " ".join(_fmt(v) for v in som.means),
        "std " + " ".join(_fmt(v) for v in som.stds),
    ]
    for k in range(cfg.rows * cfg.cols):
        row, col = som.node_position(k)
        mean = som.outcome_means[k]
        lines.append(
            f"node {row} {col} {som.member_counts[k]} "
            + ("-" if mean is None else _fmt(mean))
            + "".join(" " + _fmt(v) for v in som.prototypes[k]))
    return "\n".join(lines) + "\n"


def parse_som(text: str) -> SomMap:
    lines = [ln for ln in text.splitlines() if ln.strip()]

    def take(expected: str) -> list[str]:
        if not lines:
            raise ValueError(f"truncated map file, expected {expected!r}")
        parts = lines.pop(0).split(" ")
        if parts[0] != expected:
            raise ValueError(f"expected {expected!r} line, got {parts[0]!r}")
        return parts[1:]

    version = take("somap")
    if version != [str(FORMAT_VERSION)]:
        raise ValueError(f"unsupported map format version: {version}")
    behavior = " ".join(take("behavior"))
    names = tuple(n for n in take("features") if n)
    rows = int(take("rows")[0])
    cols = int(take("cols")[0])
    seed = int(take("seed")[0])
    epochs = int(take("epochs")[0])
    lr = take("learning_rate")
    radius = take("radius")
    config = SomConfig(seed=seed, rows=rows, cols=cols, epochs=epochs,
                       initial_learning_rate=float(lr[0]),
                       final_learning_rate=float(lr[1]),
                       initial_radius=float(radius[0]),
                       final_radius=float(radius[1]))
    means = np.array([float(v) for v in take("mean")])
    stds = np.array([float(v) for v in take("std")])
    n_nodes = rows * cols
    prototypes = np.zeros((n_nodes, len(names)))
    counts = [0] * n_nodes
    outcome_means: list[Optional[float]] = [None] * n_nodes
    for _ in range(n_nodes):
        parts = take("node")
        k = int(parts[0]) * cols + int(parts[1])
        counts[k] = int(parts[2])
        outcome_means[k] = None if parts[3] == "-" else float(parts[3])
        prototypes[k] = [float(v) for v in parts[4:]]
    if lines:
        raise ValueError(f"trailing content in map file: {lines[0]!r}")
    return SomMap(behavior=behavior, feature_names=names, config=config,
                  means=means, stds=stds, prototypes=prototypes,
                  member_counts=counts, outcome_means=outcome_means)

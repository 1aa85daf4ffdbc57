"""Clustering experiments: trial sampling, per-run pipeline and result tables.

One run picks ``k_clusters`` classes at random, reveals ``labels_per_class``
labels in each, builds the graph the algorithm calls for, learns a
``k_clusters``-dimensional representation, clusters it with k-means and
scores the clustering by AC against the true classes of all samples.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from . import fgnmf, fgsc
from .data import DataError, DataSet, normalize
from .evaluation import DEFAULT_KMEANS_ITERS, DEFAULT_RESTARTS, accuracy, kmeans
from .graph import (DEFAULT_KNN, AffinityGraph, build_learned_graph,
                    label_weight_graph, unsupervised_gaussian_graph)
from .laplacian import build_laplacian
from .metric import DEFAULT_REGULARIZATION

ALGORITHMS = ("kmeans", "gnmf", "lgnmf", "fgnmf", "gsc", "lgsc", "fgsc")
SEMI_SUPERVISED = ("lgnmf", "fgnmf", "lgsc", "fgsc")
COLUMNS = ("dataset", "algorithm", "k", "labels_per_class", "run", "seed", "ac", "status")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: str = "fgnmf"
    k_clusters: int = 0  # 0 = every class in the dataset
    labels_per_class: int = 2
    test_runs: int = 100
    knn_k: int = DEFAULT_KNN
    lambda1: float = 100.0
    lambda2: float = 1.0
    lambda3: float = 0.1
    c: float = fgsc.DEFAULT_C
    kiss_regularization: float = DEFAULT_REGULARIZATION
    sigma: float | None = None
    master_seed: int = 0
    normalize: bool = True
    max_iters: int = fgnmf.DEFAULT_MAX_ITERS
    outer_iters: int = fgsc.DEFAULT_OUTER_ITERS
    inner_iters: int = fgsc.DEFAULT_INNER_ITERS
    tol: float = 1e-5
    kmeans_restarts: int = DEFAULT_RESTARTS
    kmeans_max_iters: int = DEFAULT_KMEANS_ITERS
    data_format: str = "auto"

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.test_runs < 1:
            raise ConfigError("test_runs must be >= 1")
        if self.algorithm in SEMI_SUPERVISED and self.labels_per_class < 1:
            raise ConfigError(f"{self.algorithm} needs labels_per_class >= 1")
        if self.labels_per_class < 0 or self.k_clusters < 0 or self.knn_k < 1:
            raise ConfigError("labels_per_class, k_clusters must be >= 0 and knn_k >= 1")
        if min(self.lambda1, self.lambda2, self.lambda3, self.kiss_regularization) < 0:
            raise ConfigError("regularization weights must be nonnegative")
        if not self.c > 0 or (self.sigma is not None and not self.sigma > 0):
            raise ConfigError("c and sigma must be positive")
        if self.data_format not in ("auto", "csv", "dense-binary"):
            raise ConfigError(f"unknown data_format {self.data_format!r}")


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _coerce(name: str, raw: str, default):
    try:
        if name == "sigma":
            return None if raw.lower() in ("", "none", "auto") else float(raw)
        if isinstance(default, bool):
            low = raw.lower()
            if low not in _TRUE | _FALSE:
                raise ValueError(raw)
            return low in _TRUE
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}") from None


def parse_config(text: str) -> ExperimentConfig:
    """Parse flat ``key=value`` lines; ``#`` starts a comment."""
    defaults = ExperimentConfig()
    known = {f.name for f in fields(ExperimentConfig)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, raw, getattr(defaults, key))
    return ExperimentConfig(**values)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None


def sample_trial(dataset: DataSet, k_clusters: int, labels_per_class: int,
                 seed: int) -> DataSet:
    """Draw ``k_clusters`` classes and expose ``labels_per_class`` labels each.

    The labeled samples are moved to the front (grouped by drawn class);
    unlabeled samples follow in their original order.
    """
    if dataset.labels is None:
        raise DataError("trial sampling needs ground-truth labels")
    classes = np.unique(dataset.labels)
    if k_clusters == 0:
        k_clusters = len(classes)
    if k_clusters > len(classes):
        raise DataError(f"dataset has {len(classes)} classes, {k_clusters} requested")
    rng = np.random.default_rng(seed)
    chosen = classes[rng.choice(len(classes), size=k_clusters, replace=False)]
    labeled, unlabeled = [], []
    for cls in chosen:
        members = np.flatnonzero(dataset.labels == cls)
        if members.size < labels_per_class:
            raise DataError(f"class {cls!r} has {members.size} samples, "
                            f"fewer than labels_per_class={labels_per_class}")
        picked = np.sort(rng.choice(members, size=labels_per_class, replace=False))
        labeled.append(picked)
        unlabeled.append(np.setdiff1d(members, picked))
    order = np.concatenate(labeled + [np.sort(np.concatenate(unlabeled))]).astype(np.intp)
    l = k_clusters * labels_per_class
    meta = {"indices": order, "classes": chosen, "seed": seed}
    return DataSet(dataset.X[:, order], dataset.labels[order], l, dataset.name, meta)


def build_graph(trial: DataSet, config: ExperimentConfig) -> AffinityGraph:
    algo = config.algorithm
    if algo in ("fgnmf", "fgsc", "kmeans"):
        return build_learned_graph(trial, config.knn_k, config.kiss_regularization,
                                   config.sigma)
    if algo in ("lgnmf", "lgsc"):
        return label_weight_graph(trial)
    return unsupervised_gaussian_graph(trial, config.knn_k, config.sigma)


def representation(trial: DataSet, config: ExperimentConfig, seed: int) -> np.ndarray:
    """Rows are samples, ready for k-means."""
    if config.algorithm == "kmeans":
        return trial.X.T
    k = trial.class_count
    lap = build_laplacian(build_graph(trial, config))
    if config.algorithm.endswith("nmf"):
        model = fgnmf.fit_fgnmf(trial.X, lap, k, config.lambda1, config.max_iters,
                                config.tol, seed)
        return model.V
    model = fgsc.fit_fgsc(trial.X, lap, k, config.lambda2, config.lambda3, config.c,
                          config.outer_iters, config.tol, seed, config.inner_iters)
    return model.S.T


@dataclass(frozen=True)
class RunResult:
    run: int
    seed: int
    ac: float | None
    status: str


def run_trial(dataset: DataSet, config: ExperimentConfig, run: int) -> RunResult:
    seed = config.master_seed + run
    try:
        trial = sample_trial(dataset, config.k_clusters, config.labels_per_class, seed)
        rep = representation(trial, config, seed)
        clusters = kmeans(rep, trial.class_count, config.kmeans_restarts,
                          config.kmeans_max_iters, seed)
        ac = accuracy(clusters.assignments, trial.labels).ac
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return RunResult(run, seed, None, f"failed: {type(exc).__name__}: {exc}")
    return RunResult(run, seed, ac, "ok")


def _thread_cap() -> int:
    raw = os.environ.get("GRAPHSSL_THREADS", "")
    try:
        cap = int(raw)
    except ValueError:
        cap = os.cpu_count() or 1
    return max(1, cap)


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    dataset: str
    k: int
    runs: list[RunResult]

    @property
    def accuracies(self) -> list[float]:
        return [r.ac for r in self.runs if r.ac is not None]

    @property
    def failed(self) -> int:
        return sum(r.ac is None for r in self.runs)

    @property
    def mean_ac(self) -> float:
        acs = self.accuracies
        return math.fsum(acs) / len(acs) if acs else float("nan")

    @property
    def std_ac(self) -> float:
        acs = self.accuracies
        return float(np.std(acs)) if acs else float("nan")

    def rows(self) -> list[tuple]:
        cfg = self.config
        head = (self.dataset, cfg.algorithm, self.k, cfg.labels_per_class)
        out = [head + (r.run, r.seed, "" if r.ac is None else repr(r.ac), r.status)
               for r in self.runs]
        status = f"ok={len(self.accuracies)};failed={self.failed}"
        out.append(head + ("mean", "", repr(self.mean_ac), status))
        out.append(head + ("std", "", repr(self.std_ac), status))
        return out

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if header:
            writer.writerow(COLUMNS)
        writer.writerows(self.rows())
        return buf.getvalue()


def run_experiment(dataset: DataSet, config: ExperimentConfig,
                   threads: int | None = None) -> ExperimentResult:
    """Run ``config.test_runs`` seeded trials; rows come back in run order."""
    if config.normalize:
        dataset = normalize(dataset)
    k = config.k_clusters or dataset.class_count
    workers = min(threads or _thread_cap(), config.test_runs)
    if workers == 1:
        runs = [run_trial(dataset, config, r) for r in range(config.test_runs)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(lambda r: run_trial(dataset, config, r),
                                 range(config.test_runs)))
    return ExperimentResult(config, dataset.name, k, runs)


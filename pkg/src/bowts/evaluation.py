"""1-NN classification, stratified k-fold cross-validation and parameter sweeps."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import bow
from .bow import BowConfig
from .dataio import Dataset
from .errors import InvalidInputError
from .metrics import pairwise, parse_distance
from .signal import add_awgn

log = logging.getLogger(__name__)

SWEEP_AXES = ("window_len", "codebook_size", "distance", "snr_db")


# --- classifier ----------------------------------------------------------------------


def nn_predict(train_X, train_y: Sequence, test_X, kind="chi2") -> list:
    """Label of the nearest training row for every test row (earliest index wins ties)."""
    train_X = np.atleast_2d(np.asarray(train_X, dtype=np.float64))
    if train_X.shape[0] == 0 or len(train_y) != train_X.shape[0]:
        raise InvalidInputError("training set is empty or labels do not match rows")
    D = pairwise(test_X, train_X, kind)
    return [train_y[i] for i in D.argmin(axis=1)]


def nn_predict_from_distances(D: np.ndarray, train_y: Sequence) -> list:
    D = np.asarray(D)
    if D.shape[1] == 0:
        raise InvalidInputError("training set is empty")
    return [train_y[i] for i in D.argmin(axis=1)]


def nn_classify(train: Sequence[tuple], test, kind="chi2"):
    """Classify one representation against ``(representation, label)`` pairs."""
    if not train:
        raise InvalidInputError("training set is empty")
    X = np.vstack([np.asarray(r, dtype=np.float64) for r, _ in train])
    return nn_predict(X, [lab for _, lab in train], np.asarray(test)[None, :], kind)[0]


# --- folds ----------------------------------------------------------------------------


@dataclass(frozen=True)
class FoldSplit:
    folds: np.ndarray
    k: int
    seed: int

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.folds == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.folds != fold)


def kfold_split(n_items: int, labels: Sequence, k: int = 10, seed: int = 0) -> FoldSplit:
    """Stratified random partition into ``k`` folds.

    Classes are dealt round-robin into folds, continuing where the previous
    class stopped, so fold sizes differ by at most one. Classes are taken in
    order of first appearance, which makes the split independent of label names.
    """
    if len(labels) != n_items:
        raise InvalidInputError(f"{len(labels)} labels for {n_items} items")
    if k < 2 or k > n_items:
        raise InvalidInputError(f"need 2 <= k <= {n_items}, got k={k}")
    rng = np.random.default_rng(seed)
    labels = list(labels)
    folds = np.empty(n_items, dtype=np.int64)
    offset = 0
    for cls in dict.fromkeys(labels):
        members = np.array([i for i, lab in enumerate(labels) if lab == cls])
        if members.size < k:
            log.warning("class %r has %d members, fewer than k=%d folds", cls, members.size, k)
        members = rng.permutation(members)
        folds[members] = (offset + np.arange(members.size)) % k
        offset = (offset + members.size) % k
    return FoldSplit(folds=folds, k=k, seed=seed)


# --- reports --------------------------------------------------------------------------


@dataclass
class ExperimentReport:
    classes: list
    fold_accuracies: list
    fold_sizes: list
    confusion: list
    config: dict
    flags: list = field(default_factory=list)
    timings: dict = field(default_factory=dict, compare=False)

    @property
    def total(self) -> int:
        return int(np.sum(self.confusion))

    @property
    def correct(self) -> int:
        return int(np.trace(np.asarray(self.confusion)))

    @property
    def mean_accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0

    def to_dict(self) -> dict:
        """Serializable view. Timings are left out so reruns compare byte-for-byte."""
        return {
            "classes": [str(c) for c in self.classes],
            "fold_accuracies": list(self.fold_accuracies),
            "fold_sizes": list(self.fold_sizes),
            "confusion": [list(map(int, r)) for r in self.confusion],
            "mean_accuracy": self.mean_accuracy,
            "config": self.config,
            "flags": list(self.flags),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentReport":
        return cls(
            classes=list(data["classes"]),
            fold_accuracies=list(data["fold_accuracies"]),
            fold_sizes=list(data["fold_sizes"]),
            confusion=[list(r) for r in data["confusion"]],
            config=dict(data["config"]),
            flags=list(data.get("flags", [])),
        )

    def fold_rows(self) -> list:
        rows = [
            [f, n, round(acc * n), f"{acc:.6f}"]
            for f, (n, acc) in enumerate(zip(self.fold_sizes, self.fold_accuracies))
        ]
        rows.append(["mean", self.total, self.correct, f"{self.mean_accuracy:.6f}"])
        return rows


def _assemble_report(dataset_labels, classes, split, predictions, config, flags):
    index = {c: i for i, c in enumerate(classes)}
    confusion = np.zeros((len(classes), len(classes)), dtype=np.int64)
    fold_acc, fold_sizes = [], []
    for fold, preds in enumerate(predictions):
        test_idx = split.test_indices(fold)
        hits = 0
        for i, p in zip(test_idx, preds):
            confusion[index[dataset_labels[i]], index[p]] += 1
            hits += dataset_labels[i] == p
        fold_sizes.append(int(test_idx.size))
        fold_acc.append(hits / test_idx.size if test_idx.size else 0.0)
    return ExperimentReport(
        classes=list(classes),
        fold_accuracies=fold_acc,
        fold_sizes=fold_sizes,
        confusion=confusion.tolist(),
        config=config,
        flags=flags,
    )


def _map_folds(fn: Callable[[int], list], k: int, threads: int) -> list:
    if threads <= 1:
        return [fn(f) for f in range(k)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(k)))


def codebook_training_pool(blocks: Sequence[np.ndarray], indices: np.ndarray, cap: int, seed: int) -> np.ndarray:
    """Feature rows used to train one fold's codebook, drawn from ``indices`` only."""
    rng = np.random.default_rng(seed)
    return bow.sample_training_features([blocks[i] for i in indices], cap, rng)


def run_experiment(
    dataset: Dataset,
    config: BowConfig = BowConfig(),
    distance="chi2",
    k_folds: int = 10,
    seed: int = 0,
    *,
    codebook_scope: str = "fold",
    normalize: Optional[bool] = None,
    threads: int = 1,
    split: Optional[FoldSplit] = None,
) -> ExperimentReport:
    """Cross-validated 1-NN accuracy of the bag-of-words pipeline.

    ``codebook_scope="fold"`` trains each fold's codebook on that fold's training
    series only; ``"global"`` trains one codebook on every series.
    ``normalize`` chooses L1-normalized histograms; by default only the
    Jensen-Shannon and intersection distances use them.
    """
    kind = parse_distance(distance)
    if codebook_scope not in ("fold", "global"):
        raise InvalidInputError(f"codebook_scope must be 'fold' or 'global', got {codebook_scope!r}")
    labels = dataset.labels
    short = [s.id for s in dataset.series if len(s) < config.window_len]
    if short:
        raise InvalidInputError(
            f"{len(short)} series shorter than the window ({config.window_len}), e.g. {short[0]}"
        )
    flags = []
    if len(dataset.classes) < 2:
        flags.append("degenerate: single class, accuracy is trivially 1")
    if codebook_scope == "global":
        flags.append("shared codebook trained on all series (test folds included)")
    use_norm = kind.uses_normalized if normalize is None else bool(normalize)
    split = split or kfold_split(len(dataset), labels, k_folds, seed)

    t0 = time.perf_counter()
    blocks = [bow.series_features(s, config) for s in dataset.series]
    timings = {"features_s": time.perf_counter() - t0}

    def histograms(cb: bow.Codebook) -> np.ndarray:
        H = np.vstack([bow.histogram_from_features(cb, b).counts for b in blocks]).astype(np.float64)
        return H / H.sum(axis=1, keepdims=True) if use_norm else H

    def train(indices: np.ndarray) -> bow.Codebook:
        pool = codebook_training_pool(blocks, indices, config.max_train_segments, config.seed)
        return bow.train_codebook(
            pool, config.codebook_size, max_iter=config.max_iter, seed=config.seed + 1, config=config
        )

    shared_H = None
    if codebook_scope == "global":
        shared_H = histograms(train(np.arange(len(dataset))))

    def run_fold(fold: int) -> list:
        tr, te = split.train_indices(fold), split.test_indices(fold)
        H = shared_H if shared_H is not None else histograms(train(tr))
        return nn_predict(H[tr], [labels[i] for i in tr], H[te], kind)

    t1 = time.perf_counter()
    predictions = _map_folds(run_fold, split.k, threads)
    timings["folds_s"] = time.perf_counter() - t1

    report_config = {
        "bow": config.to_dict(),
        "distance": kind.value,
        "histograms": "normalized" if use_norm else "raw",
        "k_folds": split.k,
        "split_seed": split.seed,
        "codebook_scope": codebook_scope,
    }
    report = _assemble_report(labels, dataset.classes, split, predictions, report_config, flags)
    report.timings = timings
    log.info("mean accuracy %.4f (%s)", report.mean_accuracy, timings)
    return report


def cross_validate_representation(
    X,
    labels: Sequence,
    split: FoldSplit,
    kind="euclidean",
    classes: Optional[Sequence] = None,
    config: Optional[dict] = None,
) -> ExperimentReport:
    """1-NN cross-validation on fixed per-series feature vectors."""
    X = np.asarray(X, dtype=np.float64)
    labels = list(labels)
    kind = parse_distance(kind)

    def run_fold(fold):
        tr, te = split.train_indices(fold), split.test_indices(fold)
        return nn_predict(X[tr], [labels[i] for i in tr], X[te], kind)

    classes = list(classes) if classes is not None else sorted(set(labels), key=str)
    cfg = {"distance": kind.value, "k_folds": split.k, "split_seed": split.seed, **(config or {})}
    return _assemble_report(labels, classes, split, [run_fold(f) for f in range(split.k)], cfg, [])


def cross_validate_distances(
    D,
    labels: Sequence,
    split: FoldSplit,
    classes: Optional[Sequence] = None,
    config: Optional[dict] = None,
) -> ExperimentReport:
    """1-NN cross-validation from a precomputed square distance matrix."""
    D = np.asarray(D, dtype=np.float64)
    labels = list(labels)

    def run_fold(fold):
        tr, te = split.train_indices(fold), split.test_indices(fold)
        return nn_predict_from_distances(D[np.ix_(te, tr)], [labels[i] for i in tr])

    classes = list(classes) if classes is not None else sorted(set(labels), key=str)
    cfg = {"k_folds": split.k, "split_seed": split.seed, **(config or {})}
    return _assemble_report(labels, classes, split, [run_fold(f) for f in range(split.k)], cfg, [])


# --- sweeps ----------------------------------------------------------------------------


@dataclass
class SweepResult:
    axis: str
    values: list
    accuracies: list
    reports: list
    skipped: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def rows(self) -> list:
        return [[v, f"{a:.6f}"] for v, a in zip(self.values, self.accuracies)]


def add_noise_to_dataset(dataset: Dataset, snr_db: float, seed: int) -> Dataset:
    rng = np.random.default_rng([seed, int(round(snr_db * 1000)) & 0xFFFFFFFF])
    return dataset.map_series(lambda s: add_awgn(s, snr_db, rng), name=f"{dataset.name}@{snr_db}dB")


def sweep(
    dataset: Dataset,
    axis: str,
    values: Sequence,
    base_config: BowConfig = BowConfig(),
    seed: int = 0,
    *,
    distance="chi2",
    k_folds: int = 10,
    threads: int = 1,
    codebook_scope: str = "fold",
) -> SweepResult:
    """One :func:`run_experiment` per value along ``axis``; everything else is held fixed.

    All runs share one fold split. Values that are invalid for the axis are
    skipped with a warning and listed in ``skipped``.
    """
    if axis not in SWEEP_AXES:
        raise InvalidInputError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")
    if not values:
        raise InvalidInputError("sweep needs at least one value")
    split = kfold_split(len(dataset), dataset.labels, k_folds, seed)
    result = SweepResult(
        axis=axis, values=[], accuracies=[], reports=[],
        config={"bow": base_config.to_dict(), "distance": parse_distance(distance).value,
                "k_folds": k_folds, "seed": seed, "axis": axis},
    )
    for value in values:
        try:
            cfg, dist, data = base_config, distance, dataset
            if axis == "window_len":
                cfg = replace(base_config, window_len=int(value))
            elif axis == "codebook_size":
                cfg = replace(base_config, codebook_size=int(value))
            elif axis == "distance":
                dist = parse_distance(value)
            else:
                data = add_noise_to_dataset(dataset, float(value), seed)
            report = run_experiment(
                data, cfg, dist, k_folds, seed, split=split, threads=threads,
                codebook_scope=codebook_scope,
            )
        except (InvalidInputError, ValueError) as exc:
            log.warning("skipping %s=%r: %s", axis, value, exc)
            result.skipped.append((value, str(exc)))
            continue
        result.values.append(dist.value if axis == "distance" else value)
        result.accuracies.append(report.mean_accuracy)
        result.reports.append(report)
    return result

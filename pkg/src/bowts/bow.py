"""Bag-of-words representation of time series.

A series is cut into overlapping windows, each window is z-normalized and
summarized by its single-level DWT approximation coefficients, and those
feature vectors are quantized against a k-means codebook. The series becomes
the histogram of codeword counts.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvalidInputError
from .signal import TimeSeries, as_array, znormalize, znormalize_rows
from .wavelet import coeff_length, dwt_single, wavelet_filters

log = logging.getLogger(__name__)

_ASSIGN_CHUNK = 4096


@dataclass(frozen=True)
class BowConfig:
    window_len: int = 128
    stride: int = 2
    codebook_size: int = 1000
    wavelet: str = "db3"
    max_train_segments: int = 100_000
    max_iter: int = 100
    seed: int = 0

    def __post_init__(self):
        f = wavelet_filters(self.wavelet).length
        if self.window_len < max(f, 2):
            raise InvalidInputError(
                f"window_len {self.window_len} is shorter than the {self.wavelet} filter ({f})"
            )
        if self.stride < 1:
            raise InvalidInputError(f"stride must be >= 1, got {self.stride}")
        if self.codebook_size < 2:
            raise InvalidInputError(f"codebook_size must be >= 2, got {self.codebook_size}")
        if self.max_train_segments < 1:
            raise InvalidInputError("max_train_segments must be positive")
        if self.max_iter < 1:
            raise InvalidInputError("max_iter must be positive")

    @property
    def feature_dim(self) -> int:
        return feature_dim(self.window_len, self.wavelet)

    def to_dict(self) -> dict:
        return asdict(self)


def feature_dim(window_len: int, wavelet: str = "db3") -> int:
    return coeff_length(window_len, wavelet_filters(wavelet).length)


def segment_count(n: int, window_len: int, stride: int) -> int:
    return 0 if n < window_len else (n - window_len) // stride + 1


def extract_segments(x, window_len: int, stride: int) -> np.ndarray:
    """Raw windows starting at 0, stride, 2*stride, ... as an ``(m, window_len)`` array."""
    arr = as_array(x)
    if window_len < 1 or stride < 1:
        raise InvalidInputError("window_len and stride must be positive")
    if arr.size < window_len:
        raise InvalidInputError(
            f"series of length {arr.size} is shorter than the window ({window_len}); "
            f"minimum length is {window_len}"
        )
    return sliding_window_view(arr, window_len)[::stride].copy()


def segment_features(window, wavelet: str = "db3") -> np.ndarray:
    """Feature vector of one window: DWT approximation of its z-normalized values."""
    approx, _ = dwt_single(znormalize(as_array(window)), wavelet)
    return approx


def segment_features_batch(windows: np.ndarray, wavelet: str = "db3") -> np.ndarray:
    normed, _ = znormalize_rows(windows)
    approx, _ = dwt_single(normed, wavelet)
    return approx


def series_features(x, config: BowConfig) -> np.ndarray:
    """Feature vectors of every window of ``x``, shape ``(segments, feature_dim)``."""
    windows = extract_segments(x, config.window_len, config.stride)
    return segment_features_batch(windows, config.wavelet)


# --- codebook -----------------------------------------------------------------


@dataclass(frozen=True)
class TrainingStats:
    iterations: int
    objective_history: tuple
    segments_used: int
    converged: bool

    @property
    def objective(self) -> float:
        return self.objective_history[-1]


@dataclass(frozen=True)
class Codebook:
    """Immutable set of ``K`` centroids in feature space.

    ``config`` is None when the codebook was trained directly on feature vectors
    rather than through :func:`fit_codebook`.
    """

    centroids: np.ndarray
    config: Optional[BowConfig] = None
    stats: Optional[TrainingStats] = field(default=None, compare=False)

    def __post_init__(self):
        c = np.array(self.centroids, dtype=np.float64)
        if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
            raise InvalidInputError(f"codebook needs a non-empty (K, d) matrix, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise InvalidInputError("codebook contains non-finite centroid values")
        if self.config is not None:
            if c.shape[0] != self.config.codebook_size:
                raise InvalidInputError(
                    f"{c.shape[0]} centroids but config says K={self.config.codebook_size}"
                )
            if c.shape[1] != self.config.feature_dim:
                raise InvalidInputError(
                    f"centroid dimension {c.shape[1]} != feature dimension {self.config.feature_dim}"
                )
        c.setflags(write=False)
        object.__setattr__(self, "centroids", c)

    @property
    def size(self) -> int:
        return self.centroids.shape[0]

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]


def _sq_dist_to(X: np.ndarray, C: np.ndarray, labels: np.ndarray) -> np.ndarray:
    diff = X - C[labels]
    return np.einsum("ij,ij->i", diff, diff)


def nearest_centroids(C: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Index of the nearest centroid for each row of ``X``; ties go to the lowest index.

    Uses the ``|x|^2 - 2x.c + |c|^2`` expansion for speed and recomputes exact
    distances for any row whose best candidates fall within rounding error.
    """
    C = np.asarray(C, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    c_sq = np.einsum("ij,ij->i", C, C)
    c_max = c_sq.max()
    out = np.empty(X.shape[0], dtype=np.int64)
    for s in range(0, X.shape[0], _ASSIGN_CHUNK):
        block = X[s : s + _ASSIGN_CHUNK]
        x_sq = np.einsum("ij,ij->i", block, block)
        # |x|^2 is constant per row, so rank by |c|^2 - 2 x.c
        d2 = block @ C.T
        d2 *= -2.0
        d2 += c_sq
        best = d2.argmin(axis=1)
        low = d2[np.arange(block.shape[0]), best]
        tol = 1e-10 * (x_sq + c_max) + 1e-300
        near = d2 <= (low + tol)[:, None]
        ambiguous = np.flatnonzero(np.count_nonzero(near, axis=1) > 1)
        for r in ambiguous:
            diff = C - block[r]
            best[r] = int(np.argmin(np.einsum("ij,ij->i", diff, diff)))
        out[s : s + block.shape[0]] = best
    return out


def _kmeans_pp(X: np.ndarray, K: int, rng: np.random.Generator) -> np.ndarray:
    """Greedy k-means++: draw several D^2-weighted candidates per centre, keep the best.

    Seeding weights use the dot-product expansion; exactness is not needed here.
    """
    n = X.shape[0]
    trials = 2 + int(np.log(K))
    x_sq = np.einsum("ij,ij->i", X, X)
    first = int(rng.integers(n))
    chosen = [first]
    d2 = np.maximum(x_sq - 2.0 * (X @ X[first]) + x_sq[first], 0.0)
    for _ in range(1, K):
        total = d2.sum()
        if total <= 0:
            # every point coincides with a chosen centre; fall back to unused indices
            unused = np.setdiff1d(np.arange(n), chosen)
            chosen.append(int(rng.choice(unused)))
            continue
        cum = np.cumsum(d2)
        cand = np.minimum(np.searchsorted(cum, rng.random(trials) * cum[-1], side="right"), n - 1)
        dist = np.maximum(x_sq[:, None] - 2.0 * (X @ X[cand].T) + x_sq[cand][None, :], 0.0)
        trial = np.minimum(d2[:, None], dist)
        pick = int(np.argmin(trial.sum(axis=0)))
        chosen.append(int(cand[pick]))
        d2 = trial[:, pick]
    return X[chosen].copy()


def _cluster_means(X: np.ndarray, labels: np.ndarray, K: int, C_prev: np.ndarray):
    counts = np.bincount(labels, minlength=K)
    sums = np.zeros_like(C_prev)
    np.add.at(sums, labels, X)
    C = C_prev.copy()
    filled = counts > 0
    C[filled] = sums[filled] / counts[filled, None]
    return C, np.flatnonzero(~filled)


def train_codebook(
    features,
    K: int,
    max_iter: int = 100,
    seed: int = 0,
    config: Optional[BowConfig] = None,
) -> Codebook:
    """Lloyd's k-means with k-means++ seeding.

    Stops when no assignment changes or after ``max_iter`` update steps.
    Empty clusters are moved onto the point farthest from its centroid. The
    recorded objective (sum of squared distances) never increases.
    """
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2:
        raise InvalidInputError(f"features must be a 2-D array of equal-length vectors, got {X.shape}")
    n, d = X.shape
    if K < 1:
        raise InvalidInputError(f"K must be positive, got {K}")
    if n < K:
        raise InvalidInputError(f"need at least K={K} feature vectors, got {n}")
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("features contain non-finite values")
    if config is not None and d != config.feature_dim:
        raise InvalidInputError(f"feature dimension {d} != configured {config.feature_dim}")

    rng = np.random.default_rng(seed)
    C = _kmeans_pp(X, K, rng)
    labels = nearest_centroids(C, X)
    dist = _sq_dist_to(X, C, labels)
    history = [float(dist.sum())]
    converged = False
    iterations = 0

    for _ in range(max_iter):
        C_new, empty = _cluster_means(X, labels, K, C)
        if empty.size:
            gap = _sq_dist_to(X, C_new, labels)
            for j in empty:
                far = int(np.argmax(gap))
                C_new[j] = X[far]
                gap[far] = -1.0
            log.debug("re-seeded %d empty clusters", empty.size)
        current = _sq_dist_to(X, C_new, labels)
        cand = nearest_centroids(C_new, X)
        cand_dist = _sq_dist_to(X, C_new, cand)
        move = cand_dist < current
        new_labels = np.where(move, cand, labels)
        new_dist = np.where(move, cand_dist, current)
        objective = float(new_dist.sum())
        if objective > history[-1]:
            # float noise at a fixed point; keep the previous state
            converged = True
            break
        iterations += 1
        C, labels = C_new, new_labels
        history.append(objective)
        if not move.any() and empty.size == 0:
            converged = True
            break

    stats = TrainingStats(
        iterations=iterations,
        objective_history=tuple(history),
        segments_used=n,
        converged=converged,
    )
    return Codebook(centroids=C, config=config, stats=stats)


def sample_training_features(
    blocks: Sequence[np.ndarray], cap: int, rng: np.random.Generator
) -> np.ndarray:
    """Pool per-series feature blocks and draw at most ``cap`` rows uniformly."""
    if not blocks:
        raise InvalidInputError("no training series to build a codebook from")
    pooled = np.concatenate(blocks, axis=0)
    if pooled.shape[0] <= cap:
        return pooled
    idx = np.sort(rng.choice(pooled.shape[0], size=cap, replace=False))
    return pooled[idx]


def fit_codebook(series: Iterable, config: BowConfig) -> Codebook:
    """Train a codebook on the windows of ``series`` under ``config``."""
    blocks = [series_features(s, config) for s in series]
    return fit_codebook_from_features(blocks, config)


def fit_codebook_from_features(blocks: Sequence[np.ndarray], config: BowConfig) -> Codebook:
    rng = np.random.default_rng(config.seed)
    pool = sample_training_features(blocks, config.max_train_segments, rng)
    # k-means seeding gets its own stream so the sample size does not shift it
    return train_codebook(
        pool, config.codebook_size, max_iter=config.max_iter, seed=config.seed + 1, config=config
    )


# --- assignment and histograms ----------------------------------------------------


def assign_codeword(cb: Codebook, f) -> int:
    """Index of the nearest codeword by exact Euclidean scan (lowest index on ties)."""
    v = np.asarray(f, dtype=np.float64)
    if v.shape != (cb.dim,):
        raise InvalidInputError(f"feature has shape {v.shape}, codebook expects ({cb.dim},)")
    diff = cb.centroids - v
    return int(np.argmin(np.einsum("ij,ij->i", diff, diff)))


@dataclass(frozen=True)
class BowHistogram:
    counts: np.ndarray
    total: int

    def __post_init__(self):
        c = np.array(self.counts, dtype=np.int64)
        if c.ndim != 1 or np.any(c < 0):
            raise InvalidInputError("histogram counts must be a 1-D non-negative vector")
        if int(c.sum()) != self.total or self.total < 1:
            raise InvalidInputError(f"counts sum {int(c.sum())} != total {self.total}")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def normalized(self) -> np.ndarray:
        return self.counts / self.total


def histogram_from_features(cb: Codebook, features: np.ndarray) -> BowHistogram:
    F = np.asarray(features, dtype=np.float64)
    if F.ndim != 2 or F.shape[1] != cb.dim:
        raise InvalidInputError(f"features of shape {F.shape} do not match codebook dim {cb.dim}")
    if F.shape[0] == 0:
        raise InvalidInputError("no segments to histogram")
    labels = nearest_centroids(cb.centroids, F)
    return BowHistogram(counts=np.bincount(labels, minlength=cb.size), total=F.shape[0])


def build_histogram(cb: Codebook, x, config: Optional[BowConfig] = None) -> BowHistogram:
    """Codeword histogram of a series under the codebook's (or the given) config."""
    cfg = config or cb.config
    if cfg is None:
        raise InvalidInputError("codebook has no config; pass one explicitly")
    n = len(as_array(x))
    if n < cfg.window_len:
        raise InvalidInputError(
            f"series length {n} is below the minimum length {cfg.window_len} for one segment"
        )
    return histogram_from_features(cb, series_features(x, cfg))


def transform(cb: Codebook, series: Iterable, config: Optional[BowConfig] = None) -> np.ndarray:
    """Stack of raw count histograms, one row per series."""
    return np.vstack([build_histogram(cb, s, config).counts for s in series])


__all__ = [
    "BowConfig",
    "BowHistogram",
    "Codebook",
    "TimeSeries",
    "TrainingStats",
    "assign_codeword",
    "build_histogram",
    "extract_segments",
    "feature_dim",
    "fit_codebook",
    "fit_codebook_from_features",
    "histogram_from_features",
    "nearest_centroids",
    "sample_training_features",
    "segment_count",
    "segment_features",
    "segment_features_batch",
    "series_features",
    "train_codebook",
    "transform",
]

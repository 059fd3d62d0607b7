"""Histogram distances used by the nearest-neighbour classifier.

Euclidean and chi-squared work on whatever vectors they are given (raw counts
by default). Jensen-Shannon and intersection L1-normalize their inputs first.
Each measure also has a vectorized ``pairwise`` form used by the classifier.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .errors import InvalidInputError

DEFAULT_EPS = 1e-10


class DistanceKind(str, Enum):
    EUCLIDEAN = "euclidean"
    CHI_SQUARED = "chi_squared"
    JENSEN_SHANNON = "jensen_shannon"
    HISTOGRAM_INTERSECTION = "histogram_intersection"

    @property
    def uses_normalized(self) -> bool:
        return self in (DistanceKind.JENSEN_SHANNON, DistanceKind.HISTOGRAM_INTERSECTION)


_ALIASES = {
    "euclidean": DistanceKind.EUCLIDEAN,
    "l2": DistanceKind.EUCLIDEAN,
    "chi2": DistanceKind.CHI_SQUARED,
    "chi_squared": DistanceKind.CHI_SQUARED,
    "chi-squared": DistanceKind.CHI_SQUARED,
    "js": DistanceKind.JENSEN_SHANNON,
    "jensen_shannon": DistanceKind.JENSEN_SHANNON,
    "jensen-shannon": DistanceKind.JENSEN_SHANNON,
    "hi": DistanceKind.HISTOGRAM_INTERSECTION,
    "intersection": DistanceKind.HISTOGRAM_INTERSECTION,
    "histogram_intersection": DistanceKind.HISTOGRAM_INTERSECTION,
}


def parse_distance(name) -> DistanceKind:
    if isinstance(name, DistanceKind):
        return name
    try:
        return _ALIASES[str(name).lower()]
    except KeyError:
        raise InvalidInputError(
            f"unknown distance {name!r}; choose from {sorted(set(_ALIASES))}"
        ) from None


def _pair(h, k) -> tuple[np.ndarray, np.ndarray]:
    h = np.asarray(h, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    if h.ndim != 1 or h.shape != k.shape:
        raise InvalidInputError(f"histogram shapes differ: {h.shape} vs {k.shape}")
    return h, k


def _normalize(h: np.ndarray) -> np.ndarray:
    if np.any(h < 0):
        raise InvalidInputError("histogram has negative entries")
    total = h.sum(axis=-1, keepdims=True)
    if np.any(total <= 0):
        raise InvalidInputError("cannot normalize an all-zero histogram")
    return h / total


def d_euclidean(h, k) -> float:
    h, k = _pair(h, k)
    return float(np.sqrt(np.sum((h - k) ** 2)))


def d_chi2(h, k, eps: float = DEFAULT_EPS) -> float:
    h, k = _pair(h, k)
    if eps <= 0:
        raise InvalidInputError("eps must be positive")
    if np.any(h < 0) or np.any(k < 0):
        raise InvalidInputError("chi-squared distance needs non-negative histograms")
    return float(np.sum((h - k) ** 2 / (h + k + eps)))


def _smooth(p: np.ndarray, eps: float) -> np.ndarray:
    q = p + eps
    return q / q.sum(axis=-1, keepdims=True)


def d_js(h, k, eps: float = DEFAULT_EPS) -> float:
    """Symmetrized KL divergence in bits, after eps-smoothing every bin."""
    h, k = _pair(h, k)
    p = _smooth(_normalize(h), eps)
    q = _smooth(_normalize(k), eps)
    log_ratio = np.log2(p) - np.log2(q)
    # 0.5 * (KL(p||q) + KL(q||p)) == 0.5 * sum((p - q) * log(p / q))
    return float(max(0.5 * np.sum((p - q) * log_ratio), 0.0))


def d_hist_intersect(h, k) -> float:
    h, k = _pair(h, k)
    overlap = np.minimum(_normalize(h), _normalize(k)).sum()
    return float(min(max(1.0 - overlap, 0.0), 1.0))


def distance(h, k, kind, eps: float = DEFAULT_EPS) -> float:
    kind = parse_distance(kind)
    if kind is DistanceKind.EUCLIDEAN:
        return d_euclidean(h, k)
    if kind is DistanceKind.CHI_SQUARED:
        return d_chi2(h, k, eps)
    if kind is DistanceKind.JENSEN_SHANNON:
        return d_js(h, k, eps)
    return d_hist_intersect(h, k)


def pairwise(A, B, kind, eps: float = DEFAULT_EPS, chunk: int = 64) -> np.ndarray:
    """Distance matrix with ``out[i, j] = distance(A[i], B[j])``.

    Agrees with the scalar functions up to floating-point summation order.
    """
    kind = parse_distance(kind)
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if A.shape[1] != B.shape[1]:
        raise InvalidInputError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    if kind is DistanceKind.EUCLIDEAN:
        out = np.empty((A.shape[0], B.shape[0]))
        for s in range(0, A.shape[0], chunk):
            diff = A[s : s + chunk, None, :] - B[None, :, :]
            out[s : s + chunk] = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        return out
    if np.any(A < 0) or np.any(B < 0):
        raise InvalidInputError("histogram distances need non-negative entries")
    if kind.uses_normalized:
        A = _normalize(A)
        B = _normalize(B)
    if kind is DistanceKind.JENSEN_SHANNON:
        A = _smooth(A, eps)
        B = _smooth(B, eps)
        logA, logB = np.log2(A), np.log2(B)
    out = np.empty((A.shape[0], B.shape[0]))
    for s in range(0, A.shape[0], chunk):
        a = A[s : s + chunk, None, :]
        if kind is DistanceKind.CHI_SQUARED:
            block = np.sum((a - B[None]) ** 2 / (a + B[None] + eps), axis=2)
        elif kind is DistanceKind.JENSEN_SHANNON:
            block = 0.5 * np.sum((a - B[None]) * (logA[s : s + chunk, None, :] - logB[None]), axis=2)
            block = np.maximum(block, 0.0)
        else:
            block = np.clip(1.0 - np.minimum(a, B[None]).sum(axis=2), 0.0, 1.0)
        out[s : s + chunk] = block
    return out

"""Comparison representations: DFT magnitudes, multilevel DWT, DTW and SAX bag-of-patterns."""

from __future__ import annotations

from dataclasses import dataclass, field
from statistics import NormalDist

import numba
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvalidInputError
from .signal import as_array, znormalize_rows
from .wavelet import dwt_multilevel


def dft_features(x, n_coeffs: int | None = None) -> np.ndarray:
    """Magnitudes of the first ``n_coeffs`` DFT bins, DC first.

    Defaults to all ``floor(n/2) + 1`` non-negative frequencies.
    """
    arr = as_array(x)
    n_max = arr.size // 2 + 1
    if n_coeffs is None:
        n_coeffs = n_max
    if not 1 <= n_coeffs <= n_max:
        raise InvalidInputError(f"n_coeffs must be in [1, {n_max}], got {n_coeffs}")
    return np.abs(np.fft.rfft(arr))[:n_coeffs]


def dwt_features(x, wavelet: str = "db2", levels: int = 4) -> np.ndarray:
    """Concatenation ``[cA_L, cD_L, ..., cD_1]`` of a multilevel decomposition."""
    return dwt_multilevel(as_array(x), wavelet, levels).concatenated()


# --- DTW ---------------------------------------------------------------------


@numba.njit(cache=True)
def _dtw(a, b):
    n, m = a.size, b.size
    prev = np.full(m + 1, np.inf)
    cur = np.empty(m + 1)
    prev[0] = 0.0
    for i in range(1, n + 1):
        cur[0] = np.inf
        ai = a[i - 1]
        for j in range(1, m + 1):
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = abs(ai - b[j - 1]) + best
        prev, cur = cur, prev
    return prev[m]


def dtw_distance(a, b) -> float:
    """Unconstrained DTW with local cost ``|a_i - b_j|``."""
    a = np.ascontiguousarray(as_array(a))
    b = np.ascontiguousarray(as_array(b))
    if a.size == 0 or b.size == 0:
        raise InvalidInputError("DTW needs non-empty sequences")
    return float(_dtw(a, b))


@numba.njit(cache=True)
def _dtw_matrix(A, a_len, B, b_len, symmetric):
    out = np.zeros((A.shape[0], B.shape[0]))
    for i in range(A.shape[0]):
        start = i + 1 if symmetric else 0
        for j in range(start, B.shape[0]):
            d = _dtw(A[i, : a_len[i]], B[j, : b_len[j]])
            out[i, j] = d
            if symmetric:
                out[j, i] = d
    return out


def _pack(seqs):
    arrs = [np.asarray(s, dtype=np.float64) for s in seqs]
    lens = np.array([a.size for a in arrs], dtype=np.int64)
    if np.any(lens == 0):
        raise InvalidInputError("DTW needs non-empty sequences")
    packed = np.zeros((len(arrs), lens.max()))
    for row, a in zip(packed, arrs):
        row[: a.size] = a
    return packed, lens


def dtw_matrix(A, B=None) -> np.ndarray:
    """Pairwise DTW distances between two collections (or within one)."""
    PA, la = _pack([as_array(s) for s in A])
    if B is None:
        return _dtw_matrix(PA, la, PA, la, True)
    PB, lb = _pack([as_array(s) for s in B])
    return _dtw_matrix(PA, la, PB, lb, False)


# --- SAX / bag-of-patterns -------------------------------------------------------


def gaussian_breakpoints(alphabet_size: int) -> np.ndarray:
    """Cut points splitting N(0, 1) into ``alphabet_size`` equiprobable regions."""
    if alphabet_size < 2:
        raise InvalidInputError(f"alphabet_size must be >= 2, got {alphabet_size}")
    nd = NormalDist()
    return np.array([nd.inv_cdf(i / alphabet_size) for i in range(1, alphabet_size)])


@dataclass(frozen=True)
class SaxConfig:
    alphabet_size: int = 4
    word_len: int = 6
    bop_window_len: int = 128
    numerosity_reduction: bool = False
    breakpoints: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.word_len < 1:
            raise InvalidInputError(f"word_len must be positive, got {self.word_len}")
        if self.bop_window_len < self.word_len:
            raise InvalidInputError(
                f"bop_window_len {self.bop_window_len} is shorter than word_len {self.word_len}"
            )
        bp = gaussian_breakpoints(self.alphabet_size)
        bp.setflags(write=False)
        object.__setattr__(self, "breakpoints", bp)

    @property
    def n_words(self) -> int:
        return self.alphabet_size**self.word_len


def paa(x, n_frames: int) -> np.ndarray:
    """Piecewise aggregate approximation along the last axis.

    Frame boundaries need not fall on sample boundaries; a straddling sample is
    split between frames in proportion to its overlap.
    """
    arr = np.asarray(x, dtype=np.float64)
    n = arr.shape[-1]
    if n_frames < 1 or n < n_frames:
        raise InvalidInputError(f"cannot reduce {n} samples to {n_frames} frames")
    if n % n_frames == 0:
        return arr.reshape(arr.shape[:-1] + (n_frames, n // n_frames)).mean(axis=-1)
    stretched = np.repeat(arr, n_frames, axis=-1)
    return stretched.reshape(arr.shape[:-1] + (n_frames, n)).mean(axis=-1)


def quantize(values, breakpoints) -> np.ndarray:
    """Symbol index of each value: the number of breakpoints at or below it."""
    return np.searchsorted(np.asarray(breakpoints), values, side="right")


def _sax_symbols(windows: np.ndarray, cfg: SaxConfig) -> np.ndarray:
    if windows.shape[-1] < cfg.word_len:
        raise InvalidInputError(
            f"window of length {windows.shape[-1]} is shorter than word_len {cfg.word_len}"
        )
    normed, _ = znormalize_rows(windows)
    return quantize(paa(normed, cfg.word_len), cfg.breakpoints)


def sax_word(window, cfg: SaxConfig) -> str:
    syms = _sax_symbols(as_array(window)[None, :], cfg)[0]
    return "".join(chr(ord("a") + int(s)) for s in syms)


def word_index(word: str, alphabet_size: int) -> int:
    idx = 0
    for ch in word:
        idx = idx * alphabet_size + (ord(ch) - ord("a"))
    return idx


@dataclass(frozen=True)
class BopHistogram:
    counts: np.ndarray
    total: int

    def __post_init__(self):
        if int(np.sum(self.counts)) != self.total:
            raise InvalidInputError("bag-of-patterns counts do not sum to total")


def bop_histogram(x, cfg: SaxConfig, stride: int = 1) -> BopHistogram:
    """Histogram of SAX words over all sliding windows, ``alphabet_size**word_len`` bins."""
    arr = as_array(x)
    if stride < 1:
        raise InvalidInputError(f"stride must be >= 1, got {stride}")
    if arr.size < cfg.bop_window_len:
        raise InvalidInputError(
            f"series length {arr.size} is below the bag-of-patterns window {cfg.bop_window_len}"
        )
    windows = sliding_window_view(arr, cfg.bop_window_len)[::stride]
    syms = _sax_symbols(windows, cfg)
    powers = cfg.alphabet_size ** np.arange(cfg.word_len - 1, -1, -1, dtype=np.int64)
    words = syms.astype(np.int64) @ powers
    if cfg.numerosity_reduction:
        keep = np.ones(words.size, dtype=bool)
        keep[1:] = words[1:] != words[:-1]
        words = words[keep]
    counts = np.bincount(words, minlength=cfg.n_words)
    return BopHistogram(counts=counts, total=int(words.size))

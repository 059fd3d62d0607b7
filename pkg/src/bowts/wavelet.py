"""Daubechies discrete wavelet transform (db1, db2, db3).

Boundaries use symmetric half-point extension, so a level applied to ``n``
samples with an ``f``-tap filter yields ``floor((n + f - 1) / 2)`` coefficients
per band. Convolution is direct; windows here are short.

All transforms operate along the last axis, so a 2-D stack of windows is
decomposed in one call.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import sqrt

import numpy as np

from .errors import InvalidInputError, UnsupportedWaveletError

BOUNDARY_MODE = "symmetric"


def _db3_scaling() -> list[float]:
    r10 = sqrt(10.0)
    s = sqrt(5.0 + 2.0 * r10)
    raw = [
        1.0 + r10 + s,
        5.0 + r10 + 3.0 * s,
        10.0 - 2.0 * r10 + 2.0 * s,
        10.0 - 2.0 * r10 - 2.0 * s,
        5.0 + r10 - 3.0 * s,
        1.0 + r10 - s,
    ]
    return [v / (16.0 * sqrt(2.0)) for v in raw]


def _scaling_coefficients(name: str) -> list[float]:
    if name == "db1":
        return [1.0 / sqrt(2.0)] * 2
    if name == "db2":
        r3 = sqrt(3.0)
        d = 4.0 * sqrt(2.0)
        return [(1 + r3) / d, (3 + r3) / d, (3 - r3) / d, (1 - r3) / d]
    if name == "db3":
        return _db3_scaling()
    raise UnsupportedWaveletError(f"unsupported wavelet {name!r}; choose db1, db2 or db3")


@dataclass(frozen=True)
class WaveletFilter:
    """Orthonormal Daubechies filter pair in synthesis order.

    ``highpass[k] = (-1)**k * lowpass[f-1-k]``. Analysis uses the reversed taps.
    """

    name: str
    lowpass: np.ndarray
    highpass: np.ndarray = field(repr=False)

    def __post_init__(self):
        lo = np.asarray(self.lowpass, dtype=np.float64)
        hi = np.asarray(self.highpass, dtype=np.float64)
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lowpass", lo)
        object.__setattr__(self, "highpass", hi)
        _check_filter(self)

    @property
    def length(self) -> int:
        return self.lowpass.size

    @property
    def dec_lo(self) -> np.ndarray:
        return self.lowpass[::-1]

    @property
    def dec_hi(self) -> np.ndarray:
        return self.highpass[::-1]


def _check_filter(w: WaveletFilter, tol: float = 1e-10) -> None:
    lo, hi = w.lowpass, w.highpass
    f = lo.size
    if f % 2 or hi.size != f:
        raise InvalidInputError(f"{w.name}: filter lengths must be equal and even")
    if abs(lo.sum() - sqrt(2.0)) > tol:
        raise InvalidInputError(f"{w.name}: lowpass does not sum to sqrt(2)")
    if abs(hi.sum()) > tol:
        raise InvalidInputError(f"{w.name}: highpass does not sum to zero")
    # orthonormality of even shifts, for both bands and across them
    for shift in range(0, f, 2):
        target = 1.0 if shift == 0 else 0.0
        if abs(np.dot(lo[: f - shift], lo[shift:]) - target) > tol:
            raise InvalidInputError(f"{w.name}: lowpass not orthonormal at shift {shift}")
        if abs(np.dot(hi[: f - shift], hi[shift:]) - target) > tol:
            raise InvalidInputError(f"{w.name}: highpass not orthonormal at shift {shift}")
        if abs(np.dot(lo[: f - shift], hi[shift:])) > tol or abs(
            np.dot(hi[: f - shift], lo[shift:])
        ) > tol:
            raise InvalidInputError(f"{w.name}: bands not orthogonal at shift {shift}")


@lru_cache(maxsize=None)
def wavelet_filters(name: str) -> WaveletFilter:
    """Return the validated filter pair for ``db1``, ``db2`` or ``db3``."""
    lo = np.array(_scaling_coefficients(name))
    f = lo.size
    hi = np.array([(-1.0) ** k * lo[f - 1 - k] for k in range(f)])
    return WaveletFilter(name=name, lowpass=lo, highpass=hi)


def _as_filter(wavelet) -> WaveletFilter:
    return wavelet if isinstance(wavelet, WaveletFilter) else wavelet_filters(wavelet)


def coeff_length(n: int, filter_len: int) -> int:
    """Per-band output length of one decomposition level."""
    return (n + filter_len - 1) // 2


def dwt_single(x, wavelet) -> tuple[np.ndarray, np.ndarray]:
    """One decomposition level along the last axis.

    Returns ``(approx, detail)``, each of length ``coeff_length(n, f)``.
    """
    w = _as_filter(wavelet)
    arr = np.asarray(x, dtype=np.float64)
    f = w.length
    n = arr.shape[-1] if arr.ndim else 0
    if n < f:
        raise InvalidInputError(f"input length {n} is shorter than the {w.name} filter ({f})")
    pad = [(0, 0)] * (arr.ndim - 1) + [(f - 1, f - 1)]
    ext = np.pad(arr, pad, mode="symmetric")
    n_out = coeff_length(n, f)
    stop = 2 * n_out - 1
    approx = np.zeros(arr.shape[:-1] + (n_out,))
    detail = np.zeros_like(approx)
    # out[o] = sum_j taps[j] * ext[2o + f - j]
    for j, (a, d) in enumerate(zip(w.dec_lo, w.dec_hi)):
        chunk = ext[..., f - j : f - j + stop : 2]
        approx += a * chunk
        detail += d * chunk
    return approx, detail


def idwt_single(approx, detail, wavelet, orig_len: int) -> np.ndarray:
    """Invert :func:`dwt_single`, returning ``orig_len`` samples."""
    w = _as_filter(wavelet)
    a = np.asarray(approx, dtype=np.float64)
    d = np.asarray(detail, dtype=np.float64)
    if a.shape != d.shape:
        raise InvalidInputError(f"approx/detail shapes differ: {a.shape} vs {d.shape}")
    f = w.length
    n_coef = a.shape[-1]
    if orig_len < 1 or coeff_length(orig_len, f) != n_coef:
        raise InvalidInputError(
            f"orig_len {orig_len} is inconsistent with {n_coef} coefficients for {w.name}"
        )
    up_shape = a.shape[:-1] + (2 * n_coef + f,)
    up_a = np.zeros(up_shape)
    up_d = np.zeros(up_shape)
    up_a[..., 1 : 2 * n_coef : 2] = a
    up_d[..., 1 : 2 * n_coef : 2] = d
    out = np.zeros(a.shape[:-1] + (orig_len,))
    for j, (ga, gd) in enumerate(zip(w.dec_lo, w.dec_hi)):
        out += ga * up_a[..., j : j + orig_len] + gd * up_d[..., j : j + orig_len]
    return out


@dataclass(frozen=True)
class DwtCoefficients:
    """Multilevel decomposition; ``details`` runs coarsest first, finest last."""

    approx: np.ndarray
    details: list
    levels: int
    wavelet: str
    boundary_mode: str = BOUNDARY_MODE

    def concatenated(self) -> np.ndarray:
        return np.concatenate([self.approx, *self.details], axis=-1)


def dwt_multilevel(x, wavelet, levels: int) -> DwtCoefficients:
    w = _as_filter(wavelet)
    if levels < 1:
        raise InvalidInputError(f"levels must be positive, got {levels}")
    current = np.asarray(x, dtype=np.float64)
    n = current.shape[-1]
    for level in range(levels):
        if n < w.length:
            raise InvalidInputError(
                f"{levels} levels of {w.name} need more samples: level {level + 1} "
                f"would see only {n}"
            )
        n = coeff_length(n, w.length)
    details = []
    for _ in range(levels):
        current, det = dwt_single(current, w)
        details.append(det)
    return DwtCoefficients(
        approx=current, details=details[::-1], levels=levels, wavelet=w.name
    )


def idwt_multilevel(coeffs: DwtCoefficients, orig_len: int) -> np.ndarray:
    w = wavelet_filters(coeffs.wavelet)
    lengths = [orig_len]
    for _ in range(coeffs.levels - 1):
        lengths.append(coeff_length(lengths[-1], w.length))
    current = coeffs.approx
    for det, n in zip(coeffs.details, reversed(lengths)):
        current = idwt_single(current, det, w, n)
    return current

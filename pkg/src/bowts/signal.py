"""Time-series value type and signal-level transforms.

Every function accepts either a :class:`TimeSeries` or a plain 1-D array-like.
When a ``TimeSeries`` goes in, a ``TimeSeries`` with the same label and id
comes out; otherwise a float64 ``ndarray`` is returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Optional, Union

import numpy as np

from .errors import InvalidInputError

# A window counts as flat when its std is below this fraction of its peak magnitude.
DEGENERATE_RTOL = 1e-12


@dataclass(frozen=True)
class TimeSeries:
    """A finite, variable-length real sequence with optional label and id."""

    values: np.ndarray
    label: Optional[Hashable] = None
    id: Optional[str] = field(default=None)

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise InvalidInputError(f"time series must be 1-D, got shape {arr.shape}")
        if arr.size < 1:
            raise InvalidInputError("time series must contain at least one sample")
        if not np.all(np.isfinite(arr)):
            bad = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise InvalidInputError(f"non-finite sample at index {bad}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size

    def with_values(self, values) -> "TimeSeries":
        return TimeSeries(values, label=self.label, id=self.id)


SeriesLike = Union[TimeSeries, np.ndarray, list, tuple]


def as_array(x: SeriesLike) -> np.ndarray:
    if isinstance(x, TimeSeries):
        return x.values
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidInputError(f"expected a 1-D sequence, got shape {arr.shape}")
    return arr


def _rewrap(template: SeriesLike, values: np.ndarray):
    if isinstance(template, TimeSeries):
        return template.with_values(values)
    return values


def _is_flat(std: np.ndarray, peak: np.ndarray) -> np.ndarray:
    return std <= DEGENERATE_RTOL * np.maximum(peak, 1.0)


def znormalize(x: SeriesLike, *, return_degenerate: bool = False):
    """Shift to zero mean and scale to unit population standard deviation.

    Flat input maps to all zeros instead of raising. Pass
    ``return_degenerate=True`` to also get a bool telling whether that happened.
    """
    arr = as_array(x)
    if arr.size < 2:
        raise InvalidInputError(f"z-normalization needs at least 2 samples, got {arr.size}")
    mean = arr.mean()
    std = arr.std()
    degenerate = bool(_is_flat(std, np.abs(arr).max()))
    out = np.zeros_like(arr) if degenerate else (arr - mean) / std
    out = _rewrap(x, out)
    return (out, degenerate) if return_degenerate else out


def znormalize_rows(windows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise :func:`znormalize` for a 2-D stack of windows.

    Returns the normalized stack and a boolean mask of flat rows.
    """
    w = np.asarray(windows, dtype=np.float64)
    if w.ndim != 2 or w.shape[1] < 2:
        raise InvalidInputError(f"expected (n, >=2) window stack, got shape {w.shape}")
    mean = w.mean(axis=1, keepdims=True)
    std = w.std(axis=1, keepdims=True)
    flat = _is_flat(std, np.abs(w).max(axis=1, keepdims=True))
    out = np.where(flat, 0.0, (w - mean) / np.where(flat, 1.0, std))
    return out, flat[:, 0]


def signal_power(x: SeriesLike) -> float:
    """Mean squared deviation from the mean."""
    arr = as_array(x)
    return float(np.mean((arr - arr.mean()) ** 2))


def add_awgn(x: SeriesLike, snr_db: float, rng) -> SeriesLike:
    """Add zero-mean white Gaussian noise at the requested SNR in decibels.

    ``rng`` is a ``numpy.random.Generator`` or anything accepted by
    ``numpy.random.default_rng``. The noise variance is ``P / 10**(snr_db/10)``
    where ``P`` is :func:`signal_power` of the input.
    """
    arr = as_array(x)
    if arr.size < 2:
        raise InvalidInputError("noise injection needs at least 2 samples")
    if not np.isfinite(snr_db):
        raise InvalidInputError(f"snr_db must be finite, got {snr_db}")
    power = signal_power(arr)
    if power <= 0.0:
        raise InvalidInputError("cannot set an SNR for a zero-power (constant) signal")
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    sigma = np.sqrt(power / 10.0 ** (snr_db / 10.0))
    return _rewrap(x, arr + gen.normal(0.0, sigma, size=arr.size))


def resize_linear(x: SeriesLike, new_len: int) -> SeriesLike:
    """Piecewise-linear resampling onto ``new_len`` uniformly spaced points.

    Both endpoints are kept exactly.
    """
    arr = as_array(x)
    if new_len < 2:
        raise InvalidInputError(f"new_len must be >= 2, got {new_len}")
    if arr.size < 2:
        raise InvalidInputError("resizing needs at least 2 input samples")
    if new_len == arr.size:
        return _rewrap(x, arr.copy())
    grid = np.linspace(0.0, arr.size - 1, new_len)
    return _rewrap(x, np.interp(grid, np.arange(arr.size), arr))


def downsample(x: SeriesLike, target_len: int) -> SeriesLike:
    """Keep ``target_len`` samples at indices ``floor(i * n / target_len)``.

    No anti-alias filtering is applied.
    """
    arr = as_array(x)
    if target_len < 1:
        raise InvalidInputError(f"target_len must be positive, got {target_len}")
    if target_len > arr.size:
        raise InvalidInputError(
            f"target_len {target_len} exceeds series length {arr.size}"
        )
    idx = (np.arange(target_len, dtype=np.int64) * arr.size) // target_len
    return _rewrap(x, arr[idx])

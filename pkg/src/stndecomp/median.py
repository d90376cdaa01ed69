"""Median filtering of magnitude spectrograms and tonalness extraction.

Horizontal (time-direction) filtering enhances sinusoidal ridges, vertical
(frequency-direction) filtering enhances transient ridges.  Their ratio per
bin gives the tonalness membership in [0, 1].
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class MedianConfig:
    """Median filter lengths in frames (horizontal) and bins (vertical)."""

    horizontal_length: int = 17
    vertical_length: int = 17

    def __post_init__(self):
        if self.horizontal_length < 2:
            raise ParameterError(f"horizontal_length must be >= 2, got {self.horizontal_length}")
        if self.vertical_length < 2:
            raise ParameterError(f"vertical_length must be >= 2, got {self.vertical_length}")


@dataclass
class TonalnessMaps:
    """Per-bin tonalness and transientness memberships; they sum to one."""

    tonalness: np.ndarray
    transientness: np.ndarray


def _median_filter_axis(mag: np.ndarray, length: int, axis: int) -> np.ndarray:
    if length < 2:
        raise ParameterError(f"median filter length must be >= 2, got {length}")
    mag = np.asarray(mag, dtype=float)
    if mag.ndim != 2:
        raise ParameterError(f"expected a 2-D magnitude matrix, got shape {mag.shape}")
    if np.any(mag < 0):
        raise ParameterError("magnitude matrix must be non-negative")

    # Window for position m spans m - (length-1)//2 .. m + length//2; positions
    # outside the matrix contribute zeros.  An even-length median is the mean
    # of the two central order statistics, which np.median provides.
    before = (length - 1) // 2
    after = length // 2
    pad = [(0, 0), (0, 0)]
    pad[axis] = (before, after)
    padded = np.pad(mag, pad, mode="constant")
    windows = np.lib.stride_tricks.sliding_window_view(padded, length, axis=axis)
    return np.median(windows, axis=-1)


def median_filter_h(mag: np.ndarray, length: int) -> np.ndarray:
    """Median filter along the time (frame) direction."""
    return _median_filter_axis(mag, length, axis=1)


def median_filter_v(mag: np.ndarray, length: int) -> np.ndarray:
    """Median filter along the frequency (bin) direction."""
    return _median_filter_axis(mag, length, axis=0)


def tonalness(mag: np.ndarray, cfg: MedianConfig = MedianConfig()) -> TonalnessMaps:
    """Tonalness/transientness maps from horizontally and vertically filtered magnitudes.

    Where both filtered magnitudes vanish there is no evidence for either
    class, so both memberships are set to 0.5 (maximal noisiness).
    """
    enhanced_h = median_filter_h(mag, cfg.horizontal_length)
    enhanced_v = median_filter_v(mag, cfg.vertical_length)
    total = enhanced_h + enhanced_v
    tonal = np.full_like(total, 0.5)
    np.divide(enhanced_h, total, out=tonal, where=total > 0)
    return TonalnessMaps(tonalness=tonal, transientness=1.0 - tonal)

"""Spectral mask families for sines/transients/noise separation.

Every family returns a mask triple that sums to unity per bin, so the
masked components reconstruct the input exactly when inverted with the
same transform.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .median import TonalnessMaps
from .spectral import Spectrogram

DEFAULT_HPR_BETA = 2.5


@dataclass(frozen=True)
class TransitionBounds:
    """Upper (dominant-region) and lower (cutoff-region) tonalness bounds."""

    upper: float
    lower: float

    def __post_init__(self):
        if not 0.5 <= self.lower:
            raise ParameterError(
                f"lower bound must be >= 0.5 to keep the noise mask non-negative, got {self.lower}"
            )
        if not self.lower < self.upper <= 1.0:
            raise ParameterError(
                f"bounds must satisfy lower < upper <= 1, got ({self.upper}, {self.lower})"
            )


# Quasi-optimal transition bounds for the two decomposition stages.
STAGE1_BOUNDS = TransitionBounds(upper=0.8, lower=0.7)
STAGE2_BOUNDS = TransitionBounds(upper=0.85, lower=0.75)


@dataclass
class MaskSet:
    """Real-valued masks for sines, transients, and noise."""

    sines: np.ndarray
    transients: np.ndarray
    noise: np.ndarray

    def __post_init__(self):
        if not self.sines.shape == self.transients.shape == self.noise.shape:
            raise ParameterError("mask matrices must share one shape")


def _check_maps(maps: TonalnessMaps) -> tuple[np.ndarray, np.ndarray]:
    tonal = np.asarray(maps.tonalness, dtype=float)
    transient = np.asarray(maps.transientness, dtype=float)
    if tonal.shape != transient.shape:
        raise ParameterError("tonalness and transientness shapes differ")
    return tonal, transient


def hard_masks(maps: TonalnessMaps, beta: float = DEFAULT_HPR_BETA) -> MaskSet:
    """Binary masks with a separation factor on the tonalness ratio.

    The ratio tests are evaluated multiplicatively (R_s > beta * R_t) to stay
    defined where a membership is zero; ties fall into the noise class.
    """
    if not beta > 1:
        raise ParameterError(f"separation factor must exceed 1, got {beta}")
    tonal, transient = _check_maps(maps)
    sines = (tonal > beta * transient).astype(float)
    transients = (transient > beta * tonal).astype(float)
    return MaskSet(sines=sines, transients=transients, noise=1.0 - sines - transients)


def fuzzy_masks(maps: TonalnessMaps) -> MaskSet:
    """Soft masks from the fuzzy noisiness membership 1 - sqrt(|R_s - R_t|)."""
    tonal, transient = _check_maps(maps)
    noisiness = 1.0 - np.sqrt(np.abs(tonal - transient))
    # Analytically non-negative; the clip only absorbs rounding noise.
    sines = np.maximum(tonal - 0.5 * noisiness, 0.0)
    transients = np.maximum(transient - 0.5 * noisiness, 0.0)
    return MaskSet(sines=sines, transients=transients, noise=1.0 - sines - transients)


def prototype_masks(maps: TonalnessMaps) -> MaskSet:
    """Raised-cosine wings centered at tonalness 1/2, one per class."""
    tonal, _ = _check_maps(maps)
    sines = np.where(tonal >= 0.5, np.sin(np.pi * (tonal + 0.5)) ** 2, 0.0)
    transients = np.where(tonal <= 0.5, np.sin(np.pi * (tonal - 0.5)) ** 2, 0.0)
    return MaskSet(sines=sines, transients=transients, noise=1.0 - sines - transients)


def transition_curve(a, bounds: TransitionBounds) -> np.ndarray:
    """Membership curve: 0 below the lower bound, 1 above the upper bound,
    a raised-cosine quarter-wave in between."""
    a = np.asarray(a, dtype=float)
    t = np.clip((a - bounds.lower) / (bounds.upper - bounds.lower), 0.0, 1.0)
    out = np.sin(0.5 * np.pi * t) ** 2
    return np.where(a >= bounds.upper, 1.0, out)


def enhanced_masks(maps: TonalnessMaps, bounds: TransitionBounds) -> MaskSet:
    """Soft masks with dominant and cutoff regions per class.

    With the lower bound at or above 0.5 the sine and transient masks cannot
    both be active, which keeps the complementary noise mask non-negative.
    """
    tonal, transient = _check_maps(maps)
    sines = transition_curve(tonal, bounds)
    transients = transition_curve(transient, bounds)
    return MaskSet(sines=sines, transients=transients, noise=1.0 - sines - transients)


def apply_masks(spec: Spectrogram, masks: MaskSet) -> tuple[Spectrogram, Spectrogram, Spectrogram]:
    """Element-wise product of the spectrogram with each mask."""
    if masks.sines.shape != spec.data.shape:
        raise ParameterError(
            f"mask shape {masks.sines.shape} does not match spectrogram {spec.data.shape}"
        )
    return (
        spec.with_data(spec.data * masks.sines),
        spec.with_data(spec.data * masks.transients),
        spec.with_data(spec.data * masks.noise),
    )

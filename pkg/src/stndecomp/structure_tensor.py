"""Structure-tensor features of the spectrogram and the resulting hard masks.

Local orientation and anisotropy are computed from the smoothed outer
product of the log-magnitude gradients.  The orientation angle is converted
to a physical frequency change rate, which classifies bins as sinusoidal
(near-horizontal structure) or transient (near-vertical structure).
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ParameterError
from .masks import MaskSet
from .spectral import Spectrogram


@dataclass(frozen=True)
class StConfig:
    """Thresholds and smoothing scales for the structure-tensor analysis."""

    anisotropy_threshold: float = 0.2
    rate_threshold_sines: float = 10_000.0
    rate_threshold_transients: float = 10_000.0
    smoothing_sigma_time: float = 2.0
    smoothing_sigma_freq: float = 2.0
    log_floor: float = 1e-10

    def __post_init__(self):
        if not 0 <= self.anisotropy_threshold < 1:
            raise ParameterError(f"anisotropy threshold must be in [0, 1), got {self.anisotropy_threshold}")
        if not 0 < self.rate_threshold_sines <= self.rate_threshold_transients:
            raise ParameterError(
                "rate thresholds must satisfy 0 < sines <= transients, got "
                f"({self.rate_threshold_sines}, {self.rate_threshold_transients})"
            )
        if self.smoothing_sigma_time <= 0 or self.smoothing_sigma_freq <= 0:
            raise ParameterError("smoothing sigmas must be positive")
        if self.log_floor <= 0:
            raise ParameterError("log floor must be positive")


@dataclass
class StFeatures:
    """Orientation angle (radians from the time axis), anisotropy in [0, 1],
    and frequency change rate in Hz/s, all per spectrogram bin."""

    orientation: np.ndarray
    anisotropy: np.ndarray
    rate: np.ndarray


def st_features(spec: Spectrogram, cfg: StConfig = StConfig()) -> StFeatures:
    """Eigenanalysis of the smoothed gradient tensor of the log spectrogram."""
    if spec.data.shape[0] < 3 or spec.data.shape[1] < 3:
        raise ParameterError(
            f"spectrogram too small for gradient analysis, shape {spec.data.shape}"
        )
    log_mag = 20.0 * np.log10(np.abs(spec.data) + cfg.log_floor)

    # Axis 0 is frequency, axis 1 is time; central differences inside,
    # one-sided at the borders.
    d_freq = np.gradient(log_mag, axis=0)
    d_time = np.gradient(log_mag, axis=1)

    sigma = (cfg.smoothing_sigma_freq, cfg.smoothing_sigma_time)
    j_tt = ndimage.gaussian_filter(d_time * d_time, sigma, truncate=3.0)
    j_tf = ndimage.gaussian_filter(d_time * d_freq, sigma, truncate=3.0)
    j_ff = ndimage.gaussian_filter(d_freq * d_freq, sigma, truncate=3.0)

    trace = j_tt + j_ff
    disc = np.sqrt(((j_tt - j_ff) * 0.5) ** 2 + j_tf**2)
    anisotropy = np.zeros_like(trace)
    np.divide(2.0 * disc, trace, out=anisotropy, where=trace > 0)
    anisotropy = np.clip(anisotropy, 0.0, 1.0) ** 2

    # Dominant gradient direction from the time axis; the structure runs
    # perpendicular to it.  Wrap into (-pi/2, pi/2].
    theta = 0.5 * np.arctan2(2.0 * j_tf, j_tt - j_ff)
    alpha = theta - 0.5 * np.pi
    alpha = np.where(alpha <= -0.5 * np.pi, alpha + np.pi, alpha)

    config = spec.config
    rate_scale = config.sample_rate**2 / (config.hop * config.window_length)
    rate = rate_scale * np.tan(alpha)
    return StFeatures(orientation=alpha, anisotropy=anisotropy, rate=rate)


def structure_tensor_masks(feat: StFeatures, cfg: StConfig = StConfig()) -> MaskSet:
    """Hard masks from the rate and anisotropy thresholds.

    A bin is sinusoidal when its rate magnitude is small and the local
    orientation is coherent; transient when the rate magnitude is large and
    coherent; noise otherwise.  When the two rate thresholds coincide, the
    sine test wins ties so the masks stay a partition.
    """
    coherent = feat.anisotropy > cfg.anisotropy_threshold
    abs_rate = np.abs(feat.rate)
    sines = (abs_rate <= cfg.rate_threshold_sines) & coherent
    transients = (abs_rate >= cfg.rate_threshold_transients) & coherent & ~sines
    sines = sines.astype(float)
    transients = transients.astype(float)
    return MaskSet(sines=sines, transients=transients, noise=1.0 - sines - transients)

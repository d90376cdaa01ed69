"""Forward/inverse STFT with weighted overlap-add synthesis.

Analysis and synthesis both use the periodic raised-cosine (Hann) window.
The inverse normalizes by the exact per-sample sum of squared windows, so
the round trip is an identity for every valid configuration, and masked
components obtained from the same spectrogram sum back to the input.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

WINDOW_KINDS = ("raised_cosine",)


def raised_cosine(length: int) -> np.ndarray:
    """Periodic raised-cosine (Hann) window, sin^2(pi n / L)."""
    n = np.arange(length)
    return np.sin(np.pi * n / length) ** 2


@dataclass(frozen=True)
class StftConfig:
    """Analysis parameters: window length, hop, sample rate, window kind."""

    window_length: int = 2048
    hop: int = 512
    sample_rate: float = 44100.0
    window: str = "raised_cosine"

    def __post_init__(self):
        L, H = self.window_length, self.hop
        if L <= 0 or L % 2 != 0:
            raise ParameterError(f"window_length must be a positive even integer, got {L}")
        if H <= 0 or H > L // 2:
            raise ParameterError(f"hop must satisfy 0 < hop <= window_length/2, got {H}")
        if L % H != 0:
            raise ParameterError(f"hop must divide window_length, got L={L}, H={H}")
        if not self.sample_rate > 0:
            raise ParameterError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.window not in WINDOW_KINDS:
            raise ParameterError(f"unknown window kind {self.window!r}")

    @property
    def num_bins(self) -> int:
        return self.window_length // 2 + 1

    def window_samples(self) -> np.ndarray:
        return raised_cosine(self.window_length)


@dataclass
class Spectrogram:
    """One-sided complex STFT matrix (num_bins x num_frames) plus provenance."""

    data: np.ndarray
    config: StftConfig
    original_length: int

    def __post_init__(self):
        if self.data.ndim != 2 or self.data.shape[0] != self.config.num_bins:
            raise ParameterError(
                f"spectrogram shape {self.data.shape} inconsistent with "
                f"window length {self.config.window_length}"
            )

    @property
    def num_frames(self) -> int:
        return self.data.shape[1]

    def magnitude(self) -> np.ndarray:
        return np.abs(self.data)

    def with_data(self, data: np.ndarray) -> "Spectrogram":
        return Spectrogram(data=data, config=self.config, original_length=self.original_length)


def _num_frames(n_samples: int, hop: int) -> int:
    # Frame starts at every hop of the front-padded signal; one extra frame
    # guarantees the final samples are covered by a full analysis window.
    return int(np.ceil(n_samples / hop)) + 1


def stft(signal, config: StftConfig) -> Spectrogram:
    """Short-time Fourier transform of a real signal.

    The signal is zero-padded by half a window on both ends so every input
    sample lies under at least one full analysis window.
    """
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1:
        raise ParameterError(f"signal must be one-dimensional, got shape {x.shape}")
    if x.size == 0:
        raise ParameterError("signal is empty")
    if not np.all(np.isfinite(x)):
        raise ParameterError("signal contains non-finite values")

    L, H = config.window_length, config.hop
    n_frames = _num_frames(x.size, H)
    padded = np.zeros((n_frames - 1) * H + L)
    padded[L // 2 : L // 2 + x.size] = x

    frames = np.lib.stride_tricks.sliding_window_view(padded, L)[::H]
    spec = np.fft.rfft(frames * config.window_samples(), axis=1)
    return Spectrogram(data=spec.T.copy(), config=config, original_length=x.size)


def istft(spec: Spectrogram) -> np.ndarray:
    """Inverse STFT via windowed overlap-add.

    Normalizes by the accumulated squared synthesis window per sample, then
    trims the zero-padding so the output length matches the analyzed signal.
    """
    config = spec.config
    L, H = config.window_length, config.hop
    w = config.window_samples()

    frames = np.fft.irfft(spec.data.T, n=L, axis=1) * w
    n_frames = frames.shape[0]
    out = np.zeros((n_frames - 1) * H + L)
    den = np.zeros_like(out)
    w2 = w * w
    for m in range(n_frames):
        start = m * H
        out[start : start + L] += frames[m]
        den[start : start + L] += w2

    lo = L // 2
    hi = lo + spec.original_length
    den_used = den[lo:hi]
    if den_used.min() <= 1e-12:
        raise ParameterError("overlap-add window sum vanishes; cannot invert this configuration")
    return out[lo:hi] / den_used


def overlap_add_profile(window_length: int, hop: int) -> np.ndarray:
    """Steady-state sum of squared shifted windows over one hop period.

    Accepts raw (length, hop) so hops that do not divide the window length
    can be diagnosed as well.  A constant profile means masked components
    carry a uniform synthesis weight; the inverse transform itself remains
    exact regardless, thanks to per-sample normalization.
    """
    if window_length <= 0 or hop <= 0 or hop > window_length:
        raise ParameterError(f"invalid window/hop pair ({window_length}, {hop})")
    w2 = raised_cosine(window_length) ** 2
    n = np.arange(hop)
    profile = np.zeros(hop)
    for k in range(int(np.ceil(window_length / hop))):
        idx = n + k * hop
        valid = idx < window_length
        profile[valid] += w2[idx[valid]]
    return profile


def satisfies_overlap_add(window_length: int, hop: int, tol: float = 1e-10) -> bool:
    """True when the squared-window overlap-add profile is constant."""
    profile = overlap_add_profile(window_length, hop)
    return float(profile.max() - profile.min()) < tol

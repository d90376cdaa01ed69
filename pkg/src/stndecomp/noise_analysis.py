"""Empirical tonalness distribution of pure noise.

The histogram of per-bin tonalness over many white-noise instances shows
where noise mass lives on the tonalness axis, which motivates the placement
of the mask transition regions.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .median import MedianConfig, tonalness
from .spectral import StftConfig, stft


@dataclass
class TonalnessHistogram:
    """Normalized tonalness histogram over [0, 1]."""

    bin_edges: np.ndarray
    normalized_counts: np.ndarray
    window_length: int
    instance_count: int

    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    def peak_bin(self) -> int:
        return int(np.argmax(self.normalized_counts))

    def mass_in(self, lo: float, hi: float) -> float:
        centers = self.bin_centers()
        sel = (centers >= lo) & (centers <= hi)
        return float(self.normalized_counts[sel].sum())


def tonalness_values(
    signal,
    stft_cfg: StftConfig,
    median_cfg: MedianConfig = MedianConfig(),
) -> np.ndarray:
    """Flattened per-bin tonalness of one signal."""
    spec = stft(signal, stft_cfg)
    return tonalness(spec.magnitude(), median_cfg).tonalness.ravel()


def noise_tonalness_histogram(
    instances: int = 100,
    length: float = 1.0,
    stft_cfg: StftConfig = StftConfig(window_length=8192, hop=2048),
    median_cfg: MedianConfig = MedianConfig(),
    bins: int = 100,
    seed: int = 0,
) -> TonalnessHistogram:
    """Accumulate the tonalness histogram of seeded white-noise instances."""
    if instances < 1:
        raise ParameterError(f"instances must be >= 1, got {instances}")
    rng = np.random.default_rng(seed)
    n = int(round(length * stft_cfg.sample_rate))
    edges = np.linspace(0.0, 1.0, bins + 1)
    counts = np.zeros(bins)
    for _ in range(instances):
        values = tonalness_values(rng.standard_normal(n), stft_cfg, median_cfg)
        hist, _ = np.histogram(values, bins=edges)
        counts += hist
    return TonalnessHistogram(
        bin_edges=edges,
        normalized_counts=counts / counts.sum(),
        window_length=stft_cfg.window_length,
        instance_count=instances,
    )

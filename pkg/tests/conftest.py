"""Shared helpers for the test suite."""

import numpy as np
import pytest


def rel_error(approx, exact):
    """Relative L2 error; falls back to absolute norm for zero references."""
    approx = np.asarray(approx, dtype=float)
    exact = np.asarray(exact, dtype=float)
    denom = np.linalg.norm(exact)
    if denom == 0:
        return float(np.linalg.norm(approx))
    return float(np.linalg.norm(approx - exact) / denom)


def faded_tone(freq, duration, sample_rate=44100.0, fade=0.05, amplitude=1.0):
    """Steady sinusoid with raised-cosine fades so onset/offset clicks do not
    register as genuine transients."""
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    x = amplitude * np.sin(2 * np.pi * freq * t)
    n_fade = int(round(fade * sample_rate))
    if n_fade > 0:
        ramp = np.sin(0.5 * np.pi * np.arange(n_fade) / n_fade) ** 2
        x[:n_fade] *= ramp
        x[-n_fade:] *= ramp[::-1]
    return x


def energy_shares(components):
    """Fraction of total output energy per component (sines, transients, noise)."""
    energies = np.array(
        [np.sum(components.sines**2), np.sum(components.transients**2), np.sum(components.noise**2)]
    )
    return energies / energies.sum()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

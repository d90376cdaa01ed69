"""Transient-preserving time-scale modification.

Sines go through a phase vocoder with identity phase locking, noise is
resynthesized with random phases, and detected transient segments are
copied unmodified to their repositioned anchors on the stretched axis.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy import ndimage

from .decompose import DecompositionPlan, StnComponents, decompose, default_plan
from .errors import ParameterError
from .spectral import Spectrogram, StftConfig, stft


@dataclass(frozen=True)
class TransientDetectConfig:
    """Energy-envelope onset detection parameters."""

    threshold_db: float = 12.0
    min_separation_ms: float = 50.0
    pre_pad_ms: float = 5.0
    post_pad_ms: float = 20.0
    envelope_ms: float = 2.0
    # The floor estimate never drops further than this below the envelope
    # peak, so numerical leakage in an otherwise silent component cannot
    # register as events.
    max_floor_drop_db: float = 40.0


@dataclass
class TransientEvent:
    """Sample span of one transient in input time, with its energy peak."""

    start: int
    end: int
    anchor: int


@dataclass
class TsmRequest:
    factor: float
    plan: Optional[DecompositionPlan] = None
    pv_stft: Optional[StftConfig] = None
    detect: TransientDetectConfig = TransientDetectConfig()
    seed: int = 0
    fade_ms: float = 5.0

    def __post_init__(self):
        if not self.factor > 0:
            raise ParameterError(f"stretch factor must be positive, got {self.factor}")


def _principal(x: np.ndarray) -> np.ndarray:
    return x - 2 * np.pi * np.round(x / (2 * np.pi))


def _frame_peaks(mag: np.ndarray) -> np.ndarray:
    """Indices of local maxima over a three-bin neighborhood."""
    interior = (mag[1:-1] > mag[:-2]) & (mag[1:-1] >= mag[2:])
    return np.flatnonzero(interior) + 1


def _overlap_add(spectra: np.ndarray, config: StftConfig, hop_s: int, coherent: bool) -> np.ndarray:
    """Windowed overlap-add of synthesis frames at an arbitrary hop.

    Coherent material is normalized by the summed squared window; incoherent
    (random-phase) material by its square root times the window RMS, which
    preserves the variance of stationary signals at any hop.
    """
    L = config.window_length
    w = config.window_samples()
    frames = np.fft.irfft(spectra.T, n=L, axis=1) * w
    n_frames = frames.shape[0]
    out = np.zeros((n_frames - 1) * hop_s + L)
    den = np.zeros_like(out)
    w2 = w * w
    for m in range(n_frames):
        start = m * hop_s
        out[start : start + L] += frames[m]
        den[start : start + L] += w2
    if coherent:
        norm = np.maximum(den, 1e-12)
    else:
        norm = np.sqrt(np.maximum(den, 1e-12) * np.mean(w2))
    return out / norm


def _trim_stretched(raw: np.ndarray, window_length: int, out_len: int) -> np.ndarray:
    lo = window_length // 2
    out = np.zeros(out_len)
    avail = min(out_len, raw.size - lo)
    out[:avail] = raw[lo : lo + avail]
    return out


def pv_stretch_locked(signal, factor: float, config: StftConfig) -> np.ndarray:
    """Phase vocoder with identity phase locking.

    Phases are propagated on spectral peaks only; bins in each peak's region
    of influence keep their analysis phase relation to the peak, preserving
    vertical phase coherence.  A factor of 1 degenerates to an exact
    analysis-synthesis round trip.
    """
    if not factor > 0:
        raise ParameterError(f"stretch factor must be positive, got {factor}")
    x = np.asarray(signal, dtype=float)
    spec = stft(x, config)
    K, M = spec.data.shape
    L, hop_a = config.window_length, config.hop
    hop_s = max(1, int(round(factor * hop_a)))

    mag = np.abs(spec.data)
    phase = np.angle(spec.data)
    bin_advance = 2 * np.pi * np.arange(K) * hop_a / L
    ratio = hop_s / hop_a

    syn_phase = np.empty_like(phase)
    syn_phase[:, 0] = phase[:, 0]
    bins = np.arange(K)
    for m in range(1, M):
        peaks = _frame_peaks(mag[:, m])
        if peaks.size == 0:
            syn_phase[:, m] = phase[:, m]
            continue
        deviation = _principal(phase[:, m] - phase[:, m - 1] - bin_advance)
        peak_phase = syn_phase[peaks, m - 1] + (bin_advance[peaks] + deviation[peaks]) * ratio
        # Region of influence: nearest peak, split at midpoints.
        region = np.searchsorted((peaks[:-1] + peaks[1:]) / 2, bins)
        syn_phase[:, m] = peak_phase[region] + (phase[:, m] - phase[peaks[region], m])

    raw = _overlap_add(mag * np.exp(1j * syn_phase), config, hop_s, coherent=True)
    return _trim_stretched(raw, L, int(round(factor * x.size)))


def pv_stretch_randomized(signal, factor: float, config: StftConfig, seed: int = 0) -> np.ndarray:
    """Magnitude-preserving stretch with uniformly random synthesis phases."""
    if not factor > 0:
        raise ParameterError(f"stretch factor must be positive, got {factor}")
    x = np.asarray(signal, dtype=float)
    spec = stft(x, config)
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2 * np.pi, spec.data.shape)
    hop_s = max(1, int(round(factor * config.hop)))
    raw = _overlap_add(np.abs(spec.data) * np.exp(1j * phases), config, hop_s, coherent=False)
    return _trim_stretched(raw, config.window_length, int(round(factor * x.size)))


def energy_envelope(signal, sample_rate: float, smoothing_ms: float = 2.0) -> np.ndarray:
    """Short-time RMS envelope via a moving average of the squared signal."""
    x = np.asarray(signal, dtype=float)
    size = max(1, int(round(smoothing_ms * 1e-3 * sample_rate)))
    power = ndimage.uniform_filter1d(x * x, size, mode="constant")
    # The moving average can round slightly negative on all-but-silent input.
    return np.sqrt(np.maximum(power, 0.0))


def detect_transients(
    signal,
    sample_rate: float,
    cfg: TransientDetectConfig = TransientDetectConfig(),
) -> List[TransientEvent]:
    """Segments where the energy envelope exceeds the noise floor by the
    configured threshold; nearby segments are merged."""
    x = np.asarray(signal, dtype=float)
    if x.size == 0:
        return []
    env = energy_envelope(x, sample_rate, cfg.envelope_ms)
    peak = env.max()
    if peak <= 0:
        return []
    tiny = peak * 1e-7
    floor = max(float(np.median(env)), peak * 10 ** (-cfg.max_floor_drop_db / 20))
    floor_db = 20 * np.log10(floor + tiny)
    active = 20 * np.log10(env + tiny) > floor_db + cfg.threshold_db
    if not active.any():
        return []

    padded = np.concatenate([[False], active, [False]])
    rises = np.flatnonzero(np.diff(padded.astype(int)) == 1)
    falls = np.flatnonzero(np.diff(padded.astype(int)) == -1)

    min_gap = int(round(cfg.min_separation_ms * 1e-3 * sample_rate))
    runs = []
    for start, end in zip(rises, falls):
        if runs and start - runs[-1][1] < min_gap:
            runs[-1] = (runs[-1][0], end)
        else:
            runs.append((start, end))

    pre = int(round(cfg.pre_pad_ms * 1e-3 * sample_rate))
    post = int(round(cfg.post_pad_ms * 1e-3 * sample_rate))
    events = []
    for start, end in runs:
        anchor = start + int(np.argmax(env[start:end]))
        lo = max(0, start - pre)
        hi = min(x.size, end + post)
        if not lo < anchor:
            lo = max(0, anchor - 1)
        if not anchor < hi - 1:
            hi = min(x.size, anchor + 2)
        if events and lo <= events[-1].end:
            lo = events[-1].end
        events.append(TransientEvent(start=lo, end=hi, anchor=anchor))
    return events


def reposition_transients(
    transient_signal,
    events: List[TransientEvent],
    factor: float,
    output_length: int,
    sample_rate: float,
    fade_ms: float = 5.0,
) -> np.ndarray:
    """Copy each event segment unmodified, centered at its scaled anchor,
    with raised-cosine crossfade edges."""
    x = np.asarray(transient_signal, dtype=float)
    out = np.zeros(output_length)
    for event in events:
        segment = x[event.start : event.end].copy()
        n_fade = min(int(round(fade_ms * 1e-3 * sample_rate)), segment.size // 2)
        if n_fade > 0:
            ramp = np.sin(0.5 * np.pi * np.arange(n_fade) / n_fade) ** 2
            segment[:n_fade] *= ramp
            segment[-n_fade:] *= ramp[::-1]
        target = int(round(factor * event.anchor)) - (event.anchor - event.start)
        lo = max(0, target)
        hi = min(output_length, target + segment.size)
        if hi > lo:
            out[lo:hi] += segment[lo - target : hi - target]
    return out


def tsm_stretch(signal, request: TsmRequest) -> np.ndarray:
    """Decompose, stretch each class with its own method, and sum."""
    x = np.asarray(signal, dtype=float)
    if x.size == 0:
        raise ParameterError("signal is empty")
    plan = request.plan if request.plan is not None else default_plan("enhanced")
    pv_cfg = request.pv_stft if request.pv_stft is not None else StftConfig(
        window_length=2048, hop=512, sample_rate=plan.stage1_stft.sample_rate
    )
    out_len = int(round(request.factor * x.size))

    components = decompose(x, plan)
    sines = pv_stretch_locked(components.sines, request.factor, pv_cfg)
    noise = pv_stretch_randomized(components.noise, request.factor, pv_cfg, seed=request.seed)
    events = detect_transients(components.transients, pv_cfg.sample_rate, request.detect)
    transients = reposition_transients(
        components.transients, events, request.factor, out_len, pv_cfg.sample_rate, request.fade_ms
    )
    return sines[:out_len] + noise[:out_len] + transients

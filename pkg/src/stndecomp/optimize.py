"""Genetic-algorithm search for the mask transition bounds.

A synthetic mixture with known per-class ground truth makes the
decomposition error measurable.  Stage 1 optimizes the sine-extraction
bounds on the long-window analysis; stage 2 freezes those and optimizes the
transient bounds of the short-window residual split.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ParameterError
from .masks import STAGE1_BOUNDS, TransitionBounds, transition_curve
from .median import MedianConfig, tonalness
from .spectral import StftConfig, istft, stft

# The lower-bound floor of 0.7 keeps the transition region above the bulk of
# the white-noise tonalness distribution, which concentrates inside
# [0.25, 0.75]: bounds below that would trade noise rejection for raw
# class-energy recovery.
DEFAULT_SEARCH_BOX = ((0.7, 1.0), (0.7, 1.0))  # (upper-bound range, lower-bound range)

STAGE1_STFT = StftConfig(window_length=8192, hop=2048)
STAGE2_STFT = StftConfig(window_length=512, hop=128)
STAGE2_MEDIAN = MedianConfig(horizontal_length=49, vertical_length=17)


@dataclass
class SyntheticMixture:
    """Ground-truth sines, transients, and noise plus their exact sum."""

    sines_truth: np.ndarray
    transients_truth: np.ndarray
    noise_truth: np.ndarray
    mixture: np.ndarray
    sample_rate: float


@dataclass(frozen=True)
class GaConfig:
    """Evolution-loop parameters; fully deterministic given the seed."""

    population: int = 50
    generations: int = 100
    mutation_rate: float = 0.25
    crossover_rate: float = 0.7
    seed: int = 0
    search_box: tuple = DEFAULT_SEARCH_BOX
    tournament_size: int = 3
    mutation_sigma: float = 0.02
    elite_count: int = 2

    def __post_init__(self):
        if self.population < 4:
            raise ParameterError(f"population must be >= 4, got {self.population}")
        if self.generations < 1:
            raise ParameterError(f"generations must be >= 1, got {self.generations}")
        for rate in (self.mutation_rate, self.crossover_rate):
            if not 0 <= rate <= 1:
                raise ParameterError(f"rates must lie in [0, 1], got {rate}")
        (u_lo, u_hi), (l_lo, l_hi) = self.search_box
        if not (0.5 <= u_lo <= u_hi <= 1.0 and 0.5 <= l_lo <= l_hi <= 1.0):
            raise ParameterError(f"search box must lie inside [0.5, 1]^2, got {self.search_box}")


@dataclass
class BoundCandidate:
    bounds: TransitionBounds
    fitness: float


@dataclass
class BoundCandidateSet:
    """Elite candidates (within 5% of the best fitness), the single best pair,
    and the best-fitness trace per generation."""

    candidates: list
    best: BoundCandidate
    history: list = field(default_factory=list)


def gaussian_monopulse(f_c: float, f_s: float, duration: float = 0.004) -> np.ndarray:
    """Single-cycle Gaussian pulse with unit peak amplitude, centered in time."""
    if not 0 < f_c < f_s / 2:
        raise ParameterError(f"center frequency must be in (0, f_s/2), got {f_c}")
    n = int(round(duration * f_s))
    t = (np.arange(n) - (n - 1) / 2) / f_s
    return np.sqrt(np.e) * 2 * np.pi * f_c * t * np.exp(-2 * (np.pi * f_c * t) ** 2)


def make_synthetic_mixture(
    seed: int,
    f_s: float = 44100.0,
    duration: float = 4.0,
    num_sines: int = 5,
    num_pulses: int = 8,
    pulse_fc: float = 4000.0,
) -> SyntheticMixture:
    """Equal-RMS sum of random steady sinusoids, a sparse monopulse train,
    and white noise; each part belongs almost purely to one class."""
    if f_s <= 0:
        raise ParameterError(f"sample rate must be positive, got {f_s}")
    rng = np.random.default_rng(seed)
    n = int(round(duration * f_s))
    t = np.arange(n) / f_s

    freqs = rng.uniform(200.0, 4000.0, num_sines)
    phases = rng.uniform(0.0, 2 * np.pi, num_sines)
    sines = np.zeros(n)
    for f, p in zip(freqs, phases):
        sines += np.sin(2 * np.pi * f * t + p)

    pulse = gaussian_monopulse(pulse_fc, f_s)
    margin = int(round(0.1 * f_s))
    positions = []
    while len(positions) < num_pulses:
        cand = int(rng.integers(margin, n - margin))
        if all(abs(cand - p) >= margin for p in positions):
            positions.append(cand)
    transients = np.zeros(n)
    for pos in positions:
        start = pos - len(pulse) // 2
        transients[start : start + len(pulse)] += pulse

    noise = rng.standard_normal(n)

    target_rms = 0.1
    sines *= target_rms / _rms(sines)
    transients *= target_rms / _rms(transients)
    noise *= target_rms / _rms(noise)
    return SyntheticMixture(
        sines_truth=sines,
        transients_truth=transients,
        noise_truth=noise,
        mixture=sines + transients + noise,
        sample_rate=f_s,
    )


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(x**2)))


def decomposition_error(component: np.ndarray, truth: np.ndarray) -> float:
    """Relative L2 error of a separated component against its ground truth."""
    component = np.asarray(component, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if component.shape != truth.shape:
        raise ParameterError("component and truth must have equal length")
    denom = np.linalg.norm(truth)
    if denom == 0:
        raise ParameterError("truth class has zero energy")
    return float(np.linalg.norm(component - truth) / denom)


class StageOneEvaluator:
    """Sine-extraction error as a function of the stage-1 bounds.

    The spectrogram and tonalness maps are computed once; each candidate
    only costs a mask evaluation and one inverse transform.
    """

    def __init__(
        self,
        mix: SyntheticMixture,
        stft_cfg: StftConfig = STAGE1_STFT,
        median_cfg: MedianConfig = MedianConfig(),
    ):
        self.mix = mix
        self.spec = stft(mix.mixture, stft_cfg)
        self.tonal = tonalness(self.spec.magnitude(), median_cfg).tonalness

    def __call__(self, bounds: TransitionBounds) -> float:
        mask = transition_curve(self.tonal, bounds)
        sines = istft(self.spec.with_data(self.spec.data * mask))
        return decomposition_error(sines, self.mix.sines_truth)

    def residual(self, bounds: TransitionBounds) -> np.ndarray:
        mask = transition_curve(self.tonal, bounds)
        return istft(self.spec.with_data(self.spec.data * (1.0 - mask)))


class StageTwoEvaluator:
    """Transient-extraction error of the full cascade with stage 1 frozen."""

    def __init__(
        self,
        mix: SyntheticMixture,
        stage1_bounds: TransitionBounds,
        stage1_stft: StftConfig = STAGE1_STFT,
        stage2_stft: StftConfig = STAGE2_STFT,
        median_cfg: MedianConfig = MedianConfig(),
        stage2_median_cfg: MedianConfig = STAGE2_MEDIAN,
    ):
        self.mix = mix
        stage1 = StageOneEvaluator(mix, stage1_stft, median_cfg)
        residual = stage1.residual(stage1_bounds)
        self.spec = stft(residual, stage2_stft)
        self.tonal = tonalness(self.spec.magnitude(), stage2_median_cfg).tonalness

    def __call__(self, bounds: TransitionBounds) -> float:
        mask = transition_curve(1.0 - self.tonal, bounds)
        transients = istft(self.spec.with_data(self.spec.data * mask))
        return decomposition_error(transients, self.mix.transients_truth)


def _repair(genes: np.ndarray, box) -> np.ndarray:
    (u_lo, u_hi), (l_lo, l_hi) = box
    upper = float(np.clip(genes[0], u_lo, u_hi))
    lower = float(np.clip(genes[1], l_lo, l_hi))
    if lower >= upper:
        upper, lower = max(upper, lower), min(upper, lower)
        if lower >= upper:
            # Degenerate after the swap: nudge apart inside the box.
            lower = float(np.clip(upper - 1e-6, l_lo, l_hi))
            if lower >= upper:
                upper = float(np.clip(lower + 1e-6, u_lo, 1.0))
    return np.array([upper, lower])


def _evolve(fitness: Callable[[TransitionBounds], float], ga: GaConfig) -> BoundCandidateSet:
    rng = np.random.default_rng(ga.seed)
    (u_lo, u_hi), (l_lo, l_hi) = ga.search_box

    pop = np.empty((ga.population, 2))
    pop[:, 0] = rng.uniform(u_lo, u_hi, ga.population)
    pop[:, 1] = rng.uniform(l_lo, l_hi, ga.population)
    # Seed the box midpoint so tiny boxes converge immediately.
    pop[0] = [(u_lo + u_hi) / 2, (l_lo + l_hi) / 2]
    pop = np.array([_repair(p, ga.search_box) for p in pop])

    cache: dict = {}

    def evaluate(genes: np.ndarray) -> float:
        key = (round(genes[0], 12), round(genes[1], 12))
        if key not in cache:
            cache[key] = fitness(TransitionBounds(upper=genes[0], lower=genes[1]))
        return cache[key]

    scores = np.array([evaluate(p) for p in pop])
    history = []
    for _ in range(ga.generations):
        order = np.argsort(scores)
        pop, scores = pop[order], scores[order]
        history.append(float(scores[0]))

        children = [pop[i].copy() for i in range(ga.elite_count)]
        while len(children) < ga.population:
            parents = []
            for _ in range(2):
                idx = rng.integers(0, ga.population, ga.tournament_size)
                parents.append(pop[idx[np.argmin(scores[idx])]].copy())
            a, b = parents
            if rng.random() < ga.crossover_rate:
                # One-point crossover on a two-gene chromosome: swap the tail gene.
                a[1], b[1] = b[1], a[1]
            for child in (a, b):
                mutate = rng.random(2) < ga.mutation_rate
                child[mutate] += rng.normal(0.0, ga.mutation_sigma, int(mutate.sum()))
                children.append(_repair(child, ga.search_box))
        pop = np.array(children[: ga.population])
        scores = np.array([evaluate(p) for p in pop])

    order = np.argsort(scores)
    pop, scores = pop[order], scores[order]
    history.append(float(scores[0]))

    best_score = float(scores[0])
    seen = set()
    elites = []
    for genes, score in zip(pop, scores):
        key = (round(genes[0], 12), round(genes[1], 12))
        if key in seen or score > best_score * 1.05:
            continue
        seen.add(key)
        elites.append(
            BoundCandidate(bounds=TransitionBounds(upper=genes[0], lower=genes[1]), fitness=float(score))
        )
    return BoundCandidateSet(candidates=elites, best=elites[0], history=history)


def optimize_stage1(mix: SyntheticMixture, ga: GaConfig = GaConfig()) -> BoundCandidateSet:
    """Search the stage-1 bounds minimizing the sine decomposition error."""
    return _evolve(StageOneEvaluator(mix), ga)


def optimize_stage2(
    mix: SyntheticMixture,
    fixed_stage1: TransitionBounds = STAGE1_BOUNDS,
    ga: GaConfig = GaConfig(),
) -> BoundCandidateSet:
    """Search the stage-2 bounds minimizing the transient error with the
    stage-1 bounds frozen."""
    return _evolve(StageTwoEvaluator(mix, fixed_stage1), ga)


def select_quasi_optimal(
    candidates: Sequence[BoundCandidate],
    seeds: Sequence[int] = range(5),
    f_s: float = 44100.0,
) -> BoundCandidate:
    """Pick the stage-1 candidate with the smallest summed sine error across
    several mixture seeds; stands in for the listening-based final selection."""
    if not candidates:
        raise ParameterError("no candidates to select from")
    evaluators = [StageOneEvaluator(make_synthetic_mixture(seed, f_s)) for seed in seeds]
    totals = [sum(ev(c.bounds) for ev in evaluators) for c in candidates]
    return candidates[int(np.argmin(totals))]

"""Single- and two-stage decomposition pipelines over any mask family."""

from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from .errors import ParameterError
from .masks import (
    DEFAULT_HPR_BETA,
    STAGE1_BOUNDS,
    STAGE2_BOUNDS,
    MaskSet,
    TransitionBounds,
    apply_masks,
    enhanced_masks,
    fuzzy_masks,
    hard_masks,
    prototype_masks,
)
from .median import MedianConfig, tonalness
from .spectral import Spectrogram, StftConfig, istft, stft
from .structure_tensor import StConfig, st_features, structure_tensor_masks

METHODS = ("hpr", "st", "fz", "prototype", "enhanced")

# Stage-2 horizontal median length scales with the much shorter hop so the
# filter spans a comparable time extent in both stages (49 frames at H = 128
# is ~140 ms; 17 frames at H = 2048 is ~790 ms).
DEFAULT_STAGE2_MEDIAN = MedianConfig(horizontal_length=49, vertical_length=17)

StageParams = Union[float, TransitionBounds, StConfig, None]


@dataclass
class DecompositionPlan:
    """Mask method, stage layout, and per-stage analysis parameters."""

    method: str
    stages: int
    stage1_stft: StftConfig
    stage1_median: MedianConfig = MedianConfig()
    stage1_params: StageParams = None
    stage2_stft: Optional[StftConfig] = None
    stage2_median: Optional[MedianConfig] = None
    stage2_params: StageParams = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ParameterError(f"unknown method {self.method!r}, expected one of {METHODS}")
        if self.stages not in (1, 2):
            raise ParameterError(f"stages must be 1 or 2, got {self.stages}")
        if self.stages == 2:
            if self.stage2_stft is None:
                raise ParameterError("two-stage plan requires a stage-2 STFT configuration")
            if self.stage2_stft.window_length >= self.stage1_stft.window_length:
                raise ParameterError(
                    "stage-2 window must be strictly shorter than stage-1 window, got "
                    f"{self.stage2_stft.window_length} >= {self.stage1_stft.window_length}"
                )
            if self.stage2_median is None:
                self.stage2_median = self.stage1_median


@dataclass
class StnComponents:
    """Time-domain sines, transients, and noise; same length as the input."""

    sines: np.ndarray
    transients: np.ndarray
    noise: np.ndarray

    def stack(self) -> np.ndarray:
        return np.stack([self.sines, self.transients, self.noise])


def stage_masks(
    spec: Spectrogram,
    method: str,
    params: StageParams,
    median_cfg: MedianConfig,
) -> MaskSet:
    """Mask triple for one analysis stage of the chosen family."""
    if method == "st":
        cfg = params if isinstance(params, StConfig) else StConfig()
        return structure_tensor_masks(st_features(spec, cfg), cfg)
    maps = tonalness(spec.magnitude(), median_cfg)
    if method == "hpr":
        return hard_masks(maps, params if params is not None else DEFAULT_HPR_BETA)
    if method == "fz":
        return fuzzy_masks(maps)
    if method == "prototype":
        return prototype_masks(maps)
    if method == "enhanced":
        if not isinstance(params, TransitionBounds):
            raise ParameterError("enhanced masks require TransitionBounds parameters")
        return enhanced_masks(maps, params)
    raise ParameterError(f"unknown method {method!r}")


def decompose_single(signal, plan: DecompositionPlan) -> StnComponents:
    """One analysis stage: mask the spectrogram and invert each component."""
    if plan.stages != 1:
        raise ParameterError("decompose_single requires a single-stage plan")
    spec = stft(signal, plan.stage1_stft)
    masks = stage_masks(spec, plan.method, plan.stage1_params, plan.stage1_median)
    spec_s, spec_t, spec_n = apply_masks(spec, masks)
    return StnComponents(sines=istft(spec_s), transients=istft(spec_t), noise=istft(spec_n))


def decompose_two_stage(signal, plan: DecompositionPlan) -> StnComponents:
    """Long-window stage extracts sines; the residual is split again with a
    short window into transients and noise."""
    if plan.stages != 2:
        raise ParameterError("decompose_two_stage requires a two-stage plan")
    spec1 = stft(signal, plan.stage1_stft)
    masks1 = stage_masks(spec1, plan.method, plan.stage1_params, plan.stage1_median)
    sines = istft(spec1.with_data(spec1.data * masks1.sines))
    residual = istft(spec1.with_data(spec1.data * (masks1.transients + masks1.noise)))

    spec2 = stft(residual, plan.stage2_stft)
    masks2 = stage_masks(spec2, plan.method, plan.stage2_params, plan.stage2_median)
    transients = istft(spec2.with_data(spec2.data * masks2.transients))
    noise = istft(spec2.with_data(spec2.data * (masks2.sines + masks2.noise)))
    return StnComponents(sines=sines, transients=transients, noise=noise)


def decompose(signal, plan: DecompositionPlan) -> StnComponents:
    if plan.stages == 1:
        return decompose_single(signal, plan)
    return decompose_two_stage(signal, plan)


def default_plan(
    method: str,
    stages: Optional[int] = None,
    sample_rate: float = 44100.0,
) -> DecompositionPlan:
    """Standard plan per method: two cascaded stages (long 8192-sample window,
    short 512-sample window) for the enhanced and hard families, a single
    4096-sample stage for the others.  Hops are a quarter window."""
    if method not in METHODS:
        raise ParameterError(f"unknown method {method!r}, expected one of {METHODS}")
    if stages is None:
        stages = 2 if method in ("enhanced", "hpr") else 1

    if method == "enhanced":
        params1, params2 = STAGE1_BOUNDS, STAGE2_BOUNDS
    elif method == "hpr":
        params1 = params2 = DEFAULT_HPR_BETA
    elif method == "st":
        params1 = params2 = StConfig()
    else:
        params1 = params2 = None

    if stages == 1:
        return DecompositionPlan(
            method=method,
            stages=1,
            stage1_stft=StftConfig(window_length=4096, hop=1024, sample_rate=sample_rate),
            stage1_params=params1,
        )
    return DecompositionPlan(
        method=method,
        stages=2,
        stage1_stft=StftConfig(window_length=8192, hop=2048, sample_rate=sample_rate),
        stage1_params=params1,
        stage2_stft=StftConfig(window_length=512, hop=128, sample_rate=sample_rate),
        stage2_median=DEFAULT_STAGE2_MEDIAN,
        stage2_params=params2,
    )

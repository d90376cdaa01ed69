"""Scikit-learn style wrapper around the decomposition pipeline."""

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .decompose import METHODS, DecompositionPlan, StnComponents, decompose, default_plan
from .errors import ParameterError
from .masks import TransitionBounds
from .median import MedianConfig
from .spectral import StftConfig
from .structure_tensor import StConfig


class StnDecomposer(TransformerMixin, BaseEstimator):
    """Transformer splitting audio into sines, transients, and noise.

    The transform is stateless; ``fit`` only validates parameters and builds
    the decomposition plan, so the estimator composes with pipelines and
    parameter searches.  ``transform`` maps a 1-D signal to an array of shape
    (3, n_samples) and a (n_channels, n_samples) array to
    (n_channels, 3, n_samples), processing channels independently.

    Parameters left at None fall back to the per-method defaults.
    """

    def __init__(
        self,
        method: str = "enhanced",
        stages: Optional[int] = None,
        sample_rate: float = 44100.0,
        stage1_window: Optional[int] = None,
        stage1_hop: Optional[int] = None,
        stage2_window: Optional[int] = None,
        stage2_hop: Optional[int] = None,
        median_time: Optional[int] = None,
        median_freq: Optional[int] = None,
        hpr_beta: float = 2.5,
        stage1_bounds: Optional[tuple] = None,
        stage2_bounds: Optional[tuple] = None,
        st_config: Optional[StConfig] = None,
    ):
        self.method = method
        self.stages = stages
        self.sample_rate = sample_rate
        self.stage1_window = stage1_window
        self.stage1_hop = stage1_hop
        self.stage2_window = stage2_window
        self.stage2_hop = stage2_hop
        self.median_time = median_time
        self.median_freq = median_freq
        self.hpr_beta = hpr_beta
        self.stage1_bounds = stage1_bounds
        self.stage2_bounds = stage2_bounds
        self.st_config = st_config

    def _build_plan(self) -> DecompositionPlan:
        if self.method not in METHODS:
            raise ParameterError(f"unknown method {self.method!r}, expected one of {METHODS}")
        plan = default_plan(self.method, stages=self.stages, sample_rate=self.sample_rate)

        def stft_override(base: StftConfig, window, hop) -> StftConfig:
            if window is None and hop is None:
                return base
            new_window = window if window is not None else base.window_length
            new_hop = hop if hop is not None else new_window // 4
            return StftConfig(new_window, new_hop, base.sample_rate)

        plan.stage1_stft = stft_override(plan.stage1_stft, self.stage1_window, self.stage1_hop)
        if plan.stages == 2:
            plan.stage2_stft = stft_override(plan.stage2_stft, self.stage2_window, self.stage2_hop)
        if self.median_time is not None or self.median_freq is not None:
            median = MedianConfig(
                horizontal_length=self.median_time if self.median_time is not None else 17,
                vertical_length=self.median_freq if self.median_freq is not None else 17,
            )
            plan.stage1_median = median
            plan.stage2_median = median

        if self.method == "hpr":
            plan.stage1_params = plan.stage2_params = self.hpr_beta
        elif self.method == "st" and self.st_config is not None:
            plan.stage1_params = plan.stage2_params = self.st_config
        elif self.method == "enhanced":
            if self.stage1_bounds is not None:
                plan.stage1_params = TransitionBounds(*self.stage1_bounds)
            if self.stage2_bounds is not None:
                plan.stage2_params = TransitionBounds(*self.stage2_bounds)
        return plan

    def fit(self, X=None, y=None):
        self.plan_ = self._build_plan()
        return self

    def decompose(self, signal) -> StnComponents:
        """Decompose a single 1-D signal, returning named components."""
        check_is_fitted(self, "plan_")
        x = check_array(signal, ensure_2d=False, dtype=float)
        if x.ndim != 1:
            raise ParameterError("decompose expects a 1-D signal; use transform for multichannel")
        return decompose(x, self.plan_)

    def transform(self, X):
        check_is_fitted(self, "plan_")
        x = check_array(X, ensure_2d=False, dtype=float)
        if x.ndim == 1:
            return decompose(x, self.plan_).stack()
        if x.ndim == 2:
            return np.stack([decompose(channel, self.plan_).stack() for channel in x])
        raise ParameterError(f"expected a 1-D or 2-D signal array, got shape {x.shape}")

"""Flat key-value run configuration and plan construction.

Config files are UTF-8 ``key = value`` lines with ``#`` comments.  Values
are merged with precedence: command-line overrides > config file > defaults.
"""

from typing import Dict, Optional

from .decompose import DecompositionPlan, default_plan
from .errors import ParameterError
from .masks import TransitionBounds
from .median import MedianConfig
from .optimize import GaConfig
from .spectral import StftConfig
from .structure_tensor import StConfig

_INT_KEYS = {
    "stage1_window",
    "stage1_hop",
    "stage2_window",
    "stage2_hop",
    "median_time",
    "median_freq",
    "tsm_window",
    "tsm_hop",
    "ga_population",
    "ga_generations",
    "seed",
}
_FLOAT_KEYS = {
    "sample_rate",
    "hpr_beta",
    "beta_u1",
    "beta_l1",
    "beta_u2",
    "beta_l2",
    "st_anisotropy",
    "st_rate_sines",
    "st_rate_transients",
    "st_sigma_time",
    "st_sigma_freq",
    "tsm_threshold_db",
    "tsm_min_separation_ms",
    "tsm_fade_ms",
    "ga_mutation_rate",
    "ga_crossover_rate",
}
KNOWN_KEYS = _INT_KEYS | _FLOAT_KEYS


def parse_value(key: str, raw: str):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
    except ValueError as exc:
        raise ParameterError(f"invalid value for {key}: {raw!r}") from exc
    raise ParameterError(f"unknown configuration key {key!r}")


def load_config(path) -> Dict[str, object]:
    """Parse a flat config file into typed values."""
    values: Dict[str, object] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ParameterError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, raw = (part.strip() for part in stripped.split("=", 1))
            values[key] = parse_value(key, raw)
    return values


def merge_settings(*layers: Optional[Dict[str, object]]) -> Dict[str, object]:
    """Later layers win; None layers and None values are skipped."""
    merged: Dict[str, object] = {}
    for layer in layers:
        if not layer:
            continue
        for key, value in layer.items():
            if value is not None:
                merged[key] = value
    return merged


def build_plan(method: str, stages: Optional[int], settings: Dict[str, object]) -> DecompositionPlan:
    """Decomposition plan from flat settings, falling back to method defaults."""
    sample_rate = float(settings.get("sample_rate", 44100.0))
    plan = default_plan(method, stages=stages, sample_rate=sample_rate)

    def stft_from(base: StftConfig, window_key: str, hop_key: str) -> StftConfig:
        window = int(settings.get(window_key, base.window_length))
        if hop_key in settings:
            hop = int(settings[hop_key])
        elif window_key in settings:
            hop = window // 4
        else:
            hop = base.hop
        return StftConfig(window, hop, sample_rate)

    plan.stage1_stft = stft_from(plan.stage1_stft, "stage1_window", "stage1_hop")
    if plan.stages == 2:
        plan.stage2_stft = stft_from(plan.stage2_stft, "stage2_window", "stage2_hop")

    if "median_time" in settings or "median_freq" in settings:
        median = MedianConfig(
            horizontal_length=int(settings.get("median_time", 17)),
            vertical_length=int(settings.get("median_freq", 17)),
        )
        plan.stage1_median = median
        if plan.stages == 2:
            plan.stage2_median = median

    if method == "hpr":
        plan.stage1_params = plan.stage2_params = float(settings.get("hpr_beta", 2.5))
    elif method == "enhanced":
        plan.stage1_params = TransitionBounds(
            upper=float(settings.get("beta_u1", 0.8)), lower=float(settings.get("beta_l1", 0.7))
        )
        plan.stage2_params = TransitionBounds(
            upper=float(settings.get("beta_u2", 0.85)), lower=float(settings.get("beta_l2", 0.75))
        )
    elif method == "st":
        st_cfg = StConfig(
            anisotropy_threshold=float(settings.get("st_anisotropy", 0.2)),
            rate_threshold_sines=float(settings.get("st_rate_sines", 10_000.0)),
            rate_threshold_transients=float(settings.get("st_rate_transients", 10_000.0)),
            smoothing_sigma_time=float(settings.get("st_sigma_time", 2.0)),
            smoothing_sigma_freq=float(settings.get("st_sigma_freq", 2.0)),
        )
        plan.stage1_params = plan.stage2_params = st_cfg
    return plan


def build_ga_config(settings: Dict[str, object]) -> GaConfig:
    return GaConfig(
        population=int(settings.get("ga_population", 50)),
        generations=int(settings.get("ga_generations", 100)),
        mutation_rate=float(settings.get("ga_mutation_rate", 0.25)),
        crossover_rate=float(settings.get("ga_crossover_rate", 0.7)),
        seed=int(settings.get("seed", 0)),
    )

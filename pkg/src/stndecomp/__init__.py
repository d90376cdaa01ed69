"""Sines/transients/noise decomposition of audio with soft spectral masks.

The package provides the STFT core, four mask families (hard ratio masks,
structure-tensor masks, fuzzy masks, enhanced raised-cosine fuzzy masks),
single- and two-stage decomposition pipelines, a genetic-algorithm search
for the mask transition bounds, a white-noise tonalness analysis, and a
transient-preserving time-scale modifier.
"""

from .decompose import (
    DecompositionPlan,
    StnComponents,
    decompose,
    decompose_single,
    decompose_two_stage,
    default_plan,
)
from .errors import ParameterError, WavFormatError
from .estimator import StnDecomposer
from .masks import (
    MaskSet,
    TransitionBounds,
    apply_masks,
    enhanced_masks,
    fuzzy_masks,
    hard_masks,
    prototype_masks,
    transition_curve,
)
from .median import MedianConfig, TonalnessMaps, median_filter_h, median_filter_v, tonalness
from .noise_analysis import TonalnessHistogram, noise_tonalness_histogram
from .optimize import (
    GaConfig,
    SyntheticMixture,
    decomposition_error,
    gaussian_monopulse,
    make_synthetic_mixture,
    optimize_stage1,
    optimize_stage2,
)
from .spectral import Spectrogram, StftConfig, istft, overlap_add_profile, stft
from .structure_tensor import StConfig, StFeatures, st_features, structure_tensor_masks
from .tsm import (
    TransientDetectConfig,
    TransientEvent,
    TsmRequest,
    detect_transients,
    pv_stretch_locked,
    pv_stretch_randomized,
    tsm_stretch,
)
from .wavio import AudioBuffer, read_wav, write_wav

__version__ = "0.1.0"

"""Psychoacoustic sound-quality metrics: loudness, sharpness, roughness,
fluctuation strength, LA_eq and an annoyance index."""

__version__ = "0.1.0"

from .annoyance import AnnoyanceModel, annoyance_index, build_comparison, summarize_runs
from .errors import SqMetricsError
from .loudness import loudness_series, specific_loudness, stationary_loudness, total_loudness
from .signal_io import AudioBuffer, apply_calibration, read_wav, write_wav
from .spectral import a_weighting, la_eq, third_octave
from .sq_metrics import extract_modulation, fluctuation_strength, roughness, sharpness

__all__ = [
    "AnnoyanceModel", "AudioBuffer", "SqMetricsError", "a_weighting", "annoyance_index",
    "apply_calibration", "build_comparison", "extract_modulation", "fluctuation_strength",
    "la_eq", "loudness_series", "read_wav", "roughness", "sharpness", "specific_loudness",
    "stationary_loudness", "summarize_runs", "third_octave", "total_loudness", "write_wav",
]

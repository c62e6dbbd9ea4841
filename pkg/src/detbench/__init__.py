"""detbench: benchmark toolkit for AI-image detectors.

Implements neural-free reference detectors (a spread-spectrum DCT watermark
codec and frequency/spatial passive classifiers), a suite of common image
perturbations, white- and black-box attacks, randomized smoothing, synthetic
two-class datasets, and a seeded benchmark harness with CSV/JSON reports.
"""

__version__ = "0.1.0"

from .errors import (
    CapacityError,
    ConfigError,
    FormatError,
    ParameterError,
    TrainingError,
    TuningError,
)

__all__ = [
    "CapacityError",
    "ConfigError",
    "FormatError",
    "ParameterError",
    "TrainingError",
    "TuningError",
    "__version__",
]

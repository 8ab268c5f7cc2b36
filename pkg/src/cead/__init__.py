"""Counterfactual explanations for image anomaly detectors.

Train bounded-score detectors, fit a concept-conditioned generator that
turns anomalies into normal-looking counterfactuals, evaluate both with
ranking and distribution metrics, and serve interactive what-if queries.
"""

from .cegen import CounterfactualGenerator
from .detectors import AnomalyDetector
from .exceptions import ContractError, DegenerateInputError, InvalidInputError

__version__ = "0.1.0"

__all__ = [
    "AnomalyDetector",
    "ContractError",
    "CounterfactualGenerator",
    "DegenerateInputError",
    "InvalidInputError",
    "__version__",
]

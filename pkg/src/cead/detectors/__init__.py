import numpy as np

from ..data.batch import ImageBatch
from .estimator import KINDS, TRAINING_DEFAULTS, AnomalyDetector
from .networks import (
    DETECTOR_ARCHS,
    DetectorArch,
    DetectorNet,
    EncoderNet,
    arch_for_images,
    assert_bias_free,
)
from .persist import load_detector, save_detector
from .scoring import (
    bce_loss,
    bce_score,
    hsc_loss,
    hsc_score,
    hsc_score_from_distance,
    pseudo_huber,
    radial_loss,
    radial_score,
    radial_score_from_sqdist,
)


def train_dsvdd(normal, **params) -> AnomalyDetector:
    """Fit the center-distance detector on normal samples only."""
    return AnomalyDetector(kind="dsvdd", **params).fit(normal)


def train_bce_oe(normal, oe, **params) -> AnomalyDetector:
    """Fit the sigmoid-head detector on normal vs. exposure samples."""
    return _fit_with_positives("bce", normal, oe, params)


def train_hsc_oe(normal, oe, **params) -> AnomalyDetector:
    """Fit the hypersphere-classification detector on normal vs. exposure."""
    return _fit_with_positives("hsc", normal, oe, params)


def _fit_with_positives(kind, normal, oe, params) -> AnomalyDetector:
    norm_px = normal.pixels if isinstance(normal, ImageBatch) else normal
    oe_px = oe.pixels if isinstance(oe, ImageBatch) else oe
    X = np.concatenate([norm_px, oe_px])
    y = np.concatenate(
        [np.zeros(len(norm_px), np.int64), np.ones(len(oe_px), np.int64)]
    )
    return AnomalyDetector(kind=kind, **params).fit(X, y)


def score(detector: AnomalyDetector, batch) -> np.ndarray:
    """Anomaly scores in [0, 1] for a batch or pixel stack."""
    return detector.score_samples(batch)


__all__ = [
    "KINDS",
    "TRAINING_DEFAULTS",
    "AnomalyDetector",
    "DETECTOR_ARCHS",
    "DetectorArch",
    "DetectorNet",
    "EncoderNet",
    "arch_for_images",
    "assert_bias_free",
    "load_detector",
    "save_detector",
    "bce_loss",
    "bce_score",
    "hsc_loss",
    "hsc_score",
    "hsc_score_from_distance",
    "pseudo_huber",
    "radial_loss",
    "radial_score",
    "radial_score_from_sqdist",
    "train_dsvdd",
    "train_bce_oe",
    "train_hsc_oe",
    "score",
]

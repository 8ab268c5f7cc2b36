"""Scenario-level evaluation of a detector/generator pair.

Everything streams: counterfactuals are generated per chunk and reduced
to scores, features, and concept hits on the fly. Only the (optionally
capped) counterfactual collection needed for the substitution retrain is
kept in memory.
"""

from __future__ import annotations

import numpy as np

from ..data.batch import ImageBatch
from ..data.scenarios import ResolvedScenario
from ..data.streams import ArraySource, positive_source
from ..detectors.estimator import AnomalyDetector
from ..exceptions import ContractError, DegenerateInputError, InvalidInputError
from ..validation import check_positive_int, rng_from
from .fid import RandomConvFeatures, normalized_fid
from .ranking import auroc, score_distance
from .report import MetricsRow


def capped_indices(
    indices: np.ndarray, cap: int | None, seed: int, label: str
) -> np.ndarray:
    """Deterministic, sorted subsample of ``indices`` to at most ``cap``."""
    if cap is None or len(indices) <= cap:
        return indices
    check_positive_int(cap, "cap")
    rng = rng_from(seed, "eval-cap", label)
    rows = np.sort(rng.choice(len(indices), size=cap, replace=False))
    return indices[rows]


def _chunks(data, split: str, indices: np.ndarray, batch_size: int):
    for start in range(0, len(indices), batch_size):
        yield data.batch(split, indices[start : start + batch_size])


def score_indices(
    detector, data, split: str, indices, batch_size: int = 256
) -> np.ndarray:
    """Chunked detector scores for the given rows of a dataset split."""
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size == 0:
        return np.empty(0, dtype=np.float64)
    return np.concatenate(
        [detector.score_samples(b) for b in _chunks(data, split, idx, batch_size)]
    )


def cf_auroc(detector, generator, test_anomalies, test_normals) -> float:
    """Separability of normal samples from counterfactuals (lower is better).

    Pools the counterfactuals of every concept at target score zero; a
    value near 0.5 means the detector cannot tell them from normal data.
    """
    normal_scores = detector.score_samples(test_normals)
    _, scores = generator.counterfactual_set(test_anomalies)
    return auroc(normal_scores, scores.reshape(-1))


def concept_hits(proba: np.ndarray, k: int) -> np.ndarray:
    """Strict-argmax correctness per row; ties count as wrong."""
    others = np.delete(proba, k, axis=1)
    return proba[:, k] > others.max(axis=1)


def concept_accuracy(generator, test_anomalies, batch_size: int = 256) -> float:
    """Fraction of counterfactuals whose concept the classifier recovers."""
    pixels = test_anomalies.pixels if isinstance(test_anomalies, ImageBatch) else test_anomalies
    if len(pixels) == 0:
        raise InvalidInputError("concept_accuracy: empty anomaly set")
    hits = []
    for k in range(generator.n_concepts):
        cf = generator.transform(pixels, alpha=0.0, k=k, batch_size=batch_size)
        proba = generator.predict_concept_proba(pixels, cf, batch_size=batch_size)
        hits.append(concept_hits(proba, k))
    return float(np.concatenate(hits).mean())


def substitution_auroc(
    resolved: ResolvedScenario,
    replacement_normals: np.ndarray,
    detector_params: dict,
    batch_size: int = 256,
    max_normals: int | None = None,
    max_anomalies: int | None = None,
) -> float:
    """Detector quality after retraining on a replacement normal set.

    A fresh detector is trained with ``replacement_normals`` standing in
    for the normal class (the exposure pool is kept where the kind uses
    one), then scored on the true normal/anomalous test split.
    """
    if len(replacement_normals) == 0:
        raise InvalidInputError("substitution_auroc: empty replacement set")
    ids = np.asarray(
        [f"substitute:train:{i:06d}" for i in range(len(replacement_normals))],
        dtype=object,
    )
    normal = ArraySource(
        ImageBatch(
            np.ascontiguousarray(replacement_normals, dtype=np.float32),
            ids,
            np.zeros(len(replacement_normals), np.int64),
        )
    )
    detector = AnomalyDetector(**detector_params)
    positive = positive_source(resolved) if detector.kind in ("bce", "hsc") else None
    detector.fit_sources(normal, positive)

    seed = int(detector_params.get("seed", 0))
    normal_idx = capped_indices(resolved.test_normal_idx, max_normals, seed, "sub-normal")
    anomaly_idx = capped_indices(resolved.test_anomaly_idx, max_anomalies, seed, "sub-anomaly")
    normal_scores = np.concatenate(
        [detector.score_samples(b) for b in _chunks(resolved.data, "test", normal_idx, batch_size)]
    )
    anomaly_scores = np.concatenate(
        [detector.score_samples(b) for b in _chunks(resolved.data, "test", anomaly_idx, batch_size)]
    )
    return auroc(normal_scores, anomaly_scores)


def evaluate_scenario(
    generator,
    resolved: ResolvedScenario,
    scale: str = "paper",
    max_eval_normals: int | None = None,
    max_eval_anomalies: int | None = None,
    batch_size: int = 256,
    feature_dim: int = 256,
    feature_seed: int = 7,
    extractor=None,
    with_substitution: bool = True,
) -> MetricsRow:
    """All metrics for one trained generator and its frozen detector.

    Test sets may be capped (deterministically in the scenario seed) for
    small-scale runs; the row records how many samples were evaluated.
    """
    detector = generator.detector
    if detector is None:
        raise ContractError("generator carries no detector")
    seed = resolved.seed
    normal_idx = capped_indices(resolved.test_normal_idx, max_eval_normals, seed, "normal")
    anomaly_idx = capped_indices(resolved.test_anomaly_idx, max_eval_anomalies, seed, "anomaly")
    if len(normal_idx) == 0 or len(anomaly_idx) == 0:
        raise DegenerateInputError("evaluation needs nonempty normal and anomaly test sets")

    probe = resolved.data.batch("test", normal_idx[:1])
    if extractor is None:
        extractor = RandomConvFeatures(
            probe.channels, probe.image_size, dim=feature_dim, seed=feature_seed
        )

    normal_scores, normal_feats = [], []
    for batch in _chunks(resolved.data, "test", normal_idx, batch_size):
        normal_scores.append(detector.score_samples(batch))
        normal_feats.append(extractor.extract(batch.pixels))
    normal_scores = np.concatenate(normal_scores)
    normal_feats = np.concatenate(normal_feats)

    n_concepts = generator.n_concepts
    anomaly_scores, anomaly_feats = [], []
    ce_scores, ce_feats, ce_pixels, hits = [], [], [], []
    for batch in _chunks(resolved.data, "test", anomaly_idx, batch_size):
        anomaly_scores.append(detector.score_samples(batch))
        anomaly_feats.append(extractor.extract(batch.pixels))
        for k in range(n_concepts):
            cf = generator.transform(batch.pixels, alpha=0.0, k=k, batch_size=batch_size)
            ce_scores.append(detector.score_samples(cf))
            ce_feats.append(extractor.extract(cf))
            proba = generator.predict_concept_proba(batch.pixels, cf, batch_size=batch_size)
            hits.append(concept_hits(proba, k))
            if with_substitution:
                ce_pixels.append(cf)
    anomaly_scores = np.concatenate(anomaly_scores)
    ce_scores_flat = np.concatenate(ce_scores)

    sub_value = float("nan")
    if with_substitution:
        sub_value = substitution_auroc(
            resolved,
            np.concatenate(ce_pixels),
            detector.get_params(),
            batch_size=batch_size,
            max_normals=max_eval_normals,
            max_anomalies=max_eval_anomalies,
        )

    return MetricsRow(
        scenario=resolved.scenario.slug,
        kind=detector.kind,
        seed=seed,
        scale=scale,
        corpus=resolved.scenario.dataset,
        auroc=auroc(normal_scores, anomaly_scores),
        score_distance=score_distance(normal_scores, anomaly_scores),
        cf_auroc=auroc(normal_scores, ce_scores_flat),
        sub_auroc=sub_value,
        fid_n=normalized_fid(
            np.concatenate(ce_feats), normal_feats, np.concatenate(anomaly_feats)
        )
        / 100.0,
        concept_acc=float(np.concatenate(hits).mean()),
        n_eval_normal=len(normal_idx),
        n_eval_anomaly=len(anomaly_idx),
    )

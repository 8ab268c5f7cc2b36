import numpy as np
import pytest

from cead.cegen import CounterfactualGenerator
from cead.data.datasets import ArrayDataset
from cead.data.scenarios import Scenario, resolve
from cead.data.streams import normal_source, positive_source
from cead.detectors import AnomalyDetector
from cead.exceptions import InvalidInputError
from cead.metrics import (
    auroc,
    cf_auroc,
    concept_accuracy,
    concept_hits,
    evaluate_scenario,
    substitution_auroc,
)


def _blobs(n, level, seed):
    """Images whose mean brightness carries the class signal."""
    rng = np.random.default_rng(seed)
    base = rng.uniform(-0.2, 0.2, (n, 1, 28, 28)) + level
    return np.clip(base, -1, 1).astype(np.float32)


def _scenario(seed=0):
    train_px = np.concatenate([_blobs(24, -0.5, 1), _blobs(24, 0.5, 2)])
    train_y = np.r_[np.zeros(24, np.int64), np.ones(24, np.int64)]
    test_px = np.concatenate([_blobs(16, -0.5, 3), _blobs(16, 0.5, 4)])
    test_y = np.r_[np.zeros(16, np.int64), np.ones(16, np.int64)]
    data = ArrayDataset(
        "toy",
        train_px,
        train_y,
        test_px,
        test_y,
        class_sets={"dim": frozenset({0}), "bright": frozenset({1})},
    )
    oe_px = _blobs(24, 0.0, 5)
    oe = ArrayDataset("toy-oe", oe_px, np.zeros(24, np.int64), oe_px[:4], np.zeros(4, np.int64))
    scenario = Scenario("toy", ("dim",), oe_source="toy-oe")
    return resolve(scenario, data=data, oe=oe, seed=seed)


def _trained(resolved, det_steps=6, gen_steps=3):
    det = AnomalyDetector(
        kind="bce", epochs=det_steps, max_steps=det_steps, batch_normal=16, batch_oe=16, seed=0
    )
    det.fit_sources(normal_source(resolved), positive_source(resolved))
    gen = CounterfactualGenerator(
        detector=det,
        width_divisor=16,
        epochs=gen_steps,
        max_steps=gen_steps,
        batch_normal=16,
        batch_oe=16,
        seed=0,
    )
    gen.fit_sources(normal_source(resolved), positive_source(resolved))
    return det, gen


@pytest.fixture(scope="module")
def trained_pair():
    resolved = _scenario()
    det, gen = _trained(resolved)
    return resolved, det, gen


def test_evaluate_scenario_row_contents(trained_pair):
    resolved, det, gen = trained_pair
    row = evaluate_scenario(gen, resolved, scale="smoke", batch_size=16)
    assert row.scenario == "toy__dim"
    assert row.kind == "bce"
    assert row.corpus == "toy"
    assert row.n_eval_normal == 16 and row.n_eval_anomaly == 16
    for name in ("auroc", "cf_auroc", "sub_auroc", "concept_acc"):
        assert 0.0 <= getattr(row, name) <= 1.0
    assert row.fid_n >= 0.0 and np.isfinite(row.fid_n)
    assert 0.0 <= row.score_distance <= 1.0


def test_evaluate_scenario_is_deterministic(trained_pair):
    resolved, det, gen = trained_pair
    row1 = evaluate_scenario(gen, resolved, scale="smoke", batch_size=16)
    row2 = evaluate_scenario(gen, resolved, scale="smoke", batch_size=16)
    assert row1 == row2


def test_eval_caps_limit_counts(trained_pair):
    resolved, det, gen = trained_pair
    row = evaluate_scenario(
        gen,
        resolved,
        scale="smoke",
        max_eval_normals=5,
        max_eval_anomalies=7,
        batch_size=16,
        with_substitution=False,
    )
    assert row.n_eval_normal == 5 and row.n_eval_anomaly == 7
    assert np.isnan(row.sub_auroc)


class _IdentityGenerator:
    """Stub returning the input unchanged, scored by a real detector."""

    def __init__(self, detector, n_concepts=2):
        self.detector = detector
        self.n_concepts = n_concepts

    def counterfactual_set(self, X, batch_size=256):
        pixels = np.repeat(X[:, None], self.n_concepts, axis=1)
        scores = np.stack([self.detector.score_samples(X)] * self.n_concepts, axis=1)
        return pixels, scores


def test_cf_auroc_identity_generator_collapses_to_ad_auroc(trained_pair):
    resolved, det, gen = trained_pair
    normals = resolved.test_normal_batch().pixels
    anomalies = resolved.test_anomaly_batch().pixels
    value = cf_auroc(det, _IdentityGenerator(det), anomalies, normals)
    expected = auroc(det.score_samples(normals), det.score_samples(anomalies))
    assert value == pytest.approx(expected, abs=1e-12)


def test_concept_hits_count_ties_as_wrong():
    proba = np.array([[0.5, 0.5], [0.6, 0.4], [0.4, 0.6]])
    assert concept_hits(proba, 0).tolist() == [False, True, False]
    assert concept_hits(proba, 1).tolist() == [False, False, True]


class _RandomConceptGenerator:
    """Stub whose concept classifier answers uniformly at random."""

    def __init__(self, n_concepts=2, seed=0):
        self.n_concepts = n_concepts
        self._rng = np.random.default_rng(seed)

    def transform(self, X, alpha=0.0, k=0, batch_size=256):
        return X

    def predict_concept_proba(self, X, X_out, batch_size=256):
        raw = self._rng.uniform(size=(len(X), self.n_concepts))
        return raw / raw.sum(axis=1, keepdims=True)


def test_concept_accuracy_random_classifier_near_half():
    X = np.zeros((1000, 1, 28, 28), dtype=np.float32)
    acc = concept_accuracy(_RandomConceptGenerator(seed=3), X)
    # Binomial 5-sigma bound around 0.5 over 2000 draws.
    assert abs(acc - 0.5) < 5 * 0.5 / np.sqrt(2000)


def test_concept_accuracy_rejects_empty(trained_pair):
    _, _, gen = trained_pair
    with pytest.raises(InvalidInputError):
        concept_accuracy(gen, np.zeros((0, 1, 28, 28), dtype=np.float32))


def test_substitution_identity_reproduces_standard_auroc(trained_pair):
    resolved, det, gen = trained_pair
    normals = resolved.test_normal_batch().pixels
    anomalies = resolved.test_anomaly_batch().pixels
    standard = auroc(det.score_samples(normals), det.score_samples(anomalies))
    substituted = substitution_auroc(
        resolved,
        resolved.train_normal_batch().pixels,
        det.get_params(),
        batch_size=16,
    )
    # Same seed, same pool, same stream: the retrain is bit-identical.
    assert substituted == pytest.approx(standard, abs=1e-12)


def test_substitution_rejects_empty_replacement(trained_pair):
    resolved, det, _ = trained_pair
    with pytest.raises(InvalidInputError):
        substitution_auroc(
            resolved, np.zeros((0, 1, 28, 28), np.float32), det.get_params()
        )

"""Classifier-bias probe on the colored-digit corpus.

Normal data is red digits plus the digit one in every color. Two
binary-score detectors are trained: one with the generic exposure
corpus, one supervised with only the blue ground-truth anomalies as its
positive pool. Both are then evaluated on ALL ground-truth anomalies.
The supervised detector keys on blue and misses the other anomaly
colors, so its AuROC drops well below the exposure-trained one — the
failure mode the counterfactual grids make visible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..data.datasets import Dataset
from ..data.scenarios import ResolvedScenario, find_scenario, resolve
from ..metrics.evaluation import score_indices
from ..metrics.ranking import auroc
from .grids import export_grid
from .presets import ScalePreset, preset_for
from .runner import assert_no_leak, train_detector_for, train_generator_for

NORMAL_CLASSES = ("red", "one")
SUPERVISED_POOL = "train:blue"


@dataclass
class BiasProbeReport:
    """Both detectors' AuROCs over all ground-truth anomalies."""

    scenario: str
    scale: str
    seed: int
    oe_auroc: float
    supervised_auroc: float
    n_test_normal: int
    n_test_anomaly: int

    @property
    def gap(self) -> float:
        return self.oe_auroc - self.supervised_auroc

    def as_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "scale": self.scale,
            "seed": self.seed,
            "oe_auroc": self.oe_auroc,
            "supervised_auroc": self.supervised_auroc,
            "gap": self.gap,
            "n_test_normal": self.n_test_normal,
            "n_test_anomaly": self.n_test_anomaly,
        }


def _full_test_auroc(detector, resolved: ResolvedScenario, batch_size: int) -> float:
    normal = score_indices(
        detector, resolved.data, "test", resolved.test_normal_idx, batch_size
    )
    anomaly = score_indices(
        detector, resolved.data, "test", resolved.test_anomaly_idx, batch_size
    )
    return auroc(normal, anomaly)


def bias_probe(
    scale: str | ScalePreset = "desk",
    dataset: str = "colored-mnist",
    seed: int = 0,
    out_dir=None,
    data: Dataset | None = None,
    root=None,
    cache_dir=None,
    dataset_options: dict | None = None,
    with_grids: bool = False,
    batch_size: int = 256,
    device: str = "cpu",
) -> BiasProbeReport:
    """Train the exposure and blue-supervised detectors, compare AuROCs.

    ``with_grids`` additionally trains a counterfactual generator per
    detector and writes its grid (needs ``out_dir``; substantially
    slower, so off by default).
    """
    preset = preset_for(scale)
    scenario = find_scenario(dataset, "+".join(NORMAL_CLASSES))

    def resolved_with(positive_source: str) -> ResolvedScenario:
        r = resolve(
            scenario,
            data=data,
            root=root,
            cache_dir=cache_dir,
            seed=seed,
            subset=preset.subset,
            positive_source=positive_source,
            dataset_options=dataset_options,
        )
        assert_no_leak(r)
        return r

    resolved_oe = resolved_with("oe")
    resolved_sup = resolved_with(SUPERVISED_POOL)

    detector_oe = train_detector_for(resolved_oe, "bce", preset, seed, device=device)
    detector_sup = train_detector_for(resolved_sup, "bce", preset, seed, device=device)

    report = BiasProbeReport(
        scenario=scenario.slug,
        scale=preset.name,
        seed=seed,
        oe_auroc=_full_test_auroc(detector_oe, resolved_oe, batch_size),
        supervised_auroc=_full_test_auroc(detector_sup, resolved_sup, batch_size),
        n_test_normal=int(len(resolved_oe.test_normal_idx)),
        n_test_anomaly=int(len(resolved_oe.test_anomaly_idx)),
    )

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "bias_probe.json").write_text(
            json.dumps(report.as_dict(), indent=2, sort_keys=True)
        )
        if with_grids:
            anomalies = resolved_oe.test_anomaly_batch()
            for label, resolved, detector in (
                ("oe", resolved_oe, detector_oe),
                ("supervised", resolved_sup, detector_sup),
            ):
                generator = train_generator_for(
                    resolved, detector, preset, seed, device=device
                )
                export_grid(
                    generator, anomalies, out / f"grid_{label}.png",
                    top=min(8, len(anomalies)),
                )
    return report

"""End-to-end scenario runs and multi-seed suites.

One run trains a detector, trains a counterfactual generator against
it, evaluates the pair, and persists a self-contained session bundle:

====================  ==================================================
``detector.bin``      detector checkpoint
``generator.bin``     generator checkpoint (embeds the frozen detector)
``report.csv``        one metrics row
``anomalies.bin``     ranked top anomalies (ids, scores, pixels)
``grid.png``          top-anomaly rows with per-concept counterfactuals
``manifest.json``     scenario, parameters, file checksums, the row
====================  ==================================================

A suite fans runs out over scenarios × kinds × seeds, records partial
failures without stopping, and writes combined + aggregated CSVs that
are exactly recomputable from the persisted per-run rows.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..cegen.estimator import (
    GENERATOR_DEFAULTS,
    SIGN_GENERATOR_DEFAULTS,
    CounterfactualGenerator,
)
from ..cegen.losses import SIGN_WEIGHTS
from ..cegen.persist import save_generator
from ..data.datasets import Dataset, load_dataset
from ..data.scenarios import ResolvedScenario, Scenario, find_scenario, resolve, scenario_catalog
from ..data.streams import normal_source, positive_source
from ..detectors.estimator import TRAINING_DEFAULTS, AnomalyDetector
from ..detectors.networks import arch_for_images
from ..detectors.persist import save_detector
from ..exceptions import ContractError, InvalidInputError
from ..io import file_sha256, write_container
from ..metrics.evaluation import capped_indices, evaluate_scenario, score_indices
from ..metrics.ranking import rank_by_score
from ..metrics.report import AggregateRow, MetricsRow, aggregate, write_rows
from .grids import export_grid
from .presets import ScalePreset, preset_for, scaled_epochs, scaled_milestones

ANOMALY_CACHE_MAGIC = b"CEADRANK"
ANOMALY_CACHE_VERSION = 1

OE_KINDS = ("bce", "hsc")


# ----------------------------------------------------------------------
# Parameter resolution.


def detector_params_for(
    resolved: ResolvedScenario, kind: str, preset: ScalePreset, seed: int
) -> dict:
    """Training parameters for one detector run at the given scale."""
    family = arch_for_images(resolved.data.channels, resolved.data.image_size).family
    base = TRAINING_DEFAULTS[family]
    if preset.detector_epochs is not None:
        epochs = preset.detector_epochs
        milestones = (max(1, 3 * epochs // 4),)
    else:
        epochs = scaled_epochs(base["epochs"], preset.detector_epoch_divisor)
        milestones = scaled_milestones(base["milestones"], preset.detector_epoch_divisor)
    return {
        "kind": kind,
        "epochs": epochs,
        "lr": base["lr"] * preset.detector_lr_scale,
        "milestones": milestones,
        "max_steps": preset.max_steps,
        "seed": seed,
    }


def generator_params_for(
    resolved: ResolvedScenario,
    preset: ScalePreset,
    seed: int,
    n_concepts: int = 2,
    alpha_grid: tuple[float, ...] = (0.0, 0.5, 1.0),
) -> dict:
    """Training parameters for one generator run at the given scale.

    Sign corpora use their own training budget and loss weights; every
    other corpus uses the shared defaults.
    """
    sign = resolved.scenario.dataset == "gtsdb"
    base = SIGN_GENERATOR_DEFAULTS if sign else GENERATOR_DEFAULTS
    if preset.ce_epochs is not None:
        epochs = preset.ce_epochs
        milestones = (max(1, 3 * epochs // 4),)
    else:
        epochs = scaled_epochs(base["epochs"], preset.ce_epoch_divisor)
        milestones = scaled_milestones(base["milestones"], preset.ce_epoch_divisor)
    return {
        "n_concepts": n_concepts,
        "alpha_grid": alpha_grid,
        "epochs": epochs,
        "lr": base["lr"] * preset.ce_lr_scale,
        "milestones": milestones,
        "weights": SIGN_WEIGHTS if sign else None,
        "width_divisor": preset.width_divisor,
        "max_steps": preset.max_steps,
        "seed": seed,
    }


# ----------------------------------------------------------------------
# Stage runners.


def assert_no_leak(resolved: ResolvedScenario) -> None:
    """Fail if any training sample id appears in the evaluation split."""
    train_ids = set(resolved.train_normal_ids()) | set(resolved.positive_ids())
    test_ids = {
        resolved.data.sample_id("test", int(i))
        for i in np.concatenate([resolved.test_normal_idx, resolved.test_anomaly_idx])
    }
    overlap = train_ids & test_ids
    if overlap:
        raise ContractError(
            f"scenario {resolved.scenario.name!r}: {len(overlap)} train ids "
            f"leak into the test split, e.g. {sorted(overlap)[:3]}"
        )


def train_detector_for(
    resolved: ResolvedScenario, kind: str, preset: ScalePreset, seed: int,
    device: str = "cpu",
) -> AnomalyDetector:
    params = detector_params_for(resolved, kind, preset, seed)
    detector = AnomalyDetector(device=device, **params)
    positive = positive_source(resolved) if kind in OE_KINDS else None
    return detector.fit_sources(normal_source(resolved), positive)


def train_generator_for(
    resolved: ResolvedScenario,
    detector: AnomalyDetector,
    preset: ScalePreset,
    seed: int,
    n_concepts: int = 2,
    alpha_grid: tuple[float, ...] = (0.0, 0.5, 1.0),
    device: str = "cpu",
) -> CounterfactualGenerator:
    params = generator_params_for(resolved, preset, seed, n_concepts, alpha_grid)
    generator = CounterfactualGenerator(detector=detector, device=device, **params)
    positive = positive_source(resolved) if detector.kind in OE_KINDS else None
    return generator.fit_sources(normal_source(resolved), positive)


# ----------------------------------------------------------------------
# Session bundles.


@dataclass(frozen=True)
class RunPaths:
    """File layout of one persisted scenario run."""

    directory: Path

    @property
    def detector(self) -> Path:
        return self.directory / "detector.bin"

    @property
    def generator(self) -> Path:
        return self.directory / "generator.bin"

    @property
    def report(self) -> Path:
        return self.directory / "report.csv"

    @property
    def anomalies(self) -> Path:
        return self.directory / "anomalies.bin"

    @property
    def grid(self) -> Path:
        return self.directory / "grid.png"

    @property
    def manifest(self) -> Path:
        return self.directory / "manifest.json"


@dataclass
class RunResult:
    row: MetricsRow
    paths: RunPaths | None
    detector: AnomalyDetector
    generator: CounterfactualGenerator


def save_anomaly_cache(
    path, resolved: ResolvedScenario, detector: AnomalyDetector,
    cap: int | None, top: int, batch_size: int = 256,
) -> list[tuple[str, float]]:
    """Persist the ranked most-anomalous test images with their pixels.

    The ranking pool is the (optionally capped) anomaly evaluation set;
    the cache keeps the ``top`` entries so serving never needs the
    source corpus. Returns the ranked (id, score) list.
    """
    pool = capped_indices(resolved.test_anomaly_idx, cap, resolved.seed, "anomaly")
    scores = score_indices(detector, resolved.data, "test", pool, batch_size)
    ids = [resolved.data.sample_id("test", int(i)) for i in pool]
    ranked = rank_by_score(ids, scores, top=top)
    index_of = {sample_id: int(i) for sample_id, i in zip(ids, pool)}
    batch = resolved.data.batch(
        "test", [index_of[sample_id] for sample_id, _ in ranked]
    )
    write_container(
        path,
        ANOMALY_CACHE_MAGIC,
        ANOMALY_CACHE_VERSION,
        meta={
            "ids": [sample_id for sample_id, _ in ranked],
            "pool_size": int(len(pool)),
        },
        arrays={
            "pixels": batch.pixels.astype(np.float32),
            "scores": np.asarray([s for _, s in ranked], dtype=np.float64),
        },
    )
    return ranked


def _scenario_meta(scenario: Scenario) -> dict:
    return {
        "name": scenario.name,
        "slug": scenario.slug,
        "dataset": scenario.dataset,
        "normal_classes": list(scenario.normal_classes),
        "oe_source": scenario.oe_source,
    }


def run_scenario(
    scenario: Scenario,
    kind: str,
    seed: int,
    scale: str | ScalePreset = "desk",
    out_dir=None,
    data: Dataset | None = None,
    oe: Dataset | None = None,
    root=None,
    cache_dir=None,
    dataset_options: dict | None = None,
    positive_source: str = "oe",
    n_concepts: int = 2,
    alpha_grid: tuple[float, ...] = (0.0, 0.5, 1.0),
    with_substitution: bool = True,
    with_grid: bool = True,
    device: str = "cpu",
) -> RunResult:
    """Train, evaluate, and (optionally) persist one scenario run."""
    preset = preset_for(scale)
    resolved = resolve(
        scenario,
        data=data,
        oe=oe,
        root=root,
        cache_dir=cache_dir,
        seed=seed,
        subset=preset.subset,
        positive_source=positive_source,
        dataset_options=dataset_options,
    )
    assert_no_leak(resolved)

    started = time.monotonic()
    detector = train_detector_for(resolved, kind, preset, seed, device=device)
    detector_done = time.monotonic()
    generator = train_generator_for(
        resolved, detector, preset, seed, n_concepts, alpha_grid, device=device
    )
    generator_done = time.monotonic()
    row = evaluate_scenario(
        generator,
        resolved,
        scale=preset.name,
        max_eval_normals=preset.max_eval_normals,
        max_eval_anomalies=preset.max_eval_anomalies,
        with_substitution=with_substitution,
    )
    evaluated = time.monotonic()

    paths = None
    if out_dir is not None:
        paths = RunPaths(Path(out_dir))
        paths.directory.mkdir(parents=True, exist_ok=True)
        save_detector(detector, paths.detector)
        save_generator(generator, paths.generator)
        write_rows(paths.report, [row])
        ranked = save_anomaly_cache(
            paths.anomalies, resolved, detector,
            cap=preset.max_eval_anomalies, top=preset.cache_top,
        )
        if with_grid:
            grid_pool = resolved.data.batch(
                "test",
                capped_indices(
                    resolved.test_anomaly_idx, preset.max_eval_anomalies,
                    resolved.seed, "anomaly",
                ),
            )
            export_grid(generator, grid_pool, paths.grid, top=min(8, len(grid_pool)))
        manifest = {
            "version": 1,
            "scenario": _scenario_meta(scenario),
            "kind": kind,
            "seed": seed,
            "scale": preset.name,
            "subset": preset.subset,
            "positive_pool": resolved.positive_pool,
            "n_concepts": n_concepts,
            "alpha_grid": list(alpha_grid),
            "paths": {
                "detector": paths.detector.name,
                "generator": paths.generator.name,
                "report": paths.report.name,
                "anomalies": paths.anomalies.name,
                "grid": paths.grid.name if with_grid else None,
            },
            "checksums": {
                "detector": file_sha256(paths.detector),
                "generator": file_sha256(paths.generator),
                "anomalies": file_sha256(paths.anomalies),
            },
            "row": asdict(row),
            "top_anomalies": [
                {"id": sample_id, "score": score} for sample_id, score in ranked
            ],
            "elapsed_seconds": {
                "detector": round(detector_done - started, 3),
                "generator": round(generator_done - detector_done, 3),
                "evaluation": round(evaluated - generator_done, 3),
            },
        }
        paths.manifest.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return RunResult(row=row, paths=paths, detector=detector, generator=generator)


# ----------------------------------------------------------------------
# Suites.


@dataclass
class SuiteConfig:
    """What to run: scenarios × detector kinds × seeds at one scale."""

    dataset: str
    out_dir: Path | str
    scenarios: tuple[str, ...] | None = None  # names/slugs; None = full catalog
    kinds: tuple[str, ...] = ("bce",)
    seeds: tuple[int, ...] = (0, 1, 2, 3)
    scale: str = "desk"
    dataset_options: dict | None = None
    root: str | None = None
    cache_dir: str | None = None
    with_substitution: bool = True
    with_grid: bool = True
    device: str = "cpu"

    def __post_init__(self):
        if len(self.seeds) < 1:
            raise InvalidInputError("seeds must contain at least one entry")
        if self.scenarios is not None and len(self.scenarios) == 0:
            raise InvalidInputError("scenario subset must be nonempty")
        for kind in self.kinds:
            if kind not in ("dsvdd", "bce", "hsc"):
                raise InvalidInputError(f"unknown detector kind {kind!r}")


@dataclass
class SuiteResult:
    rows: list[MetricsRow]
    aggregates: list[AggregateRow]
    failures: list[dict]
    out_dir: Path
    run_dirs: list[Path] = field(default_factory=list)

    @property
    def report_path(self) -> Path:
        return self.out_dir / "report.csv"

    @property
    def aggregate_path(self) -> Path:
        return self.out_dir / "aggregate.csv"

    @property
    def manifest_path(self) -> Path:
        return self.out_dir / "manifest.json"


def run_suite(config: SuiteConfig) -> SuiteResult:
    """Run every (scenario, kind, seed) cell; failures are recorded, not fatal."""
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if config.scenarios is None:
        scenarios = list(scenario_catalog(config.dataset))
    else:
        scenarios = [find_scenario(config.dataset, name) for name in config.scenarios]

    opts = config.dataset_options or {}
    loaded: dict[str, Dataset] = {}

    def corpus(name: str) -> Dataset:
        if name not in loaded:
            loaded[name] = load_dataset(
                name, root=config.root, cache_dir=config.cache_dir, **opts
            )
        return loaded[name]

    rows: list[MetricsRow] = []
    failures: list[dict] = []
    runs: list[dict] = []
    run_dirs: list[Path] = []
    for scenario in scenarios:
        for kind in config.kinds:
            for seed in config.seeds:
                run_dir = out_dir / f"{scenario.slug}__{kind}__s{seed}"
                cell = {
                    "scenario": scenario.slug,
                    "kind": kind,
                    "seed": seed,
                    "dir": run_dir.name,
                }
                try:
                    result = run_scenario(
                        scenario,
                        kind,
                        seed,
                        scale=config.scale,
                        out_dir=run_dir,
                        data=corpus(scenario.dataset),
                        oe=corpus(scenario.oe_source) if scenario.oe_source else None,
                        with_substitution=config.with_substitution,
                        with_grid=config.with_grid,
                        device=config.device,
                    )
                except Exception as exc:  # noqa: BLE001 — recorded per cell
                    failures.append(
                        {**cell, "error": f"{type(exc).__name__}: {exc}"}
                    )
                    runs.append({**cell, "ok": False})
                    continue
                rows.append(result.row)
                run_dirs.append(run_dir)
                runs.append({**cell, "ok": True})

    write_rows(out_dir / "report.csv", rows)
    aggregates = aggregate(rows) if rows else []
    if aggregates:
        write_rows(out_dir / "aggregate.csv", aggregates, cls=AggregateRow)
    manifest = {
        "version": 1,
        "config": {
            **{
                k: (str(v) if isinstance(v, Path) else v)
                for k, v in asdict(config).items()
            },
        },
        "runs": runs,
        "failures": failures,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True)
    )
    return SuiteResult(
        rows=rows,
        aggregates=aggregates,
        failures=failures,
        out_dir=out_dir,
        run_dirs=run_dirs,
    )

"""Read-only serving sessions loaded from persisted run bundles.

A session is one run directory (manifest + checkpoints + ranked-anomaly
cache). Everything is loaded once and never mutated; concurrent request
handlers share the loaded state freely.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..cegen.estimator import CounterfactualGenerator
from ..cegen.persist import load_generator
from ..exceptions import ContractError, InvalidInputError
from ..harness.runner import ANOMALY_CACHE_MAGIC, ANOMALY_CACHE_VERSION
from ..io import read_container
from ..metrics.ranking import rank_by_score
from ..metrics.report import MetricsRow, read_rows

ENV_CKPT_DIR = "CEAD_CKPT_DIR"


def rank_anomalies(detector, test_set, top_n: int) -> list[tuple[str, float]]:
    """Most anomalous samples first; ties break by id."""
    if top_n <= 0:
        raise InvalidInputError(f"top_n must be positive, got {top_n}")
    scores = detector.score_samples(test_set.pixels)
    return rank_by_score(test_set.ids, scores, top=top_n)


@dataclass(frozen=True)
class RankedAnomalies:
    """Descending-score anomaly cache with materialized pixels."""

    ids: tuple[str, ...]
    scores: np.ndarray
    pixels: np.ndarray
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (len(self.ids) == len(self.scores) == len(self.pixels)):
            raise ContractError("ranked anomaly cache arrays disagree on length")
        order = list(zip(-self.scores, self.ids))
        if order != sorted(order):
            raise ContractError("ranked anomaly cache is not score-sorted")
        object.__setattr__(self, "_index", {i: r for r, i in enumerate(self.ids)})

    def __len__(self) -> int:
        return len(self.ids)

    def row_of(self, sample_id: str) -> int | None:
        return self._index.get(sample_id)

    def top(self, n: int) -> list[tuple[str, float]]:
        return [(i, float(s)) for i, s in zip(self.ids[:n], self.scores[:n])]


def load_ranked_anomalies(path: str | Path) -> RankedAnomalies:
    _, meta, arrays = read_container(
        path, ANOMALY_CACHE_MAGIC, max_version=ANOMALY_CACHE_VERSION
    )
    return RankedAnomalies(
        ids=tuple(meta["ids"]),
        scores=arrays["scores"],
        pixels=arrays["pixels"],
    )


@dataclass(frozen=True)
class SessionState:
    """One loaded run: immutable checkpoints plus the anomaly ranking."""

    name: str
    directory: Path
    scenario: dict
    kind: str
    seed: int
    scale: str
    generator: CounterfactualGenerator
    anomalies: RankedAnomalies
    rows: tuple[MetricsRow, ...]

    @property
    def detector(self):
        return self.generator.detector

    @property
    def n_concepts(self) -> int:
        return self.generator.codebook_.n_concepts

    @property
    def alpha_grid(self) -> tuple[float, ...]:
        return tuple(float(a) for a in self.generator.codebook_.alpha_grid)


def _run_manifest(directory: Path) -> dict | None:
    """The manifest if ``directory`` is a run bundle (suite roots have a
    manifest too, but without checkpoint paths)."""
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        return None
    manifest = json.loads(manifest_path.read_text())
    return manifest if "paths" in manifest else None


def load_session(directory: str | Path, device: str = "cpu") -> SessionState:
    directory = Path(directory)
    manifest = _run_manifest(directory)
    if manifest is None:
        raise InvalidInputError(f"{directory} is not a run bundle")
    paths = manifest["paths"]
    generator = load_generator(directory / paths["generator"], device=device)
    return SessionState(
        name=directory.name,
        directory=directory,
        scenario=manifest["scenario"],
        kind=manifest["kind"],
        seed=int(manifest["seed"]),
        scale=manifest["scale"],
        generator=generator,
        anomalies=load_ranked_anomalies(directory / paths["anomalies"]),
        rows=tuple(read_rows(directory / paths["report"])),
    )


def discover_sessions(ckpt_dir: str | Path, device: str = "cpu") -> dict[str, SessionState]:
    """Load every run bundle under ``ckpt_dir`` (or the dir itself)."""
    root = Path(ckpt_dir)
    if not root.exists():
        raise InvalidInputError(f"checkpoint directory {root} does not exist")
    if _run_manifest(root) is not None:
        return {root.name: load_session(root, device=device)}
    sessions = {}
    for child in sorted(p for p in root.iterdir() if p.is_dir()):
        if _run_manifest(child) is not None:
            sessions[child.name] = load_session(child, device=device)
    return sessions

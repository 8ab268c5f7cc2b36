"""Metrics rows, CSV persistence, and suite aggregation.

One row per (scenario, detector kind, seed, scale). The metric columns
follow the benchmark-table order: AuROC, score distance, counterfactual
AuROC, substitution AuROC, normalized FID, concept accuracy. All values
are fractions in [0, 1]-ish ranges (normalized FID 0.43 corresponds to
the percentage figure 43).

Floats serialize via ``repr`` (shortest exact round trip), so identical
runs produce byte-identical CSV files and aggregation is exactly
reproducible from persisted rows.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from ..exceptions import InvalidInputError

MEAN_ROW = "__mean__"


class _NanEqualRow:
    """Field-wise equality where NaN equals NaN.

    Rows legitimately carry NaN (e.g. a skipped substitution metric);
    replay comparisons must treat a faithfully reproduced NaN as equal.
    """

    def __eq__(self, other):
        if other.__class__ is not self.__class__:
            return NotImplemented
        for f in fields(self):
            a, b = getattr(self, f.name), getattr(other, f.name)
            if isinstance(a, float) and isinstance(b, float):
                if a != b and not (math.isnan(a) and math.isnan(b)):
                    return False
            elif a != b:
                return False
        return True

METRIC_COLUMNS = (
    "auroc",
    "score_distance",
    "cf_auroc",
    "sub_auroc",
    "fid_n",
    "concept_acc",
)


@dataclass(frozen=True, eq=False)
class MetricsRow(_NanEqualRow):
    scenario: str
    kind: str
    seed: int
    scale: str
    corpus: str
    auroc: float
    score_distance: float
    cf_auroc: float
    sub_auroc: float
    fid_n: float
    concept_acc: float
    n_eval_normal: int
    n_eval_anomaly: int

    def __post_init__(self):
        for name in ("auroc", "cf_auroc", "sub_auroc", "concept_acc"):
            value = getattr(self, name)
            if np.isfinite(value) and not (0.0 <= value <= 1.0):
                raise InvalidInputError(f"{name} must lie in [0, 1], got {value}")
        if np.isfinite(self.fid_n) and self.fid_n < 0:
            raise InvalidInputError(f"fid_n must be nonnegative, got {self.fid_n}")


@dataclass(frozen=True, eq=False)
class AggregateRow(_NanEqualRow):
    """Mean and population std per metric; one row per scenario plus a
    grand row (scenario = ``__mean__``) over the per-scenario means."""

    scenario: str
    kind: str
    scale: str
    corpus: str
    n_seeds: int
    auroc_mean: float
    auroc_std: float
    score_distance_mean: float
    score_distance_std: float
    cf_auroc_mean: float
    cf_auroc_std: float
    sub_auroc_mean: float
    sub_auroc_std: float
    fid_n_mean: float
    fid_n_std: float
    concept_acc_mean: float
    concept_acc_std: float


def _field_names(cls) -> list[str]:
    return [f.name for f in fields(cls)]


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _parse(cls, record: dict):
    kwargs = {}
    for f in fields(cls):
        raw = record[f.name]
        if f.type in ("int", int):
            kwargs[f.name] = int(raw)
        elif f.type in ("float", float):
            kwargs[f.name] = float(raw)
        else:
            kwargs[f.name] = raw
    return cls(**kwargs)


def write_rows(path: str | Path, rows, cls=MetricsRow) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = _field_names(cls)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for row in rows:
            writer.writerow([_cell(getattr(row, n)) for n in names])
    return path


def read_rows(path: str | Path, cls=MetricsRow) -> list:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        expected = _field_names(cls)
        if reader.fieldnames != expected:
            raise InvalidInputError(
                f"{path}: header {reader.fieldnames} does not match {expected}"
            )
        return [_parse(cls, record) for record in reader]


def aggregate(rows: list[MetricsRow]) -> list[AggregateRow]:
    """Per-scenario mean/std over seeds, plus one grand row per group.

    Rows are grouped by (kind, scale, corpus); within a group each
    scenario aggregates over its seeds, then the grand row takes the
    mean and population std across the per-scenario means.
    """
    if not rows:
        raise InvalidInputError("aggregate: no rows")
    groups: dict[tuple, dict[str, list[MetricsRow]]] = {}
    for row in rows:
        key = (row.kind, row.scale, row.corpus)
        groups.setdefault(key, {}).setdefault(row.scenario, []).append(row)

    out: list[AggregateRow] = []
    for (kind, scale, corpus), per_scenario in groups.items():
        scenario_means: dict[str, dict[str, float]] = {}
        for scenario, seed_rows in per_scenario.items():
            stats = {}
            for metric in METRIC_COLUMNS:
                values = np.asarray([getattr(r, metric) for r in seed_rows], dtype=np.float64)
                stats[f"{metric}_mean"] = float(values.mean())
                stats[f"{metric}_std"] = float(values.std())
            scenario_means[scenario] = stats
            out.append(
                AggregateRow(
                    scenario=scenario,
                    kind=kind,
                    scale=scale,
                    corpus=corpus,
                    n_seeds=len(seed_rows),
                    **stats,
                )
            )
        grand = {}
        for metric in METRIC_COLUMNS:
            means = np.asarray(
                [scenario_means[s][f"{metric}_mean"] for s in scenario_means],
                dtype=np.float64,
            )
            grand[f"{metric}_mean"] = float(means.mean())
            grand[f"{metric}_std"] = float(means.std())
        out.append(
            AggregateRow(
                scenario=MEAN_ROW,
                kind=kind,
                scale=scale,
                corpus=corpus,
                n_seeds=min(len(v) for v in per_scenario.values()),
                **grand,
            )
        )
    return out

"""Scenario definitions and deterministic split resolution.

A scenario names a dataset, the class sets whose union counts as
normal, and where training positives come from. Resolution turns that
into concrete index sets: normal training indices (optionally a seeded
subset), a positive training pool, and the test split partitioned into
normal and anomalous halves.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from ..exceptions import DegenerateInputError, InvalidInputError
from ..validation import check_fraction, check_seed, rng_from, subset_indices
from .batch import ImageBatch
from .colors import PALETTE
from .datasets import CIFAR10_CLASSES, DIGIT_WORDS, Dataset, load_dataset

# Default outlier-exposure corpus per training corpus.
OE_SOURCES = {
    "mnist": "emnist",
    "colored-mnist": "colored-emnist",
    "cifar10": "cifar100",
    "gtsdb": "cifar100",
    "synth-digits": "synth-letters",
    "colored-synth-digits": "colored-synth-letters",
}

_SIGN_SCENARIOS: tuple[tuple[str, ...], ...] = (
    ("speed limit 30", "speed limit 50"),
    ("speed limit 50", "speed limit 70"),
    ("speed limit 70", "speed limit 100"),
    ("speed limit 100", "speed limit 120"),
    ("give way", "stop"),
    ("danger", "construction warning"),
    ("all restriction ends signs",),
    ("all speed limit signs",),
    ("all blue signs",),
    ("all warning signs",),
)


@dataclass(frozen=True)
class Scenario:
    """Normality definition over one dataset."""

    dataset: str
    normal_classes: tuple[str, ...]
    oe_source: str | None = None

    def __post_init__(self):
        if not self.normal_classes:
            raise InvalidInputError("scenario needs at least one normal class set")
        object.__setattr__(self, "normal_classes", tuple(self.normal_classes))

    @property
    def name(self) -> str:
        return " + ".join(self.normal_classes)

    @property
    def slug(self) -> str:
        return f"{self.dataset}__" + "+".join(
            c.replace(" ", "_") for c in self.normal_classes
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "dataset": self.dataset,
                "normal_classes": list(self.normal_classes),
                "oe_source": self.oe_source,
            },
            sort_keys=True,
        )

    @staticmethod
    def from_json(text: str) -> "Scenario":
        obj = json.loads(text)
        return Scenario(
            obj["dataset"], tuple(obj["normal_classes"]), obj.get("oe_source")
        )


def make_scenario(
    dataset: str,
    normal_classes,
    oe_source: str | None = "default",
) -> Scenario:
    if oe_source == "default":
        oe_source = OE_SOURCES.get(dataset)
    return Scenario(dataset, tuple(normal_classes), oe_source)


def scenario_catalog(dataset: str) -> tuple[Scenario, ...]:
    """The benchmark scenario list for a dataset family.

    Ten-class sets get ten singletons plus the (i, i+1 mod 10) and
    (i, i+2 mod 10) pairs; colored sets get one color+one scenario per
    palette color; sign sets get the fixed ten-group list.
    """
    if dataset in ("mnist", "synth-digits", "cifar10"):
        names = CIFAR10_CLASSES if dataset == "cifar10" else DIGIT_WORDS
        singles = [make_scenario(dataset, (n,)) for n in names]
        pairs = [
            make_scenario(dataset, (names[i], names[(i + d) % 10]))
            for d in (1, 2)
            for i in range(10)
        ]
        return tuple(singles + pairs)
    if dataset in ("colored-mnist", "colored-synth-digits"):
        return tuple(
            make_scenario(dataset, (color.name, "one")) for color in PALETTE
        )
    if dataset == "gtsdb":
        return tuple(make_scenario(dataset, classes) for classes in _SIGN_SCENARIOS)
    raise InvalidInputError(f"no scenario catalog for dataset {dataset!r}")


def find_scenario(dataset: str, name: str) -> Scenario:
    """Look up a catalog scenario by its display name or slug."""
    for sc in scenario_catalog(dataset):
        if name in (sc.name, sc.slug, "+".join(sc.normal_classes)):
            return sc
    raise InvalidInputError(f"no scenario {name!r} in the {dataset} catalog")


@dataclass
class ResolvedScenario:
    """Concrete index sets for one scenario on loaded data.

    ``positive_pool`` records where training positives come from:
    ``"oe"`` (the outlier-exposure corpus), ``"train-anomalies"`` (ground
    truth anomalies from the training split, for supervised baselines),
    or ``"none"``.
    """

    scenario: Scenario
    data: Dataset
    oe: Dataset | None
    seed: int
    subset_fraction: float
    normal_labels: frozenset[int]
    train_normal_idx: np.ndarray
    test_normal_idx: np.ndarray
    test_anomaly_idx: np.ndarray
    positive_idx: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))
    positive_data: Dataset | None = None
    positive_pool: str = "none"

    @property
    def has_positives(self) -> bool:
        return self.positive_pool != "none" and len(self.positive_idx) > 0

    def train_normal_batch(self) -> ImageBatch:
        return self.data.batch("train", self.train_normal_idx)

    def test_normal_batch(self) -> ImageBatch:
        return self.data.batch("test", self.test_normal_idx)

    def test_anomaly_batch(self) -> ImageBatch:
        return self.data.batch("test", self.test_anomaly_idx)

    def train_normal_ids(self) -> np.ndarray:
        return np.asarray(
            [self.data.sample_id("train", int(i)) for i in self.train_normal_idx],
            dtype=object,
        )

    def positive_ids(self) -> np.ndarray:
        if not self.has_positives:
            return np.empty(0, dtype=object)
        return np.asarray(
            [self.positive_data.sample_id("train", int(i)) for i in self.positive_idx],
            dtype=object,
        )


def resolve(
    scenario: Scenario,
    data: Dataset | None = None,
    oe: Dataset | None = None,
    root=None,
    cache_dir=None,
    seed: int = 0,
    subset: float = 1.0,
    positive_source: str = "oe",
    dataset_options: dict | None = None,
) -> ResolvedScenario:
    """Materialize a scenario's index sets.

    ``positive_source`` is ``"oe"``, ``"none"``, or ``"train:<class>"``
    (ground-truth anomalies of the named class set from the training
    split, normal samples excluded).
    """
    check_seed(seed)
    check_fraction(subset, "subset")
    opts = dataset_options or {}
    if data is None:
        data = load_dataset(scenario.dataset, root=root, cache_dir=cache_dir, **opts)
    normal_labels = data.labels_for(scenario.normal_classes)

    train_labels = data.split_labels("train")
    test_labels = data.split_labels("test")
    train_normal = np.nonzero(np.isin(train_labels, list(normal_labels)))[0]
    test_normal = np.nonzero(np.isin(test_labels, list(normal_labels)))[0]
    test_anomaly = np.nonzero(~np.isin(test_labels, list(normal_labels)))[0]
    if train_normal.size == 0:
        raise DegenerateInputError(
            f"scenario {scenario.name!r}: no normal training samples"
        )
    if test_normal.size == 0 or test_anomaly.size == 0:
        raise DegenerateInputError(
            f"scenario {scenario.name!r}: test split lacks one of the halves"
        )
    if subset < 1.0:
        keep = subset_indices(
            train_normal.size, subset, rng_from(seed, "train-subset")
        )
        train_normal = train_normal[keep]

    positive_idx = np.empty(0, np.int64)
    positive_data: Dataset | None = None
    positive_pool = "none"
    if positive_source == "oe":
        if scenario.oe_source is not None:
            if oe is None:
                oe = load_dataset(
                    scenario.oe_source, root=root, cache_dir=cache_dir, **opts
                )
            positive_idx = np.arange(oe.split_size("train"))
            positive_data = oe
            positive_pool = "oe"
    elif positive_source.startswith("train:"):
        class_name = positive_source[len("train:"):]
        pool_labels = data.labels_for((class_name,)) - normal_labels
        if not pool_labels:
            raise DegenerateInputError(
                f"positive_source {positive_source!r} is empty after removing normals"
            )
        positive_idx = np.nonzero(np.isin(train_labels, list(pool_labels)))[0]
        if subset < 1.0:
            keep = subset_indices(
                positive_idx.size, subset, rng_from(seed, "positive-subset")
            )
            positive_idx = positive_idx[keep]
        positive_data = data
        positive_pool = "train-anomalies"
    elif positive_source != "none":
        raise InvalidInputError(
            f"positive_source must be 'oe', 'none', or 'train:<class>', "
            f"got {positive_source!r}"
        )

    return ResolvedScenario(
        scenario=scenario,
        data=data,
        oe=oe,
        seed=seed,
        subset_fraction=subset,
        normal_labels=normal_labels,
        train_normal_idx=train_normal,
        test_normal_idx=test_normal,
        test_anomaly_idx=test_anomaly,
        positive_idx=positive_idx,
        positive_data=positive_data,
        positive_pool=positive_pool,
    )


def with_train_normals(resolved: ResolvedScenario, idx: np.ndarray) -> ResolvedScenario:
    """Copy of a resolution with a different normal training index set."""
    return replace(resolved, train_normal_idx=np.asarray(idx, dtype=np.int64))

from .batch import ImageBatch
from .colors import PALETTE, ColorSpec, color_by_name, colorize, colorize_batch, palette
from .datasets import (
    ArrayDataset,
    ColoredDataset,
    Dataset,
    load_cache,
    load_dataset,
    save_cache,
)
from .scenarios import (
    OE_SOURCES,
    ResolvedScenario,
    Scenario,
    find_scenario,
    make_scenario,
    resolve,
    scenario_catalog,
    with_train_normals,
)
from .streams import (
    ArraySource,
    IndexedSource,
    TrainBatch,
    balanced_batches,
    normal_source,
    positive_source,
)

# Conventional name for the color-product corpus builder.
build_colored_mnist = ColoredDataset

__all__ = [
    "ImageBatch",
    "PALETTE",
    "ColorSpec",
    "color_by_name",
    "colorize",
    "colorize_batch",
    "palette",
    "ArrayDataset",
    "ColoredDataset",
    "Dataset",
    "build_colored_mnist",
    "load_cache",
    "load_dataset",
    "save_cache",
    "OE_SOURCES",
    "ResolvedScenario",
    "Scenario",
    "find_scenario",
    "make_scenario",
    "resolve",
    "scenario_catalog",
    "with_train_normals",
    "ArraySource",
    "IndexedSource",
    "TrainBatch",
    "balanced_batches",
    "normal_source",
    "positive_source",
]

"""Dataset access: loaders, registry, canonical cache.

A :class:`Dataset` exposes two splits (train/test) through labels, ids,
and on-demand pixel materialization. Concrete kinds:

* :class:`ArrayDataset` holds pixels in memory (archive loaders and the
  rendered-glyph corpora produce these).
* :class:`ColoredDataset` is a virtual product of a grayscale base with
  a color palette; sample ``i`` is base sample ``i // n_colors`` tinted
  with color ``i % n_colors``, colorized only when pixels are requested.

Archive loaders cover the common distribution formats: IDX image/label
files (optionally gzipped), CIFAR python pickle batches, and directories
of pre-cropped sign images grouped by class id. Loaded or generated
datasets are cached in a single binary container per corpus.
"""

from __future__ import annotations

import gzip
import os
import pickle
import struct
from abc import ABC, abstractmethod
from pathlib import Path

import numpy as np
from PIL import Image

from ..exceptions import InvalidInputError
from ..io import read_container, write_container
from ..validation import check_choice, check_positive_int, check_seed
from .batch import ImageBatch
from .colors import ColorSpec, colorize_batch, palette
from .glyphs import glyph_split

CACHE_MAGIC = b"CEADDATA"
CACHE_VERSION = 1

SPLITS = ("train", "test")

DIGIT_WORDS = (
    "zero", "one", "two", "three", "four",
    "five", "six", "seven", "eight", "nine",
)

CIFAR10_CLASSES = (
    "airplane", "automobile", "bird", "cat", "deer",
    "dog", "frog", "horse", "ship", "truck",
)

# 43-class traffic-sign taxonomy: named groups used by the scenario catalog.
SIGN_GROUPS: dict[str, frozenset[int]] = {
    "speed limit 30": frozenset({1}),
    "speed limit 50": frozenset({2}),
    "speed limit 70": frozenset({4}),
    "speed limit 100": frozenset({7}),
    "speed limit 120": frozenset({8}),
    "give way": frozenset({13}),
    "stop": frozenset({14}),
    "danger": frozenset({18}),
    "construction warning": frozenset({25}),
    "all restriction ends signs": frozenset({6, 32, 41, 42}),
    "all speed limit signs": frozenset({0, 1, 2, 3, 4, 5, 7, 8}),
    "all blue signs": frozenset(range(33, 41)),
    "all warning signs": frozenset({11} | set(range(18, 32))),
}


class Dataset(ABC):
    """Two-split image corpus with named class sets."""

    name: str
    channels: int
    image_size: int
    n_classes: int
    class_sets: dict[str, frozenset[int]]
    label_names: dict[int, str]

    @abstractmethod
    def split_size(self, split: str) -> int: ...

    @abstractmethod
    def split_labels(self, split: str) -> np.ndarray: ...

    @abstractmethod
    def batch(self, split: str, indices) -> ImageBatch: ...

    @abstractmethod
    def sample_id(self, split: str, index: int) -> str: ...

    @abstractmethod
    def index_for(self, split: str, sample_id: str) -> int: ...

    def split_ids(self, split: str) -> np.ndarray:
        return np.asarray(
            [self.sample_id(split, i) for i in range(self.split_size(split))],
            dtype=object,
        )

    def full(self, split: str) -> ImageBatch:
        return self.batch(split, np.arange(self.split_size(split)))

    def labels_for(self, class_names) -> frozenset[int]:
        out: set[int] = set()
        for name in class_names:
            if name not in self.class_sets:
                raise InvalidInputError(
                    f"{self.name}: unknown class set {name!r}; "
                    f"known: {sorted(self.class_sets)}"
                )
            out |= self.class_sets[name]
        return frozenset(out)

    def _check_split(self, split: str) -> str:
        return check_choice(split, SPLITS, "split")


class ArrayDataset(Dataset):
    def __init__(
        self,
        name: str,
        train_pixels: np.ndarray,
        train_labels: np.ndarray,
        test_pixels: np.ndarray,
        test_labels: np.ndarray,
        class_sets: dict[str, frozenset[int]] | None = None,
        label_names: dict[int, str] | None = None,
        n_classes: int | None = None,
    ):
        self.name = name
        self._pixels = {"train": train_pixels, "test": test_pixels}
        self._labels = {
            "train": np.asarray(train_labels, dtype=np.int64),
            "test": np.asarray(test_labels, dtype=np.int64),
        }
        self.channels = int(train_pixels.shape[1])
        self.image_size = int(train_pixels.shape[2])
        top = max(int(l.max(initial=-1)) for l in self._labels.values()) + 1
        self.n_classes = n_classes if n_classes is not None else top
        self.class_sets = dict(class_sets or {})
        self.label_names = dict(label_names or {})

    def split_size(self, split: str) -> int:
        return self._pixels[self._check_split(split)].shape[0]

    def split_labels(self, split: str) -> np.ndarray:
        return self._labels[self._check_split(split)]

    def sample_id(self, split: str, index: int) -> str:
        return f"{self.name}:{split}:{index:06d}"

    def index_for(self, split: str, sample_id: str) -> int:
        prefix = f"{self.name}:{split}:"
        if not sample_id.startswith(prefix):
            raise InvalidInputError(f"id {sample_id!r} is not from {self.name}/{split}")
        try:
            index = int(sample_id[len(prefix):])
        except ValueError:
            raise InvalidInputError(f"malformed sample id {sample_id!r}")
        if not (0 <= index < self.split_size(split)):
            raise InvalidInputError(f"id {sample_id!r} is out of range")
        return index

    def batch(self, split: str, indices) -> ImageBatch:
        self._check_split(split)
        idx = np.asarray(indices, dtype=np.int64)
        ids = np.asarray([self.sample_id(split, int(i)) for i in idx], dtype=object)
        return ImageBatch(self._pixels[split][idx], ids, self._labels[split][idx])


class ColoredDataset(Dataset):
    """Virtual |colors|-fold product of a grayscale base dataset.

    Labels are color-major: ``color_idx * base.n_classes + base_label``.
    Class sets are the base sets spread over all colors plus one set per
    color name, so scenarios can select by shape, by color, or both.
    """

    def __init__(self, base: Dataset, colors: tuple[ColorSpec, ...] | None = None):
        if base.channels != 1:
            raise InvalidInputError("ColoredDataset needs a grayscale base")
        self.base = base
        self.colors = colors if colors is not None else palette()
        self.name = f"colored-{base.name}"
        self.channels = 3
        self.image_size = base.image_size
        self.n_classes = base.n_classes * len(self.colors)
        b = base.n_classes
        self.class_sets = {}
        for ci, color in enumerate(self.colors):
            self.class_sets[color.name] = frozenset(ci * b + l for l in range(b))
        for cname, labels in base.class_sets.items():
            self.class_sets[cname] = frozenset(
                ci * b + l for ci in range(len(self.colors)) for l in labels
            )
        self.label_names = {
            ci * b + l: f"{color.name} {base.label_names.get(l, str(l))}"
            for ci, color in enumerate(self.colors)
            for l in range(b)
        }

    @property
    def n_colors(self) -> int:
        return len(self.colors)

    def split_size(self, split: str) -> int:
        return self.base.split_size(split) * self.n_colors

    def split_labels(self, split: str) -> np.ndarray:
        base_labels = self.base.split_labels(split)
        n, c, b = base_labels.shape[0], self.n_colors, self.base.n_classes
        return np.repeat(base_labels, c) + np.tile(np.arange(c, dtype=np.int64) * b, n)

    def sample_id(self, split: str, index: int) -> str:
        base_idx, color_idx = divmod(int(index), self.n_colors)
        return (
            f"{self.base.sample_id(split, base_idx)}#{self.colors[color_idx].name}"
        )

    def index_for(self, split: str, sample_id: str) -> int:
        if "#" not in sample_id:
            raise InvalidInputError(f"id {sample_id!r} lacks a color suffix")
        base_id, _, color_name = sample_id.rpartition("#")
        color_idx = next(
            (i for i, c in enumerate(self.colors) if c.name == color_name), None
        )
        if color_idx is None:
            raise InvalidInputError(f"id {sample_id!r} has unknown color {color_name!r}")
        return self.base.index_for(split, base_id) * self.n_colors + color_idx

    def batch(self, split: str, indices) -> ImageBatch:
        idx = np.asarray(indices, dtype=np.int64)
        base_idx, color_idx = np.divmod(idx, self.n_colors)
        base = self.base.batch(split, base_idx)
        n = idx.shape[0]
        out = np.empty((n, 3, self.image_size, self.image_size), np.float32)
        for ci in range(self.n_colors):
            mask = color_idx == ci
            if mask.any():
                out[mask] = colorize_batch(base.pixels[mask], self.colors[ci])
        ids = np.asarray([self.sample_id(split, int(i)) for i in idx], dtype=object)
        return ImageBatch(out, ids, self.split_labels(split)[idx])


# ---------------------------------------------------------------------------
# Archive readers.


def read_idx(path: str | Path) -> np.ndarray:
    """Read one IDX file (optionally .gz): big-endian header, ubyte data."""
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 4:
        raise InvalidInputError(f"{path}: truncated IDX header")
    zeros, dtype_code, ndim = raw[0] << 8 | raw[1], raw[2], raw[3]
    if zeros != 0 or dtype_code != 0x08:
        raise InvalidInputError(f"{path}: unsupported IDX magic {raw[:4].hex()}")
    dims = struct.unpack(f">{ndim}I", raw[4 : 4 + 4 * ndim])
    data = np.frombuffer(raw, dtype=np.uint8, offset=4 + 4 * ndim)
    expected = int(np.prod(dims))
    if data.size != expected:
        raise InvalidInputError(
            f"{path}: payload size {data.size} != header product {expected}"
        )
    return data.reshape(dims).copy()


def _ubyte_to_unit_range(images: np.ndarray) -> np.ndarray:
    return (images.astype(np.float32) / 127.5 - 1.0).astype(np.float32)


def _find_idx(root: Path, stem: str) -> Path:
    for suffix in ("", ".gz"):
        p = root / f"{stem}{suffix}"
        if p.exists():
            return p
    raise InvalidInputError(f"missing IDX file {root / stem}[.gz]")


def load_idx_pair(root: str | Path, images_stem: str, labels_stem: str):
    root = Path(root)
    images = read_idx(_find_idx(root, images_stem))
    labels = read_idx(_find_idx(root, labels_stem)).astype(np.int64)
    if images.ndim != 3 or images.shape[0] != labels.shape[0]:
        raise InvalidInputError(
            f"IDX pair mismatch: images {images.shape}, labels {labels.shape}"
        )
    return _ubyte_to_unit_range(images[:, None]), labels


def load_cifar_python(root: str | Path, files: list[str], label_key: bytes):
    """Concatenate CIFAR pickle batches into ``(n, 3, 32, 32)`` plus labels."""
    pixels, labels = [], []
    for fname in files:
        path = Path(root) / fname
        if not path.exists():
            raise InvalidInputError(f"missing CIFAR batch {path}")
        with open(path, "rb") as fh:
            entry = pickle.load(fh, encoding="bytes")
        data = np.asarray(entry[b"data"], dtype=np.uint8).reshape(-1, 3, 32, 32)
        pixels.append(data)
        labels.append(np.asarray(entry[label_key], dtype=np.int64))
    return _ubyte_to_unit_range(np.concatenate(pixels)), np.concatenate(labels)


def load_sign_crops(root: str | Path, image_size: int = 32):
    """Read pre-cropped sign images from ``root/{train,test}/<class_id>/*``."""
    root = Path(root)
    out = {}
    for split in SPLITS:
        split_dir = root / split
        if not split_dir.is_dir():
            raise InvalidInputError(f"missing split directory {split_dir}")
        pixels, labels = [], []
        for class_dir in sorted(split_dir.iterdir()):
            if not class_dir.is_dir() or not class_dir.name.isdigit():
                continue
            label = int(class_dir.name)
            for img_path in sorted(class_dir.iterdir()):
                if img_path.suffix.lower() not in (".ppm", ".png", ".jpg", ".jpeg", ".bmp"):
                    continue
                with Image.open(img_path) as img:
                    img = img.convert("RGB").resize(
                        (image_size, image_size), Image.BILINEAR
                    )
                    pixels.append(np.asarray(img, dtype=np.uint8).transpose(2, 0, 1))
                labels.append(label)
        if not pixels:
            raise InvalidInputError(f"no class-id image directories under {split_dir}")
        out[split] = (_ubyte_to_unit_range(np.stack(pixels)), np.asarray(labels, np.int64))
    return out["train"], out["test"]


# ---------------------------------------------------------------------------
# Canonical cache.


def save_cache(path: str | Path, dataset: ArrayDataset, source: str) -> Path:
    meta = {
        "name": dataset.name,
        "source": source,
        "channels": dataset.channels,
        "image_size": dataset.image_size,
        "n_classes": dataset.n_classes,
    }
    arrays = {
        "train_pixels": dataset._pixels["train"],
        "train_labels": dataset._labels["train"],
        "test_pixels": dataset._pixels["test"],
        "test_labels": dataset._labels["test"],
    }
    return write_container(path, CACHE_MAGIC, CACHE_VERSION, meta, arrays)


def load_cache(path: str | Path) -> tuple[dict, dict[str, np.ndarray]]:
    _, meta, arrays = read_container(path, CACHE_MAGIC, max_version=CACHE_VERSION)
    return meta, arrays


def _cache_dir(cache_dir: str | Path | None) -> Path:
    if cache_dir is not None:
        return Path(cache_dir)
    env = os.environ.get("CEAD_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "cead"


# ---------------------------------------------------------------------------
# Registry.

_SINGLETON = lambda names: {n: frozenset({i}) for i, n in enumerate(names)}

GLYPH_DEFAULTS = {
    "synth-digits": (3000, 400),
    "synth-letters": (1000, 200),
}


def _glyph_dataset(
    name: str,
    cache_dir: Path,
    n_train_per_class: int | None,
    n_test_per_class: int | None,
    seed: int,
) -> ArrayDataset:
    kind = "digits" if name == "synth-digits" else "letters"
    default_train, default_test = GLYPH_DEFAULTS[name]
    n_train = check_positive_int(
        n_train_per_class if n_train_per_class is not None else default_train,
        "n_train_per_class",
    )
    n_test = check_positive_int(
        n_test_per_class if n_test_per_class is not None else default_test,
        "n_test_per_class",
    )
    check_seed(seed)
    cache = cache_dir / f"{name}_tr{n_train}_te{n_test}_s{seed}.bin"
    if cache.exists():
        _, arrays = load_cache(cache)
    else:
        train_px, train_y = glyph_split(kind, "train", n_train, seed)
        test_px, test_y = glyph_split(kind, "test", n_test, seed)
        arrays = {
            "train_pixels": train_px,
            "train_labels": train_y,
            "test_pixels": test_px,
            "test_labels": test_y,
        }
    if kind == "digits":
        class_sets = _SINGLETON(DIGIT_WORDS)
        label_names = dict(enumerate(DIGIT_WORDS))
    else:
        letters = [chr(ord("a") + i) for i in range(26)]
        class_sets = _SINGLETON(letters)
        label_names = dict(enumerate(letters))
    ds = ArrayDataset(
        name,
        arrays["train_pixels"],
        arrays["train_labels"],
        arrays["test_pixels"],
        arrays["test_labels"],
        class_sets,
        label_names,
    )
    if not cache.exists():
        save_cache(cache, ds, source="rendered-glyphs")
    return ds


def load_dataset(
    name: str,
    root: str | Path | None = None,
    cache_dir: str | Path | None = None,
    include_gray: bool = True,
    n_train_per_class: int | None = None,
    n_test_per_class: int | None = None,
    seed: int = 0,
) -> Dataset:
    """Load a corpus by name.

    Archive-backed names (mnist, emnist, cifar10, cifar100, gtsdb) need
    ``root`` pointing at the unpacked distribution files. Rendered names
    (synth-digits, synth-letters) generate on first use and cache. A
    ``colored-`` prefix wraps the grayscale base in the color palette.
    """
    if name.startswith("colored-"):
        base = load_dataset(
            name[len("colored-"):],
            root=root,
            cache_dir=cache_dir,
            n_train_per_class=n_train_per_class,
            n_test_per_class=n_test_per_class,
            seed=seed,
        )
        return ColoredDataset(base, palette(include_gray=include_gray))

    cdir = _cache_dir(cache_dir)
    if name in GLYPH_DEFAULTS:
        cdir.mkdir(parents=True, exist_ok=True)
        return _glyph_dataset(name, cdir, n_train_per_class, n_test_per_class, seed)

    if root is None:
        raise InvalidInputError(f"dataset {name!r} needs a root directory of archives")
    root = Path(root)

    if name == "mnist":
        train_px, train_y = load_idx_pair(
            root / "mnist", "train-images-idx3-ubyte", "train-labels-idx1-ubyte"
        )
        test_px, test_y = load_idx_pair(
            root / "mnist", "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"
        )
        return ArrayDataset(
            name, train_px, train_y, test_px, test_y,
            _SINGLETON(DIGIT_WORDS), dict(enumerate(DIGIT_WORDS)),
        )

    if name == "emnist":
        train_px, train_y = load_idx_pair(
            root / "emnist",
            "emnist-letters-train-images-idx3-ubyte",
            "emnist-letters-train-labels-idx1-ubyte",
        )
        test_px, test_y = load_idx_pair(
            root / "emnist",
            "emnist-letters-test-images-idx3-ubyte",
            "emnist-letters-test-labels-idx1-ubyte",
        )
        # Letter images ship transposed relative to digit orientation.
        train_px = train_px.transpose(0, 1, 3, 2)
        test_px = test_px.transpose(0, 1, 3, 2)
        letters = [chr(ord("a") + i) for i in range(26)]
        return ArrayDataset(
            name, train_px, train_y - 1, test_px, test_y - 1,
            _SINGLETON(letters), dict(enumerate(letters)),
        )

    if name == "cifar10":
        base = root / "cifar-10-batches-py"
        train_px, train_y = load_cifar_python(
            base, [f"data_batch_{i}" for i in range(1, 6)], b"labels"
        )
        test_px, test_y = load_cifar_python(base, ["test_batch"], b"labels")
        return ArrayDataset(
            name, train_px, train_y, test_px, test_y,
            _SINGLETON(CIFAR10_CLASSES), dict(enumerate(CIFAR10_CLASSES)),
        )

    if name == "cifar100":
        base = root / "cifar-100-python"
        train_px, train_y = load_cifar_python(base, ["train"], b"fine_labels")
        test_px, test_y = load_cifar_python(base, ["test"], b"fine_labels")
        return ArrayDataset(name, train_px, train_y, test_px, test_y)

    if name == "gtsdb":
        (train_px, train_y), (test_px, test_y) = load_sign_crops(root / "gtsdb")
        return ArrayDataset(
            name, train_px, train_y, test_px, test_y,
            dict(SIGN_GROUPS), n_classes=43,
        )

    raise InvalidInputError(f"unknown dataset {name!r}")

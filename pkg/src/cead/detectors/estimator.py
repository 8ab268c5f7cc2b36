"""Anomaly detector estimator with bounded scores.

Three kinds share one backbone: ``dsvdd`` (bias-free net, squared
distance to a fixed random center, no positives), ``bce`` (logit head,
positives required), and ``hsc`` (pseudo-Huber distance in embedding
space, positives required). ``score_samples`` always returns values in
``[0, 1]``, higher meaning more anomalous.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np
import torch
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..data.batch import ImageBatch
from ..data.streams import ArraySource, TrainBatch, balanced_batches
from ..exceptions import DegenerateInputError, InvalidInputError
from ..validation import check_choice, check_pixels, check_seed
from .networks import DETECTOR_ARCHS, DetectorArch, DetectorNet, arch_for_images
from .scoring import bce_loss, bce_score, hsc_loss, hsc_score, radial_loss, radial_score

TRAINING_DEFAULTS: dict[str, dict] = {
    "gray28": {"epochs": 80, "lr": 1e-4, "milestones": (60,)},
    "color28": {"epochs": 120, "lr": 5e-5, "milestones": (100,)},
    "color32": {"epochs": 200, "lr": 1e-3, "milestones": (100, 150)},
}

KINDS = ("dsvdd", "bce", "hsc")


def _as_pixels(X) -> np.ndarray:
    if isinstance(X, ImageBatch):
        return X.pixels
    return check_pixels(X, "X")


class AnomalyDetector(BaseEstimator):
    """Bounded-score anomaly detector.

    Parameters left at ``None`` resolve to the architecture family's
    built-in training defaults at fit time; resolved values land in
    the ``epochs_`` / ``lr_`` / ``milestones_`` attributes.
    """

    def __init__(
        self,
        kind: str = "bce",
        arch: str | None = None,
        epochs: int | None = None,
        lr: float | None = None,
        milestones: tuple[int, ...] | None = None,
        lr_decay: float = 0.1,
        batch_normal: int = 128,
        batch_oe: int = 128,
        max_steps: int | None = None,
        seed: int = 0,
        device: str = "cpu",
    ):
        self.kind = kind
        self.arch = arch
        self.epochs = epochs
        self.lr = lr
        self.milestones = milestones
        self.lr_decay = lr_decay
        self.batch_normal = batch_normal
        self.batch_oe = batch_oe
        self.max_steps = max_steps
        self.seed = seed
        self.device = device

    # ------------------------------------------------------------------
    # Fitting.

    def fit(self, X, y=None) -> "AnomalyDetector":
        """Fit from an in-memory sample stack.

        ``y`` holds 0 for normal and 1 for positive (exposure) samples;
        the center-distance kind requires ``y`` absent or all zero.
        """
        pixels = _as_pixels(X)
        n = len(pixels)
        ids = np.asarray([f"mem:train:{i:06d}" for i in range(n)], dtype=object)
        if y is None:
            labels = np.zeros(n, dtype=np.int64)
        else:
            labels = np.asarray(y).astype(np.int64).reshape(-1)
            if labels.shape[0] != n:
                raise InvalidInputError(f"y: expected length {n}, got {labels.shape[0]}")
            if not np.isin(labels, (0, 1)).all():
                raise InvalidInputError("y: labels must be 0 (normal) or 1 (positive)")
        batch = ImageBatch(pixels, ids, labels)
        normal = ArraySource(batch.take(np.nonzero(labels == 0)[0]))
        pos_rows = np.nonzero(labels == 1)[0]
        positive = ArraySource(batch.take(pos_rows)) if pos_rows.size else None
        return self.fit_sources(normal, positive)

    def fit_sources(self, normal, positive=None) -> "AnomalyDetector":
        """Fit from sample sources (streaming pools)."""
        check_choice(self.kind, KINDS, "kind")
        check_seed(self.seed)
        if self.kind == "dsvdd" and positive is not None:
            raise InvalidInputError("dsvdd is trained without positive samples")
        if self.kind in ("bce", "hsc") and positive is None:
            raise DegenerateInputError(f"{self.kind} needs a positive sample pool")
        if len(normal) == 0:
            raise DegenerateInputError("empty normal pool")

        probe = normal.sample([0])
        arch = self._resolve_arch(probe.channels, probe.image_size)
        defaults = TRAINING_DEFAULTS[arch.family]
        self.epochs_ = int(self.epochs if self.epochs is not None else defaults["epochs"])
        self.lr_ = float(self.lr if self.lr is not None else defaults["lr"])
        self.milestones_ = tuple(
            self.milestones if self.milestones is not None else defaults["milestones"]
        )
        self.arch_ = arch

        torch.manual_seed(self.seed)
        net = DetectorNet(arch, self.kind).to(self.device)
        self.center_ = None
        if self.kind == "dsvdd":
            gen = torch.Generator().manual_seed(self.seed * 2**16 + 11)
            center = torch.randn(arch.embedding_dim, generator=gen)
            self.center_ = (center / center.norm()).to(self.device)

        optimizer = torch.optim.Adam(net.parameters(), lr=self.lr_)
        scheduler = torch.optim.lr_scheduler.MultiStepLR(
            optimizer, milestones=list(self.milestones_), gamma=self.lr_decay
        )
        stream = balanced_batches(
            normal,
            positive,
            self.batch_normal,
            self.batch_oe,
            seed=self.seed,
            epochs=self.epochs_,
        )
        self.loss_curve_ = []
        self.n_steps_ = 0
        net.train()
        last_epoch = 0
        for tb in stream:
            if tb.epoch != last_epoch:
                scheduler.step()
                last_epoch = tb.epoch
            if self.max_steps is not None and self.n_steps_ >= self.max_steps:
                break
            loss = self._step_loss(net, tb)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            self.loss_curve_.append(float(loss.detach()))
            self.n_steps_ += 1
        net.eval()
        self.net_ = net
        return self

    def _resolve_arch(self, channels: int, image_size: int) -> DetectorArch:
        if self.arch is not None:
            arch = check_choice(self.arch, DETECTOR_ARCHS, "arch")
            return DETECTOR_ARCHS[arch]
        return arch_for_images(channels, image_size)

    def _step_loss(self, net: DetectorNet, tb: TrainBatch) -> torch.Tensor:
        x_n = tb.normal.tensor(self.device)
        if self.kind == "dsvdd":
            return radial_loss(net.embed(x_n), self.center_)
        x_p = tb.positive.tensor(self.device)
        x = torch.cat([x_n, x_p])
        mask = torch.zeros(len(x), dtype=torch.bool, device=self.device)
        mask[len(x_n):] = True
        if self.kind == "bce":
            return bce_loss(net.logit(x), mask)
        return hsc_loss(net.embed(x), mask)

    # ------------------------------------------------------------------
    # Scoring.

    def torch_scores(self, x: torch.Tensor) -> torch.Tensor:
        """Differentiable scores for a pixel tensor (net stays in eval mode)."""
        check_is_fitted(self, "net_")
        if self.kind == "dsvdd":
            return radial_score(self.net_.embed(x), self.center_)
        if self.kind == "bce":
            return bce_score(self.net_.logit(x))
        return hsc_score(self.net_.embed(x))

    def score_samples(self, X, batch_size: int = 512) -> np.ndarray:
        """Anomaly scores in ``[0, 1]``, higher meaning more anomalous."""
        check_is_fitted(self, "net_")
        pixels = _as_pixels(X)
        self.net_.eval()
        out = []
        with torch.no_grad():
            for start in range(0, len(pixels), batch_size):
                chunk = torch.from_numpy(pixels[start : start + batch_size])
                out.append(self.torch_scores(chunk.to(self.device)).cpu().numpy())
        return np.concatenate(out).astype(np.float64)

    def predict(self, X, threshold: float = 0.5) -> np.ndarray:
        return (self.score_samples(X) >= threshold).astype(np.int64)

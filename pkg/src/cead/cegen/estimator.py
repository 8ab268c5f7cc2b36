"""Counterfactual generator estimator.

Wraps the conditional GAN (generator G, discriminator D, concept
classifier R) around a frozen, fitted anomaly detector. Training draws
a random target-score level and concept per sample and optimizes

* G and R jointly on: adversarial term, target-score term, L1
  reconstruction under the sample's own quantized score, L1 cycle term,
  and the concept-recovery term on both (original, generated) and
  (generated, cycled) pairs;
* D on a hinge loss every ``d_every``-th batch, with the full training
  batch (normal plus exposure samples) as the real side.
"""

from __future__ import annotations

import numpy as np
import torch
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..data.batch import ImageBatch
from ..data.streams import ArraySource, balanced_batches
from ..exceptions import DegenerateInputError, InvalidInputError
from ..validation import check_pixels, check_seed
from .conditions import ConditionCodebook
from .losses import (
    LossWeights,
    concept_loss,
    cycle_loss,
    generator_adversarial_loss,
    hinge_discriminator_loss,
    reconstruction_loss,
    target_score_loss,
)
from .networks import ConceptClassifierNet, DiscriminatorNet, GeneratorNet

GENERATOR_DEFAULTS = {"epochs": 350, "lr": 2e-4, "milestones": (300, 325)}

#: Longer schedule used for the traffic-sign corpus.
SIGN_GENERATOR_DEFAULTS = {"epochs": 2000, "lr": 1e-4, "milestones": (1750, 1900)}


def _as_pixels(X) -> np.ndarray:
    if isinstance(X, ImageBatch):
        return X.pixels
    return check_pixels(X, "X")


class CounterfactualGenerator(BaseEstimator):
    """Concept-conditioned generator of score-targeted counterfactuals.

    ``detector`` must be a fitted :class:`~cead.detectors.AnomalyDetector`;
    its parameters are frozen during generator training. Parameters left
    at ``None`` resolve to the built-in defaults at fit time (resolved
    values land in ``epochs_`` / ``lr_`` / ``milestones_`` / ``weights_``).
    """

    def __init__(
        self,
        detector=None,
        n_concepts: int = 2,
        alpha_grid: tuple[float, ...] = (0.0, 0.5, 1.0),
        epochs: int | None = None,
        lr: float | None = None,
        milestones: tuple[int, ...] | None = None,
        lr_decay: float = 0.1,
        batch_normal: int = 64,
        batch_oe: int = 64,
        d_every: int = 5,
        weights: LossWeights | None = None,
        width_divisor: int = 1,
        max_steps: int | None = None,
        seed: int = 0,
        device: str = "cpu",
    ):
        self.detector = detector
        self.n_concepts = n_concepts
        self.alpha_grid = alpha_grid
        self.epochs = epochs
        self.lr = lr
        self.milestones = milestones
        self.lr_decay = lr_decay
        self.batch_normal = batch_normal
        self.batch_oe = batch_oe
        self.d_every = d_every
        self.weights = weights
        self.width_divisor = width_divisor
        self.max_steps = max_steps
        self.seed = seed
        self.device = device

    # ------------------------------------------------------------------
    # Fitting.

    def fit(self, X, y=None) -> "CounterfactualGenerator":
        """Fit from an in-memory stack; ``y`` is 0 normal / 1 exposure."""
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

    def fit_sources(self, normal, positive=None) -> "CounterfactualGenerator":
        """Fit from sample sources (streaming pools)."""
        detector = self._check_detector()
        check_seed(self.seed)
        if detector.kind == "dsvdd" and positive is not None:
            raise InvalidInputError(
                "the center-distance detector trains its generator without positives"
            )
        if detector.kind in ("bce", "hsc") and positive is None:
            raise DegenerateInputError(
                f"generator training for kind={detector.kind!r} needs the positive pool"
            )
        if len(normal) == 0:
            raise DegenerateInputError("empty normal pool")

        codebook = ConditionCodebook(tuple(self.alpha_grid), self.n_concepts)
        self.codebook_ = codebook
        self.epochs_ = int(
            self.epochs if self.epochs is not None else GENERATOR_DEFAULTS["epochs"]
        )
        self.lr_ = float(self.lr if self.lr is not None else GENERATOR_DEFAULTS["lr"])
        self.milestones_ = tuple(
            self.milestones if self.milestones is not None else GENERATOR_DEFAULTS["milestones"]
        )
        self.weights_ = self.weights if self.weights is not None else LossWeights()

        probe = normal.sample([0])
        if probe.image_size % 4 != 0:
            raise InvalidInputError(
                f"image size {probe.image_size} is not divisible by 4 "
                "(the encoder halves the spatial size twice)"
            )
        self.channels_ = probe.channels
        self.image_size_ = probe.image_size

        for p in detector.net_.parameters():
            p.requires_grad_(False)
        detector.net_.eval()

        torch.manual_seed(self.seed)
        gen_net = GeneratorNet(self.channels_, codebook.n_conditions, self.width_divisor)
        disc_net = DiscriminatorNet(self.channels_, self.width_divisor)
        concept_net = ConceptClassifierNet(self.channels_, self.n_concepts, self.width_divisor)
        gen_net.to(self.device)
        disc_net.to(self.device)
        concept_net.to(self.device)

        opt_gr = torch.optim.Adam(
            list(gen_net.parameters()) + list(concept_net.parameters()), lr=self.lr_
        )
        opt_d = torch.optim.Adam(disc_net.parameters(), lr=self.lr_)
        sched_gr = torch.optim.lr_scheduler.MultiStepLR(
            opt_gr, milestones=list(self.milestones_), gamma=self.lr_decay
        )
        sched_d = torch.optim.lr_scheduler.MultiStepLR(
            opt_d, milestones=list(self.milestones_), gamma=self.lr_decay
        )
        draw = torch.Generator().manual_seed(self.seed * 2**16 + 29)
        grid_t = torch.tensor(codebook.alpha_grid, dtype=torch.float32, device=self.device)

        stream = balanced_batches(
            normal,
            positive,
            self.batch_normal,
            self.batch_oe,
            seed=self.seed,
            epochs=self.epochs_,
        )
        self.loss_curve_ = []
        self.disc_loss_curve_ = []
        self.n_steps_ = 0
        gen_net.train()
        disc_net.train()
        concept_net.train()
        last_epoch = 0
        for tb in stream:
            if tb.epoch != last_epoch:
                sched_gr.step()
                sched_d.step()
                last_epoch = tb.epoch
            if self.max_steps is not None and self.n_steps_ >= self.max_steps:
                break

            x = tb.normal.tensor(self.device)
            if tb.positive is not None:
                x = torch.cat([x, tb.positive.tensor(self.device)])
            n = len(x)
            levels = torch.randint(codebook.n_levels, (n,), generator=draw)
            k = torch.randint(codebook.n_concepts, (n,), generator=draw)
            levels = levels.to(self.device)
            k = k.to(self.device)
            alpha_value = grid_t[levels]
            cond_target = levels * codebook.n_concepts + k

            with torch.no_grad():
                phi_x = detector.torch_scores(x)
            self_levels, _ = codebook.quantize_alpha(phi_x.cpu().numpy())
            self_levels = torch.from_numpy(self_levels).to(self.device)
            cond_self = self_levels * codebook.n_concepts + k

            x_bar = gen_net(x, cond_target)
            x_rec = gen_net(x, cond_self)
            x_cyc = gen_net(x_bar, cond_self)

            loss_g = generator_adversarial_loss(disc_net(x_bar))
            loss_phi = target_score_loss(detector.torch_scores(x_bar), alpha_value)
            loss_rec = reconstruction_loss(x, x_rec)
            loss_cyc = cycle_loss(x, x_cyc)
            loss_con = concept_loss(
                concept_net(x, x_bar), concept_net(x_bar, x_cyc), k
            )
            w = self.weights_
            total = (
                w.gan * loss_g
                + w.phi * loss_phi
                + w.rec * (loss_rec + loss_cyc)
                + w.concept * loss_con
            )
            opt_gr.zero_grad()
            total.backward()
            opt_gr.step()
            self.loss_curve_.append(float(total.detach()))

            if self.n_steps_ % self.d_every == 0:
                loss_d = hinge_discriminator_loss(disc_net(x), disc_net(x_bar.detach()))
                opt_d.zero_grad()
                loss_d.backward()
                opt_d.step()
                self.disc_loss_curve_.append(float(loss_d.detach()))

            self.n_steps_ += 1

        gen_net.eval()
        disc_net.eval()
        concept_net.eval()
        self.generator_net_ = gen_net
        self.discriminator_net_ = disc_net
        self.concept_net_ = concept_net
        return self

    def _check_detector(self):
        if self.detector is None:
            raise InvalidInputError("a fitted detector is required")
        check_is_fitted(self.detector, "net_")
        return self.detector

    # ------------------------------------------------------------------
    # Generation.

    def _conditions(self, n: int, alpha, k) -> np.ndarray:
        alpha_arr = np.broadcast_to(np.asarray(alpha, dtype=np.float64), (n,))
        k_arr = np.broadcast_to(np.asarray(k, dtype=np.int64), (n,))
        return self.codebook_.encode(alpha_arr, k_arr)

    def transform(self, X, alpha=0.0, k=0, batch_size: int = 256) -> np.ndarray:
        """Counterfactuals for ``X`` at target score ``alpha``, concept ``k``.

        ``alpha`` and ``k`` may be scalars or per-sample arrays; the target
        score snaps to the nearest grid level. Returns pixels in [-1, 1].
        """
        check_is_fitted(self, "generator_net_")
        pixels = _as_pixels(X)
        cond = torch.from_numpy(self._conditions(len(pixels), alpha, k)).long()
        self.generator_net_.eval()
        out = []
        with torch.no_grad():
            for start in range(0, len(pixels), batch_size):
                chunk = torch.from_numpy(pixels[start : start + batch_size])
                c = cond[start : start + batch_size].to(self.device)
                out.append(self.generator_net_(chunk.to(self.device), c).cpu().numpy())
        return np.concatenate(out).astype(np.float32)

    def counterfactual_set(self, X, batch_size: int = 256):
        """All-concept counterfactuals at target score 0 for each sample.

        Returns ``(pixels, scores)`` with shapes ``(n, K, c, h, w)`` and
        ``(n, K)``; ``scores`` are the detector's scores of the outputs.
        """
        detector = self._check_detector()
        pixels = _as_pixels(X)
        per_concept = []
        per_scores = []
        for concept in range(self.n_concepts):
            cf = self.transform(pixels, alpha=0.0, k=concept, batch_size=batch_size)
            per_concept.append(cf)
            per_scores.append(detector.score_samples(cf))
        stacked = np.stack(per_concept, axis=1)
        scores = np.stack(per_scores, axis=1)
        return stacked, scores

    def predict_concept_proba(self, X, X_out, batch_size: int = 256) -> np.ndarray:
        """Concept probabilities for (original, output) image pairs."""
        check_is_fitted(self, "concept_net_")
        a = _as_pixels(X)
        b = _as_pixels(X_out)
        if a.shape != b.shape:
            raise InvalidInputError(
                f"pair shapes differ: {tuple(a.shape)} vs {tuple(b.shape)}"
            )
        self.concept_net_.eval()
        out = []
        with torch.no_grad():
            for start in range(0, len(a), batch_size):
                xa = torch.from_numpy(a[start : start + batch_size]).to(self.device)
                xb = torch.from_numpy(b[start : start + batch_size]).to(self.device)
                out.append(self.concept_net_(xa, xb).cpu().numpy())
        return np.concatenate(out).astype(np.float64)

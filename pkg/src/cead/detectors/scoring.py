"""Bounded anomaly scores and their training objectives.

All three score maps land in ``[0, 1]`` and increase strictly with the
underlying quantity (squared center distance, pseudo-Huber norm, or
logit), which is what lets a generator regress them toward a target.
"""

from __future__ import annotations

import torch

_EPS = 1e-12


def pseudo_huber(z: torch.Tensor) -> torch.Tensor:
    """Smooth norm surrogate ``sqrt(||z||^2 + 1) - 1`` over the last dim."""
    return torch.sqrt(z.pow(2).sum(dim=-1) + 1.0) - 1.0


def radial_score_from_sqdist(sqdist: torch.Tensor) -> torch.Tensor:
    """``d^2 / (1 + d^2)``: 0 at the center, strictly rising, < 1."""
    return sqdist / (1.0 + sqdist)


def radial_score(embedding: torch.Tensor, center: torch.Tensor) -> torch.Tensor:
    return radial_score_from_sqdist((embedding - center).pow(2).sum(dim=-1))


def radial_loss(embedding: torch.Tensor, center: torch.Tensor) -> torch.Tensor:
    """Center-compactness objective: the mean bounded radial score."""
    return radial_score(embedding, center).mean()


def hsc_score_from_distance(h: torch.Tensor) -> torch.Tensor:
    """``1 - exp(-h)``: 0 at the center, strictly rising, < 1."""
    return 1.0 - torch.exp(-h)


def hsc_score(embedding: torch.Tensor) -> torch.Tensor:
    return hsc_score_from_distance(pseudo_huber(embedding))


def hsc_loss(embedding: torch.Tensor, positive_mask: torch.Tensor) -> torch.Tensor:
    """Hypersphere classification objective.

    Normal samples minimize the pseudo-Huber distance ``h``; positives
    maximize it through ``-log(1 - exp(-h))``. ``positive_mask`` is a
    bool tensor, True for positives.
    """
    h = pseudo_huber(embedding)
    # -log(1 - exp(-h)) via expm1 for small-h accuracy; h is clamped away
    # from 0 because the term diverges there.
    positive_term = -torch.log(-torch.expm1(-torch.clamp(h, min=1e-6)) + _EPS)
    per_sample = torch.where(positive_mask, positive_term, h)
    return per_sample.mean()


def bce_score(logit: torch.Tensor) -> torch.Tensor:
    return torch.sigmoid(logit)


def bce_loss(logit: torch.Tensor, positive_mask: torch.Tensor) -> torch.Tensor:
    target = positive_mask.to(logit.dtype)
    return torch.nn.functional.binary_cross_entropy_with_logits(logit, target)

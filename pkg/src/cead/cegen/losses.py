"""Loss terms for counterfactual generator training.

The full objective (min over generator and concept classifier, max over
the discriminator) is::

    lambda_gan * (L_D + L_G) + lambda_phi * L_phi
    + lambda_rec * L_rec + lambda_rec * L_cyc + lambda_concept * L_con

where L_D/L_G are hinge adversarial terms, L_phi pushes the detector
score of generated images to the requested target, L_rec/L_cyc are L1
reconstruction and cycle terms, and L_con scores concept recovery on
(original, generated) pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch

from ..exceptions import InvalidInputError

_LOG_EPS = 1e-12


@dataclass(frozen=True)
class LossWeights:
    gan: float = 1.0
    rec: float = 100.0
    phi: float = 1.0
    concept: float = 10.0

    def __post_init__(self):
        for name in ("gan", "rec", "phi", "concept"):
            value = float(getattr(self, name))
            if not value >= 0:
                raise InvalidInputError(f"loss weight {name} must be >= 0, got {value}")
            object.__setattr__(self, name, value)


#: Weights used for the traffic-sign corpus, which needs a stronger
#: adversarial term and weaker reconstruction pull.
SIGN_WEIGHTS = LossWeights(gan=5.0, rec=20.0, phi=1.0, concept=10.0)


def hinge_discriminator_loss(d_real: torch.Tensor, d_fake: torch.Tensor) -> torch.Tensor:
    """Hinge critic loss: real outputs above +1, fake outputs below -1."""
    return torch.relu(1.0 - d_real).mean() + torch.relu(1.0 + d_fake).mean()


def generator_adversarial_loss(d_fake: torch.Tensor) -> torch.Tensor:
    """Generator's adversarial term: raise the critic score of fakes."""
    return -d_fake.mean()


def target_score_loss(scores: torch.Tensor, alpha: torch.Tensor) -> torch.Tensor:
    """Binary cross-entropy between detector scores and target scores."""
    if scores.shape != alpha.shape:
        raise InvalidInputError(
            f"scores shape {tuple(scores.shape)} != targets shape {tuple(alpha.shape)}"
        )
    log_s = torch.log(scores.clamp_min(_LOG_EPS))
    log_1ms = torch.log((1.0 - scores).clamp_min(_LOG_EPS))
    return -(alpha * log_s + (1.0 - alpha) * log_1ms).mean()


def reconstruction_loss(x: torch.Tensor, x_rec: torch.Tensor) -> torch.Tensor:
    """Mean absolute deviation between an image batch and its rebuild."""
    if x.shape != x_rec.shape:
        raise InvalidInputError(
            f"original shape {tuple(x.shape)} != rebuilt shape {tuple(x_rec.shape)}"
        )
    return (x - x_rec).abs().mean()


def cycle_loss(x: torch.Tensor, x_cycle: torch.Tensor) -> torch.Tensor:
    """Mean absolute deviation after mapping out and back (same form as
    :func:`reconstruction_loss`, applied to the round-trip image)."""
    return reconstruction_loss(x, x_cycle)


def concept_nll(proba: torch.Tensor, k: torch.Tensor) -> torch.Tensor:
    """Mean negative log-probability of the true concept ids."""
    if proba.ndim != 2:
        raise InvalidInputError(f"proba must be (n, K), got shape {tuple(proba.shape)}")
    if k.shape[0] != proba.shape[0]:
        raise InvalidInputError("concept ids and probabilities disagree on batch size")
    picked = proba.gather(1, k.view(-1, 1).long()).squeeze(1)
    return -torch.log(picked.clamp_min(_LOG_EPS)).mean()


def concept_loss(
    proba_generated: torch.Tensor,
    proba_cycled: torch.Tensor,
    k: torch.Tensor,
) -> torch.Tensor:
    """Concept-recovery loss over both generated and cycled pairs."""
    return concept_nll(proba_generated, k) + concept_nll(proba_cycled, k)


def total_objective(
    weights: LossWeights,
    d_loss: torch.Tensor,
    g_loss: torch.Tensor,
    phi_loss: torch.Tensor,
    rec_loss: torch.Tensor,
    cyc_loss: torch.Tensor,
    con_loss: torch.Tensor,
) -> torch.Tensor:
    """Weighted sum of all six terms (the saddle-point objective's value)."""
    return (
        weights.gan * (d_loss + g_loss)
        + weights.phi * phi_loss
        + weights.rec * rec_loss
        + weights.rec * cyc_loss
        + weights.concept * con_loss
    )

"""Concept-conditioned counterfactual generation for anomaly detectors."""

from .conditions import ConditionCodebook
from .estimator import (
    GENERATOR_DEFAULTS,
    SIGN_GENERATOR_DEFAULTS,
    CounterfactualGenerator,
)
from .losses import (
    SIGN_WEIGHTS,
    LossWeights,
    concept_loss,
    concept_nll,
    cycle_loss,
    generator_adversarial_loss,
    hinge_discriminator_loss,
    reconstruction_loss,
    target_score_loss,
    total_objective,
)
from .networks import (
    ConceptClassifierNet,
    ConditionalBatchNorm2d,
    DiscriminatorNet,
    GeneratorNet,
    GenResBlock,
)
from .persist import load_generator, save_generator


def train_counterfactual_generator(detector, normal, positive=None, **params):
    """Fit a :class:`CounterfactualGenerator` on image stacks or batches."""
    import numpy as np

    from ..data.batch import ImageBatch

    norm_px = normal.pixels if isinstance(normal, ImageBatch) else normal
    generator = CounterfactualGenerator(detector=detector, **params)
    if positive is None:
        return generator.fit(norm_px)
    pos_px = positive.pixels if isinstance(positive, ImageBatch) else positive
    X = np.concatenate([norm_px, pos_px])
    y = np.concatenate(
        [np.zeros(len(norm_px), np.int64), np.ones(len(pos_px), np.int64)]
    )
    return generator.fit(X, y)


def generate_counterfactuals(generator, X, alpha=0.0, k=0):
    """Counterfactual pixels for ``X`` at one target score and concept."""
    return generator.transform(X, alpha=alpha, k=k)


__all__ = [
    "ConditionCodebook",
    "CounterfactualGenerator",
    "GENERATOR_DEFAULTS",
    "SIGN_GENERATOR_DEFAULTS",
    "LossWeights",
    "SIGN_WEIGHTS",
    "concept_loss",
    "concept_nll",
    "cycle_loss",
    "generator_adversarial_loss",
    "hinge_discriminator_loss",
    "reconstruction_loss",
    "target_score_loss",
    "total_objective",
    "ConceptClassifierNet",
    "ConditionalBatchNorm2d",
    "DiscriminatorNet",
    "GeneratorNet",
    "GenResBlock",
    "load_generator",
    "save_generator",
    "train_counterfactual_generator",
    "generate_counterfactuals",
]

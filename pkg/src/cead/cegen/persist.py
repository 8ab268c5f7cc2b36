"""Generator checkpoint serialization.

A generator checkpoint is self-contained: it embeds the frozen detector
(prefixed ``detector.``) alongside the generator, discriminator, and
concept-classifier states, so a single file suffices for generation,
evaluation, and serving.
"""

from __future__ import annotations

from dataclasses import asdict
from pathlib import Path

import numpy as np
import torch
from sklearn.utils.validation import check_is_fitted

from ..exceptions import InvalidInputError
from ..io import read_container, write_container
from ..detectors.persist import detector_from_payload, detector_payload
from .conditions import ConditionCodebook
from .estimator import CounterfactualGenerator
from .losses import LossWeights
from .networks import ConceptClassifierNet, DiscriminatorNet, GeneratorNet

GENERATOR_MAGIC = b"CEADGEN1"
GENERATOR_VERSION = 1

_NET_PREFIXES = {
    "generator": "generator_net_",
    "discriminator": "discriminator_net_",
    "concept": "concept_net_",
}


def save_generator(generator: CounterfactualGenerator, path: str | Path) -> Path:
    check_is_fitted(generator, "generator_net_")
    det_meta, det_arrays = detector_payload(generator.detector)
    arrays = {f"detector.{name}": arr for name, arr in det_arrays.items()}
    for prefix, attr in _NET_PREFIXES.items():
        net = getattr(generator, attr)
        for name, tensor in net.state_dict().items():
            arrays[f"{prefix}.{name}"] = tensor.detach().cpu().numpy()
    params = {
        k: list(v) if isinstance(v, tuple) else v
        for k, v in generator.get_params(deep=False).items()
        if k not in ("detector", "weights")
    }
    meta = {
        "detector": det_meta,
        "params": params,
        "weights": asdict(generator.weights_),
        "codebook": {
            "alpha_grid": list(generator.codebook_.alpha_grid),
            "n_concepts": generator.codebook_.n_concepts,
        },
        "fitted": {
            "epochs": generator.epochs_,
            "lr": generator.lr_,
            "milestones": list(generator.milestones_),
            "n_steps": generator.n_steps_,
            "channels": generator.channels_,
            "image_size": generator.image_size_,
        },
    }
    return write_container(path, GENERATOR_MAGIC, GENERATOR_VERSION, meta, arrays)


def _load_net(net: torch.nn.Module, arrays: dict, prefix: str, device: str):
    state = {}
    token = f"{prefix}."
    for name, arr in arrays.items():
        if name.startswith(token):
            state[name[len(token):]] = torch.from_numpy(np.ascontiguousarray(arr))
    result = net.load_state_dict(state, strict=True)
    if result.missing_keys or result.unexpected_keys:
        raise InvalidInputError(f"{prefix} state does not match architecture")
    net.to(device).eval()
    return net


def load_generator(path: str | Path, device: str = "cpu") -> CounterfactualGenerator:
    _, meta, arrays = read_container(path, GENERATOR_MAGIC, max_version=GENERATOR_VERSION)
    det_arrays = {
        name[len("detector."):]: arr
        for name, arr in arrays.items()
        if name.startswith("detector.")
    }
    detector = detector_from_payload(meta["detector"], det_arrays, device)

    params = dict(meta["params"])
    for key in ("alpha_grid", "milestones"):
        if params.get(key) is not None:
            params[key] = tuple(params[key])
    generator = CounterfactualGenerator(
        detector=detector,
        weights=LossWeights(**meta["weights"]),
        **params,
    )
    generator.device = device
    codebook = ConditionCodebook(
        tuple(meta["codebook"]["alpha_grid"]), meta["codebook"]["n_concepts"]
    )
    fitted = meta["fitted"]
    generator.codebook_ = codebook
    generator.weights_ = LossWeights(**meta["weights"])
    generator.epochs_ = fitted["epochs"]
    generator.lr_ = fitted["lr"]
    generator.milestones_ = tuple(fitted["milestones"])
    generator.n_steps_ = fitted["n_steps"]
    generator.channels_ = fitted["channels"]
    generator.image_size_ = fitted["image_size"]
    generator.loss_curve_ = []
    generator.disc_loss_curve_ = []

    torch.manual_seed(int(params.get("seed", 0)))
    divisor = int(params.get("width_divisor", 1))
    generator.generator_net_ = _load_net(
        GeneratorNet(fitted["channels"], codebook.n_conditions, divisor),
        arrays,
        "generator",
        device,
    )
    generator.discriminator_net_ = _load_net(
        DiscriminatorNet(fitted["channels"], divisor), arrays, "discriminator", device
    )
    generator.concept_net_ = _load_net(
        ConceptClassifierNet(fitted["channels"], codebook.n_concepts, divisor),
        arrays,
        "concept",
        device,
    )
    return generator

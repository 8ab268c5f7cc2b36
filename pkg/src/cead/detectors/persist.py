"""Detector checkpoint serialization."""

from __future__ import annotations

from dataclasses import asdict
from pathlib import Path

import numpy as np
import torch
from sklearn.utils.validation import check_is_fitted

from ..exceptions import InvalidInputError
from ..io import read_container, write_container
from .estimator import AnomalyDetector
from .networks import DetectorArch, DetectorNet

DETECTOR_MAGIC = b"CEADDET1"
DETECTOR_VERSION = 1


def detector_payload(detector: AnomalyDetector) -> tuple[dict, dict]:
    """(meta, arrays) describing a fitted detector, for embedding."""
    check_is_fitted(detector, "net_")
    arrays = {
        f"state.{name}": tensor.detach().cpu().numpy()
        for name, tensor in detector.net_.state_dict().items()
    }
    if detector.center_ is not None:
        arrays["center"] = detector.center_.cpu().numpy()
    meta = {
        "kind": detector.kind,
        "arch": asdict(detector.arch_),
        "params": {
            k: list(v) if isinstance(v, tuple) else v
            for k, v in detector.get_params().items()
        },
        "fitted": {
            "epochs": detector.epochs_,
            "lr": detector.lr_,
            "milestones": list(detector.milestones_),
            "n_steps": detector.n_steps_,
        },
    }
    return meta, arrays


def detector_from_payload(meta: dict, arrays: dict, device: str = "cpu") -> AnomalyDetector:
    """Rebuild a fitted detector from an embedded (meta, arrays) payload."""
    params = dict(meta["params"])
    if params.get("milestones") is not None:
        params["milestones"] = tuple(params["milestones"])
    params["device"] = device
    detector = AnomalyDetector(**params)
    arch = DetectorArch(**{**meta["arch"], "conv_channels": tuple(meta["arch"]["conv_channels"])})
    net = DetectorNet(arch, meta["kind"])
    state = {}
    for name, arr in arrays.items():
        if name.startswith("state."):
            state[name[len("state."):]] = torch.from_numpy(np.ascontiguousarray(arr))
    missing = net.load_state_dict(state, strict=True)
    if missing.missing_keys or missing.unexpected_keys:
        raise InvalidInputError("detector state does not match architecture")
    net.to(device).eval()
    detector.net_ = net
    detector.arch_ = arch
    detector.center_ = (
        torch.from_numpy(arrays["center"]).to(device) if "center" in arrays else None
    )
    fitted = meta["fitted"]
    detector.epochs_ = fitted["epochs"]
    detector.lr_ = fitted["lr"]
    detector.milestones_ = tuple(fitted["milestones"])
    detector.n_steps_ = fitted["n_steps"]
    detector.loss_curve_ = []
    return detector


def save_detector(detector: AnomalyDetector, path: str | Path) -> Path:
    meta, arrays = detector_payload(detector)
    return write_container(path, DETECTOR_MAGIC, DETECTOR_VERSION, meta, arrays)


def load_detector(path: str | Path, device: str = "cpu") -> AnomalyDetector:
    _, meta, arrays = read_container(path, DETECTOR_MAGIC, max_version=DETECTOR_VERSION)
    return detector_from_payload(meta, arrays, device)

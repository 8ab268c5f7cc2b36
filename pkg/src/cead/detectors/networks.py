"""LeNet-style detector backbones.

One architecture family per input geometry. Every convolution is
followed by batch norm, leaky ReLU, and 2x max pooling; the first fully
connected layer is followed by batch norm and leaky ReLU, the last is a
plain linear map into the embedding space. The center-distance variant
strips every bias term (including batch-norm affine shifts), so the
origin stays meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from ..exceptions import ContractError, InvalidInputError


@dataclass(frozen=True)
class DetectorArch:
    family: str
    in_channels: int
    image_size: int
    conv_channels: tuple[int, ...]
    kernel_size: int
    fc_hidden: int
    embedding_dim: int


DETECTOR_ARCHS: dict[str, DetectorArch] = {
    "gray28": DetectorArch("gray28", 1, 28, (4, 8, 16, 32), 5, 64, 32),
    "color28": DetectorArch("color28", 3, 28, (16, 32, 64), 5, 64, 32),
    "color32": DetectorArch("color32", 3, 32, (32, 64, 128), 5, 512, 256),
}


def arch_for_images(channels: int, image_size: int) -> DetectorArch:
    for arch in DETECTOR_ARCHS.values():
        if arch.in_channels == channels and arch.image_size == image_size:
            return arch
    raise InvalidInputError(
        f"no detector architecture for {channels}x{image_size}x{image_size} inputs"
    )


def _pooled_size(size: int, n_pools: int) -> int:
    for _ in range(n_pools):
        size //= 2
    return size


class EncoderNet(nn.Module):
    """Convolutional embedding network shared by all detector kinds."""

    def __init__(self, arch: DetectorArch, bias: bool = True):
        super().__init__()
        self.arch = arch
        self.bias = bias
        layers: list[nn.Module] = []
        in_ch = arch.in_channels
        pad = arch.kernel_size // 2
        for out_ch in arch.conv_channels:
            layers += [
                nn.Conv2d(in_ch, out_ch, arch.kernel_size, padding=pad, bias=bias),
                nn.BatchNorm2d(out_ch, eps=1e-4, affine=bias),
                nn.LeakyReLU(),
                nn.MaxPool2d(2, 2),
            ]
            in_ch = out_ch
        self.features = nn.Sequential(*layers)
        side = _pooled_size(arch.image_size, len(arch.conv_channels))
        if side < 1:
            raise InvalidInputError(
                f"{arch.family}: image size {arch.image_size} collapses under "
                f"{len(arch.conv_channels)} poolings"
            )
        flat = arch.conv_channels[-1] * side * side
        self.fc1 = nn.Linear(flat, arch.fc_hidden, bias=bias)
        self.fc1_bn = nn.BatchNorm1d(arch.fc_hidden, eps=1e-4, affine=bias)
        self.fc1_act = nn.LeakyReLU()
        self.fc2 = nn.Linear(arch.fc_hidden, arch.embedding_dim, bias=bias)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = self.features(x)
        h = torch.flatten(h, start_dim=1)
        h = self.fc1_act(self.fc1_bn(self.fc1(h)))
        return self.fc2(h)


class DetectorNet(nn.Module):
    """Encoder plus the head required by the scoring kind."""

    def __init__(self, arch: DetectorArch, kind: str):
        super().__init__()
        if kind not in ("dsvdd", "bce", "hsc"):
            raise InvalidInputError(f"unknown detector kind {kind!r}")
        self.kind = kind
        self.encoder = EncoderNet(arch, bias=(kind != "dsvdd"))
        self.head = nn.Linear(arch.embedding_dim, 1) if kind == "bce" else None

    def embed(self, x: torch.Tensor) -> torch.Tensor:
        return self.encoder(x)

    def logit(self, x: torch.Tensor) -> torch.Tensor:
        if self.head is None:
            raise InvalidInputError(f"{self.kind} detector has no logit head")
        return self.head(self.encoder(x)).squeeze(-1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if self.head is not None:
            return self.logit(x)
        return self.embed(x)


def assert_bias_free(module: nn.Module) -> None:
    """Structural check for the center-distance variant."""
    for name, param in module.named_parameters():
        if name.endswith(".bias") or name == "bias":
            raise ContractError(f"bias parameter {name} present in bias-free network")

"""Networks for the counterfactual generator: G, D, and concept classifier R.

The generator is an encoder/decoder of residual blocks whose batch-norm
gains and biases are selected by a categorical condition index (target
score level x concept). The discriminator scores realism with raw,
unbounded outputs suited to a hinge objective. The concept classifier
consumes an (original, counterfactual) pair as stacked channels and
returns a probability per concept.
"""

from __future__ import annotations

import torch
from torch import nn
from torch.nn.utils import spectral_norm

from ..exceptions import InvalidInputError
from ..validation import check_positive_int


def _width(kernels: int, divisor: int) -> int:
    """Scaled channel width, floored so tiny presets stay functional."""
    return max(4, kernels // divisor)


def _conv(in_ch: int, out_ch: int, kernel_size: int = 3, sn: bool = False) -> nn.Conv2d:
    conv = nn.Conv2d(in_ch, out_ch, kernel_size, padding=kernel_size // 2)
    return spectral_norm(conv) if sn else conv


class ConditionalBatchNorm2d(nn.Module):
    """Batch norm whose affine gain/bias are embeddings of a condition id."""

    def __init__(self, num_features: int, n_conditions: int):
        super().__init__()
        check_positive_int(n_conditions, "n_conditions")
        self.bn = nn.BatchNorm2d(num_features, affine=False)
        self.gain = nn.Embedding(n_conditions, num_features)
        self.bias = nn.Embedding(n_conditions, num_features)
        nn.init.ones_(self.gain.weight)
        nn.init.zeros_(self.bias.weight)

    def forward(self, x: torch.Tensor, condition: torch.Tensor) -> torch.Tensor:
        out = self.bn(x)
        gain = self.gain(condition)[:, :, None, None]
        bias = self.bias(condition)[:, :, None, None]
        return gain * out + bias


class GenResBlock(nn.Module):
    """Residual block of two (cond BN -> ReLU -> conv) sets.

    ``resample`` is ``None`` (keep spatial size), ``"down"`` (average-pool
    to half), or ``"up"`` (nearest-neighbour to double). The skip path uses
    a 1x1 convolution whenever channels change or resampling occurs.
    """

    def __init__(
        self,
        in_ch: int,
        out_ch: int,
        n_conditions: int,
        resample: str | None = None,
        sn: bool = False,
    ):
        super().__init__()
        if resample not in (None, "down", "up"):
            raise InvalidInputError(f"unknown resample mode {resample!r}")
        self.resample = resample
        self.bn1 = ConditionalBatchNorm2d(in_ch, n_conditions)
        self.conv1 = _conv(in_ch, out_ch, sn=sn)
        self.bn2 = ConditionalBatchNorm2d(out_ch, n_conditions)
        self.conv2 = _conv(out_ch, out_ch, sn=sn)
        self.needs_skip_conv = in_ch != out_ch or resample is not None
        if self.needs_skip_conv:
            self.conv_skip = _conv(in_ch, out_ch, kernel_size=1, sn=sn)

    def _up(self, x: torch.Tensor) -> torch.Tensor:
        return nn.functional.interpolate(x, scale_factor=2, mode="nearest")

    def forward(self, x: torch.Tensor, condition: torch.Tensor) -> torch.Tensor:
        h = torch.relu(self.bn1(x, condition))
        if self.resample == "up":
            h = self._up(h)
        h = self.conv1(h)
        h = self.conv2(torch.relu(self.bn2(h, condition)))
        if self.resample == "down":
            h = nn.functional.avg_pool2d(h, 2)

        skip = x
        if self.resample == "up":
            skip = self._up(skip)
        if self.needs_skip_conv:
            skip = self.conv_skip(skip)
        if self.resample == "down":
            skip = nn.functional.avg_pool2d(skip, 2)
        return h + skip


class GeneratorNet(nn.Module):
    """Conditional encoder/decoder producing images in [-1, 1].

    Encoder: BN -> conv(64) -> res(256, down) -> res(512, down) -> res(1024).
    Decoder: res(1024) -> res(512, up) -> res(256, up) -> BN -> ReLU ->
    conv -> tanh, with spectral normalization on every decoder layer.
    ``width_divisor`` scales all channel counts down for small presets.
    """

    def __init__(self, channels: int, n_conditions: int, width_divisor: int = 1):
        super().__init__()
        check_positive_int(width_divisor, "width_divisor")
        check_positive_int(n_conditions, "n_conditions")
        w = lambda k: _width(k, width_divisor)
        self.channels = channels
        self.n_conditions = n_conditions
        self.width_divisor = width_divisor

        self.enc_bn = nn.BatchNorm2d(channels)
        self.enc_conv = _conv(channels, w(64))
        self.enc_blocks = nn.ModuleList(
            [
                GenResBlock(w(64), w(256), n_conditions, resample="down"),
                GenResBlock(w(256), w(512), n_conditions, resample="down"),
                GenResBlock(w(512), w(1024), n_conditions, resample=None),
            ]
        )
        self.dec_blocks = nn.ModuleList(
            [
                GenResBlock(w(1024), w(1024), n_conditions, resample=None, sn=True),
                GenResBlock(w(1024), w(512), n_conditions, resample="up", sn=True),
                GenResBlock(w(512), w(256), n_conditions, resample="up", sn=True),
            ]
        )
        self.dec_bn = nn.BatchNorm2d(w(256))
        self.dec_conv = _conv(w(256), channels, sn=True)

    def forward(self, x: torch.Tensor, condition: torch.Tensor) -> torch.Tensor:
        if condition.shape[0] != x.shape[0]:
            raise InvalidInputError(
                f"condition batch {condition.shape[0]} != image batch {x.shape[0]}"
            )
        h = self.enc_conv(self.enc_bn(x))
        for block in self.enc_blocks:
            h = block(h, condition)
        for block in self.dec_blocks:
            h = block(h, condition)
        h = torch.relu(self.dec_bn(h))
        return torch.tanh(self.dec_conv(h))


class _DiscBlock(nn.Module):
    """(ReLU -> conv) x2 with optional trailing average pooling."""

    def __init__(self, in_ch: int, out_ch: int, pool: bool):
        super().__init__()
        self.pool = pool
        self.conv1 = _conv(in_ch, out_ch, sn=True)
        self.conv2 = _conv(out_ch, out_ch, sn=True)
        self.needs_skip_conv = in_ch != out_ch or pool
        if self.needs_skip_conv:
            self.conv_skip = _conv(in_ch, out_ch, kernel_size=1, sn=True)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = self.conv1(torch.relu(x))
        h = self.conv2(torch.relu(h))
        skip = self.conv_skip(x) if self.needs_skip_conv else x
        if self.pool:
            h = nn.functional.avg_pool2d(h, 2)
            skip = nn.functional.avg_pool2d(skip, 2)
        return h + skip


class _DiscInputBlock(nn.Module):
    """First block: conv -> ReLU -> conv -> pool, skip pools then projects."""

    def __init__(self, in_ch: int, out_ch: int):
        super().__init__()
        self.conv1 = _conv(in_ch, out_ch, sn=True)
        self.conv2 = _conv(out_ch, out_ch, sn=True)
        self.conv_skip = _conv(in_ch, out_ch, kernel_size=1, sn=True)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = self.conv2(torch.relu(self.conv1(x)))
        h = nn.functional.avg_pool2d(h, 2)
        skip = self.conv_skip(nn.functional.avg_pool2d(x, 2))
        return h + skip


class DiscriminatorNet(nn.Module):
    """Realism critic with raw scalar output (hinge-compatible).

    Four residual blocks (64 with pool; 128 and 256 with pool; 512
    without), then ReLU, spatial sum, and a linear map to a scalar.
    Spectral normalization is applied to every layer.
    """

    def __init__(self, channels: int, width_divisor: int = 1):
        super().__init__()
        check_positive_int(width_divisor, "width_divisor")
        w = lambda k: _width(k, width_divisor)
        self.blocks = nn.Sequential(
            _DiscInputBlock(channels, w(64)),
            _DiscBlock(w(64), w(128), pool=True),
            _DiscBlock(w(128), w(256), pool=True),
            _DiscBlock(w(256), w(512), pool=False),
        )
        self.fc = spectral_norm(nn.Linear(w(512), 1))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = torch.relu(self.blocks(x))
        h = h.sum(dim=(2, 3))
        return self.fc(h).squeeze(1)


class ConceptClassifierNet(nn.Module):
    """Predicts which concept transformed an (original, output) image pair.

    The pair enters as stacked channels. Block one applies three 64-kernel
    convolutions (ReLU after the first, pooling after the other two); block
    two applies two 128-kernel convolutions with ReLUs and a final pool.
    A spatial sum feeds a linear layer; the forward pass returns softmax
    probabilities over concepts.
    """

    def __init__(self, channels: int, n_concepts: int, width_divisor: int = 1):
        super().__init__()
        check_positive_int(n_concepts, "n_concepts")
        check_positive_int(width_divisor, "width_divisor")
        w = lambda k: _width(k, width_divisor)
        self.n_concepts = n_concepts
        self.block1 = nn.ModuleDict(
            {
                "conv1": _conv(2 * channels, w(64), sn=True),
                "conv2": _conv(w(64), w(64), sn=True),
                "conv3": _conv(w(64), w(64), sn=True),
                "skip": _conv(2 * channels, w(64), kernel_size=1, sn=True),
            }
        )
        self.block2 = nn.ModuleDict(
            {
                "conv1": _conv(w(64), w(128), sn=True),
                "conv2": _conv(w(128), w(128), sn=True),
                "skip": _conv(w(64), w(128), kernel_size=1, sn=True),
            }
        )
        self.fc = spectral_norm(nn.Linear(w(128), n_concepts))

    def forward(self, x: torch.Tensor, x_out: torch.Tensor) -> torch.Tensor:
        pair = torch.cat([x, x_out], dim=1)
        pool = nn.functional.avg_pool2d

        b1 = self.block1
        h = torch.relu(b1["conv1"](pair))
        h = pool(b1["conv2"](h), 2)
        h = pool(b1["conv3"](h), 2)
        skip = pool(pool(b1["skip"](pair), 2), 2)
        h = h + skip

        b2 = self.block2
        h2 = torch.relu(b2["conv1"](h))
        h2 = torch.relu(b2["conv2"](h2))
        h2 = pool(h2, 2)
        skip2 = pool(b2["skip"](h), 2)
        h2 = h2 + skip2

        logits = self.fc(h2.sum(dim=(2, 3)))
        return torch.softmax(logits, dim=1)

"""Fréchet distance between feature distributions.

``fid_from_moments`` is the exact closed form on given Gaussians;
``fid`` estimates moments from feature samples, with a small diagonal
shrinkage so rank-deficient sample covariances stay tractable. The
matrix square root goes through a symmetric eigendecomposition of
``S_a^1/2 S_b S_a^1/2`` with negative eigenvalues clipped at zero.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from ..exceptions import DegenerateInputError, InvalidInputError


def _check_features(f, name: str) -> np.ndarray:
    arr = np.asarray(f, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name}: expected (n, d) features, got {arr.shape}")
    if arr.shape[0] < 2:
        raise DegenerateInputError(f"{name}: needs at least 2 samples")
    if not np.isfinite(arr).all():
        raise InvalidInputError(f"{name}: contains non-finite values")
    return arr


def gaussian_moments(features) -> tuple[np.ndarray, np.ndarray]:
    """Sample mean and covariance (rows are samples)."""
    arr = _check_features(features, "features")
    mu = arr.mean(axis=0)
    sigma = np.cov(arr, rowvar=False)
    return mu, np.atleast_2d(sigma)


def _psd_sqrt(sigma: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh((sigma + sigma.T) / 2.0)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def fid_from_moments(mu1, sigma1, mu2, sigma2) -> float:
    """``||mu1-mu2||^2 + tr(S1 + S2 - 2 (S1 S2)^1/2)`` for PSD inputs."""
    mu1 = np.asarray(mu1, dtype=np.float64).reshape(-1)
    mu2 = np.asarray(mu2, dtype=np.float64).reshape(-1)
    sigma1 = np.atleast_2d(np.asarray(sigma1, dtype=np.float64))
    sigma2 = np.atleast_2d(np.asarray(sigma2, dtype=np.float64))
    if mu1.shape != mu2.shape or sigma1.shape != sigma2.shape:
        raise InvalidInputError("moment shape mismatch")
    if sigma1.shape[0] != mu1.shape[0]:
        raise InvalidInputError("mean/covariance dimension mismatch")
    diff = mu1 - mu2
    root1 = _psd_sqrt(sigma1)
    inner = root1 @ sigma2 @ root1
    vals = np.linalg.eigvalsh((inner + inner.T) / 2.0)
    trace_sqrt = np.sqrt(np.clip(vals, 0.0, None)).sum()
    value = diff @ diff + np.trace(sigma1) + np.trace(sigma2) - 2.0 * trace_sqrt
    return float(max(value, 0.0))


def fid(features_a, features_b, shrink: float = 1e-6) -> float:
    """Fréchet distance between two feature samples."""
    fa = _check_features(features_a, "features_a")
    fb = _check_features(features_b, "features_b")
    if fa.shape[1] != fb.shape[1]:
        raise InvalidInputError("feature dimensionality mismatch")
    mu_a, sig_a = gaussian_moments(fa)
    mu_b, sig_b = gaussian_moments(fb)
    eye = np.eye(sig_a.shape[0]) * shrink
    return fid_from_moments(mu_a, sig_a + eye, mu_b, sig_b + eye)


def normalized_fid(ce_features, normal_features, anomaly_features) -> float:
    """100 * FID(counterfactuals, normal) / FID(anomalies, normal)."""
    reference = fid(anomaly_features, normal_features)
    if reference <= 1e-12:
        raise DegenerateInputError(
            "anomaly features match normal features; normalization undefined"
        )
    return 100.0 * fid(ce_features, normal_features) / reference


class RandomConvFeatures(nn.Module):
    """Frozen random convolutional feature extractor.

    A seed-fixed stand-in for a pretrained embedding network: three
    strided convolutions with tanh nonlinearities, average-pooled and
    linearly projected. Deterministic for a given seed and geometry.
    """

    def __init__(
        self,
        channels: int,
        image_size: int,
        dim: int = 256,
        seed: int = 0,
    ):
        super().__init__()
        self.channels = channels
        self.image_size = image_size
        self.dim = dim
        self.seed = seed
        torch.manual_seed(seed)
        widths = (32, 64, 128)
        layers: list[nn.Module] = []
        in_ch = channels
        for w in widths:
            layers += [nn.Conv2d(in_ch, w, 3, stride=2, padding=1), nn.Tanh()]
            in_ch = w
        self.body = nn.Sequential(*layers)
        self.pool = nn.AdaptiveAvgPool2d(4)
        self.project = nn.Linear(widths[-1] * 16, dim, bias=False)
        for p in self.parameters():
            p.requires_grad_(False)
        self.eval()

    @torch.no_grad()
    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = self.pool(self.body(x)).flatten(1)
        return self.project(h)

    @torch.no_grad()
    def extract(self, pixels: np.ndarray, batch_size: int = 512) -> np.ndarray:
        out = []
        for start in range(0, len(pixels), batch_size):
            chunk = torch.from_numpy(np.ascontiguousarray(pixels[start : start + batch_size]))
            out.append(self(chunk).numpy())
        return np.concatenate(out).astype(np.float64)

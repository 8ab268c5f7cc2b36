"""Counterfactual grid images: top anomalies and their per-concept CEs."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image
from sklearn.utils.validation import check_is_fitted

from ..data.batch import ImageBatch
from ..exceptions import InvalidInputError
from ..imaging import tile_grid, to_uint8
from ..metrics.ranking import rank_by_score


def render_grid(generator, anomalies: ImageBatch, top: int = 8) -> np.ndarray:
    """Uint8 grid: row 0 = top anomalies by score, rows 1..K = CEs at α=0.

    Ranking uses the generator's frozen detector; score ties break by
    sample id. Returns ``(H, W)`` or ``(H, W, 3)``.
    """
    check_is_fitted(generator, "generator_net_")
    if top <= 0:
        raise InvalidInputError(f"top must be positive, got {top}")
    if len(anomalies) == 0:
        raise InvalidInputError("render_grid: empty anomaly set")
    scores = generator.detector.score_samples(anomalies.pixels)
    ranked = rank_by_score(anomalies.ids, scores, top=top)
    row_of = {str(sample_id): i for i, sample_id in enumerate(anomalies.ids)}
    originals = anomalies.pixels[[row_of[sample_id] for sample_id, _ in ranked]]
    rows = [originals]
    for k in range(generator.codebook_.n_concepts):
        rows.append(generator.transform(originals, alpha=0.0, k=k))
    return to_uint8(tile_grid(rows))


def export_grid(generator, anomalies: ImageBatch, path, top: int = 8) -> Path:
    """Render and save the counterfactual grid as a PNG file."""
    grid = render_grid(generator, anomalies, top=top)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(grid).save(path, format="PNG")
    return path

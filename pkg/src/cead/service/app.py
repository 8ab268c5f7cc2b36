"""HTTP API for interactive what-if exploration over trained checkpoints.

All endpoints live under ``/api/v1``:

======  =======================  =======================================
GET     /scenarios               loaded sessions with scenario metadata
GET     /anomalies?top=n         ranked most-anomalous test images
GET     /image/{id}              original test image as PNG
POST    /whatif                  counterfactual for (id, alpha, k)
GET     /report                  persisted metric rows
======  =======================  =======================================

The server is read-only over loaded checkpoints; identical whatif
requests return byte-identical PNG payloads. A continuous ``alpha`` is
quantized to the generator's grid server-side and the effective level
is echoed back so clients can display the real condition.
"""

from __future__ import annotations

import base64
import math
import os
from dataclasses import asdict
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Response
from pydantic import BaseModel, Field

from ..exceptions import InvalidInputError
from ..imaging import png_bytes
from .sessions import ENV_CKPT_DIR, SessionState, discover_sessions

API_PREFIX = "/api/v1"


class WhatIfRequest(BaseModel):
    id: str
    alpha: float = Field(ge=0.0, le=1.0)
    k: int = Field(ge=0)
    session: str | None = None


def _json_safe(record: dict) -> dict:
    """Strict-JSON copy: non-finite floats become null."""
    return {
        key: (None if isinstance(v, float) and not math.isfinite(v) else v)
        for key, v in record.items()
    }


def create_app(ckpt_dir: str | Path | None = None) -> FastAPI:
    """Build the service over every run bundle found in ``ckpt_dir``.

    Falls back to the ``CEAD_CKPT_DIR`` environment variable when no
    directory is passed.
    """
    if ckpt_dir is None:
        ckpt_dir = os.environ.get(ENV_CKPT_DIR)
    if not ckpt_dir:
        raise InvalidInputError(
            f"no checkpoint directory: pass ckpt_dir or set {ENV_CKPT_DIR}"
        )
    sessions = discover_sessions(ckpt_dir)
    app = FastAPI(title="counterfactual what-if service", version="1.0")

    def pick(name: str | None) -> SessionState | None:
        if name is None:
            if not sessions:
                return None
            return sessions[min(sessions)]
        if name not in sessions:
            raise HTTPException(
                status_code=404, detail=f"unknown session {name!r}"
            )
        return sessions[name]

    def locate(sample_id: str, name: str | None) -> tuple[SessionState, int]:
        pool = [pick(name)] if name is not None else [
            sessions[key] for key in sorted(sessions)
        ]
        for state in pool:
            if state is None:
                continue
            row = state.anomalies.row_of(sample_id)
            if row is not None:
                return state, row
        raise HTTPException(
            status_code=404, detail=f"unknown image id {sample_id!r}"
        )

    @app.get(f"{API_PREFIX}/scenarios")
    def list_scenarios():
        out = []
        for key in sorted(sessions):
            state = sessions[key]
            out.append(
                {
                    "session": state.name,
                    "scenario": state.scenario,
                    "kind": state.kind,
                    "seed": state.seed,
                    "scale": state.scale,
                    "n_concepts": state.n_concepts,
                    "alpha_grid": list(state.alpha_grid),
                    "n_anomalies": len(state.anomalies),
                    "metrics": _json_safe(asdict(state.rows[0])) if state.rows else None,
                }
            )
        return out

    @app.get(f"{API_PREFIX}/anomalies")
    def list_anomalies(
        top: int = Query(default=20, ge=1),
        session: str | None = None,
    ):
        state = pick(session)
        if state is None:
            return {"session": None, "items": []}
        items = [
            {"rank": rank, "id": sample_id, "score": score}
            for rank, (sample_id, score) in enumerate(state.anomalies.top(top))
        ]
        return {"session": state.name, "items": items}

    @app.get(API_PREFIX + "/image/{sample_id:path}")
    def get_image(sample_id: str, session: str | None = None):
        state, row = locate(sample_id, session)
        return Response(
            content=png_bytes(state.anomalies.pixels[row]),
            media_type="image/png",
        )

    @app.post(f"{API_PREFIX}/whatif")
    def whatif(request: WhatIfRequest):
        state, row = locate(request.id, request.session)
        codebook = state.generator.codebook_
        if request.k >= codebook.n_concepts:
            raise HTTPException(
                status_code=422,
                detail=f"k must lie in [0, {codebook.n_concepts}), got {request.k}",
            )
        levels, values = codebook.quantize_alpha(np.asarray([request.alpha]))
        original = state.anomalies.pixels[row]
        ce = state.generator.transform(
            original[None], alpha=request.alpha, k=request.k
        )[0]
        score_after = float(state.detector.score_samples(ce[None])[0])
        return {
            "id": request.id,
            "session": state.name,
            "alpha": request.alpha,
            "k": request.k,
            "condition": {
                "alpha_level": int(levels[0]),
                "alpha": float(values[0]),
                "k": request.k,
            },
            "image": base64.b64encode(png_bytes(ce)).decode("ascii"),
            "score_before": float(state.anomalies.scores[row]),
            "score_after": score_after,
            "l1_change": float(np.abs(ce - original).mean()),
        }

    @app.get(f"{API_PREFIX}/report")
    def report():
        rows = []
        for key in sorted(sessions):
            state = sessions[key]
            for metrics_row in state.rows:
                rows.append({"session": state.name, **_json_safe(asdict(metrics_row))})
        return {"rows": rows}

    return app


def serve(ckpt_dir: str | Path | None = None, port: int = 8000, host: str = "127.0.0.1"):
    """Run the service with uvicorn (blocking)."""
    import uvicorn

    uvicorn.run(create_app(ckpt_dir), host=host, port=port)

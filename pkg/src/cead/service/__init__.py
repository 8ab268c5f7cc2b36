"""Read-only HTTP serving of trained checkpoints for what-if exploration."""

from .app import API_PREFIX, WhatIfRequest, create_app, serve
from .sessions import (
    ENV_CKPT_DIR,
    RankedAnomalies,
    SessionState,
    discover_sessions,
    load_ranked_anomalies,
    load_session,
    rank_anomalies,
)

__all__ = [
    "API_PREFIX",
    "WhatIfRequest",
    "create_app",
    "serve",
    "ENV_CKPT_DIR",
    "RankedAnomalies",
    "SessionState",
    "discover_sessions",
    "load_ranked_anomalies",
    "load_session",
    "rank_anomalies",
]

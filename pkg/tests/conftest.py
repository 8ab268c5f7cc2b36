"""Shared fixtures: one persisted smoke-scale session bundle.

Training even a smoke-scale pipeline costs a few seconds, so the bundle
is built once per test session and shared by the harness, service, and
CLI tests. Everything it contains is deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import pytest

from cead.data.scenarios import Scenario, find_scenario
from cead.harness import RunPaths, RunResult, run_scenario

TINY_GLYPHS = {"n_train_per_class": 40, "n_test_per_class": 12}


@dataclass
class SessionBundle:
    scenario: Scenario
    result: RunResult
    paths: RunPaths
    glyph_cache: Path


@pytest.fixture(scope="session")
def glyph_cache(tmp_path_factory) -> Path:
    """Session-local dataset cache so tests never touch user caches."""
    return tmp_path_factory.mktemp("glyph-cache")


@pytest.fixture(scope="session")
def session_bundle(tmp_path_factory, glyph_cache) -> SessionBundle:
    out = tmp_path_factory.mktemp("bundle") / "run"
    scenario = find_scenario("synth-digits", "seven")
    result = run_scenario(
        scenario,
        "bce",
        seed=0,
        scale="smoke",
        out_dir=out,
        cache_dir=glyph_cache,
        dataset_options=TINY_GLYPHS,
    )
    return SessionBundle(
        scenario=scenario,
        result=result,
        paths=result.paths,
        glyph_cache=glyph_cache,
    )

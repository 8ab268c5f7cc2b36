"""Experiment harness: scale presets, scenario runs, suites, probes."""

from .bias import BiasProbeReport, bias_probe
from .grids import export_grid, render_grid
from .presets import PRESETS, ScalePreset, preset_for, scaled_epochs, scaled_milestones
from .runner import (
    ANOMALY_CACHE_MAGIC,
    RunPaths,
    RunResult,
    SuiteConfig,
    SuiteResult,
    assert_no_leak,
    detector_params_for,
    generator_params_for,
    run_scenario,
    run_suite,
    save_anomaly_cache,
    train_detector_for,
    train_generator_for,
)

__all__ = [
    "PRESETS",
    "ScalePreset",
    "preset_for",
    "scaled_epochs",
    "scaled_milestones",
    "BiasProbeReport",
    "bias_probe",
    "export_grid",
    "render_grid",
    "ANOMALY_CACHE_MAGIC",
    "RunPaths",
    "RunResult",
    "SuiteConfig",
    "SuiteResult",
    "assert_no_leak",
    "detector_params_for",
    "generator_params_for",
    "run_scenario",
    "run_suite",
    "save_anomaly_cache",
    "train_detector_for",
    "train_generator_for",
]

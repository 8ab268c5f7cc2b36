"""Command-line interface.

Subcommands cover the whole pipeline: ``train-detector``, ``train-ce``,
``generate``, ``evaluate``, ``suite``, ``bias-probe``, and ``serve``.
Scenarios are addressed as ``DATASET/NAME`` (``synth-digits/seven``,
``colored-mnist/red+one``) or by their slug (``synth-digits__seven``).
"""

from __future__ import annotations

import functools
from pathlib import Path

import click
import numpy as np

from .cegen.estimator import CounterfactualGenerator
from .cegen.persist import load_generator, save_generator
from .data.datasets import load_dataset
from .data.scenarios import Scenario, find_scenario, resolve
from .data.streams import normal_source, positive_source
from .detectors.estimator import AnomalyDetector
from .detectors.persist import load_detector, save_detector
from .exceptions import InvalidInputError
from .harness.bias import bias_probe
from .harness.presets import PRESETS, preset_for
from .harness.runner import (
    OE_KINDS,
    SuiteConfig,
    assert_no_leak,
    detector_params_for,
    generator_params_for,
    run_suite,
)
from .metrics.evaluation import evaluate_scenario
from .metrics.report import write_rows
from .service.app import serve as run_server
from .service.sessions import ENV_CKPT_DIR, load_ranked_anomalies


def parse_scenario(text: str) -> Scenario:
    if "/" in text:
        dataset, name = text.split("/", 1)
    elif "__" in text:
        dataset, name = text.split("__", 1)
    else:
        raise click.BadParameter(
            f"expected DATASET/NAME or a scenario slug, got {text!r}"
        )
    return find_scenario(dataset, name)


def parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part.strip())


def parse_names(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def friendly_errors(fn):
    """Surface validation failures as CLI errors, not tracebacks."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except InvalidInputError as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


def data_options(fn):
    fn = click.option(
        "--root", type=click.Path(path_type=Path), default=None,
        help="Directory of unpacked archive corpora.",
    )(fn)
    fn = click.option(
        "--cache-dir", type=click.Path(path_type=Path), default=None,
        help="Dataset cache directory.",
    )(fn)
    fn = click.option(
        "--train-per-class", type=int, default=None,
        help="Rendered corpora: training samples per class.",
    )(fn)
    fn = click.option(
        "--test-per-class", type=int, default=None,
        help="Rendered corpora: test samples per class.",
    )(fn)
    return fn


def dataset_opts(train_per_class, test_per_class) -> dict | None:
    opts = {}
    if train_per_class is not None:
        opts["n_train_per_class"] = train_per_class
    if test_per_class is not None:
        opts["n_test_per_class"] = test_per_class
    return opts or None


scale_option = click.option(
    "--scale", type=click.Choice(sorted(PRESETS)), default="paper",
    show_default=True, help="Training budget preset.",
)


@click.group()
def main():
    """Counterfactual explanations for image anomaly detectors."""


@main.command("train-detector")
@click.option("--scenario", "scenario_text", required=True)
@click.option("--kind", type=click.Choice(["dsvdd", "bce", "hsc"]), default="bce",
              show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--epochs", type=int, default=None, help="Override the preset epochs.")
@click.option("--out", type=click.Path(path_type=Path), required=True)
@scale_option
@data_options
@friendly_errors
def train_detector_cmd(scenario_text, kind, seed, epochs, out, scale, root,
                       cache_dir, train_per_class, test_per_class):
    """Train an anomaly detector for a scenario and save the checkpoint."""
    preset = preset_for(scale)
    scenario = parse_scenario(scenario_text)
    resolved = resolve(
        scenario, root=root, cache_dir=cache_dir, seed=seed, subset=preset.subset,
        dataset_options=dataset_opts(train_per_class, test_per_class),
    )
    assert_no_leak(resolved)
    params = detector_params_for(resolved, kind, preset, seed)
    if epochs is not None:
        params.update(epochs=epochs, milestones=(max(1, 3 * epochs // 4),))
    detector = AnomalyDetector(**params)
    positive = positive_source(resolved) if kind in OE_KINDS else None
    detector.fit_sources(normal_source(resolved), positive)
    save_detector(detector, out)
    click.echo(f"saved {kind} detector ({detector.epochs_} epochs) to {out}")


@main.command("train-ce")
@click.option("--scenario", "scenario_text", required=True)
@click.option("--detector-ckpt", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--K", "n_concepts", type=int, default=2, show_default=True,
              help="Concept count.")
@click.option("--alpha-grid", default="0,0.5,1", show_default=True,
              help="Comma-separated target-score grid.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--epochs", type=int, default=None, help="Override the preset epochs.")
@click.option("--out", type=click.Path(path_type=Path), required=True)
@scale_option
@data_options
@friendly_errors
def train_ce_cmd(scenario_text, detector_ckpt, n_concepts, alpha_grid, seed, epochs,
                 out, scale, root, cache_dir, train_per_class, test_per_class):
    """Train a counterfactual generator against a detector checkpoint."""
    preset = preset_for(scale)
    scenario = parse_scenario(scenario_text)
    detector = load_detector(detector_ckpt)
    resolved = resolve(
        scenario, root=root, cache_dir=cache_dir, seed=seed, subset=preset.subset,
        dataset_options=dataset_opts(train_per_class, test_per_class),
    )
    assert_no_leak(resolved)
    params = generator_params_for(
        resolved, preset, seed,
        n_concepts=n_concepts, alpha_grid=parse_floats(alpha_grid),
    )
    if epochs is not None:
        params.update(epochs=epochs, milestones=(max(1, 3 * epochs // 4),))
    generator = CounterfactualGenerator(detector=detector, **params)
    positive = positive_source(resolved) if detector.kind in OE_KINDS else None
    generator.fit_sources(normal_source(resolved), positive)
    save_generator(generator, out)
    click.echo(
        f"saved generator (K={n_concepts}, {generator.epochs_} epochs) to {out}"
    )


def _image_for_id(image_id: str, ckpt: Path, root, cache_dir, opts) -> np.ndarray:
    """Pixels for a sample id: sibling anomaly cache first, corpus second."""
    sidecar = Path(ckpt).parent / "anomalies.bin"
    if sidecar.exists():
        cache = load_ranked_anomalies(sidecar)
        row = cache.row_of(image_id)
        if row is not None:
            return cache.pixels[row]
    prefix, _, rest = image_id.partition(":")
    if not rest:
        raise InvalidInputError(f"malformed sample id {image_id!r}")
    name = f"colored-{prefix}" if "#" in image_id else prefix
    split = rest.split(":", 1)[0]
    data = load_dataset(name, root=root, cache_dir=cache_dir, **(opts or {}))
    return data.batch(split, [data.index_for(split, image_id)]).pixels[0]


@main.command("generate")
@click.option("--ckpt", type=click.Path(exists=True, path_type=Path), required=True,
              help="Generator checkpoint.")
@click.option("--image-id", required=True)
@click.option("--alpha", type=float, default=0.0, show_default=True)
@click.option("--concept", type=int, default=0, show_default=True)
@click.option("--out-png", type=click.Path(path_type=Path), required=True)
@data_options
@friendly_errors
def generate_cmd(ckpt, image_id, alpha, concept, out_png, root, cache_dir,
                 train_per_class, test_per_class):
    """Write the counterfactual for one test image as a PNG."""
    from .imaging import png_bytes

    generator = load_generator(ckpt)
    pixels = _image_for_id(
        image_id, ckpt, root, cache_dir,
        dataset_opts(train_per_class, test_per_class),
    )
    ce = generator.transform(pixels[None], alpha=alpha, k=concept)[0]
    before = float(generator.detector.score_samples(pixels[None])[0])
    after = float(generator.detector.score_samples(ce[None])[0])
    out_png = Path(out_png)
    out_png.parent.mkdir(parents=True, exist_ok=True)
    out_png.write_bytes(png_bytes(ce))
    click.echo(f"score {before:.4f} -> {after:.4f}; wrote {out_png}")


@main.command("evaluate")
@click.option("--scenario", "scenario_text", required=True)
@click.option("--detector-ckpt", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--ce-ckpt", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--out-csv", type=click.Path(path_type=Path), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@scale_option
@data_options
@friendly_errors
def evaluate_cmd(scenario_text, detector_ckpt, ce_ckpt, out_csv, seed, scale,
                 root, cache_dir, train_per_class, test_per_class):
    """Compute the full metrics row for a trained detector/generator pair."""
    preset = preset_for(scale)
    scenario = parse_scenario(scenario_text)
    generator = load_generator(ce_ckpt)
    generator.detector = load_detector(detector_ckpt)
    resolved = resolve(
        scenario, root=root, cache_dir=cache_dir, seed=seed, subset=preset.subset,
        dataset_options=dataset_opts(train_per_class, test_per_class),
    )
    row = evaluate_scenario(
        generator,
        resolved,
        scale=preset.name,
        max_eval_normals=preset.max_eval_normals,
        max_eval_anomalies=preset.max_eval_anomalies,
    )
    write_rows(out_csv, [row])
    click.echo(
        f"{row.scenario} [{row.kind}] auroc={row.auroc:.4f} "
        f"cf_auroc={row.cf_auroc:.4f} sub_auroc={row.sub_auroc:.4f} "
        f"fid_n={row.fid_n:.4f} concept_acc={row.concept_acc:.4f} -> {out_csv}"
    )


@main.command("suite")
@click.option("--dataset", required=True)
@click.option("--kinds", default="bce", show_default=True,
              help="Comma-separated detector kinds.")
@click.option("--seeds", default="0,1,2,3", show_default=True,
              help="Comma-separated seeds.")
@click.option("--scenarios", default=None,
              help="Comma-separated scenario names (default: full catalog).")
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--substitution/--no-substitution", default=True, show_default=True)
@click.option("--grids/--no-grids", default=True, show_default=True)
@scale_option
@data_options
@friendly_errors
def suite_cmd(dataset, kinds, seeds, scenarios, out, substitution, grids, scale,
              root, cache_dir, train_per_class, test_per_class):
    """Run scenarios x kinds x seeds and write per-run + aggregate CSVs."""
    config = SuiteConfig(
        dataset=dataset,
        out_dir=out,
        scenarios=parse_names(scenarios) if scenarios else None,
        kinds=parse_names(kinds),
        seeds=parse_ints(seeds),
        scale=scale,
        dataset_options=dataset_opts(train_per_class, test_per_class),
        root=str(root) if root else None,
        cache_dir=str(cache_dir) if cache_dir else None,
        with_substitution=substitution,
        with_grid=grids,
    )
    result = run_suite(config)
    click.echo(f"{len(result.rows)} runs ok, {len(result.failures)} failed")
    for failure in result.failures:
        click.echo(
            f"  FAILED {failure['scenario']} [{failure['kind']} seed "
            f"{failure['seed']}]: {failure['error']}"
        )
    click.echo(f"report: {result.report_path}")
    if result.aggregates:
        click.echo(f"aggregate: {result.aggregate_path}")


@main.command("bias-probe")
@click.option("--dataset", default="colored-mnist", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=None)
@click.option("--with-grids", is_flag=True, default=False,
              help="Also train generators and export counterfactual grids.")
@scale_option
@data_options
@friendly_errors
def bias_probe_cmd(dataset, seed, out, with_grids, scale, root, cache_dir,
                   train_per_class, test_per_class):
    """Compare exposure-trained vs blue-supervised detectors."""
    report = bias_probe(
        scale=scale, dataset=dataset, seed=seed, out_dir=out,
        root=root, cache_dir=cache_dir, with_grids=with_grids,
        dataset_options=dataset_opts(train_per_class, test_per_class),
    )
    click.echo(
        f"oe_auroc={report.oe_auroc:.4f} "
        f"supervised_auroc={report.supervised_auroc:.4f} gap={report.gap:.4f}"
    )


@main.command("serve")
@click.option("--ckpt-dir", type=click.Path(exists=True, path_type=Path),
              envvar=ENV_CKPT_DIR, required=True,
              help=f"Run-bundle directory (or set {ENV_CKPT_DIR}).")
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@friendly_errors
def serve_cmd(ckpt_dir, port, host):
    """Serve loaded checkpoints over HTTP for what-if exploration."""
    run_server(ckpt_dir, port=port, host=host)


if __name__ == "__main__":
    main()

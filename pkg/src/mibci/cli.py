"""Command-line interface over the library.

Exit codes: 0 on success, 1 on a validation error (bad arguments, malformed
input files, inconsistent configuration), 2 on a runtime failure.
"""

from __future__ import annotations

import json
import sys
from dataclasses import replace
from pathlib import Path

import click
import numpy as np

from ._version import __version__
from .augment import AugmentConfig, augment_set
from .bandpass import DEFAULT_BANDS, FilterBankSpec, apply_filter_bank_set
from .csp import CspModel, apply_csp_set, fit_csp
from .epochs import SplitSpec, split_dataset
from .experiment import (
    ExperimentPlan,
    ExperimentReport,
    compare_augmentation,
    run_experiment,
    run_matrix,
)
from .io import EpochFormatError, load_epochs, save_epochs
from .metrics import classwise_metrics, confusion
from .model import WalshCnnClassifier
from .network import NetworkParams, count_weights
from .stats import paired_ttest
from .synthetic import SyntheticSpec, generate_synthetic
from .training import TrainingDivergedError


def _parse_bands(text: str | None) -> tuple[tuple[float, float], ...]:
    if not text:
        return DEFAULT_BANDS
    bands = []
    for part in text.split(","):
        lo, _, hi = part.partition("-")
        bands.append((float(lo), float(hi)))
    return tuple(bands)


def _read_config(ctx) -> dict:
    path = ctx.obj.get("config")
    if not path:
        return {}
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _out_path(ctx, name: str) -> Path:
    out = Path(ctx.obj.get("out") or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out / name


def _emit(ctx, doc: dict, name: str, text: str | None = None) -> None:
    fmt = ctx.obj.get("format", "json")
    path = _out_path(ctx, name)
    path.write_text(json.dumps(doc, indent=2), encoding="utf-8")
    if fmt == "json":
        click.echo(json.dumps(doc, indent=2))
    elif text is not None:
        click.echo(text)
    else:
        for key, value in doc.items():
            click.echo(f"{key}: {value}")


@click.group()
@click.version_option(__version__)
@click.option("--seed", type=int, default=None, help="Master seed override.")
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None, help="JSON config/plan document.")
@click.option("--out", type=click.Path(file_okay=False), default=".", help="Output directory.")
@click.option("--format", "fmt", type=click.Choice(["json", "text", "csv"]), default="json", help="Console output format.")
@click.pass_context
def cli(ctx, seed, config, out, fmt):
    """Motor-imagery EEG classification toolkit."""
    ctx.ensure_object(dict)
    ctx.obj.update(seed=seed, config=config, out=out, format=fmt)


def _seed(ctx, default: int = 0) -> int:
    return ctx.obj["seed"] if ctx.obj.get("seed") is not None else default


@cli.command()
@click.option("--classes", type=int, default=2, show_default=True)
@click.option("--epochs-per-class", type=int, default=100, show_default=True)
@click.option("--channels", type=int, default=4, show_default=True)
@click.option("--samples", type=int, default=250, show_default=True)
@click.option("--rate", type=float, default=250.0, show_default=True)
@click.option("--noise-sd", type=float, default=1.0, show_default=True)
@click.option("--gain", type=float, default=2.0, show_default=True, help="Band amplitude of each class's channel block.")
@click.option("--output", default="synthetic.epb", show_default=True)
@click.pass_context
def synth(ctx, classes, epochs_per_class, channels, samples, rate, noise_sd, gain, output):
    """Generate a synthetic band-power dataset as an EPB1 file."""
    cfg = _read_config(ctx)
    spec = SyntheticSpec(
        num_classes=cfg.get("num_classes", classes),
        epochs_per_class=cfg.get("epochs_per_class", epochs_per_class),
        channels=cfg.get("channels", channels),
        samples=cfg.get("samples", samples),
        sampling_rate=cfg.get("sampling_rate", rate),
        noise_sd=cfg.get("noise_sd", noise_sd),
        default_gain=cfg.get("default_gain", gain),
        mu_gains=np.array(cfg["mu_gains"], dtype=float) if "mu_gains" in cfg else None,
        beta_gains=np.array(cfg["beta_gains"], dtype=float) if "beta_gains" in cfg else None,
        seed=_seed(ctx, cfg.get("seed", 0)),
    )
    dataset = generate_synthetic(spec)
    path = _out_path(ctx, output)
    save_epochs(dataset, path)
    click.echo(f"wrote {len(dataset)} epochs ({dataset.n_channels}x{dataset.n_samples}) to {path}")


@cli.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--amp-low", type=float, default=0.2, show_default=True)
@click.option("--amp-high", type=float, default=5.0, show_default=True)
@click.option("--flip-probability", type=float, default=0.5, show_default=True)
@click.option("--rotation-half-range", type=int, default=None)
@click.option("--noise-sd", type=float, default=0.01, show_default=True)
@click.option("--copies", type=int, default=9, show_default=True)
@click.option("--output", default="augmented.epb", show_default=True)
@click.pass_context
def augment(ctx, in_path, amp_low, amp_high, flip_probability, rotation_half_range, noise_sd, copies, output):
    """Expand a training set with augmented epoch variants."""
    dataset = load_epochs(in_path)
    cfg = AugmentConfig(
        amp_low=amp_low,
        amp_high=amp_high,
        flip_probability=flip_probability,
        rotation_half_range=rotation_half_range,
        noise_sd=noise_sd,
        copies_per_epoch=copies,
        seed=_seed(ctx),
    )
    grown = augment_set(dataset, cfg)
    path = _out_path(ctx, output)
    save_epochs(grown, path)
    click.echo(f"{len(dataset)} -> {len(grown)} epochs, wrote {path}")


@cli.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--test-fraction", type=float, default=0.2, show_default=True)
@click.option("--validation-fraction", type=float, default=0.1, show_default=True)
@click.pass_context
def split(ctx, in_path, test_fraction, validation_fraction):
    """Stratified train/validation/test split into three EPB1 files."""
    dataset = load_epochs(in_path)
    spec = SplitSpec(test_fraction=test_fraction, validation_fraction=validation_fraction, seed=_seed(ctx))
    parts = split_dataset(dataset, spec)
    doc = {"seed": spec.seed}
    for name, indices in (
        ("train", parts.train_indices),
        ("validation", parts.validation_indices),
        ("test", parts.test_indices),
    ):
        entry = {"count": len(indices), "indices": list(indices), "path": None}
        if indices:
            path = _out_path(ctx, f"{name}.epb")
            save_epochs(dataset.subset(indices), path)
            entry["path"] = str(path)
        doc[name] = entry
    _out_path(ctx, "split.json").write_text(json.dumps(doc, indent=2), encoding="utf-8")
    click.echo(
        f"train {doc['train']['count']} / validation {doc['validation']['count']} "
        f"/ test {doc['test']['count']}"
    )


@cli.command("csp-fit")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--m", type=int, required=True, help="Spatial filters kept per side.")
@click.option("--scheme", type=click.Choice(["auto", "two_class", "one_vs_rest"]), default="auto", show_default=True)
@click.option("--bands", default=None, help="Comma list like 6-12,12-18,...")
@click.option("--order", type=int, default=4, show_default=True)
@click.option("--output", default="csp.json", show_default=True)
@click.pass_context
def csp_fit(ctx, in_path, m, scheme, bands, order, output):
    """Fit the filter bank + spatial filters on a training EPB1 file."""
    dataset = load_epochs(in_path)
    bank = FilterBankSpec(bands=_parse_bands(bands), order=order)
    filtered = apply_filter_bank_set(dataset, bank)
    if scheme == "auto":
        scheme = "two_class" if dataset.num_classes == 2 else "one_vs_rest"
    model = fit_csp(filtered, m=m, scheme=scheme, bank=bank)
    path = _out_path(ctx, output)
    model.save(path)
    click.echo(f"fitted {model.n_outputs} spatial filters on {len(dataset)} epochs, wrote {path}")


@cli.command("csp-apply")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--output", default="transformed.epb", show_default=True)
@click.pass_context
def csp_apply(ctx, in_path, model_path, output):
    """Band-filter an EPB1 file and project it onto fitted spatial filters."""
    dataset = load_epochs(in_path)
    model = CspModel.load(model_path)
    transformed = apply_csp_set(apply_filter_bank_set(dataset, model.bank), model)
    path = _out_path(ctx, output)
    save_epochs(transformed, path)
    click.echo(f"wrote {len(transformed)} epochs with {transformed.n_channels} virtual channels to {path}")


@cli.command()
@click.option("--train", "train_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--val", "val_path", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--structure", default=None, help="Layer triples, e.g. '2,7,40 / 40,7,40 / 40,16,16'.")
@click.option("--code-size", type=int, default=16, show_default=True)
@click.option("--scheme", type=click.Choice(["single", "ovo", "ovr"]), default="single", show_default=True)
@click.option("--learning-rate", type=float, default=1e-3, show_default=True)
@click.option("--batch-size", type=int, default=32, show_default=True)
@click.option("--max-iterations", type=int, default=500, show_default=True)
@click.option("--patience", type=int, default=20, show_default=True)
@click.option("--dropout", type=float, default=0.5, show_default=True)
@click.option("--no-batch-norm", is_flag=True, default=False)
@click.pass_context
def train(ctx, train_path, val_path, structure, code_size, scheme, learning_rate, batch_size, max_iterations, patience, dropout, no_batch_norm):
    """Train the feature extractor; writes params.json and train_report.json."""
    train_set = load_epochs(train_path)
    clf = WalshCnnClassifier(
        structure=structure,
        code_size=code_size,
        scheme=scheme,
        learning_rate=learning_rate,
        batch_size=batch_size,
        max_iterations=max_iterations,
        patience=patience,
        batch_norm=not no_batch_norm,
        dropout_p=dropout,
        seed=_seed(ctx),
    )
    if val_path:
        val_set = load_epochs(val_path)
        clf.fit(train_set.to_array(), train_set.labels, val_set.to_array(), val_set.labels)
    else:
        clf.fit(train_set.to_array(), train_set.labels)
    if clf.scheme_.kind == "single":
        params_path = _out_path(ctx, "params.json")
        params_path.write_text(clf.params_.to_json(clf.spec_), encoding="utf-8")
    else:
        params_path = _out_path(ctx, "scheme.json")
        params_path.write_text(clf.scheme_.to_json(), encoding="utf-8")
    reports = [r.to_dict() for r in clf.train_reports_]
    last = clf.train_reports_[-1]
    _emit(
        ctx,
        reports[0] if len(reports) == 1 else {"members": reports},
        "train_report.json",
        text=(
            f"{len(reports)} network(s); last stopped at iteration {last.stopped_at} "
            f"({last.stop_reason}) with best validation loss {last.best_validation_loss:.6f}"
        ),
    )
    click.echo(f"wrote {params_path}")


@cli.command("eval")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--params", "params_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def eval_cmd(ctx, in_path, params_path):
    """Classify an EPB1 file with trained parameters and report metrics."""
    from .mdn import MdnClassifier, MetaScheme, SchemeMember, scheme_predict
    from .walsh import WalshCodebook

    dataset = load_epochs(in_path)
    text = Path(params_path).read_text(encoding="utf-8")
    if "members" in json.loads(text):
        scheme = MetaScheme.from_json(text)
        codebook = WalshCodebook.for_classes(2, scheme.members[0].spec.output_dim)
    else:
        spec, params = NetworkParams.from_json(text)
        codebook = WalshCodebook.for_classes(dataset.num_classes, spec.output_dim)
        scheme = MetaScheme(
            kind="single",
            num_classes=dataset.num_classes,
            members=(SchemeMember(classes=tuple(range(1, dataset.num_classes + 1)), spec=spec, params=params),),
        )
    predictions = scheme_predict(dataset.to_array(), scheme, MdnClassifier(codebook))
    cm = confusion(predictions, dataset.labels, dataset.num_classes)
    report = classwise_metrics(cm)
    doc = report.to_dict()
    doc["confusion"] = cm.counts.tolist()
    _emit(ctx, doc, "eval.json", text=f"accuracy {report.accuracy:.4f} (kappa {report.kappa:.4f})")


@cli.command()
@click.option("--dataset", default=None, type=click.Path(exists=True, dir_okay=False), help="Overrides the plan's dataset path.")
@click.option("--n-runs", type=int, default=None, help="Overrides the plan's run count.")
@click.pass_context
def experiment(ctx, dataset, n_runs):
    """Run one plan cell (requires --config with a plan JSON)."""
    doc = _read_config(ctx)
    if not doc:
        raise click.ClickException("experiment needs --config pointing at a plan JSON")
    plan = ExperimentPlan.from_dict(doc)
    if dataset:
        plan = replace(plan, dataset=dataset)
    if n_runs:
        plan = replace(plan, n_runs=n_runs)
    if ctx.obj.get("seed") is not None:
        plan = replace(plan, master_seed=ctx.obj["seed"])
    report = run_experiment(plan)
    _emit(
        ctx,
        report.to_dict(),
        "experiment.json",
        text=(
            f"{plan.transform}-{plan.augment}: mean accuracy "
            f"{(report.mean_accuracy or 0) * 100:.1f}% (kappa {report.mean_kappa or 0:.3f}) "
            f"over {len(report.runs) - report.n_failed} runs, {report.n_failed} failed"
        ),
    )


@cli.command()
@click.option("--dataset", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--n-runs", type=int, default=None)
@click.pass_context
def matrix(ctx, dataset, n_runs):
    """Run all four transform x augmentation cells of a plan."""
    doc = _read_config(ctx)
    if not doc:
        raise click.ClickException("matrix needs --config pointing at a plan JSON")
    plan = ExperimentPlan.from_dict(doc)
    if dataset:
        plan = replace(plan, dataset=dataset)
    if n_runs:
        plan = replace(plan, n_runs=n_runs)
    if ctx.obj.get("seed") is not None:
        plan = replace(plan, master_seed=ctx.obj["seed"])
    report = run_matrix(plan)
    table = report.table()
    _out_path(ctx, "matrix.json").write_text(report.to_json(), encoding="utf-8")
    _out_path(ctx, "matrix.txt").write_text(table + "\n", encoding="utf-8")
    click.echo(table)
    if len(report.cells["NTS-A"].accuracies()) >= 2:
        result, summary = compare_augmentation(report.cells["NTS-A"], report.cells["NTS-NA"])
        click.echo(f"NTS augmentation effect: {summary}")
    else:
        click.echo("NTS augmentation effect: needs at least two successful runs to test")


def _load_series(path: str) -> list[float]:
    text = Path(path).read_text(encoding="utf-8")
    doc = json.loads(text)
    if isinstance(doc, dict) and "runs" in doc:
        return ExperimentReport.from_json(text).accuracies()
    if isinstance(doc, list):
        return [float(v) for v in doc]
    raise click.ClickException(f"{path}: expected a JSON number list or an experiment report")


@cli.command()
@click.option("--a", "a_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--b", "b_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def ttest(ctx, a_path, b_path):
    """Paired t-test between two accuracy series (JSON lists or reports)."""
    a = _load_series(a_path)
    b = _load_series(b_path)
    result = paired_ttest(a, b)
    _emit(
        ctx,
        result.to_dict(),
        "ttest.json",
        text=f"t({result.df}) = {result.t:.4f}, two-tailed p = {result.p:.4e}",
    )


@cli.command("count-weights")
@click.option("--structure", required=True, help="Layer triples; use k = kernel area for 2-D stacks.")
@click.option("--classes", type=int, default=0, show_default=True, help="Adds code_size x classes when > 0.")
@click.option("--code-size", type=int, default=16, show_default=True)
@click.pass_context
def count_weights_cmd(ctx, structure, classes, code_size):
    """Multiplicative weight count of a layer stack."""
    triples = []
    for row in structure.replace("\n", "/").split("/"):
        parts = [p for p in row.replace(",", " ").split() if p]
        if not parts:
            continue
        if len(parts) != 3:
            raise click.ClickException(f"not an in,k,out triple: {row.strip()!r}")
        triples.append(tuple(int(p) for p in parts))
    total = count_weights(triples, num_classes=classes, output_dim=code_size)
    click.echo(str(total))


@cli.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def report(ctx, in_path):
    """Render a stored experiment/matrix report as json, text, or csv."""
    text = Path(in_path).read_text(encoding="utf-8")
    doc = json.loads(text)
    fmt = ctx.obj.get("format", "json")
    if fmt == "json":
        click.echo(json.dumps(doc, indent=2))
        return
    if "runs" in doc:
        cells = {"experiment": ExperimentReport.from_json(text)}
    else:
        cells = {name: ExperimentReport.from_json(json.dumps(cell)) for name, cell in doc.items()}
    if fmt == "csv":
        click.echo("cell,run,accuracy,kappa,error")
        for name, rep in cells.items():
            for run in rep.runs:
                acc = "" if run.accuracy is None else f"{run.accuracy:.6f}"
                kap = "" if run.kappa is None else f"{run.kappa:.6f}"
                err = "yes" if run.error else ""
                click.echo(f"{name},{run.run},{acc},{kap},{err}")
        return
    for name, rep in cells.items():
        mean = "n/a" if rep.mean_accuracy is None else f"{100 * rep.mean_accuracy:.1f} ({rep.mean_kappa:.3f})"
        accs = " ".join(
            "fail" if r.error else f"{100 * r.accuracy:.1f}" for r in rep.runs
        )
        click.echo(f"{name:10s} {accs}  mean {mean}")


def main(argv=None) -> int:
    """Console entry point mapping errors to the documented exit codes."""
    try:
        cli.main(args=argv, standalone_mode=False, obj={})
        return 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except (ValueError, EpochFormatError, FileNotFoundError, json.JSONDecodeError, KeyError, TypeError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except TrainingDivergedError as exc:
        click.echo(f"runtime failure: {exc}", err=True)
        return 2
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports anything left
        click.echo(f"runtime failure: {type(exc).__name__}: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line surface tying scoring, the Bernoulli lab and evaluation
together into reproducible runs.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
Every floating value is printed with 17 significant digits; infinities are
the token ``inf`` in CSV and the JSON string ``"inf"``.
"""

from __future__ import annotations

import math
import os
import sys
from pathlib import Path

import click

from . import bernoulli
from .errors import (
    ConfigurationError,
    DataFormatError,
    DimensionMismatchError,
    FamilyInfeasibleError,
    NumericalFailureError,
    UncqError,
)
from .estimator import MEASURE_COLUMNS, clamp, score_batch
from .evaluation import (
    DETECTION_COMPONENTS,
    SplitSpec,
    auroc,
    misclassification_labels,
    run_detection,
    selective_prediction_auc,
)
from .synthetic import generate_synthetic
from .uep import (
    read_csv,
    read_labels_csv,
    read_uep,
    write_csv,
    write_labels_csv,
    write_uep,
)

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

IDENTITY_AUDIT_TOL = 1e-9
LN2 = math.log(2.0)


def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        return f"{value:.17g}"
    return str(value)


def _json_dumps(obj, indent: int = 0) -> str:
    """Minimal JSON writer so finite floats carry 17 significant digits and
    infinities become the string "inf"."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{inner}"{key}": {_json_dumps(val, indent + 1)}'
            for key, val in obj.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{inner}{_json_dumps(val, indent + 1)}" for val in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, float):
        return '"inf"' if math.isinf(obj) else f"{obj:.17g}"
    if isinstance(obj, int):
        return str(obj)
    if obj is None:
        return "null"
    return '"' + str(obj).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _table_text(header: list, rows: list, fmt: str) -> str:
    if fmt == "csv":
        lines = [",".join(header)]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        return "\n".join(lines) + "\n"
    payload = [dict(zip(header, row)) for row in rows]
    return _json_dumps({"rows": payload}) + "\n"


def _load_batch(path: str):
    if path.endswith(".csv"):
        return read_csv(path)
    return read_uep(path)


def _scale(value: float, bits: bool) -> float:
    return value / LN2 if bits else value


def _seed_option(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("UNCQ_SEED")
    if env is None:
        raise ConfigurationError("a seed is required: pass --seed or set UNCQ_SEED")
    return int(env)


@click.group()
def main() -> None:
    """Uncertainty decomposition over posterior ensembles."""


@main.command("measures")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--epsilon", default=0.0, show_default=True,
              help="Optional probability floor applied before scoring.")
@click.option("--format", "fmt", default="csv", type=click.Choice(["csv", "json"]),
              show_default=True)
@click.option("--bits", is_flag=True, help="Print values in bits instead of nats.")
@click.option("--out", default=None, type=click.Path())
def measures_cmd(in_path, epsilon, fmt, bits, out) -> None:
    """Score a UEP or CSV ensemble file into a per-input measure table."""
    batch = clamp(_load_batch(in_path), epsilon)
    table = score_batch(batch)
    for i in range(len(table.ids)):
        row = table.row(i)
        gap = row["epkl_epistemic"] - (row["mi_epistemic"] + row["rmi"])
        if math.isfinite(row["epkl_epistemic"]) and abs(gap) > IDENTITY_AUDIT_TOL:
            raise NumericalFailureError(
                f"identity audit failed on row {table.ids[i]}: gap {gap:.3e}",
                achieved_tolerance=abs(gap),
            )
    header = ["id"] + list(MEASURE_COLUMNS) + ["prediction"]
    preds = table.predictions
    rows = [
        [table.ids[i]]
        + [_scale(float(table.column(c)[i]), bits) for c in MEASURE_COLUMNS]
        + [int(preds[i])]
        for i in range(len(table.ids))
    ]
    _emit(_table_text(header, rows, fmt), out)


@main.group("bernoulli")
def bernoulli_group() -> None:
    """Closed-form Bernoulli-posterior laboratory."""


def _posterior_label(post) -> str:
    if isinstance(post, bernoulli.Uniform):
        return f"uniform[{post.lo:g},{post.hi:g}]"
    if isinstance(post, bernoulli.Beta):
        return f"beta({post.alpha:g},{post.beta:g})"
    locs = "+".join(f"{w:g}*d{t:g}" for w, t in zip(post.weights, post.locations))
    return f"delta({locs})"


def _bernoulli_rows(reports, bits: bool) -> list:
    rows = []
    for rep in reports:
        rows.append(
            [
                _posterior_label(rep.posterior),
                _scale(rep.expected_theta, False),
                _scale(rep.mi_triple.total, bits),
                _scale(rep.mi_triple.aleatoric, bits),
                _scale(rep.mi_triple.epistemic, bits),
                _scale(rep.epkl_triple.total, bits),
                _scale(rep.epkl_triple.epistemic, bits),
                _scale(rep.rmi, bits),
            ]
        )
    return rows


_BERNOULLI_HEADER = [
    "posterior",
    "expected_theta",
    "mi_total",
    "aleatoric",
    "mi_epistemic",
    "epkl_total",
    "epkl_epistemic",
    "rmi",
]


@bernoulli_group.command("fig2")
@click.option("--format", "fmt", default="csv", type=click.Choice(["csv", "json"]),
              show_default=True)
@click.option("--bits", is_flag=True)
@click.option("--out", default=None, type=click.Path())
def fig2_cmd(fmt, bits, out) -> None:
    """Measure table for the six showcase posteriors."""
    rows = _bernoulli_rows(bernoulli.reproduce_fig2(), bits)
    _emit(_table_text(_BERNOULLI_HEADER, rows, fmt), out)


@bernoulli_group.command("degenerate")
@click.option("--au", required=True, type=float,
              help="Target aleatoric uncertainty in nats, strictly in (0, ln 2).")
@click.option("--format", "fmt", default="csv", type=click.Choice(["csv", "json"]),
              show_default=True)
@click.option("--bits", is_flag=True)
@click.option("--out", default=None, type=click.Path())
def degenerate_cmd(au, fmt, bits, out) -> None:
    """Three mean-0.5 posteriors indistinguishable to the mixture-entropy
    measure but separated by the pairwise-KL measure."""
    posteriors = bernoulli.construct_matched_degenerates(au)
    rows = _bernoulli_rows([bernoulli.report(p) for p in posteriors], bits)
    _emit(_table_text(_BERNOULLI_HEADER, rows, fmt), out)


@main.command("detect")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--anom", "anom_path", required=True, type=click.Path(exists=True))
@click.option("--splits", default=3, show_default=True)
@click.option("--seed", default=None, type=int)
@click.option("--epsilon", default=0.0, show_default=True)
@click.option("--format", "fmt", default="json", type=click.Choice(["csv", "json"]),
              show_default=True)
@click.option("--out", default=None, type=click.Path())
def detect_cmd(in_path, anom_path, splits, seed, epsilon, fmt, out) -> None:
    """Detection AUROC per measure component, mean +/- std over splits."""
    seed = _seed_option(seed)
    in_batch = clamp(_load_batch(in_path), epsilon)
    anom_batch = clamp(_load_batch(anom_path), epsilon)
    report = run_detection(in_batch, anom_batch, SplitSpec(splits, seed))
    header = ["component"] + [f"split_{i}" for i in range(splits)] + ["mean", "std"]
    rows = [
        [name, *report.component(name).split_values,
         report.component(name).mean, report.component(name).std]
        for name in DETECTION_COMPONENTS
    ]
    _emit(_table_text(header, rows, fmt), out)


def _scored_components(pred_path, truth_path, epsilon):
    batch = clamp(_load_batch(pred_path), epsilon)
    truth_ids, labels = read_labels_csv(truth_path)
    if tuple(truth_ids) != batch.ids:
        raise DimensionMismatchError("truth identifiers do not match prediction ids")
    table = score_batch(batch)
    return table, labels


@main.command("misclass")
@click.option("--pred", "pred_path", required=True, type=click.Path(exists=True))
@click.option("--truth", "truth_path", required=True, type=click.Path(exists=True))
@click.option("--epsilon", default=0.0, show_default=True)
@click.option("--format", "fmt", default="csv", type=click.Choice(["csv", "json"]),
              show_default=True)
@click.option("--out", default=None, type=click.Path())
def misclass_cmd(pred_path, truth_path, epsilon, fmt, out) -> None:
    """AUROC of each component at flagging misclassified inputs."""
    table, labels = _scored_components(pred_path, truth_path, epsilon)
    rows = []
    for component in DETECTION_COMPONENTS:
        scored, _ = misclassification_labels(table, labels, component)
        rows.append([component, auroc(scored)])
    _emit(_table_text(["component", "auroc"], rows, fmt), out)


@main.command("selective")
@click.option("--pred", "pred_path", required=True, type=click.Path(exists=True))
@click.option("--truth", "truth_path", required=True, type=click.Path(exists=True))
@click.option("--epsilon", default=0.0, show_default=True)
@click.option("--format", "fmt", default="csv", type=click.Choice(["csv", "json"]),
              show_default=True)
@click.option("--out", default=None, type=click.Path())
def selective_cmd(pred_path, truth_path, epsilon, fmt, out) -> None:
    """Accuracy-vs-coverage AUC of each component."""
    table, labels = _scored_components(pred_path, truth_path, epsilon)
    rows = []
    for component in DETECTION_COMPONENTS:
        _, selective = misclassification_labels(table, labels, component)
        rows.append([component, selective_prediction_auc(selective)])
    _emit(_table_text(["component", "auc"], rows, fmt), out)


@main.command("gen")
@click.option("--seed", default=None, type=int)
@click.option("--n", "num_inputs", default=200, show_default=True)
@click.option("--s", "num_samples", default=16, show_default=True)
@click.option("--k", "num_classes", default=5, show_default=True)
@click.option("--disagreement", default=0.5, show_default=True)
@click.option("--shift", default=0.0, show_default=True)
@click.option("--out", required=True, type=click.Path(),
              help="Output path; .csv writes CSV, anything else UEP binary.")
@click.option("--truth-out", default=None, type=click.Path(),
              help="Optional labels CSV for misclass/selective evaluation.")
def gen_cmd(seed, num_inputs, num_samples, num_classes, disagreement, shift,
            out, truth_out) -> None:
    """Write a deterministic synthetic ensemble batch."""
    seed = _seed_option(seed)
    batch, labels = generate_synthetic(
        seed, num_inputs, num_samples, num_classes, disagreement, shift
    )
    if out.endswith(".csv"):
        write_csv(batch, out)
    else:
        write_uep(batch, out)
    if truth_out:
        write_labels_csv(batch.ids, labels, truth_out)


def run(argv=None) -> int:
    """Invoke the CLI, mapping package errors onto documented exit codes."""
    try:
        main.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Abort:
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except (ConfigurationError, FamilyInfeasibleError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    except (DataFormatError, DimensionMismatchError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_DATA
    except NumericalFailureError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_NUMERICAL
    except UncqError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_DATA


def entrypoint() -> None:
    sys.exit(run())


if __name__ == "__main__":
    entrypoint()

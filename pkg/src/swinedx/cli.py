"""Command-line interface: serve the API, ingest a corpus, run evaluations.

The evaluate subcommands print a human-readable table and, when an output
directory is given, write the JSON report, CSV metrics, and rendered figures
alongside each other.
"""

from __future__ import annotations

from pathlib import Path

import click

from .evaluation import (
    ConfusionMatrix,
    bootstrap_t,
    class_metrics,
    load_dataset,
    paired_t_test,
    rubric_aggregate,
    top_k_accuracy,
)
from .evaluation import report as report_mod
from .evaluation.metrics import RUBRIC_DIMENSIONS


@click.group()
def main():
    """Swine disease diagnostic assistant."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True),
              help="YAML service configuration.")
def serve(config_path):
    """Run the HTTP service."""
    import uvicorn

    from .service import build_service, load_config

    config = load_config(config_path)
    app, _, _ = build_service(config)
    uvicorn.run(app, host=config.listen_host, port=config.listen_port, log_level="info")


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True),
              help="JSONL corpus: one page object per line.")
@click.option("--store", "store_path", required=True, type=click.Path(),
              help="Vector store file to create or extend.")
@click.option("--dim", default=256, show_default=True, help="Embedding dimension.")
def ingest(corpus_path, store_path, dim):
    """Chunk, embed, and store a document corpus."""
    from .store import HashingEmbedder, VectorStore, load_corpus_jsonl

    Path(store_path).parent.mkdir(parents=True, exist_ok=True)
    store = VectorStore(HashingEmbedder(dim), path=store_path)
    documents = load_corpus_jsonl(corpus_path)
    added = store.ingest(documents)
    click.echo(f"ingested {added} new records ({len(store)} total) into {store_path}")


@main.group()
def evaluate():
    """Recompute metrics from raw labeled fixtures."""


def _emit(payload: dict, table: str, out_dir, csv_writer, report, figure_fn, figure_name):
    click.echo(table)
    if out_dir is None:
        return
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report_mod.write_json(payload, out / "report.json")
    csv_writer(report, out / "metrics.csv")
    figure_fn(report, out / figure_name)
    click.echo(f"\nwrote report.json, metrics.csv, {figure_name} to {out}")


@evaluate.command("classify")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True),
              help="JSONL of {actual, predicted} records.")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Directory for report.json, metrics.csv, and figures.")
def evaluate_classify(input_path, out_dir):
    """Confusion-matrix metrics for query classification."""
    from .evaluation import figures

    records = load_dataset(input_path, kind="classification")
    matrix = ConfusionMatrix.from_pairs([(r.actual, r.predicted) for r in records])
    report = class_metrics(matrix)
    _emit(
        report_mod.classification_payload(report),
        report_mod.classification_table(report),
        out_dir,
        report_mod.classification_csv,
        report,
        figures.confusion_matrix_figure,
        "confusion_matrix.png",
    )


@evaluate.command("diagnose")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True),
              help="JSONL of diagnosis records with rankings and timings.")
@click.option("--k", default=2, show_default=True, help="Ranking depth for a correct hit.")
@click.option("--out", "out_dir", type=click.Path(), default=None)
def evaluate_diagnose(input_path, k, out_dir):
    """Top-k diagnostic accuracy with execution timing."""
    from .evaluation import figures

    records = load_dataset(input_path, kind="diagnosis")
    report = top_k_accuracy(records, k=k)
    _emit(
        report_mod.diagnosis_payload(report),
        report_mod.diagnosis_table(report),
        out_dir,
        report_mod.diagnosis_csv,
        report,
        figures.diagnosis_accuracy_figure,
        "diagnosis_accuracy.png",
    )


@evaluate.command("retrieve")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True),
              help="JSONL of rubric scores (may mix systems).")
@click.option("--baseline", "baseline_path", type=click.Path(exists=True), default=None,
              help="Optional second rubric file to merge before aggregating.")
@click.option("--seed", default=0, show_default=True, help="Bootstrap seed.")
@click.option("--iterations", default=1000, show_default=True, help="Bootstrap iterations.")
@click.option("--out", "out_dir", type=click.Path(), default=None)
def evaluate_retrieve(input_path, baseline_path, seed, iterations, out_dir):
    """Rubric aggregation plus paired significance tests between two systems."""
    from .evaluation import figures

    scores = load_dataset(input_path, kind="rubric")
    if baseline_path:
        scores = scores + load_dataset(baseline_path, kind="rubric")
    report = rubric_aggregate(scores)
    stats = _significance(scores, seed, iterations)
    payload = report_mod.rubric_payload(report, stats)
    table = report_mod.rubric_table(report)
    if stats:
        rows = [
            [dim, v["t"], v["p"], v["bootstrap_t"], v["bootstrap_p"], v["n"]]
            for dim, v in stats.items()
        ]
        table += "\n\npaired t-tests (ours vs baseline):\n"
        table += report_mod.render_table(
            ["dimension", "t", "p", "bootstrap t", "bootstrap p", "n"], rows
        )
    _emit(
        payload,
        table,
        out_dir,
        report_mod.rubric_csv,
        report,
        figures.rubric_averages_figure,
        "rubric_averages.png",
    )


def _significance(scores, seed: int, iterations: int) -> dict:
    """Per-dimension paired tests over example-matched ours/baseline scores."""
    by_system: dict[str, dict] = {}
    for score in scores:
        by_system.setdefault(score.system, {})[score.example_id] = score
    if set(by_system) != {"ours", "baseline"}:
        return {}
    matched = sorted(set(by_system["ours"]) & set(by_system["baseline"]))
    if len(matched) < 3:
        return {}
    stats = {}
    for dim in RUBRIC_DIMENSIONS:
        ours = [by_system["ours"][eid].dimensions[dim] for eid in matched]
        base = [by_system["baseline"][eid].dimensions[dim] for eid in matched]
        plain = paired_t_test(ours, base)
        boot = bootstrap_t(ours, base, fraction=0.8, iterations=iterations, seed=seed)
        stats[dim] = {
            "t": plain.statistic,
            "p": plain.pvalue,
            "bootstrap_t": boot.mean_statistic,
            "bootstrap_p": boot.mean_pvalue,
            "n": len(matched),
        }
    return stats


if __name__ == "__main__":
    main()

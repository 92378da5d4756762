"""Command-line pipelines: corpus building, edit encoding, baselines, training, decoding and evaluation."""
import functools
import json
import logging
import os
import sys
import warnings
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import click
from joblib import Parallel, delayed

from app.core import editlex
from app.core.baselines import BASELINES
from app.core.config import settings
from app.core.exceptions import AmbiguousAnchor, CommentEditError, ConfigurationError
from app.core.features import featurize_code, featurize_comment, to_tsv
from app.schemas.corpus import Example, Split
from app.schemas.edits import EditFlavor
from app.schemas.model import Prediction
from app.services.corpus_service import corpus_service
from app.services.evaluation_service import evaluation_service, parse_metric_names, predicted_tokens
from app.services.store_service import store_service
from app.utils.helpers import load_model_config, read_jsonl, write_jsonl

logger = logging.getLogger("app.cli")


def configure_logging() -> None:
    logging.basicConfig(level=settings.LOG_LEVEL.upper(), format=settings.LOG_FORMAT, stream=sys.stderr)
    logging.captureWarnings(True)


def fail(code: str, detail: str) -> None:
    click.echo(f"error code={code} detail={json.dumps(detail)}", err=True)
    sys.exit(1)


def handle_errors(command):
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except CommentEditError as e:
            fail(e.code, e.detail)
        except FileNotFoundError as e:
            fail("FileNotFound", str(e))
        except (click.exceptions.Exit, click.ClickException):
            raise
        except Exception as e:
            logger.debug("Unexpected failure", exc_info=True)
            fail(type(e).__name__, str(e))
    return wrapper


def seed_override() -> Optional[int]:
    value = os.getenv("SEED")
    if value is None:
        return None
    try:
        return int(value)
    except ValueError:
        raise ConfigurationError(f"SEED must be an integer, got {value!r}")


def load_examples(data: str, partition: Optional[str] = None, split: Optional[str] = None,
                  workers: Optional[int] = None) -> List[Example]:
    examples = corpus_service.load(data, workers=workers)
    if partition and split:
        examples = corpus_service.select(examples, corpus_service.read_partition(partition), Split(split))
    elif split and not partition:
        raise ConfigurationError("--split needs --partition")
    return examples


def load_predictions(path: str) -> Dict[str, List[str]]:
    return {str(row["id"]): predicted_tokens(row) for row in read_jsonl(path)}


data_option = click.option("--data", "data", required=True, type=click.Path(exists=True, dir_okay=False),
                           help="Change-record JSONL file")
partition_option = click.option("--partition", type=click.Path(exists=True, dir_okay=False), default=None)
split_option = click.option("--split", type=click.Choice([s.value for s in Split]), default=None)
workers_option = click.option("--workers", type=int, default=None, help="Worker threads")


@click.group()
def cli():
    """Learning to update natural-language comments from code changes."""
    configure_logging()


# -- corpus ------------------------------------------------------------------

@cli.command()
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("output_path", type=click.Path(dir_okay=False))
@click.option("--derived", type=click.Path(dir_okay=False), default=None, help="Also write token-level sequences")
@click.option("--store", is_flag=True, help="Persist records to the relational store")
@workers_option
@handle_errors
def ingest(input_path, output_path, derived, store, workers):
    """Validate and tokenize raw change records."""
    examples = corpus_service.load(input_path, workers=workers)
    count = corpus_service.write(output_path, examples, derived_path=derived)
    if store:
        store_service.create_tables()
        store_service.save_records(e.record for e in examples)
    click.echo(f"examples={count}")


@cli.command()
@click.argument("repo_path", type=click.Path(exists=True, file_okay=False))
@click.argument("output_path", type=click.Path(dir_okay=False))
@click.option("--project", default=None, help="Project name (defaults to the repository directory name)")
@click.option("--limit", type=int, default=None, help="Maximum number of commits to walk")
@click.option("--store", is_flag=True, help="Persist records to the relational store")
@handle_errors
def mine(repo_path, output_path, project, limit, store):
    """Extract @return comment/method co-changes from a git history."""
    from app.services.mining_service import mining_service

    records = list(mining_service.mine(repo_path, project=project, limit=limit))
    count = write_jsonl(output_path, records)
    if store:
        store_service.create_tables()
        store_service.save_records(records)
    click.echo(f"records={count}")


@cli.command("filter")
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("output_path", type=click.Path(dir_okay=False))
@click.option("--rejected", type=click.Path(dir_okay=False), default=None, help="Write rejection reasons here")
@workers_option
@handle_errors
def filter_command(input_path, output_path, rejected, workers):
    """Drop examples that are irrelevant, renamed, stylistic, trivial or duplicated."""
    kept, rejections = corpus_service.filter(corpus_service.load(input_path, workers=workers))
    corpus_service.write(output_path, kept)
    if rejected:
        write_jsonl(rejected, rejections)
    click.echo(f"kept={len(kept)}")
    click.echo(f"rejected={len(rejections)}")


@cli.command()
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("output_path", type=click.Path(dir_okay=False))
@click.option("--ratios", default="0.8,0.1,0.1", help="train,valid,test proportions")
@click.option("--seed", type=int, default=None)
@handle_errors
def partition(input_path, output_path, ratios, seed):
    """Split by project into train/valid/test."""
    try:
        parts = tuple(float(r) for r in ratios.split(","))
    except ValueError:
        raise ConfigurationError(f"Ratios must be three numbers, got {ratios!r}")
    if len(parts) != 3 or any(r < 0 for r in parts) or sum(parts) <= 0:
        raise ConfigurationError(f"Ratios must be three non-negative numbers, got {ratios!r}")
    if seed is None:
        seed = seed_override()

    result = corpus_service.partition(corpus_service.load(input_path), ratios=parts, seed=seed)
    corpus_service.write_partition(output_path, result)
    for split in Split:
        click.echo(f"{split.value}={len(result.ids(split))}")


@cli.command()
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--round-trip", is_flag=True, help="Also check that every comment edit reproduces the new comment")
@handle_errors
def stats(input_path, round_trip):
    """Corpus statistics as key=value lines."""
    examples = corpus_service.load(input_path)
    summary = corpus_service.stats(examples)
    for key, value in summary.model_dump().items():
        click.echo(f"{key}={json.dumps(value, sort_keys=True)}")
    if round_trip:
        report = corpus_service.round_trip_report(examples)
        click.echo(f"round_trip_checked={report.checked}")
        click.echo(f"round_trip_failures={len(report.failures)}")
        if not report.ok:
            fail("RoundTripFailure", f"{len(report.failures)} comment edits do not reproduce the new comment")


# -- edit sequences ----------------------------------------------------------

@cli.command("encode-edits")
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("output_path", type=click.Path(dir_okay=False))
@handle_errors
def encode_edits(input_path, output_path):
    """Write serialized comment and code edit sequences."""
    rows = []
    for example in corpus_service.load(input_path):
        rows.append({
            "id": example.id,
            "c_old": example.c_old.texts(),
            "c_edit": editlex.serialize(example.c_edit) if example.c_edit is not None else [],
            "m_edit": editlex.serialize(example.m_edit),
        })
    click.echo(f"sequences={write_jsonl(output_path, rows)}")


@cli.command("apply-edits")
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--lenient", is_flag=True, help="Skip actions whose anchor is missing instead of failing")
@handle_errors
def apply_edits(input_path, lenient):
    """Apply serialized comment edits (rows of c_old and c_edit tokens); print one comment per line."""
    for row in read_jsonl(input_path):
        tokens = row.get("c_edit") or []
        if lenient:
            edits, report = editlex.deserialize(tokens)
            if not report.well_formed:
                logger.warning(f"{row.get('id')}: {report.error}; applying the well-formed prefix")
        else:
            edits = editlex.deserialize_strict(tokens, EditFlavor.COMMENT_CONDENSED)
        with warnings.catch_warnings():
            warnings.simplefilter("always", AmbiguousAnchor)
            new, applied = editlex.apply_edits_with_report(row.get("c_old") or [], edits, strict=not lenient)
        if applied.skipped:
            logger.warning(f"{row.get('id')}: skipped {len(applied.skipped)} actions")
        click.echo(new.joined())


@cli.command()
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("output_path", type=click.Path(dir_okay=False))
@click.option("--side", type=click.Choice(["comment", "code"]), default="comment")
@workers_option
@handle_errors
def featurize(input_path, output_path, side, workers):
    """Per-token feature tables, one TSV block per example."""
    examples = corpus_service.load(input_path, workers=workers)

    def block(example: Example) -> str:
        if side == "comment":
            matrix = featurize_comment(example.c_old, example.m_edit, example.m_old, example.m_new)
        else:
            matrix = featurize_code(example.m_edit, example.c_old, example.m_old, example.m_new)
        return f"# {example.id}\n{to_tsv(matrix)}"

    n_jobs = workers or settings.DEFAULT_WORKERS
    if n_jobs > 1:
        blocks = Parallel(n_jobs=n_jobs, prefer="threads")(delayed(block)(e) for e in examples)
    else:
        blocks = [block(e) for e in examples]
    Path(output_path).parent.mkdir(parents=True, exist_ok=True)
    Path(output_path).write_text("\n".join(blocks), encoding="utf-8")
    click.echo(f"examples={len(blocks)}")


# -- models ------------------------------------------------------------------

@cli.command()
@click.option("--name", type=click.Choice(sorted(BASELINES)), required=True)
@data_option
@partition_option
@split_option
@click.argument("output_path", type=click.Path(dir_okay=False))
@handle_errors
def baseline(name, data, partition, split, output_path):
    """Rule-based comment updates."""
    predict_fn = BASELINES[name]
    rows = [{"id": e.id, "tokens": predict_fn(e).texts()} for e in load_examples(data, partition, split)]
    click.echo(f"predictions={write_jsonl(output_path, rows)}")


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@data_option
@click.option("--partition", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--output", "checkpoint", required=True, type=click.Path(dir_okay=False), help="Checkpoint path")
@click.option("--log", "log_path", type=click.Path(dir_okay=False), default=None, help="Per-epoch JSONL log")
@click.option("--init-embeddings", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Generation-model checkpoint to initialize shared embeddings from")
@handle_errors
def train(config_path, data, partition, checkpoint, log_path, init_embeddings):
    """Train an encoder-decoder on the train split, early-stopping on valid."""
    from app.services.training_service import training_service

    config = load_model_config(config_path)
    seed = seed_override()
    if seed is not None:
        config = config.model_copy(update={"seed": seed})

    examples = corpus_service.load(data)
    parts = corpus_service.read_partition(partition)
    result = training_service.train(
        corpus_service.select(examples, parts, Split.TRAIN),
        corpus_service.select(examples, parts, Split.VALID),
        config,
        log_path=log_path,
        init_embeddings_from=init_embeddings,
    )
    training_service.save(checkpoint, result.bundle)
    click.echo(f"epochs={len(result.log)}")
    click.echo(f"best_loss={result.best_loss:.6f}")


@cli.command()
@click.option("--checkpoint", required=True, type=click.Path(exists=True, dir_okay=False))
@data_option
@partition_option
@split_option
@click.option("--beam-width", type=int, default=None)
@click.option("--max-length", type=int, default=None)
@click.argument("output_path", type=click.Path(dir_okay=False))
@handle_errors
def predict(checkpoint, data, partition, split, beam_width, max_length, output_path):
    """Beam-search decode; writes every candidate with its parse."""
    from app.services.prediction_service import prediction_service
    from app.services.training_service import training_service

    if beam_width is not None and beam_width < 1:
        raise ConfigurationError("--beam-width must be at least 1")
    bundle = training_service.load(checkpoint)
    predictions = prediction_service.predict(bundle, load_examples(data, partition, split), beam_width, max_length)
    click.echo(f"predictions={write_jsonl(output_path, predictions)}")


@cli.command()
@click.option("--mode", type=click.Choice(["edit", "generation"]), required=True)
@click.option("--predictions", "predictions_path", required=True, type=click.Path(exists=True, dir_okay=False))
@data_option
@click.option("--generator", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Comment-from-code checkpoint (edit mode)")
@click.argument("output_path", type=click.Path(dir_okay=False))
@handle_errors
def rerank(mode, predictions_path, data, generator, output_path):
    """Re-score beam candidates and reorder them."""
    from app.services.prediction_service import prediction_service
    from app.services.rerank_service import rerank_service
    from app.services.training_service import training_service

    if mode == "edit" and generator is None:
        raise ConfigurationError("--generator is required in edit mode")
    gen_bundle = training_service.load(generator) if generator else None
    examples = {e.id: e for e in load_examples(data)}

    reranked: List[Prediction] = []
    for row in read_jsonl(predictions_path):
        prediction = Prediction.model_validate(row)
        example = examples.get(prediction.id)
        if example is None:
            logger.warning(f"No example for prediction {prediction.id}; left as is")
            reranked.append(prediction)
            continue
        if mode == "edit":
            scorer = functools.partial(prediction_service.generation_likelihood, gen_bundle, m_new=example.m_new)
            candidates = rerank_service.rerank_edit(prediction.candidates, example.c_old, scorer)
        else:
            candidates = rerank_service.rerank_generation(prediction.candidates, example.c_old)
        reranked.append(prediction.model_copy(update={"candidates": candidates}))
    click.echo(f"predictions={write_jsonl(output_path, reranked)}")


# -- evaluation --------------------------------------------------------------

@cli.command()
@click.option("--predictions", "predictions_path", required=True, type=click.Path(exists=True, dir_okay=False))
@data_option
@partition_option
@split_option
@click.option("--metrics", default=None, help="Comma-separated subset of xmatch,bleu4,meteor,sari,gleu")
@click.option("--tsv", "tsv_path", type=click.Path(dir_okay=False), default=None, help="Per-example scores")
@workers_option
@handle_errors
def evaluate(predictions_path, data, partition, split, metrics, tsv_path, workers):
    """Corpus-level scores as key=value lines."""
    names = parse_metric_names(metrics)
    report = evaluation_service.evaluate(
        load_examples(data, partition, split), load_predictions(predictions_path), names, workers=workers,
    )
    if tsv_path:
        Path(tsv_path).write_text(evaluation_service.to_tsv(report), encoding="utf-8")
    click.echo(evaluation_service.format_key_values(report))


@cli.command()
@click.option("--predictions", "entries", multiple=True, required=True,
              help="name=path of a predictions file; repeat a name for several runs of one system")
@data_option
@partition_option
@split_option
@click.option("--metrics", default=None)
@click.option("--tsv-dir", type=click.Path(file_okay=False), default=None,
              help="Write per-example columnar scores, one file per run")
@click.option("--compare", "comparisons", multiple=True,
              help="a,b: paired bootstrap test that system a beats system b; repeatable")
@click.option("--bootstrap-samples", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=None, help="Bootstrap seed (defaults to SEED)")
@workers_option
@handle_errors
def report(entries: Sequence[str], data, partition, split, metrics, tsv_dir, comparisons, bootstrap_samples, seed,
           workers):
    """Score table for several systems, with mean ± std over repeated runs and bootstrap comparisons."""
    names = parse_metric_names(metrics)
    examples = load_examples(data, partition, split)
    systems: Dict[str, List] = {}
    for entry in entries:
        if "=" not in entry:
            raise ConfigurationError(f"Expected name=path, got {entry!r}")
        name, path = entry.split("=", 1)
        systems.setdefault(name, []).append(
            evaluation_service.evaluate(examples, load_predictions(path), names, name=name, workers=workers)
        )

    if tsv_dir:
        Path(tsv_dir).mkdir(parents=True, exist_ok=True)
        for name, runs in systems.items():
            for k, run in enumerate(runs, start=1):
                filename = f"{name}-{k}.tsv" if len(runs) > 1 else f"{name}.tsv"
                (Path(tsv_dir) / filename).write_text(evaluation_service.to_tsv(run), encoding="utf-8")

    if any(len(runs) > 1 for runs in systems.values()):
        click.echo(evaluation_service.format_summaries([evaluation_service.summarize(n, r) for n, r in systems.items()]))
    else:
        click.echo(evaluation_service.format_report([runs[0] for runs in systems.values()]))

    seed = settings.SEED if seed is None else seed
    for comparison in comparisons:
        pair = [part.strip() for part in comparison.split(",")]
        if len(pair) != 2 or any(part not in systems for part in pair):
            raise ConfigurationError(f"Expected a,b naming two reported systems, got {comparison!r}")
        for metric in names:
            result = evaluation_service.paired_bootstrap(
                systems[pair[0]], systems[pair[1]], metric, samples=bootstrap_samples, seed=seed,
            )
            click.echo(f"compare={pair[0]},{pair[1]} metric={metric} delta={result.delta:.3f} p_value={result.p_value:.4f}")


if __name__ == "__main__":
    cli()

import contextlib
import json
import logging
import os
import sys

import click
import numpy as np

from dnsgt import __version__
from dnsgt.bench import MODES, bench as run_bench
from dnsgt.configuration import PRESETS as RUN_PRESETS, load_run_configuration
from dnsgt.definitions import (
    ANALYSIS_FILENAME,
    BENCH_CSV_FILENAME,
    BENCH_EXECUTIONS,
    BENCH_JSON_FILENAME,
    BENCH_WARMUP_BATCHES,
    CHECKPOINT_FILENAME,
    DEFAULT_ANALYSIS_SEQUENCES,
    DEFAULT_DEDUP_WINDOW,
    DEFAULT_MIN_OCCURRENCES,
    DEFAULT_MIN_REQUESTS,
    DEFAULT_RATIO_HIGH,
    DEFAULT_RATIO_LOW,
    EMBEDDINGS_BINARY_FILENAME,
    EMBEDDINGS_JSONL_FILENAME,
    EXIT_DATA_ERROR,
    EXIT_OK,
    EXIT_USAGE,
    HOST_PREDICTIONS_FILENAME,
    LOSS_CURVE_FILENAME,
    METRICS_FILENAME,
    PREDICTIONS_FILENAME,
    ROC_CURVE_FILENAME,
    SCORES_FILENAME,
    SPLITS_FILENAME,
    VOCABULARY_FILENAME,
)
from dnsgt.evaluation import (
    context_sensitivity,
    embedding_distances,
    evaluate_binary,
    evaluate_hostclass,
    roc_curve_points,
    score_distributions,
    score_occurrences,
    sequence_vs_random_distance,
)
from dnsgt.evaluation.reports import aggregate_scores
from dnsgt.exceptions import DnsGtException, InvalidInputException, VocabMismatch
from dnsgt.ingest import ParseReport, clean_pipeline, filter_hosts, parse_jsonl, parse_pcap, read_host_streams
from dnsgt.ingest import write_host_streams
from dnsgt.log_handlers import RunLogContext
from dnsgt.model import TokenBatch, build_model, load_checkpoint
from dnsgt.model.embeddings import write_embeddings_binary, write_embeddings_jsonl
from dnsgt.resources import RunManifest
from dnsgt.sequencing import RawSequence, read_sequences, sequence_streams, write_sequences
from dnsgt.synth import PRESETS as SYNTH_PRESETS, generate, preset_config
from dnsgt.training import (
    LabelSet,
    SplitPlan,
    cross_validate,
    finetune as run_finetune,
    load_for_finetuning,
    make_splits,
    pretrain as run_pretrain,
    split_temporal,
)
from dnsgt.training.cross_validation import TASKS
from dnsgt.utils.encoders import DnsGtJSONEncoder
from dnsgt.utils.exceptions import format_error_line
from dnsgt.utils.jsonl import write_jsonl
from dnsgt.vocab import Vocabulary, build_vocab, tokenize, tokenize_corpus


logger = logging.getLogger(__name__)

global_cli_context = {}


class DnsGtGroup(click.Group):
    """A command group that reports failures as a single JSON line on stderr and exits with the failure's exit code:
    1 for usage errors, 2 for data errors and 3 for numeric failures.
    """

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            result = super().main(
                args=args,
                prog_name=prog_name,
                complete_var=complete_var,
                standalone_mode=False,
                **extra,
            )
            exit_code = result if isinstance(result, int) else EXIT_OK

        except click.exceptions.Abort as error:
            click.echo(format_error_line(error, exit_code=EXIT_USAGE), err=True)
            exit_code = EXIT_USAGE

        except click.ClickException as error:
            if isinstance(error, click.UsageError) and error.ctx is not None:
                click.echo(error.ctx.get_usage(), err=True)

            click.echo(format_error_line(error, exit_code=EXIT_USAGE), err=True)
            exit_code = EXIT_USAGE

        except DnsGtException as error:
            click.echo(format_error_line(error), err=True)
            exit_code = error.exit_code

        except OSError as error:
            click.echo(format_error_line(error, exit_code=EXIT_DATA_ERROR), err=True)
            exit_code = EXIT_DATA_ERROR

        if standalone_mode:
            sys.exit(exit_code)

        return exit_code


@click.group(cls=DnsGtGroup, context_settings={"help_option_names": ["-h", "--help"]})
@click.option(
    "--log-level",
    default="info",
    type=click.Choice(["debug", "info", "warning", "error"], case_sensitive=False),
    show_default=True,
    help="Log level of the run.",
)
@click.version_option(version=__version__)
def dnsgt_cli(log_level):
    """DNS-GT toolkit: turn DNS traffic into host query sequences, pre-train a graph-attention transformer on them,
    fine-tune it for malicious-domain or botnet detection, and compare it with Word2Vec baselines.

    Every subcommand writes a `manifest.json` (configuration snapshot, seed and file hashes) next to its outputs.
    """
    global_cli_context["log_level"] = log_level.upper()


@contextlib.contextmanager
def run_context(subcommand, out_dir, config=None, seed=None, inputs=(), outputs=None):
    """Run a subcommand inside a named log context and write its manifest on success.

    :param str subcommand:
    :param str|None out_dir: where the manifest goes; no manifest is written if `None`
    :param dict|None config:
    :param int|None seed:
    :param iter(str|None) inputs: input files or directories to hash
    :param list(str)|None outputs: output files or directories to hash; defaults to everything in `out_dir`
    :return iter(dnsgt.resources.RunManifest):
    """
    manifest = RunManifest(subcommand, config=config, seed=seed)
    log_level = global_cli_context.get("log_level", "INFO")

    with RunLogContext(manifest.name, logging.getLogger(), log_level=log_level):
        for path in inputs:
            if path:
                manifest.add_input(path)

        yield manifest

        if out_dir is not None:
            for path in outputs or [out_dir]:
                manifest.add_output(path)

            manifest.write(out_dir)


def _batch_sizes(ctx, param, value):
    try:
        return [int(item) for item in value.split(",") if item.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, received {value!r}.")


def _load_vocabulary(vocab_path, checkpoint_path, metadata):
    """Load the vocabulary of a checkpoint, by default from the file next to it, and check it's the one the checkpoint
    was trained with.
    """
    vocab_path = vocab_path or os.path.join(os.path.dirname(os.path.abspath(checkpoint_path)), VOCABULARY_FILENAME)
    vocabulary = Vocabulary.from_file(vocab_path)

    if metadata.get("vocab_hash") not in (None, vocabulary.hash_value):
        raise VocabMismatch(
            f"The checkpoint {checkpoint_path!r} was trained with vocabulary {metadata['vocab_hash']!r}, not with "
            f"{vocab_path!r} ({vocabulary.hash_value!r})."
        )

    return vocabulary


def _write_json(obj, path):
    with open(path, "w") as f:
        json.dump(obj, f, cls=DnsGtJSONEncoder, sort_keys=True, indent=4)


def _write_csv(dataframe, path):
    dataframe.to_csv(path, index=False, lineterminator="\n")


def _vocabulary_sizes(vocabulary):
    return vocabulary.domain_vocab_size, vocabulary.host_vocab_size


def _require(value, name):
    if value is None:
        raise InvalidInputException(f"No {name} given: pass it as an option or set it in the configuration file.")
    return value


def _sequence_from_text(text):
    """Parse a sequence written as "host domain domain ..." (the MASK token is allowed as a domain).

    :param str text:
    :return dnsgt.sequencing.sequences.RawSequence:
    """
    parts = text.split()

    if len(parts) < 2:
        raise InvalidInputException(f"A sequence needs a host and at least one domain; received {text!r}.")

    host, domains = parts[0], parts[1:]
    return RawSequence(host, [(float(position), domain) for position, domain in enumerate(domains)])


def format_listing(host, domains, predictions):
    """Lay out masked-language-model predictions with one line per position: the input query on the left, an arrow,
    then the predicted domains with their probabilities.

    :param str host:
    :param list(str) domains:
    :param list(tuple(int, list(tuple(str, float)))) predictions:
    :return list(str):
    """
    lefts = [f"{host} {domain} " for domain in domains]
    width = max(len(left) for left in lefts) + 1
    lines = []

    for position, top in predictions:
        left = lefts[position]
        right = "; ".join(f"{domain} ({100 * probability:.2f}%)" for domain, probability in top)
        lines.append(f"{left}{'-' * (width - len(left))}> {right}")

    return lines


def format_scores(domains, scores):
    """Lay out per-query maliciousness scores, one line per query.

    :param list(str) domains:
    :param iter(float) scores:
    :return list(str):
    """
    lefts = [f"{domain} " for domain in domains]
    width = max(len(left) for left in lefts) + 1
    return [f"{left}{'-' * (width - len(left))}> {score:.3f}" for left, score in zip(lefts, scores)]


@dnsgt_cli.command()
@click.option("--input", "input_path", type=click.Path(dir_okay=False), required=True, help="Capture or query log.")
@click.option(
    "--format",
    "input_format",
    type=click.Choice(["pcap", "jsonl"]),
    default=None,
    help="Input format; inferred from the file extension if omitted (.jsonl is a query log, anything else a pcap).",
)
@click.option("--min-requests", type=int, default=DEFAULT_MIN_REQUESTS, show_default=True)
@click.option("--ratio-low", type=float, default=DEFAULT_RATIO_LOW, show_default=True)
@click.option("--ratio-high", type=float, default=DEFAULT_RATIO_HIGH, show_default=True)
@click.option(
    "--dedup-window",
    type=float,
    default=DEFAULT_DEDUP_WINDOW,
    show_default=True,
    help="Seconds within which a repeated (transaction id, domain) request is a retransmission.",
)
@click.option("--out", type=click.Path(file_okay=False), required=True, help="Directory of the host streams.")
def preprocess(input_path, input_format, min_requests, ratio_low, ratio_high, dedup_window, out):
    """Parse DNS traffic, keep the hosts that behave like end users and write one query stream per host."""
    input_format = input_format or ("jsonl" if input_path.endswith(".jsonl") else "pcap")
    config = {
        "format": input_format,
        "min_requests": min_requests,
        "ratio_low": ratio_low,
        "ratio_high": ratio_high,
        "dedup_window": dedup_window,
    }

    with run_context("preprocess", out, config=config, inputs=[input_path]) as manifest:
        report = ParseReport()
        parse = parse_pcap if input_format == "pcap" else parse_jsonl
        records = list(parse(input_path, report=report))
        logger.info("Parsed %d records (%d skipped: %s).", report.parsed, report.skipped, report.errors)

        kept, stats = filter_hosts(records, min_requests=min_requests, ratio_low=ratio_low, ratio_high=ratio_high)
        streams = clean_pipeline(records, kept, dedup_window=dedup_window)
        write_host_streams(streams, stats, kept, out)
        manifest.config["parse_report"] = report.to_primitive()


@dnsgt_cli.command()
@click.option(
    "--in", "streams", type=click.Path(file_okay=False), required=True, help="Directory written by `preprocess`."
)
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="JSON or YAML file.")
@click.option("--preset", type=click.Choice(sorted(RUN_PRESETS)), default=None)
@click.option("--strategy", type=click.Choice(["fixed", "time", "density"]), default=None, help="[default: density]")
@click.option("--L", "L", type=int, default=None, help="Maximum sequence length. [default: 32]")
@click.option("--stride", type=int, default=None, help="Window stride of the fixed strategy. [default: L]")
@click.option("--delta-intra", type=float, default=None, help="Greedy strategy, seconds. [default: 30]")
@click.option("--delta-base", type=float, default=None, help="Greedy strategy, seconds. [default: 300]")
@click.option("--delta-inter", type=float, default=None, help="Greedy strategy, seconds. [default: 2]")
@click.option("--min-pts", type=int, default=None, help="Density strategy. [default: 1]")
@click.option(
    "--out", type=click.Path(dir_okay=False), required=True, help="Sequence file; the manifest goes next to it."
)
def sequence(streams, config_path, preset, strategy, L, stride, delta_intra, delta_base, delta_inter, min_pts, out):
    """Pack each host's query stream into sequences, writing one `{host, ts, domains}` JSON object per line."""
    overrides = {
        "strategy": strategy,
        "L": L,
        "stride": stride,
        "delta_intra": delta_intra,
        "delta_base": delta_base,
        "delta_inter": delta_inter,
        "min_pts": min_pts,
    }
    configuration = load_run_configuration(config_path, preset=preset, overrides=overrides)
    config = configuration.sequencing.to_primitive()

    out_dir = os.path.dirname(os.path.abspath(out))

    with run_context("sequence", out_dir, config=config, inputs=[streams, config_path], outputs=[out]):
        os.makedirs(out_dir, exist_ok=True)
        sequences = sequence_streams(read_host_streams(streams), configuration.sequencing)
        count = write_sequences(sequences, out)
        logger.info("Wrote %d sequences to %r.", count, out)


@dnsgt_cli.command("build-vocab")
@click.option("--corpus", type=click.Path(dir_okay=False), required=True, help="Sequence file.")
@click.option("--max-domains", type=int, default=30000, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), required=True)
def build_vocab_command(corpus, max_domains, out):
    """Build the domain and host vocabularies of a training corpus."""
    with run_context("build-vocab", out, config={"max_domains": max_domains}, inputs=[corpus]):
        os.makedirs(out, exist_ok=True)
        vocabulary = build_vocab(read_sequences(corpus), max_domains)
        vocabulary.to_file(os.path.join(out, VOCABULARY_FILENAME))
        logger.info("Vocabulary %s has %d domains and %d hosts.", vocabulary.hash_value, *_vocabulary_sizes(vocabulary))


@dnsgt_cli.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="JSON or YAML file.")
@click.option("--preset", type=click.Choice(sorted(RUN_PRESETS)), default=None)
@click.option("--corpus", type=click.Path(dir_okay=False), default=None, help="Sequence file.")
@click.option("--vocab", type=click.Path(dir_okay=False), default=None, help="Built from the corpus if omitted.")
@click.option("--architecture", type=click.Choice(["dnsgt", "cbow", "skipgram"]), default=None)
@click.option("--omega", type=float, default=None, help="Weight of the domain embedding. [default: 1.0]")
@click.option("--attention/--no-attention", default=None, help="Disable attention for the ablation. [default: on]")
@click.option("--max-steps", type=int, default=None)
@click.option("--lr", type=float, default=None)
@click.option("--batch-size", type=int, default=None)
@click.option("--seed", type=int, default=None, help="[default: 0]")
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory.")
def pretrain(config_path, preset, corpus, vocab, architecture, omega, attention, max_steps, lr, batch_size, seed, out):
    """Pre-train a model with masked-language modelling, writing its checkpoint, vocabulary and loss curve."""
    overrides = {
        "corpus": corpus,
        "vocab": vocab,
        "out": out,
        "architecture": architecture,
        "omega": omega,
        "attention": attention,
        "max_steps": max_steps,
        "lr": lr,
        "batch_size": batch_size,
        "seed": seed,
    }
    configuration = load_run_configuration(config_path, preset=preset, overrides=overrides)
    corpus = _require(configuration.extra.get("corpus"), "corpus")
    vocab = configuration.extra.get("vocab")
    out = configuration.extra.get("out", ".")
    train_config = configuration.train

    with run_context(
        "pretrain",
        out,
        config=configuration.to_flat(),
        seed=train_config.seed,
        inputs=[corpus, vocab, config_path],
    ):
        os.makedirs(out, exist_ok=True)
        sequences = read_sequences(corpus)
        vocabulary = Vocabulary.from_file(vocab) if vocab else build_vocab(sequences, train_config.max_domains)
        vocabulary.to_file(os.path.join(out, VOCABULARY_FILENAME))

        model_config = configuration.model.with_vocabulary(*_vocabulary_sizes(vocabulary))
        model = build_model(model_config, task="mlm", seed=train_config.seed)
        tokens = tokenize_corpus(sequences, vocabulary, model_config.L)

        training_run = run_pretrain(
            model, tokens, vocabulary, train_config, checkpoint_path=os.path.join(out, CHECKPOINT_FILENAME)
        )
        training_run.curve.to_csv(os.path.join(out, LOSS_CURVE_FILENAME))
        logger.info("Loss went from %.6f to %.6f.", training_run.initial_loss, training_run.final_loss)


def _labelled_sequences(task, label_set, tokens, class_names, allowed_domains=None):
    if task == "binary":
        return label_set.label_sequences(tokens, allowed_domains=allowed_domains)
    return label_set.classify_sequences(tokens, class_names=class_names)


@dnsgt_cli.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="JSON or YAML file.")
@click.option("--preset", type=click.Choice(sorted(RUN_PRESETS)), default=None)
@click.option(
    "--checkpoint",
    type=click.Path(dir_okay=False),
    default=None,
    help="Pre-trained checkpoint; a freshly initialised model is trained end to end if omitted.",
)
@click.option("--corpus", type=click.Path(dir_okay=False), default=None, help="Sequence file.")
@click.option("--vocab", type=click.Path(dir_okay=False), default=None, help="Defaults to the checkpoint's vocabulary.")
@click.option("--task", type=click.Choice(["binary", "hostclass"]), default="binary", show_default=True)
@click.option("--domain-labels", type=click.Path(dir_okay=False), default=None)
@click.option("--occurrence-labels", type=click.Path(dir_okay=False), default=None)
@click.option("--host-labels", type=click.Path(dir_okay=False), default=None)
@click.option(
    "--fold",
    type=int,
    default=None,
    help="Hold out this domain fold during fine-tuning; without it every labelled domain is used for training.",
)
@click.option("--architecture", type=click.Choice(["dnsgt", "cbow", "skipgram"]), default=None)
@click.option("--attention/--no-attention", default=None)
@click.option("--freeze-embeddings/--no-freeze-embeddings", default=None)
@click.option("--max-steps", type=int, default=None)
@click.option("--lr", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory.")
def finetune(
    config_path,
    preset,
    checkpoint,
    corpus,
    vocab,
    task,
    domain_labels,
    occurrence_labels,
    host_labels,
    fold,
    architecture,
    attention,
    freeze_embeddings,
    max_steps,
    lr,
    seed,
    out,
):
    """Fine-tune a model for malicious-domain scoring (binary) or botnet detection (hostclass) on the training side of
    the temporal split.
    """
    overrides = {
        "corpus": corpus,
        "vocab": vocab,
        "out": out,
        "active_fold": fold,
        "architecture": architecture,
        "attention": attention,
        "freeze_embeddings": freeze_embeddings,
        "max_steps": max_steps,
        "lr": lr,
        "seed": seed,
    }
    configuration = load_run_configuration(config_path, preset=preset, overrides=overrides)
    corpus = _require(configuration.extra.get("corpus"), "corpus")
    vocab = configuration.extra.get("vocab")
    out = configuration.extra.get("out", ".")
    train_config = configuration.train

    if checkpoint is None and vocab is None:
        raise click.UsageError("Training from scratch needs --vocab.")

    inputs = [checkpoint, corpus, vocab, domain_labels, occurrence_labels, host_labels, config_path]

    with run_context("finetune", out, config=configuration.to_flat(), seed=train_config.seed, inputs=inputs):
        os.makedirs(out, exist_ok=True)
        label_set = LabelSet.from_files(domain_labels, occurrence_labels, host_labels)
        class_names = label_set.class_names if task == "hostclass" else None

        if checkpoint is not None:
            vocabulary = _load_vocabulary(vocab, checkpoint, {})
            model = load_for_finetuning(checkpoint, vocabulary, task, class_names=class_names)
        else:
            vocabulary = Vocabulary.from_file(vocab)
            model_config = configuration.model.with_vocabulary(*_vocabulary_sizes(vocabulary))
            model = build_model(model_config, task=task, class_names=class_names, seed=train_config.seed)

        sequences = read_sequences(corpus)
        plan = make_splits(
            sequences,
            vocabulary,
            folds=train_config.folds,
            seed=train_config.seed,
            split_fraction=train_config.split_fraction,
            active_fold=train_config.active_fold or 0,
        )
        train_sequences, _ = split_temporal(sequences, plan.boundary)
        allowed = plan.train_domains() if train_config.active_fold is not None else None

        tokens = tokenize_corpus(train_sequences, vocabulary, model.config.L)
        labelled = _labelled_sequences(task, label_set, tokens, class_names, allowed_domains=allowed)
        fold_information = {"plan": plan.to_primitive(), "held_out": train_config.active_fold is not None}

        training_run = run_finetune(
            model,
            labelled,
            train_config,
            checkpoint_path=os.path.join(out, CHECKPOINT_FILENAME),
            vocab_hash=vocabulary.hash_value,
            fold=fold_information,
        )

        vocabulary.to_file(os.path.join(out, VOCABULARY_FILENAME))
        plan.to_file(os.path.join(out, SPLITS_FILENAME))
        training_run.curve.to_csv(os.path.join(out, LOSS_CURVE_FILENAME))


@dnsgt_cli.command("eval")
@click.option(
    "--checkpoint",
    type=click.Path(dir_okay=False),
    required=True,
    help="Fine-tuned checkpoint, or with --folds the checkpoint fine-tuned afresh in every fold.",
)
@click.option("--corpus", type=click.Path(dir_okay=False), required=True, help="Sequence file.")
@click.option("--vocab", type=click.Path(dir_okay=False), default=None, help="Defaults to the checkpoint's vocabulary.")
@click.option(
    "--labels",
    type=click.Path(dir_okay=False),
    default=None,
    help="Labels of the task: `{domain, label}` records for binary, `{host, class}` records for hostclass.",
)
@click.option("--domain-labels", type=click.Path(dir_okay=False), default=None)
@click.option("--occurrence-labels", type=click.Path(dir_okay=False), default=None)
@click.option("--host-labels", type=click.Path(dir_okay=False), default=None)
@click.option(
    "--task",
    type=click.Choice(TASKS),
    default=None,
    help="[default: the checkpoint's head, or binary for a pre-trained checkpoint]",
)
@click.option(
    "--folds",
    type=int,
    default=None,
    help="Cross-validate: fine-tune the checkpoint once per fold and report the mean of the fold metrics.",
)
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="Fine-tuning settings.")
@click.option("--preset", type=click.Choice(sorted(RUN_PRESETS)), default=None)
@click.option("--max-steps", type=int, default=None, help="Fine-tuning steps per fold.")
@click.option("--lr", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.option(
    "--aggregate",
    type=click.Choice(["domain", "occurrence"]),
    default="domain",
    show_default=True,
    help="Score each domain by the mean of its occurrences, or score every occurrence on its own.",
)
@click.option(
    "--split",
    type=click.Choice(["test", "train", "all"]),
    default="test",
    show_default=True,
    help="Side of the temporal split to evaluate on (cross-validation always evaluates on the test side).",
)
@click.option(
    "--report",
    "report_path",
    type=click.Path(dir_okay=False),
    default=None,
    help="Metric report. [default: <out>/metrics.json]",
)
@click.option("--out", type=click.Path(file_okay=False), default=None, help="[default: the report's directory]")
def evaluate(
    checkpoint,
    corpus,
    vocab,
    labels,
    domain_labels,
    occurrence_labels,
    host_labels,
    task,
    folds,
    config_path,
    preset,
    max_steps,
    lr,
    seed,
    aggregate,
    split,
    report_path,
    out,
):
    """Evaluate a model, writing its metric report and, for the binary task, the ROC points and scores. With --folds
    the checkpoint is fine-tuned and evaluated once per fold instead, and the report holds the mean over the folds.
    """
    if out is None and report_path is None:
        raise click.UsageError("Pass --out, --report or both.")

    out = out or os.path.dirname(os.path.abspath(report_path))
    report_path = report_path or os.path.join(out, METRICS_FILENAME)
    inputs = [checkpoint, corpus, vocab, labels, domain_labels, occurrence_labels, host_labels, config_path]

    model, metadata = load_checkpoint(checkpoint)
    task = task or (model.task if model.task in TASKS else "binary")
    label_set = _task_labels(task, labels, domain_labels, occurrence_labels, host_labels)
    written = [report_path]

    if folds is not None:
        overrides = {"folds": folds, "max_steps": max_steps, "lr": lr, "seed": seed}
        configuration = load_run_configuration(config_path, preset=preset, overrides=overrides)
        config = dict(configuration.to_flat(), task=task, aggregate=aggregate)
        seed = configuration.train.seed
    else:
        config = {"task": task, "aggregate": aggregate, "split": split}

    with run_context("eval", out, config=config, seed=seed, inputs=inputs, outputs=written):
        os.makedirs(out, exist_ok=True)
        vocabulary = _load_vocabulary(vocab, checkpoint, metadata)
        tokens = tokenize_corpus(read_sequences(corpus), vocabulary, model.config.L)

        if folds is not None:
            report = cross_validate(
                lambda class_names: load_for_finetuning(checkpoint, vocabulary, task, class_names=class_names),
                tokens,
                vocabulary,
                label_set,
                task,
                configuration.train,
                aggregate=aggregate,
            )
        else:
            report = _evaluate_checkpoint(model, metadata, checkpoint, task, tokens, label_set, aggregate, split, out)
            written.append(out)

        os.makedirs(os.path.dirname(os.path.abspath(report_path)), exist_ok=True)
        report.to_file(report_path)
        click.echo(report.serialise(indent=None))


def _task_labels(task, labels, domain_labels, occurrence_labels, host_labels):
    """Load the labels of a task, `labels` standing for the domain labels of the binary task or the host labels of the
    host-class task.
    """
    if labels is not None:
        if (domain_labels if task == "binary" else host_labels) is not None:
            raise click.UsageError(f"--labels and --{'domain' if task == 'binary' else 'host'}-labels both given.")

        if task == "binary":
            domain_labels = labels
        else:
            host_labels = labels

    return LabelSet.from_files(domain_labels, occurrence_labels, host_labels)


def _evaluate_checkpoint(model, metadata, checkpoint, task, tokens, label_set, aggregate, split, out):
    if model.task != task:
        raise InvalidInputException(
            f"{checkpoint!r} carries a {model.task!r} head; pass --folds to fine-tune it for the {task!r} task."
        )

    fold_information = metadata.get("fold") or {}
    plan = SplitPlan.deserialise(fold_information["plan"]) if fold_information.get("plan") else None

    if split != "all" and plan is not None:
        train_tokens, test_tokens = split_temporal(tokens, plan.boundary)
        tokens = test_tokens if split == "test" else train_tokens

    if task == "binary":
        allowed = None

        if plan is not None and fold_information.get("held_out"):
            allowed = plan.test_domains() if split == "test" else plan.train_domains()

        labelled = label_set.label_sequences(tokens, allowed_domains=allowed)
        report, occurrences = evaluate_binary(model, labelled, aggregate=aggregate)
        scores, labels, _ = aggregate_scores(occurrences, aggregate=aggregate)
        _write_csv(roc_curve_points(scores, labels), os.path.join(out, ROC_CURVE_FILENAME))
        _write_csv(score_distributions(occurrences), os.path.join(out, SCORES_FILENAME))
        return report

    labelled = label_set.classify_sequences(tokens, class_names=model.class_names)
    report, predictions = evaluate_hostclass(model, labelled)
    write_jsonl(
        (
            {
                "host": host,
                "class": model.class_names[int(np.argmax(probabilities))],
                "probabilities": dict(zip(model.class_names, probabilities.tolist())),
            }
            for host, probabilities in predictions.items()
        ),
        os.path.join(out, HOST_PREDICTIONS_FILENAME),
    )
    return report


@dnsgt_cli.command()
@click.option("--checkpoint", type=click.Path(dir_okay=False), required=True)
@click.option("--vocab", type=click.Path(dir_okay=False), default=None, help="Defaults to the checkpoint's vocabulary.")
@click.option(
    "--sequence",
    "sequences",
    multiple=True,
    required=True,
    help="A sequence written as 'host domain domain ...'; use <MASK> for the positions to predict. Repeatable.",
)
@click.option("--top-k", type=int, default=1, show_default=True, help="Predictions shown per position.")
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Also write the predictions here.")
def infer(checkpoint, vocab, sequences, top_k, out):
    """Run a model on sequences given on the command line. A pre-trained model predicts the domain at every position
    (MASK positions included) with its probability; a binary model scores every query; a host-class model gives the
    class probabilities of the sequence.
    """
    config = {"sequences": list(sequences), "top_k": top_k}

    with run_context("infer", out, config=config, inputs=[checkpoint, vocab]):
        model, metadata = load_checkpoint(checkpoint)
        vocabulary = _load_vocabulary(vocab, checkpoint, metadata)
        records = []

        for text in sequences:
            raw = _sequence_from_text(text)
            tokens = tokenize(raw, vocabulary, model.config.L, allow_mask=True)

            if model.task == "mlm":
                predictions = model.predict_positions(tokens, vocabulary, k=top_k)
                lines = format_listing(raw.host, raw.domains, predictions)
                records.append({"sequence": text, "predictions": [top for _, top in predictions]})

            elif model.task == "binary":
                scores = model.score_tokens(TokenBatch.from_sequences([tokens], model.config.topology))[0]
                lines = format_scores(raw.domains, scores[: tokens.length])
                records.append({"sequence": text, "scores": scores[: tokens.length].tolist()})

            else:
                probabilities = model.predict_probabilities(TokenBatch.from_sequences([tokens], model.config.topology))
                ranked = sorted(zip(model.class_names, probabilities[0].tolist()), key=lambda item: -item[1])
                lines = [f"{raw.host} {name} ({100 * probability:.2f}%)" for name, probability in ranked]
                records.append({"sequence": text, "classes": dict(ranked)})

            click.echo("\n".join(lines))

        if out is not None:
            os.makedirs(out, exist_ok=True)
            write_jsonl(records, os.path.join(out, PREDICTIONS_FILENAME))


@dnsgt_cli.command()
@click.option("--checkpoint", type=click.Path(dir_okay=False), required=True)
@click.option("--vocab", type=click.Path(dir_okay=False), default=None, help="Defaults to the checkpoint's vocabulary.")
@click.option("--format", "output_format", type=click.Choice(["jsonl", "binary"]), default="jsonl", show_default=True)
@click.option("--out", type=click.Path(file_okay=False), required=True)
def embed(checkpoint, vocab, output_format, out):
    """Export the domain embeddings of a model in vocabulary order."""
    with run_context("embed", out, config={"format": output_format}, inputs=[checkpoint, vocab]):
        os.makedirs(out, exist_ok=True)
        model, metadata = load_checkpoint(checkpoint)
        embeddings = model.export_embeddings(_load_vocabulary(vocab, checkpoint, metadata))

        if output_format == "jsonl":
            write_embeddings_jsonl(embeddings, os.path.join(out, EMBEDDINGS_JSONL_FILENAME))
        else:
            write_embeddings_binary(embeddings, os.path.join(out, EMBEDDINGS_BINARY_FILENAME))


@dnsgt_cli.command()
@click.option("--checkpoint", type=click.Path(dir_okay=False), required=True)
@click.option("--corpus", type=click.Path(dir_okay=False), required=True, help="Sequence file.")
@click.option("--vocab", type=click.Path(dir_okay=False), default=None, help="Defaults to the checkpoint's vocabulary.")
@click.option(
    "--domain-labels",
    type=click.Path(dir_okay=False),
    default=None,
    help="Compare malicious with benign domains in embedding space.",
)
@click.option("--n-sequences", type=int, default=DEFAULT_ANALYSIS_SEQUENCES, show_default=True)
@click.option("--min-occurrences", type=int, default=DEFAULT_MIN_OCCURRENCES, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), required=True)
def analyze(checkpoint, corpus, vocab, domain_labels, n_sequences, min_occurrences, seed, out):
    """Analyse a model: domain distances in embedding space, within-sequence against random distances and, for a
    binary model, how much each domain's score depends on its context.
    """
    config = {"n_sequences": n_sequences, "min_occurrences": min_occurrences}

    with run_context("analyze", out, config=config, seed=seed, inputs=[checkpoint, corpus, vocab, domain_labels]):
        os.makedirs(out, exist_ok=True)
        model, metadata = load_checkpoint(checkpoint)
        vocabulary = _load_vocabulary(vocab, checkpoint, metadata)
        sequences = read_sequences(corpus)
        embeddings = model.export_embeddings(vocabulary)

        analysis = {
            "sequence_vs_random": sequence_vs_random_distance(
                embeddings,
                [sequence.domains for sequence in sequences],
                n_sequences=n_sequences,
                rng=np.random.default_rng(seed),
            )
        }

        if domain_labels:
            labels = LabelSet.from_files(domain_labels_path=domain_labels).domain_labels
            malicious = [domain for domain, label in labels.items() if label == 1 and domain in embeddings]
            benign = [domain for domain, label in labels.items() if label == 0 and domain in embeddings]

            if malicious and benign:
                analysis["embedding_distances"] = embedding_distances(embeddings, malicious, benign)
            else:
                logger.warning("Skipping the embedding distances: no malicious or no benign domain is embedded.")

        if model.task == "binary":
            tokens = tokenize_corpus(sequences, vocabulary, model.config.L)
            occurrences = score_occurrences(model, tokens)
            report = context_sensitivity(model, tokens, min_occurrences=min_occurrences, occurrences=occurrences)
            analysis["context_sensitivity"] = report.to_primitive()
            _write_csv(score_distributions(occurrences), os.path.join(out, SCORES_FILENAME))

        _write_json(analysis, os.path.join(out, ANALYSIS_FILENAME))


@dnsgt_cli.command()
@click.option("--preset", type=click.Choice(sorted(SYNTH_PRESETS)), default="tiny", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), required=True)
def synth(preset, seed, out):
    """Generate synthetic DNS traffic with planted structure, its labels and its ground-truth sessions."""
    config = preset_config(preset, seed=seed)

    with run_context("synth", out, config=dict(config.to_primitive(), preset=preset), seed=seed):
        generate(config).write(out)


@dnsgt_cli.command()
@click.option("--checkpoint", type=click.Path(dir_okay=False), required=True)
@click.option(
    "--batch-sizes",
    callback=_batch_sizes,
    default="1,8,32",
    show_default=True,
    help="Comma-separated batch sizes.",
)
@click.option("--executions", type=int, default=BENCH_EXECUTIONS, show_default=True, help="Batches timed per row.")
@click.option(
    "--warmup",
    type=int,
    default=BENCH_WARMUP_BATCHES,
    show_default=True,
    help="Leading batches left out of the throughput.",
)
@click.option("--mode", "modes", type=click.Choice(MODES), multiple=True, help="[default: train and infer]")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), required=True)
def bench(checkpoint, batch_sizes, executions, warmup, modes, seed, out):
    """Report the cold start, mean latency and throughput of a model per batch size, for training and inference."""
    modes = modes or MODES
    config = {"batch_sizes": batch_sizes, "executions": executions, "warmup": warmup, "modes": list(modes)}

    with run_context("bench", out, config=config, seed=seed, inputs=[checkpoint]):
        os.makedirs(out, exist_ok=True)
        model, _ = load_checkpoint(checkpoint)
        report = run_bench(model, batch_sizes, executions=executions, warmup=warmup, modes=modes, seed=seed)
        report.to_file(os.path.join(out, BENCH_JSON_FILENAME))
        report.to_csv(os.path.join(out, BENCH_CSV_FILENAME))
        click.echo(report.to_dataframe().to_string(index=False))


if __name__ == "__main__":
    args = sys.argv[1:] if len(sys.argv) > 1 else ["--help"]
    dnsgt_cli(args=args)

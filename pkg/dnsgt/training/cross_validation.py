import logging

import numpy as np

from dnsgt.evaluation.metrics import MetricReport
from dnsgt.evaluation.reports import evaluate_binary, evaluate_hostclass
from dnsgt.exceptions import BadConfig, DegenerateLabels, InvalidInputException, MissingLabels
from dnsgt.training.loops import finetune
from dnsgt.training.splits import deal_folds, make_splits, split_temporal


logger = logging.getLogger(__name__)

TASKS = ("binary", "hostclass")


def cross_validate(make_model, sequences, vocabulary, label_set, task, train_config, folds=None, aggregate="domain"):
    """Fine-tune and evaluate a fresh model once per fold, then average the fold reports.

    For the binary task the folds partition the real-domain vocabulary, stratified by domain label. Each fold's model
    is fine-tuned on the training side of the temporal split with the labels of the other folds' domains, then
    evaluated on the test side with the labels of the held-out domains only. For the host-class task the folds
    partition the labelled hosts, stratified by class, and each fold's model is evaluated on the hosts it never saw.

    A fold without training labels or without both classes among its evaluated labels is reported empty.

    :param callable make_model: called with the class names (`None` for the binary task), returns a model carrying
        the task's head
    :param list(dnsgt.vocab.tokens.TokenSequence) sequences: token sequences carrying their timestamps
    :param dnsgt.vocab.vocabulary.Vocabulary vocabulary:
    :param dnsgt.training.labels.LabelSet label_set:
    :param str task: "binary" or "hostclass"
    :param dnsgt.configuration.TrainConfig train_config: fine-tuning settings of every fold
    :param int|None folds: defaults to `train_config.folds`
    :param str aggregate: "domain" or "occurrence" (binary task only)
    :raise dnsgt.exceptions.MissingLabels: if no fold could be evaluated
    :return dnsgt.evaluation.metrics.MetricReport: the mean of the fold metrics, each fold's report under `per_fold`
    """
    if task not in TASKS:
        raise InvalidInputException(f"Cross-validation needs one of the tasks {TASKS!r}; received {task!r}.")

    folds = folds or train_config.folds

    if folds < 2:
        raise BadConfig(f"At least two folds are needed; received {folds}.")

    if task == "binary":
        fold_data = _binary_folds(sequences, vocabulary, label_set, train_config, folds)
        class_names = None
    else:
        fold_data = _host_folds(sequences, label_set, train_config, folds)
        class_names = label_set.class_names

    reports = []

    for fold, (train_sequences, test_sequences) in enumerate(fold_data):
        if not train_sequences or not test_sequences:
            logger.warning(
                "Fold %d/%d lacks labelled training or test sequences; it is reported empty.", fold + 1, folds
            )
            reports.append(MetricReport(count=0))
            continue

        model = make_model(class_names)
        finetune(model, train_sequences, train_config)

        try:
            if task == "binary":
                report, _ = evaluate_binary(model, test_sequences, aggregate=aggregate)
            else:
                report, _ = evaluate_hostclass(model, test_sequences)
        except DegenerateLabels as error:
            logger.warning("Fold %d/%d can't be scored (%s); it is reported empty.", fold + 1, folds, error)
            report = MetricReport(count=0)

        logger.info("Fold %d/%d: %r.", fold + 1, folds, report)
        reports.append(report)

    if not any(report.count for report in reports):
        raise MissingLabels(f"None of the {folds} folds could be evaluated.")

    return MetricReport.averaged(reports)


def _labelled_or_empty(label_set, sequences, allowed_domains):
    try:
        return label_set.label_sequences(sequences, allowed_domains=allowed_domains)
    except MissingLabels:
        return []


def _binary_folds(sequences, vocabulary, label_set, train_config, folds):
    plan = make_splits(
        sequences,
        vocabulary,
        folds=folds,
        seed=train_config.seed,
        split_fraction=train_config.split_fraction,
        stratify=label_set.domain_strata(),
    )
    train_sequences, test_sequences = split_temporal(sequences, plan.boundary)

    for fold in range(folds):
        yield (
            _labelled_or_empty(label_set, train_sequences, plan.train_domains(fold)),
            _labelled_or_empty(label_set, test_sequences, plan.test_domains(fold)),
        )


def _host_folds(sequences, label_set, train_config, folds):
    classified = label_set.classify_sequences(sequences)
    hosts = sorted({sequence.host for sequence in classified})

    if len(hosts) < folds:
        raise BadConfig(f"Cross-validation over {len(hosts)} labelled hosts can't use {folds} folds.")

    rng = np.random.default_rng(train_config.seed)
    host_folds = deal_folds(hosts, folds, rng, strata=label_set.host_classes)

    for held_out in map(set, host_folds):
        yield (
            [sequence for sequence in classified if sequence.host not in held_out],
            [sequence for sequence in classified if sequence.host in held_out],
        )

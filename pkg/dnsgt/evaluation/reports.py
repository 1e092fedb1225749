import collections
import logging

import numpy as np

from dnsgt.evaluation.context import DEFAULT_SCORING_BATCH_SIZE, score_occurrences
from dnsgt.evaluation.metrics import MetricReport
from dnsgt.exceptions import InvalidInputException, MissingLabels
from dnsgt.model.batch import TokenBatch


logger = logging.getLogger(__name__)

AGGREGATIONS = ("domain", "occurrence")


def aggregate_scores(occurrences, aggregate="domain"):
    """Turn labelled scored occurrences into scored labels. With "occurrence" every occurrence counts on its own; with
    "domain" each domain is scored by the mean of its occurrence scores and labelled by the majority of its occurrence
    labels.

    :param iter(dnsgt.evaluation.context.ScoredOccurrence) occurrences:
    :param str aggregate: "domain" or "occurrence"
    :return (numpy.ndarray, numpy.ndarray, list): scores, labels and the domain (or occurrence) of each entry
    """
    if aggregate not in AGGREGATIONS:
        raise InvalidInputException(f"aggregate must be one of {AGGREGATIONS!r}; received {aggregate!r}.")

    labelled = [occurrence for occurrence in occurrences if occurrence.label is not None]

    if not labelled:
        raise MissingLabels("There is no labelled occurrence to evaluate.")

    if aggregate == "occurrence":
        return (
            np.array([occurrence.score for occurrence in labelled]),
            np.array([occurrence.label for occurrence in labelled]),
            labelled,
        )

    by_domain = collections.defaultdict(list)

    for occurrence in labelled:
        by_domain[occurrence.domain].append(occurrence)

    domains = sorted(by_domain)
    scores = np.array([np.mean([item.score for item in by_domain[domain]]) for domain in domains])
    labels = np.array([int(np.mean([item.label for item in by_domain[domain]]) >= 0.5) for domain in domains])
    return scores, labels, domains


def evaluate_binary(model, sequences, aggregate="domain", batch_size=DEFAULT_SCORING_BATCH_SIZE):
    """Score labelled sequences with a binary head and compute the metrics.

    :param dnsgt.model.base.SequenceModel model:
    :param list(dnsgt.vocab.tokens.TokenSequence) sequences: sequences labelled with the evaluation fold only
    :param str aggregate: "domain" or "occurrence"
    :param int batch_size:
    :return (dnsgt.evaluation.metrics.MetricReport, list(dnsgt.evaluation.context.ScoredOccurrence)):
    """
    occurrences = score_occurrences(model, sequences, batch_size=batch_size, labelled_only=True)
    scores, labels, _ = aggregate_scores(occurrences, aggregate=aggregate)
    report = MetricReport.for_binary(scores, labels)
    logger.info("Binary evaluation over %d %ss: %r.", len(labels), aggregate, report)
    return report, occurrences


def host_probabilities(sequence_probabilities, hosts):
    """Average the class probabilities of each host's sequences.

    :param numpy.ndarray sequence_probabilities: (n, C)
    :param iter(str) hosts: the host of each sequence
    :return collections.OrderedDict(str, numpy.ndarray): mean probability vector per host, in host order
    """
    grouped = collections.defaultdict(list)

    for probabilities, host in zip(np.asarray(sequence_probabilities), hosts):
        grouped[host].append(probabilities)

    return collections.OrderedDict((host, np.mean(grouped[host], axis=0)) for host in sorted(grouped))


def predict_hosts(model, sequences, batch_size=DEFAULT_SCORING_BATCH_SIZE):
    """Predict the class of every host: the argmax of the mean class probabilities of its sequences.

    :param dnsgt.model.base.SequenceModel model: carrying a host-class head
    :param list(dnsgt.vocab.tokens.TokenSequence) sequences:
    :param int batch_size:
    :return collections.OrderedDict(str, numpy.ndarray): mean probability vector per host
    """
    probabilities = []

    for start in range(0, len(sequences), batch_size):
        chunk = sequences[start : start + batch_size]
        probabilities.append(model.predict_probabilities(TokenBatch.from_sequences(chunk, model.config.topology)))

    return host_probabilities(np.concatenate(probabilities), [sequence.host for sequence in sequences])


def evaluate_hostclass(model, sequences, batch_size=DEFAULT_SCORING_BATCH_SIZE):
    """Evaluate host-level predictions against the host classes of the sequences.

    :param dnsgt.model.base.SequenceModel model:
    :param list(dnsgt.vocab.tokens.TokenSequence) sequences: sequences carrying their host's class
    :param int batch_size:
    :return (dnsgt.evaluation.metrics.MetricReport, collections.OrderedDict):
    """
    host_classes = {sequence.host: sequence.host_class for sequence in sequences}

    if any(host_class is None for host_class in host_classes.values()):
        raise MissingLabels("Every evaluated sequence needs its host's class.")

    predictions = predict_hosts(model, sequences, batch_size=batch_size)
    probabilities = np.stack(list(predictions.values()))
    labels = np.array([host_classes[host] for host in predictions])
    report = MetricReport.for_multiclass(probabilities, labels)
    logger.info("Host-class evaluation over %d hosts: %r.", len(labels), report)
    return report, predictions

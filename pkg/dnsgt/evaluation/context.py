import collections
import logging

import numpy as np
import pandas as pd

from dnsgt.definitions import CV_THRESHOLDS, DEFAULT_MIN_OCCURRENCES
from dnsgt.mixins import Serialisable
from dnsgt.model.batch import TokenBatch


logger = logging.getLogger(__name__)

DEFAULT_SCORING_BATCH_SIZE = 64


class ScoredOccurrence:
    """The binary score of one query occurrence.

    :param int sequence_index:
    :param int position:
    :param str host:
    :param float|None timestamp:
    :param str domain:
    :param float score:
    :param int|None label:
    :return None:
    """

    __slots__ = ("sequence_index", "position", "host", "timestamp", "domain", "score", "label")

    def __init__(self, sequence_index, position, host, timestamp, domain, score, label=None):
        self.sequence_index = sequence_index
        self.position = position
        self.host = host
        self.timestamp = timestamp
        self.domain = domain
        self.score = score
        self.label = label


def score_occurrences(model, sequences, batch_size=DEFAULT_SCORING_BATCH_SIZE, labelled_only=False):
    """Score every real position of the sequences with a binary head.

    :param dnsgt.model.base.SequenceModel model:
    :param list(dnsgt.vocab.tokens.TokenSequence) sequences:
    :param int batch_size:
    :param bool labelled_only: only keep positions inside the sequences' label masks
    :return list(ScoredOccurrence):
    """
    occurrences = []

    for start in range(0, len(sequences), batch_size):
        chunk = sequences[start : start + batch_size]
        scores = model.score_tokens(TokenBatch.from_sequences(chunk, model.config.topology))

        for offset, sequence in enumerate(chunk):
            timestamps = sequence.timestamps or [None] * sequence.length

            for position in range(sequence.length):
                labelled = sequence.label_mask is not None and sequence.label_mask[position]

                if labelled_only and not labelled:
                    continue

                occurrences.append(
                    ScoredOccurrence(
                        sequence_index=start + offset,
                        position=position,
                        host=sequence.host,
                        timestamp=timestamps[position],
                        domain=sequence.domains[position],
                        score=float(scores[offset, position]),
                        label=int(sequence.labels[position]) if labelled else None,
                    )
                )

    return occurrences


def coefficient_of_variation(scores):
    """Get the population standard deviation of the scores divided by their mean. Identical scores give exactly 0.

    :param iter(float) scores:
    :return float|None: `None` if the mean is 0
    """
    scores = np.asarray(scores, dtype=np.float64)

    if np.ptp(scores) == 0:
        return 0.0 if scores[0] != 0 else None

    mean = scores.mean()

    if mean == 0:
        return None

    return float(scores.std() / mean)


class CvReport(Serialisable):
    """Context sensitivity of a binary model: the coefficient of variation of each domain's per-sequence scores and the
    fraction of domains whose coefficient exceeds each threshold.

    :param dict(str, float) cv:
    :param dict(str, int) sequence_counts:
    :param iter(float) thresholds:
    :param int min_occurrences:
    :return None:
    """

    _SERIALISE_FIELDS = ("cv", "sequence_counts", "fractions", "min_occurrences")

    def __init__(self, cv, sequence_counts, thresholds=CV_THRESHOLDS, min_occurrences=DEFAULT_MIN_OCCURRENCES):
        self.cv = dict(cv)
        self.sequence_counts = dict(sequence_counts)
        self.thresholds = tuple(thresholds)
        self.min_occurrences = min_occurrences
        super().__init__()

    @property
    def fractions(self):
        """Get the fraction of domains whose coefficient of variation exceeds each threshold.

        :return dict(str, float):
        """
        values = np.array(list(self.cv.values()))

        return {
            str(threshold): float((values > threshold).mean()) if len(values) else 0.0 for threshold in self.thresholds
        }


def context_sensitivity(
    model,
    sequences,
    min_occurrences=DEFAULT_MIN_OCCURRENCES,
    thresholds=CV_THRESHOLDS,
    batch_size=DEFAULT_SCORING_BATCH_SIZE,
    occurrences=None,
):
    """Measure how much the score of each domain depends on the sequence it appears in. A domain's score in a sequence
    is the mean of its occurrences there; domains found in fewer than `min_occurrences` sequences, or whose mean score
    is 0, are left out.

    :param dnsgt.model.base.SequenceModel model: carrying a binary head
    :param list(dnsgt.vocab.tokens.TokenSequence) sequences:
    :param int min_occurrences:
    :param iter(float) thresholds:
    :param int batch_size:
    :param list(ScoredOccurrence)|None occurrences: previously computed scores of the sequences
    :return CvReport:
    """
    if occurrences is None:
        occurrences = score_occurrences(model, sequences, batch_size=batch_size)

    per_sequence = collections.defaultdict(lambda: collections.defaultdict(list))

    for occurrence in occurrences:
        per_sequence[occurrence.domain][occurrence.sequence_index].append(occurrence.score)

    cv = {}
    counts = {}

    for domain in sorted(per_sequence):
        scores = [_sequence_score(values) for _, values in sorted(per_sequence[domain].items())]

        if len(scores) < min_occurrences:
            continue

        value = coefficient_of_variation(scores)

        if value is not None:
            cv[domain] = value
            counts[domain] = len(scores)

    report = CvReport(cv, counts, thresholds=thresholds, min_occurrences=min_occurrences)
    logger.info("Context sensitivity over %d domains: %s.", len(cv), report.fractions)
    return report


def _sequence_score(values):
    if np.ptp(values) == 0:
        return values[0]

    return float(np.mean(values))


def score_distributions(occurrences):
    """Get the per-occurrence scores of every domain as a long table (box-plot data).

    :param iter(ScoredOccurrence) occurrences:
    :return pandas.DataFrame: columns `domain`, `host`, `ts`, `score`
    """
    rows = [
        {"domain": item.domain, "host": item.host, "ts": item.timestamp, "score": item.score} for item in occurrences
    ]
    frame = pd.DataFrame(rows, columns=["domain", "host", "ts", "score"])
    return frame.sort_values(["domain", "host", "ts"], kind="mergesort").reset_index(drop=True)

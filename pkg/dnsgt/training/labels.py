import collections
import logging

import numpy as np

from dnsgt.exceptions import InvalidInputException, MissingLabels
from dnsgt.utils.jsonl import read_jsonl


logger = logging.getLogger(__name__)


def occurrence_key(host, timestamp, domain):
    """Get the key identifying one query occurrence.

    :param str host:
    :param float timestamp:
    :param str domain:
    :return tuple(str, float, str):
    """
    return host, round(float(timestamp), 6), domain


class LabelSet:
    """Ground truth for fine-tuning and evaluation. Occurrence labels take precedence over domain labels, so a domain
    can be benign in one sequence and malicious in another.

    :param dict(str, int)|None domain_labels: binary label of each domain
    :param dict(tuple, int)|None occurrence_labels: binary label of individual occurrences, keyed by `occurrence_key`
    :param dict(str, str)|None host_classes: class name of each host
    :return None:
    """

    def __init__(self, domain_labels=None, occurrence_labels=None, host_classes=None):
        self.domain_labels = dict(domain_labels or {})
        self.occurrence_labels = dict(occurrence_labels or {})
        self.host_classes = dict(host_classes or {})

        for label in (*self.domain_labels.values(), *self.occurrence_labels.values()):
            if label not in (0, 1):
                raise InvalidInputException(f"Binary labels must be 0 or 1; received {label!r}.")

    @property
    def class_names(self):
        """Get the host class names in sorted order; a class's id is its index.

        :return list(str):
        """
        return sorted(set(self.host_classes.values()))

    @classmethod
    def from_files(cls, domain_labels_path=None, occurrence_labels_path=None, host_labels_path=None):
        """Load labels from JSONL files: `{domain, label}`, `{host, ts, domain, label}` and `{host, class}` records.

        :param str|None domain_labels_path:
        :param str|None occurrence_labels_path:
        :param str|None host_labels_path:
        :return LabelSet:
        """
        domain_labels = {}
        occurrence_labels = {}
        host_classes = {}

        if domain_labels_path:
            domain_labels = {record["domain"]: int(record["label"]) for record in read_jsonl(domain_labels_path)}

        if occurrence_labels_path:
            occurrence_labels = {
                occurrence_key(record["host"], record["ts"], record["domain"]): int(record["label"])
                for record in read_jsonl(occurrence_labels_path)
            }

        if host_labels_path:
            host_classes = {record["host"]: record["class"] for record in read_jsonl(host_labels_path)}

        label_set = cls(domain_labels, occurrence_labels, host_classes)
        logger.info(
            "Loaded %d domain labels, %d occurrence labels and %d host labels.",
            len(domain_labels),
            len(occurrence_labels),
            len(host_classes),
        )
        return label_set

    def domain_strata(self):
        """Get one binary label per labelled domain: its domain label, or else the majority of its occurrence labels.

        :return dict(str, int):
        """
        votes = collections.defaultdict(list)

        for (_, _, domain), label in self.occurrence_labels.items():
            votes[domain].append(label)

        strata = {domain: int(np.mean(labels) >= 0.5) for domain, labels in votes.items()}
        strata.update(self.domain_labels)
        return strata

    def label_of(self, host, timestamp, domain):
        """Get the label of one occurrence, or `None` if it's unlabelled.

        :param str host:
        :param float|None timestamp:
        :param str domain:
        :return int|None:
        """
        if timestamp is not None:
            label = self.occurrence_labels.get(occurrence_key(host, timestamp, domain))

            if label is not None:
                return label

        return self.domain_labels.get(domain)

    def token_labels(self, sequence, allowed_domains=None):
        """Get the per-position labels of a token sequence.

        :param dnsgt.vocab.tokens.TokenSequence sequence:
        :param set(str)|None allowed_domains: if given, only these domains' labels are used
        :return (numpy.ndarray, numpy.ndarray): float[L] labels and bool[L] label mask
        """
        labels = np.zeros(sequence.capacity)
        mask = np.zeros(sequence.capacity, dtype=bool)
        timestamps = sequence.timestamps or [None] * sequence.length

        for position, (timestamp, domain) in enumerate(zip(timestamps, sequence.domains)):
            if allowed_domains is not None and domain not in allowed_domains:
                continue

            label = self.label_of(sequence.host, timestamp, domain)

            if label is not None:
                labels[position] = label
                mask[position] = True

        return labels, mask

    def label_sequences(self, sequences, allowed_domains=None):
        """Attach per-token labels to token sequences, dropping sequences without any labelled position.

        :param iter(dnsgt.vocab.tokens.TokenSequence) sequences:
        :param set(str)|None allowed_domains:
        :raise dnsgt.exceptions.MissingLabels: if no sequence has a labelled position
        :return list(dnsgt.vocab.tokens.TokenSequence):
        """
        labelled = []

        for sequence in sequences:
            labels, mask = self.token_labels(sequence, allowed_domains=allowed_domains)

            if mask.any():
                labelled.append(sequence.with_labels(labels, mask))

        if not labelled:
            raise MissingLabels("None of the sequences has a labelled position.")

        return labelled

    def classify_sequences(self, sequences, class_names=None):
        """Attach the host class id to token sequences, dropping sequences of unlabelled hosts.

        :param iter(dnsgt.vocab.tokens.TokenSequence) sequences:
        :param list(str)|None class_names: defaults to `class_names`
        :raise dnsgt.exceptions.MissingLabels: if no sequence belongs to a labelled host
        :return list(dnsgt.vocab.tokens.TokenSequence):
        """
        class_names = class_names or self.class_names
        class_ids = {name: index for index, name in enumerate(class_names)}
        classified = [
            sequence.with_host_class(class_ids[self.host_classes[sequence.host]])
            for sequence in sequences
            if self.host_classes.get(sequence.host) in class_ids
        ]

        if not classified:
            raise MissingLabels("None of the sequences belongs to a labelled host.")

        return classified

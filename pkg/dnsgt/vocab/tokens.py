import numpy as np

from dnsgt.definitions import MASK_ID, MASK_TOKEN, PAD_ID, UNK_HOST_ID
from dnsgt.exceptions import EmptySequence, SequenceTooLong


class TokenSequence:
    """A sequence mapped to ids and right-padded to the model capacity `L`.

    :param numpy.ndarray host_ids: int[L]
    :param numpy.ndarray domain_ids: int[L], PAD from `length` on
    :param int length: number of real tokens
    :param str|None host: the host the sequence belongs to
    :param list(str)|None domains: the raw domain names of the real tokens
    :param list(float)|None timestamps: the timestamps of the real tokens
    :param numpy.ndarray|None labels: float[L] per-token binary labels
    :param numpy.ndarray|None label_mask: bool[L] positions whose label takes part in the loss
    :param int|None host_class: the class id of the sequence's host
    :return None:
    """

    def __init__(
        self,
        host_ids,
        domain_ids,
        length,
        host=None,
        domains=None,
        timestamps=None,
        labels=None,
        label_mask=None,
        host_class=None,
    ):
        self.host_ids = np.asarray(host_ids, dtype=np.int64)
        self.domain_ids = np.asarray(domain_ids, dtype=np.int64)
        self.length = int(length)
        self.host = host
        self.domains = list(domains) if domains is not None else None
        self.timestamps = list(timestamps) if timestamps is not None else None
        self.labels = labels
        self.label_mask = label_mask
        self.host_class = host_class

    def __repr__(self):
        return f"<TokenSequence(length={self.length}, L={self.capacity})>"

    @property
    def capacity(self):
        return len(self.domain_ids)

    @property
    def real_mask(self):
        """Get the boolean mask of the real (non-PAD) positions.

        :return numpy.ndarray:
        """
        return np.arange(self.capacity) < self.length

    def with_labels(self, labels, label_mask):
        """Get a copy of the sequence carrying per-token labels.

        :param numpy.ndarray labels:
        :param numpy.ndarray label_mask:
        :return TokenSequence:
        """
        return TokenSequence(
            self.host_ids,
            self.domain_ids,
            self.length,
            host=self.host,
            domains=self.domains,
            timestamps=self.timestamps,
            labels=np.asarray(labels, dtype=np.float64),
            label_mask=np.asarray(label_mask, dtype=bool) & self.real_mask,
            host_class=self.host_class,
        )

    def with_host_class(self, host_class):
        """Get a copy of the sequence labelled with its host's class.

        :param int host_class:
        :return TokenSequence:
        """
        return TokenSequence(
            self.host_ids,
            self.domain_ids,
            self.length,
            host=self.host,
            domains=self.domains,
            timestamps=self.timestamps,
            labels=self.labels,
            label_mask=self.label_mask,
            host_class=int(host_class),
        )


def tokenize(seq, vocab, L, allow_mask=False):
    """Map a raw sequence to ids and pad it to `L`. Out-of-vocabulary domains become UNK and unknown hosts UNK_HOST.

    :param dnsgt.sequencing.sequences.RawSequence seq:
    :param dnsgt.vocab.vocabulary.Vocabulary vocab:
    :param int L:
    :param bool allow_mask: if `True`, the MASK token written as a domain maps to the MASK id (used for inference)
    :raise dnsgt.exceptions.EmptySequence: if the sequence has no queries
    :raise dnsgt.exceptions.SequenceTooLong: if the sequence holds more than `L` queries
    :return TokenSequence:
    """
    domains = list(seq.domains)
    length = len(domains)

    if length == 0:
        raise EmptySequence("A sequence must hold at least one query.")

    if length > L:
        raise SequenceTooLong(f"A sequence of {length} queries doesn't fit the capacity L={L}.")

    domain_ids = np.full(L, PAD_ID, dtype=np.int64)
    domain_ids[:length] = [
        MASK_ID if allow_mask and domain == MASK_TOKEN else vocab.domain_id(domain) for domain in domains
    ]

    host_ids = np.full(L, UNK_HOST_ID, dtype=np.int64)
    host_ids[:length] = vocab.host_id(seq.host)

    return TokenSequence(
        host_ids=host_ids,
        domain_ids=domain_ids,
        length=length,
        host=seq.host,
        domains=domains,
        timestamps=list(seq.timestamps),
    )


def tokenize_corpus(sequences, vocab, L):
    """Tokenize every sequence of a corpus.

    :param iter(dnsgt.sequencing.sequences.RawSequence) sequences:
    :param dnsgt.vocab.vocabulary.Vocabulary vocab:
    :param int L:
    :return list(TokenSequence):
    """
    return [tokenize(sequence, vocab, L) for sequence in sequences]

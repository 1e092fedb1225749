import numpy as np

from dnsgt.definitions import MASK_TOKEN, PAD_ID
from dnsgt.topology import topology_batch
from dnsgt.vocab.masking import MASKED, RANDOMISED


class TokenBatch:
    """A batch of padded token sequences with everything a forward pass may need.

    :param numpy.ndarray host_ids: int[B, L]
    :param numpy.ndarray domain_ids: int[B, L] model input (possibly corrupted)
    :param numpy.ndarray topology: bool[B, K, L, L]
    :param numpy.ndarray|None target_ids: int[B, L] uncorrupted domain ids
    :param numpy.ndarray|None masked: bool[B, L] positions predicted by the masked-language-model loss
    :param numpy.ndarray|None labels: float[B, L] per-token binary labels
    :param numpy.ndarray|None label_mask: bool[B, L] positions whose labels take part in the loss
    :param numpy.ndarray|None host_classes: int[B] class of each sequence's host
    :param list|None sequences: the token sequences the batch was built from
    :return None:
    """

    def __init__(
        self,
        host_ids,
        domain_ids,
        topology,
        target_ids=None,
        masked=None,
        labels=None,
        label_mask=None,
        host_classes=None,
        sequences=None,
    ):
        self.host_ids = np.asarray(host_ids, dtype=np.int64)
        self.domain_ids = np.asarray(domain_ids, dtype=np.int64)
        self.topology = np.asarray(topology, dtype=bool)
        self.target_ids = self.domain_ids if target_ids is None else np.asarray(target_ids, dtype=np.int64)
        self.masked = masked
        self.labels = labels
        self.label_mask = label_mask
        self.host_classes = host_classes
        self.sequences = sequences

    def __len__(self):
        return self.domain_ids.shape[0]

    @property
    def real_mask(self):
        """Get the boolean mask of non-PAD positions.

        :return numpy.ndarray: bool[B, L]
        """
        return self.target_ids != PAD_ID

    @classmethod
    def from_sequences(cls, sequences, topology_names):
        """Build a batch from token sequences, carrying their labels when every sequence has them.

        :param list(dnsgt.vocab.tokens.TokenSequence) sequences:
        :param iter(str) topology_names:
        :return TokenBatch:
        """
        L = sequences[0].capacity
        labels = label_mask = host_classes = None

        if all(sequence.labels is not None for sequence in sequences):
            labels = np.stack([sequence.labels for sequence in sequences])
            label_mask = np.stack([sequence.label_mask for sequence in sequences])

        if all(sequence.host_class is not None for sequence in sequences):
            host_classes = np.array([sequence.host_class for sequence in sequences], dtype=np.int64)

        return cls(
            host_ids=np.stack([sequence.host_ids for sequence in sequences]),
            domain_ids=np.stack([sequence.domain_ids for sequence in sequences]),
            topology=topology_batch([_visible_domains(sequence) for sequence in sequences], topology_names, L),
            labels=labels,
            label_mask=label_mask,
            host_classes=host_classes,
            sequences=list(sequences),
        )

    @classmethod
    def from_masking_outcomes(cls, outcomes, topology_names, vocabulary):
        """Build a masked-language-model batch. Topologies are built from the domains the model sees, so a masked
        position appears as the MASK token and a randomised one as its replacement.

        :param list(dnsgt.vocab.masking.MaskingOutcome) outcomes:
        :param iter(str) topology_names:
        :param dnsgt.vocab.vocabulary.Vocabulary vocabulary:
        :return TokenBatch:
        """
        L = outcomes[0].sequence.capacity
        domain_lists = []

        for outcome in outcomes:
            domains = _visible_domains(outcome.sequence)

            for position in range(outcome.length):
                if outcome.corruption[position] == MASKED:
                    domains[position] = MASK_TOKEN
                elif outcome.corruption[position] == RANDOMISED:
                    domains[position] = vocabulary.id_to_domain[outcome.input_ids[position]]

            domain_lists.append(domains)

        return cls(
            host_ids=np.stack([outcome.host_ids for outcome in outcomes]),
            domain_ids=np.stack([outcome.input_ids for outcome in outcomes]),
            topology=topology_batch(domain_lists, topology_names, L),
            target_ids=np.stack([outcome.target_ids for outcome in outcomes]),
            masked=np.stack([outcome.masked_positions for outcome in outcomes]),
            sequences=[outcome.sequence for outcome in outcomes],
        )


def _visible_domains(sequence):
    if sequence.domains is not None:
        return list(sequence.domains)

    return [str(domain_id) for domain_id in sequence.domain_ids[: sequence.length]]

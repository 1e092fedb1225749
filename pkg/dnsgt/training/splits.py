import collections
import logging

import numpy as np

from dnsgt.exceptions import BadConfig
from dnsgt.mixins import Serialisable


logger = logging.getLogger(__name__)


class SplitPlan(Serialisable):
    """A temporal split of the corpus and a partition of the real-domain vocabulary into folds.

    :param float|None boundary: sequences starting before this timestamp are training sequences
    :param list(list(str)) domain_folds: disjoint folds covering the real domains
    :param int active_fold: the fold held out for evaluation
    :param int seed:
    :return None:
    """

    _SERIALISE_FIELDS = ("boundary", "domain_folds", "active_fold", "seed")

    def __init__(self, boundary, domain_folds, active_fold=0, seed=0):
        self.boundary = boundary
        self.domain_folds = [list(fold) for fold in domain_folds]
        self.active_fold = active_fold
        self.seed = seed
        super().__init__()

        if not 0 <= active_fold < len(self.domain_folds):
            raise BadConfig(f"The active fold must be in [0, {len(self.domain_folds)}); received {active_fold}.")

    @property
    def folds(self):
        return len(self.domain_folds)

    def test_domains(self, fold=None):
        """Get the held-out domains of a fold.

        :param int|None fold: defaults to the active fold
        :return set(str):
        """
        return set(self.domain_folds[self.active_fold if fold is None else fold])

    def train_domains(self, fold=None):
        """Get the domains of every fold but the held-out one.

        :param int|None fold: defaults to the active fold
        :return set(str):
        """
        held_out = self.active_fold if fold is None else fold
        return {
            domain
            for index, domain_fold in enumerate(self.domain_folds)
            if index != held_out
            for domain in domain_fold
        }


def temporal_boundary(sequences, fraction):
    """Get the timestamp at `fraction` of the time range covered by the sequences.

    :param iter(dnsgt.sequencing.sequences.RawSequence) sequences:
    :param float fraction:
    :return float|None: `None` if there are no sequences
    """
    starts = [sequence.timestamps[0] for sequence in sequences]
    ends = [sequence.timestamps[-1] for sequence in sequences]

    if not starts:
        return None

    low, high = min(starts), max(ends)
    return low + fraction * (high - low)


def split_temporal(sequences, boundary):
    """Split sequences by their first timestamp.

    :param iter sequences: raw or token sequences carrying timestamps
    :param float|None boundary: if `None`, everything is training data
    :return (list, list): training and test sequences
    """
    train, test = [], []

    for sequence in sequences:
        if boundary is None or sequence.timestamps[0] < boundary:
            train.append(sequence)
        else:
            test.append(sequence)

    return train, test


def deal_folds(items, folds, rng, strata=None):
    """Shuffle items and deal them round-robin into folds, one stratum after the other, so each stratum is spread
    evenly over the folds. Fold sizes differ by at most one.

    :param list items:
    :param int folds:
    :param numpy.random.Generator rng:
    :param dict|None strata: the stratum of each item; items missing from it form a stratum of their own
    :return list(list):
    """
    grouped = collections.defaultdict(list)

    for item in items:
        grouped[(strata or {}).get(item)].append(item)

    order = []

    for stratum in sorted(grouped, key=lambda stratum: (stratum is None, str(stratum))):
        members = grouped[stratum]
        order.extend(members[index] for index in rng.permutation(len(members)))

    dealt = [[] for _ in range(folds)]

    for position, item in enumerate(order):
        dealt[position % folds].append(item)

    return dealt


def make_splits(sequences, vocab, folds=5, seed=0, split_fraction=0.7, active_fold=0, stratify=None):
    """Plan the temporal split and draw the domain folds by a seeded shuffle of the real domains. Fold sizes differ by
    at most one.

    :param iter sequences: raw or token sequences carrying timestamps
    :param dnsgt.vocab.vocabulary.Vocabulary vocab:
    :param int folds:
    :param int seed:
    :param float split_fraction:
    :param int active_fold:
    :param dict(str, int)|None stratify: if given, the folds are stratified by these domain labels
    :return SplitPlan:
    """
    if folds < 2:
        raise BadConfig(f"At least two folds are needed; received {folds}.")

    rng = np.random.default_rng(seed)

    if stratify is None:
        domains = np.array(vocab.domains, dtype=object)
        shuffled = domains[rng.permutation(len(domains))] if len(domains) else domains
        domain_folds = [fold.tolist() for fold in np.array_split(shuffled, folds)]
    else:
        domain_folds = deal_folds(list(vocab.domains), folds, rng, strata=stratify)

    plan = SplitPlan(
        boundary=temporal_boundary(list(sequences), split_fraction),
        domain_folds=domain_folds,
        active_fold=active_fold,
        seed=seed,
    )

    logger.info("Planned %d domain folds of sizes %s.", folds, [len(fold) for fold in domain_folds])
    return plan

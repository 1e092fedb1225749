import numpy as np

from dnsgt.definitions import DEFAULT_MASK_PROBABILITY, DEFAULT_MASK_SPLIT, FIRST_REAL_DOMAIN_ID, MASK_ID
from dnsgt.exceptions import BadProbabilities


# Kinds of corruption applied to a position.
UNCHANGED = 0
MASKED = 1
RANDOMISED = 2
KEPT = 3

SPLIT_TOLERANCE = 1e-9


class MaskingOutcome:
    """A token sequence after masked-language-model corruption.

    :param numpy.ndarray input_ids: int[L] domain ids after corruption
    :param numpy.ndarray target_ids: int[L] original domain ids
    :param numpy.ndarray masked_positions: bool[L] positions selected for prediction
    :param numpy.ndarray corruption: int[L] corruption applied at each position (UNCHANGED, MASKED, RANDOMISED or KEPT)
    :param dnsgt.vocab.tokens.TokenSequence sequence: the uncorrupted sequence
    :return None:
    """

    def __init__(self, input_ids, target_ids, masked_positions, corruption, sequence):
        self.input_ids = input_ids
        self.target_ids = target_ids
        self.masked_positions = masked_positions
        self.corruption = corruption
        self.sequence = sequence

    @property
    def host_ids(self):
        return self.sequence.host_ids

    @property
    def length(self):
        return self.sequence.length


def validate_masking_probabilities(p, p_mask, p_random, p_same):
    """Check the selection probability and the corruption split.

    :raise dnsgt.exceptions.BadProbabilities: if a probability is outside [0, 1] or the split doesn't sum to one
    :return None:
    """
    probabilities = (p, p_mask, p_random, p_same)

    if any(not 0 <= probability <= 1 for probability in probabilities):
        raise BadProbabilities(f"Masking probabilities must be in [0, 1]; received {probabilities!r}.")

    if abs(p_mask + p_random + p_same - 1) > SPLIT_TOLERANCE:
        raise BadProbabilities(f"The corruption split must sum to 1; received {(p_mask, p_random, p_same)!r}.")


def apply_mlm_mask(
    seq,
    rng,
    domain_vocab_size,
    p=DEFAULT_MASK_PROBABILITY,
    p_mask=DEFAULT_MASK_SPLIT[0],
    p_random=DEFAULT_MASK_SPLIT[1],
    p_same=DEFAULT_MASK_SPLIT[2],
):
    """Select real positions independently with probability `p` and corrupt each selected one: with probability
    `p_mask` it becomes MASK, with `p_random` a uniformly drawn real domain, and with `p_same` it is left as is. If no
    position is selected, the first one is. UNK positions are eligible but UNK is never drawn as a replacement.

    :param dnsgt.vocab.tokens.TokenSequence seq:
    :param numpy.random.Generator rng: caller-owned generator (consumed in a fixed order)
    :param int domain_vocab_size: size of the domain vocabulary, special tokens included
    :param float p:
    :param float p_mask:
    :param float p_random:
    :param float p_same:
    :raise dnsgt.exceptions.BadProbabilities: if the probabilities are invalid
    :return MaskingOutcome:
    """
    validate_masking_probabilities(p, p_mask, p_random, p_same)

    length = seq.length
    capacity = seq.capacity

    selected = np.zeros(capacity, dtype=bool)
    selected[:length] = rng.random(length) < p

    if not selected.any():
        selected[0] = True

    positions = np.flatnonzero(selected)
    draws = rng.random(len(positions))

    corruption = np.full(capacity, UNCHANGED, dtype=np.int64)
    corruption[positions] = np.where(draws < p_mask, MASKED, np.where(draws < p_mask + p_random, RANDOMISED, KEPT))

    input_ids = seq.domain_ids.copy()
    input_ids[corruption == MASKED] = MASK_ID

    randomised = np.flatnonzero(corruption == RANDOMISED)

    if len(randomised) > 0:
        if domain_vocab_size > FIRST_REAL_DOMAIN_ID:
            input_ids[randomised] = rng.integers(FIRST_REAL_DOMAIN_ID, domain_vocab_size, size=len(randomised))
        else:
            # Without real domains there is nothing to draw from, so the positions are kept.
            corruption[randomised] = KEPT

    return MaskingOutcome(
        input_ids=input_ids,
        target_ids=seq.domain_ids.copy(),
        masked_positions=selected,
        corruption=corruption,
        sequence=seq,
    )

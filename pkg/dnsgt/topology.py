"""Graph topologies (adjacency matrices) over the positions of a padded sequence. A topology is a boolean matrix of
shape `(L, L)`; entry `[i, j]` says whether position `i` may attend to position `j`. A topology set stacks `K` of them.
"""
import logging

import numpy as np

from dnsgt.definitions import MASK_TOKEN
from dnsgt.exceptions import BadLength, BadPermutation, InvalidInputException


logger = logging.getLogger(__name__)


def _check_length(length, L):
    if not 1 <= length <= L:
        raise BadLength(f"A sequence length must satisfy 1 <= length <= L; received length={length}, L={L}.")


def pad_aware_full(length, L):
    """Get the complete graph over the first `length` positions. Real positions attend to every real position and
    nothing else; PAD positions only carry a self-loop.

    :param int length:
    :param int L:
    :raise dnsgt.exceptions.BadLength: if `length` is outside [1, L]
    :return numpy.ndarray: bool[L, L]
    """
    _check_length(length, L)
    adjacency = np.eye(L, dtype=bool)
    adjacency[:length, :length] = True
    return adjacency


def custom_from_relation(length, L, related):
    """Build a topology from a relation over real positions. Every real position gets a self-loop whatever the relation
    says; PAD positions only carry a self-loop.

    :param int length:
    :param int L:
    :param callable related: takes two real positions `(i, j)` and returns whether `i` attends to `j`
    :raise dnsgt.exceptions.BadLength: if `length` is outside [1, L]
    :return numpy.ndarray: bool[L, L]
    """
    _check_length(length, L)
    adjacency = np.eye(L, dtype=bool)

    for i in range(length):
        for j in range(length):
            adjacency[i, j] = i == j or bool(related(i, j))

    return adjacency


def permute(adjacency, permutation):
    """Relabel the nodes of a topology: position `i` moves to `permutation[i]`, so the result `B` satisfies
    `B[permutation[i], permutation[j]] == adjacency[i, j]`.

    :param numpy.ndarray adjacency: bool[L, L]
    :param iter(int) permutation:
    :raise dnsgt.exceptions.BadPermutation: if `permutation` isn't a bijection of the L positions
    :return numpy.ndarray: bool[L, L]
    """
    adjacency = np.asarray(adjacency)
    permutation = np.asarray(permutation)
    size = adjacency.shape[0]

    if permutation.ndim != 1 or len(permutation) != size or not np.array_equal(np.sort(permutation), np.arange(size)):
        raise BadPermutation(f"{permutation.tolist()!r} is not a permutation of {size} positions.")

    permuted = np.zeros_like(adjacency)
    permuted[np.ix_(permutation, permutation)] = adjacency
    return permuted


def registered_suffix(domain):
    """Get the last two labels of a domain name (e.g. "c.example.com" -> "example.com").

    :param str domain:
    :return str:
    """
    return ".".join(domain.split(".")[-2:])


def _pad_full(domains, L):
    return pad_aware_full(len(domains), L)


def _identity(domains, L):
    return custom_from_relation(len(domains), L, lambda i, j: False)


def _star(domains, L):
    return custom_from_relation(len(domains), L, lambda i, j: i == 0 or j == 0)


def _same_suffix(domains, L):
    suffixes = [None if domain == MASK_TOKEN else registered_suffix(domain) for domain in domains]

    def related(i, j):
        return suffixes[i] is not None and suffixes[i] == suffixes[j]

    return custom_from_relation(len(domains), L, related)


TOPOLOGY_BUILDERS = {
    "pad_full": _pad_full,
    "identity": _identity,
    "star": _star,
    "same_suffix": _same_suffix,
}


def build_topology(name, domains, L):
    """Build a named topology for a sequence. `domains` are the domain names the model sees at each real position, so a
    masked position appears as the MASK token and isn't related to anything by knowledge-based topologies.

    :param str name: one of `TOPOLOGY_BUILDERS`
    :param list(str) domains:
    :param int L:
    :return numpy.ndarray: bool[L, L]
    """
    try:
        builder = TOPOLOGY_BUILDERS[name]
    except KeyError:
        raise InvalidInputException(f"Unknown topology {name!r}; choose from {sorted(TOPOLOGY_BUILDERS)!r}.")

    return builder(domains, L)


def topology_set(names, domains, L):
    """Build the stack of topologies applied in every block.

    :param iter(str) names:
    :param list(str) domains:
    :param int L:
    :return numpy.ndarray: bool[K, L, L]
    """
    return np.stack([build_topology(name, domains, L) for name in names])


def path_graph(length, L):
    """Get the path graph over the real positions: each position attends to itself and its immediate neighbours.

    :param int length:
    :param int L:
    :return numpy.ndarray: bool[L, L]
    """
    return custom_from_relation(length, L, lambda i, j: abs(i - j) == 1)


def topology_batch(domain_lists, names, L):
    """Build the topologies of a batch of sequences.

    :param list(list(str)) domain_lists: the model-visible domain names of each sequence's real positions
    :param iter(str) names: topology names applied in every block
    :param int L:
    :return numpy.ndarray: bool[batch, K, L, L]
    """
    names = list(names)

    if not names:
        raise InvalidInputException("At least one topology is needed.")

    return np.stack([topology_set(names, domains, L) for domains in domain_lists])

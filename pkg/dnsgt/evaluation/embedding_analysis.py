import itertools
import logging

import numpy as np

from dnsgt.definitions import DEFAULT_ANALYSIS_SEQUENCES
from dnsgt.exceptions import InvalidInputException, MissingDomain


logger = logging.getLogger(__name__)


def cosine_similarity(u, v):
    """Get the cosine similarity of two vectors, defined as 0 if either is the zero vector.

    :param numpy.ndarray u:
    :param numpy.ndarray v:
    :return float:
    """
    norms = np.linalg.norm(u) * np.linalg.norm(v)

    if norms == 0:
        return 0.0

    return float(np.dot(u, v) / norms)


def euclidean_distance(u, v):
    return float(np.linalg.norm(np.asarray(u) - np.asarray(v)))


def _mean_metrics(pairs):
    pairs = list(pairs)

    if not pairs:
        return {"cosine": None, "euclidean": None, "pairs": 0}

    return {
        "cosine": float(np.mean([cosine_similarity(u, v) for u, v in pairs])),
        "euclidean": float(np.mean([euclidean_distance(u, v) for u, v in pairs])),
        "pairs": len(pairs),
    }


def _vectors(embeddings, domains):
    missing = [domain for domain in domains if domain not in embeddings]

    if missing:
        raise MissingDomain(f"No embedding for {missing!r}.")

    return [np.asarray(embeddings[domain], dtype=np.float64) for domain in domains]


def embedding_distances(embeddings, set_a, set_b):
    """Compare two sets of domains in embedding space: the intra metrics average over unordered pairs of distinct
    members of `set_a`, the inter metrics over the full cross product of `set_a` and `set_b`.

    :param dict(str, numpy.ndarray) embeddings:
    :param iter(str) set_a:
    :param iter(str) set_b:
    :raise dnsgt.exceptions.MissingDomain: if a domain has no embedding
    :return dict: `{"intra": {cosine, euclidean, pairs}, "inter": {cosine, euclidean, pairs}}`
    """
    set_a = sorted(set(set_a))
    set_b = sorted(set(set_b))

    if not set_a or not set_b:
        raise InvalidInputException("Both domain sets must be non-empty.")

    vectors_a = _vectors(embeddings, set_a)
    vectors_b = _vectors(embeddings, set_b)

    return {
        "intra": _mean_metrics(itertools.combinations(vectors_a, 2)),
        "inter": _mean_metrics(itertools.product(vectors_a, vectors_b)),
    }


def sequence_vs_random_distance(embeddings, sequences, n_sequences=DEFAULT_ANALYSIS_SEQUENCES, rng=None):
    """Compare domains that appear in the same sequence with randomly drawn domains. For each sampled sequence, the
    mean pairwise cosine similarity and Euclidean distance of its domains (once over every pair of positions, once
    over distinct domains only) are compared with those of an equally sized uniform sample of the embedded domains.

    :param dict(str, numpy.ndarray) embeddings:
    :param iter(list(str)) sequences: the domains of each sequence (domains without an embedding are ignored)
    :param int n_sequences:
    :param numpy.random.Generator|None rng:
    :return dict:
    """
    rng = rng or np.random.default_rng(0)
    vocabulary = list(embeddings)
    candidates = [
        [domain for domain in domains if domain in embeddings]
        for domains in sequences
        if len({domain for domain in domains if domain in embeddings}) >= 2
    ]

    if not candidates:
        raise InvalidInputException("No sequence holds two distinct embedded domains.")

    chosen = rng.choice(len(candidates), size=min(n_sequences, len(candidates)), replace=False)
    report = {"n_sequences": len(chosen)}

    for variant, deduplicate in (("with_duplicates", False), ("without_duplicates", True)):
        sequence_pairs = []
        random_pairs = []

        for index in chosen:
            domains = candidates[index]

            if deduplicate:
                domains = list(dict.fromkeys(domains))

            vectors = _vectors(embeddings, domains)
            sequence_pairs.extend(itertools.combinations(vectors, 2))

            size = min(len(domains), len(vocabulary))
            sampled = [vocabulary[i] for i in rng.choice(len(vocabulary), size=size, replace=False)]
            random_pairs.extend(itertools.combinations(_vectors(embeddings, sampled), 2))

        report[variant] = {"sequence": _mean_metrics(sequence_pairs), "random": _mean_metrics(random_pairs)}

    logger.info(
        "Within-sequence cosine %.4f vs random %.4f over %d sequences.",
        report["without_duplicates"]["sequence"]["cosine"],
        report["without_duplicates"]["random"]["cosine"],
        len(chosen),
    )
    return report

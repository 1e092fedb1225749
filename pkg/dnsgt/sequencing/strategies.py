import logging

import numpy as np

from dnsgt.exceptions import BadConfig, DegenerateStream
from dnsgt.sequencing.dbscan import NOISE, dbscan_1d
from dnsgt.sequencing.sequences import RawSequence


logger = logging.getLogger(__name__)

MICROSECONDS = 1_000_000


def fixed_length(stream, L, s):
    """Cut a stream into windows of `L` queries starting every `s` queries. A trailing window is emitted only if it
    isn't wholly contained in the previous window.

    :param dnsgt.ingest.records.QueryStream stream:
    :param int L: window length
    :param int s: stride
    :return list(dnsgt.sequencing.sequences.RawSequence):
    """
    if L < 1 or s < 1:
        raise BadConfig(f"L and the stride must be at least 1; received L={L}, s={s}.")

    n = len(stream.queries)
    sequences = []
    previous_end = 0

    for start in range(0, n, s):
        end = min(start + L, n)

        if sequences and end <= previous_end:
            break

        sequences.append(RawSequence(stream.host, stream.queries[start:end], offset=start))
        previous_end = end

        if end == n:
            break

    return sequences


def greedy_time_based(stream, cfg):
    """Sequence a stream in one pass by time gaps. Query `i` joins the current sequence (started at `t_0`) if its gap to
    the previous query is below `delta_intra`, it is within `delta_base` of `t_0` or its gap is below `delta_inter`, and
    the sequence holds fewer than `L` queries. Otherwise it starts a new sequence.

    :param dnsgt.ingest.records.QueryStream stream:
    :param dnsgt.configuration.SequencingConfig cfg:
    :return list(dnsgt.sequencing.sequences.RawSequence):
    """
    queries = stream.queries
    sequences = []
    start = 0

    for index in range(1, len(queries)):
        t_i = queries[index][0]
        t_previous = queries[index - 1][0]
        t_0 = queries[start][0]
        gap = t_i - t_previous

        joins = (
            gap < cfg.delta_intra
            and (t_i - t_0 < cfg.delta_base or gap < cfg.delta_inter)
            and index - start < cfg.L
        )

        if not joins:
            sequences.append(RawSequence(stream.host, queries[start:index], offset=start))
            start = index

    if queries:
        sequences.append(RawSequence(stream.host, queries[start:], offset=start))

    return sequences


def median_delta(timestamps):
    """Get the median of the consecutive deltas of integer timestamps.

    :param numpy.ndarray timestamps:
    :raise dnsgt.exceptions.DegenerateStream: if there are fewer than two timestamps
    :return float:
    """
    if len(timestamps) < 2:
        raise DegenerateStream(f"A density radius needs at least two timestamps; received {len(timestamps)}.")

    return float(np.median(np.diff(timestamps)))


def cluster_time_based(stream, cfg):
    """Sequence a stream by density-clustering its timestamps. The radius is the median consecutive time delta of the
    stream, so it adapts to each host's activity. Timestamps are compared in whole microseconds. Each cluster is cut
    chronologically into chunks of at most `L` queries. When `min_pts` > 1, noise queries become single-query
    sequences so that every query is still sequenced exactly once.

    :param dnsgt.ingest.records.QueryStream stream:
    :param dnsgt.configuration.SequencingConfig cfg:
    :return list(dnsgt.sequencing.sequences.RawSequence):
    """
    queries = stream.queries

    if not queries:
        return []

    timestamps = np.rint(np.asarray([timestamp for timestamp, _ in queries]) * MICROSECONDS).astype(np.int64)

    try:
        eps = median_delta(timestamps)
    except DegenerateStream as error:
        logger.debug("Host %s: %s Emitting its only query as one sequence.", stream.host, error)
        return [RawSequence(stream.host, queries, offset=0)]

    labels = dbscan_1d(timestamps.astype(np.float64), eps, cfg.min_pts)

    sequences = []
    run_start = 0

    for index in range(1, len(queries) + 1):
        if index < len(queries) and labels[index] == labels[run_start] and labels[index] != NOISE:
            continue

        for chunk_start in range(run_start, index, cfg.L):
            chunk_end = min(chunk_start + cfg.L, index)
            sequences.append(RawSequence(stream.host, queries[chunk_start:chunk_end], offset=chunk_start))

        run_start = index

    return sequences


def sequence_stream(stream, cfg):
    """Sequence one host's stream with the configured strategy.

    :param dnsgt.ingest.records.QueryStream stream:
    :param dnsgt.configuration.SequencingConfig cfg:
    :return list(dnsgt.sequencing.sequences.RawSequence):
    """
    if cfg.strategy == "fixed":
        return fixed_length(stream, cfg.L, cfg.stride)

    if cfg.strategy == "time":
        return greedy_time_based(stream, cfg)

    return cluster_time_based(stream, cfg)


def sequence_streams(streams, cfg):
    """Sequence every host's stream, in host order.

    :param dict(str, dnsgt.ingest.records.QueryStream) streams:
    :param dnsgt.configuration.SequencingConfig cfg:
    :return list(dnsgt.sequencing.sequences.RawSequence):
    """
    sequences = []

    for host in sorted(streams):
        sequences.extend(sequence_stream(streams[host], cfg))

    logger.info("Built %d sequences from %d hosts with the %r strategy.", len(sequences), len(streams), cfg.strategy)
    return sequences

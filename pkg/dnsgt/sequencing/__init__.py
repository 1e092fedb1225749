from .dbscan import dbscan_1d
from .sequences import RawSequence, read_sequences, write_sequences
from .strategies import cluster_time_based, fixed_length, greedy_time_based, sequence_stream, sequence_streams


__all__ = (
    "RawSequence",
    "cluster_time_based",
    "dbscan_1d",
    "fixed_length",
    "greedy_time_based",
    "read_sequences",
    "sequence_stream",
    "sequence_streams",
    "write_sequences",
)

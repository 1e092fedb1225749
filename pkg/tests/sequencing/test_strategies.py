import math

import numpy as np

from dnsgt.configuration import SequencingConfig
from dnsgt.exceptions import BadConfig, DegenerateStream
from dnsgt.ingest import QueryStream
from dnsgt.sequencing import cluster_time_based, fixed_length, greedy_time_based, sequence_stream, sequence_streams
from dnsgt.sequencing.strategies import median_delta
from tests.base import BaseTestCase


def stream_of(timestamps, host="10.0.0.1"):
    return QueryStream(host, [(timestamp, f"d{index}.com") for index, timestamp in enumerate(timestamps)])


def timestamps_of(sequences):
    return [sequence.timestamps for sequence in sequences]


def random_stream(rng):
    n = int(rng.integers(1, 60))
    gaps = rng.choice([0.0, 0.5, 1.0, 2.0, 30.0, 400.0], size=n)
    return stream_of(np.cumsum(gaps).tolist())


class TestFixedLength(BaseTestCase):
    def test_overlapping_windows(self):
        """Test that six queries with L=4 and a stride of 2 give two overlapping windows."""
        sequences = fixed_length(stream_of(range(6)), L=4, s=2)
        self.assertEqual(timestamps_of(sequences), [[0, 1, 2, 3], [2, 3, 4, 5]])

    def test_short_stream(self):
        """Test that a stream shorter than L gives one window."""
        self.assertEqual(timestamps_of(fixed_length(stream_of(range(3)), L=4, s=2)), [[0, 1, 2]])

    def test_trailing_partial_window(self):
        """Test that 100 queries with L=32 and stride 32 give windows of 32, 32, 32 and 4 queries."""
        sequences = fixed_length(stream_of(range(100)), L=32, s=32)
        self.assertEqual([len(sequence) for sequence in sequences], [32, 32, 32, 4])

    def test_invalid_stride(self):
        """Test that a zero stride is rejected."""
        with self.assertRaises(BadConfig):
            fixed_length(stream_of(range(3)), L=4, s=0)


class TestGreedyTimeBased(BaseTestCase):
    def test_small_gaps_give_one_sequence(self):
        """Test that queries with small gaps form a single sequence."""
        cfg = SequencingConfig(strategy="time", delta_intra=10, delta_base=100, delta_inter=1)
        self.assertEqual(timestamps_of(greedy_time_based(stream_of([0, 1, 2]), cfg)), [[0, 1, 2]])

    def test_large_gap_starts_a_new_sequence(self):
        """Test that a gap above `delta_intra` starts a new sequence."""
        cfg = SequencingConfig(strategy="time", delta_intra=10, delta_base=100, delta_inter=1)
        self.assertEqual(timestamps_of(greedy_time_based(stream_of([0, 1, 50]), cfg)), [[0, 1], [50]])

    def test_base_window_and_inter_gap(self):
        """Test that a query outside the base window with a gap above `delta_inter` starts a new sequence, and that the
        queries following it join that sequence.
        """
        cfg = SequencingConfig(strategy="time", delta_intra=100, delta_base=30, delta_inter=1)
        sequences = greedy_time_based(stream_of([0, 40, 40.5, 41]), cfg)
        self.assertEqual(timestamps_of(sequences), [[0], [40, 40.5, 41]])

    def test_inter_gap_extends_past_the_base_window(self):
        """Test that queries with gaps below `delta_inter` keep joining after the base window has elapsed."""
        cfg = SequencingConfig(strategy="time", delta_intra=100, delta_base=2, delta_inter=1)
        sequences = greedy_time_based(stream_of([0, 0.5, 1, 1.5, 2, 2.5, 3, 5]), cfg)
        self.assertEqual(timestamps_of(sequences), [[0, 0.5, 1, 1.5, 2, 2.5, 3], [5]])

    def test_capacity_starts_a_new_sequence(self):
        """Test that a full sequence is closed even if the next query is close in time."""
        cfg = SequencingConfig(strategy="time", L=2, delta_intra=10, delta_base=100, delta_inter=1)
        self.assertEqual(timestamps_of(greedy_time_based(stream_of([0, 1, 2]), cfg)), [[0, 1], [2]])

    def test_rerun_is_identical(self):
        """Test that sequencing the same stream twice gives the same output."""
        cfg = SequencingConfig(strategy="time", delta_intra=10, delta_base=100, delta_inter=1)
        stream = random_stream(np.random.default_rng(1))
        self.assertEqual(greedy_time_based(stream, cfg), greedy_time_based(stream, cfg))


class TestClusterTimeBased(BaseTestCase):
    def test_two_bursts(self):
        """Test that two bursts separated by a long pause form two sequences."""
        cfg = SequencingConfig(strategy="density", min_pts=1)
        sequences = cluster_time_based(stream_of([0, 1, 2, 100, 101]), cfg)
        self.assertEqual(timestamps_of(sequences), [[0, 1, 2], [100, 101]])

    def test_two_points(self):
        """Test that two queries are one sequence since they are exactly the radius apart."""
        cfg = SequencingConfig(strategy="density")
        self.assertEqual(timestamps_of(cluster_time_based(stream_of([0, 10]), cfg)), [[0, 10]])

    def test_coincident_timestamps(self):
        """Test that queries sharing a timestamp form one sequence."""
        cfg = SequencingConfig(strategy="density")
        self.assertEqual(len(cluster_time_based(stream_of([5, 5, 5, 5]), cfg)), 1)

    def test_single_query(self):
        """Test that a single query becomes one sequence."""
        cfg = SequencingConfig(strategy="density")
        self.assertEqual(timestamps_of(cluster_time_based(stream_of([7]), cfg)), [[7]])

    def test_median_delta_needs_two_timestamps(self):
        """Test that the radius of a one-query stream is undefined."""
        with self.assertRaises(DegenerateStream):
            median_delta(np.array([1]))

    def test_large_clusters_are_chopped(self):
        """Test that a cluster longer than L is cut chronologically into chunks of at most L queries."""
        cfg = SequencingConfig(strategy="density", L=4)
        sequences = cluster_time_based(stream_of(range(10)), cfg)
        self.assertEqual([len(sequence) for sequence in sequences], [4, 4, 2])

    def test_noise_queries_become_single_sequences(self):
        """Test that noise queries are still sequenced when `min_pts` is above 1."""
        cfg = SequencingConfig(strategy="density", min_pts=2)
        sequences = cluster_time_based(stream_of([0, 1, 2, 50, 100, 101]), cfg)
        self.assertEqual(timestamps_of(sequences), [[0, 1, 2], [50], [100, 101]])


class TestSequencingProperties(BaseTestCase):
    def _check_contiguity_and_length(self, stream, sequences, L):
        for sequence in sequences:
            self.assertTrue(1 <= len(sequence) <= L)
            self.assertEqual(sequence.queries, stream.queries[sequence.offset : sequence.offset + len(sequence)])

    def test_partition_strategies(self):
        """Test that the time and density strategies partition 1000 random streams into contiguous sequences of at
        most L queries.
        """
        rng = np.random.default_rng(3)

        for strategy in ("time", "density"):
            for _ in range(1000):
                stream = random_stream(rng)
                cfg = SequencingConfig(
                    strategy=strategy,
                    L=int(rng.integers(1, 12)),
                    delta_intra=float(rng.choice([1.0, 10.0, 60.0])),
                    delta_base=float(rng.choice([5.0, 300.0])),
                    delta_inter=float(rng.choice([0.6, 2.0])),
                    min_pts=int(rng.integers(1, 4)),
                )
                sequences = sequence_stream(stream, cfg)

                self.assertEqual([query for sequence in sequences for query in sequence.queries], stream.queries)
                self._check_contiguity_and_length(stream, sequences, cfg.L)

    def test_fixed_windows(self):
        """Test that fixed windows of 1000 random streams are contiguous, cover every query and cover no query more
        than ceil(L / s) times.
        """
        rng = np.random.default_rng(4)

        for _ in range(1000):
            stream = random_stream(rng)
            L = int(rng.integers(1, 12))
            cfg = SequencingConfig(strategy="fixed", L=L, stride=int(rng.integers(1, L + 1)))
            sequences = sequence_stream(stream, cfg)
            self._check_contiguity_and_length(stream, sequences, L)

            coverage = np.zeros(len(stream), dtype=int)

            for sequence in sequences:
                coverage[sequence.offset : sequence.offset + len(sequence)] += 1

            self.assertTrue((coverage >= 1).all())
            self.assertTrue((coverage <= math.ceil(L / cfg.stride)).all())

    def test_streams_are_sequenced_in_host_order(self):
        """Test that the sequences of several hosts come out grouped by host in sorted host order."""
        streams = {"10.0.0.2": stream_of([0, 1], host="10.0.0.2"), "10.0.0.1": stream_of([0, 1], host="10.0.0.1")}
        sequences = sequence_streams(streams, SequencingConfig(strategy="density"))
        self.assertEqual([sequence.host for sequence in sequences], ["10.0.0.1", "10.0.0.2"])

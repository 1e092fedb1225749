import numpy as np

from dnsgt.definitions import MASK_TOKEN
from dnsgt.exceptions import BadLength, BadPermutation, InvalidInputException
from dnsgt.topology import (
    build_topology,
    custom_from_relation,
    pad_aware_full,
    path_graph,
    permute,
    registered_suffix,
    topology_batch,
    topology_set,
)
from tests.base import BaseTestCase


class TestPadAwareFull(BaseTestCase):
    def test_padded_sequence(self):
        """Test that real positions are fully connected and PAD positions only have self-loops."""
        expected = np.array(
            [
                [1, 1, 0, 0],
                [1, 1, 0, 0],
                [0, 0, 1, 0],
                [0, 0, 0, 1],
            ],
            dtype=bool,
        )
        np.testing.assert_array_equal(pad_aware_full(2, 4), expected)

    def test_full_sequence(self):
        """Test that a sequence filling its capacity gets the complete graph."""
        self.assertTrue(pad_aware_full(3, 3).all())

    def test_single_query(self):
        """Test that a one-query sequence gets the identity matrix."""
        np.testing.assert_array_equal(pad_aware_full(1, 3), np.eye(3, dtype=bool))

    def test_invalid_lengths(self):
        """Test that lengths of zero or above L are rejected."""
        for length in (0, 5):
            with self.subTest(length=length):
                with self.assertRaises(BadLength):
                    pad_aware_full(length, 4)

    def test_real_and_pad_positions_are_disconnected(self):
        """Test that no real position is connected to a PAD position in either direction for any length."""
        for length in range(1, 9):
            adjacency = pad_aware_full(length, 8)
            self.assertFalse(adjacency[:length, length:].any())
            self.assertFalse(adjacency[length:, :length].any())
            self.assertTrue(np.diag(adjacency).all())


class TestCustomTopologies(BaseTestCase):
    def test_relation_always_gets_self_loops(self):
        """Test that a custom topology has self-loops even if the relation relates nothing."""
        np.testing.assert_array_equal(custom_from_relation(3, 4, lambda i, j: False), np.eye(4, dtype=bool))

    def test_path_graph(self):
        """Test that the path graph connects each real position to its neighbours only."""
        expected = np.array(
            [
                [1, 1, 0, 0],
                [1, 1, 1, 0],
                [0, 1, 1, 0],
                [0, 0, 0, 1],
            ],
            dtype=bool,
        )
        np.testing.assert_array_equal(path_graph(3, 4), expected)

    def test_star(self):
        """Test that the star topology connects the first position to every real position."""
        adjacency = build_topology("star", ["a.com", "b.com", "c.com"], 4)
        self.assertTrue(adjacency[0, :3].all())
        self.assertTrue(adjacency[:3, 0].all())
        self.assertFalse(adjacency[1, 2])
        self.assertFalse(adjacency[0, 3])

    def test_same_suffix(self):
        """Test that positions are connected iff they share a registered domain, and masked positions are isolated."""
        domains = ["a.example.com", "b.example.com", "other.org", MASK_TOKEN]
        adjacency = build_topology("same_suffix", domains, 4)

        self.assertTrue(adjacency[0, 1])
        self.assertFalse(adjacency[0, 2])
        np.testing.assert_array_equal(adjacency[3], [False, False, False, True])

    def test_registered_suffix(self):
        """Test that the registered suffix keeps the last two labels of a name."""
        self.assertEqual(registered_suffix("c.b.example.com"), "example.com")
        self.assertEqual(registered_suffix("localhost"), "localhost")

    def test_unknown_topology(self):
        """Test that an unknown topology name is rejected."""
        with self.assertRaises(InvalidInputException):
            build_topology("ring", ["a.com"], 2)

    def test_topology_set_and_batch_shapes(self):
        """Test that topology sets stack one matrix per name and batches stack one set per sequence."""
        self.assertEqual(topology_set(["pad_full", "identity"], ["a.com"], 3).shape, (2, 3, 3))
        self.assertEqual(topology_batch([["a.com"], ["a.com", "b.com"]], ["pad_full"], 3).shape, (2, 1, 3, 3))

        with self.assertRaises(InvalidInputException):
            topology_batch([["a.com"]], [], 3)


class TestPermute(BaseTestCase):
    def test_relabelling(self):
        """Test that permuting a topology moves each edge to the permuted positions."""
        adjacency = path_graph(4, 4)
        permutation = np.random.default_rng(0).permutation(4)
        permuted = permute(adjacency, permutation)

        for i in range(4):
            for j in range(4):
                self.assertEqual(permuted[permutation[i], permutation[j]], adjacency[i, j])

    def test_matches_permutation_matrix_product(self):
        """Test that permuting equals multiplying by the permutation matrix and its transpose."""
        rng = np.random.default_rng(1)
        adjacency = rng.random((6, 6)) < 0.5
        permutation = rng.permutation(6)
        matrix = np.zeros((6, 6), dtype=int)
        matrix[permutation, np.arange(6)] = 1

        np.testing.assert_array_equal(permute(adjacency, permutation), (matrix @ adjacency @ matrix.T).astype(bool))

    def test_invalid_permutations(self):
        """Test that a repeated index or a wrong length isn't accepted as a permutation."""
        for permutation in ([0, 0, 1], [0, 1]):
            with self.subTest(permutation=permutation):
                with self.assertRaises(BadPermutation):
                    permute(np.eye(3, dtype=bool), permutation)

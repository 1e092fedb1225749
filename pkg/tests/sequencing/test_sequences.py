from dnsgt.exceptions import EmptySequence, InvalidInputException
from dnsgt.sequencing import RawSequence, read_sequences, write_sequences
from tests.base import BaseTestCase


class TestRawSequence(BaseTestCase):
    def test_empty_sequence_raises_error(self):
        """Test that a sequence without queries can't be created."""
        with self.assertRaises(EmptySequence):
            RawSequence("10.0.0.1", [])

    def test_unsorted_queries_raise_error(self):
        """Test that queries out of time order are rejected."""
        with self.assertRaises(InvalidInputException):
            RawSequence("10.0.0.1", [(2.0, "a.com"), (1.0, "b.com")])

    def test_write_and_read(self):
        """Test that sequences written to a file are read back unchanged and in order."""
        sequences = self.make_sequences()
        path = self.path("sequences.jsonl")
        self.assertEqual(write_sequences(sequences, path), len(sequences))
        self.assertEqual(read_sequences(path), sequences)

    def test_mismatched_timestamps_are_rejected(self):
        """Test that a sequence object with more domains than timestamps is rejected."""
        with self.assertRaises(InvalidInputException):
            RawSequence.from_primitive({"host": "10.0.0.1", "ts": [1.0], "domains": ["a.com", "b.com"]})

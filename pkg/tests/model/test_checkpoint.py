import numpy as np

from dnsgt.exceptions import FileNotFoundException, InvalidCheckpoint
from dnsgt.model import TokenBatch, load_checkpoint, read_checkpoint, save_checkpoint
from dnsgt.model.embeddings import (
    read_embeddings_binary,
    read_embeddings_jsonl,
    write_embeddings_binary,
    write_embeddings_jsonl,
)
from tests.base import BaseTestCase


class TestCheckpoints(BaseTestCase):
    def setUp(self):
        super().setUp()
        self.model, self.vocabulary, self.tokens = self.make_model()
        self.batch = TokenBatch.from_sequences(self.tokens, self.model.config.topology)

    def test_round_trip_preserves_outputs(self):
        """Test that a reloaded model gives the same outputs as the saved one (to single precision), and that a model
        reloaded twice gives bitwise identical outputs.
        """
        first_path, second_path = self.path("first.dnsgt"), self.path("second.dnsgt")
        save_checkpoint(self.model, first_path, vocab_hash=self.vocabulary.hash_value)
        loaded, metadata = load_checkpoint(first_path)

        self.assertEqual(metadata["vocab_hash"], self.vocabulary.hash_value)
        self.assertEqual(metadata["task"], "mlm")
        self.assertEqual(loaded.config.to_primitive(), self.model.config.to_primitive())

        original = self.model.eval().predict_probabilities(self.batch)
        np.testing.assert_allclose(loaded.predict_probabilities(self.batch), original, rtol=0, atol=1e-5)

        save_checkpoint(loaded, second_path)
        reloaded, _ = load_checkpoint(second_path)
        np.testing.assert_array_equal(
            reloaded.predict_probabilities(self.batch), loaded.predict_probabilities(self.batch)
        )

    def test_fine_tuned_head_and_fold_are_restored(self):
        """Test that a host-class head, its class names and the fold information survive a round trip."""
        self.model.swap_head("hostclass", class_names=["clean", "necurs", "virut"])
        path = self.path("model.dnsgt")
        save_checkpoint(self.model, path, fold={"held_out": True}, extra={"steps": 3})

        loaded, metadata = load_checkpoint(path)
        self.assertEqual(loaded.task, "hostclass")
        self.assertEqual(loaded.class_names, ["clean", "necurs", "virut"])
        self.assertEqual(metadata["fold"], {"held_out": True})
        self.assertEqual(metadata["extra"], {"steps": 3})

    def test_batch_norm_statistics_are_saved(self):
        """Test that the running batch-norm statistics are part of the checkpoint."""
        self.model.batch_norm_state.running_mean[:] = 0.5
        path = self.path("model.dnsgt")
        save_checkpoint(self.model, path)

        _, arrays = read_checkpoint(path)
        np.testing.assert_array_equal(arrays["batch_norm.running_mean"], 0.5)

    def test_missing_file(self):
        """Test that loading a missing checkpoint raises a file-not-found error."""
        with self.assertRaises(FileNotFoundException):
            load_checkpoint(self.path("missing.dnsgt"))

    def test_bad_magic(self):
        """Test that a file that isn't a checkpoint is rejected."""
        path = self.path("model.dnsgt")

        with open(path, "wb") as f:
            f.write(b"NOTACHECKPOINT")

        with self.assertRaises(InvalidCheckpoint):
            load_checkpoint(path)

    def test_truncated_file(self):
        """Test that a checkpoint cut short is rejected."""
        path = self.path("model.dnsgt")
        save_checkpoint(self.model, path)

        with open(path, "rb") as f:
            data = f.read()

        with open(path, "wb") as f:
            f.write(data[: len(data) // 2])

        with self.assertRaises(InvalidCheckpoint):
            load_checkpoint(path)

    def test_arrays_must_match_the_configuration(self):
        """Test that arrays with the wrong names or shapes are rejected."""
        arrays = self.model.state_arrays()

        with self.assertRaises(InvalidCheckpoint):
            self.model.load_state_arrays({name: array for name, array in arrays.items() if name != "head.bias"})

        arrays = dict(arrays, **{"head.bias": np.zeros(1)})

        with self.assertRaises(InvalidCheckpoint):
            self.model.load_state_arrays(arrays)


class TestEmbeddingFiles(BaseTestCase):
    def test_export_order(self):
        """Test that exported embeddings follow the vocabulary order and are rows of the domain table."""
        model, vocabulary, _ = self.make_model()
        embeddings = model.export_embeddings(vocabulary)

        self.assertEqual(list(embeddings), vocabulary.domains)
        first = vocabulary.domains[0]
        table = model.parameter("embedding.domain").data
        np.testing.assert_array_equal(embeddings[first], table[vocabulary.domain_id(first)])

    def test_binary_and_jsonl_files_agree(self):
        """Test that both embedding formats store the same vectors in the same order."""
        model, vocabulary, _ = self.make_model()
        embeddings = model.export_embeddings(vocabulary)

        self.assertEqual(write_embeddings_binary(embeddings, self.path("embeddings.bin")), len(vocabulary.domains))
        self.assertEqual(write_embeddings_jsonl(embeddings, self.path("embeddings.jsonl")), len(vocabulary.domains))

        from_binary = read_embeddings_binary(self.path("embeddings.bin"))
        from_jsonl = read_embeddings_jsonl(self.path("embeddings.jsonl"))

        self.assertEqual(list(from_binary), list(from_jsonl))

        for domain, vector in embeddings.items():
            np.testing.assert_array_equal(from_jsonl[domain], vector)
            np.testing.assert_allclose(from_binary[domain], vector, rtol=1e-6)

import numpy as np

from dnsgt.baselines import W2VModel, band_matrix, cbow_context
from dnsgt.configuration import ModelConfig
from dnsgt.exceptions import BadConfig
from dnsgt.model import TokenBatch, build_model
from dnsgt.sequencing import RawSequence
from dnsgt.tensor import backward
from dnsgt.vocab import build_vocab, tokenize, tokenize_corpus
from tests.base import BaseTestCase


def loop_context(embeddings, r, token_mask):
    """Sum, for every position, the embeddings of the other non-PAD positions within distance `r`."""
    context = np.zeros_like(embeddings)
    batch, L, _ = embeddings.shape

    for b in range(batch):
        for i in range(L):
            for j in range(max(0, i - r), min(L, i + r + 1)):
                if j != i and token_mask[b, j]:
                    context[b, i] += embeddings[b, j]

    return context


class TestCbowContext(BaseTestCase):
    def test_band_matrix(self):
        """Test that the band matrix marks the entries within the bandwidth of the diagonal."""
        np.testing.assert_array_equal(band_matrix(4, 1), [[1, 1, 0, 0], [1, 1, 1, 0], [0, 1, 1, 1], [0, 0, 1, 1]])

    def test_matches_loop(self):
        """Test that the matrix form of the context sum equals a per-position loop exactly."""
        rng = np.random.default_rng(0)

        for _ in range(50):
            L = int(rng.integers(1, 10))
            r = int(rng.integers(1, L + 2))
            # Integer-valued embeddings make every summation order exact.
            embeddings = rng.integers(-50, 50, size=(3, L, 4)).astype(float)
            lengths = rng.integers(1, L + 1, size=3)
            token_mask = np.arange(L)[None] < lengths[:, None]

            np.testing.assert_array_equal(
                cbow_context(embeddings, r, token_mask=token_mask).data, loop_context(embeddings, r, token_mask)
            )

    def test_invalid_bandwidth(self):
        """Test that a bandwidth below one is rejected."""
        with self.assertRaises(BadConfig):
            cbow_context(np.zeros((2, 3)), 0)


class TestW2VModel(BaseTestCase):
    def _model(self, architecture, task="mlm", **config_values):
        sequences = self.make_sequences()
        vocabulary = build_vocab(sequences, max_domains=50)
        values = {"N": 8, "L": 6, "architecture": architecture, "dropout_finetune": 0.0}
        values.update(config_values)
        config = ModelConfig(**values).with_vocabulary(vocabulary.domain_vocab_size, vocabulary.host_vocab_size)
        model = build_model(config, task=task, seed=0)
        return model, vocabulary, tokenize_corpus(sequences, vocabulary, config.L)

    def test_build_model_picks_the_baseline(self):
        """Test that building a Word2Vec architecture gives a baseline without host embeddings."""
        model, _, _ = self._model("cbow")
        self.assertIsInstance(model, W2VModel)
        self.assertNotIn("embedding.host", model.parameters)

    def test_wrong_architecture(self):
        """Test that a Word2Vec model can't be built with the graph-attention architecture."""
        config = ModelConfig(N=8, L=6, n_domains=10, n_hosts=2)

        with self.assertRaises(BadConfig):
            W2VModel(config)

    def test_pretraining_losses(self):
        """Test that both variants give a finite positive loss and gradients for the domain embeddings."""
        for architecture in ("cbow", "skipgram"):
            with self.subTest(architecture=architecture):
                model, _, tokens = self._model(architecture)
                loss = model.forward_pretrain(TokenBatch.from_sequences(tokens, ("pad_full",))).loss

                self.assertGreater(loss.item(), 0)
                backward(loss)
                self.assertTrue(model.parameter("embedding.domain").grad.any())

    def test_skipgram_loss_of_single_token_sequences(self):
        """Test that sequences of one query contribute no SkipGram loss."""
        model, vocabulary, _ = self._model("skipgram")
        token = tokenize(RawSequence("10.0.0.1", [(0.0, "site0.example.com")]), vocabulary, L=6)
        self.assertEqual(model.forward_pretrain(TokenBatch.from_sequences([token], ("pad_full",))).loss.item(), 0.0)

    def test_skipgram_scores_are_context_free(self):
        """Test that the binary SkipGram head gives a domain the same score in every sequence it appears in."""
        model, vocabulary, tokens = self._model("skipgram", task="binary")
        scores = model.score_tokens(TokenBatch.from_sequences(tokens, ("pad_full",)))
        by_domain = {}

        for token, row in zip(tokens, scores):
            for position, domain in enumerate(token.domains):
                by_domain.setdefault(domain, set()).add(float(row[position]))

        self.assertTrue(all(len(values) == 1 for values in by_domain.values()))

    def test_cbow_representation_depends_on_context(self):
        """Test that a CBOW token representation changes when its neighbours change."""
        model, vocabulary, _ = self._model("cbow", bandwidth=1)
        first = tokenize(RawSequence("h", [(0.0, "site0.example.com"), (1.0, "site1.example.com")]), vocabulary, L=6)
        second = tokenize(RawSequence("h", [(0.0, "site0.example.com"), (1.0, "site2.example.com")]), vocabulary, L=6)
        states = model.forward(TokenBatch.from_sequences([first, second], ("pad_full",))).token_states.data

        self.assertFalse(np.allclose(states[0, 0], states[1, 0]))

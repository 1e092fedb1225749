from dnsgt.configuration import ModelConfig, TrainConfig
from dnsgt.evaluation import context_sensitivity, evaluate_binary, evaluate_hostclass
from dnsgt.model import build_model
from dnsgt.synth import generate, preset_config
from dnsgt.synth.generator import shared_domain
from dnsgt.training import finetune
from dnsgt.vocab import build_vocab, tokenize_corpus
from tests.base import BaseTestCase


L = 8


def train_binary(vocabulary, sequences, **config_values):
    values = {"N": 16, "L": L, "blocks": 2, "heads": 2, "dropout_embed": 0.0, "dropout_finetune": 0.0}
    values.update(config_values)
    config = ModelConfig(**values).with_vocabulary(vocabulary.domain_vocab_size, vocabulary.host_vocab_size)
    model = build_model(config, task="binary", seed=0)
    finetune(model, sequences, TrainConfig(lr=1e-2, batch_size=32, max_steps=300, seed=0))
    return model


class TestAmbiguousDomains(BaseTestCase):
    """Two topics share three domains whose labels follow the topic of the session they appear in, so only a model
    reading the rest of the sequence can score them correctly.
    """

    @classmethod
    def setUpClass(cls):
        traffic = generate(preset_config("ambiguous", seed=0))
        raw_sequences = traffic.sequences()
        cls.vocabulary = build_vocab(raw_sequences, max_domains=50)
        cls.sequences = traffic.label_set().label_sequences(tokenize_corpus(raw_sequences, cls.vocabulary, L))
        cls.models = {
            "dnsgt": train_binary(cls.vocabulary, cls.sequences),
            "no_attention": train_binary(cls.vocabulary, cls.sequences, attention=False),
            "skipgram": train_binary(cls.vocabulary, cls.sequences, architecture="skipgram"),
        }
        cls.aucs = {
            name: evaluate_binary(model, cls.sequences, aggregate="occurrence")[0].auc
            for name, model in cls.models.items()
        }

    def test_graph_transformer_beats_context_free_baselines(self):
        """Test that the graph transformer separates the occurrences well and beats both SkipGram and the same model
        without attention.
        """
        self.assertGreater(self.aucs["dnsgt"], 0.9)
        self.assertGreater(self.aucs["dnsgt"], self.aucs["skipgram"] + 0.05)
        self.assertGreater(self.aucs["dnsgt"], self.aucs["no_attention"])

    def test_skipgram_scores_never_vary(self):
        """Test that every SkipGram domain score has a coefficient of variation of exactly 0."""
        report = context_sensitivity(self.models["skipgram"], self.sequences)
        self.assertTrue(report.cv)
        self.assertTrue(all(value == 0.0 for value in report.cv.values()))

    def test_shared_domains_vary_with_context(self):
        """Test that the graph transformer scores each shared domain differently depending on its sequence."""
        report = context_sensitivity(self.models["dnsgt"], self.sequences)

        for index in range(3):
            with self.subTest(domain=shared_domain(index)):
                self.assertGreater(report.cv[shared_domain(index)], 0.05)


class TestBotnetHosts(BaseTestCase):
    def test_host_classes_are_recovered(self):
        """Test that a host-class model trained on beaconing bot hosts classifies more than 90% of hosts correctly."""
        traffic = generate(preset_config("botnet", seed=0))
        raw_sequences = traffic.sequences()
        vocabulary = build_vocab(raw_sequences, max_domains=50)
        label_set = traffic.label_set()
        sequences = label_set.classify_sequences(tokenize_corpus(raw_sequences, vocabulary, L))

        config = ModelConfig(
            N=16, L=L, blocks=1, heads=2, omega=0.5, dropout_embed=0.0, dropout_finetune=0.0
        ).with_vocabulary(vocabulary.domain_vocab_size, vocabulary.host_vocab_size)
        model = build_model(config, task="hostclass", class_names=label_set.class_names, seed=0)
        finetune(model, sequences, TrainConfig(lr=1e-2, batch_size=32, max_steps=300, seed=0))

        report, predictions = evaluate_hostclass(model, sequences)

        self.assertEqual(len(predictions), 12)
        self.assertGreater(report.accuracy, 0.9)

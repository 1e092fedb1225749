from unittest import mock

import numpy as np

from dnsgt.configuration import TrainConfig
from dnsgt.evaluation import MetricReport
from dnsgt.exceptions import BadConfig, InvalidInputException
from dnsgt.training import LabelSet, cross_validate
from tests.base import BaseTestCase


HOSTS = ("10.0.0.1", "10.0.0.2", "10.0.0.3", "10.0.0.4")


def labelled_domains(sequences):
    """Get the domains carrying a label in any of the sequences."""
    return {
        domain
        for sequence in sequences
        for position, domain in enumerate(sequence.domains)
        if sequence.label_mask[position]
    }


class TestCrossValidation(BaseTestCase):
    def setUp(self):
        super().setUp()
        self.sequences = self.make_sequences(hosts=HOSTS, repeats=10)
        _, self.vocabulary, self.tokens = self.make_model(sequences=self.sequences)
        self.train_config = TrainConfig(lr=1e-2, batch_size=4, max_steps=2, folds=5)

    def _make_model(self, class_names):
        task = "binary" if class_names is None else "hostclass"
        model, _, _ = self.make_model(task=task, sequences=self.sequences, class_names=class_names)
        return model

    def test_binary_folds_hold_out_their_domains(self):
        """Test that each fold is trained on the other folds' domains and evaluated on its own, and that the report is
        the mean of the five fold reports.
        """
        label_set = LabelSet(domain_labels={f"site{index}.example.com": index % 2 for index in range(6)})
        fold_reports = [
            MetricReport(auc=auc, f1_at_05=auc / 2, f1_best={"threshold": 0.5, "value": auc}, count=2)
            for auc in (0.5, 0.6, 0.7, 0.8, 0.9)
        ]
        trained, evaluated = [], []

        def evaluate(model, sequences, aggregate):
            evaluated.append(labelled_domains(sequences))
            return fold_reports[len(evaluated) - 1], []

        with mock.patch(
            "dnsgt.training.cross_validation.finetune",
            side_effect=lambda model, sequences, train_config: trained.append(labelled_domains(sequences)),
        ):
            with mock.patch("dnsgt.training.cross_validation.evaluate_binary", side_effect=evaluate):
                report = cross_validate(
                    self._make_model, self.tokens, self.vocabulary, label_set, "binary", self.train_config
                )

        self.assertEqual(len(report.per_fold), 5)
        self.assertEqual([fold["auc"] for fold in report.per_fold], [0.5, 0.6, 0.7, 0.8, 0.9])
        self.assertAlmostEqual(report.auc, 0.7)
        self.assertAlmostEqual(report.f1_at_05, 0.35)
        self.assertAlmostEqual(report.f1_best["value"], 0.7)
        self.assertEqual(report.count, 10)

        for training_domains, test_domains in zip(trained, evaluated):
            self.assertTrue(test_domains)
            self.assertFalse(training_domains & test_domains)

        self.assertEqual(sum(len(domains) for domains in evaluated), 6)
        self.assertEqual(set().union(*evaluated), set(self.vocabulary.domains))

    def test_host_class_folds(self):
        """Test that host-class cross-validation fine-tunes a model per fold of hosts and averages the accuracies."""
        label_set = LabelSet(host_classes=dict(zip(HOSTS, ("clean", "bot", "clean", "bot"))))
        train_config = TrainConfig(lr=1e-2, batch_size=4, max_steps=2, folds=2)
        report = cross_validate(self._make_model, self.tokens, self.vocabulary, label_set, "hostclass", train_config)

        self.assertEqual(len(report.per_fold), 2)
        self.assertEqual([fold["count"] for fold in report.per_fold], [2, 2])
        self.assertAlmostEqual(report.accuracy, np.mean([fold["accuracy"] for fold in report.per_fold]))

    def test_more_folds_than_hosts(self):
        """Test that host-class cross-validation with more folds than labelled hosts is rejected."""
        label_set = LabelSet(host_classes={HOSTS[0]: "clean", HOSTS[1]: "bot"})

        with self.assertRaises(BadConfig):
            cross_validate(self._make_model, self.tokens, self.vocabulary, label_set, "hostclass", self.train_config)

    def test_unknown_task(self):
        """Test that cross-validating a task other than binary or host-class is rejected."""
        with self.assertRaises(InvalidInputException):
            cross_validate(self._make_model, self.tokens, self.vocabulary, LabelSet(), "mlm", self.train_config)

from dnsgt.configuration import SequencingConfig
from dnsgt.definitions import HOST_LABELS_FILENAME, OCCURRENCE_LABELS_FILENAME, QUERIES_FILENAME
from dnsgt.exceptions import BadConfig
from dnsgt.ingest import clean_pipeline, filter_hosts, parse_jsonl
from dnsgt.sequencing import sequence_streams
from dnsgt.synth import CLEAN_CLASS, generate, host_address, preset_config
from dnsgt.synth.generator import shared_domain, topic_domain
from dnsgt.training import LabelSet
from tests.base import BaseTestCase


def start_of(sequence):
    return sequence.host, sequence.timestamps[0]


class TestGenerate(BaseTestCase):
    def test_same_seed_gives_same_traffic(self):
        """Test that equal configurations give identical records and labels, and other seeds don't."""
        first = generate(preset_config("ambiguous", seed=4))
        second = generate(preset_config("ambiguous", seed=4))
        other = generate(preset_config("ambiguous", seed=5))

        self.assertEqual(
            [record.to_primitive() for record in first.records], [record.to_primitive() for record in second.records]
        )
        self.assertEqual(first.occurrence_labels, second.occurrence_labels)
        self.assertNotEqual(first.occurrence_labels, other.occurrence_labels)

    def test_pairs_sessions(self):
        """Test that every pairs session emits its topic's two domains in order."""
        traffic = generate(preset_config("pairs"))

        self.assertEqual(len(traffic.sessions), 6 * 60)

        for session in traffic.sessions:
            topic = int(session.topic[len("topic") :])
            self.assertEqual(session.domains, [topic_domain(topic, 0), topic_domain(topic, 1)])

    def test_ambiguous_labels_follow_the_topic(self):
        """Test that a shared domain is labelled malicious in malicious-topic sessions and benign elsewhere."""
        traffic = generate(preset_config("ambiguous"))
        shared = {shared_domain(index) for index in range(3)}
        labels_by_topic = {"topic0": set(), "topic1": set()}

        for session in traffic.sessions:
            labels_by_topic[session.topic].update(
                label for domain, label in zip(session.domains, session.labels) if domain in shared
            )

        self.assertEqual(labels_by_topic, {"topic0": {0}, "topic1": {1}})

    def test_bot_hosts(self):
        """Test that bot hosts follow the clean hosts and only they emit beacon bursts to their family's domains."""
        traffic = generate(preset_config("botnet"))

        self.assertEqual(traffic.host_classes[host_address(7)], CLEAN_CLASS)
        self.assertEqual(traffic.host_classes[host_address(8)], "necurs")
        self.assertEqual(traffic.host_classes[host_address(11)], "virut")

        for session in traffic.sessions:
            if session.topic in ("necurs", "virut"):
                self.assertEqual(traffic.host_classes[session.host], session.topic)
                self.assertTrue(all(domain.endswith(f".{session.topic}.biz") for domain in session.domains))

    def test_unknown_preset_and_invalid_override(self):
        """Test that unknown presets and inconsistent overrides are rejected."""
        with self.assertRaises(BadConfig):
            preset_config("missing")

        with self.assertRaises(BadConfig):
            preset_config("pairs", session_length=3)


class TestPipelineOnSyntheticTraffic(BaseTestCase):
    def test_written_files_load_back(self):
        """Test that the written query log and label files load back through the ingest and label readers."""
        traffic = generate(preset_config("botnet"))
        paths = traffic.write(self.path("synthetic"))

        records = list(parse_jsonl(paths[QUERIES_FILENAME]))
        self.assertEqual(len(records), len(traffic.records))

        labels = LabelSet.from_files(
            occurrence_labels_path=paths[OCCURRENCE_LABELS_FILENAME], host_labels_path=paths[HOST_LABELS_FILENAME]
        )
        self.assertEqual(labels.host_classes, traffic.host_classes)
        self.assertEqual(len(labels.occurrence_labels), sum(len(session.domains) for session in traffic.sessions))

    def test_density_sequencing_recovers_sessions(self):
        """Test that every host passes the filters and density sequencing splits the streams into the generated
        sessions.
        """
        traffic = generate(preset_config("tiny", seed=2))
        paths = traffic.write(self.path("synthetic"))
        records = list(parse_jsonl(paths[QUERIES_FILENAME]))

        kept, _ = filter_hosts(records)
        self.assertEqual(kept, set(traffic.host_classes))

        sequences = sequence_streams(clean_pipeline(records, kept), SequencingConfig(strategy="density", L=8))
        self.assertEqual(sorted(sequences, key=start_of), sorted(traffic.sequences(), key=start_of))

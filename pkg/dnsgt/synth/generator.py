import logging
import os
from collections import Counter

import numpy as np

from dnsgt.definitions import (
    DNS_PORT,
    DOMAIN_LABELS_FILENAME,
    HOST_LABELS_FILENAME,
    OCCURRENCE_LABELS_FILENAME,
    QTYPE_A,
    QUERIES_FILENAME,
    SESSIONS_FILENAME,
)
from dnsgt.ingest.jsonl import write_jsonl as write_records
from dnsgt.ingest.records import RawDnsRecord
from dnsgt.sequencing.sequences import RawSequence
from dnsgt.training.labels import LabelSet, occurrence_key
from dnsgt.utils.jsonl import write_jsonl


logger = logging.getLogger(__name__)

CLEAN_CLASS = "clean"
MICROSECONDS = 1000000
RESPONSE_DELAY = 1000
HOST_START_STAGGER = 7 * MICROSECONDS
FIRST_CLIENT_PORT = 49152


def topic_domain(topic, index):
    return f"d{index}.topic{topic}.com"


def shared_domain(index):
    return f"x{index}.shared.net"


def family_domain(family, index):
    return f"c{index}.{family}.biz"


def host_address(index):
    """Get the IPv4 address of the index-th synthetic host.

    :param int index:
    :return str:
    """
    number = index + 1
    return f"10.{number // 65536 % 256}.{number // 256 % 256}.{number % 256}"


class Session:
    """One ground-truth session of a synthetic host.

    :param str host:
    :param int session_id: index of the session among its host's sessions
    :param str topic: the topic name, or the bot family name for a beacon burst
    :param list(int) timestamps: microseconds since the epoch
    :param list(str) domains:
    :param list(int) labels: binary label of each query
    :return None:
    """

    def __init__(self, host, session_id, topic, timestamps, domains, labels):
        self.host = host
        self.session_id = session_id
        self.topic = topic
        self.timestamps = timestamps
        self.domains = domains
        self.labels = labels

    def to_sequence(self):
        queries = [(us / MICROSECONDS, domain) for us, domain in zip(self.timestamps, self.domains)]
        return RawSequence(self.host, queries)

    def to_primitive(self):
        return {
            "host": self.host,
            "session": self.session_id,
            "topic": self.topic,
            "ts": [us / MICROSECONDS for us in self.timestamps],
            "domains": self.domains,
        }


class SyntheticTraffic:
    """A generated capture: the raw DNS records plus every kind of ground truth the pipeline can be checked against.

    :param dnsgt.synth.presets.SynthConfig config:
    :param list(Session) sessions:
    :param dict(str, str) host_classes:
    :return None:
    """

    def __init__(self, config, sessions, host_classes):
        self.config = config
        self.sessions = sessions
        self.host_classes = host_classes

    @property
    def records(self):
        """Get every request and its response in time order.

        :return list(dnsgt.ingest.records.RawDnsRecord):
        """
        timeline = []

        for host_index, host in enumerate(sorted(self.host_classes, key=_host_order)):
            client_port = FIRST_CLIENT_PORT + host_index % (65536 - FIRST_CLIENT_PORT)
            txn_id = 0

            for session in (session for session in self.sessions if session.host == host):
                for us, domain in zip(session.timestamps, session.domains):
                    timeline.append((us, host, 0, DNS_PORT, True, domain, txn_id))
                    timeline.append((us + RESPONSE_DELAY, host, 1, client_port, False, domain, txn_id))
                    txn_id = (txn_id + 1) % 65536

        timeline.sort(key=lambda entry: entry[:3])

        return [
            RawDnsRecord(
                timestamp=us / MICROSECONDS,
                src_host=host,
                dst_port=port,
                qtype=QTYPE_A,
                is_request=is_request,
                domain=domain,
                txn_id=txn_id,
            )
            for us, host, _, port, is_request, domain, txn_id in timeline
        ]

    @property
    def domain_labels(self):
        """Get the label of every emitted domain: malicious iff most of its queries are malicious.

        :return dict(str, int):
        """
        malicious = Counter()
        total = Counter()

        for session in self.sessions:
            for domain, label in zip(session.domains, session.labels):
                total[domain] += 1
                malicious[domain] += label

        return {domain: int(2 * malicious[domain] > count) for domain, count in sorted(total.items())}

    @property
    def occurrence_labels(self):
        """Get the label of every query, in time order.

        :return list(dict): `{host, ts, domain, label}` objects
        """
        occurrences = [
            (us, session.host, domain, label)
            for session in self.sessions
            for us, domain, label in zip(session.timestamps, session.domains, session.labels)
        ]
        occurrences.sort()
        return [
            {"host": host, "ts": us / MICROSECONDS, "domain": domain, "label": label}
            for us, host, domain, label in occurrences
        ]

    def sequences(self):
        """Get the ground-truth sessions as sequences, grouped by host in time order.

        :return list(dnsgt.sequencing.sequences.RawSequence):
        """
        return [session.to_sequence() for session in self.sessions]

    def label_set(self):
        """Get the ground truth as a label set.

        :return dnsgt.training.labels.LabelSet:
        """
        occurrence_labels = {
            occurrence_key(entry["host"], entry["ts"], entry["domain"]): entry["label"]
            for entry in self.occurrence_labels
        }
        return LabelSet(self.domain_labels, occurrence_labels, self.host_classes)

    def write(self, directory):
        """Write the query log, the three label files and the ground-truth sessions to a directory.

        :param str directory:
        :return dict(str, str): the path of each written file, keyed by its file name
        """
        os.makedirs(directory, exist_ok=True)
        paths = {
            name: os.path.join(directory, name)
            for name in (
                QUERIES_FILENAME,
                DOMAIN_LABELS_FILENAME,
                OCCURRENCE_LABELS_FILENAME,
                HOST_LABELS_FILENAME,
                SESSIONS_FILENAME,
            )
        }

        write_records(self.records, paths[QUERIES_FILENAME])
        write_jsonl(
            ({"domain": domain, "label": label} for domain, label in self.domain_labels.items()),
            paths[DOMAIN_LABELS_FILENAME],
        )
        write_jsonl(self.occurrence_labels, paths[OCCURRENCE_LABELS_FILENAME])
        write_jsonl(
            ({"host": host, "class": self.host_classes[host]} for host in sorted(self.host_classes, key=_host_order)),
            paths[HOST_LABELS_FILENAME],
        )
        write_jsonl((session.to_primitive() for session in self.sessions), paths[SESSIONS_FILENAME])

        logger.info("Wrote synthetic traffic to %r.", directory)
        return paths


def generate(config):
    """Generate synthetic DNS traffic. The same configuration, seed included, always gives the same traffic.

    :param dnsgt.synth.presets.SynthConfig config:
    :return SyntheticTraffic:
    """
    rng = np.random.default_rng(config.seed)
    topic_domains = [
        [topic_domain(topic, index) for index in range(config.domains_per_topic)] for topic in range(config.n_topics)
    ]
    shared_domains = [shared_domain(index) for index in range(config.ambiguous_domains)]

    host_classes = {host_address(index): CLEAN_CLASS for index in range(config.n_hosts)}

    for family_index, family in enumerate(config.bot_families):
        for member in range(config.bot_hosts_per_family):
            index = config.n_hosts + family_index * config.bot_hosts_per_family + member
            host_classes[host_address(index)] = family

    start = int(round(config.start_time * MICROSECONDS))
    intra_gap = int(round(config.intra_gap * MICROSECONDS))
    sessions = []

    for host_index, host in enumerate(sorted(host_classes, key=_host_order)):
        host_class = host_classes[host]
        clock = start + host_index * HOST_START_STAGGER

        for session_id in range(config.sessions_per_host):
            if host_class != CLEAN_CLASS and rng.random() < config.bot_activity:
                topic = host_class
                domains = [family_domain(host_class, k % config.beacon_domains) for k in range(config.beacon_length)]
                labels = [1] * len(domains)
            else:
                topic_index = int(rng.integers(config.n_topics))
                topic = f"topic{topic_index}"
                domains = _draw_session(config, rng, topic_index, topic_domains, shared_domains)
                labels = [int(topic_index in config.malicious_topics)] * len(domains)

            timestamps = [clock + k * intra_gap for k in range(len(domains))]
            sessions.append(Session(host, session_id, topic, timestamps, domains, labels))
            clock = timestamps[-1] + _session_gap(config, rng, host_class)

    traffic = SyntheticTraffic(config, sessions, host_classes)
    logger.info(
        "Generated %d sessions of %d hosts (%d bot hosts).",
        len(sessions),
        len(host_classes),
        sum(host_class != CLEAN_CLASS for host_class in host_classes.values()),
    )
    return traffic


def _draw_session(config, rng, topic_index, topic_domains, shared_domains):
    own = topic_domains[topic_index]

    if config.ordered_topics:
        return list(own)

    ambiguous = topic_index in config.ambiguous_topics
    domains = []

    for _ in range(config.session_length):
        if ambiguous and rng.random() < config.ambiguous_weight:
            domains.append(shared_domains[int(rng.integers(len(shared_domains)))])
        else:
            domains.append(own[int(rng.integers(len(own)))])

    return domains


def _session_gap(config, rng, host_class):
    if host_class == CLEAN_CLASS:
        return int(round(config.inter_gap * MICROSECONDS))

    jitter = rng.uniform(-config.beacon_jitter, config.beacon_jitter)
    return int(round((config.beacon_period + jitter) * MICROSECONDS))


def _host_order(host):
    return tuple(int(part) for part in host.split("."))

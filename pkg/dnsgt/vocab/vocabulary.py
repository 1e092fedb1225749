import collections
import json
import logging

from dnsgt.definitions import DOMAIN_SPECIALS, FIRST_REAL_DOMAIN_ID, HOST_SPECIALS, PAD_ID, UNK_HOST_ID, UNK_ID
from dnsgt.exceptions import EmptyCorpus, FileNotFoundException, InvalidInputException
from dnsgt.mixins import Hashable


logger = logging.getLogger(__name__)

VOCABULARY_FORMAT_VERSION = 1


class Vocabulary(Hashable):
    """Host and domain vocabularies. Domain ids 0, 1 and 2 are PAD, MASK and UNK; real domains follow in rank order
    (descending training frequency, ties broken lexicographically). Host id 0 is UNK_HOST; hosts follow in
    lexicographic order.

    :param list(str) domains: real domains in rank order
    :param list(str) hosts: known hosts
    :return None:
    """

    _ATTRIBUTES_TO_HASH = ("domains", "hosts")

    def __init__(self, domains, hosts):
        self.domains = list(domains)
        self.hosts = list(hosts)
        super().__init__()

        self.id_to_domain = list(DOMAIN_SPECIALS) + self.domains
        self.domain_to_id = {domain: index for index, domain in enumerate(self.id_to_domain)}
        self.id_to_host = list(HOST_SPECIALS) + self.hosts
        self.host_to_id = {host: index for index, host in enumerate(self.id_to_host)}

        if len(self.domain_to_id) != len(self.id_to_domain) or len(self.host_to_id) != len(self.id_to_host):
            raise InvalidInputException("Vocabulary entries must be unique and distinct from the special tokens.")

    def __repr__(self):
        return f"<Vocabulary({len(self.domains)} domains, {len(self.hosts)} hosts)>"

    def __eq__(self, other):
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return self.domains == other.domains and self.hosts == other.hosts

    @property
    def domain_vocab_size(self):
        """Get the number of domain ids, special tokens included.

        :return int:
        """
        return len(self.id_to_domain)

    @property
    def host_vocab_size(self):
        """Get the number of host ids, the special token included.

        :return int:
        """
        return len(self.id_to_host)

    def domain_id(self, domain):
        """Get the id of a domain, or UNK if it's out of vocabulary.

        :param str domain:
        :return int:
        """
        return self.domain_to_id.get(domain, UNK_ID) if domain not in DOMAIN_SPECIALS else UNK_ID

    def host_id(self, host):
        """Get the id of a host, or UNK_HOST if it's unknown.

        :param str host:
        :return int:
        """
        return self.host_to_id.get(host, UNK_HOST_ID) if host not in HOST_SPECIALS else UNK_HOST_ID

    def decode(self, domain_ids):
        """Convert domain ids back to their names, stopping at the first PAD.

        :param iter(int) domain_ids:
        :return list(str):
        """
        names = []

        for domain_id in domain_ids:
            if domain_id == PAD_ID:
                break
            names.append(self.id_to_domain[domain_id])

        return names

    def to_primitive(self):
        return {
            "version": VOCABULARY_FORMAT_VERSION,
            "specials": {"domain": list(DOMAIN_SPECIALS), "host": list(HOST_SPECIALS)},
            "domains": self.domains,
            "hosts": self.hosts,
        }

    def to_file(self, path):
        """Write the vocabulary to a versioned JSON file.

        :param str path:
        :return None:
        """
        with open(path, "w") as f:
            json.dump(self.to_primitive(), f, indent=4)

    @classmethod
    def from_file(cls, path):
        """Load a vocabulary written by `to_file`.

        :param str path:
        :raise dnsgt.exceptions.FileNotFoundException: if the file doesn't exist
        :raise dnsgt.exceptions.InvalidInputException: if the file has an unsupported version or layout
        :return Vocabulary:
        """
        try:
            with open(path) as f:
                primitive = json.load(f)
        except FileNotFoundError:
            raise FileNotFoundException(f"No vocabulary file at {path!r}.")

        if primitive.get("version") != VOCABULARY_FORMAT_VERSION:
            raise InvalidInputException(f"Unsupported vocabulary version {primitive.get('version')!r} in {path!r}.")

        if primitive.get("specials", {}).get("domain") != list(DOMAIN_SPECIALS):
            raise InvalidInputException(f"The vocabulary in {path!r} uses different special tokens.")

        return cls(domains=primitive["domains"], hosts=primitive["hosts"])


def build_vocab(sequences, max_domains):
    """Build the vocabularies of a training corpus. The `max_domains` most frequent domains get ids; every observed host
    gets an id. The result doesn't depend on the order of the corpus.

    :param iter(dnsgt.sequencing.sequences.RawSequence) sequences:
    :param int max_domains:
    :raise dnsgt.exceptions.EmptyCorpus: if the corpus has no sequences
    :return Vocabulary:
    """
    if max_domains < 1:
        raise InvalidInputException(f"max_domains must be at least 1; received {max_domains}.")

    counts = collections.Counter()
    hosts = set()
    sequence_count = 0

    for sequence in sequences:
        counts.update(sequence.domains)
        hosts.add(sequence.host)
        sequence_count += 1

    if sequence_count == 0:
        raise EmptyCorpus("A vocabulary can't be built from an empty corpus.")

    for special in DOMAIN_SPECIALS:
        counts.pop(special, None)

    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))[:max_domains]
    vocabulary = Vocabulary(domains=[domain for domain, _ in ranked], hosts=sorted(hosts - set(HOST_SPECIALS)))

    logger.info(
        "Built a vocabulary of %d domains (of %d distinct) and %d hosts.",
        len(vocabulary.domains),
        len(counts),
        len(vocabulary.hosts),
    )

    return vocabulary

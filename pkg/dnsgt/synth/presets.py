import copy

from dnsgt.exceptions import BadConfig
from dnsgt.mixins import Serialisable


class SynthConfig(Serialisable):
    """The shape of a synthetic traffic capture.

    Every host runs a series of sessions. A session picks a topic and emits a burst of queries drawn from the topic's
    domains, `intra_gap` seconds apart; sessions are `inter_gap` seconds apart. Topics listed in `ambiguous_topics`
    share `ambiguous_domains` extra domains, drawn with total probability `ambiguous_weight`, whose labels depend on the
    topic that emitted them. Hosts of the bot families alternate normal sessions with beacon bursts to their family's
    domains.

    :param int n_hosts: number of clean hosts
    :param int n_topics:
    :param int domains_per_topic:
    :param int session_length: queries per session
    :param int sessions_per_host:
    :param float intra_gap: seconds between the queries of a session
    :param float inter_gap: seconds between sessions
    :param bool ordered_topics: if `True`, a session emits its topic's domains in order instead of sampling them
    :param iter(int) malicious_topics: indices of the topics whose queries are labelled malicious
    :param iter(int) ambiguous_topics: indices of the topics sharing the ambiguous domains
    :param int ambiguous_domains: number of shared ambiguous domains
    :param float ambiguous_weight: probability that a query of an ambiguous topic hits a shared domain
    :param iter(str) bot_families: names of the bot families
    :param int bot_hosts_per_family:
    :param int beacon_domains: number of domains per bot family
    :param int beacon_length: queries per beacon burst
    :param float beacon_period: seconds between a bot host's bursts
    :param float beacon_jitter: maximum deviation from the beacon period, in seconds
    :param float bot_activity: probability that a bot host's session is a beacon burst
    :param int seed:
    :param float start_time: epoch seconds of the first query
    :return None:
    """

    _SERIALISE_FIELDS = (
        "n_hosts",
        "n_topics",
        "domains_per_topic",
        "session_length",
        "sessions_per_host",
        "intra_gap",
        "inter_gap",
        "ordered_topics",
        "malicious_topics",
        "ambiguous_topics",
        "ambiguous_domains",
        "ambiguous_weight",
        "bot_families",
        "bot_hosts_per_family",
        "beacon_domains",
        "beacon_length",
        "beacon_period",
        "beacon_jitter",
        "bot_activity",
        "seed",
        "start_time",
    )

    def __init__(
        self,
        n_hosts=4,
        n_topics=2,
        domains_per_topic=8,
        session_length=5,
        sessions_per_host=30,
        intra_gap=0.1,
        inter_gap=120.0,
        ordered_topics=False,
        malicious_topics=(1,),
        ambiguous_topics=(),
        ambiguous_domains=0,
        ambiguous_weight=0.0,
        bot_families=(),
        bot_hosts_per_family=0,
        beacon_domains=3,
        beacon_length=3,
        beacon_period=60.0,
        beacon_jitter=2.0,
        bot_activity=0.5,
        seed=0,
        start_time=1600000000.0,
    ):
        self.n_hosts = int(n_hosts)
        self.n_topics = int(n_topics)
        self.domains_per_topic = int(domains_per_topic)
        self.session_length = int(session_length)
        self.sessions_per_host = int(sessions_per_host)
        self.intra_gap = float(intra_gap)
        self.inter_gap = float(inter_gap)
        self.ordered_topics = bool(ordered_topics)
        self.malicious_topics = sorted(set(malicious_topics))
        self.ambiguous_topics = sorted(set(ambiguous_topics))
        self.ambiguous_domains = int(ambiguous_domains)
        self.ambiguous_weight = float(ambiguous_weight)
        self.bot_families = list(bot_families)
        self.bot_hosts_per_family = int(bot_hosts_per_family)
        self.beacon_domains = int(beacon_domains)
        self.beacon_length = int(beacon_length)
        self.beacon_period = float(beacon_period)
        self.beacon_jitter = float(beacon_jitter)
        self.bot_activity = float(bot_activity)
        self.seed = int(seed)
        self.start_time = float(start_time)
        super().__init__()
        self._validate()

    def _validate(self):
        if self.n_hosts < 1 or self.n_topics < 1 or self.domains_per_topic < 1:
            raise BadConfig("A synthetic capture needs at least one host, one topic and one domain per topic.")

        if self.session_length < 1 or self.sessions_per_host < 1:
            raise BadConfig("Hosts need at least one session of at least one query.")

        if self.ordered_topics and self.session_length != self.domains_per_topic:
            raise BadConfig("Ordered topics need `session_length` equal to `domains_per_topic`.")

        if self.intra_gap <= 0 or self.inter_gap <= self.intra_gap:
            raise BadConfig("The gap between sessions must be positive and longer than the gap within a session.")

        for name in ("malicious_topics", "ambiguous_topics"):
            if any(not 0 <= topic < self.n_topics for topic in getattr(self, name)):
                raise BadConfig(f"{name!r} refers to a topic that doesn't exist.")

        if not 0 <= self.ambiguous_weight < 1:
            raise BadConfig(f"`ambiguous_weight` must lie in [0, 1); received {self.ambiguous_weight}.")

        if self.ambiguous_topics and (self.ambiguous_domains < 1 or self.ambiguous_weight == 0):
            raise BadConfig("Ambiguous topics need at least one ambiguous domain and a positive `ambiguous_weight`.")

        if self.bot_families:
            if len(set(self.bot_families)) != len(self.bot_families) or "clean" in self.bot_families:
                raise BadConfig("Bot family names must be unique and differ from 'clean'.")

            if self.bot_hosts_per_family < 1 or self.beacon_domains < 1 or self.beacon_length < 1:
                raise BadConfig("Bot families need hosts, beacon domains and a positive burst length.")

            if not 0 < self.bot_activity <= 1:
                raise BadConfig(f"`bot_activity` must lie in (0, 1]; received {self.bot_activity}.")

            if self.beacon_period - self.beacon_jitter <= self.intra_gap * max(self.beacon_length, self.session_length):
                raise BadConfig("The beacon period must leave a gap between bursts longer than a session.")

        if self.start_time < 0:
            raise BadConfig("The start time must not be negative.")


PRESETS = {
    "tiny": {
        "n_hosts": 4,
        "n_topics": 2,
        "domains_per_topic": 8,
        "session_length": 5,
        "sessions_per_host": 30,
        "malicious_topics": (1,),
    },
    "pairs": {
        "n_hosts": 6,
        "n_topics": 10,
        "domains_per_topic": 2,
        "session_length": 2,
        "sessions_per_host": 60,
        "ordered_topics": True,
        "malicious_topics": (1, 3, 5, 7, 9),
    },
    "ambiguous": {
        "n_hosts": 8,
        "n_topics": 2,
        "domains_per_topic": 3,
        "session_length": 6,
        "sessions_per_host": 40,
        "malicious_topics": (1,),
        "ambiguous_topics": (0, 1),
        "ambiguous_domains": 3,
        "ambiguous_weight": 0.5,
    },
    "botnet": {
        "n_hosts": 8,
        "n_topics": 3,
        "domains_per_topic": 5,
        "session_length": 5,
        "sessions_per_host": 40,
        "malicious_topics": (),
        "bot_families": ("necurs", "virut"),
        "bot_hosts_per_family": 2,
    },
}


def preset_config(name, seed=0, **overrides):
    """Get the synthetic-traffic configuration of a named preset.

    :param str name: one of "tiny", "pairs", "ambiguous" or "botnet"
    :param int seed:
    :param overrides: fields replacing the preset's values
    :raise dnsgt.exceptions.BadConfig: if the preset doesn't exist
    :return SynthConfig:
    """
    if name not in PRESETS:
        raise BadConfig(f"Unknown synthetic preset {name!r}; choose from {sorted(PRESETS)}.")

    fields = copy.deepcopy(PRESETS[name])
    fields.update(overrides)
    fields["seed"] = seed
    return SynthConfig(**fields)

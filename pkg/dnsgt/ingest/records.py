import collections

from dnsgt.definitions import MAX_DOMAIN_BYTES
from dnsgt.exceptions import InvalidInputException


class RawDnsRecord:
    """One DNS message as seen on the wire, reduced to the fields the pipeline needs.

    For responses, `src_host` is the client the response is addressed to, so that requests and responses accumulate
    on the same host key.

    :param float timestamp: seconds since the epoch, rounded to microseconds
    :param str src_host: IPv4 address of the querying host
    :param int dst_port:
    :param int qtype: DNS query-type code
    :param bool is_request: `True` if the QR bit is 0
    :param str domain: lowercase FQDN without a trailing dot
    :param int txn_id: DNS transaction identifier
    :return None:
    """

    __slots__ = ("timestamp", "src_host", "dst_port", "qtype", "is_request", "domain", "txn_id")

    def __init__(self, timestamp, src_host, dst_port, qtype, is_request, domain, txn_id):
        self.timestamp = round(float(timestamp), 6)
        self.src_host = src_host
        self.dst_port = int(dst_port)
        self.qtype = int(qtype)
        self.is_request = bool(is_request)
        self.domain = domain
        self.txn_id = int(txn_id)

        if self.timestamp < 0:
            raise InvalidInputException(f"Record timestamps must not be negative; received {timestamp}.")

        if not 0 <= self.dst_port <= 65535:
            raise InvalidInputException(f"Invalid destination port {dst_port}.")

        if self.is_request and not self.domain:
            raise InvalidInputException("Request records must carry a domain.")

    def __eq__(self, other):
        if not isinstance(other, RawDnsRecord):
            return NotImplemented
        return self.to_primitive() == other.to_primitive()

    def __repr__(self):
        kind = "request" if self.is_request else "response"
        return f"<RawDnsRecord({kind} {self.src_host} {self.domain!r} @ {self.timestamp})>"

    @classmethod
    def from_primitive(cls, primitive):
        """Build a record from a query-log object.

        :param dict primitive:
        :return RawDnsRecord:
        """
        return cls(
            timestamp=primitive["ts"],
            src_host=primitive["host"],
            dst_port=primitive["dst_port"],
            qtype=primitive["qtype"],
            is_request=primitive["is_request"],
            domain=normalise_domain(primitive["domain"]),
            txn_id=primitive["txn_id"],
        )

    def to_primitive(self):
        """Convert the record to a query-log object.

        :return dict:
        """
        return {
            "ts": self.timestamp,
            "host": self.src_host,
            "dst_port": self.dst_port,
            "qtype": self.qtype,
            "is_request": self.is_request,
            "domain": self.domain,
            "txn_id": self.txn_id,
        }


class HostStats:
    """Request and response counts of one host.

    :param str host:
    :param int request_count:
    :param int response_count:
    :return None:
    """

    def __init__(self, host, request_count=0, response_count=0):
        self.host = host
        self.request_count = request_count
        self.response_count = response_count

    def __eq__(self, other):
        if not isinstance(other, HostStats):
            return NotImplemented
        return self.to_primitive() == other.to_primitive()

    def __repr__(self):
        return f"<HostStats({self.host}: {self.request_count} requests, {self.response_count} responses)>"

    @property
    def ratio(self):
        """Get the request-to-response ratio, or `None` if the host received no responses.

        :return float|None:
        """
        if self.response_count == 0:
            return None
        return self.request_count / self.response_count

    def to_primitive(self):
        return {
            "host": self.host,
            "request_count": self.request_count,
            "response_count": self.response_count,
            "ratio": self.ratio,
        }


class QueryStream:
    """The chronologically sorted queries of one host.

    :param str host:
    :param list(tuple(float, str)) queries: `(timestamp, domain)` pairs with non-decreasing timestamps
    :return None:
    """

    def __init__(self, host, queries=None):
        self.host = host
        self.queries = list(queries or [])

        for (previous, _), (current, _) in zip(self.queries, self.queries[1:]):
            if current < previous:
                raise InvalidInputException(f"The queries of host {host!r} are not sorted by timestamp.")

    def __len__(self):
        return len(self.queries)

    def __eq__(self, other):
        if not isinstance(other, QueryStream):
            return NotImplemented
        return self.host == other.host and self.queries == other.queries

    def __repr__(self):
        return f"<QueryStream({self.host}: {len(self.queries)} queries)>"

    @property
    def timestamps(self):
        return [timestamp for timestamp, _ in self.queries]


class ParseReport:
    """Counts of the records a parser produced and of the input it skipped, by reason."""

    def __init__(self):
        self.parsed = 0
        self.errors = collections.Counter()

    @property
    def skipped(self):
        """Get the total number of skipped packets or lines.

        :return int:
        """
        return sum(self.errors.values())

    skipped_count = skipped

    def record_skip(self, reason):
        """Count one skipped packet or line.

        :param str reason:
        :return None:
        """
        self.errors[reason] += 1

    def to_primitive(self):
        return {"parsed": self.parsed, "skipped": self.skipped, "errors": dict(sorted(self.errors.items()))}


def normalise_domain(name):
    """Normalise a DNS name: decode it if necessary, lowercase it and strip the trailing dot.

    :param str|bytes name:
    :raise dnsgt.exceptions.InvalidInputException: if the name is longer than 253 bytes
    :return str:
    """
    if isinstance(name, bytes):
        name = name.decode("utf-8", errors="replace")

    name = name.rstrip(".").lower()

    if len(name.encode("utf-8")) > MAX_DOMAIN_BYTES:
        raise InvalidInputException(f"Domain names are limited to {MAX_DOMAIN_BYTES} bytes.")

    return name


def group_by_host(records):
    """Group records by host, keeping their order within each host.

    :param iter(RawDnsRecord) records:
    :return dict(str, list(RawDnsRecord)):
    """
    groups = collections.defaultdict(list)

    for record in records:
        groups[record.src_host].append(record)

    return dict(groups)

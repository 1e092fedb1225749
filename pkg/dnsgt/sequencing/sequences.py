from dnsgt.exceptions import EmptySequence, InvalidInputException
from dnsgt.utils.jsonl import read_jsonl, write_jsonl


class RawSequence:
    """Temporally contiguous queries of one host, in chronological order.

    :param str host:
    :param list(tuple(float, str)) queries: `(timestamp, domain)` pairs
    :param int|None offset: index of the first query in the host's stream, if known
    :return None:
    """

    def __init__(self, host, queries, offset=None):
        self.host = host
        self.queries = [(float(timestamp), domain) for timestamp, domain in queries]
        self.offset = offset

        if not self.queries:
            raise EmptySequence(f"A sequence of host {host!r} has no queries.")

        for (previous, _), (current, _) in zip(self.queries, self.queries[1:]):
            if current < previous:
                raise InvalidInputException(f"The queries of a sequence of host {host!r} are not in time order.")

    def __len__(self):
        return len(self.queries)

    def __eq__(self, other):
        if not isinstance(other, RawSequence):
            return NotImplemented
        return self.host == other.host and self.queries == other.queries

    def __repr__(self):
        return f"<RawSequence({self.host}: {' '.join(self.domains)})>"

    @property
    def timestamps(self):
        return [timestamp for timestamp, _ in self.queries]

    @property
    def domains(self):
        return [domain for _, domain in self.queries]

    def to_primitive(self):
        return {"host": self.host, "ts": self.timestamps, "domains": self.domains}

    @classmethod
    def from_primitive(cls, primitive):
        """Build a sequence from a sequence-file object.

        :param dict primitive: `{host, ts, domains}`
        :return RawSequence:
        """
        if len(primitive["ts"]) != len(primitive["domains"]):
            raise InvalidInputException("A sequence needs exactly one timestamp per domain.")

        return cls(primitive["host"], list(zip(primitive["ts"], primitive["domains"])))


def write_sequences(sequences, path):
    """Write sequences to a JSONL file, one `{host, ts, domains}` object per line.

    :param iter(RawSequence) sequences:
    :param str path:
    :return int:
    """
    return write_jsonl((sequence.to_primitive() for sequence in sequences), path)


def read_sequences(path):
    """Read sequences written by `write_sequences`.

    :param str path:
    :return list(RawSequence):
    """
    return [RawSequence.from_primitive(primitive) for primitive in read_jsonl(path)]

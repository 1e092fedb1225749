import json
import logging
import os

from dnsgt.definitions import (
    DEFAULT_DEDUP_WINDOW,
    DEFAULT_MIN_REQUESTS,
    DEFAULT_RATIO_HIGH,
    DEFAULT_RATIO_LOW,
    DNS_PORT,
    HOST_STATS_FILENAME,
    QTYPE_A,
)
from dnsgt.exceptions import FileNotFoundException, InvalidInputException
from dnsgt.ingest.records import HostStats, QueryStream, group_by_host
from dnsgt.utils.jsonl import iter_jsonl, write_jsonl


logger = logging.getLogger(__name__)

HOST_STREAM_SUFFIX = ".jsonl"


def filter_hosts(
    records,
    min_requests=DEFAULT_MIN_REQUESTS,
    ratio_low=DEFAULT_RATIO_LOW,
    ratio_high=DEFAULT_RATIO_HIGH,
):
    """Select the hosts that behave like interactive end users. A host is kept if it sent at least `min_requests`
    requests and its request-to-response ratio is within `[ratio_low, ratio_high]`. Hosts that received no responses
    are dropped. The counts cover all records, before any query-type or port filtering.

    :param iter(dnsgt.ingest.records.RawDnsRecord) records:
    :param int min_requests:
    :param float ratio_low:
    :param float ratio_high:
    :raise dnsgt.exceptions.InvalidInputException: if the ratio bounds are reversed or `min_requests` is negative
    :return tuple(set(str), list(dnsgt.ingest.records.HostStats)): the kept hosts and every host's stats, by host
    """
    if ratio_low > ratio_high:
        raise InvalidInputException(f"ratio_low ({ratio_low}) must not exceed ratio_high ({ratio_high}).")

    if min_requests < 0:
        raise InvalidInputException(f"min_requests must not be negative; received {min_requests}.")

    stats = {}

    for record in records:
        host_stats = stats.setdefault(record.src_host, HostStats(record.src_host))

        if record.is_request:
            host_stats.request_count += 1
        else:
            host_stats.response_count += 1

    kept = set()

    for host, host_stats in stats.items():
        ratio = host_stats.ratio

        if ratio is None or host_stats.request_count < min_requests:
            continue

        if ratio_low <= ratio <= ratio_high:
            kept.add(host)

    logger.info("Kept %d of %d hosts.", len(kept), len(stats))
    return kept, [stats[host] for host in sorted(stats)]


def clean_pipeline(records, kept_hosts, dedup_window=DEFAULT_DEDUP_WINDOW):
    """Keep the A-record requests to port 53 sent by the kept hosts, drop retransmissions and group the other queries
    into one chronological stream per host. A retransmission is a request with the same (host, transaction id, domain)
    as one seen at most `dedup_window` seconds earlier.

    :param iter(dnsgt.ingest.records.RawDnsRecord) records:
    :param set(str) kept_hosts:
    :param float dedup_window: seconds
    :return dict(str, dnsgt.ingest.records.QueryStream):
    """
    candidates = (
        record
        for record in records
        if record.is_request
        and record.dst_port == DNS_PORT
        and record.qtype == QTYPE_A
        and record.src_host in kept_hosts
    )

    streams = {}
    retransmissions = 0

    for host, host_records in sorted(group_by_host(candidates).items()):
        host_records.sort(key=lambda record: record.timestamp)
        last_seen = {}
        queries = []

        for record in host_records:
            key = (record.txn_id, record.domain)
            previous = last_seen.get(key)
            last_seen[key] = record.timestamp

            if previous is not None and record.timestamp - previous <= dedup_window:
                retransmissions += 1
                continue

            queries.append((record.timestamp, record.domain))

        streams[host] = QueryStream(host, queries)

    logger.info("Built %d query streams (dropped %d retransmissions).", len(streams), retransmissions)
    return streams


def write_host_streams(streams, stats, kept_hosts, directory):
    """Write one JSONL file per host stream plus a stats report to a directory.

    :param dict(str, dnsgt.ingest.records.QueryStream) streams:
    :param list(dnsgt.ingest.records.HostStats) stats:
    :param set(str) kept_hosts:
    :param str directory:
    :return list(str): the paths of the stream files
    """
    os.makedirs(directory, exist_ok=True)
    paths = []

    for host, stream in sorted(streams.items()):
        path = os.path.join(directory, host + HOST_STREAM_SUFFIX)
        write_jsonl(({"host": host, "ts": timestamp, "domain": domain} for timestamp, domain in stream.queries), path)
        paths.append(path)

    report = {
        "hosts": [dict(host_stats.to_primitive(), kept=host_stats.host in kept_hosts) for host_stats in stats],
        "kept": len(kept_hosts),
        "total": len(stats),
    }

    with open(os.path.join(directory, HOST_STATS_FILENAME), "w") as f:
        json.dump(report, f, indent=4, sort_keys=True)

    return paths


def read_host_streams(directory):
    """Read the host streams written by `write_host_streams`.

    :param str directory:
    :raise dnsgt.exceptions.FileNotFoundException: if the directory doesn't exist
    :return dict(str, dnsgt.ingest.records.QueryStream):
    """
    if not os.path.isdir(directory):
        raise FileNotFoundException(f"No stream directory at {directory!r}.")

    streams = {}

    for name in sorted(os.listdir(directory)):
        if not name.endswith(HOST_STREAM_SUFFIX):
            continue

        queries = []
        host = name[: -len(HOST_STREAM_SUFFIX)]

        for _, line in iter_jsonl(os.path.join(directory, name)):
            entry = json.loads(line)
            host = entry["host"]
            queries.append((float(entry["ts"]), entry["domain"]))

        streams[host] = QueryStream(host, queries)

    return streams

from .cleaning import clean_pipeline, filter_hosts, read_host_streams, write_host_streams
from .jsonl import parse_jsonl, write_jsonl
from .pcap import parse_pcap
from .records import HostStats, ParseReport, QueryStream, RawDnsRecord, group_by_host


__all__ = (
    "HostStats",
    "ParseReport",
    "QueryStream",
    "RawDnsRecord",
    "clean_pipeline",
    "filter_hosts",
    "group_by_host",
    "parse_jsonl",
    "parse_pcap",
    "read_host_streams",
    "write_host_streams",
    "write_jsonl",
)

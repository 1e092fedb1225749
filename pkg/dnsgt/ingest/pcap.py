import logging
import os
import socket
import struct

import dpkt

from dnsgt.exceptions import (
    BadMagic,
    FileNotFoundException,
    InvalidInputException,
    TruncatedHeader,
    UnsupportedLinkType,
)
from dnsgt.ingest.records import ParseReport, RawDnsRecord, normalise_domain


logger = logging.getLogger(__name__)

PCAP_GLOBAL_HEADER_LENGTH = 24
PCAP_MAGICS = {b"\xa1\xb2\xc3\xd4", b"\xd4\xc3\xb2\xa1"}

# Errors `dpkt` raises while decoding arbitrary bytes.
DECODING_ERRORS = (dpkt.UnpackError, dpkt.NeedData, ValueError, IndexError, KeyError, struct.error, UnicodeError)


def parse_pcap(path, report=None):
    """Parse a classic pcap file of Ethernet frames into DNS records. The global header is checked immediately; the
    packets are then decoded lazily. Packets that aren't DNS over IPv4/UDP, or that can't be decoded, are counted in the
    report and skipped.

    :param str path:
    :param ParseReport|None report: a report to fill with counts of parsed and skipped packets
    :raise dnsgt.exceptions.FileNotFoundException: if the file doesn't exist
    :raise dnsgt.exceptions.TruncatedHeader: if the file is shorter than the pcap global header
    :raise dnsgt.exceptions.BadMagic: if the file isn't a classic pcap file
    :raise dnsgt.exceptions.UnsupportedLinkType: if the capture's link type isn't Ethernet
    :return iter(RawDnsRecord):
    """
    if not os.path.isfile(path):
        raise FileNotFoundException(f"No such file: {path!r}.")

    with open(path, "rb") as f:
        header = f.read(PCAP_GLOBAL_HEADER_LENGTH)

    if len(header) < PCAP_GLOBAL_HEADER_LENGTH:
        raise TruncatedHeader(f"{path!r} is shorter than a pcap global header ({len(header)} bytes).")

    if header[:4] not in PCAP_MAGICS:
        raise BadMagic(f"{path!r} does not start with a pcap magic number (found {header[:4].hex()}).")

    byte_order = ">" if header[:4] == b"\xa1\xb2\xc3\xd4" else "<"
    link_type = struct.unpack(byte_order + "I", header[20:24])[0]

    if link_type != dpkt.pcap.DLT_EN10MB:
        raise UnsupportedLinkType(f"{path!r} has link type {link_type}; only Ethernet captures are supported.")

    return _iter_records(path, report if report is not None else ParseReport())


def _iter_records(path, report):
    """Decode the packets of a pcap file whose global header has been checked.

    :param str path:
    :param ParseReport report:
    :return iter(RawDnsRecord):
    """
    with open(path, "rb") as f:
        packets = iter(dpkt.pcap.Reader(f))

        while True:
            try:
                timestamp, buffer = next(packets)
            except StopIteration:
                break
            except DECODING_ERRORS:
                report.record_skip("truncated")
                break

            record, reason = decode_packet(timestamp, buffer)

            if record is None:
                report.record_skip(reason)
                continue

            report.parsed += 1
            yield record

    logger.debug("Parsed %d DNS records from %r (skipped %d packets).", report.parsed, path, report.skipped)


def decode_packet(timestamp, buffer):
    """Decode one Ethernet frame into a DNS record.

    :param float timestamp:
    :param bytes buffer:
    :return tuple(RawDnsRecord|None, str|None): the record, or `None` and the reason it was skipped
    """
    try:
        ethernet = dpkt.ethernet.Ethernet(buffer)
    except DECODING_ERRORS:
        return None, "malformed"

    ip = ethernet.data

    if not isinstance(ip, dpkt.ip.IP):
        return None, "non_ipv4"

    udp = ip.data

    if not isinstance(udp, dpkt.udp.UDP):
        return None, "non_udp"

    try:
        dns = dpkt.dns.DNS(bytes(udp.data))
        question = dns.qd[0] if dns.qd else None
    except DECODING_ERRORS:
        return None, "not_dns"

    if question is None:
        return None, "not_dns"

    is_request = dns.qr == dpkt.dns.DNS_Q
    client = ip.src if is_request else ip.dst

    try:
        return (
            RawDnsRecord(
                timestamp=timestamp,
                src_host=socket.inet_ntoa(client),
                dst_port=udp.dport,
                qtype=question.type,
                is_request=is_request,
                domain=normalise_domain(question.name),
                txn_id=dns.id,
            ),
            None,
        )
    except (InvalidInputException, OSError, TypeError, ValueError):
        return None, "bad_name"

from dnsgt.exceptions import BadMagic, FileNotFoundException, TruncatedHeader, UnsupportedLinkType
from dnsgt.ingest import ParseReport, parse_jsonl, parse_pcap, write_jsonl
from dnsgt.ingest.pcap import decode_packet
from tests.base import BaseTestCase, dns_request_frame, dns_response_frame, tcp_frame, udp_frame


class TestParsePcap(BaseTestCase):
    def test_single_request(self):
        """Test that a single A-record request to port 53 is parsed into one request record."""
        path = self.write_pcap([(1.5, dns_request_frame("10.0.0.1", "example.com", txn_id=7))])
        report = ParseReport()
        records = list(parse_pcap(path, report=report))

        self.assertEqual(len(records), 1)
        self.assertTrue(records[0].is_request)
        self.assertEqual(records[0].qtype, 1)
        self.assertEqual(records[0].domain, "example.com")
        self.assertEqual(records[0].src_host, "10.0.0.1")
        self.assertEqual(records[0].dst_port, 53)
        self.assertEqual(records[0].txn_id, 7)
        self.assertEqual(records[0].timestamp, 1.5)
        self.assertEqual(report.parsed, 1)
        self.assertEqual(report.skipped, 0)

    def test_empty_capture(self):
        """Test that a capture holding only the global header gives no records and no skipped packets."""
        report = ParseReport()
        self.assertEqual(list(parse_pcap(self.write_pcap([]), report=report)), [])
        self.assertEqual(report.skipped, 0)

    def test_tcp_packet_is_skipped_and_counted(self):
        """Test that a TCP packet is skipped and counted while the DNS/UDP packet next to it is parsed."""
        path = self.write_pcap(
            [
                (1.0, tcp_frame("10.0.0.1", "10.255.255.1", 40000, 443, b"hello")),
                (2.0, dns_request_frame("10.0.0.1", "example.com")),
            ]
        )
        report = ParseReport()
        records = list(parse_pcap(path, report=report))

        self.assertEqual(len(records), 1)
        self.assertEqual(report.skipped, 1)
        self.assertEqual(report.errors["non_udp"], 1)

    def test_big_endian_capture(self):
        """Test that captures written in big-endian byte order are read too."""
        path = self.write_pcap([(3.25, dns_request_frame("10.0.0.3", "example.org"))], little_endian=False)
        records = list(parse_pcap(path))
        self.assertEqual([record.domain for record in records], ["example.org"])
        self.assertEqual(records[0].timestamp, 3.25)

    def test_response_is_keyed_on_client(self):
        """Test that a response with a compressed answer name is attributed to the client it is addressed to."""
        record, reason = decode_packet(1.0, dns_response_frame("10.0.0.9", "Example.COM", txn_id=3))

        self.assertIsNone(reason)
        self.assertFalse(record.is_request)
        self.assertEqual(record.src_host, "10.0.0.9")
        self.assertEqual(record.domain, "example.com")
        self.assertEqual(record.dst_port, 50000)

    def test_udp_payload_that_is_not_dns_is_skipped(self):
        """Test that a UDP packet whose payload isn't a DNS message is skipped as "not_dns"."""
        record, reason = decode_packet(1.0, udp_frame("10.0.0.1", "10.0.0.2", 1234, 53, b"\x01\x02"))
        self.assertIsNone(record)
        self.assertEqual(reason, "not_dns")

    def test_garbage_frame_is_skipped(self):
        """Test that a frame too short to be Ethernet is skipped rather than raising."""
        path = self.write_pcap([(1.0, b"\x00\x01\x02"), (2.0, dns_request_frame("10.0.0.1", "a.com"))])
        report = ParseReport()
        self.assertEqual(len(list(parse_pcap(path, report=report))), 1)
        self.assertEqual(report.skipped, 1)

    def test_missing_file(self):
        """Test that parsing a missing file raises a file-not-found error."""
        with self.assertRaises(FileNotFoundException):
            parse_pcap(self.path("missing.pcap"))

    def test_bad_magic(self):
        """Test that a file that isn't a classic pcap capture is rejected."""
        path = self.path("not.pcap")

        with open(path, "wb") as f:
            f.write(b"\x0a\x0d\x0d\x0a" + b"\x00" * 40)

        with self.assertRaises(BadMagic):
            parse_pcap(path)

    def test_truncated_header(self):
        """Test that a file shorter than the global header is rejected."""
        path = self.path("short.pcap")

        with open(path, "wb") as f:
            f.write(b"\xd4\xc3\xb2\xa1\x02\x00")

        with self.assertRaises(TruncatedHeader):
            parse_pcap(path)

    def test_short_file_with_foreign_magic_is_truncated(self):
        """Test that a file shorter than the global header is reported as truncated whatever its first bytes are."""
        for length in (4, 12, 23):
            path = self.path(f"short-{length}.pcap")

            with open(path, "wb") as f:
                f.write(b"\x0a\x0d\x0d\x0a" + b"\x00" * (length - 4))

            with self.subTest(length=length):
                with self.assertRaises(TruncatedHeader):
                    parse_pcap(path)

    def test_non_ethernet_link_type(self):
        """Test that captures with a link type other than Ethernet are rejected."""
        with self.assertRaises(UnsupportedLinkType):
            parse_pcap(self.write_pcap([], link_type=101))

    def test_round_trip_through_query_log(self):
        """Test that writing the records of the handcrafted capture to a query log and parsing it back is lossless."""
        records = list(parse_pcap(self.write_pcap(self.handcrafted_packets())))
        self.assertEqual(len(records), 10)

        log_path = self.path("queries.jsonl")
        write_jsonl(records, log_path)
        self.assertEqual(list(parse_jsonl(log_path)), records)

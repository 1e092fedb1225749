import json
import logging
import os

from jsonschema import Draft7Validator

from dnsgt.exceptions import InvalidInputException
from dnsgt.ingest.records import ParseReport, RawDnsRecord
from dnsgt.utils.jsonl import iter_jsonl, write_jsonl as write_jsonl_objects


logger = logging.getLogger(__name__)

QUERY_RECORD_SCHEMA_PATH = os.path.join(os.path.dirname(os.path.dirname(__file__)), "schema", "query_record.json")

with open(QUERY_RECORD_SCHEMA_PATH) as f:
    QUERY_RECORD_VALIDATOR = Draft7Validator(json.load(f))


def parse_jsonl(path, report=None):
    """Parse a canonical JSONL query log. Lines that aren't valid UTF-8 or fail schema validation are counted in the
    report and skipped.

    :param str path:
    :param ParseReport|None report:
    :raise dnsgt.exceptions.FileNotFoundException: if the file doesn't exist
    :return iter(RawDnsRecord):
    """
    report = report if report is not None else ParseReport()
    lines = iter_jsonl(path, skip_undecodable=True)

    # Check the file exists before any record is requested.
    first_line = next(lines, None)

    def iter_records():
        if first_line is None:
            return

        for line_number, line in _chain(first_line, lines):
            record = _parse_line(line)

            if record is None:
                logger.debug("Line %d of %r failed validation.", line_number, path)
                report.record_skip("schema")
                continue

            report.parsed += 1
            yield record

    return iter_records()


def write_jsonl(records, path):
    """Write records to a canonical JSONL query log.

    :param iter(RawDnsRecord) records:
    :param str path:
    :return int: the number of records written
    """
    return write_jsonl_objects((record.to_primitive() for record in records), path)


def _parse_line(line):
    if line is None:
        return None

    try:
        primitive = json.loads(line)
    except json.JSONDecodeError:
        return None

    if not QUERY_RECORD_VALIDATOR.is_valid(primitive):
        return None

    try:
        return RawDnsRecord.from_primitive(primitive)
    except InvalidInputException:
        return None


def _chain(first, rest):
    yield first
    yield from rest

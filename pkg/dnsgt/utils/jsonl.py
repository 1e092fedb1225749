import json
import os

from dnsgt.exceptions import FileNotFoundException, InvalidInputException
from dnsgt.utils.encoders import DnsGtJSONEncoder


def iter_jsonl(path, skip_undecodable=False):
    """Iterate over the raw lines of a JSONL file as `(line_number, text)` pairs, skipping blank lines. Each line is
    decoded as UTF-8 on its own.

    :param str path:
    :param bool skip_undecodable: if `True`, lines that aren't valid UTF-8 are yielded with `None` as their text
    :raise dnsgt.exceptions.FileNotFoundException: if the file doesn't exist
    :raise dnsgt.exceptions.InvalidInputException: if a line isn't valid UTF-8 and `skip_undecodable` is `False`
    :return iter(tuple(int, str|None)):
    """
    if not os.path.isfile(path):
        raise FileNotFoundException(f"No such file: {path!r}.")

    with open(path, "rb") as f:
        for line_number, raw_line in enumerate(f, start=1):
            raw_line = raw_line.strip()

            if not raw_line:
                continue

            try:
                line = raw_line.decode("utf-8")
            except UnicodeDecodeError:
                if not skip_undecodable:
                    raise InvalidInputException(f"Line {line_number} of {path!r} is not valid UTF-8.")
                line = None

            yield line_number, line


def read_jsonl(path):
    """Read every object of a JSONL file.

    :param str path:
    :return list(dict):
    """
    return [json.loads(line) for _, line in iter_jsonl(path)]


def write_jsonl(objects, path):
    """Write objects to a JSONL file, one compact object per line with sorted keys and LF line endings.

    :param iter(dict) objects:
    :param str path:
    :return int: the number of lines written
    """
    count = 0

    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for obj in objects:
            f.write(json.dumps(obj, cls=DnsGtJSONEncoder, sort_keys=True, separators=(",", ":")))
            f.write("\n")
            count += 1

    return count

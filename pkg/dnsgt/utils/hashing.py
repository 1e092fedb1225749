import base64

from google_crc32c import Checksum


CHUNK_SIZE = 1024 * 1024


def calculate_file_hash(path):
    """Calculate the base64-encoded CRC32C checksum of a file's contents, reading it in chunks.

    :param str path:
    :return str:
    """
    checksum = Checksum()

    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(CHUNK_SIZE), b""):
            checksum.update(chunk)

    return base64.b64encode(checksum.digest()).decode("utf-8")

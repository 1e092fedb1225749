import struct

import numpy as np

from dnsgt.exceptions import FileNotFoundException, InvalidInputException
from dnsgt.utils.jsonl import read_jsonl, write_jsonl


def write_embeddings_jsonl(embeddings, path):
    """Write domain embeddings as JSONL, one `{domain, vector}` object per line in the given order.

    :param dict(str, numpy.ndarray) embeddings:
    :param str path:
    :return int: the number of records written
    """
    records = (
        {"domain": domain, "vector": [float(value) for value in vector]} for domain, vector in embeddings.items()
    )
    return write_jsonl(records, path)


def write_embeddings_binary(embeddings, path):
    """Write domain embeddings in the flat binary format: a `<u4` count and a `<u4` dimension, the `<f4` rows in order,
    then the domain names separated by newlines.

    :param dict(str, numpy.ndarray) embeddings:
    :param str path:
    :return int: the number of records written
    """
    domains = list(embeddings)
    dimension = len(next(iter(embeddings.values()))) if embeddings else 0
    matrix = np.array([embeddings[domain] for domain in domains], dtype="<f4").reshape(len(domains), dimension)

    with open(path, "wb") as f:
        f.write(struct.pack("<II", len(domains), dimension))
        f.write(matrix.tobytes())
        f.write("\n".join(domains).encode())

    return len(domains)


def read_embeddings_binary(path):
    """Read embeddings written by `write_embeddings_binary`.

    :param str path:
    :return dict(str, numpy.ndarray):
    """
    try:
        with open(path, "rb") as f:
            data = f.read()
    except FileNotFoundError:
        raise FileNotFoundException(f"No embeddings file at {path!r}.")

    if len(data) < 8:
        raise InvalidInputException(f"{path!r} is too short to be an embeddings file.")

    count, dimension = struct.unpack("<II", data[:8])
    end = 8 + 4 * count * dimension
    matrix = np.frombuffer(data[8:end], dtype="<f4").reshape(count, dimension)
    domains = data[end:].decode().split("\n") if count else []

    if len(domains) != count:
        raise InvalidInputException(f"{path!r} lists {len(domains)} domains for {count} vectors.")

    return {domain: matrix[index].astype(np.float64) for index, domain in enumerate(domains)}


def read_embeddings_jsonl(path):
    """Read embeddings written by `write_embeddings_jsonl`.

    :param str path:
    :return dict(str, numpy.ndarray):
    """
    return {record["domain"]: np.array(record["vector"]) for record in read_jsonl(path)}

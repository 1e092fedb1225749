"""Versioned binary checkpoints. The layout is:

    magic            5 bytes, b"DNSGT"
    format version   <u2
    metadata length  <u4, followed by the metadata as UTF-8 JSON (model configuration, vocabulary hash, task head,
                     class names, fold information, variant)
    array count      <u4, followed by one record per array:
                        name length <u2, name (UTF-8), rank <u1, shape (<u4 each), row-major little-endian f32 payload
"""
import json
import logging
import os
import struct

import numpy as np

from dnsgt.configuration import ModelConfig
from dnsgt.exceptions import FileNotFoundException, InvalidCheckpoint
from dnsgt.utils.encoders import DnsGtJSONEncoder


logger = logging.getLogger(__name__)

MAGIC = b"DNSGT"
FORMAT_VERSION = 1


def build_model(config, task="mlm", n_classes=None, class_names=None, seed=0):
    """Create the model matching a configuration's architecture.

    :param dnsgt.configuration.ModelConfig config:
    :param str task:
    :param int|None n_classes:
    :param list(str)|None class_names:
    :param int seed:
    :return dnsgt.model.base.SequenceModel:
    """
    if config.architecture == "dnsgt":
        from dnsgt.model.dns_gt import DnsGtModel

        return DnsGtModel(config, task=task, n_classes=n_classes, class_names=class_names, seed=seed)

    from dnsgt.baselines.word2vec import W2VModel

    return W2VModel(config, task=task, n_classes=n_classes, class_names=class_names, seed=seed)


def save_checkpoint(model, path, vocab_hash=None, fold=None, extra=None):
    """Write a model to a checkpoint file. Parameters are stored in single precision.

    :param dnsgt.model.base.SequenceModel model:
    :param str path:
    :param str|None vocab_hash: hash of the vocabulary the model was trained with
    :param dict|None fold: fold information of a fine-tuned model
    :param dict|None extra: any further metadata
    :return None:
    """
    metadata = {
        "config": model.config.to_primitive(),
        "vocab_hash": vocab_hash,
        "task": model.task,
        "n_classes": model.n_classes,
        "class_names": model.class_names,
        "fold": fold,
        "variant": model.config.architecture,
        "extra": extra or {},
    }

    encoded_metadata = json.dumps(metadata, cls=DnsGtJSONEncoder, sort_keys=True).encode()
    arrays = model.state_arrays()

    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)

    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<HI", FORMAT_VERSION, len(encoded_metadata)))
        f.write(encoded_metadata)
        f.write(struct.pack("<I", len(arrays)))

        for name, array in arrays.items():
            encoded_name = name.encode()
            f.write(struct.pack("<HB", len(encoded_name), array.ndim))
            f.write(encoded_name)
            f.write(struct.pack(f"<{array.ndim}I", *array.shape))
            f.write(np.ascontiguousarray(array, dtype="<f4").tobytes())

    logger.debug("Saved checkpoint of %r to %r.", model, path)


class _Reader:
    def __init__(self, data, path):
        self.data = data
        self.path = path
        self.offset = 0

    def read(self, size):
        if self.offset + size > len(self.data):
            raise InvalidCheckpoint(f"The checkpoint {self.path!r} is truncated.")

        chunk = self.data[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, format_):
        return struct.unpack(format_, self.read(struct.calcsize(format_)))


def read_checkpoint(path):
    """Read the metadata and arrays of a checkpoint file.

    :param str path:
    :raise dnsgt.exceptions.FileNotFoundException: if the file doesn't exist
    :raise dnsgt.exceptions.InvalidCheckpoint: if the file isn't a readable checkpoint
    :return (dict, collections.OrderedDict): the metadata and the arrays (in double precision) by name
    """
    try:
        with open(path, "rb") as f:
            reader = _Reader(f.read(), path)
    except FileNotFoundError:
        raise FileNotFoundException(f"No checkpoint at {path!r}.")

    if reader.read(len(MAGIC)) != MAGIC:
        raise InvalidCheckpoint(f"{path!r} is not a checkpoint file.")

    version, metadata_length = reader.unpack("<HI")

    if version != FORMAT_VERSION:
        raise InvalidCheckpoint(f"Unsupported checkpoint format version {version} in {path!r}.")

    try:
        metadata = json.loads(reader.read(metadata_length).decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as error:
        raise InvalidCheckpoint(f"The metadata of {path!r} can't be decoded: {error}.")

    (count,) = reader.unpack("<I")
    arrays = {}

    for _ in range(count):
        name_length, rank = reader.unpack("<HB")
        name = reader.read(name_length).decode()
        shape = reader.unpack(f"<{rank}I")
        size = int(np.prod(shape)) if rank else 1
        arrays[name] = np.frombuffer(reader.read(4 * size), dtype="<f4").astype(np.float64).reshape(shape)

    return metadata, arrays


def load_checkpoint(path):
    """Rebuild a model from a checkpoint file, validating every array against the stored configuration.

    :param str path:
    :return (dnsgt.model.base.SequenceModel, dict): the model (in eval mode) and the checkpoint metadata
    """
    metadata, arrays = read_checkpoint(path)

    try:
        config = ModelConfig.deserialise(metadata["config"])
    except (KeyError, TypeError) as error:
        raise InvalidCheckpoint(f"The configuration stored in {path!r} is invalid: {error}.")

    model = build_model(
        config,
        task=metadata.get("task", "mlm"),
        n_classes=metadata.get("n_classes"),
        class_names=metadata.get("class_names"),
    )

    model.load_state_arrays(arrays)
    model.eval()
    logger.info("Loaded %r from %r.", model, path)
    return model, metadata

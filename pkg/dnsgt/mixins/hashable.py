import base64
import datetime

import numpy as np
from google_crc32c import Checksum


EMPTY_STRING_HASH_VALUE = "AAAAAA=="

_HASH_PREPARATION_FUNCTIONS = {
    str: lambda attribute: attribute.encode(),
    bytes: lambda attribute: attribute,
    int: lambda attribute: str(attribute).encode(),
    float: lambda attribute: repr(attribute).encode(),
    bool: lambda attribute: str(attribute).encode(),
    type(None): lambda attribute: b"None",
    datetime.datetime: lambda attribute: attribute.isoformat().encode(),
}


class Hashable:
    """A mixin giving instances a CRC32C hash (base64-encoded) of the attributes named in `_ATTRIBUTES_TO_HASH`.
    Sequences are hashed in order because vocabulary ids are positional; dictionaries are hashed by sorted key.
    """

    _ATTRIBUTES_TO_HASH = None
    _HASH_TYPE = "CRC32C"

    def __init__(self, *args, immutable_hash_value=None, **kwargs):
        self._immutable_hash_value = immutable_hash_value
        self._ATTRIBUTES_TO_HASH = self._ATTRIBUTES_TO_HASH or []
        super().__init__(*args, **kwargs)

    @classmethod
    def hash_non_class_object(cls, object_):
        """Use the Hashable class to hash an arbitrary object that isn't an attribute of a class instance.

        :param any object_:
        :return str:
        """

        class Holder(cls):
            _ATTRIBUTES_TO_HASH = ("object_",)

        holder = Holder()
        holder.object_ = object_
        return holder.hash_value

    @property
    def hash_value(self):
        """Get the hash of the instance.

        :return str:
        """
        if self._immutable_hash_value is None:
            return self._calculate_hash()

        return self._immutable_hash_value

    @hash_value.setter
    def hash_value(self, value):
        """Set the hash of the instance to a custom value.

        :param str value:
        :return None:
        """
        if self._immutable_hash_value is not None:
            raise ValueError(f"The hash of {self!r} is immutable - hash_value cannot be set.")

        self._immutable_hash_value = value

    def reset_hash(self):
        """Reset the hash value to the calculated hash (rather than whatever value has been set).

        :return None:
        """
        self._immutable_hash_value = None

    def _calculate_hash(self, hash_=None):
        """Calculate the hash of the attributes in `self._ATTRIBUTES_TO_HASH`, in the order they are named. If `hash_`
        is given, its in-progress hash is updated rather than starting from scratch.

        :param google_crc32c.Checksum|None hash_:
        :return str:
        """
        hash_ = hash_ or Checksum()

        for attribute_name in self._ATTRIBUTES_TO_HASH:
            hash_.update(self._prepare_for_hashing(attribute_name, getattr(self, attribute_name)))

        return base64.b64encode(hash_.digest()).decode("utf-8")

    def _prepare_for_hashing(self, attribute_name, attribute):
        """Convert an attribute to bytes for hashing.

        :param str attribute_name:
        :param any attribute:
        :raise TypeError: if the attribute has no byte representation
        :return bytes:
        """
        try:
            return _HASH_PREPARATION_FUNCTIONS[type(attribute)](attribute)
        except KeyError:
            pass

        if hasattr(attribute, "hash_value"):
            return attribute.hash_value.encode()

        if isinstance(attribute, np.ndarray):
            return np.ascontiguousarray(attribute).tobytes()

        if isinstance(attribute, dict):
            return b"\x1e".join(
                b"\x1f".join(
                    (self._prepare_for_hashing(attribute_name, key), self._prepare_for_hashing(attribute_name, value))
                )
                for key, value in sorted(attribute.items())
            )

        if isinstance(attribute, (list, tuple)):
            return b"\x1e".join(self._prepare_for_hashing(attribute_name, item) for item in attribute)

        if isinstance(attribute, (set, frozenset)):
            return self._prepare_for_hashing(attribute_name, sorted(attribute))

        raise TypeError(f"Attribute <{attribute_name!r}: {attribute!r}> cannot be hashed.")

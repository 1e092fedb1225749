import json

import dateutil.parser


_OBJECT_DECODERS = {
    "set": lambda obj: set(obj["items"]),
    "datetime": lambda obj: dateutil.parser.parse(obj["value"]),
}


class DnsGtJSONDecoder(json.JSONDecoder):
    """A JSON decoder restoring the sets and datetimes written by `DnsGtJSONEncoder`. Objects with an unknown `_type`
    are returned as they are.
    """

    def __init__(self, *args, object_hook=None, **kwargs):
        super().__init__(*args, object_hook=object_hook or self.object_hook, **kwargs)

    def object_hook(self, obj):
        """Restore a tagged object to the python type it was encoded from.

        :param dict obj:
        :return any:
        """
        type_name = obj.get("_type")
        decoder = _OBJECT_DECODERS.get(type_name) if isinstance(type_name, str) else None

        if decoder is None:
            return obj

        return decoder(obj)

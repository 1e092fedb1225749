import datetime

import numpy as np
from twined.utils import TwinedEncoder


class DnsGtJSONEncoder(TwinedEncoder):
    """A JSON encoder which allows objects having a `to_primitive` method to control their own conversion to python
    primitives, and which converts numpy values to their python equivalents.
    """

    def default(self, obj):
        """Transform the object into a JSON-compatible python primitive.

        :param any obj: any python object
        :return any: a JSON-compatible python primitive
        """
        if hasattr(obj, "to_primitive"):
            return obj.to_primitive()

        if isinstance(obj, np.ndarray):
            return obj.tolist()

        if isinstance(obj, np.integer):
            return int(obj)

        if isinstance(obj, np.floating):
            return float(obj)

        if isinstance(obj, np.bool_):
            return bool(obj)

        if isinstance(obj, (set, frozenset)):
            return {"_type": "set", "items": sorted(obj)}

        if isinstance(obj, datetime.datetime):
            return {"_type": "datetime", "value": obj.isoformat()}

        # Otherwise let the base class default method raise the TypeError.
        return TwinedEncoder.default(self, obj)

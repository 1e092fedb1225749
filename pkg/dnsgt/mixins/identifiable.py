import uuid

from dnsgt.exceptions import InvalidInputException
from dnsgt.utils import gen_uuid


class Identifiable:
    """Mixin to allow instantiation of a class with a given uuid, or generate one on instantiation. The id cannot be
    changed after instantiation.

    ```
    RunManifest(subcommand="pretrain").id  # Some generated uuid
    RunManifest(subcommand="pretrain", id="not_a_uuid")  # Raises exception
    ```
    """

    def __init__(self, *args, id=None, **kwargs):
        super().__init__(*args, **kwargs)
        self._set_id(id)

    def __repr__(self):
        return f"<{type(self).__name__}({self.id})>"

    @property
    def id(self):
        """Get the ID of the identifiable instance.

        :return str:
        """
        return self._id

    def _set_id(self, value):
        """Set the ID to the given value.

        :param str|uuid.UUID|None value:
        :return None:
        """
        if isinstance(value, uuid.UUID):
            value = str(value)

        elif isinstance(value, str):
            try:
                value = str(uuid.UUID(value))
            except ValueError:
                raise InvalidInputException(f"Value of id {value!r} is not a valid uuid string or instance of UUID.")

        elif value is not None:
            raise InvalidInputException(f"Value of id {value!r} must be a uuid string, an instance of UUID or None.")

        self._id = value or gen_uuid()

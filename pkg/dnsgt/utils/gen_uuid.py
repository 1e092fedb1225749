import uuid


def gen_uuid():
    """Generate a unique identifier for an object.

    :return str:
    """
    return str(uuid.uuid4())

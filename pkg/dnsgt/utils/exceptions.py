import json

from dnsgt.definitions import EXIT_USAGE


def convert_exception_to_primitives(exception, exit_code=None):
    """Convert an exception into a dictionary of its type, message and process exit code as JSON-serialisable
    primitives.

    :param BaseException exception:
    :param int|None exit_code: overrides the exit code carried by the exception class
    :return dict: a dictionary with "error", "message" and "exit_code" keys
    """
    if exit_code is None:
        exit_code = getattr(exception, "exit_code", EXIT_USAGE)

    message = exception.args[0] if len(exception.args) == 1 else str(exception)

    return {"error": type(exception).__name__, "message": str(message), "exit_code": int(exit_code)}


def format_error_line(exception, exit_code=None):
    """Format an exception as a single machine-parseable JSON line.

    :param BaseException exception:
    :param int|None exit_code:
    :return str:
    """
    return json.dumps(convert_exception_to_primitives(exception, exit_code=exit_code), sort_keys=True)

import json

from dnsgt import exceptions
from dnsgt.utils.exceptions import convert_exception_to_primitives, format_error_line
from tests.base import BaseTestCase


class TestErrorLines(BaseTestCase):
    def test_exit_code_comes_from_exception_class(self):
        """Test that the exit code of a package exception is taken from its class."""
        primitives = convert_exception_to_primitives(exceptions.InvalidInputException("Bad value."))
        self.assertEqual(primitives, {"error": "InvalidInputException", "message": "Bad value.", "exit_code": 1})

    def test_other_exceptions_are_usage_errors_unless_overridden(self):
        """Test that exceptions without an exit code get the usage exit code unless one is given."""
        self.assertEqual(convert_exception_to_primitives(ValueError("oops"))["exit_code"], 1)
        self.assertEqual(convert_exception_to_primitives(ValueError("oops"), exit_code=3)["exit_code"], 3)

    def test_error_line_is_single_line_json(self):
        """Test that the formatted error line is one line of JSON with sorted keys."""
        line = format_error_line(exceptions.DnsGtException("Data\nerror."))

        self.assertNotIn("\n", line)
        self.assertEqual(list(json.loads(line)), ["error", "exit_code", "message"])
        self.assertEqual(json.loads(line)["exit_code"], 2)

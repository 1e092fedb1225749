import importlib
import logging
import os
import sys
from unittest import mock

from dnsgt.log_handlers import (
    LOG_RECORD_ATTRIBUTES_WITH_TIMESTAMP,
    LOG_RECORD_ATTRIBUTES_WITHOUT_TIMESTAMP,
    RunLogContext,
    apply_log_handler,
    create_dnsgt_formatter,
    get_log_record_attributes_for_environment,
)
from tests.base import BaseTestCase


def format_record(formatter, message="Step 1: loss 2.5.", name="dnsgt.training.loops"):
    record = logging.LogRecord(name, logging.INFO, __file__, 10, message, None, None)
    return formatter.format(record)


class TestFormatter(BaseTestCase):
    def test_context_is_bracketed_and_pipe_delimited(self):
        """Test that the log context is delimited by padded pipes inside square brackets, followed by the message."""
        formatter = create_dnsgt_formatter(LOG_RECORD_ATTRIBUTES_WITHOUT_TIMESTAMP)
        self.assertEqual(format_record(formatter), "[INFO | dnsgt.training.loops] Step 1: loss 2.5.")

    def test_extra_attributes_are_appended(self):
        """Test that the line number and the process and thread names are appended to the context when asked for."""
        formatter = create_dnsgt_formatter(
            ["%(levelname)s"], include_line_number=True, include_process_name=True, include_thread_name=True
        )
        self.assertEqual(
            format_record(formatter, message="hello"), "[INFO | 10 | MainProcess | MainThread] hello"
        )

    def test_timestamps_can_be_omitted(self):
        """Test that timestamps are left out of the log context if `DNSGT_OMIT_LOG_TIMESTAMPS` is "1"."""
        with mock.patch.dict(os.environ, DNSGT_OMIT_LOG_TIMESTAMPS="1"):
            self.assertEqual(get_log_record_attributes_for_environment(), LOG_RECORD_ATTRIBUTES_WITHOUT_TIMESTAMP)

        with mock.patch.dict(os.environ, DNSGT_OMIT_LOG_TIMESTAMPS="0"):
            self.assertEqual(get_log_record_attributes_for_environment(), LOG_RECORD_ATTRIBUTES_WITH_TIMESTAMP)


class TestApplyLogHandler(BaseTestCase):
    def test_handler_is_added_with_level(self):
        """Test that the handler is added to the named logger and both are set to the given level."""
        logger = logging.getLogger("test-apply-log-handler")
        self.addCleanup(logger.handlers.clear)

        handler = apply_log_handler(logger=logger, log_level=logging.WARNING)

        self.assertIn(handler, logger.handlers)
        self.assertEqual(handler.level, logging.WARNING)
        self.assertEqual(logger.level, logging.WARNING)

    def test_log_handler_not_used_if_environment_variable_not_present_or_0(self):
        """Test that the default log handler is not used if the `USE_DNSGT_LOG_HANDLER` environment variable is not
        present or is equal to "0".
        """
        with mock.patch.dict(os.environ, clear=True):
            with mock.patch("dnsgt.log_handlers.apply_log_handler") as mock_apply_log_handler:
                importlib.reload(sys.modules["dnsgt"])

        mock_apply_log_handler.assert_not_called()

        with mock.patch.dict(os.environ, USE_DNSGT_LOG_HANDLER="0"):
            with mock.patch("dnsgt.log_handlers.apply_log_handler") as mock_apply_log_handler:
                importlib.reload(sys.modules["dnsgt"])

        mock_apply_log_handler.assert_not_called()

    def test_log_handler_used_with_extra_attributes_if_environment_variables_are_1(self):
        """Test that the default log handler is applied to the root logger with the extra log record attributes asked
        for by environment variables if `USE_DNSGT_LOG_HANDLER` is "1".
        """
        with mock.patch.dict(
            os.environ,
            USE_DNSGT_LOG_HANDLER="1",
            INCLUDE_LINE_NUMBER_IN_LOGS="1",
            INCLUDE_PROCESS_NAME_IN_LOGS="0",
            INCLUDE_THREAD_NAME_IN_LOGS="1",
        ):
            with mock.patch("dnsgt.log_handlers.apply_log_handler") as mock_apply_log_handler:
                importlib.reload(sys.modules["dnsgt"])

        mock_apply_log_handler.assert_called_with(
            logger_name=None,
            include_line_number=True,
            include_process_name=False,
            include_thread_name=True,
        )


class TestRunLogContext(BaseTestCase):
    def test_run_name_is_in_context_and_handlers_are_restored(self):
        """Test that logs inside the context carry the run name and that the logger's original handlers and level are
        restored afterwards.
        """
        logger = logging.getLogger("test-run-log-context")
        original_handler = logging.NullHandler()
        logger.addHandler(original_handler)
        logger.setLevel(logging.ERROR)
        self.addCleanup(logger.handlers.clear)

        with mock.patch.dict(os.environ, DNSGT_OMIT_LOG_TIMESTAMPS="1"):
            with RunLogContext("melodic-kestrel", logger, log_level=logging.DEBUG):
                self.assertNotIn(original_handler, logger.handlers)
                self.assertEqual(len(logger.handlers), 1)
                self.assertEqual(logger.level, logging.DEBUG)
                self.assertEqual(
                    format_record(logger.handlers[0].formatter, message="hi", name="dnsgt"),
                    "[INFO | dnsgt | run-melodic-kestrel] hi",
                )

        self.assertEqual(logger.handlers, [original_handler])
        self.assertEqual(logger.level, logging.ERROR)

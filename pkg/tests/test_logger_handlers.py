import logging
import shutil
import tempfile
import unittest
from logging.handlers import RotatingFileHandler
from pathlib import Path
from unittest.mock import patch

import main
from errors import APP_LOGGER_NAME, NumericalFailureError


def _file_handlers(logger: logging.Logger) -> list[RotatingFileHandler]:
    return [h for h in logger.handlers if isinstance(h, RotatingFileHandler)]


def _fallbacks(logger: logging.Logger) -> list[logging.Handler]:
    return [h for h in logger.handlers if getattr(h, "_qmb_fallback", False)]


class LogHandlerTestCase(unittest.TestCase):
    """Detaches the app logger's handlers for each test and restores them afterwards."""

    def setUp(self):
        self.logger = logging.getLogger(APP_LOGGER_NAME)
        saved = list(self.logger.handlers)
        for handler in saved:
            self.logger.removeHandler(handler)
        self.addCleanup(self._restore, saved)
        self.saved_paths = (main.DATA_DIR, main.LOG_DIR, main.LOG_FILE_PATH)
        self.tmp = Path(tempfile.mkdtemp(prefix="qmb-logs-"))
        self.addCleanup(shutil.rmtree, self.tmp, True)

    def _restore(self, saved):
        for handler in list(self.logger.handlers):
            self.logger.removeHandler(handler)
            if handler not in saved:
                handler.close()
        for handler in saved:
            self.logger.addHandler(handler)
        main.DATA_DIR, main.LOG_DIR, main.LOG_FILE_PATH = self.saved_paths

    def log_text(self) -> str:
        for handler in self.logger.handlers:
            handler.flush()
        return (self.tmp / "logs" / f"{APP_LOGGER_NAME}.log").read_text(encoding="utf-8")


class FileHandlerAttachTests(LogHandlerTestCase):
    def test_file_handler_replaces_the_stderr_fallback(self):
        main._install_fallback_handler()
        self.assertEqual(len(_fallbacks(self.logger)), 1)

        self.assertTrue(main._attach_logger_file_handler(str(self.tmp / "logs")))

        self.assertEqual(_fallbacks(self.logger), [])
        self.assertEqual(len(_file_handlers(self.logger)), 1)

    def test_fallback_is_installed_once_at_warning_level(self):
        main._install_fallback_handler()
        main._install_fallback_handler()

        fallbacks = _fallbacks(self.logger)
        self.assertEqual(len(fallbacks), 1)
        self.assertEqual(fallbacks[0].level, logging.WARNING)

    def test_untagged_stream_handlers_are_left_alone(self):
        stream = logging.StreamHandler()
        self.logger.addHandler(stream)

        main._attach_logger_file_handler(str(self.tmp / "logs"))

        self.assertIn(stream, self.logger.handlers)

    def test_repeated_attach_keeps_a_single_rotating_file(self):
        for _ in range(3):
            self.assertTrue(main._attach_logger_file_handler(str(self.tmp / "logs")))

        handlers = _file_handlers(self.logger)
        self.assertEqual(len(handlers), 1)
        self.assertEqual(handlers[0].maxBytes, 1_000_000)
        self.assertEqual(handlers[0].backupCount, 3)

    def test_unwritable_log_dir_keeps_the_fallback(self):
        main._install_fallback_handler()

        with patch.object(main.os, "makedirs", side_effect=PermissionError("read-only volume")):
            self.assertFalse(main._attach_logger_file_handler("/nowhere/logs"))

        self.assertEqual(len(_fallbacks(self.logger)), 1)
        self.assertEqual(_file_handlers(self.logger), [])

    def test_data_dir_moves_the_log_file(self):
        main._set_data_dir(str(self.tmp))

        self.assertEqual(Path(main.LOG_FILE_PATH), self.tmp / "logs" / f"{APP_LOGGER_NAME}.log")
        (handler,) = _file_handlers(self.logger)
        self.assertEqual(Path(handler.baseFilename), Path(main.LOG_FILE_PATH))


class RunLoggingTests(LogHandlerTestCase):
    def test_run_milestones_reach_the_log_file(self):
        main._set_data_dir(str(self.tmp))

        main.run(main.RunConfig(mode="exact", n=4, t_max=3, out=str(self.tmp / "out.csv")))

        text = self.log_text()
        self.assertIn("Run started", text)
        self.assertIn("Decomposed baker N=4", text)
        self.assertIn("Run finished", text)

    def test_failed_run_logs_the_traceback(self):
        main._set_data_dir(str(self.tmp))

        with patch.object(main, "decompose", side_effect=NumericalFailureError("schur drifted", residual=1e-3)):
            code = main.main(["--mode", "exact", "--n", "4", "--t-max", "3", "--lang", "en"])

        self.assertEqual(code, main.EXIT_NUMERICAL)
        text = self.log_text()
        self.assertIn("Run failed", text)
        self.assertIn("Traceback", text)
        self.assertIn("residual 1.000e-03", text)


if __name__ == "__main__":
    unittest.main()

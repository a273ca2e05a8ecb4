import logging
import importlib
import sys

import pytest

pytestmark = pytest.mark.usefixtures("reset_root_logger")


def test_get_logger_returns_logger_without_file(tmp_path, monkeypatch):
    module = importlib.import_module("moduls.logger_setup")
    monkeypatch.setenv("WFSIM_LOG_DIR", str(tmp_path))

    logger = module.get_logger(stage="prod", name="test")
    assert isinstance(logger, logging.Logger)
    assert not list(tmp_path.glob("*.log"))
    assert logging.getLogger().level == logging.INFO


def test_console_handler_writes_to_stderr():
    module = importlib.import_module("moduls.logger_setup")
    module.get_logger(stage="test", name="console")
    handlers = logging.getLogger().handlers
    assert len(handlers) == 1
    assert handlers[0].stream is sys.stderr


def test_file_logging_creates_timestamped_file(tmp_path, monkeypatch):
    module = importlib.import_module("moduls.logger_setup")
    monkeypatch.setenv("WFSIM_LOG_DIR", str(tmp_path))

    logger = module.get_logger(stage="dev", name="file", file_logging=True)
    logger.info("sweep started")
    files = list(tmp_path.glob("*.log"))
    assert files, "Log file should be created"
    for handler in logging.getLogger().handlers:
        handler.flush()
    assert "sweep started" in files[0].read_text(encoding="utf-8")


def test_explicit_log_file(tmp_path):
    module = importlib.import_module("moduls.logger_setup")
    target = tmp_path / "run.log"
    logger = module.get_logger(stage="prod", log_file=str(target), log_level=logging.WARNING)
    logger.warning("explicit")
    for handler in logging.getLogger().handlers:
        handler.flush()
    assert "explicit" in target.read_text(encoding="utf-8")


def test_logger_cleanup_removes_old_files(tmp_path, monkeypatch):
    module = importlib.import_module("moduls.logger_setup")
    monkeypatch.setenv("WFSIM_LOG_DIR", str(tmp_path))

    old_file = tmp_path / "20220101_000000.log"
    old_file.write_text("old")
    foreign = tmp_path / "notes.log"
    foreign.write_text("keep")
    module.get_logger(stage="dev", name="cleanup", file_logging=True, retention_days=30)
    assert not old_file.exists()
    assert foreign.exists()
    assert logging.getLogger().handlers


def test_repeated_setup_does_not_duplicate_handlers():
    module = importlib.import_module("moduls.logger_setup")
    module.get_logger(stage="test", name="first")
    module.get_logger(stage="test", name="second")
    assert len(logging.getLogger().handlers) == 1

"""Configuration, checkpoints, rapports et exceptions"""

import logging

import pytest

from src.persistence.report_store import ReportStore
from src.utils.checkpoint import CheckpointManager, ProgressTracker
from src.utils.errors import (
    BudgetExhaustedError, DslError, DslSyntaxError, HahnforgeError, InvalidParameterError, NotInvertibleError,
    OracleRefusalError, UnboundNameError,
)
from src.utils.logger import get_logger
from src.utils.settings import BUDGET_ENV_VAR, FALLBACK_BUDGET, default_budget, get_setting, load_config


def test_settings_from_config():
    assert get_setting("budget.default_steps") == 100000
    assert get_setting("closure.depth") == 3
    assert get_setting("closure.absent", "défaut") == "défaut"
    assert get_setting("series.show_depth.trop_loin") is None


def test_missing_config_file(tmp_path):
    assert load_config(str(tmp_path / "absent.yaml")) == {}
    assert get_setting("budget.default_steps", 7, str(tmp_path / "absent.yaml")) == 7


def test_budget_environment_override(monkeypatch, tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("budget:\n  default_steps: 42\n", encoding='utf-8')
    monkeypatch.delenv(BUDGET_ENV_VAR, raising=False)
    assert default_budget(str(path)) == 42
    monkeypatch.setenv(BUDGET_ENV_VAR, "123")
    assert default_budget(str(path)) == 123
    monkeypatch.setenv(BUDGET_ENV_VAR, "beaucoup")
    assert default_budget(str(path)) == 42
    monkeypatch.setenv(BUDGET_ENV_VAR, "-5")
    assert default_budget(str(tmp_path / "absent.yaml")) == FALLBACK_BUDGET


def test_checkpoint_round_trip(tmp_path):
    manager = CheckpointManager(str(tmp_path / "checkpoints"))
    assert manager.load_checkpoint("job") is None
    manager.save_checkpoint("job", {'total': 2, 'completed': {}})
    assert manager.list_checkpoints() == ["job"]
    assert manager.load_checkpoint("job")['total'] == 2
    manager.clear_checkpoint("job")
    assert manager.list_checkpoints() == []


def test_progress_tracker_resumes(tmp_path):
    manager = CheckpointManager(str(tmp_path))
    tracker = ProgressTracker("closure_F", 3, checkpoint_interval=1, checkpoint_manager=manager)
    tracker.update("e0@t^1", {'status': 'witnessed'})
    tracker.update("e0@t^1", {'status': 'failed'})
    tracker.update("e1@t^1", {'status': 'budget'})

    resumed = ProgressTracker("closure_F", 3, checkpoint_manager=manager)
    assert resumed.is_done("e0@t^1") and resumed.is_done("e1@t^1")
    summary = resumed.get_summary(include_timing=False)
    assert summary == {'total': 3, 'processed': 2, 'witnessed': 1, 'failed': 0, 'budget': 1,
                       'progress_percentage': 66.67}
    resumed.complete()
    assert manager.list_checkpoints() == []


def test_progress_tracker_ignores_other_totals(tmp_path):
    manager = CheckpointManager(str(tmp_path))
    ProgressTracker("job", 2, checkpoint_interval=1, checkpoint_manager=manager).update("a", {'status': 'failed'})
    assert ProgressTracker("job", 5, checkpoint_manager=manager).current == 0


def test_report_store(tmp_path):
    store = ReportStore(reports_dir=str(tmp_path / "reports"))
    report = {'entries': [{'name': 'a.hf'}], 'statistics': {'fixtures': 1, 'passed': 1, 'failed': 0}}
    metadata = store.save_report("check_corpus", report, source="fixtures/corpus")
    assert metadata['entry_count'] == 1
    assert store.list_reports() == ["check_corpus"]
    assert store.load_report("check_corpus") == report
    assert store.get_report_info("check_corpus")['source'] == "fixtures/corpus"
    assert store.load_report("absent") is None
    assert store.get_report_info("absent") is None


def test_error_hierarchy():
    assert issubclass(InvalidParameterError, ValueError)
    assert issubclass(NotInvertibleError, ZeroDivisionError)
    assert issubclass(UnboundNameError, DslError) and issubclass(DslError, HahnforgeError)
    error = DslSyntaxError("';' attendu", 3, 7)
    assert str(error) == "3:7: ';' attendu"
    assert error.message == "';' attendu"
    assert BudgetExhaustedError(10).partial is None
    assert "deriv" in str(OracleRefusalError("f", "deriv"))


def test_loggers_are_not_duplicated():
    first = get_logger("src.tests.exemple")
    second = get_logger("src.tests.exemple")
    assert first is second
    assert len(first.handlers) == 1
    assert isinstance(first, logging.Logger)

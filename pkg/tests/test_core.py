import logging

import numpy as np
import pytest
from opentelemetry.sdk.metrics.export import InMemoryMetricReader
from pydantic import ValidationError

from qxot.core import telemetry
from qxot.core.config import Settings, settings
from qxot.core.exceptions import (
    CircuitFormatError,
    InvariantViolation,
    OutsideSubspaceError,
    QxotError,
    ResourceCapError,
    ShadowMismatchError,
    UsageError,
)
from qxot.core.logging import CustomFormatter, get_logger, log_run_info
from qxot.core.rng import resolve_rng
from qxot.schemas.schemas import RunConfig, round_real


def _metric_names(reader: InMemoryMetricReader) -> set[str]:
    data = reader.get_metrics_data()
    return {
        metric.name
        for resource in data.resource_metrics
        for scope in resource.scope_metrics
        for metric in scope.metrics
    }


def test_settings_defaults():
    fresh = Settings()
    assert fresh.MAX_CIRCUIT_QUBITS == 4
    assert fresh.FIDELITY_ATOL == 1e-9
    assert "EIGEN_FLOOR" in fresh.tolerance_names
    assert "MAX_QUBITS" not in fresh.tolerance_names


def test_settings_read_prefixed_env(monkeypatch):
    monkeypatch.setenv("QXOT_MAX_VIEW_INSTANCES", "2")
    monkeypatch.setenv("QXOT_SEED", "11")
    fresh = Settings()
    assert fresh.MAX_VIEW_INSTANCES == 2
    assert fresh.SEED == 11


def test_otel_headers_are_parsed():
    fresh = Settings(OTEL_EXPORTER_OTLP_HEADERS="signoz-access-token=abc, x=y")
    assert fresh.otel_headers_dict == {"signoz-access-token": "abc", "x": "y"}


@pytest.mark.parametrize(
    "error, code",
    [(UsageError, 2), (CircuitFormatError, 2), (ResourceCapError, 3), (InvariantViolation, 4), (ShadowMismatchError, 4), (OutsideSubspaceError, 4)],
)
def test_exit_codes(error, code):
    exc = error("boom")
    assert isinstance(exc, QxotError)
    assert exc.exit_code == code
    assert exc.detail == "boom"


def test_get_logger_is_namespaced():
    assert get_logger("xot").name == f"{settings.OTEL_SERVICE_NAME}.xot"


def test_custom_formatter_colors_by_level():
    formatter = CustomFormatter("%(levelname)s %(message)s")
    record = logging.LogRecord("qxot.test", logging.ERROR, __file__, 1, "bad", None, None)
    text = formatter.format(record)
    assert text.startswith(CustomFormatter.red)
    assert text.endswith(CustomFormatter.reset)
    assert "ERROR bad" in text


def test_log_run_info(caplog):
    logger = get_logger("test")
    logger.addHandler(caplog.handler)
    try:
        with caplog.at_level(logging.INFO, logger=logger.name):
            log_run_info(logger, "xot", {"seed": 7})
    finally:
        logger.removeHandler(caplog.handler)
    assert "'command': 'xot'" in caplog.text
    assert "'seed': 7" in caplog.text


def test_telemetry_records_runs_and_violations():
    reader = InMemoryMetricReader()
    telemetry.setup_telemetry(reader=reader)
    tracker = telemetry.get_telemetry()
    tracker.track_run("xot", "p1", 0.25, runs=3)
    tracker.track_violation("qc", "StateInvariantError")
    names = _metric_names(reader)
    service = settings.OTEL_SERVICE_NAME
    assert f"{service}_runs_total" in names
    assert f"{service}_run_duration_seconds" in names
    assert f"{service}_invariant_violations_total" in names


def test_resolve_rng_requires_a_seed(monkeypatch):
    monkeypatch.setattr(settings, "SEED", None)
    with pytest.raises(UsageError):
        resolve_rng(None)
    generator, seed = resolve_rng(5)
    assert seed == 5
    assert generator.integers(0, 1000) == np.random.default_rng(5).integers(0, 1000)


def test_resolve_rng_falls_back_to_setting(monkeypatch):
    monkeypatch.setattr(settings, "SEED", 9)
    _, seed = resolve_rng(None)
    assert seed == 9


def test_run_config_rejects_non_positive_tolerance():
    with pytest.raises(ValidationError):
        RunConfig(command="qc", tolerances={"FIDELITY_ATOL": 0.0})
    with pytest.raises(ValidationError):
        RunConfig(command="qc", tolerances={"NOT_A_TOLERANCE": 1e-3})
    with pytest.raises(ValidationError):
        RunConfig(command="qc", runs=0)


def test_run_config_applies_tolerances(restore_tolerances):
    RunConfig(command="qc", tolerances={"FIDELITY_ATOL": 1e-7, "EIGEN_FLOOR": 1e-8}).apply_tolerances()
    assert settings.FIDELITY_ATOL == 1e-7
    assert settings.EIGEN_FLOOR == -1e-8


def test_round_real_keeps_nine_significant_digits():
    assert round_real(0.57319244123) == 0.573192441
    assert round_real(1.0) == 1.0

from pathlib import Path

import numpy as np
import pytest

from qxot.core.config import settings
from qxot.models.states import Ket

REPO_ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def random_ket(rng):
    def make(num_qubits: int) -> Ket:
        amplitudes = rng.normal(size=2**num_qubits) + 1j * rng.normal(size=2**num_qubits)
        return Ket.normalized(num_qubits, amplitudes)

    return make


@pytest.fixture
def demo_circuit() -> Path:
    return REPO_ROOT / "circuits" / "demo.qct"


@pytest.fixture
def no_env_seed(monkeypatch):
    monkeypatch.delenv("QXOT_SEED", raising=False)
    monkeypatch.setattr(settings, "SEED", None)


@pytest.fixture
def restore_tolerances():
    saved = {name: getattr(settings, name) for name in settings.tolerance_names}
    yield
    for name, value in saved.items():
        setattr(settings, name, value)

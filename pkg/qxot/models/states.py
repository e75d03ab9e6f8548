"""Immutable state and measurement records shared by every protocol module.

Qubit 0 is the most significant bit of a basis index, so the amplitude of
``|q0 q1 ... q_{n-1}>`` sits at index ``q0 * 2**(n-1) + ... + q_{n-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Hashable, Sequence

import numpy as np

from qxot.core.config import settings
from qxot.core.exceptions import (
    DimensionMismatchError,
    GateError,
    StateInvariantError,
)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex)
    array.flags.writeable = False
    return array


def _eigenvalues(matrix: np.ndarray) -> np.ndarray:
    diagonal = np.diag(matrix)
    if np.count_nonzero(matrix - np.diag(diagonal)) == 0:
        return np.sort(diagonal.real)
    return np.linalg.eigvalsh(matrix)


@dataclass(frozen=True)
class Ket:
    num_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if amplitudes.ndim != 1 or amplitudes.shape[0] != 2**self.num_qubits:
            raise DimensionMismatchError(
                f"Ket on {self.num_qubits} qubits needs {2**self.num_qubits} amplitudes, "
                f"got shape {amplitudes.shape}"
            )
        if self.num_qubits > settings.MAX_QUBITS:
            raise DimensionMismatchError(
                f"{self.num_qubits} qubits exceeds the {settings.MAX_QUBITS}-qubit cap"
            )
        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1.0) > settings.NORM_ATOL:
            raise StateInvariantError(f"Ket norm {norm!r} differs from 1")
        object.__setattr__(self, "amplitudes", _frozen(amplitudes))

    @property
    def dimension(self) -> int:
        return 2**self.num_qubits

    @classmethod
    def basis(cls, index: int, num_qubits: int) -> "Ket":
        amplitudes = np.zeros(2**num_qubits, dtype=complex)
        amplitudes[index] = 1.0
        return cls(num_qubits, amplitudes)

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "Ket":
        index = int("".join(str(int(b)) for b in bits), 2) if bits else 0
        return cls.basis(index, len(bits))

    @classmethod
    def normalized(cls, num_qubits: int, amplitudes: np.ndarray) -> "Ket":
        amplitudes = np.asarray(amplitudes, dtype=complex)
        return cls(num_qubits, amplitudes / np.linalg.norm(amplitudes))

    def to_density(self) -> "DensityOperator":
        return DensityOperator(self.num_qubits, np.outer(self.amplitudes, self.amplitudes.conj()))

    def to_json(self) -> dict[str, Any]:
        return {
            "num_qubits": self.num_qubits,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "Ket":
        amplitudes = np.array([complex(re, im) for re, im in data["amplitudes"]])
        return cls(int(data["num_qubits"]), amplitudes)


@dataclass(frozen=True)
class DensityOperator:
    num_qubits: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=complex)
        side = 2**self.num_qubits
        if matrix.shape != (side, side):
            raise DimensionMismatchError(
                f"DensityOperator on {self.num_qubits} qubits needs a {side}x{side} matrix, "
                f"got {matrix.shape}"
            )
        _check_density(matrix)
        object.__setattr__(self, "matrix", _frozen(matrix))

    @property
    def dimension(self) -> int:
        return 2**self.num_qubits

    @classmethod
    def maximally_mixed(cls, num_qubits: int) -> "DensityOperator":
        side = 2**num_qubits
        return cls(num_qubits, np.eye(side) / side)

    def eigenvalues(self) -> np.ndarray:
        return _eigenvalues(self.matrix)

    def is_diagonal(self, atol: float | None = None) -> bool:
        atol = settings.PROBABILITY_ATOL if atol is None else atol
        off_diagonal = self.matrix - np.diag(np.diag(self.matrix))
        return bool(np.max(np.abs(off_diagonal), initial=0.0) <= atol)


@dataclass(frozen=True)
class CqDensityOperator:
    """Block-diagonal classical-quantum operator.

    The classical register value is the block index; block ``c`` holds the
    unnormalized quantum operator conditioned on ``c``. Traces over all
    blocks sum to one.
    """

    blocks: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        blocks = tuple(_frozen(block) for block in self.blocks)
        if not blocks:
            raise DimensionMismatchError("CqDensityOperator needs at least one block")
        side = blocks[0].shape[0]
        for block in blocks:
            if block.shape != (side, side):
                raise DimensionMismatchError("CqDensityOperator blocks must share one shape")
            if np.max(np.abs(block - block.conj().T), initial=0.0) > settings.HERMITIAN_ATOL:
                raise StateInvariantError("CqDensityOperator block is not Hermitian")
        total = sum(np.trace(block).real for block in blocks)
        if abs(total - 1.0) > settings.TRACE_ATOL * max(1, len(blocks)):
            raise StateInvariantError(f"CqDensityOperator trace {total!r} differs from 1")
        object.__setattr__(self, "blocks", blocks)

    @property
    def block_dimension(self) -> int:
        return self.blocks[0].shape[0]

    @property
    def dimension(self) -> int:
        return len(self.blocks) * self.block_dimension

    def eigenvalues(self) -> np.ndarray:
        values = np.concatenate([_eigenvalues(block) for block in self.blocks])
        if values.min(initial=0.0) < settings.EIGEN_FLOOR:
            raise StateInvariantError(f"negative eigenvalue {values.min()!r}")
        return values

    def block_probabilities(self) -> np.ndarray:
        return np.array([np.trace(block).real for block in self.blocks])


def _check_density(matrix: np.ndarray) -> None:
    if np.max(np.abs(matrix - matrix.conj().T), initial=0.0) > settings.HERMITIAN_ATOL:
        raise StateInvariantError("density matrix is not Hermitian")
    trace = np.trace(matrix).real
    if abs(trace - 1.0) > settings.TRACE_ATOL:
        raise StateInvariantError(f"density matrix trace {trace!r} differs from 1")
    smallest = _eigenvalues(matrix).min()
    if smallest < settings.EIGEN_FLOOR:
        raise StateInvariantError(f"density matrix has eigenvalue {smallest!r}")


ONE_QUBIT_GATES = frozenset({"I", "X", "Y", "Z", "H", "P", "Pdag", "T", "Tdag", "Rz"})
TWO_QUBIT_GATES = frozenset({"CNOT", "CZ"})
CLIFFORD_GATES = frozenset({"I", "X", "Y", "Z", "H", "P", "Pdag", "CNOT", "CZ"})


@dataclass(frozen=True)
class GateSpec:
    name: str
    targets: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.name in ONE_QUBIT_GATES:
            arity = 1
        elif self.name in TWO_QUBIT_GATES:
            arity = 2
        else:
            raise GateError(f"unknown gate {self.name!r}")
        if len(self.targets) != arity:
            raise GateError(f"{self.name} acts on {arity} qubit(s), got targets {self.targets}")
        if len(set(self.targets)) != len(self.targets):
            raise GateError(f"{self.name} targets must be distinct, got {self.targets}")
        if min(self.targets) < 0:
            raise GateError(f"negative target in {self.targets}")
        expected_params = 1 if self.name == "Rz" else 0
        if len(self.params) != expected_params:
            raise GateError(f"{self.name} takes {expected_params} parameter(s), got {self.params}")

    @property
    def is_clifford(self) -> bool:
        return self.name in CLIFFORD_GATES

    def __str__(self) -> str:
        params = f"({self.params[0]:.6g})" if self.params else ""
        return f"{self.name}{params} {' '.join(str(t) for t in self.targets)}"


@dataclass(frozen=True)
class Branch:
    outcomes: tuple[int, ...]
    probability: float
    post_state: Ket


@dataclass(frozen=True)
class BranchSet:
    branches: tuple[Branch, ...]

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        total = sum(branch.probability for branch in self.branches)
        if abs(total - 1.0) > settings.PROBABILITY_ATOL:
            raise StateInvariantError(f"branch probabilities sum to {total!r}")

    def __iter__(self):
        return iter(self.branches)

    def __len__(self) -> int:
        return len(self.branches)

    def probability_of(self, outcomes: Sequence[int]) -> float:
        key = tuple(outcomes)
        return sum(b.probability for b in self.branches if b.outcomes == key)

    def distribution(self) -> dict[tuple[int, ...], float]:
        return {branch.outcomes: branch.probability for branch in self.branches}


@dataclass(frozen=True)
class EnsembleEntry:
    prior: float
    label: Hashable
    state: DensityOperator | CqDensityOperator


@dataclass(frozen=True)
class StateEnsemble:
    entries: tuple[EnsembleEntry, ...]

    def __post_init__(self):
        entries = tuple(self.entries)
        if not entries:
            raise DimensionMismatchError("ensemble has no entries")
        total = sum(entry.prior for entry in entries)
        if abs(total - 1.0) > settings.PROBABILITY_ATOL:
            raise StateInvariantError(f"ensemble priors sum to {total!r}")
        dimension = entries[0].state.dimension
        if any(entry.state.dimension != dimension for entry in entries):
            raise DimensionMismatchError("ensemble states differ in dimension")
        object.__setattr__(self, "entries", entries)

    @property
    def priors(self) -> np.ndarray:
        return np.array([entry.prior for entry in self.entries])

    @property
    def labels(self) -> list[Hashable]:
        return [entry.label for entry in self.entries]

    def state_of(self, label: Hashable) -> DensityOperator | CqDensityOperator:
        for entry in self.entries:
            if entry.label == label:
                return entry.state
        raise KeyError(label)

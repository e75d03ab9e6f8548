"""Circuits, GF(2) Pauli-frame forms and the interactive run log."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import galois
import numpy as np

from qxot.core.config import settings
from qxot.core.exceptions import CircuitFormatError, DimensionMismatchError, ResourceCapError
from qxot.models.protocol import P3Run
from qxot.models.states import GateSpec

GF_2 = galois.GF(2)

CIRCUIT_GATES = frozenset({"H", "P", "Pdag", "X", "Z", "CNOT", "CZ", "T"})


def _gf2(bits: Sequence[int] | np.ndarray) -> galois.FieldArray:
    return GF_2(np.asarray(bits, dtype=int).reshape(-1))


@dataclass(frozen=True, eq=False)
class LinearForm:
    """``<coefficients, variables> + constant`` over GF(2)."""

    coefficients: galois.FieldArray
    constant: int = 0

    def __post_init__(self):
        object.__setattr__(self, "coefficients", _gf2(self.coefficients))
        object.__setattr__(self, "constant", int(self.constant) & 1)

    @classmethod
    def zero(cls, length: int = 0) -> "LinearForm":
        return cls(np.zeros(length, dtype=int))

    @classmethod
    def variable(cls, index: int, length: int) -> "LinearForm":
        bits = np.zeros(length, dtype=int)
        bits[index] = 1
        return cls(bits)

    @property
    def length(self) -> int:
        return int(self.coefficients.size)

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple(int(c) for c in self.coefficients)

    def pad(self, length: int) -> "LinearForm":
        if length < self.length:
            raise DimensionMismatchError(f"cannot shrink a form of length {self.length} to {length}")
        extra = np.zeros(length - self.length, dtype=int)
        return LinearForm(np.concatenate([np.asarray(self.bits, dtype=int), extra]), self.constant)

    def flip(self) -> "LinearForm":
        return LinearForm(self.coefficients, self.constant ^ 1)

    def __add__(self, other: "LinearForm") -> "LinearForm":
        length = max(self.length, other.length)
        a, b = self.pad(length), other.pad(length)
        return LinearForm(a.coefficients + b.coefficients, a.constant ^ b.constant)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LinearForm):
            return NotImplemented
        length = max(self.length, other.length)
        return self.pad(length).bits == other.pad(length).bits and self.constant == other.constant

    __hash__ = None

    def evaluate(self, values: Sequence[int]) -> int:
        if len(values) < self.length:
            raise DimensionMismatchError(f"form over {self.length} variables given {len(values)} values")
        if self.length == 0:
            return self.constant
        return int(self.coefficients @ _gf2(values[: self.length])) ^ self.constant

    def to_json(self) -> dict[str, Any]:
        return {"coefficients": list(self.bits), "constant": self.constant}


@dataclass(frozen=True)
class SymbolicMask:
    """Per-qubit Pauli frame ``X^x Z^z`` as forms over Alice's mask variables."""

    x_forms: tuple[LinearForm, ...]
    z_forms: tuple[LinearForm, ...]
    num_variables: int = 0

    @classmethod
    def identity(cls, num_qubits: int) -> "SymbolicMask":
        return cls(tuple(LinearForm.zero() for _ in range(num_qubits)), tuple(LinearForm.zero() for _ in range(num_qubits)))

    @property
    def num_qubits(self) -> int:
        return len(self.x_forms)

    def replace(self, qubit: int, x_form: LinearForm, z_form: LinearForm) -> "SymbolicMask":
        x_forms, z_forms = list(self.x_forms), list(self.z_forms)
        x_forms[qubit], z_forms[qubit] = x_form, z_form
        return SymbolicMask(tuple(x_forms), tuple(z_forms), self.num_variables)

    def teleported(self, qubit: int) -> "SymbolicMask":
        """Frame after a teleportation of ``qubit`` with two fresh variables ``(a, b)``."""
        length = self.num_variables + 2
        a, b = LinearForm.variable(length - 2, length), LinearForm.variable(length - 1, length)
        grown = SymbolicMask(self.x_forms, self.z_forms, length)
        return grown.replace(qubit, self.x_forms[qubit] + a, self.z_forms[qubit] + b)

    def evaluate(self, assignment: "MaskAssignment") -> list[tuple[int, int]]:
        return [(x.evaluate(assignment.values), z.evaluate(assignment.values)) for x, z in zip(self.x_forms, self.z_forms)]

    def to_json(self) -> list[dict[str, Any]]:
        return [{"x": x.to_json(), "z": z.to_json()} for x, z in zip(self.x_forms, self.z_forms)]


@dataclass(frozen=True)
class MaskAssignment:
    values: tuple[int, ...] = ()

    def extend(self, *bits: int) -> "MaskAssignment":
        return MaskAssignment(self.values + tuple(int(b) for b in bits))

    def padded(self) -> tuple[int, ...]:
        return self.values + (0,) * (len(self.values) % 2)


@dataclass(frozen=True)
class CliffordTCircuit:
    num_qubits: int
    gates: tuple[GateSpec, ...]
    # end index (exclusive) of each stage in ``gates``
    stage_boundaries: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "stage_boundaries", tuple(self.stage_boundaries))
        if self.num_qubits < 1:
            raise CircuitFormatError("a circuit needs at least one qubit")
        if self.num_qubits > settings.MAX_CIRCUIT_QUBITS:
            raise ResourceCapError(f"{self.num_qubits} qubits exceeds the {settings.MAX_CIRCUIT_QUBITS}-qubit circuit cap")
        if self.t_count > settings.MAX_T_GATES:
            raise ResourceCapError(f"{self.t_count} T gates exceeds the cap of {settings.MAX_T_GATES}")
        if list(self.stage_boundaries) != sorted(set(self.stage_boundaries)) or (
            self.gates and self.stage_boundaries[-1:] != (len(self.gates),)
        ):
            raise CircuitFormatError(f"stage boundaries {self.stage_boundaries} do not partition {len(self.gates)} gates")
        for gate in self.gates:
            if gate.name not in CIRCUIT_GATES:
                raise CircuitFormatError(f"gate {gate.name} is not allowed in a Clifford+T circuit")
            if max(gate.targets) >= self.num_qubits:
                raise CircuitFormatError(f"gate {gate} acts outside {self.num_qubits} qubits")
        for index, (cliffords, t_gates) in enumerate(self.stages):
            if any(g.name == "T" for g in cliffords):
                raise CircuitFormatError(f"stage {index}: a Clifford gate follows a T gate")
            targets = [g.targets[0] for g in t_gates]
            if len(set(targets)) != len(targets):
                raise CircuitFormatError(f"stage {index}: T targets {targets} are not distinct")

    @classmethod
    def from_gates(cls, num_qubits: int, gates: Sequence[GateSpec]) -> "CliffordTCircuit":
        """Split ``gates`` into the fewest stages the T-placement rules allow."""
        boundaries: list[int] = []
        seen_t: set[int] = set()
        for index, gate in enumerate(gates):
            if gate.name == "T":
                if gate.targets[0] in seen_t:
                    boundaries.append(index)
                    seen_t = set()
                seen_t.add(gate.targets[0])
            elif seen_t:
                boundaries.append(index)
                seen_t = set()
        if gates:
            boundaries.append(len(gates))
        return cls(num_qubits, tuple(gates), tuple(boundaries))

    @property
    def t_count(self) -> int:
        return sum(1 for gate in self.gates if gate.name == "T")

    @property
    def stages(self) -> list[tuple[tuple[GateSpec, ...], tuple[GateSpec, ...]]]:
        """Each stage as (Clifford gates, trailing T gates)."""
        result, start = [], 0
        for end in self.stage_boundaries:
            gates = self.gates[start:end]
            split = len(gates)
            while split > 0 and gates[split - 1].name == "T":
                split -= 1
            result.append((gates[:split], gates[split:]))
            start = end
        return result


@dataclass(frozen=True)
class TCorrection:
    qubit: int
    coefficients: tuple[int, ...]
    constant: int
    protocol_output: int
    correction: int
    p3_run: P3Run | None = None


@dataclass(frozen=True)
class StageLog:
    index: int
    outbound: tuple[tuple[int, int, int], ...]
    inbound: tuple[tuple[int, int, int], ...]
    corrections: tuple[TCorrection, ...] = ()


@dataclass(frozen=True)
class RunLog:
    num_qubits: int
    stages: tuple[StageLog, ...]
    num_variables: int
    final_frame: SymbolicMask
    fidelity: float
    seed: int | None = None
    batch: bool = False

    @property
    def protocol_calls(self) -> int:
        return sum(len(stage.corrections) for stage in self.stages)

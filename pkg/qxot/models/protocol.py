"""Records for the XOT protocols and their Protocol 3 composition.

Qubit labels in picks and transcripts are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from qxot.core.exceptions import InconsistentKeysError, UsageError

NONZERO_PAIRS: tuple[tuple[int, int], ...] = ((0, 1), (1, 0), (1, 1))


class Variant(str, Enum):
    P1 = "P1"
    P2 = "P2"
    P2b = "P2b"

    @classmethod
    def parse(cls, value: "Variant | str") -> "Variant":
        if isinstance(value, cls):
            return value
        for variant in cls:
            if variant.value.lower() == str(value).lower():
                return variant
        raise UsageError(f"unknown protocol variant {value!r}")

    @property
    def protocol_qubits(self) -> int:
        return 3 if self is Variant.P1 else 2


def _bit(value: int, name: str) -> int:
    if value not in (0, 1):
        raise UsageError(f"{name} must be a bit, got {value!r}")
    return int(value)


def bit_pair(values) -> tuple[int, int]:
    pair = tuple(int(v) for v in values)
    if len(pair) != 2:
        raise UsageError(f"expected two bits, got {values!r}")
    return _bit(pair[0], "bit"), _bit(pair[1], "bit")


@dataclass(frozen=True)
class XotInput:
    x1: int
    x2: int
    y1: int
    y2: int

    def __post_init__(self):
        for name in ("x1", "x2", "y1", "y2"):
            _bit(getattr(self, name), name)

    @property
    def x(self) -> tuple[int, int]:
        return self.x1, self.x2

    @property
    def y(self) -> tuple[int, int]:
        return self.y1, self.y2

    @property
    def expected(self) -> int:
        return (self.x1 & self.y1) ^ (self.x2 & self.y2)


@dataclass(frozen=True)
class AliceKeys:
    s1: int
    s2: int
    s3: int
    effective_x: tuple[int, int]

    def __post_init__(self):
        for name in ("s1", "s2", "s3"):
            _bit(getattr(self, name), name)
        object.__setattr__(self, "effective_x", bit_pair(self.effective_x))
        if self.effective_x not in NONZERO_PAIRS:
            raise InconsistentKeysError(f"effective input {self.effective_x} must be non-zero")

    def check_against(self, x: tuple[int, int]) -> None:
        if tuple(x) != (0, 0) and tuple(x) != self.effective_x:
            raise InconsistentKeysError(
                f"keys encode {self.effective_x} but the input is {tuple(x)}"
            )

    def to_json(self) -> dict[str, Any]:
        return {"s1": self.s1, "s2": self.s2, "s3": self.s3, "effective_x": list(self.effective_x)}


@dataclass(frozen=True)
class BobKeys:
    """Bob's key; Protocol 1 uses ``k = 2*k1 + k0``, Protocol 2b only ``k0``."""

    k0: int
    k1: int = 0

    def __post_init__(self):
        _bit(self.k0, "k0")
        _bit(self.k1, "k1")

    @classmethod
    def from_k(cls, k: int) -> "BobKeys":
        if k not in range(4):
            raise UsageError(f"k must lie in 0..3, got {k!r}")
        return cls(k0=k % 2, k1=k // 2)

    @property
    def k(self) -> int:
        return 2 * self.k1 + self.k0

    def to_json(self) -> dict[str, Any]:
        return {"k0": self.k0, "k1": self.k1, "k": self.k}


@dataclass(frozen=True)
class PickRecord:
    bell_pair: tuple[int, int]
    basis_pair: tuple[int, int] | None = None

    def to_json(self) -> dict[str, Any]:
        return {
            "bell_pair": list(self.bell_pair),
            "basis_pair": None if self.basis_pair is None else list(self.basis_pair),
        }


@dataclass(frozen=True)
class Message:
    direction: str
    kind: str
    payload: Any

    def to_json(self) -> dict[str, Any]:
        return {"dir": self.direction, "kind": self.kind, "payload": self.payload}


@dataclass(frozen=True)
class XotRun:
    variant: Variant
    inputs: XotInput
    alice_keys: AliceKeys
    bob_keys: BobKeys
    pick: PickRecord
    outcomes: tuple[int, ...]
    output: int
    seed: int | None = None
    messages: tuple[Message, ...] = field(default_factory=tuple)

    @property
    def correct(self) -> bool:
        return self.output == self.inputs.expected


@dataclass(frozen=True)
class P3AliceState:
    variant: Variant
    keys: tuple[AliceKeys, ...]
    picks: tuple[PickRecord, ...]
    nonzero: tuple[bool, ...]

    @property
    def n(self) -> int:
        return len(self.keys)

    @property
    def parity_certificate(self) -> int:
        return sum(k.s1 for k, used in zip(self.keys, self.nonzero) if used) % 2


@dataclass(frozen=True)
class P3BobState:
    k0: int
    k1: tuple[int, ...]

    @property
    def k(self) -> tuple[int, ...]:
        return tuple(2 * k1 + self.k0 for k1 in self.k1)

    def to_json(self) -> dict[str, Any]:
        return {"k0": self.k0, "k1": list(self.k1)}


@dataclass(frozen=True)
class P3Run:
    variant: Variant
    x: tuple[int, ...]
    y: tuple[int, ...]
    alice_state: P3AliceState
    bob_state: P3BobState
    outcomes: tuple[int, ...]
    R0: int
    S2: int
    output: int
    seed: int | None = None
    he_used: bool = False
    messages: tuple[Message, ...] = field(default_factory=tuple)

    @property
    def n(self) -> int:
        return len(self.x) // 2

    @property
    def expected(self) -> int:
        return sum(a & b for a, b in zip(self.x, self.y)) % 2

    @property
    def correct(self) -> bool:
        return self.output == self.expected

    @property
    def parity_certificate(self) -> int:
        return self.alice_state.parity_certificate


@dataclass(frozen=True)
class DecoyMap:
    placement: str
    length: int

    @property
    def real_positions(self) -> tuple[int, ...]:
        offset = 0 if self.placement == "first" else self.length
        return tuple(range(offset, offset + self.length))

    @property
    def decoy_positions(self) -> tuple[int, ...]:
        offset = self.length if self.placement == "first" else 0
        return tuple(range(offset, offset + self.length))

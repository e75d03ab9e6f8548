from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from qxot.core.exceptions import UsageError
from qxot.models.protocol import Message, Variant, bit_pair

YS: tuple[tuple[int, int], ...] = ((0, 0), (0, 1), (1, 0), (1, 1))


class Target(str, Enum):
    Y1 = "y1"
    Y2 = "y2"
    XOR = "xor"

    @classmethod
    def parse(cls, value: "Target | str") -> "Target":
        if isinstance(value, cls):
            return value
        aliases = {"y1": cls.Y1, "y2": cls.Y2, "xor": cls.XOR, "y1^y2": cls.XOR, "y1⊕y2": cls.XOR}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise UsageError(f"unknown target {value!r}") from None

    @property
    def default_x(self) -> tuple[int, int]:
        return {Target.Y1: (1, 0), Target.Y2: (0, 1), Target.XOR: (1, 1)}[self]


class BobStrategy(str, Enum):
    Z_BASIS = "Z_basis"
    BELL_GUESS = "Bell_guess"
    OPTIMAL_HOLEVO = "optimal_holevo"

    @classmethod
    def parse(cls, value: "BobStrategy | str") -> "BobStrategy":
        if isinstance(value, cls):
            return value
        for strategy in cls:
            if strategy.value.lower() == str(value).lower():
                return strategy
        raise UsageError(f"unknown strategy {value!r}")


@dataclass(frozen=True)
class CheatAliceConfig:
    """A cheating Alice who holds her key registers coherently.

    ``entangle_third`` keeps the third key register S3 coherent with qubit 3
    (Protocol 1 only); ``coherent_keys=False`` is the honest baseline with
    every key classical.
    """

    target: Target = Target.XOR
    variant: Variant = Variant.P1
    entangle_third: bool = True
    coherent_keys: bool = True
    x: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "target", Target.parse(self.target))
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        if self.x is not None:
            object.__setattr__(self, "x", tuple(int(b) for b in self.x))

    @property
    def input_pair(self) -> tuple[int, int]:
        if self.x is None:
            return self.target.default_x
        pair = bit_pair(self.x)
        if pair == (0, 0):
            raise UsageError("a cheating Alice needs a non-zero input")
        return pair

    @property
    def key_registers(self) -> int:
        return 3 if self.variant is Variant.P1 else 2

    @property
    def label(self) -> str:
        if not self.coherent_keys:
            return "honest"
        if self.variant is Variant.P1 and not self.entangle_third:
            return "partial"
        return "coherent"


@dataclass(frozen=True)
class AttackCell:
    y: tuple[int, int]
    k: int
    success: float
    guesses: dict[tuple[int, int], float]
    branches: tuple[tuple[tuple[int, ...], float], ...] = ()

    def to_json(self) -> dict[str, Any]:
        return {
            "y": list(self.y),
            "k": self.k,
            "success": self.success,
            "guesses": {f"{g[0]}{g[1]}": p for g, p in sorted(self.guesses.items())},
            "branches": [{"outcomes": list(o), "probability": p} for o, p in self.branches],
        }


@dataclass(frozen=True)
class AttackResult:
    config: CheatAliceConfig
    cells: tuple[AttackCell, ...] = field(default_factory=tuple)
    messages: tuple[Message, ...] = field(default_factory=tuple)

    @property
    def average_success(self) -> float:
        return sum(cell.success for cell in self.cells) / len(self.cells)

    @property
    def success_table(self) -> dict[tuple[tuple[int, int], int], float]:
        return {(cell.y, cell.k): cell.success for cell in self.cells}

    def guess_distribution(self) -> dict[tuple[int, int], dict[tuple[int, int], float]]:
        """Guess distribution per true ``y``, averaged over Bob's keys."""
        table: dict[tuple[int, int], dict[tuple[int, int], float]] = {}
        for y in YS:
            cells = [cell for cell in self.cells if cell.y == y]
            table[y] = {g: sum(cell.guesses.get(g, 0.0) for cell in cells) / len(cells) for g in YS}
        return table

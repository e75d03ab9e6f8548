from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from qxot.core.config import settings
from qxot.core.exceptions import UsageError
from qxot.models.attacks import BobStrategy, CheatAliceConfig
from qxot.models.protocol import Variant

PARTIES = ("bob", "alice")


def format_bits(value: float) -> str:
    return format(value, f".{settings.REPORT_SIGNIFICANT_DIGITS}g")


@dataclass(frozen=True)
class LeakageScenario:
    """What a leakage report measures.

    ``party="bob"`` measures Bob's information about Alice's ``x`` under
    ``prior``; ``party="alice"`` measures Alice's information about Bob's
    uniform ``y`` for the fixed input ``x`` (all ones by default).
    """

    scenario_id: str
    n: int
    prior: Any = "uniform"
    party: str = "bob"
    strategies: tuple[str, ...] = tuple(s.value for s in BobStrategy)
    variant: Variant = Variant.P1
    cheat: CheatAliceConfig | None = None
    x: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.party not in PARTIES:
            raise UsageError(f"party must be one of {PARTIES}, got {self.party!r}")
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        object.__setattr__(self, "strategies", tuple(BobStrategy.parse(s).value for s in self.strategies))


@dataclass(frozen=True)
class LeakageReport:
    scenario_id: str
    n: int
    prior: str
    party: str
    strategies: dict[str, float]
    holevo_bits: float
    entropy_of_secret: float
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def leakage_fraction(self) -> dict[str, float]:
        if self.entropy_of_secret <= settings.ENTROPY_CUTOFF:
            return dict.fromkeys(self.strategies, 0.0)
        return {name: bits / self.entropy_of_secret for name, bits in self.strategies.items()}

    def rows(self) -> list[dict[str, str]]:
        return [
            {
                "scenario": self.scenario_id,
                "n": str(self.n),
                "prior": self.prior,
                "strategy": name,
                "bits": format_bits(bits),
            }
            for name, bits in self.strategies.items()
        ]

import json
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_serializer, field_validator

from qxot.core.config import settings


def round_real(value: float) -> float:
    return float(format(value, f".{settings.REPORT_SIGNIFICANT_DIGITS}g"))


def write_json(model: BaseModel, path: Path) -> Path:
    """Write ``model`` with sorted keys so equal runs give byte-identical files."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(model.model_dump(mode="json"), sort_keys=True, indent=2) + "\n")
    return path


class RunConfig(BaseModel):
    command: str
    seed: Optional[int] = None
    variant: str = "p1"
    n: Optional[int] = None
    prior: str = "uniform"
    strategies: List[str] = Field(default_factory=lambda: ["Z_basis", "Bell_guess", "optimal_holevo"])
    prime_bits: int = settings.HE_PRIME_BITS
    circuit: Optional[str] = None
    output_dir: str = settings.OUTPUT_DIR
    runs: int = 1
    jobs: int = settings.DEFAULT_JOBS
    tolerances: Dict[str, float] = Field(default_factory=dict)

    @field_validator("tolerances")
    @classmethod
    def check_tolerances(cls, value: Dict[str, float]) -> Dict[str, float]:
        known = settings.tolerance_names
        for name, tolerance in value.items():
            if name not in known:
                raise ValueError(f"unknown tolerance {name}; expected one of {', '.join(known)}")
            # EIGEN_FLOOR is a negative floor; its magnitude is what is overridden
            if name != "EIGEN_FLOOR" and tolerance <= 0:
                raise ValueError(f"tolerance {name} must be positive, got {tolerance}")
        return value

    @field_validator("runs", "jobs")
    @classmethod
    def check_positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"must be at least 1, got {value}")
        return value

    def apply_tolerances(self) -> None:
        for name, tolerance in self.tolerances.items():
            setattr(settings, name, -abs(tolerance) if name == "EIGEN_FLOOR" else tolerance)


class Message(BaseModel):
    dir: str
    kind: str
    payload: Any


class AliceView(BaseModel):
    x: List[int]
    keys: Dict[str, Any]


class BobView(BaseModel):
    y: List[int]
    keys: Dict[str, Any]


class XotTranscript(BaseModel):
    variant: str
    seed: Optional[int]
    alice: AliceView
    bob: BobView
    messages: List[Message]
    output: int
    # outside the transcript proper; kept for audits
    pick: Dict[str, Any]
    outcomes: List[int]
    expected: int
    correct: bool

    @classmethod
    def from_run(cls, run) -> "XotTranscript":
        inputs = run.inputs
        return cls(
            variant=run.variant.value,
            seed=run.seed,
            alice=AliceView(x=list(inputs.x), keys=run.alice_keys.to_json()),
            bob=BobView(y=list(inputs.y), keys=run.bob_keys.to_json()),
            pick=run.pick.to_json(),
            outcomes=list(run.outcomes),
            output=run.output,
            expected=inputs.expected,
            correct=run.correct,
            messages=[Message(**m.to_json()) for m in run.messages],
        )


class P3RunRecord(BaseModel):
    variant: str
    seed: Optional[int]
    x: List[int]
    y: List[int]
    alice_keys: List[Dict[str, Any]]
    bob_state: Dict[str, Any]
    outcomes: List[int]
    R0: int
    S2: int
    output: int
    expected: int
    correct: bool
    parity_certificate: int
    he_used: bool
    he_keys: Optional[Dict[str, Any]] = None
    plaintext_shadow: Optional[int] = None
    messages: List[Message]

    @classmethod
    def from_run(cls, run, he_keys=None, plaintext_shadow: int | None = None) -> "P3RunRecord":
        return cls(
            variant=run.variant.value,
            seed=run.seed,
            x=list(run.x),
            y=list(run.y),
            alice_keys=[k.to_json() for k in run.alice_state.keys],
            bob_state=run.bob_state.to_json(),
            outcomes=list(run.outcomes),
            R0=run.R0,
            S2=run.S2,
            output=run.output,
            expected=run.expected,
            correct=run.correct,
            parity_certificate=run.parity_certificate,
            he_used=run.he_used,
            he_keys=None if he_keys is None else he_keys.to_json(),
            plaintext_shadow=plaintext_shadow,
            messages=[Message(**m.to_json()) for m in run.messages],
        )


class LinearRecord(BaseModel):
    """One ``linear`` evaluation; ``shares`` holds one session per XOR share of ``y``."""

    seed: Optional[int]
    x: List[int]
    y: List[int]
    output: int
    expected: int
    correct: bool
    shares: List[P3RunRecord]


class RunSummary(BaseModel):
    """Aggregate of ``--runs`` independent seeded runs."""

    command: str
    base_seed: int
    runs: int
    failures: int
    outputs: List[int]

    @property
    def ok(self) -> bool:
        return self.failures == 0


class AttackCell(BaseModel):
    y: List[int]
    k: int
    success: float
    guesses: Dict[str, float]
    branches: List[Dict[str, Any]]

    @field_serializer("success")
    def serialize_success(self, value: float) -> float:
        return round_real(value)

    @field_serializer("guesses")
    def serialize_guesses(self, value: Dict[str, float]) -> Dict[str, float]:
        return {key: round_real(p) for key, p in value.items()}

    @field_serializer("branches")
    def serialize_branches(self, value: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
        return [{**b, "probability": round_real(b["probability"])} for b in value]


class AttackReport(BaseModel):
    strategy: str
    target: str
    variant: str
    average_success: float
    undetectability_distance: float
    cells: List[AttackCell]
    messages: List[Message]

    @field_serializer("average_success", "undetectability_distance")
    def serialize_real(self, value: float) -> float:
        return round_real(value)

    @classmethod
    def from_result(cls, result, distance: float) -> "AttackReport":
        return cls(
            strategy=result.config.label,
            target=result.config.target.value,
            variant=result.config.variant.value,
            average_success=result.average_success,
            undetectability_distance=distance,
            cells=[AttackCell(**cell.to_json()) for cell in result.cells],
            messages=[Message(**m.to_json()) for m in result.messages],
        )


class LeakageReport(BaseModel):
    scenario_id: str
    n: int
    prior: str
    party: str
    strategies: Dict[str, float]
    holevo_bits: float
    entropy_of_secret: float
    leakage_fraction: Dict[str, float]
    notes: List[str]

    @field_serializer("strategies", "leakage_fraction")
    def serialize_table(self, value: Dict[str, float]) -> Dict[str, float]:
        return {key: round_real(bits) for key, bits in value.items()}

    @field_serializer("holevo_bits", "entropy_of_secret")
    def serialize_real(self, value: float) -> float:
        return round_real(value)

    @classmethod
    def from_report(cls, report) -> "LeakageReport":
        return cls(
            scenario_id=report.scenario_id,
            n=report.n,
            prior=report.prior,
            party=report.party,
            strategies=dict(report.strategies),
            holevo_bits=report.holevo_bits,
            entropy_of_secret=report.entropy_of_secret,
            leakage_fraction=report.leakage_fraction,
            notes=list(report.notes),
        )


class LeakageBundle(BaseModel):
    reports: List[LeakageReport]


class TCorrection(BaseModel):
    qubit: int
    coefficients: List[int]
    constant: int
    protocol_output: int
    correction: int


class StageLog(BaseModel):
    index: int
    outbound: List[List[int]]
    inbound: List[List[int]]
    corrections: List[TCorrection]


class RunLog(BaseModel):
    circuit: str
    seed: Optional[int]
    batch: bool
    num_qubits: int
    num_variables: int
    protocol_calls: int
    fidelity: float
    final_frame: List[Dict[str, Any]]
    stages: List[StageLog]
    output_state: Dict[str, Any]

    @field_serializer("fidelity")
    def serialize_fidelity(self, value: float) -> float:
        return round_real(value)

    @field_serializer("output_state")
    def serialize_state(self, value: Dict[str, Any]) -> Dict[str, Any]:
        return {**value, "amplitudes": [[round_real(re), round_real(im)] for re, im in value["amplitudes"]]}

    @classmethod
    def from_log(cls, log, circuit: str, output_state) -> "RunLog":
        return cls(
            circuit=circuit,
            seed=log.seed,
            batch=log.batch,
            num_qubits=log.num_qubits,
            num_variables=log.num_variables,
            protocol_calls=log.protocol_calls,
            fidelity=log.fidelity,
            final_frame=log.final_frame.to_json(),
            stages=[
                StageLog(
                    index=stage.index,
                    outbound=[list(t) for t in stage.outbound],
                    inbound=[list(t) for t in stage.inbound],
                    corrections=[
                        TCorrection(
                            qubit=c.qubit,
                            coefficients=list(c.coefficients),
                            constant=c.constant,
                            protocol_output=c.protocol_output,
                            correction=c.correction,
                        )
                        for c in stage.corrections
                    ],
                )
                for stage in log.stages
            ],
            output_state=output_state.to_json(),
        )

"""Interactive two-party evaluation of a Clifford+T circuit.

Alice owns the input and learns the output; Bob owns the circuit. Each stage
Alice teleports her qubits to Bob, who applies the stage's Clifford gates and
T gates and teleports the qubits back. Bob tracks Alice's teleportation masks
symbolically as GF(2) forms. After each T gate the pair run Protocol 3 on
Alice's mask values and the form's coefficients to decide whether Alice
applies a ``P^dag`` correction.

Both parties act on one global statevector; the run log records which party
touched what.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

from qxot.core import qsim
from qxot.core.config import settings
from qxot.core.exceptions import (
    CircuitFormatError,
    DimensionMismatchError,
    GateError,
    NonCliffordGateError,
    ShadowMismatchError,
    StateInvariantError,
)
from qxot.core.logging import get_logger
from qxot.core.rng import RngLike, resolve_rng
from qxot.models.circuits import (
    CIRCUIT_GATES,
    CliffordTCircuit,
    LinearForm,
    MaskAssignment,
    RunLog,
    StageLog,
    SymbolicMask,
    TCorrection,
)
from qxot.models.protocol import Variant
from qxot.models.states import Branch, BranchSet, GateSpec, Ket
from qxot.protocols.linear_eval import run_p3, run_p3_batch

logger = get_logger("twoparty_qc")

# tracked in the frame instead of being applied
FRAME_GATES = frozenset({"I", "X", "Y", "Z"})
SINGLE_QUBIT_CLIFFORDS = ("H", "P", "Pdag", "X", "Z")
TWO_QUBIT_CLIFFORDS = ("CNOT", "CZ")


def teleport_branches(state: Ket, qubit: int) -> BranchSet:
    """Teleport ``qubit`` through a fresh Bell pair; outcomes are the mask bits ``(a, b)``.

    In branch ``(a, b)`` the receiver, placed back at index ``qubit``, holds
    ``X^a Z^b`` applied to the original qubit.
    """
    n = state.num_qubits
    if qubit < 0 or qubit >= n:
        raise GateError(f"qubit {qubit} out of range for {n} qubits")
    extended = qsim.tensor(state, qsim.bell_state((1, 0)))
    extended = qsim.apply_gates(extended, [qsim.on("CNOT", qubit, n), qsim.on("H", qubit)])
    positions = [i for i in range(n) if i != qubit] + [qubit]
    branches = []
    for branch in qsim.measure_branches(extended, (qubit, n), "Z"):
        m1, m2 = branch.outcomes
        received = qsim.discard_measured(branch.post_state, (qubit, n), (m1, m2))
        branches.append(Branch((m2, m1), branch.probability, qsim.place(received, positions)))
    return BranchSet(tuple(branches))


def clifford_mask_transport(stage: Sequence[GateSpec], masks: SymbolicMask) -> SymbolicMask:
    """Push the frame ``X^x Z^z`` through ``stage``; Pauli gates only flip constants."""
    for gate in stage:
        x, z = list(masks.x_forms), list(masks.z_forms)
        name, targets = gate.name, gate.targets
        if name == "H":
            (q,) = targets
            x[q], z[q] = z[q], x[q]
        elif name in ("P", "Pdag"):
            (q,) = targets
            z[q] = z[q] + x[q]
        elif name == "X":
            x[targets[0]] = x[targets[0]].flip()
        elif name == "Z":
            z[targets[0]] = z[targets[0]].flip()
        elif name == "Y":
            x[targets[0]], z[targets[0]] = x[targets[0]].flip(), z[targets[0]].flip()
        elif name == "CNOT":
            c, t = targets
            x[t] = x[t] + x[c]
            z[c] = z[c] + z[t]
        elif name == "CZ":
            a, b = targets
            z[a], z[b] = z[a] + x[b], z[b] + x[a]
        elif name != "I":
            raise NonCliffordGateError(f"{gate} is not a Clifford gate")
        masks = SymbolicMask(tuple(x), tuple(z), masks.num_variables)
    return masks


def t_correction_coeffs(x_form: LinearForm, num_variables: int | None = None) -> tuple[tuple[int, ...], int]:
    """Coefficients and constant of the ``P^dag`` decision after a T gate.

    ``T X^a Z^b = X^a Z^(a^b) P^a T`` up to phase, so the correction bit is
    the X-mask value ``<coefficients, masks> ^ constant``.
    """
    form = x_form if num_variables is None else x_form.pad(num_variables)
    return form.bits, form.constant


def direct_eval(circuit: CliffordTCircuit, input_state: Ket) -> Ket:
    return qsim.apply_gates(input_state, circuit.gates)


def _pauli(state: Ket, qubit: int, x: int, z: int) -> Ket:
    gates = [qsim.on("X", qubit)] * x + [qsim.on("Z", qubit)] * z
    return qsim.apply_gates(state, gates)


def _corrections(
    t_gates: Sequence[GateSpec],
    masks: SymbolicMask,
    assignment: MaskAssignment,
    generator: np.random.Generator,
    batch: bool,
    variant: Variant,
) -> list[TCorrection]:
    x = assignment.padded()
    coefficients = [t_correction_coeffs(masks.x_forms[gate.targets[0]], len(x)) for gate in t_gates]
    if batch:
        runs = run_p3_batch(x, [c for c, _ in coefficients], generator, variant)
    else:
        runs = [run_p3(x, c, generator, variant) for c, _ in coefficients]

    corrections = []
    for gate, (bits, constant), run in zip(t_gates, coefficients, runs):
        qubit = gate.targets[0]
        correction = run.output ^ constant
        shadow = masks.x_forms[qubit].evaluate(assignment.values)
        if correction != shadow:
            logger.error(f"T correction on qubit {qubit}: protocol gave {correction}, plaintext gives {shadow}")
            raise ShadowMismatchError(f"Protocol 3 correction {correction} differs from the plaintext value {shadow}")
        corrections.append(TCorrection(qubit, bits, constant, run.output, correction, run))
    return corrections


def run_interactive(
    input_state: Ket,
    circuit: CliffordTCircuit,
    rng: RngLike = None,
    batch: bool = False,
    subprocedure_variant: Variant | str = Variant.P1,
) -> tuple[Ket, RunLog]:
    if input_state.num_qubits != circuit.num_qubits:
        raise DimensionMismatchError(
            f"input has {input_state.num_qubits} qubits, circuit expects {circuit.num_qubits}"
        )
    variant = Variant.parse(subprocedure_variant)
    generator, seed = resolve_rng(rng)
    n = circuit.num_qubits
    state = input_state
    masks = SymbolicMask.identity(n)
    assignment = MaskAssignment()
    stage_logs = []

    for index, (cliffords, t_gates) in enumerate(circuit.stages):
        outbound = []
        for qubit in range(n):
            branch = qsim.sample_branch(teleport_branches(state, qubit), generator)
            state = branch.post_state
            a, b = branch.outcomes
            assignment = assignment.extend(a, b)
            masks = masks.teleported(qubit)
            outbound.append((qubit, a, b))

        state = qsim.apply_gates(state, [g for g in cliffords if g.name not in FRAME_GATES])
        masks = clifford_mask_transport(cliffords, masks)
        state = qsim.apply_gates(state, t_gates)

        inbound = []
        for qubit in range(n):
            branch = qsim.sample_branch(teleport_branches(state, qubit), generator)
            a, b = branch.outcomes
            state = _pauli(branch.post_state, qubit, a, b)
            inbound.append((qubit, a, b))

        corrections = []
        if t_gates:
            corrections = _corrections(t_gates, masks, assignment, generator, batch, variant)
            for correction in corrections:
                if correction.correction:
                    state = qsim.apply_gate(state, qsim.on("Pdag", correction.qubit))
        stage_logs.append(StageLog(index, tuple(outbound), tuple(inbound), tuple(corrections)))

    if circuit.gates:
        # the whole final frame goes to Alice, Z residues of T-free qubits included
        logger.warning(f"Bob discloses the final Pauli frame of {n} qubit(s) over {masks.num_variables} variables")
    for qubit, (x, z) in enumerate(masks.evaluate(assignment)):
        state = _pauli(state, qubit, x, z)

    fidelity = qsim.fidelity(state, direct_eval(circuit, input_state))
    log = RunLog(
        num_qubits=n,
        stages=tuple(stage_logs),
        num_variables=masks.num_variables,
        final_frame=masks,
        fidelity=fidelity,
        seed=seed,
        batch=batch,
    )
    if fidelity < 1.0 - settings.FIDELITY_ATOL:
        logger.error(f"Interactive output has fidelity {fidelity!r} with the direct evaluation")
        raise StateInvariantError(f"interactive output fidelity {fidelity!r} below 1")
    logger.info(f"Interactive run: {len(stage_logs)} stage(s), {log.protocol_calls} Protocol 3 call(s), fidelity {fidelity:.9f}")
    return state, log


def random_circuit(
    num_qubits: int,
    rng: RngLike = None,
    num_stages: int = 2,
    max_t: int = 4,
    clifford_depth: int = 4,
) -> CliffordTCircuit:
    if clifford_depth < 1:
        raise CircuitFormatError("each stage needs at least one Clifford gate")
    generator, _ = resolve_rng(rng)
    names = SINGLE_QUBIT_CLIFFORDS + (TWO_QUBIT_CLIFFORDS if num_qubits > 1 else ())
    gates: list[GateSpec] = []
    boundaries: list[int] = []
    budget = max_t
    for _ in range(num_stages):
        for _ in range(clifford_depth):
            name = names[int(generator.integers(0, len(names)))]
            arity = 2 if name in TWO_QUBIT_CLIFFORDS else 1
            targets = generator.choice(num_qubits, size=arity, replace=False)
            gates.append(GateSpec(name, tuple(int(t) for t in targets)))
        count = int(generator.integers(0, min(num_qubits, budget) + 1))
        for target in generator.choice(num_qubits, size=count, replace=False):
            gates.append(GateSpec("T", (int(target),)))
        budget -= count
        boundaries.append(len(gates))
    return CliffordTCircuit(num_qubits, tuple(gates), tuple(boundaries))


_CANONICAL_NAMES = {name.lower(): name for name in CIRCUIT_GATES}


def parse_circuit(text: str) -> CliffordTCircuit:
    """Read the text format: one gate per line (``H 0``, ``CNOT 0 1``), ``---`` between stages.

    An optional ``qubits N`` line fixes the register size; otherwise it is the
    largest target plus one. ``#`` starts a comment.
    """
    gates: list[GateSpec] = []
    boundaries: list[int] = []
    num_qubits = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "---":
            if gates and (not boundaries or boundaries[-1] != len(gates)):
                boundaries.append(len(gates))
            continue
        tokens = line.split()
        if tokens[0].lower() == "qubits":
            try:
                num_qubits = int(tokens[1])
            except (IndexError, ValueError):
                raise CircuitFormatError(f"line {number}: expected 'qubits N'") from None
            continue
        name = _CANONICAL_NAMES.get(tokens[0].lower())
        if name is None:
            raise CircuitFormatError(f"line {number}: unknown gate {tokens[0]!r}")
        try:
            gates.append(GateSpec(name, tuple(int(t) for t in tokens[1:])))
        except (ValueError, GateError) as exc:
            raise CircuitFormatError(f"line {number}: {exc}") from None
    if gates and (not boundaries or boundaries[-1] != len(gates)):
        boundaries.append(len(gates))
    if num_qubits is None:
        if not gates:
            raise CircuitFormatError("empty circuit without a 'qubits N' line")
        num_qubits = max(max(g.targets) for g in gates) + 1
    return CliffordTCircuit(num_qubits, tuple(gates), tuple(boundaries))


def format_circuit(circuit: CliffordTCircuit) -> str:
    lines = [f"qubits {circuit.num_qubits}"]
    for index, (cliffords, t_gates) in enumerate(circuit.stages):
        if index:
            lines.append("---")
        lines.extend(str(gate) for gate in cliffords + t_gates)
    return "\n".join(lines) + "\n"


def load_circuit(path: Path | str) -> CliffordTCircuit:
    path = Path(path)
    if not path.is_file():
        raise CircuitFormatError(f"circuit file {path} not found")
    return parse_circuit(path.read_text())

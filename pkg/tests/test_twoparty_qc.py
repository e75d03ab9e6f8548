import itertools
import logging

import numpy as np
import pytest

from qxot.core import qsim
from qxot.core.exceptions import (
    CircuitFormatError,
    DimensionMismatchError,
    NonCliffordGateError,
    ResourceCapError,
)
from qxot.core.logging import get_logger
from qxot.models.circuits import CliffordTCircuit, LinearForm, MaskAssignment, SymbolicMask
from qxot.models.states import GateSpec, Ket
from qxot.protocols import twoparty_qc


def _same_up_to_phase(a: np.ndarray, b: np.ndarray) -> bool:
    overlap = abs(np.trace(a.conj().T @ b)) / a.shape[0]
    return overlap == pytest.approx(1.0, abs=1e-9)


def _pauli_frame(num_qubits: int, frame: list[tuple[int, int]]) -> np.ndarray:
    gates = []
    for qubit, (x, z) in enumerate(frame):
        gates += [qsim.on("X", qubit)] * x + [qsim.on("Z", qubit)] * z
    return qsim.circuit_unitary(num_qubits, gates)


def test_teleportation_branches_carry_the_mask(random_ket):
    state = random_ket(2)
    branches = twoparty_qc.teleport_branches(state, 1)
    assert sorted(branch.outcomes for branch in branches) == list(itertools.product((0, 1), repeat=2))
    for branch in branches:
        a, b = branch.outcomes
        assert branch.probability == pytest.approx(0.25)
        recovered = qsim.apply_gates(branch.post_state, [qsim.on("X", 1)] * a + [qsim.on("Z", 1)] * b)
        assert qsim.fidelity(recovered, state) == pytest.approx(1.0, abs=1e-9)


def test_teleported_frame_gains_two_variables():
    masks = SymbolicMask.identity(2).teleported(0)
    assert masks.num_variables == 2
    assert masks.x_forms[0] == LinearForm.variable(0, 2)
    assert masks.z_forms[0] == LinearForm.variable(1, 2)
    assert masks.x_forms[1] == LinearForm.zero()


def test_mask_transport_rules():
    masks = SymbolicMask.identity(2).teleported(0).teleported(1)
    a, b, c, d = (LinearForm.variable(i, 4) for i in range(4))

    swapped = twoparty_qc.clifford_mask_transport([GateSpec("H", (0,))], masks)
    assert swapped.x_forms[0] == b and swapped.z_forms[0] == a

    cnot = twoparty_qc.clifford_mask_transport([GateSpec("CNOT", (0, 1))], masks)
    assert cnot.x_forms[1] == a + c
    assert cnot.z_forms[0] == b + d

    cz = twoparty_qc.clifford_mask_transport([GateSpec("CZ", (0, 1))], masks)
    assert cz.z_forms[0] == b + c
    assert cz.z_forms[1] == d + a

    flipped = twoparty_qc.clifford_mask_transport([GateSpec("X", (0,))], masks)
    assert flipped.x_forms[0] == a.flip()
    assert flipped.x_forms[0].constant == 1

    with pytest.raises(NonCliffordGateError):
        twoparty_qc.clifford_mask_transport([GateSpec("T", (0,))], masks)


@pytest.mark.parametrize("seed", range(25))
def test_mask_transport_matches_the_unitaries(seed):
    circuit = twoparty_qc.random_circuit(2, seed, num_stages=1, max_t=0, clifford_depth=5)
    cliffords, _ = circuit.stages[0]
    applied = [g for g in cliffords if g.name not in twoparty_qc.FRAME_GATES]
    ideal = qsim.circuit_unitary(2, cliffords)
    actual = qsim.circuit_unitary(2, applied)

    masks = SymbolicMask.identity(2).teleported(0).teleported(1)
    moved = twoparty_qc.clifford_mask_transport(cliffords, masks)
    for values in itertools.product((0, 1), repeat=4):
        assignment = MaskAssignment(values)
        before = _pauli_frame(2, masks.evaluate(assignment))
        after = _pauli_frame(2, moved.evaluate(assignment))
        assert _same_up_to_phase(actual @ before, after @ ideal), (cliffords, values)


@pytest.mark.parametrize("a, b", list(itertools.product((0, 1), repeat=2)))
def test_t_gate_turns_an_x_mask_into_a_phase_correction(a, b):
    t, p = qsim.gate_matrix(GateSpec("T", (0,))), qsim.gate_matrix(GateSpec("P", (0,)))
    x, z = qsim.gate_matrix(GateSpec("X", (0,))), qsim.gate_matrix(GateSpec("Z", (0,)))
    power = np.linalg.matrix_power
    left = t @ power(x, a) @ power(z, b)
    right = power(x, a) @ power(z, a ^ b) @ power(p, a) @ t
    assert _same_up_to_phase(left, right)

    form = LinearForm(np.array([1, 0]), constant=0)
    coefficients, constant = twoparty_qc.t_correction_coeffs(form, 4)
    assert coefficients == (1, 0, 0, 0)
    assert constant == 0


@pytest.mark.parametrize("seed", range(20))
def test_interactive_run_matches_direct_evaluation(seed, random_ket):
    circuit = twoparty_qc.random_circuit(3, seed, num_stages=2, max_t=4)
    state = random_ket(3)
    output, log = twoparty_qc.run_interactive(state, circuit, seed)
    assert qsim.fidelity(output, twoparty_qc.direct_eval(circuit, state)) == pytest.approx(1.0, abs=1e-9)
    assert log.protocol_calls == circuit.t_count
    assert log.num_variables == 2 * circuit.num_qubits * len(circuit.stages)
    assert log.seed == seed


def test_batched_corrections_share_bobs_key(demo_circuit):
    circuit = twoparty_qc.load_circuit(demo_circuit)
    state = Ket.basis(0, 2)
    output, log = twoparty_qc.run_interactive(state, circuit, 11, batch=True)
    assert log.fidelity == pytest.approx(1.0, abs=1e-9)
    for stage in log.stages:
        keys = {c.p3_run.bob_state.k0 for c in stage.corrections}
        assert len(keys) <= 1
    for stage in log.stages:
        for correction in stage.corrections:
            assert correction.correction == correction.protocol_output ^ correction.constant


def test_demo_circuit_shape_and_format(demo_circuit):
    circuit = twoparty_qc.load_circuit(demo_circuit)
    assert circuit.num_qubits == 2
    assert circuit.t_count == 4
    assert [len(t) for _, t in circuit.stages] == [2, 1]
    assert twoparty_qc.parse_circuit(twoparty_qc.format_circuit(circuit)) == circuit


def test_from_gates_splits_repeated_t_targets():
    gates = [GateSpec("H", (0,)), GateSpec("T", (0,)), GateSpec("T", (0,))]
    circuit = CliffordTCircuit.from_gates(1, gates)
    assert circuit.stage_boundaries == (2, 3)


@pytest.mark.parametrize(
    "text",
    [
        "H 0\nFOO 1\n",
        "T 0\nH 0\n",
        "H 0\nT 0\nT 0\n",
        "qubits x\nH 0\n",
        "CNOT 0\n",
        "# nothing\n",
    ],
)
def test_malformed_circuits(text):
    with pytest.raises(CircuitFormatError):
        twoparty_qc.parse_circuit(text)


def test_circuit_caps():
    with pytest.raises(ResourceCapError):
        twoparty_qc.parse_circuit("qubits 5\nH 0\n")
    with pytest.raises(ResourceCapError):
        twoparty_qc.parse_circuit("H 0\nT 0\n---\n" * 9)


def test_missing_file_and_dimension_mismatch(tmp_path, demo_circuit):
    with pytest.raises(CircuitFormatError):
        twoparty_qc.load_circuit(tmp_path / "absent.qct")
    with pytest.raises(DimensionMismatchError):
        twoparty_qc.run_interactive(Ket.basis(0, 3), twoparty_qc.load_circuit(demo_circuit), 1)


def test_linear_form_arithmetic():
    form = LinearForm.variable(1, 3) + LinearForm(np.array([1, 0]))
    assert form.bits == (1, 1, 0)
    assert form.evaluate((1, 1, 0)) == 0
    assert form.flip().evaluate((1, 0, 1)) == 0
    assert LinearForm(np.array([1, 0]), 1) == LinearForm(np.array([1]), 1)
    assert LinearForm.zero().evaluate(()) == 0
    with pytest.raises(DimensionMismatchError):
        form.evaluate((1,))


def test_final_frame_disclosure_is_logged(caplog, demo_circuit):
    logger = get_logger("twoparty_qc")
    logger.addHandler(caplog.handler)
    try:
        with caplog.at_level(logging.WARNING, logger=logger.name):
            _, log = twoparty_qc.run_interactive(Ket.basis(0, 2), twoparty_qc.load_circuit(demo_circuit), 3)
    finally:
        logger.removeHandler(caplog.handler)
    assert "final Pauli frame" in caplog.text
    assert f"over {log.num_variables} variables" in caplog.text


@pytest.mark.slow
def test_many_random_circuits(random_ket):
    generator = np.random.default_rng(5)
    for seed in range(100):
        num_qubits = int(generator.integers(1, 4))
        circuit = twoparty_qc.random_circuit(num_qubits, seed, num_stages=3, max_t=6)
        state = random_ket(num_qubits)
        output, log = twoparty_qc.run_interactive(state, circuit, seed, batch=bool(seed % 2))
        assert qsim.fidelity(output, twoparty_qc.direct_eval(circuit, state)) == pytest.approx(1.0, abs=1e-9)
        assert log.protocol_calls == circuit.t_count

"""Dense state engine for a handful of qubits.

Gates act on kets (and, by conjugation, on density operators), measurements
expand every outcome into a ``BranchSet``, and the entropy helpers work on
plain density operators as well as block-diagonal classical-quantum ones.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg
import scipy.stats

from qxot.core.config import settings
from qxot.core.exceptions import (
    DimensionMismatchError,
    GateError,
    InvalidPovmError,
    MeasurementError,
)
from qxot.core.logging import get_logger
from qxot.models.states import (
    Branch,
    BranchSet,
    CqDensityOperator,
    DensityOperator,
    EnsembleEntry,
    GateSpec,
    Ket,
    StateEnsemble,
)

logger = get_logger("qsim")

SQRT_HALF = 1.0 / np.sqrt(2.0)

_FIXED_MATRICES: dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * SQRT_HALF,
    "P": np.diag([1, 1j]),
    "Pdag": np.diag([1, -1j]),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]),
    "Tdag": np.diag([1, np.exp(-1j * np.pi / 4)]),
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
}

# Outcome 0 is |0>, |+> or |+i> respectively.
_BASIS_VECTORS: dict[str, tuple[np.ndarray, np.ndarray]] = {
    "Z": (np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)),
    "X": (np.array([1, 1], dtype=complex) * SQRT_HALF, np.array([1, -1], dtype=complex) * SQRT_HALF),
    "Y": (np.array([1, 1j]) * SQRT_HALF, np.array([1, -1j]) * SQRT_HALF),
}


def rz(theta: float) -> GateSpec:
    return GateSpec("Rz", (0,), (theta,))


def gate_matrix(gate: GateSpec) -> np.ndarray:
    if gate.name == "Rz":
        return np.diag([1.0, np.exp(1j * gate.params[0])])
    return _FIXED_MATRICES[gate.name]


def _apply_matrix(amplitudes: np.ndarray, num_qubits: int, matrix: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    k = len(targets)
    psi = amplitudes.reshape((2,) * num_qubits)
    u = matrix.reshape((2,) * (2 * k))
    psi = np.tensordot(u, psi, axes=(list(range(k, 2 * k)), list(targets)))
    psi = np.moveaxis(psi, list(range(k)), list(targets))
    return psi.reshape(-1)


def _check_targets(num_qubits: int, targets: Sequence[int]) -> None:
    if any(t < 0 or t >= num_qubits for t in targets):
        raise GateError(f"targets {tuple(targets)} out of range for {num_qubits} qubits")
    if len(set(targets)) != len(targets):
        raise GateError(f"targets {tuple(targets)} are not distinct")


def apply_gate(state: Ket | DensityOperator, gate: GateSpec) -> Ket | DensityOperator:
    """Apply ``gate`` on its targets; density operators are conjugated."""
    _check_targets(state.num_qubits, gate.targets)
    matrix = gate_matrix(gate)
    if isinstance(state, Ket):
        return Ket(state.num_qubits, _apply_matrix(state.amplitudes, state.num_qubits, matrix, gate.targets))
    return DensityOperator(state.num_qubits, _conjugate(state.matrix, state.num_qubits, matrix, gate.targets))


def _conjugate(rho: np.ndarray, num_qubits: int, matrix: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    # rho as a 2n-qubit tensor: U on the row axes, conj(U) on the column axes
    side = 2**num_qubits
    flat = _apply_matrix(rho.reshape(-1), 2 * num_qubits, matrix, targets)
    flat = _apply_matrix(flat, 2 * num_qubits, matrix.conj(), [t + num_qubits for t in targets])
    return flat.reshape(side, side)


def apply_gates(state: Ket, gates: Iterable[GateSpec]) -> Ket:
    for gate in gates:
        state = apply_gate(state, gate)
    return state


def circuit_unitary(num_qubits: int, gates: Sequence[GateSpec]) -> np.ndarray:
    columns = [apply_gates(Ket.basis(i, num_qubits), gates).amplitudes for i in range(2**num_qubits)]
    return np.array(columns).T


def hadamard_rows(num_qubits: int) -> np.ndarray:
    """Row ``o`` is the X-basis bra of outcome string ``o``."""
    rows = np.ones((1, 1), dtype=complex)
    for _ in range(num_qubits):
        rows = np.kron(rows, _FIXED_MATRICES["H"])
    return rows


def on(gate_name: str, *targets: int, theta: float | None = None) -> GateSpec:
    """Shorthand: ``on("CNOT", 0, 2)``, ``on("Rz", 1, theta=np.pi / 2)``."""
    params = () if theta is None else (theta,)
    return GateSpec(gate_name, tuple(targets), params)


def tensor(*states: Ket) -> Ket:
    amplitudes = np.array([1.0], dtype=complex)
    for state in states:
        amplitudes = np.kron(amplitudes, state.amplitudes)
    return Ket.normalized(sum(s.num_qubits for s in states), amplitudes)


def permute(state: Ket, order: Sequence[int]) -> Ket:
    """Reorder qubits: qubit ``i`` of the result is qubit ``order[i]`` of ``state``."""
    if sorted(order) != list(range(state.num_qubits)):
        raise DimensionMismatchError(f"{tuple(order)} is not a permutation of {state.num_qubits} qubits")
    psi = state.amplitudes.reshape((2,) * state.num_qubits)
    return Ket(state.num_qubits, np.transpose(psi, order).reshape(-1))


def place(state: Ket, positions: Sequence[int]) -> Ket:
    """Inverse of :func:`permute`: qubit ``i`` of ``state`` lands at ``positions[i]``."""
    order = [0] * state.num_qubits
    for source, destination in enumerate(positions):
        order[destination] = source
    return permute(state, order)


def plus_minus(bit: int) -> Ket:
    return Ket(1, _BASIS_VECTORS["X"][bit])


def bell_state(code: tuple[int, int]) -> Ket:
    s1, s2 = code
    sign = -1.0 if s2 else 1.0
    amplitudes = np.zeros(4, dtype=complex)
    if s1 == 0:
        amplitudes[1], amplitudes[2] = SQRT_HALF, sign * SQRT_HALF
    else:
        amplitudes[0], amplitudes[3] = SQRT_HALF, sign * SQRT_HALF
    return Ket(2, amplitudes)


def _project(amplitudes: np.ndarray, num_qubits: int, targets: Sequence[int], vectors: Sequence[np.ndarray]) -> np.ndarray:
    for target, vector in zip(targets, vectors):
        projector = np.outer(vector, vector.conj())
        amplitudes = _apply_matrix(amplitudes, num_qubits, projector, (target,))
    return amplitudes


def measure_branches(state: Ket, targets: Sequence[int], basis: str = "Z") -> BranchSet:
    if not targets:
        raise MeasurementError("measurement needs at least one target")
    _check_targets(state.num_qubits, targets)
    if basis not in _BASIS_VECTORS:
        raise MeasurementError(f"unknown basis {basis!r}")
    branches = []
    for outcomes in itertools.product((0, 1), repeat=len(targets)):
        vectors = [_BASIS_VECTORS[basis][bit] for bit in outcomes]
        projected = _project(state.amplitudes, state.num_qubits, targets, vectors)
        probability = float(np.vdot(projected, projected).real)
        if probability <= settings.BRANCH_CUTOFF:
            continue
        branches.append(Branch(outcomes, probability, Ket.normalized(state.num_qubits, projected)))
    return _renormalized(branches)


def measure_projective(state: Ket, vectors: Sequence[np.ndarray]) -> BranchSet:
    """Rank-one projective measurement on the whole register.

    ``vectors`` must be orthonormal; outcome ``i`` projects onto ``vectors[i]``
    and outcome ``len(vectors)`` collects the weight outside their span.
    """
    basis = np.array(vectors, dtype=complex)
    if basis.shape[1:] != (state.dimension,):
        raise DimensionMismatchError(f"measurement vectors must have length {state.dimension}")
    if not np.allclose(basis.conj() @ basis.T, np.eye(len(basis)), atol=settings.POVM_ATOL):
        raise MeasurementError("measurement vectors are not orthonormal")
    overlaps = basis.conj() @ state.amplitudes
    branches = []
    for index, (vector, overlap) in enumerate(zip(basis, overlaps)):
        probability = float(abs(overlap) ** 2)
        if probability > settings.BRANCH_CUTOFF:
            branches.append(Branch((index,), probability, Ket.normalized(state.num_qubits, vector)))
    residual = state.amplitudes - basis.T @ overlaps
    outside = float(np.vdot(residual, residual).real)
    if outside > settings.BRANCH_CUTOFF:
        branches.append(Branch((len(basis),), outside, Ket.normalized(state.num_qubits, residual)))
    return _renormalized(branches)


def _renormalized(branches: list[Branch]) -> BranchSet:
    total = sum(branch.probability for branch in branches)
    return BranchSet(tuple(Branch(b.outcomes, b.probability / total, b.post_state) for b in branches))


def discard_measured(state: Ket, qubits: Sequence[int], values: Sequence[int]) -> Ket:
    """Drop qubits left in computational basis states ``values`` by a Z measurement."""
    psi = state.amplitudes.reshape((2,) * state.num_qubits)
    index = [slice(None)] * state.num_qubits
    for qubit, value in zip(qubits, values):
        index[qubit] = value
    remaining = psi[tuple(index)].reshape(-1)
    return Ket.normalized(state.num_qubits - len(qubits), remaining)


def sample_branch(branches: BranchSet, rng: np.random.Generator) -> Branch:
    probabilities = np.array([branch.probability for branch in branches])
    index = rng.choice(len(branches), p=probabilities / probabilities.sum())
    return branches.branches[index]


def reduce(state: Ket | DensityOperator, keep: Sequence[int]) -> DensityOperator:
    """Partial trace over every qubit not in ``keep`` (kept in the given order)."""
    n = state.num_qubits
    if not keep:
        raise DimensionMismatchError("reduce needs at least one kept qubit")
    _check_targets(n, keep)
    rest = [q for q in range(n) if q not in keep]
    dk, dr = 2 ** len(keep), 2 ** len(rest)
    if isinstance(state, Ket):
        psi = np.transpose(state.amplitudes.reshape((2,) * n), list(keep) + rest).reshape(dk, dr)
        matrix = psi @ psi.conj().T
    else:
        rho = state.matrix.reshape((2,) * (2 * n))
        axes = list(keep) + rest + [n + q for q in keep] + [n + q for q in rest]
        rho = np.transpose(rho, axes).reshape(dk, dr, dk, dr)
        matrix = np.einsum("ajbj->ab", rho)
    matrix = (matrix + matrix.conj().T) / 2
    return DensityOperator(len(keep), matrix / np.trace(matrix).real)


def dephase(state: Ket | DensityOperator, qubits: Sequence[int]) -> DensityOperator:
    """Measure ``qubits`` in the Z basis and forget the result."""
    rho = state.to_density() if isinstance(state, Ket) else state
    n = rho.num_qubits
    _check_targets(n, qubits)
    bits = (np.arange(2**n)[:, None] >> (n - 1 - np.array(qubits))[None, :]) & 1
    same = np.all(bits[:, None, :] == bits[None, :, :], axis=2)
    return DensityOperator(n, np.where(same, rho.matrix, 0.0))


def trace_distance(a: DensityOperator | CqDensityOperator, b: DensityOperator | CqDensityOperator) -> float:
    if a.dimension != b.dimension:
        raise DimensionMismatchError(f"trace distance between dimensions {a.dimension} and {b.dimension}")
    if isinstance(a, CqDensityOperator) and isinstance(b, CqDensityOperator):
        return float(
            0.5 * sum(np.abs(np.linalg.eigvalsh(x - y)).sum() for x, y in zip(a.blocks, b.blocks))
        )
    return float(0.5 * np.abs(np.linalg.eigvalsh(_matrix(a) - _matrix(b))).sum())


def _matrix(state: DensityOperator | CqDensityOperator) -> np.ndarray:
    if isinstance(state, DensityOperator):
        return state.matrix
    return scipy.linalg.block_diag(*state.blocks)


def fidelity(a: Ket | DensityOperator, b: Ket | DensityOperator) -> float:
    """Uhlmann fidelity (squared convention); 1 for identical states up to phase."""
    if a.dimension != b.dimension:
        raise DimensionMismatchError(f"fidelity between dimensions {a.dimension} and {b.dimension}")
    if isinstance(a, Ket) and isinstance(b, Ket):
        value = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
    elif isinstance(a, Ket):
        value = np.vdot(a.amplitudes, b.matrix @ a.amplitudes).real
    elif isinstance(b, Ket):
        value = np.vdot(b.amplitudes, a.matrix @ b.amplitudes).real
    else:
        root = scipy.linalg.sqrtm(a.matrix)
        value = np.real(np.trace(scipy.linalg.sqrtm(root @ b.matrix @ root))) ** 2
    return float(min(1.0, max(0.0, value)))


def shannon_entropy(probabilities: Iterable[float]) -> float:
    p = np.asarray(list(probabilities), dtype=float)
    p = p[p > settings.ENTROPY_CUTOFF]
    if p.size == 0:
        return 0.0
    return float(scipy.stats.entropy(p, base=2))


def von_neumann_entropy(state: DensityOperator | CqDensityOperator) -> float:
    eigenvalues = state.eigenvalues()
    eigenvalues = eigenvalues[eigenvalues > settings.ENTROPY_CUTOFF]
    return float(-np.sum(eigenvalues * np.log2(eigenvalues)))


def mixture(states: Sequence[DensityOperator | CqDensityOperator], weights: Sequence[float]):
    weights = np.asarray(weights, dtype=float) / np.sum(weights)
    if all(isinstance(s, DensityOperator) for s in states):
        matrix = sum(w * s.matrix for w, s in zip(weights, states))
        return DensityOperator(states[0].num_qubits, matrix)
    if all(isinstance(s, CqDensityOperator) for s in states):
        blocks = [sum(w * s.blocks[i] for w, s in zip(weights, states)) for i in range(len(states[0].blocks))]
        return CqDensityOperator(tuple(blocks))
    raise DimensionMismatchError("cannot mix plain and classical-quantum operators")


def holevo_information(ensemble: StateEnsemble) -> float:
    priors = ensemble.priors
    average = mixture([entry.state for entry in ensemble.entries], priors)
    conditional = sum(p * von_neumann_entropy(entry.state) for p, entry in zip(priors, ensemble.entries))
    return max(0.0, von_neumann_entropy(average) - conditional)


def ensemble_from(pairs: Iterable[tuple[float, object, DensityOperator | CqDensityOperator]]) -> StateEnsemble:
    entries = [(p, label, state) for p, label, state in pairs if p > 0]
    total = sum(p for p, _, _ in entries)
    return StateEnsemble(tuple(EnsembleEntry(p / total, label, state) for p, label, state in entries))


class Povm:
    """A measurement given either by explicit effects or by an orthonormal basis.

    Basis form stores the unitary whose columns are the measurement vectors;
    on a diagonal state the outcome distribution is ``|V|^2.T @ diag(rho)``.
    """

    def __init__(self, effects: Sequence[np.ndarray] | None = None, basis: np.ndarray | None = None):
        if (effects is None) == (basis is None):
            raise InvalidPovmError("give exactly one of effects or basis")
        self.effects = None if effects is None else np.array(effects, dtype=complex)
        self.basis = None if basis is None else np.asarray(basis, dtype=complex)
        self._validate()

    @classmethod
    def from_effects(cls, effects: Sequence[np.ndarray]) -> "Povm":
        return cls(effects=effects)

    @classmethod
    def from_basis(cls, basis: np.ndarray) -> "Povm":
        return cls(basis=basis)

    @classmethod
    def computational(cls, num_qubits: int) -> "Povm":
        return cls(basis=np.eye(2**num_qubits, dtype=complex))

    @classmethod
    def trivial(cls, dimension: int) -> "Povm":
        return cls(effects=[np.eye(dimension, dtype=complex)])

    @property
    def dimension(self) -> int:
        return self.basis.shape[0] if self.basis is not None else self.effects.shape[1]

    @property
    def num_outcomes(self) -> int:
        return self.basis.shape[1] if self.basis is not None else self.effects.shape[0]

    def _validate(self) -> None:
        atol = settings.POVM_ATOL
        if self.basis is not None:
            v = self.basis
            if v.ndim != 2 or v.shape[0] != v.shape[1]:
                raise InvalidPovmError(f"measurement basis must be square, got {v.shape}")
            if not np.allclose(v.conj().T @ v, np.eye(v.shape[0]), atol=atol):
                raise InvalidPovmError("measurement basis is not orthonormal")
            return
        e = self.effects
        if e.ndim != 3 or e.shape[1] != e.shape[2]:
            raise InvalidPovmError(f"effects must be square matrices, got {e.shape}")
        for effect in e:
            if not np.allclose(effect, effect.conj().T, atol=atol):
                raise InvalidPovmError("effect is not Hermitian")
            if np.linalg.eigvalsh(effect).min() < -atol:
                raise InvalidPovmError("effect is not positive semidefinite")
        if not np.allclose(e.sum(axis=0), np.eye(e.shape[1]), atol=atol):
            raise InvalidPovmError("effects do not sum to the identity")

    def probabilities(self, state: DensityOperator) -> np.ndarray:
        rho = state.matrix
        if rho.shape[0] != self.dimension:
            raise DimensionMismatchError(f"POVM on dimension {self.dimension} applied to {rho.shape[0]}")
        if self.basis is not None:
            diagonal = np.diag(rho)
            if np.count_nonzero(rho - np.diag(diagonal)) == 0:
                p = (np.abs(self.basis) ** 2).T @ diagonal.real
            else:
                p = np.einsum("io,ij,jo->o", self.basis.conj(), rho, self.basis).real
        else:
            p = np.einsum("oij,ji->o", self.effects, rho).real
        return np.clip(p, 0.0, None)


def measured_mutual_information(ensemble: StateEnsemble, povm: Povm | Sequence[np.ndarray]) -> float:
    if not isinstance(povm, Povm):
        povm = Povm.from_effects(povm)
    priors = ensemble.priors
    conditional = np.array([povm.probabilities(entry.state) for entry in ensemble.entries])
    conditional /= conditional.sum(axis=1, keepdims=True)
    marginal = priors @ conditional
    value = shannon_entropy(marginal) - sum(p * shannon_entropy(row) for p, row in zip(priors, conditional))
    return max(0.0, value)


def pretty_good_measurement(hypotheses: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Effects ``S^-1/2 sigma_i S^-1/2`` for unnormalized, prior-weighted hypotheses.

    ``S`` is their sum; the projector onto its kernel is shared equally so the
    effects form a complete measurement.
    """
    total = sum(hypotheses)
    eigenvalues, vectors = np.linalg.eigh(total)
    support = eigenvalues > settings.ENTROPY_CUTOFF
    inverse_root = (vectors[:, support] / np.sqrt(eigenvalues[support])) @ vectors[:, support].conj().T
    kernel = vectors[:, ~support] @ vectors[:, ~support].conj().T
    effects = []
    for sigma in hypotheses:
        effect = inverse_root @ sigma @ inverse_root + kernel / len(hypotheses)
        effects.append((effect + effect.conj().T) / 2)
    return effects

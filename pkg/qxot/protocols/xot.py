"""XOR oblivious transfer: Protocols 1, 2 and 2b.

Alice holds ``x = (x1, x2)`` and ends with ``x1*y1 ^ x2*y2``; Bob holds
``y = (y1, y2)`` and learns nothing about which combination she received.
Qubit labels in picks are 1-based; simulator indices are ``label - 1``.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from qxot.core import qsim
from qxot.core.config import settings
from qxot.core.exceptions import InconsistentKeysError, OutsideSubspaceError, UsageError
from qxot.core.logging import get_logger
from qxot.core.rng import RngLike, random_bit, resolve_rng
from qxot.models.protocol import (
    NONZERO_PAIRS,
    AliceKeys,
    BobKeys,
    Message,
    PickRecord,
    Variant,
    XotInput,
    XotRun,
    bit_pair,
)
from qxot.models.states import Branch, BranchSet, GateSpec, Ket

logger = get_logger("xot")

# effective x -> qubit labels carrying the Bell pair
P1_PAIRS: dict[tuple[int, int], tuple[int, int]] = {(1, 0): (1, 3), (0, 1): (2, 3), (1, 1): (1, 2)}

# s1 -> effective x -> two-qubit basis labels of the superposition
P2_BASIS: dict[int, dict[tuple[int, int], tuple[int, int]]] = {
    0: {(1, 0): (1, 3), (0, 1): (2, 3), (1, 1): (1, 2)},
    1: {(1, 0): (0, 2), (0, 1): (0, 1), (1, 1): (0, 3)},
}


def sample_alice_keys(x: tuple[int, int], rng: np.random.Generator) -> AliceKeys:
    s1, s2, s3 = (random_bit(rng) for _ in range(3))
    effective_x = tuple(x) if tuple(x) != (0, 0) else NONZERO_PAIRS[int(rng.integers(0, 3))]
    return AliceKeys(s1, s2, s3, effective_x)


def sample_bob_keys(variant: Variant, rng: np.random.Generator) -> BobKeys:
    if variant is Variant.P1:
        return BobKeys.from_k(int(rng.integers(0, 4)))
    if variant is Variant.P2:
        k0 = random_bit(rng)
        return BobKeys(k0, random_bit(rng))
    return BobKeys(random_bit(rng))


def all_alice_keys(x: tuple[int, int], variant: Variant = Variant.P1) -> Iterator[AliceKeys]:
    """Every key assignment consistent with ``x``, zero-input substitutions included."""
    effective = NONZERO_PAIRS if tuple(x) == (0, 0) else (tuple(x),)
    third = (0, 1) if variant is Variant.P1 else (0,)
    for s1, s2, s3, eff in itertools.product((0, 1), (0, 1), third, effective):
        yield AliceKeys(s1, s2, s3, eff)


def all_bob_keys(variant: Variant) -> tuple[BobKeys, ...]:
    if variant is Variant.P2b:
        return (BobKeys(0), BobKeys(1))
    return tuple(BobKeys.from_k(k) for k in range(4))


def p1_encode(x: tuple[int, int], keys: AliceKeys) -> tuple[Ket, PickRecord]:
    keys.check_against(x)
    pair = P1_PAIRS[keys.effective_x]
    (lone,) = {1, 2, 3} - set(pair)
    state = qsim.tensor(qsim.bell_state((keys.s1, keys.s2)), qsim.plus_minus(keys.s3))
    state = qsim.place(state, (pair[0] - 1, pair[1] - 1, lone - 1))
    return state, PickRecord(bell_pair=pair)


def p1_bob_gates(y: tuple[int, int], keys: BobKeys) -> list[GateSpec]:
    y1, y2 = bit_pair(y)
    gates = [qsim.on("Z", 0)] * y1 + [qsim.on("Z", 1)] * y2
    return gates + [qsim.on("Rz", q, theta=keys.k * np.pi / 2) for q in range(3)]


def p1_bob_step(state: Ket, y: tuple[int, int], k: BobKeys | int) -> tuple[BranchSet, int]:
    keys = BobKeys.from_k(k) if isinstance(k, int) else k
    return qsim.measure_branches(qsim.apply_gates(state, p1_bob_gates(y, keys)), (0, 1, 2), "X"), keys.k0


def _picked_xor(outcomes: tuple[int, ...], labels: tuple[int, int]) -> int:
    return outcomes[labels[0] - 1] ^ outcomes[labels[1] - 1]


def p1_decode(
    x: tuple[int, int], keys: AliceKeys, pick: PickRecord, outcomes: tuple[int, ...], k0: int
) -> int:
    if len(outcomes) != 3:
        raise InconsistentKeysError(f"expected 3 outcome bits, got {len(outcomes)}")
    if tuple(x) == (0, 0):
        return 0
    if pick.bell_pair != P1_PAIRS[keys.effective_x]:
        raise InconsistentKeysError(f"pick {pick.bell_pair} does not match keys {keys}")
    r0 = _picked_xor(tuple(outcomes), pick.bell_pair)
    return r0 ^ keys.s2 ^ (keys.s1 & k0)


def _p2_vectors(keys: AliceKeys) -> tuple[np.ndarray, np.ndarray, tuple[int, int]]:
    a, b = P2_BASIS[keys.s1][keys.effective_x]
    sign = -1.0 if keys.s2 else 1.0
    first = np.zeros(4, dtype=complex)
    first[a], first[b] = qsim.SQRT_HALF, sign * qsim.SQRT_HALF
    partner = np.zeros(4, dtype=complex)
    partner[a], partner[b] = qsim.SQRT_HALF, -sign * qsim.SQRT_HALF
    return first, partner, (a, b)


def p2_encode(x: tuple[int, int], keys: AliceKeys) -> tuple[Ket, PickRecord]:
    keys.check_against(x)
    vector, _, basis_pair = _p2_vectors(keys)
    return Ket(2, vector), PickRecord(bell_pair=P1_PAIRS[keys.effective_x], basis_pair=basis_pair)


def p2_bob_gates(y: tuple[int, int], k0: int) -> list[GateSpec]:
    """Bob's gates on the received pair plus his ancilla (qubit index 2)."""
    y1, y2 = bit_pair(y)
    gates = [qsim.on("CNOT", 0, 2), qsim.on("CNOT", 1, 2)]
    gates += [qsim.on("Z", 0)] * y1 + [qsim.on("Z", 1)] * y2
    return gates + [qsim.on("Rz", q, theta=k0 * np.pi / 2) for q in range(3)]


def p2_bob_step(state: Ket, y: tuple[int, int], k0: int, k1: int) -> tuple[BranchSet, int]:
    extended = qsim.tensor(state, Ket.basis(0, 1))
    branches = qsim.measure_branches(qsim.apply_gates(extended, p2_bob_gates(y, k0)), (0, 1, 2), "X")
    if k1:
        branches = BranchSet(
            tuple(
                Branch(tuple(bit ^ 1 for bit in b.outcomes), b.probability, b.post_state)
                for b in branches
            )
        )
    return branches, k0


def p2_picked_labels(keys: AliceKeys, basis_pair: tuple[int, int]) -> tuple[int, int]:
    """Outcome labels Alice reads: the basis labels if s1 = 0, the two others if s1 = 1."""
    if keys.s1 == 0:
        return tuple(sorted(basis_pair))
    return tuple(sorted({0, 1, 2, 3} - set(basis_pair)))


def p2_decode(
    x: tuple[int, int], keys: AliceKeys, pick: PickRecord, outcomes: tuple[int, ...], k0: int
) -> int:
    if len(outcomes) != 3:
        raise InconsistentKeysError(f"expected 3 outcome bits, got {len(outcomes)}")
    if tuple(x) == (0, 0):
        return 0
    if pick.basis_pair != P2_BASIS[keys.s1][keys.effective_x]:
        raise InconsistentKeysError(f"pick {pick.basis_pair} does not match keys {keys}")
    r0 = _picked_xor(tuple(outcomes), p2_picked_labels(keys, pick.basis_pair))
    return r0 ^ keys.s2 ^ (keys.s1 & k0)


def p2b_bob_operator(y: tuple[int, int], k0: int) -> np.ndarray:
    """Diagonal: ``Z^y1 Z^y2`` followed by a sign flip of ``|00>`` when ``k0 = 1``."""
    y1, y2 = bit_pair(y)
    signs = np.array([(-1) ** ((y1 & (i >> 1)) ^ (y2 & i & 1)) for i in range(4)], dtype=complex)
    if k0:
        signs[0] *= -1
    return np.diag(signs)


def p2b_bob_step(state: Ket, y: tuple[int, int], k0: int) -> tuple[Ket, int]:
    return Ket(2, p2b_bob_operator(y, k0) @ state.amplitudes), k0


def p2b_decode(
    returned: Ket,
    keys: AliceKeys,
    pick: PickRecord,
    k0: int,
    x: tuple[int, int] | None = None,
    honest: bool = True,
) -> tuple[BranchSet, dict[int, int | None]]:
    """Measure the returned pair against the encoding and its sign-flipped partner.

    Outcome ``r`` is 0 on a match, 1 on the partner and 2 outside their span.
    The second value maps each outcome to Alice's decoded bit (``None`` for 2).
    """
    x = keys.effective_x if x is None else tuple(x)
    keys.check_against(x)
    first, partner, basis_pair = _p2_vectors(keys)
    if pick.basis_pair != basis_pair:
        raise InconsistentKeysError(f"pick {pick.basis_pair} does not match keys {keys}")
    branches = qsim.measure_projective(returned, (first, partner))
    outside = branches.probability_of((2,))
    if honest and outside > 0:
        if outside > settings.SUBSPACE_ATOL:
            raise OutsideSubspaceError(f"returned state has weight {outside:.3g} outside the encoding subspace")
        kept = tuple(b for b in branches if b.outcomes != (2,))
        total = sum(b.probability for b in kept)
        branches = BranchSet(tuple(Branch(b.outcomes, b.probability / total, b.post_state) for b in kept))
    elif outside > 0:
        logger.warning(f"Returned state has weight {outside:.3g} outside the encoding subspace")
    outputs: dict[int, int | None] = {2: None}
    for r in (0, 1):
        outputs[r] = 0 if x == (0, 0) else r ^ (keys.s1 & k0)
    return branches, outputs


def encode(variant: Variant, x: tuple[int, int], keys: AliceKeys) -> tuple[Ket, PickRecord]:
    return p1_encode(x, keys) if variant is Variant.P1 else p2_encode(x, keys)


def bob_measure(variant: Variant, state: Ket, y: tuple[int, int], keys: BobKeys) -> BranchSet:
    """Bob's full step for the measuring variants (Protocols 1 and 2)."""
    if variant is Variant.P1:
        return p1_bob_step(state, y, keys)[0]
    return p2_bob_step(state, y, keys.k0, keys.k1)[0]


def picked_labels(variant: Variant, keys: AliceKeys, pick: PickRecord) -> tuple[int, int]:
    if variant is Variant.P2:
        return p2_picked_labels(keys, pick.basis_pair)
    return pick.bell_pair


@functools.lru_cache(maxsize=None)
def bob_outcome_amplitudes(variant: Variant, y: tuple[int, int], keys: BobKeys) -> np.ndarray:
    """Rows indexed by the outcome string Bob reports, columns by Alice's basis state.

    Entry ``[o, b]`` is the amplitude for Bob to announce ``o`` on input ``|b>``;
    Protocol 2's announced outcomes already include the ``k1`` flip.
    """
    if variant is Variant.P1:
        return qsim.hadamard_rows(3) @ qsim.circuit_unitary(3, p1_bob_gates(y, keys))
    if variant is Variant.P2:
        # ancilla starts in |0>, the least significant qubit
        amplitudes = qsim.hadamard_rows(3) @ qsim.circuit_unitary(3, p2_bob_gates(y, keys.k0))[:, 0::2]
        return amplitudes[::-1] if keys.k1 else amplitudes
    raise UsageError("Protocol 2b returns qubits instead of outcomes")


def run_xot(variant: Variant | str, x, y, rng: RngLike = None) -> XotRun:
    variant = Variant.parse(variant)
    x, y = bit_pair(x), bit_pair(y)
    generator, seed = resolve_rng(rng)
    inputs = XotInput(*x, *y)

    alice_keys = sample_alice_keys(x, generator)
    bob_keys = sample_bob_keys(variant, generator)
    state, pick = encode(variant, x, alice_keys)
    labels = list(range(1, variant.protocol_qubits + 1))
    messages = [Message("A->B", "qubits", {"labels": labels})]

    if variant is Variant.P2b:
        returned, k0 = p2b_bob_step(state, y, bob_keys.k0)
        messages.append(Message("B->A", "qubits", {"labels": labels}))
        messages.append(Message("B->A", "bits", {"k0": k0}))
        branches, outputs = p2b_decode(returned, alice_keys, pick, k0, x)
        branch = qsim.sample_branch(branches, generator)
        outcomes = branch.outcomes
        output = outputs[outcomes[0]]
    else:
        branches = bob_measure(variant, state, y, bob_keys)
        branch = qsim.sample_branch(branches, generator)
        outcomes = branch.outcomes
        messages.append(Message("B->A", "bits", {"outcomes": list(outcomes), "k0": bob_keys.k0}))
        decode = p1_decode if variant is Variant.P1 else p2_decode
        output = decode(x, alice_keys, pick, outcomes, bob_keys.k0)

    run = XotRun(
        variant=variant,
        inputs=inputs,
        alice_keys=alice_keys,
        bob_keys=bob_keys,
        pick=pick,
        outcomes=tuple(outcomes),
        output=output,
        seed=seed,
        messages=tuple(messages),
    )
    logger.debug(f"{variant.value} run x={x} y={y} output={output}")
    return run


@dataclass(frozen=True)
class XotCase:
    alice_keys: AliceKeys
    bob_keys: BobKeys
    outcomes: tuple[int, ...]
    probability: float
    output: int | None


def enumerate_xot_outputs(variant: Variant | str, x, y) -> Iterator[XotCase]:
    """Every (keys, substitution, Bob key, measurement branch) of one honest run."""
    variant = Variant.parse(variant)
    x, y = bit_pair(x), bit_pair(y)
    for alice_keys in all_alice_keys(x, variant):
        state, pick = encode(variant, x, alice_keys)
        for bob_keys in all_bob_keys(variant):
            if variant is Variant.P2b:
                returned, k0 = p2b_bob_step(state, y, bob_keys.k0)
                branches, outputs = p2b_decode(returned, alice_keys, pick, k0, x)
                for branch in branches:
                    yield XotCase(alice_keys, bob_keys, branch.outcomes, branch.probability, outputs[branch.outcomes[0]])
                continue
            decode = p1_decode if variant is Variant.P1 else p2_decode
            for branch in bob_measure(variant, state, y, bob_keys):
                output = decode(x, alice_keys, pick, branch.outcomes, bob_keys.k0)
                yield XotCase(alice_keys, bob_keys, branch.outcomes, branch.probability, output)


def honest_posterior(
    x: tuple[int, int], keys: AliceKeys, outcomes: tuple[int, ...], k0: int
) -> dict[tuple[int, int], float]:
    """Protocol 1: honest Alice's posterior over Bob's ``y`` under a uniform prior.

    Bob's hidden ``k1`` is averaged out; ``k0`` and the outcomes are what he sent.
    """
    state, _ = p1_encode(x, keys)
    likelihood = {}
    for y in itertools.product((0, 1), repeat=2):
        likelihood[y] = sum(
            0.5 * p1_bob_step(state, y, BobKeys(k0, k1))[0].probability_of(outcomes) for k1 in (0, 1)
        )
    total = sum(likelihood.values())
    return {y: value / total for y, value in likelihood.items()}

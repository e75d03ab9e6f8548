"""Cheating strategies for both parties.

A cheating Alice runs the honest encoding as a joint unitary controlled by key
registers held in superposition, then reads Bob's input out of those registers
once his bits arrive. A curious Bob measures the qubits he receives in
Protocol 3 with a fixed strategy.
"""

from __future__ import annotations

import functools
import itertools
from typing import Any

import numpy as np

from qxot.core import qsim
from qxot.core.config import settings
from qxot.core.exceptions import DimensionMismatchError, InconsistentKeysError, StateInvariantError
from qxot.core.logging import get_logger
from qxot.models.attacks import YS, AttackCell, AttackResult, BobStrategy, CheatAliceConfig
from qxot.models.protocol import AliceKeys, BobKeys, Message, Variant
from qxot.models.states import DensityOperator, Ket, StateEnsemble
from qxot.protocols import leakage, xot

logger = get_logger("adversaries")


def _key_tuples(config: CheatAliceConfig) -> list[tuple[int, ...]]:
    return list(itertools.product((0, 1), repeat=config.key_registers))


def _dephased_registers(config: CheatAliceConfig) -> tuple[int, ...]:
    if not config.coherent_keys:
        return tuple(range(config.key_registers))
    if config.variant is Variant.P1 and not config.entangle_third:
        return (2,)
    return ()


@functools.lru_cache(maxsize=None)
def _encoding_rows(config: CheatAliceConfig) -> np.ndarray:
    """Row ``s`` holds the encoding under key tuple ``s``, weighted by the key amplitude."""
    x = config.input_pair
    rows = []
    for s in _key_tuples(config):
        keys = AliceKeys(s[0], s[1], s[2] if len(s) == 3 else 0, x)
        state, _ = xot.encode(config.variant, x, keys)
        rows.append(state.amplitudes)
    return np.array(rows) / np.sqrt(len(rows))


def _coherence_mask(config: CheatAliceConfig, num_qubits: int) -> np.ndarray:
    """1 where two joint basis states agree on every dephased key register."""
    dephased = _dephased_registers(config)
    side = 2**num_qubits
    if not dephased:
        return np.ones((side, side))
    index = np.arange(side)
    bits = (index[:, None] >> (num_qubits - 1 - np.array(dephased))[None, :]) & 1
    return np.all(bits[:, None, :] == bits[None, :, :], axis=2).astype(float)


def cheat_alice_prepare(config: CheatAliceConfig) -> Ket | DensityOperator:
    """Key registers followed by the protocol qubits.

    Fully coherent keys give a pure state; dephased registers (the partial
    cheat, or classical keys) give the corresponding mixture.
    """
    if config.variant is not Variant.P1 and not config.entangle_third:
        logger.debug(f"entangle_third has no effect for {config.variant.value}")
    num_qubits = config.key_registers + config.variant.protocol_qubits
    joint = Ket(num_qubits, _encoding_rows(config).reshape(-1))
    dephased = _dephased_registers(config)
    return qsim.dephase(joint, dephased) if dephased else joint


def honest_average(config: CheatAliceConfig) -> DensityOperator:
    """Bob's received state averaged over honestly sampled classical keys."""
    x = config.input_pair
    states = [xot.encode(config.variant, x, keys)[0].to_density() for keys in xot.all_alice_keys(x, config.variant)]
    return qsim.mixture(states, [1.0] * len(states))


def undetectability_distance(config: CheatAliceConfig) -> float:
    prepared = cheat_alice_prepare(config)
    protocol = range(config.key_registers, config.key_registers + config.variant.protocol_qubits)
    return qsim.trace_distance(qsim.reduce(prepared, list(protocol)), honest_average(config))


def _outcome_bits(index: int) -> tuple[int, ...]:
    return tuple((index >> shift) & 1 for shift in (2, 1, 0))


@functools.lru_cache(maxsize=None)
def _key_operators(config: CheatAliceConfig, y: tuple[int, int], bob: BobKeys) -> dict[tuple[int, ...], np.ndarray]:
    """Unnormalized state Alice keeps for each outcome string Bob could announce.

    Traces are the announcement probabilities. For Protocol 2b nothing is
    announced and the single entry (key ``()``) covers the key registers
    together with the returned pair.
    """
    rows = _encoding_rows(config)
    if config.variant is Variant.P2b:
        joint = (rows @ xot.p2b_bob_operator(y, bob.k0).T).reshape(-1)
        num_qubits = config.key_registers + 2
        return {(): np.outer(joint, joint.conj()) * _coherence_mask(config, num_qubits)}

    mask = _coherence_mask(config, config.key_registers)
    amplitudes = rows @ xot.bob_outcome_amplitudes(config.variant, y, bob).T
    operators = {}
    for index in range(amplitudes.shape[1]):
        v = amplitudes[:, index]
        operators[_outcome_bits(index)] = np.outer(v, v.conj()) * mask
    return operators


def _hidden_k1(variant: Variant) -> tuple[int, ...]:
    return (0,) if variant is Variant.P2b else (0, 1)


@functools.lru_cache(maxsize=None)
def _extraction(config: CheatAliceConfig, outcomes: tuple[int, ...], k0: int) -> tuple[tuple[np.ndarray, ...], np.ndarray]:
    """Pretty-good measurement over the four ``y`` hypotheses, plus the kernel projector.

    Each hypothesis averages Bob's hidden ``k1``; outcomes and ``k0`` are known.
    For the fully coherent Protocol 1 attack the hypotheses have orthogonal
    supports and the measurement is the explicit register readout: the phase
    of S1 in the ``|+->``/``|+-i>`` bases, then S3 in the X basis when
    ``k0 = 0`` and the Y basis when ``k0 = 1``.
    """
    hypotheses = []
    for y in YS:
        hidden = _hidden_k1(config.variant)
        hypotheses.append(sum(_key_operators(config, y, BobKeys(k0, k1))[outcomes] for k1 in hidden) / len(hidden))
    effects = qsim.pretty_good_measurement(hypotheses)
    eigenvalues, vectors = np.linalg.eigh(sum(hypotheses))
    kernel = vectors[:, eigenvalues <= settings.ENTROPY_CUTOFF]
    return tuple(effects), kernel @ kernel.conj().T


def guess_distribution(
    post_key_state: Ket | DensityOperator, outcomes: tuple[int, ...], k0: int, config: CheatAliceConfig
) -> dict[tuple[int, int], float]:
    effects, kernel = _extraction(config, tuple(outcomes), k0)
    rho = post_key_state.to_density().matrix if isinstance(post_key_state, Ket) else post_key_state.matrix
    if rho.shape != kernel.shape:
        raise DimensionMismatchError(f"post-key state has dimension {rho.shape[0]}, expected {kernel.shape[0]}")
    stray = float(np.trace(kernel @ rho).real)
    if stray > settings.SUBSPACE_ATOL:
        raise InconsistentKeysError(f"post-key state is not conditioned on outcomes {outcomes} (stray weight {stray:.3g})")
    return {y: float(np.clip(np.trace(effect @ rho).real, 0.0, 1.0)) for y, effect in zip(YS, effects)}


def cheat_alice_extract(
    post_key_state: Ket | DensityOperator, outcomes: tuple[int, ...], k0: int, config: CheatAliceConfig
) -> tuple[int, int]:
    """Alice's guess of ``(y1, y2)`` from her registers after Bob's announcement.

    Bob's message is conditioned on first; the registers are then measured.
    """
    distribution = guess_distribution(post_key_state, outcomes, k0, config)
    return max(YS, key=lambda y: distribution[y])


def _transcript(config: CheatAliceConfig) -> tuple[Message, ...]:
    labels = list(range(1, config.variant.protocol_qubits + 1))
    messages = [Message("A->B", "qubits", {"labels": labels})]
    if config.variant is Variant.P2b:
        messages.append(Message("B->A", "qubits", {"labels": labels}))
        messages.append(Message("B->A", "bits", {"k0": "k0"}))
    else:
        messages.append(Message("B->A", "bits", {"outcomes": "o1 o2 o3", "k0": "k0"}))
    return tuple(messages)


def run_cheat_alice(config: CheatAliceConfig) -> AttackResult:
    """Exact success of the attack over every Bob input, key and announcement."""
    cells = []
    for y in YS:
        for bob in xot.all_bob_keys(config.variant):
            guesses = dict.fromkeys(YS, 0.0)
            branches = []
            for outcomes, operator in _key_operators(config, y, bob).items():
                probability = float(np.trace(operator).real)
                if probability <= settings.BRANCH_CUTOFF:
                    continue
                branches.append((outcomes, probability))
                effects, _ = _extraction(config, outcomes, bob.k0)
                for guess, effect in zip(YS, effects):
                    guesses[guess] += float(np.trace(effect @ operator).real)
            total = sum(guesses.values())
            if abs(total - 1.0) > settings.PROBABILITY_ATOL:
                logger.error(f"Guess distribution for y={y} k={bob.k} sums to {total!r}")
                raise StateInvariantError(f"guess distribution sums to {total!r}")
            guesses = {g: min(1.0, max(0.0, p)) for g, p in guesses.items()}
            cells.append(AttackCell(y=y, k=bob.k, success=guesses[y], guesses=guesses, branches=tuple(branches)))

    result = AttackResult(config=config, cells=tuple(cells), messages=_transcript(config))
    logger.info(
        f"Cheating Alice ({config.label}, {config.variant.value}, target {config.target.value}): "
        f"average success {result.average_success:.9f}"
    )
    return result


def _bell_guess_basis(variant: Variant, pair: tuple[int, int]) -> np.ndarray:
    """Bell basis on the guessed pair (1-based labels), Z basis on the remaining qubit."""
    columns = []
    if variant is Variant.P1:
        (lone,) = {1, 2, 3} - set(pair)
        for code, z in itertools.product(itertools.product((0, 1), repeat=2), (0, 1)):
            ket = qsim.tensor(qsim.bell_state(code), Ket.from_bits([z]))
            columns.append(qsim.place(ket, (pair[0] - 1, pair[1] - 1, lone - 1)).amplitudes)
    else:
        for code in itertools.product((0, 1), repeat=2):
            columns.append(qsim.bell_state(code).amplitudes)
    return np.array(columns).T


def bell_guess_povms(n: int, variant: Variant = Variant.P1):
    """Every product of per-instance Bell-guess bases, one guessed pair per instance."""
    pairs = tuple(xot.P1_PAIRS.values()) if variant is Variant.P1 else ((1, 2),)
    for guess in itertools.product(pairs, repeat=n):
        basis = np.ones((1, 1), dtype=complex)
        for pair in guess:
            basis = np.kron(basis, _bell_guess_basis(variant, pair))
        yield guess, qsim.Povm.from_basis(basis)


def bob_attack_info(
    strategy: BobStrategy | str,
    n: int,
    x_prior: Any = "uniform",
    variant: Variant | str = Variant.P1,
    ensemble: StateEnsemble | None = None,
) -> float:
    """Bits Bob learns about Alice's Protocol 3 input with ``strategy``."""
    strategy = BobStrategy.parse(strategy)
    variant = Variant.parse(variant)
    if ensemble is None:
        ensemble = leakage.bob_view_ensemble(n, x_prior, variant)
    if strategy is BobStrategy.OPTIMAL_HOLEVO:
        value = qsim.holevo_information(ensemble)
    elif strategy is BobStrategy.Z_BASIS:
        value = qsim.measured_mutual_information(ensemble, qsim.Povm.computational(n * variant.protocol_qubits))
    else:
        value, best = 0.0, None
        for guess, povm in bell_guess_povms(n, variant):
            information = qsim.measured_mutual_information(ensemble, povm)
            if best is None or information > value:
                value, best = information, guess
        logger.debug(f"Best Bell guess {best}")
    logger.debug(f"Bob {strategy.value} n={n}: {value:.9g} bits")
    return value

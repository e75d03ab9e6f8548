"""View ensembles of both parties and the information they carry.

Bob's view of one Protocol 3 session is the ``n``-instance received state,
averaged over every parity-constrained key assignment. Alice's view is her key
register (classical or coherent) next to the outcome bits Bob announces,
averaged over Bob's hidden keys.
"""

from __future__ import annotations

import csv
import functools
import itertools
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from qxot.core import qsim
from qxot.core.config import settings
from qxot.core.exceptions import InvariantViolation, ResourceCapError, UsageError
from qxot.core.logging import get_logger
from qxot.models.attacks import BobStrategy, CheatAliceConfig
from qxot.models.protocol import AliceKeys, BobKeys, Variant
from qxot.models.reports import LeakageReport, LeakageScenario
from qxot.models.states import CqDensityOperator, DensityOperator, StateEnsemble
from qxot.protocols import xot

logger = get_logger("leakage")

PAIRS: tuple[tuple[int, int], ...] = ((0, 0), (0, 1), (1, 0), (1, 1))
CSV_COLUMNS = ("scenario", "n", "prior", "strategy", "bits")


def _check_instances(n: int, cap: int) -> None:
    if n < 1:
        raise UsageError(f"n must be at least 1, got {n}")
    if n > cap:
        raise ResourceCapError(f"n={n} exceeds the dense-computation cap of {cap} instances")


def _parse_bits(bits: Any, length: int) -> tuple[int, ...]:
    if isinstance(bits, str):
        if any(c not in "01" for c in bits):
            raise UsageError(f"not a bit string: {bits!r}")
        bits = [int(c) for c in bits]
    bits = tuple(int(b) for b in bits)
    if len(bits) != length or any(b not in (0, 1) for b in bits):
        raise UsageError(f"expected {length} bits, got {bits!r}")
    return bits


def resolve_prior(spec: Any, n: int) -> dict[tuple[int, ...], float]:
    """Prior over Alice's ``2n`` input bits.

    ``"uniform"``, ``"pairs_equal"`` (every instance carries the same pair,
    zero included), ``"point:<bits>"`` or an explicit mapping of bit strings
    to weights.
    """
    if isinstance(spec, Mapping):
        weights = {_parse_bits(bits, 2 * n): float(w) for bits, w in spec.items()}
        if any(w < 0 for w in weights.values()) or sum(weights.values()) <= 0:
            raise UsageError("prior weights must be non-negative with a positive total")
        total = sum(weights.values())
        return {x: w / total for x, w in weights.items() if w > 0}
    if spec == "uniform":
        support = list(itertools.product((0, 1), repeat=2 * n))
        return {x: 1.0 / len(support) for x in support}
    if spec == "pairs_equal":
        return {pair * n: 0.25 for pair in PAIRS}
    if isinstance(spec, str) and spec.startswith("point:"):
        return {_parse_bits(spec.split(":", 1)[1], 2 * n): 1.0}
    raise UsageError(f"unknown prior {spec!r}")


def prior_label(spec: Any) -> str:
    return "custom" if isinstance(spec, Mapping) else str(spec)


@functools.lru_cache(maxsize=None)
def _instance_halves(variant: Variant, pair: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """``(A0 + A1) / 2`` and ``(A0 - A1) / 2``, ``Ab`` the key average with ``s1 = b``."""
    dimension = 2**variant.protocol_qubits
    if pair == (0, 0):
        mixed = np.eye(dimension, dtype=complex) / dimension
        return mixed, mixed
    halves = []
    for s1 in (0, 1):
        states = [
            xot.encode(variant, pair, keys)[0].to_density().matrix
            for keys in xot.all_alice_keys(pair, variant)
            if keys.s1 == s1
        ]
        halves.append(sum(states) / len(states))
    return (halves[0] + halves[1]) / 2, (halves[0] - halves[1]) / 2


def _kron_all(matrices: Iterable[np.ndarray]) -> np.ndarray:
    result = np.ones((1, 1), dtype=complex)
    for matrix in matrices:
        result = np.kron(result, matrix)
    return result


def bob_view_state(x: Sequence[int], variant: Variant = Variant.P1, parity_constrained: bool = True) -> DensityOperator:
    pairs = [(x[2 * i], x[2 * i + 1]) for i in range(len(x) // 2)]
    halves = [_instance_halves(variant, pair) for pair in pairs]
    matrix = _kron_all(b for b, _ in halves)
    # even parity over the non-zero instances keeps the correlated term
    if parity_constrained and any(pair != (0, 0) for pair in pairs):
        matrix = matrix + _kron_all(c for _, c in halves)
    return DensityOperator(len(pairs) * variant.protocol_qubits, matrix)


def bob_view_ensemble(
    n: int, x_prior: Any = "uniform", variant: Variant | str = Variant.P1, parity_constrained: bool = True
) -> StateEnsemble:
    """Bob's received qubits for each Alice input, labelled by ``x``."""
    _check_instances(n, settings.MAX_VIEW_INSTANCES)
    variant = Variant.parse(variant)
    prior = resolve_prior(x_prior, n)
    return qsim.ensemble_from(
        (p, x, bob_view_state(x, variant, parity_constrained)) for x, p in sorted(prior.items())
    )


def marginal_view_ensemble(
    n: int, positions: Sequence[int], x_prior: Any = "uniform", variant: Variant | str = Variant.P1
) -> StateEnsemble:
    """Bob's view labelled only by Alice's bits at ``positions`` (0-based)."""
    if not positions or any(p < 0 or p >= 2 * n for p in positions):
        raise UsageError(f"positions {tuple(positions)} out of range for {2 * n} bits")
    full = bob_view_ensemble(n, x_prior, variant)
    groups: dict[tuple[int, ...], list] = {}
    for entry in full.entries:
        label = tuple(entry.label[p] for p in positions)
        groups.setdefault(label, []).append(entry)
    pairs = []
    for label, entries in sorted(groups.items()):
        weight = sum(e.prior for e in entries)
        pairs.append((weight, label, qsim.mixture([e.state for e in entries], [e.prior for e in entries])))
    return qsim.ensemble_from(pairs)


@functools.lru_cache(maxsize=None)
def _instance_amplitudes(
    variant: Variant, pair: tuple[int, int], keys: AliceKeys, y: tuple[int, int], bob: BobKeys
) -> np.ndarray:
    state, _ = xot.encode(variant, pair, keys)
    return xot.bob_outcome_amplitudes(variant, y, bob) @ state.amplitudes


def _valid_key_tuples(x: Sequence[int], variant: Variant) -> list[tuple[AliceKeys, ...]]:
    pairs = [(x[2 * i], x[2 * i + 1]) for i in range(len(x) // 2)]
    valid = []
    for keys in itertools.product(*(list(xot.all_alice_keys(pair, variant)) for pair in pairs)):
        parity = sum(k.s1 for k, pair in zip(keys, pairs) if pair != (0, 0)) % 2
        if parity == 0:
            valid.append(keys)
    return valid


def _signature(keys: tuple[AliceKeys, ...], cheat: CheatAliceConfig | None) -> tuple:
    if cheat is None or not cheat.coherent_keys:
        return keys
    if cheat.variant is Variant.P1 and not cheat.entangle_third:
        return tuple(k.s3 for k in keys)
    return ()


def alice_view_state(
    y: Sequence[int], x: Sequence[int], cheat: CheatAliceConfig | None = None
) -> CqDensityOperator:
    """Alice's key register next to Bob's announced outcomes, one block per outcome string."""
    variant = Variant.P1 if cheat is None else cheat.variant
    n = len(x) // 2
    valid = _valid_key_tuples(x, variant)
    signatures = [_signature(keys, cheat) for keys in valid]
    mask = np.array([[a == b for b in signatures] for a in signatures], dtype=float)
    pairs = [(x[2 * i], x[2 * i + 1]) for i in range(n)]
    y_pairs = [(y[2 * i], y[2 * i + 1]) for i in range(n)]

    blocks = np.zeros((8**n, len(valid), len(valid)), dtype=complex)
    bob_keys = list(itertools.product((0, 1), repeat=n + 1))
    for k0, *k1 in bob_keys:
        rows = []
        for keys in valid:
            vectors = (
                _instance_amplitudes(variant, pair, key, y_pair, BobKeys(k0, bit))
                for pair, key, y_pair, bit in zip(pairs, keys, y_pairs, k1)
            )
            rows.append(_kron_all(v[None, :] for v in vectors)[0])
        amplitudes = np.array(rows) / np.sqrt(len(valid))
        blocks += np.einsum("ko,lo->okl", amplitudes, amplitudes.conj()) * mask
    blocks /= len(bob_keys)
    return CqDensityOperator(tuple(blocks))


def alice_view_ensemble(
    n: int, cheat_config: CheatAliceConfig | None = None, x: Sequence[int] | None = None
) -> StateEnsemble:
    """Alice's view for each Bob input ``y`` (uniform), with Bob's ``k0`` hidden."""
    _check_instances(n, settings.MAX_ALICE_VIEW_INSTANCES)
    variant = Variant.P1 if cheat_config is None else cheat_config.variant
    if variant is Variant.P2b:
        raise UsageError("Alice's view is defined for the measuring subprocedures (P1, P2)")
    x = (1, 1) * n if x is None else _parse_bits(x, 2 * n)
    dimension = len(_valid_key_tuples(x, variant)) * 8**n
    if dimension > 2**settings.MAX_QUBITS:
        raise ResourceCapError(f"Alice's view has dimension {dimension}, above 2**{settings.MAX_QUBITS}")
    labels = list(itertools.product((0, 1), repeat=2 * n))
    return qsim.ensemble_from((1.0 / len(labels), y, alice_view_state(y, x, cheat_config)) for y in labels)


def _check_report(report: LeakageReport) -> None:
    atol = settings.INFO_ATOL
    for name, bits in report.strategies.items():
        if bits < -atol or bits > report.holevo_bits + atol:
            logger.error(f"{report.scenario_id}: {name}={bits!r} outside [0, holevo={report.holevo_bits!r}]")
            raise InvariantViolation(f"{name} information {bits!r} exceeds the Holevo bound {report.holevo_bits!r}")
    if report.holevo_bits > report.entropy_of_secret + atol:
        logger.error(f"{report.scenario_id}: holevo {report.holevo_bits!r} above entropy {report.entropy_of_secret!r}")
        raise InvariantViolation(
            f"Holevo information {report.holevo_bits!r} exceeds the secret entropy {report.entropy_of_secret!r}"
        )


def make_report(scenario: LeakageScenario) -> LeakageReport:
    from qxot.protocols.adversaries import bob_attack_info

    notes: list[str] = []
    if scenario.party == "bob":
        prior = resolve_prior(scenario.prior, scenario.n)
        ensemble = bob_view_ensemble(scenario.n, scenario.prior, scenario.variant)
        holevo = qsim.holevo_information(ensemble)
        strategies = {
            name: bob_attack_info(name, scenario.n, scenario.prior, scenario.variant, ensemble=ensemble)
            for name in scenario.strategies
        }
        entropy = qsim.shannon_entropy(prior.values())
        notes.append("Bob's view is diagonal; the all-Z measurement attains the Holevo quantity")
    else:
        if set(scenario.strategies) - {BobStrategy.OPTIMAL_HOLEVO.value}:
            raise UsageError("Alice's view supports only the optimal_holevo strategy")
        ensemble = alice_view_ensemble(scenario.n, scenario.cheat, scenario.x)
        holevo = qsim.holevo_information(ensemble)
        strategies = {BobStrategy.OPTIMAL_HOLEVO.value: holevo}
        entropy = 2.0 * scenario.n
        if scenario.n > 1:
            notes.append("Holevo quantity reported as an upper bound on accessible information")

    report = LeakageReport(
        scenario_id=scenario.scenario_id,
        n=scenario.n,
        prior=prior_label(scenario.prior) if scenario.party == "bob" else "uniform_y",
        party=scenario.party,
        strategies=strategies,
        holevo_bits=holevo,
        entropy_of_secret=entropy,
        notes=tuple(notes),
    )
    _check_report(report)
    logger.info(f"Leakage {scenario.scenario_id}: holevo {holevo:.9g} of {entropy:.9g} bits")
    return report


def write_report_csv(reports: Sequence[LeakageReport], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for report in reports:
            writer.writerows(report.rows())
    return path

"""Protocol 3: ``n`` XOT instances composed into ``<x, y> mod 2``.

Bob's ``k0`` is shared across the instances and never disclosed; Alice keeps
the ``s1`` keys of her non-zero instances at even parity so the ``s1*k0``
terms cancel in the final XOR.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import replace
from typing import Iterable, Sequence

import numpy as np

from qxot.core import qsim
from qxot.core.exceptions import InconsistentKeysError, UsageError
from qxot.core.logging import get_logger
from qxot.core.rng import RngLike, random_bit, resolve_rng
from qxot.models.protocol import (
    AliceKeys,
    BobKeys,
    DecoyMap,
    Message,
    P3AliceState,
    P3BobState,
    P3Run,
    Variant,
)
from qxot.models.states import Ket
from qxot.protocols import xor_he
from qxot.protocols.xot import (
    all_alice_keys,
    bob_measure,
    encode,
    p2b_bob_step,
    p2b_decode,
    picked_labels,
    sample_alice_keys,
)

logger = get_logger("linear_eval")


def _bits(values: Iterable[int], name: str) -> tuple[int, ...]:
    bits = tuple(int(v) for v in values)
    if any(b not in (0, 1) for b in bits):
        raise UsageError(f"{name} must contain only bits")
    return bits


def _pairs(bits: Sequence[int]) -> list[tuple[int, int]]:
    return [(bits[2 * i], bits[2 * i + 1]) for i in range(len(bits) // 2)]


def _check_vector(x: Sequence[int], name: str = "x") -> tuple[int, ...]:
    bits = _bits(x, name)
    if len(bits) == 0 or len(bits) % 2:
        raise UsageError(f"{name} must have even, non-zero length, got {len(bits)}")
    return bits


def inner_product(x: Sequence[int], y: Sequence[int]) -> int:
    return sum(a & b for a, b in zip(x, y)) % 2


def p3_prepare(x: Sequence[int], rng: RngLike, variant: Variant | str = Variant.P1) -> tuple[P3AliceState, list[Ket]]:
    variant = Variant.parse(variant)
    x = _check_vector(x)
    generator, _ = resolve_rng(rng)
    pairs = _pairs(x)
    keys = [sample_alice_keys(pair, generator) for pair in pairs]
    nonzero = tuple(pair != (0, 0) for pair in pairs)

    # Fix parity by resampling the last non-zero instance's s1.
    used = [i for i, flag in enumerate(nonzero) if flag]
    if used and sum(keys[i].s1 for i in used) % 2:
        last = keys[used[-1]]
        keys[used[-1]] = AliceKeys(last.s1 ^ 1, last.s2, last.s3, last.effective_x)

    encoded = [encode(variant, pair, k) for pair, k in zip(pairs, keys)]
    state = P3AliceState(
        variant=variant,
        keys=tuple(keys),
        picks=tuple(pick for _, pick in encoded),
        nonzero=nonzero,
    )
    return state, [ket for ket, _ in encoded]


def _sample_bob_state(n: int, rng: np.random.Generator, k0: int | None) -> P3BobState:
    shared = random_bit(rng) if k0 is None else k0
    return P3BobState(k0=shared, k1=tuple(random_bit(rng) for _ in range(n)))


def p3_bob(
    states: Sequence[Ket],
    y: Sequence[int],
    rng: RngLike,
    variant: Variant | str = Variant.P1,
    k0: int | None = None,
) -> tuple[P3BobState, tuple[int, ...]]:
    """Bob's measuring step for Protocol 1 or 2 instances; ``k0`` stays with Bob."""
    variant = Variant.parse(variant)
    if variant is Variant.P2b:
        raise UsageError("Protocol 2b instances are returned, use p3_bob_returned")
    y = _check_vector(y, "y")
    if len(states) * 2 != len(y):
        raise UsageError(f"{len(states)} instances need a y of length {2 * len(states)}, got {len(y)}")
    generator, _ = resolve_rng(rng)
    bob = _sample_bob_state(len(states), generator, k0)
    outcomes: list[int] = []
    for state, y_pair, k1 in zip(states, _pairs(y), bob.k1):
        branches = bob_measure(variant, state, y_pair, BobKeys(bob.k0, k1))
        outcomes.extend(qsim.sample_branch(branches, generator).outcomes)
    return bob, tuple(outcomes)


def p3_bob_returned(
    states: Sequence[Ket], y: Sequence[int], rng: RngLike, k0: int | None = None
) -> tuple[P3BobState, tuple[Ket, ...]]:
    """Bob's step for Protocol 2b instances: the pairs go back to Alice."""
    y = _check_vector(y, "y")
    if len(states) * 2 != len(y):
        raise UsageError(f"{len(states)} instances need a y of length {2 * len(states)}, got {len(y)}")
    generator, _ = resolve_rng(rng)
    bob = _sample_bob_state(len(states), generator, k0)
    returned = tuple(p2b_bob_step(state, y_pair, bob.k0)[0] for state, y_pair in zip(states, _pairs(y)))
    return bob, returned


def p3_decode_parts(x: Sequence[int], alice_state: P3AliceState, outcomes: Sequence[int]) -> tuple[int, int]:
    """``(R0, S2)``: XOR of the picked outcome pairs and of the ``s2`` keys, non-zero instances only."""
    width = 3  # Protocols 1 and 2 both measure three qubits per instance
    if len(outcomes) != width * alice_state.n:
        raise InconsistentKeysError(f"expected {width * alice_state.n} outcome bits, got {len(outcomes)}")
    R0 = S2 = 0
    for i, (keys, pick, used) in enumerate(zip(alice_state.keys, alice_state.picks, alice_state.nonzero)):
        if not used:
            continue
        block = tuple(outcomes[width * i : width * (i + 1)])
        a, b = picked_labels(alice_state.variant, keys, pick)
        R0 ^= block[a - 1] ^ block[b - 1]
        S2 ^= keys.s2
    return R0, S2


def p3_decode(x: Sequence[int], alice_state: P3AliceState, outcomes: Sequence[int]) -> int:
    R0, S2 = p3_decode_parts(x, alice_state, outcomes)
    return R0 ^ S2


def p3_decode_returned(
    x: Sequence[int], alice_state: P3AliceState, returned: Sequence[Ket], rng: RngLike
) -> tuple[int, tuple[int, ...]]:
    """Protocol 2b instances: measure each returned pair; the output is the XOR of the ``r`` bits."""
    generator, _ = resolve_rng(rng)
    pairs = _pairs(_check_vector(x))
    local: list[int] = []
    for pair, keys, pick, state in zip(pairs, alice_state.keys, alice_state.picks, returned):
        # k0 is unknown to Alice, so decode the raw match bit r with k0 = 0
        branches, outputs = p2b_decode(state, keys, pick, 0, pair)
        local.append(outputs[qsim.sample_branch(branches, generator).outcomes[0]])
    return sum(local) % 2, tuple(local)


def run_p3(
    x: Sequence[int],
    y: Sequence[int],
    rng: RngLike = None,
    subprocedure_variant: Variant | str = Variant.P1,
    k0: int | None = None,
) -> P3Run:
    variant = Variant.parse(subprocedure_variant)
    x, y = _check_vector(x), _check_vector(y, "y")
    if len(x) != len(y):
        raise UsageError(f"x and y lengths differ: {len(x)} vs {len(y)}")
    generator, seed = resolve_rng(rng)
    n = len(x) // 2
    alice, states = p3_prepare(x, generator, variant)
    messages = [Message("A->B", "qubits", {"labels": list(range(1, n * variant.protocol_qubits + 1))})]

    if variant is Variant.P2b:
        bob, returned = p3_bob_returned(states, y, generator, k0)
        messages.append(Message("B->A", "qubits", {"labels": list(range(1, 2 * n + 1))}))
        R0, local = p3_decode_returned(x, alice, returned, generator)
        S2, outcomes = 0, local
    else:
        bob, outcomes = p3_bob(states, y, generator, variant, k0)
        messages.append(Message("B->A", "bits", {"outcomes": list(outcomes)}))
        R0, S2 = p3_decode_parts(x, alice, outcomes)

    run = P3Run(
        variant=variant,
        x=x,
        y=y,
        alice_state=alice,
        bob_state=bob,
        outcomes=tuple(outcomes),
        R0=R0,
        S2=S2,
        output=R0 ^ S2,
        seed=seed,
        messages=tuple(messages),
    )
    logger.debug(f"Protocol 3 ({variant.value}) n={n} output={run.output}")
    return run


def run_p3_he(
    x: Sequence[int],
    y: Sequence[int],
    he_keys: xor_he.HeKeyPair,
    rng: RngLike = None,
    subprocedure_variant: Variant | str = Variant.P1,
    scheme: xor_he.XorHomomorphicScheme | None = None,
) -> P3Run:
    """Protocol 3 where Alice learns only one masked bit about the XOR of her picked outcomes.

    All protocol randomness is drawn before any encryption randomness, so the
    run matches :func:`run_p3` under the same seed.
    """
    variant = Variant.parse(subprocedure_variant)
    if variant is Variant.P2b:
        raise UsageError("the homomorphic hybrid does not apply to Protocol 2b")
    scheme = scheme or xor_he.GoldwasserMicali()
    x, y = _check_vector(x), _check_vector(y, "y")
    if len(x) != len(y):
        raise UsageError(f"x and y lengths differ: {len(x)} vs {len(y)}")
    generator, seed = resolve_rng(rng)
    n = len(x) // 2
    alice, states = p3_prepare(x, generator, variant)
    bob, outcomes = p3_bob(states, y, generator, variant)

    ciphertexts = [scheme.encrypt(he_keys.public, bit, generator) for bit in outcomes]
    width = len(outcomes) // n
    mask = random_bit(generator)
    folded = scheme.encrypt(he_keys.public, mask, generator)
    S2 = 0
    for i, (keys, pick, used) in enumerate(zip(alice.keys, alice.picks, alice.nonzero)):
        if not used:
            continue
        a, b = picked_labels(variant, keys, pick)
        folded = scheme.xor(he_keys.public, folded, ciphertexts[width * i + a - 1])
        folded = scheme.xor(he_keys.public, folded, ciphertexts[width * i + b - 1])
        S2 ^= keys.s2
    masked = scheme.decrypt(he_keys.secret, folded)
    R0 = masked ^ mask

    messages = (
        Message("A->B", "qubits", {"labels": list(range(1, n * variant.protocol_qubits + 1))}),
        Message("B->A", "ciphertexts", {"values": [str(c.value) for c in ciphertexts]}),
        Message("A->B", "ciphertexts", {"values": [str(folded.value)]}),
        Message("B->A", "bits", {"plaintext": masked}),
    )
    run = P3Run(
        variant=variant,
        x=x,
        y=y,
        alice_state=alice,
        bob_state=bob,
        outcomes=tuple(outcomes),
        R0=R0,
        S2=S2,
        output=R0 ^ S2,
        seed=seed,
        he_used=True,
        messages=messages,
    )
    logger.debug(f"Protocol 3 with homomorphic XOR n={n} output={run.output}")
    return run


def bob_plaintext_view(run: P3Run) -> list[int]:
    """Plaintext bits Bob decrypts and sends back to Alice (``B->A``); one masked bit per homomorphic run."""
    return [m.payload["plaintext"] for m in run.messages if m.direction == "B->A" and "plaintext" in m.payload]


def run_p3_batch(
    x: Sequence[int], ys: Sequence[Sequence[int]], rng: RngLike = None, subprocedure_variant: Variant | str = Variant.P1
) -> list[P3Run]:
    """Evaluate several coefficient vectors on one Alice input with a single shared ``k0``.

    Each vector gets its own instances and its own parity group.
    """
    if not ys:
        return []
    generator, seed = resolve_rng(rng)
    shared = random_bit(generator)
    runs = [run_p3(x, y, generator, subprocedure_variant, k0=shared) for y in ys]
    if seed is not None:
        runs = [_with_seed(run, seed) for run in runs]
    return runs


def _with_seed(run: P3Run, seed: int) -> P3Run:
    return replace(run, seed=seed)


@functools.lru_cache(maxsize=None)
def instance_local_bits(
    variant: Variant, x_pair: tuple[int, int], keys: AliceKeys, y_pair: tuple[int, int], k0: int, k1: int
) -> frozenset[int]:
    """Every value the instance contributes to ``R0 ^ S2`` across its measurement branches."""
    if x_pair == (0, 0):
        return frozenset({0})
    state, pick = encode(variant, x_pair, keys)
    if variant is Variant.P2b:
        returned, _ = p2b_bob_step(state, y_pair, k0)
        branches, outputs = p2b_decode(returned, keys, pick, 0, x_pair)
        return frozenset(outputs[b.outcomes[0]] for b in branches)
    a, b = picked_labels(variant, keys, pick)
    return frozenset(
        branch.outcomes[a - 1] ^ branch.outcomes[b - 1] ^ keys.s2
        for branch in bob_measure(variant, state, y_pair, BobKeys(k0, k1))
    )


def enumerate_p3_outputs(
    x: Sequence[int],
    alice_state: P3AliceState,
    y: Sequence[int],
    k0: int,
    k1: Sequence[int],
) -> frozenset[int]:
    """Alice's possible outputs over every measurement branch of a fixed key assignment."""
    pairs_x, pairs_y = _pairs(_check_vector(x)), _pairs(_check_vector(y, "y"))
    outputs = {0}
    for pair_x, keys, pair_y, bit in zip(pairs_x, alice_state.keys, pairs_y, k1):
        local = instance_local_bits(alice_state.variant, pair_x, keys, pair_y, k0, bit)
        outputs = {value ^ extra for value in outputs for extra in local}
    return frozenset(outputs)


def constrained_key_sets(x: Sequence[int], variant: Variant | str = Variant.P1) -> Iterable[P3AliceState]:
    """Every Alice state Protocol 3 can prepare for ``x``: even ``s1`` parity over non-zero instances."""
    variant = Variant.parse(variant)
    pairs = _pairs(_check_vector(x))
    nonzero = tuple(pair != (0, 0) for pair in pairs)
    choices = [list(all_alice_keys(pair, variant)) for pair in pairs]
    for keys in itertools.product(*choices):
        if sum(k.s1 for k, used in zip(keys, nonzero) if used) % 2:
            continue
        picks = tuple(encode(variant, pair, k)[1] for pair, k in zip(pairs, keys))
        yield P3AliceState(variant=variant, keys=tuple(keys), picks=picks, nonzero=nonzero)


def pad_with_decoys(x: Sequence[int], rng: RngLike) -> tuple[tuple[int, ...], DecoyMap]:
    x = _check_vector(x)
    generator, _ = resolve_rng(rng)
    placement = "first" if random_bit(generator) == 0 else "last"
    decoys = tuple(int(b) for b in generator.integers(0, 2, size=len(x)))
    padded = x + decoys if placement == "first" else decoys + x
    return padded, DecoyMap(placement=placement, length=len(x))


def embed_coefficients(y: Sequence[int], decoy_map: DecoyMap) -> tuple[int, ...]:
    """Place Bob's coefficients at the real positions and zeros at the decoys."""
    y = _check_vector(y, "y")
    if len(y) != decoy_map.length:
        raise UsageError(f"coefficients of length {len(y)} do not match a padding of {decoy_map.length}")
    zeros = (0,) * len(y)
    return y + zeros if decoy_map.placement == "first" else zeros + y


def xor_share(y: Sequence[int], shares: int, rng: RngLike) -> list[tuple[int, ...]]:
    """Split ``y`` into ``shares`` uniformly random vectors whose XOR is ``y``."""
    if shares < 1:
        raise UsageError(f"need at least one share, got {shares}")
    y = _bits(y, "y")
    generator, _ = resolve_rng(rng)
    parts = [tuple(int(b) for b in generator.integers(0, 2, size=len(y))) for _ in range(shares - 1)]
    last = list(y)
    for part in parts:
        last = [a ^ b for a, b in zip(last, part)]
    return parts + [tuple(last)]

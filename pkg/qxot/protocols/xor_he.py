"""XOR-homomorphic bit encryption (Goldwasser-Micali).

Desk-scale parameters only: the primes here are 8 to 24 bits and provide no
security. The scheme exists to exercise the one-call homomorphic hybrid of
Protocol 3, and anything implementing :class:`XorHomomorphicScheme` can
replace it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Protocol

import gmpy2
import numpy as np

from qxot.core.config import settings
from qxot.core.exceptions import (
    HeDecryptionError,
    HeKeygenError,
    ModulusMismatchError,
    UsageError,
)
from qxot.core.logging import get_logger
from qxot.core.rng import RngLike, resolve_rng

logger = get_logger("xor_he")


@dataclass(frozen=True)
class HePublicKey:
    n: int
    y: int

    def to_json(self) -> dict[str, Any]:
        return {"n": str(self.n), "y": str(self.y)}


@dataclass(frozen=True)
class HePrivateKey:
    p: int
    q: int

    def to_json(self) -> dict[str, Any]:
        return {"p": str(self.p), "q": str(self.q)}


@dataclass(frozen=True)
class HeKeyPair:
    public: HePublicKey
    secret: HePrivateKey

    def to_json(self) -> dict[str, Any]:
        return {"public": self.public.to_json(), "secret": self.secret.to_json()}


@dataclass(frozen=True)
class HeCiphertext:
    value: int
    modulus: int

    def to_json(self) -> dict[str, Any]:
        return {"value": str(self.value), "modulus": str(self.modulus)}


class XorHomomorphicScheme(Protocol):
    def keygen(self, prime_bits: int, rng: RngLike) -> HeKeyPair: ...

    def encrypt(self, public: HePublicKey, bit: int, rng: RngLike) -> HeCiphertext: ...

    def xor(self, public: HePublicKey, first: HeCiphertext, second: HeCiphertext) -> HeCiphertext: ...

    def decrypt(self, secret: HePrivateKey, ciphertext: HeCiphertext) -> int: ...


def _random_below(bound: int, rng: np.random.Generator) -> int:
    """Uniform integer in ``[0, bound)`` drawn from the generator's byte stream."""
    width = (bound.bit_length() + 7) // 8 + 1
    while True:
        value = int.from_bytes(rng.bytes(width), "big")
        limit = (256**width // bound) * bound
        if value < limit:
            return value % bound


def _random_prime(bits: int, rng: np.random.Generator) -> int:
    for _ in range(settings.HE_KEYGEN_RETRIES):
        candidate = _random_below(1 << (bits - 1), rng) | (1 << (bits - 1))
        prime = int(gmpy2.next_prime(candidate))
        if prime.bit_length() == bits:
            return prime
    raise HeKeygenError(f"no {bits}-bit prime found in {settings.HE_KEYGEN_RETRIES} attempts")


def he_keygen(prime_bits: int = settings.HE_PRIME_BITS, rng: RngLike = None) -> HeKeyPair:
    if prime_bits < settings.HE_MIN_PRIME_BITS:
        raise UsageError(f"prime_bits must be at least {settings.HE_MIN_PRIME_BITS}, got {prime_bits}")
    generator, _ = resolve_rng(rng)
    p = _random_prime(prime_bits, generator)
    q = p
    for _ in range(settings.HE_KEYGEN_RETRIES):
        q = _random_prime(prime_bits, generator)
        if q != p:
            break
    if q == p:
        raise HeKeygenError("could not draw two distinct primes")
    n = p * q
    for _ in range(settings.HE_KEYGEN_RETRIES * 16):
        y = _random_below(n - 2, generator) + 2
        if gmpy2.legendre(y, p) == -1 and gmpy2.legendre(y, q) == -1:
            logger.debug(f"Generated {n.bit_length()}-bit modulus")
            return HeKeyPair(HePublicKey(n, y), HePrivateKey(p, q))
    raise HeKeygenError("no common quadratic non-residue found")


def he_encrypt(public: HePublicKey, bit: int, rng: RngLike = None) -> HeCiphertext:
    if bit not in (0, 1):
        raise UsageError(f"plaintext must be a bit, got {bit!r}")
    generator, _ = resolve_rng(rng)
    while True:
        r = _random_below(public.n - 1, generator) + 1
        if gmpy2.gcd(r, public.n) == 1:
            break
    value = int(gmpy2.powmod(public.y, bit, public.n) * gmpy2.powmod(r, 2, public.n) % public.n)
    return HeCiphertext(value, public.n)


def he_xor(public: HePublicKey, first: HeCiphertext, second: HeCiphertext) -> HeCiphertext:
    if first.modulus != public.n or second.modulus != public.n:
        raise ModulusMismatchError("ciphertexts were produced under different keys")
    return HeCiphertext(first.value * second.value % public.n, public.n)


def he_decrypt(secret: HePrivateKey, ciphertext: HeCiphertext) -> int:
    if ciphertext.modulus != secret.p * secret.q:
        raise ModulusMismatchError("ciphertext was produced under a different key")
    if gmpy2.gcd(ciphertext.value, ciphertext.modulus) != 1:
        raise HeDecryptionError("ciphertext is not coprime to the modulus")
    return 0 if gmpy2.legendre(ciphertext.value, secret.p) == 1 else 1


def he_xor_fold(public: HePublicKey, ciphertexts: list[HeCiphertext]) -> HeCiphertext:
    folded = HeCiphertext(1, public.n)
    for ciphertext in ciphertexts:
        folded = he_xor(public, folded, ciphertext)
    return folded


class GoldwasserMicali:
    """The built-in :class:`XorHomomorphicScheme`."""

    def keygen(self, prime_bits: int, rng: RngLike) -> HeKeyPair:
        return he_keygen(prime_bits, rng)

    def encrypt(self, public: HePublicKey, bit: int, rng: RngLike) -> HeCiphertext:
        return he_encrypt(public, bit, rng)

    def xor(self, public: HePublicKey, first: HeCiphertext, second: HeCiphertext) -> HeCiphertext:
        return he_xor(public, first, second)

    def decrypt(self, secret: HePrivateKey, ciphertext: HeCiphertext) -> int:
        return he_decrypt(secret, ciphertext)

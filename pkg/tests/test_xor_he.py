import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qxot.core.exceptions import ModulusMismatchError, UsageError
from qxot.models.protocol import Variant
from qxot.protocols import linear_eval, xor_he
from tests.settings import QUICK_SETTINGS


@pytest.fixture(scope="module")
def keys():
    return xor_he.he_keygen(16, np.random.default_rng(1))


def test_keygen_shape(keys):
    assert keys.public.n == keys.secret.p * keys.secret.q
    assert keys.secret.p != keys.secret.q
    assert keys.secret.p.bit_length() == 16
    assert keys.to_json()["public"]["n"] == str(keys.public.n)


@given(bits=st.lists(st.integers(0, 1), min_size=1, max_size=8), seed=st.integers(0, 2**32 - 1))
@QUICK_SETTINGS
def test_xor_fold_decrypts_to_parity(keys, bits, seed):
    generator = np.random.default_rng(seed)
    ciphertexts = [xor_he.he_encrypt(keys.public, b, generator) for b in bits]
    for bit, ciphertext in zip(bits, ciphertexts):
        assert xor_he.he_decrypt(keys.secret, ciphertext) == bit
    folded = xor_he.he_xor_fold(keys.public, ciphertexts)
    assert xor_he.he_decrypt(keys.secret, folded) == sum(bits) % 2


def test_encryption_is_randomized(keys, rng):
    first = xor_he.he_encrypt(keys.public, 1, rng)
    second = xor_he.he_encrypt(keys.public, 1, rng)
    assert first.value != second.value


def test_mixing_keys_is_rejected(keys):
    other = xor_he.he_keygen(16, np.random.default_rng(2))
    a = xor_he.he_encrypt(keys.public, 0, 5)
    b = xor_he.he_encrypt(other.public, 1, 5)
    with pytest.raises(ModulusMismatchError):
        xor_he.he_xor(keys.public, a, b)
    with pytest.raises(ModulusMismatchError):
        xor_he.he_decrypt(keys.secret, b)


def test_small_primes_are_refused():
    with pytest.raises(UsageError):
        xor_he.he_keygen(4, 1)
    with pytest.raises(UsageError):
        xor_he.he_encrypt(xor_he.HePublicKey(15, 2), 2, 1)


@pytest.mark.parametrize("variant", [Variant.P1, Variant.P2])
def test_hybrid_matches_plain_run_and_discloses_one_bit(keys, variant):
    x, y = (1, 1, 0, 1, 1, 0), (1, 0, 1, 1, 1, 1)
    for seed in range(40):
        hybrid = linear_eval.run_p3_he(x, y, keys, seed, variant)
        plain = linear_eval.run_p3(x, y, seed, variant)
        assert hybrid.output == plain.output == linear_eval.inner_product(x, y)
        assert hybrid.outcomes == plain.outcomes
        assert len(linear_eval.bob_plaintext_view(hybrid)) == 1
        assert hybrid.messages[-1].direction == "B->A"
        assert linear_eval.bob_plaintext_view(hybrid) == [hybrid.messages[-1].payload["plaintext"]]
        assert linear_eval.bob_plaintext_view(plain) == []


def test_hybrid_refuses_protocol_2b(keys):
    with pytest.raises(UsageError):
        linear_eval.run_p3_he((1, 1), (1, 1), keys, 1, Variant.P2b)


def test_scheme_object_satisfies_the_protocol(keys, rng):
    scheme = xor_he.GoldwasserMicali()
    a, b = scheme.encrypt(keys.public, 1, rng), scheme.encrypt(keys.public, 1, rng)
    assert scheme.decrypt(keys.secret, scheme.xor(keys.public, a, b)) == 0


@pytest.mark.slow
def test_hybrid_transparency_over_many_seeds(keys):
    generator = np.random.default_rng(17)
    for seed in range(1000):
        x = tuple(int(b) for b in generator.integers(0, 2, size=4))
        y = tuple(int(b) for b in generator.integers(0, 2, size=4))
        assert linear_eval.run_p3_he(x, y, keys, seed).output == linear_eval.run_p3(x, y, seed).output

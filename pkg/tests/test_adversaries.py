import itertools

import numpy as np
import pytest

from qxot.core import qsim
from qxot.core.exceptions import UsageError
from qxot.models.attacks import YS, BobStrategy, CheatAliceConfig, Target
from qxot.models.protocol import Variant
from qxot.models.states import DensityOperator, Ket
from qxot.protocols import adversaries

N1_UNIFORM_HOLEVO = 0.5731924


@pytest.mark.parametrize("target", list(Target))
def test_coherent_alice_recovers_both_bits(target):
    result = adversaries.run_cheat_alice(CheatAliceConfig(target=target))
    assert result.average_success == pytest.approx(1.0, abs=1e-9)
    assert len(result.cells) == 16
    assert all(cell.success == pytest.approx(1.0, abs=1e-9) for cell in result.cells)


@pytest.mark.parametrize("target", list(Target))
def test_honest_baseline_is_half(target):
    result = adversaries.run_cheat_alice(CheatAliceConfig(target=target, coherent_keys=False))
    assert result.average_success == pytest.approx(0.5, abs=1e-9)


def test_partial_cheat_fails_only_when_k0_is_set():
    result = adversaries.run_cheat_alice(CheatAliceConfig(target="xor", entangle_third=False))
    assert result.average_success == pytest.approx(0.75, abs=1e-9)
    for (y, k), success in result.success_table.items():
        if k % 2 == 0:
            assert success == pytest.approx(1.0, abs=1e-9), (y, k)


@pytest.mark.parametrize("variant", list(Variant))
def test_attack_is_undetectable(variant):
    config = CheatAliceConfig(variant=variant)
    assert adversaries.undetectability_distance(config) < 1e-10
    honest = adversaries.honest_average(config)
    assert qsim.trace_distance(honest, DensityOperator.maximally_mixed(variant.protocol_qubits)) < 1e-10


@pytest.mark.parametrize("variant", list(Variant))
def test_guess_distributions_are_normalized(variant):
    result = adversaries.run_cheat_alice(CheatAliceConfig(variant=variant))
    for y, distribution in result.guess_distribution().items():
        assert sum(distribution.values()) == pytest.approx(1.0)
    assert 0.0 <= result.average_success <= 1.0


def test_prepared_state_keeps_key_registers_first():
    state = adversaries.cheat_alice_prepare(CheatAliceConfig())
    assert isinstance(state, Ket)
    assert state.num_qubits == 6
    partial = adversaries.cheat_alice_prepare(CheatAliceConfig(entangle_third=False))
    assert isinstance(partial, DensityOperator)


def test_extraction_reads_bobs_bits_from_the_post_key_state():
    config = CheatAliceConfig(target="xor")
    bob = adversaries.xot.all_bob_keys(Variant.P1)[1]
    y = (1, 0)
    for outcomes, operator in adversaries._key_operators(config, y, bob).items():
        probability = float(operator.trace().real)
        if probability <= 1e-12:
            continue
        post = DensityOperator(3, operator / probability)
        assert adversaries.cheat_alice_extract(post, outcomes, bob.k0, config) == y


def test_zero_input_is_refused():
    with pytest.raises(UsageError):
        CheatAliceConfig(x=(0, 0)).input_pair


def test_bob_strategies_at_one_instance():
    z = adversaries.bob_attack_info(BobStrategy.Z_BASIS, 1)
    holevo = adversaries.bob_attack_info("optimal_holevo", 1)
    bell = adversaries.bob_attack_info("Bell_guess", 1)
    assert holevo == pytest.approx(N1_UNIFORM_HOLEVO, abs=1e-6)
    assert z == pytest.approx(holevo, abs=1e-9)
    assert bell <= z + 1e-9


def test_bell_guess_enumerates_one_pair_per_instance():
    guesses = [guess for guess, _ in adversaries.bell_guess_povms(2)]
    assert len(guesses) == 9
    assert len(YS) == 4


def test_coherent_hypotheses_are_perfectly_distinguishable():
    config = CheatAliceConfig(target="xor")
    for k0 in (0, 1):
        for outcomes in adversaries._key_operators(config, YS[0], adversaries.BobKeys(k0, 0)):
            hypotheses = [
                sum(adversaries._key_operators(config, y, adversaries.BobKeys(k0, k1))[outcomes] for k1 in (0, 1))
                for y in YS
            ]
            for i, j in itertools.combinations(range(len(YS)), 2):
                assert abs(np.trace(hypotheses[i] @ hypotheses[j])) < 1e-10, (outcomes, k0, YS[i], YS[j])

import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qxot.core import qsim
from qxot.core.exceptions import InconsistentKeysError, UsageError
from qxot.models.protocol import AliceKeys, BobKeys, PickRecord, Variant
from qxot.models.states import DensityOperator
from qxot.protocols import leakage, xot
from qxot.schemas.schemas import XotTranscript
from tests.settings import STANDARD_SETTINGS

PAIRS = list(itertools.product((0, 1), repeat=2))
VARIANTS = list(Variant)


@pytest.mark.parametrize("variant", VARIANTS)
def test_every_branch_decodes_the_xor(variant):
    for x, y in itertools.product(PAIRS, PAIRS):
        expected = (x[0] & y[0]) ^ (x[1] & y[1])
        cases = list(xot.enumerate_xot_outputs(variant, x, y))
        assert cases
        for case in cases:
            assert case.output == expected, (x, y, case)


@pytest.mark.parametrize("variant", VARIANTS)
def test_branch_probabilities_sum_per_key_assignment(variant):
    totals = {}
    for case in xot.enumerate_xot_outputs(variant, (1, 1), (0, 1)):
        key = (case.alice_keys, case.bob_keys)
        totals[key] = totals.get(key, 0.0) + case.probability
    assert all(total == pytest.approx(1.0) for total in totals.values())


@pytest.mark.parametrize("variant", VARIANTS)
@pytest.mark.parametrize("x", PAIRS)
def test_bob_sees_the_maximally_mixed_state(variant, x):
    view = leakage.bob_view_state(x, variant, parity_constrained=False)
    mixed = DensityOperator.maximally_mixed(variant.protocol_qubits)
    assert qsim.trace_distance(view, mixed) < 1e-10


@given(
    variant=st.sampled_from(VARIANTS),
    x=st.sampled_from(PAIRS),
    y=st.sampled_from(PAIRS),
    seed=st.integers(0, 2**32 - 1),
)
@STANDARD_SETTINGS
def test_sampled_runs_are_correct(variant, x, y, seed):
    run = xot.run_xot(variant, x, y, seed)
    assert run.correct
    assert run.seed == seed
    assert run.messages[0].direction == "A->B"


def test_same_seed_same_run():
    first = xot.run_xot("p1", (1, 0), (1, 1), 7)
    second = xot.run_xot("p1", (1, 0), (1, 1), 7)
    assert first == second
    assert first.output == 1


def test_zero_input_substitutes_a_nonzero_pair():
    run = xot.run_xot("p2b", (0, 0), (1, 1), 1)
    assert run.output == 0
    assert run.alice_keys.effective_x != (0, 0)


def test_psi_encoding_with_trivial_bob_has_even_outcome_pair():
    keys = AliceKeys(0, 0, 0, (1, 1))
    state, pick = xot.p1_encode((1, 1), keys)
    assert pick.bell_pair == (1, 2)
    branches, k0 = xot.p1_bob_step(state, (0, 0), 0)
    assert k0 == 0
    for branch in branches:
        assert branch.outcomes[0] ^ branch.outcomes[1] == 0


def test_p2b_returns_the_pair_inside_the_encoding_subspace():
    keys = AliceKeys(1, 0, 0, (1, 0))
    state, pick = xot.p2_encode((1, 0), keys)
    returned, k0 = xot.p2b_bob_step(state, (1, 1), 1)
    branches, outputs = xot.p2b_decode(returned, keys, pick, k0)
    assert branches.probability_of((2,)) == 0.0
    for branch in branches:
        assert outputs[branch.outcomes[0]] == 1


def test_decode_rejects_mismatched_pick():
    keys = AliceKeys(0, 0, 0, (1, 0))
    with pytest.raises(InconsistentKeysError):
        xot.p1_decode((1, 0), keys, PickRecord(bell_pair=(1, 2)), (0, 0, 0), 0)
    with pytest.raises(InconsistentKeysError):
        xot.p1_encode((0, 1), keys)


def test_bad_inputs_are_usage_errors():
    with pytest.raises(UsageError):
        xot.run_xot("p3", (1, 0), (1, 1), 1)
    with pytest.raises(UsageError):
        xot.run_xot("p1", (1, 0, 1), (1, 1), 1)
    with pytest.raises(UsageError):
        BobKeys.from_k(4)


@pytest.mark.parametrize("x", [(1, 0), (0, 1), (1, 1)])
def test_honest_posterior_only_keeps_consistent_inputs(x):
    for keys in xot.all_alice_keys(x):
        state, pick = xot.p1_encode(x, keys)
        for bob in xot.all_bob_keys(Variant.P1):
            for branch in xot.p1_bob_step(state, (1, 1), bob)[0]:
                output = xot.p1_decode(x, keys, pick, branch.outcomes, bob.k0)
                posterior = xot.honest_posterior(x, keys, branch.outcomes, bob.k0)
                consistent = sum(p for y, p in posterior.items() if (x[0] & y[0]) ^ (x[1] & y[1]) == output)
                assert consistent == pytest.approx(1.0)
                assert sum(posterior.values()) == pytest.approx(1.0)


@pytest.mark.parametrize("variant", VARIANTS)
def test_transcript_nests_each_party(variant):
    run = xot.run_xot(variant, (0, 1), (1, 1), 12)
    data = XotTranscript.from_run(run).model_dump(mode="json")
    assert data["alice"]["x"] == [0, 1]
    assert data["alice"]["keys"] == run.alice_keys.to_json()
    assert data["bob"] == {"y": [1, 1], "keys": run.bob_keys.to_json()}
    assert data["output"] == run.output == 1
    assert data["messages"][0]["dir"] == "A->B"

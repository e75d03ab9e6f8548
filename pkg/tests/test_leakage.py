import itertools

import pytest

from qxot.core import qsim
from qxot.core.exceptions import InvariantViolation, ResourceCapError, UsageError
from qxot.models.attacks import CheatAliceConfig
from qxot.models.protocol import Variant
from qxot.models.reports import LeakageReport, LeakageScenario
from qxot.models.states import DensityOperator
from qxot.protocols import leakage

PAIRS_EQUAL_N2_HOLEVO = 0.6302408


def test_resolve_prior():
    uniform = leakage.resolve_prior("uniform", 2)
    assert len(uniform) == 16
    assert sum(uniform.values()) == pytest.approx(1.0)
    pairs = leakage.resolve_prior("pairs_equal", 2)
    assert set(pairs) == {(0, 0, 0, 0), (0, 1, 0, 1), (1, 0, 1, 0), (1, 1, 1, 1)}
    assert leakage.resolve_prior("point:0110", 2) == {(0, 1, 1, 0): 1.0}
    custom = leakage.resolve_prior({"11": 3, "01": 1}, 1)
    assert custom == {(1, 1): 0.75, (0, 1): 0.25}
    with pytest.raises(UsageError):
        leakage.resolve_prior("gaussian", 2)
    with pytest.raises(UsageError):
        leakage.resolve_prior("point:012", 1)


def test_view_states_are_diagonal():
    for x in itertools.product((0, 1), repeat=4):
        assert leakage.bob_view_state(x).is_diagonal()


def test_one_bit_bound_at_two_instances():
    report = leakage.make_report(LeakageScenario("uniform-2", n=2))
    assert report.holevo_bits <= 1.0 + 1e-9
    assert report.strategies["Z_basis"] <= 1.0 + 1e-9
    assert report.strategies["Z_basis"] == pytest.approx(report.holevo_bits, abs=1e-9)
    assert report.strategies["Bell_guess"] <= report.strategies["Z_basis"] + 1e-9
    assert report.entropy_of_secret == pytest.approx(4.0)


def test_pairs_equal_prior():
    ensemble = leakage.bob_view_ensemble(2, "pairs_equal")
    assert qsim.holevo_information(ensemble) == pytest.approx(PAIRS_EQUAL_N2_HOLEVO, abs=1e-6)


def test_leakage_fraction_for_a_biased_prior_stays_small():
    uniform = leakage.make_report(LeakageScenario("u", n=2, strategies=("optimal_holevo",)))
    biased = leakage.make_report(LeakageScenario("b", n=2, prior="pairs_equal", strategies=("optimal_holevo",)))
    assert biased.entropy_of_secret == pytest.approx(2.0)
    assert biased.leakage_fraction["optimal_holevo"] <= 0.5
    assert uniform.leakage_fraction["optimal_holevo"] <= 0.25 + 1e-9


def test_parity_free_view_carries_nothing():
    mixed = DensityOperator.maximally_mixed(6)
    for x in itertools.product((0, 1), repeat=4):
        view = leakage.bob_view_state(x, parity_constrained=False)
        assert qsim.trace_distance(view, mixed) < 1e-9
    ensemble = leakage.bob_view_ensemble(2, parity_constrained=False)
    assert qsim.holevo_information(ensemble) == pytest.approx(0.0, abs=1e-9)


def test_marginal_view_carries_no_more_than_the_full_view():
    full = qsim.holevo_information(leakage.bob_view_ensemble(2))
    for positions in ([0], [0, 1], [1, 3]):
        marginal = leakage.marginal_view_ensemble(2, positions)
        assert qsim.holevo_information(marginal) <= full + 1e-9
    with pytest.raises(UsageError):
        leakage.marginal_view_ensemble(2, [4])


def test_honest_alice_learns_at_most_half_of_bobs_bits():
    cheat = CheatAliceConfig(coherent_keys=False)
    report = leakage.make_report(LeakageScenario("alice", n=1, party="alice", strategies=("optimal_holevo",), cheat=cheat))
    assert 0.0 <= report.holevo_bits <= 1.0 + 1e-9
    assert report.entropy_of_secret == pytest.approx(2.0)


def test_alice_view_rejects_returned_variant():
    with pytest.raises(UsageError):
        leakage.alice_view_ensemble(1, CheatAliceConfig(variant=Variant.P2b))


def test_caps():
    with pytest.raises(ResourceCapError):
        leakage.bob_view_ensemble(4)
    with pytest.raises(ResourceCapError):
        leakage.alice_view_ensemble(3)
    with pytest.raises(UsageError):
        leakage.bob_view_ensemble(0)


def test_report_check_flags_information_above_holevo():
    report = LeakageReport("bad", 1, "uniform", "bob", {"Z_basis": 0.9}, holevo_bits=0.5, entropy_of_secret=2.0)
    with pytest.raises(InvariantViolation):
        leakage._check_report(report)


def test_csv_rows(tmp_path):
    report = leakage.make_report(LeakageScenario("uniform-1", n=1))
    path = leakage.write_report_csv([report], tmp_path / "out.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "scenario,n,prior,strategy,bits"
    assert len(lines) == 4
    assert lines[1].startswith("uniform-1,1,uniform,Z_basis,0.573192")


@pytest.mark.slow
def test_one_bit_bound_at_three_instances():
    ensemble = leakage.bob_view_ensemble(3)
    holevo = qsim.holevo_information(ensemble)
    assert holevo <= 1.0 + 1e-9
    assert qsim.measured_mutual_information(ensemble, qsim.Povm.computational(9)) < 1.0

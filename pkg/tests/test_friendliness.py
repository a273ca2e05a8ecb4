import math

import numpy as np
import pytest

from moduls.parameters import ChannelParams, MessageOutcome
from moduls.qcore import DensityMatrix, EmptyInputError, LayoutMismatchError, Operator, partial_trace, tensor
from moduls.simulation.channel import theta_grid
from moduls.simulation.friendliness import (
    LAYOUT_1,
    LAYOUT_12F,
    LAYOUT_2F,
    TSIRELSON_BOUND,
    ChshSpec,
    ChshTerm,
    ConditionalChshRow,
    ObservableSet,
    channel_extended_state,
    chsh_value,
    closed_form_conditional_chsh,
    conditional_chsh,
    conditional_chsh_rows,
    conditional_expectation,
    extended_record_state,
    extended_state,
    friend_conditioned_expectation,
    message_probability,
    sweep_chsh,
    unconditioned_chsh,
    violating_message,
)

SQRT2 = math.sqrt(2.0)
TOL = 1e-12
OBS = ObservableSet.default()
N0, N1 = MessageOutcome.ZERO, MessageOutcome.ONE
PARAM_SAMPLES = [ChannelParams(0.0, 0.0), ChannelParams(0.3, 0.7), ChannelParams(math.pi / 4, 1.0), ChannelParams(2.5, 4.0)]


def test_extended_state_is_maximally_entangled():
    state = extended_state()
    assert np.linalg.norm(state.amplitudes) == pytest.approx(1.0, abs=TOL)
    reduced = partial_trace(state.density(), ["2", "F"])
    np.testing.assert_allclose(reduced.entries, np.eye(2) / 2, atol=TOL)


def test_single_correlator_on_extended_state():
    rho = extended_state().density()
    single = ChshSpec((ChshTerm("z", "z", 1), ChshTerm("x", "z", 1), ChshTerm("z", "x", -1), ChshTerm("x", "x", 1)))
    assert chsh_value(rho, single) == pytest.approx(2 * SQRT2, abs=TOL)
    bz_wz = tensor([OBS.bob_z, OBS.wigner_z])
    assert np.real(np.trace(bz_wz.entries @ rho.entries)) == pytest.approx(1 / SQRT2, abs=TOL)


def test_chsh_without_record_reaches_tsirelson_bound():
    assert chsh_value(extended_state().density()) == pytest.approx(2 * SQRT2, abs=TOL)


def test_chsh_with_record_is_local():
    record = extended_record_state().density()
    assert chsh_value(record) == pytest.approx(SQRT2, abs=TOL)
    assert chsh_value(partial_trace(record, "R")) == pytest.approx(SQRT2, abs=TOL)


def test_chsh_on_maximally_mixed_state_vanishes():
    assert chsh_value(DensityMatrix.maximally_mixed(LAYOUT_12F)) == pytest.approx(0.0, abs=TOL)


def test_chsh_requires_bob_and_wigner_factors():
    rho = DensityMatrix.maximally_mixed(LAYOUT_2F)
    with pytest.raises(LayoutMismatchError):
        chsh_value(rho)


def test_only_default_pattern_violates_on_this_state():
    rho = extended_state().density()
    values = {spec.subtracted: chsh_value(rho, spec) for spec in ChshSpec.variants()}
    assert set(values) == {"zz", "xz", "zx", "xx"}
    assert values["zx"] == pytest.approx(2 * SQRT2, abs=TOL)
    for key in ("zz", "xz", "xx"):
        assert values[key] == pytest.approx(0.0, abs=TOL)


def test_chsh_spec_validation():
    with pytest.raises(ValueError):
        ChshSpec.from_key("zy")
    with pytest.raises(ValueError):
        ChshSpec((ChshTerm("z", "z", -1), ChshTerm("x", "z", 1), ChshTerm("z", "x", -1), ChshTerm("x", "x", 1)))
    with pytest.raises(ValueError):
        ChshSpec((ChshTerm("z", "z", 1), ChshTerm("z", "z", 1), ChshTerm("z", "x", -1), ChshTerm("x", "x", 1)))
    assert ChshSpec.default().pattern() == (("z", "z", 1), ("x", "z", 1), ("z", "x", -1), ("x", "x", 1))


def test_observable_set_validation():
    with pytest.raises(ValueError):
        ObservableSet(
            bob_z=Operator(LAYOUT_1, 2 * np.eye(2), hermitian=True),
            bob_x=OBS.bob_x,
            wigner_z=OBS.wigner_z,
            wigner_x=OBS.wigner_x,
        )
    with pytest.raises(ValueError):
        ObservableSet(
            bob_z=OBS.bob_z,
            bob_x=OBS.bob_x,
            wigner_z=Operator(LAYOUT_2F, np.diag([1, 1, 0, -1]), hermitian=True),
            wigner_x=OBS.wigner_x,
        )


def test_channel_does_not_change_reduced_state():
    reference = partial_trace(channel_extended_state(ChannelParams(0.0, 0.0)), "R").entries
    other = partial_trace(channel_extended_state(ChannelParams(math.pi / 4, 1.0)), "R").entries
    np.testing.assert_allclose(reference, other, atol=TOL)


@pytest.mark.parametrize("params", PARAM_SAMPLES)
def test_messages_are_equally_likely(params):
    rho = channel_extended_state(params)
    for n in MessageOutcome:
        assert message_probability(rho, n, params) == pytest.approx(0.5, abs=TOL)


@pytest.mark.parametrize("params", PARAM_SAMPLES)
def test_conditional_correlators(params):
    rho = channel_extended_state(params)
    for n in MessageOutcome:
        for bob in (OBS.bob_z, OBS.bob_x):
            assert conditional_expectation(rho, bob, OBS.wigner_z, n, params) == pytest.approx(1 / SQRT2, abs=TOL)
        bz_wx = conditional_expectation(rho, OBS.bob_z, OBS.wigner_x, n, params)
        bx_wx = conditional_expectation(rho, OBS.bob_x, OBS.wigner_x, n, params)
        sign = 1.0 if n == N0 else -1.0
        assert bz_wx == pytest.approx(-sign * math.sin(2 * params.theta) * math.cos(params.phi) / SQRT2, abs=TOL)
        assert bx_wx == pytest.approx(-bz_wx, abs=TOL)


def test_maximal_violation_for_unbiased_messages():
    params = ChannelParams(math.pi / 4, 0.0)
    assert conditional_chsh(N0, params).value == pytest.approx(2 * SQRT2, abs=TOL)
    assert conditional_chsh(N1, params).value == pytest.approx(0.0, abs=TOL)
    assert violating_message(params) is N0
    assert violating_message(ChannelParams(math.pi / 4, math.pi)) is N1


@pytest.mark.parametrize("theta", [0.0, math.pi / 2])
def test_revealing_channel_gives_local_value(theta):
    for phi in (0.0, 1.2):
        params = ChannelParams(theta, phi)
        for n in MessageOutcome:
            assert conditional_chsh(n, params).value == pytest.approx(SQRT2, abs=TOL)
        assert violating_message(params) is None


@pytest.mark.parametrize("phi", [0.0, math.pi / 4, math.pi / 2, math.pi])
def test_sweep_matches_closed_form(phi):
    rows = sweep_chsh(phi, theta_grid(181))
    assert len(rows) == 2 * 181
    for zero, one in zip(rows[0::2], rows[1::2]):
        assert (zero.n, one.n) == (N0, N1)
        assert zero.theta == one.theta
        params = ChannelParams(zero.theta, phi)
        assert zero.value == pytest.approx(closed_form_conditional_chsh(N0, params), abs=TOL)
        assert one.value == pytest.approx(closed_form_conditional_chsh(N1, params), abs=TOL)
        assert zero.value + one.value == pytest.approx(2 * SQRT2, abs=1e-11)
        assert zero.message_probability * zero.value + one.message_probability * one.value == pytest.approx(SQRT2, abs=TOL)
        assert not (zero.violates and one.violates)
        assert abs(zero.value) <= TSIRELSON_BOUND + 1e-10


def test_sweep_value_at_eighth_pi():
    rows = sweep_chsh(0.0, [math.pi / 8])
    assert rows[0].value == pytest.approx(SQRT2 + 1.0, abs=TOL)


def test_sweep_rejects_empty_grid():
    with pytest.raises(EmptyInputError):
        sweep_chsh(0.0, [])


def test_unconditioned_chsh_is_local(random_triples):
    for _, _, params in random_triples:
        assert unconditioned_chsh(params) == pytest.approx(SQRT2, abs=TOL)


def test_tsirelson_bound_is_enforced():
    with pytest.raises(ValueError):
        ConditionalChshRow(N0, 0.0, 0.0, 3.0, 0.5)


@pytest.mark.parametrize("condition_on", ["R", "F"])
def test_conditioning_on_friend_outcome_removes_wigner_x(condition_on):
    for outcome in (0, 1):
        for bob in (OBS.bob_z, OBS.bob_x):
            value = friend_conditioned_expectation(bob, OBS.wigner_x, outcome, condition_on)
            assert value == pytest.approx(0.0, abs=TOL)
        value = friend_conditioned_expectation(OBS.bob_z, OBS.wigner_z, outcome, condition_on)
        assert value == pytest.approx(1 / SQRT2, abs=TOL)


def test_friend_conditioning_rejects_other_factors():
    with pytest.raises(ValueError):
        friend_conditioned_expectation(OBS.bob_z, OBS.wigner_z, 0, "S")


@pytest.mark.parametrize("params", PARAM_SAMPLES)
@pytest.mark.parametrize("spec", ChshSpec.variants(), ids=lambda spec: spec.subtracted)
def test_conditional_rows_match_term_by_term_expectations(params, spec):
    rho = channel_extended_state(params)
    rows = conditional_chsh_rows(params, spec)
    for n, row in zip(MessageOutcome, rows):
        expected = sum(
            term.sign * conditional_expectation(rho, OBS.bob(term.bob), OBS.wigner(term.wigner), n, params)
            for term in spec.terms
        )
        assert row.n is n
        assert row.value == pytest.approx(expected, abs=TOL)
        assert row.message_probability == pytest.approx(message_probability(rho, n, params), abs=TOL)
        assert conditional_chsh(n, params, spec).value == row.value


def test_default_observables_are_shared():
    assert ObservableSet.default() is ObservableSet.default()


def test_conditional_expectation_without_message_factor():
    with pytest.raises(LayoutMismatchError):
        conditional_expectation(extended_state().density(), OBS.bob_z, OBS.wigner_z, N0, ChannelParams(0.3, 0.0))

import math

import numpy as np
import pytest

from bellnoise import channels, criteria, scenarios, states
from bellnoise.channels import InteractionMode, QubitChannel
from bellnoise.errors import InvalidArgumentError, NotChiFormError
from bellnoise.linalg import IDENTITY2
from bellnoise.scenarios import IntervalSet
from bellnoise.states import ChiForm

import frozen
import oracles
from conftest import random_chi_forms

SINGLE, DOUBLE = InteractionMode.SINGLE_BOB, InteractionMode.DOUBLE
FAMILY_08 = states.gisin_state(0.8, 0.6)


def _pairs(s: IntervalSet):
    return tuple(s.intervals)


def _close(got: IntervalSet, want, tol):
    return len(got) == len(want) and all(
        abs(a - b) <= tol for x, y in zip(got.intervals, want) for a, b in zip(x, y)
    )


def test_interval_set_basics():
    s = IntervalSet.from_pairs([(0.5, 0.6), (0.1, 0.2), (0.6 + 1e-10, 0.7)], merge_gap=2e-9)
    assert _pairs(s) == ((0.1, 0.2), (0.5, 0.7))
    assert 0.15 in s and 0.3 not in s and 0.7 in s
    assert len(s) == 2 and not s.is_empty
    assert IntervalSet().is_empty and str(IntervalSet()) == "--"
    assert str(IntervalSet(((0.0, 1.0),))) == "[0.0000, 1.0000]"
    assert s.as_list() == [[0.1, 0.2], [0.5, 0.7]]
    with pytest.raises(InvalidArgumentError):
        IntervalSet(((0.3, 0.2),))
    with pytest.raises(InvalidArgumentError):
        IntervalSet(((0.1, 0.5), (0.4, 0.6)))
    with pytest.raises(InvalidArgumentError):
        IntervalSet(((-0.1, 0.5),))


def test_interval_set_comparisons():
    a = IntervalSet(((0.2, 0.8),))
    b = IntervalSet(((0.1, 0.9),))
    assert a.issubset(b) and not b.issubset(a)
    assert IntervalSet().issubset(a)
    assert b.deviation(a) == pytest.approx(0.1)
    assert a.deviation(IntervalSet()) == math.inf
    assert IntervalSet().deviation(IntervalSet()) == 0.0


@pytest.mark.parametrize(
    "channel, criterion, expected",
    [
        ("phase-flip", "M", (0.025834, 0.974166)),
        ("bit-flip", "M", (0.053158, 0.946842)),
        ("phase-flip", "B", (0.174260, 0.825740)),
        ("dephasing-effective", "M", (0.051667, 1.0)),
    ],
)
def test_scan_worked_examples(channel, criterion, expected):
    got = scenarios.predicate_scan(FAMILY_08, channel, SINGLE, criterion)
    assert _close(got, [expected], 1e-6)


def test_scan_stated_phase_damping():
    for (mode, _, lam), want in frozen.STATED_PHASE_DAMPING.items():
        initial = states.gisin_state(lam, 0.6)
        got = scenarios.predicate_scan(initial, "phase-damping", InteractionMode.parse(mode), "M")
        assert _close(got, want[0], 1e-6)


def test_scan_live_oracle_spot_check():
    want = oracles.local_range(0.8, 0.6, "bit-flip", True, "A")
    got = scenarios.predicate_scan(FAMILY_08, "bit-flip", DOUBLE, "A")
    assert _close(got, want, 1e-6)


def test_identity_like_channel_gives_empty_set():
    def noop(p):
        return QubitChannel("noop", p, (IDENTITY2,))

    bell = states.named_state("phi_plus")
    assert scenarios.predicate_scan(bell, noop, SINGLE, "M").is_empty
    # the maximally mixed state is local everywhere
    full = scenarios.predicate_scan(states.validate(np.eye(4) / 4), "bit-flip", DOUBLE, "A")
    assert _pairs(full) == ((0.0, 1.0),)


def test_scan_argument_errors():
    with pytest.raises(InvalidArgumentError, match="grid"):
        scenarios.predicate_scan(FAMILY_08, "bit-flip", SINGLE, "M", grid_n=2)
    with pytest.raises(InvalidArgumentError, match="tol"):
        scenarios.predicate_scan(FAMILY_08, "bit-flip", SINGLE, "M", tol=0)
    with pytest.raises(InvalidArgumentError, match="criterion"):
        scenarios.predicate_scan(FAMILY_08, "bit-flip", SINGLE, "Q")
    with pytest.raises(InvalidArgumentError, match="channel"):
        scenarios.predicate_scan(FAMILY_08, "amplitude-damping", SINGLE, "M")


def test_coarse_grid_triggers_rescan():
    # with three grid points both crossings fall inside one wide bracket pair
    coarse = scenarios.predicate_scan(FAMILY_08, "phase-flip", SINGLE, "B", grid_n=3)
    fine = scenarios.predicate_scan(FAMILY_08, "phase-flip", SINGLE, "B")
    assert coarse.deviation(fine) <= 1e-8

    # a narrow local window [0.49, 0.51]: fewer than two steps of a 41-point grid
    def window(p):
        strength = 1.0 if 0.49 <= p <= 0.51 else 0.0
        return channels.depolarizing(0.75 * strength)

    got = scenarios.predicate_scan(states.named_state("phi_plus"), window, SINGLE, "M", grid_n=41)
    assert _close(got, [(0.49, 0.51)], 1e-8)


def test_scan_is_deterministic():
    a = scenarios.predicate_scan(FAMILY_08, "bit-flip", DOUBLE, "B")
    b = scenarios.predicate_scan(FAMILY_08, "bit-flip", DOUBLE, "B")
    assert a == b


@pytest.mark.parametrize("channel", ["phase-flip", "bit-flip"])
@pytest.mark.parametrize("lam", [0.95, 0.8])
def test_flip_interval_symmetry(channel, lam):
    for mode in (SINGLE, DOUBLE):
        for crit in "MAB":
            s = scenarios.predicate_scan(states.gisin_state(lam, 0.6), channel, mode, crit)
            for lo, hi in s.intervals:
                assert any(abs(1 - hi - a) <= 2e-9 and abs(1 - lo - b) <= 2e-9 for a, b in s.intervals)


def test_table_shape_and_containment(tables):
    rows, _ = tables
    assert len(rows) == 16
    for row in rows:
        assert row.r2.issubset(row.r1, tol=1e-9)
        assert row.r3.issubset(row.r1, tol=1e-9) or row.r3.is_empty
    by_key = {(r.mode, r.channel, r.lam): r for r in rows}
    for channel in ("depolarizing", "phase-damping"):
        for lam in (0.95, 0.8):
            single, double = by_key[("single", channel, lam)], by_key[("double", channel, lam)]
            for a, b in zip(single.ranges, double.ranges):
                assert a.issubset(b, tol=1e-9)


def test_table_rows_match_frozen_oracle(tables):
    rows, _ = tables
    for row in rows:
        key = (row.mode, row.channel, row.lam)
        oracle_key = (row.mode, "dephasing-effective", row.lam) if row.channel == "phase-damping" else key
        for got, want in zip(row.ranges, frozen.ORACLE_RANGES[oracle_key]):
            assert _close(got, want, 1e-6), (key, got, want)
        if row.channel == "phase-damping":
            assert row.convention == "effective"
            stated = frozen.STATED_PHASE_DAMPING[key]
            assert all(_close(g, w, 1e-6) for g, w in zip(row.stated_ranges, stated))


def test_worked_table_examples(tables):
    rows, report = tables
    by_key = {(r.mode, r.channel, r.lam): r for r in rows}
    assert _close(by_key[("double", "phase-flip", 0.8)].r1, [(0.013088, 0.986912)], 1e-6)
    assert _close(by_key[("double", "phase-flip", 0.95)].r1, [(0.149184, 0.850816)], 1e-6)
    dep = by_key[("single", "depolarizing", 0.95)]
    assert _close(dep.r1, [(0.155957, 1.0)], 1e-6) and dep.flags[0]
    assert report.flagged("single", "depolarizing", 0.95, "M")
    assert by_key[("single", "phase-flip", 0.95)].r3.is_empty
    assert not report.flagged("single", "phase-flip", 0.8)
    assert all(e.deviation > report.threshold for e in report.entries)


def test_nonlocal_region_examples():
    pts = scenarios.nonlocal_region([1.0, 0.4, 0.0], [math.pi / 4, 0.3])
    by = {(p.lam, p.theta): p for p in pts}
    bell = by[(1.0, math.pi / 4)]
    assert bell.m_value == pytest.approx(2, abs=1e-12) and bell.nonlocal_
    weak = by[(0.4, math.pi / 4)]
    assert weak.m_value == pytest.approx(0.32, abs=1e-12) and not weak.nonlocal_
    for theta in (math.pi / 4, 0.3):
        flat = by[(0.0, theta)]
        assert flat.m_value == pytest.approx(1, abs=1e-12) and not flat.nonlocal_
    with pytest.raises(InvalidArgumentError, match="lambda"):
        scenarios.nonlocal_region([1.2], [0.1])
    with pytest.raises(InvalidArgumentError, match="theta"):
        scenarios.nonlocal_region([0.5], [2.0])


def test_nonlocal_region_matches_closed_form():
    lams, thetas = np.linspace(0, 1, 21), np.linspace(0, math.pi / 2, 21)
    for p in scenarios.nonlocal_region(lams, thetas):
        assert abs(p.m_value - oracles.gisin_m_closed_form(p.lam, p.theta)) <= 1e-10


@pytest.mark.parametrize("key", sorted(frozen.LHS))
def test_lhs_scenarios(key):
    (q, s), channel, mode = key
    p_star, p_tol, dist = frozen.LHS[key]
    res = scenarios.lhs_scenario(q, s, channel, InteractionMode.parse(mode))
    assert abs(res.p_star - p_star) <= p_tol
    # the distance has a corner at its minimum, so a 1e-6 bracket costs ~1e-7
    assert res.distance == pytest.approx(dist, abs=1e-7)
    rep = res.report
    assert rep.chsh_local and rep.absolutely_chsh_local and rep.absolutely_3settings_unsteerable
    target = states.rho_f().mat
    assert np.max(np.abs(res.state.mat - target)) == pytest.approx(res.distance, abs=1e-15)


def test_lhs_stated_phase_damping_reaches_same_state():
    eff = scenarios.lhs_scenario(0.96, 0.74, "phase-damping", SINGLE, convention="effective")
    stated = scenarios.lhs_scenario(0.96, 0.74, "phase-damping", SINGLE)
    assert stated.distance == pytest.approx(eff.distance, abs=1e-8)
    assert stated.p_star == pytest.approx(1 - (1 - eff.p_star) ** 2, abs=1e-3)


def test_golden_min():
    x = scenarios._golden_min(lambda p: (p - 0.3) ** 2, 0.0, 1.0, 1e-9)
    assert x == pytest.approx(0.3, abs=1e-8)


def test_breaking_epsilon_examples():
    assert scenarios.breaking_epsilon(states.werner_state(1)) == pytest.approx(0.5, abs=1e-12)
    assert scenarios.breaking_epsilon(ChiForm(np.zeros(3), np.zeros(3))) == 1.0
    assert scenarios.breaking_epsilon(ChiForm([0, 0, 1], np.zeros(3))) == 1.0
    assert scenarios.breaking_epsilon(ChiForm([0, 0, 0.6], [0.3, 0.3, 0.3])) == 1.0
    with pytest.raises(NotChiFormError):
        scenarios.breaking_epsilon(FAMILY_08)


def test_breaking_epsilon_is_tight(rng):
    for chi in random_chi_forms(rng, 200):
        eps = scenarios.breaking_epsilon(chi)
        assert scenarios.breaking_lhs(chi, eps) <= 1 + 1e-9
        if eps < 1:
            assert scenarios.breaking_lhs(chi, eps) == pytest.approx(1, abs=1e-9)
            assert scenarios.breaking_lhs(chi, eps + 1e-6) > 1


def test_breaking_epsilon_shrunk_state_is_unsteerable(rng):
    for chi in random_chi_forms(rng, 5):
        eps = scenarios.breaking_epsilon(chi)
        shrunk = ChiForm(eps * np.asarray(chi.a), eps * np.asarray(chi.t_diag))
        assert criteria.unsteerable_sufficient(shrunk).verdict_relaxed


def test_epsilon_p_conversion():
    assert scenarios.epsilon_to_p(1) == 0
    assert scenarios.epsilon_to_p(0) == 0.75
    assert scenarios.epsilon_to_p(0.76) == pytest.approx(0.18, abs=1e-15)
    for eps in np.linspace(0, 1, 11):
        assert scenarios.p_to_epsilon(scenarios.epsilon_to_p(eps)) == pytest.approx(eps, abs=1e-15)
    with pytest.raises(InvalidArgumentError):
        scenarios.epsilon_to_p(1.1)
    with pytest.raises(InvalidArgumentError):
        scenarios.p_to_epsilon(0.8)

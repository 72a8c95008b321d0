import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from attrlearn.core_model import InvalidArgument, Prior
from attrlearn.equilibrium import equilibrium_allocation
from attrlearn.organizations import (
    OrgSpec,
    Region,
    check_against_equilibrium,
    classify_region,
    compose_weights,
    cs_beta_scan,
    cs_gamma_scan,
    distortion_thresholds,
    game_of,
    gamma_bounds,
    in_no_test_rectangle,
    manager_first_best,
    manager_payoff,
    region_map,
)

UNIT = Prior([0, 0], [1, 1])


def test_compose_weights_examples():
    assert np.array_equal(compose_weights(OrgSpec([2, 1], 1.0, 0.0, UNIT, 1)), [2, 1])
    assert np.array_equal(compose_weights(OrgSpec([2, 1], 0.5, 0.0, UNIT, 1)), [1, 0.5])
    assert compose_weights(OrgSpec([2, 1], 1.0, 0.5, UNIT, 1)) == pytest.approx([1.5, 2.0], abs=1e-15)


def test_gamma_outside_admissible_set_rejected():
    lo, hi = gamma_bounds([2, 1], 1.0)
    assert (lo, hi) == (-0.5, 2.0)
    with pytest.raises(InvalidArgument):
        OrgSpec([2, 1], 1.0, 2.01, UNIT, 1)
    with pytest.raises(InvalidArgument):
        OrgSpec([2, 1], 1.0, -0.51, UNIT, 1)
    with pytest.raises(InvalidArgument):
        OrgSpec([2, 0], 1.0, 0.0, UNIT, 1)


def test_distortion_threshold_examples():
    t = distortion_thresholds([3, 2], 0.5)
    assert t.gamma1 == 0 and t.gamma2 == 0
    t = distortion_thresholds([1, 1], 0.25)
    assert (t.gamma1, t.gamma2, t.beta1, t.beta2) == pytest.approx((-0.25, 0.25, 0.25, 0.25), abs=1e-15)
    for b in (0.1, 0.7, 3.0):
        t = distortion_thresholds([2, 1], b)
        assert (t.beta1, t.beta2) == pytest.approx((0.4, 0.1), abs=1e-15)


def test_classify_region_examples():
    r = classify_region(OrgSpec([1, 1], 0.3, 0.0, UNIT, 1))
    assert r.label is Region.L0 and np.array_equal(r.tau, [0, 0])
    r = classify_region(OrgSpec([2, 1], 1.0, 0.0, UNIT, 4))
    assert r.label is Region.L12 and r.tau == pytest.approx([3, 1], abs=1e-12)
    hi = gamma_bounds([1, 1], 1.0)[1]
    spec = OrgSpec([1, 1], 1.0, hi * 0.99, UNIT, 1)
    r = classify_region(spec)
    assert r.label is Region.L2 and r.tau == pytest.approx([0, 1], abs=1e-15)
    assert check_against_equilibrium(spec)


def test_manager_payoff_examples():
    ad = np.array([1.5, 0.5])
    p = Prior([0, 0], [2.0, 1.0])
    assert manager_payoff(OrgSpec(ad, 0.2, 0.0, p, 1.0)) == pytest.approx(-(ad**2 @ p.sigma0), abs=1e-15)
    assert manager_payoff(OrgSpec(ad, 1.0, 0.0, p, 1.0)) == pytest.approx(manager_first_best(ad, p, 1.0), abs=1e-15)
    hi = gamma_bounds([1, 1], 0.3)[1]
    assert manager_payoff(OrgSpec([1, 1], 0.3, hi, UNIT, 1)) > manager_payoff(OrgSpec([1, 1], 0.3, 0.0, UNIT, 1))


def test_gamma_scan_examples():
    grid = np.arange(0, 3.0001, 0.01)
    up = cs_gamma_scan([1, 1], 0.4, UNIT, 1.0, grid)
    down = cs_gamma_scan([1, 1], 0.8, UNIT, 1.0, grid)
    assert up.direction == "increasing" and up.ok
    assert down.direction == "decreasing" and down.ok
    assert up.skipped  # magnitudes beyond the admissible bound are reported


def test_beta_scan_examples():
    grid = np.arange(0, 2.0001, 0.01)
    rep = cs_beta_scan([1, 1], 0.0, UNIT, 1.0, grid)
    assert rep.ok
    vals = dict(rep.points)
    first_best = manager_first_best([1, 1], UNIT, 1.0)
    assert vals[0.49] == pytest.approx(-2.0, abs=1e-15)
    assert all(v == pytest.approx(first_best, abs=1e-12) for b, v in rep.points if b > 0.5)
    rep = cs_beta_scan([1, 1], 0.2, UNIT, 1.0, np.linspace(0, 100, 2001))
    assert rep.ok and rep.skipped
    assert rep.points[-1][1] == pytest.approx(first_best, abs=1e-5)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 5), st.floats(0.2, 5), st.floats(0.2, 5), st.floats(0.2, 5), st.floats(0.1, 10), st.floats(0, 2))
def test_scans_random_instances(a1, a2, s1, s2, T, beta):
    p = Prior([0, 0], [s1, s2])
    assert cs_gamma_scan([a1, a2], beta, p, T, np.arange(0, 5, 0.05)).ok
    assert cs_beta_scan([a1, a2], 0.1 * (a1 - a2), p, T, np.arange(0, 3, 0.05)).ok


def test_closed_form_matches_equilibrium_on_lattice():
    ad, p = [2.0, 1.0], Prior([0, 0], [1.5, 0.7])
    rows = region_map(ad, p, 1.3, beta_max=2.0, beta_steps=100, gamma_steps=100)
    assert len(rows) == 10_000
    for r in rows:
        eq = equilibrium_allocation(game_of(OrgSpec(ad, r.beta, r.gamma, p, 1.3))).tau_star
        assert np.max(np.abs(eq - r.tau)) <= 1e-9


def test_no_test_region_is_the_rectangle():
    ad = [2.0, 1.0]
    for r in region_map(ad, UNIT, 1.0, beta_steps=80, gamma_steps=80):
        assert (r.region is Region.L0) == in_no_test_rectangle(r.alpha_r, ad)


def test_interior_tau1_strictly_decreasing_in_gamma():
    ad, beta = [1.0, 1.0], 1.0
    taus = []
    for g in np.linspace(-0.9, 0.9, 181):
        r = classify_region(OrgSpec(ad, beta, g, UNIT, 1.0))
        if r.label is Region.L12:
            taus.append(r.tau[0])
    assert len(taus) > 10
    assert np.all(np.diff(taus) < 0)

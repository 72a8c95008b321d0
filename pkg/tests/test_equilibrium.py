import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from attrlearn.core_model import GameSpec, InvalidArgument, Prior, posterior_variance, value_researcher, value_single
from attrlearn.equilibrium import auxiliary_weights, equilibrium_allocation, misalignment, verify_equilibrium
from attrlearn.oracle_mc import GridSpec, grid_argmax, researcher_value_batch
from attrlearn.solver import optimal_allocation

from conftest import games


def test_misalignment_examples():
    m = misalignment([1, 1], [1, 1])
    assert np.array_equal(m.delta, [0, 0]) and np.array_equal(m.lam, [1, 1])
    m = misalignment([1, 1], [2, 2])
    assert np.array_equal(m.delta, [1, 1]) and np.array_equal(m.lam, [0, 0])
    assert misalignment([1, 1], [2.5, 1]).lam == pytest.approx([-1.25, 1.0], abs=1e-15)


def test_misalignment_dimension_mismatch():
    with pytest.raises(InvalidArgument):
        misalignment([1, 1], [1, 1, 1])


def test_auxiliary_weights_examples():
    assert auxiliary_weights([0.3, 2.0], [0.3, 2.0]) == pytest.approx([0.3, 2.0], abs=1e-15)
    assert np.array_equal(auxiliary_weights([1, 1], [2.5, 1]), [0.0, 1.0])
    assert auxiliary_weights([1, 1], [1.5, 0.5]) == pytest.approx([np.sqrt(0.75)] * 2, abs=1e-15)


def test_equilibrium_aligned_is_single_player():
    p = Prior([0.5, -1.0, 0.0], [1.0, 2.0, 0.5])
    g = GameSpec(p, [2.0, 1.0, 0.5], [2.0, 1.0, 0.5], 3.0)
    assert equilibrium_allocation(g).tau_star == pytest.approx(optimal_allocation([2.0, 1.0, 0.5], p, 3.0).tau_star, abs=1e-14)


def test_equilibrium_abstains_when_decision_maker_too_strong():
    g = GameSpec(Prior([0, 0], [1, 1]), [2.5, 2.5], [1, 1], 1.0)
    assert equilibrium_allocation(g).is_abstain


def test_equilibrium_misaligned_example_matches_fine_grid():
    g = GameSpec(Prior([0, 0], [1, 1]), [2.5, 1.0], [1.0, 1.0], 1.0)
    tau = equilibrium_allocation(g).tau_star
    assert tau == pytest.approx([0.0, 1.0], abs=1e-15)
    grid = grid_argmax(researcher_value_batch(g), 2, 1.0, GridSpec(resolution=1e-3), vectorized=True)
    assert grid == pytest.approx([0.0, 1.0], abs=1e-6)


def test_verify_equilibrium_examples():
    g = GameSpec(Prior([0, 0], [1, 1]), [2.5, 1.0], [1.0, 1.0], 1.0)
    assert verify_equilibrium(g, equilibrium_allocation(g).tau_star).ok
    bad = verify_equilibrium(g, [0.0, 0.0])
    assert not bad.ok and bad.gap > 0
    # the decision-maker's own favourite tests are not the researcher's
    g2 = GameSpec(Prior([0, 0], [1, 1]), [1.5, 0.5], [1.0, 1.0], 2.0)
    own = optimal_allocation(g2.alpha_d, g2.prior, g2.budget).tau_star
    assert not verify_equilibrium(g2, own).ok


def test_indifference_resolves_to_abstain():
    # lambda = 0 everywhere: testing changes nothing, the researcher abstains
    g = GameSpec(Prior([0, 0], [1, 1]), [2.0, 2.0], [1.0, 1.0], 1.0)
    assert equilibrium_allocation(g).is_abstain


@settings(max_examples=150, deadline=None)
@given(games(), st.data())
def test_reduction_identity(g, data):
    ah = auxiliary_weights(g.alpha_r, g.alpha_d)
    lam = misalignment(g.alpha_r, g.alpha_d).lam
    if np.any(lam < 0):
        return
    s0 = g.prior.sigma0

    def adjusted(t):
        return value_researcher(g, t) + float(ah**2 @ posterior_variance(s0, t))

    frac = np.array(data.draw(st.lists(st.floats(0, 1), min_size=g.K + 1, max_size=g.K + 1)))
    t = g.budget * frac[:-1] / max(1.0, frac.sum())
    base = adjusted(np.zeros(g.K))
    assert adjusted(t) == pytest.approx(base, abs=1e-10 * max(1.0, abs(base)))


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 5), st.floats(0.0, 10), st.floats(0.0, 10))
def test_aux_weight_decreasing_in_misalignment(ar, d1, d2):
    lo, hi = sorted([d1, d2])
    # same researcher weight, decision-maker pulled further away (above alpha_r)
    a_lo = auxiliary_weights([ar], [ar + lo])[0]
    a_hi = auxiliary_weights([ar], [ar + hi])[0]
    assert a_hi <= a_lo + 1e-15
    assert a_lo <= ar * (1 + 1e-15)


@settings(max_examples=150, deadline=None)
@given(games())
def test_abstain_iff_no_positive_lambda(g):
    lam = misalignment(g.alpha_r, g.alpha_d).lam
    assert equilibrium_allocation(g).is_abstain == bool(np.max(lam) <= 0)


@settings(max_examples=100, deadline=None)
@given(games(k_max=3), st.floats(0.1, 10))
def test_lambda_scaling_leaves_allocation(g, c):
    # scaling all lambda_k by c: scale alpha_d and alpha_r together by sqrt(c)
    s = np.sqrt(c)
    g2 = GameSpec(g.prior, g.alpha_d * s, g.alpha_r * s, g.budget)
    t1, t2 = equilibrium_allocation(g).tau_star, equilibrium_allocation(g2).tau_star
    assert t1 == pytest.approx(t2, abs=1e-9 * g.budget)


@settings(max_examples=60, deadline=None)
@given(games(k_max=3))
def test_equilibrium_dominates_grid(g):
    tau = equilibrium_allocation(g).tau_star
    fn = researcher_value_batch(g)
    N = 40 if g.K == 2 else 20
    from attrlearn.oracle_mc import simplex_lattice

    pts = simplex_lattice(g.K, N) * (g.budget / N)
    v = value_researcher(g, tau)
    assert v >= fn(pts).max() - 1e-9 * max(1.0, abs(v))


def test_aligned_value_matches_single_player():
    p = Prior([0.0, 0.0], [1.0, 3.0])
    g = GameSpec(p, [1.0, 2.0], [1.0, 2.0], 2.0)
    t = [0.7, 1.1]
    assert value_researcher(g, t) == pytest.approx(value_single([1.0, 2.0], p, t), abs=1e-12)

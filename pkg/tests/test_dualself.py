import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from attrlearn.core_model import InvalidArgument
from attrlearn.dualself import (
    Criterion,
    DualSelfSpec,
    Ordering,
    equality_region,
    naif_allocation,
    simulate_selves,
    sophisticate_allocation,
    sophisticate_aux_weights,
    strategic_ignorance,
    value_changed,
    value_initial,
    welfare_compare,
)

# Frozen from a grid maximisation of the initial-preference value over the unit
# budget face (step 1e-6), p = 0.5, c = 0.5, weights (1, 1).
TAU_S1_ORACLE = 0.550056


def test_aux_weight_examples():
    assert sophisticate_aux_weights(DualSelfSpec([1, 1], 0.25, 3.0))[1] == 0.0
    assert sophisticate_aux_weights(DualSelfSpec([1, 2], 0.5, 1 + 1e-9))[1] == pytest.approx(2.0, abs=1e-8)
    assert sophisticate_aux_weights(DualSelfSpec([1, 2], 0.5, 0.5))[1] == pytest.approx(2 * math.sqrt(0.875), abs=1e-15)


def test_naif_examples():
    assert naif_allocation(DualSelfSpec([1, 1], 0.5, 2)) == pytest.approx([0.5, 0.5], abs=1e-15)
    assert naif_allocation(DualSelfSpec([2, 1], 0.5, 2)) == pytest.approx([1, 0], abs=1e-15)
    assert naif_allocation(DualSelfSpec([1, 2], 0.5, 2)) == pytest.approx([0, 1], abs=1e-15)


def test_sophisticate_examples():
    s = DualSelfSpec([1.3, 0.8], 0.4, 1 + 1e-12)
    assert sophisticate_allocation(s) == pytest.approx(naif_allocation(s), abs=1e-9)
    assert sophisticate_allocation(DualSelfSpec([1, 1], 0.25, 3.0)) == pytest.approx([1, 0], abs=1e-15)
    s = DualSelfSpec([1, 1], 0.5, 0.5)
    r = math.sqrt(0.875)
    assert sophisticate_allocation(s)[0] == pytest.approx((2 - r) / (1 + r), abs=1e-15)
    assert sophisticate_allocation(s)[0] == pytest.approx(TAU_S1_ORACLE, abs=1e-6)


def test_sophisticate_maximises_initial_value_on_grid(rng):
    for _ in range(100):
        s = DualSelfSpec(rng.uniform(0.1, 3, 2), rng.uniform(0.01, 0.99), rng.uniform(0.05, 4))
        x = np.linspace(0, 1, 10001)
        vals = [value_initial(s, [t, 1 - t]) for t in x]
        t_grid = x[int(np.argmax(vals))]
        assert sophisticate_allocation(s)[0] == pytest.approx(t_grid, abs=2e-4)
        assert value_initial(s, sophisticate_allocation(s)) >= max(vals) - 1e-12


def test_strategic_ignorance_examples():
    assert strategic_ignorance(DualSelfSpec([1, 1], 0.25, 3.0))
    for p in (0.1, 0.5, 0.99):
        for c in (0.1, 0.5, 0.99):
            assert not strategic_ignorance(DualSelfSpec([1, 1], p, c))
    assert not strategic_ignorance(DualSelfSpec([1, 1], 0.99, 1.5))


def test_ignorance_matches_aux_weight_on_lattice():
    for p in np.round(np.arange(0.01, 1.0, 0.01), 10):
        for c in np.round(np.arange(0.01, 5.0, 0.01), 10):
            if c == 1.0:
                continue
            s = DualSelfSpec([1, 1], p, c)
            assert strategic_ignorance(s) == (sophisticate_aux_weights(s)[1] == 0), (p, c)


def test_ignorance_holds_for_every_budget():
    budgets = np.concatenate([np.linspace(0.04, 1, 25) * k for k in (1, 2, 5)])
    seen = set()
    for p in (0.25, 0.5, 0.9):
        for c in (0.5, 2.0, 3.0, 4.0):
            s = DualSelfSpec([1.0, 1.5], p, c)
            never = all(sophisticate_allocation(s, T)[1] == 0 for T in budgets)
            assert never == strategic_ignorance(s), (p, c)
            seen.add(never)
    assert seen == {True, False}


def test_welfare_compare_examples():
    r = welfare_compare(DualSelfSpec([5, 1], 0.2, 0.5), Criterion.CHANGED)
    assert r.ordering is Ordering.EQUAL
    assert welfare_compare(DualSelfSpec([1, 1], 0.5, 2.0), "changed").ordering is Ordering.NAIF
    assert welfare_compare(DualSelfSpec([1, 1], 0.5, 0.5), "initial").ordering is Ordering.SOPHISTICATE


def test_equality_region_boundary_flag():
    s = DualSelfSpec([2.0, 1.0], 0.5, 0.5)  # alpha_r1 == 2 alpha_r2
    eq, boundary = equality_region(s)
    assert eq and boundary
    r = welfare_compare(s, "changed")
    assert r.boundary and r.ordering is Ordering.EQUAL


@settings(max_examples=200, deadline=None)
@given(st.floats(0.05, 5), st.floats(0.05, 5), st.floats(0.01, 0.99), st.floats(0.05, 4).filter(lambda c: abs(c - 1) > 1e-6))
def test_welfare_orderings(a1, a2, p, c):
    s = DualSelfSpec([a1, a2], p, c)
    equal, _ = equality_region(s)
    init = welfare_compare(s, "initial")
    changed = welfare_compare(s, "changed")
    assert sophisticate_allocation(s)[0] >= naif_allocation(s)[0] - 1e-15
    assert init.ordering is not Ordering.NAIF
    if equal:
        assert init.margin == 0 and changed.margin == 0
        assert init.ordering is Ordering.EQUAL and changed.ordering is Ordering.EQUAL
        return
    # the exact sign of the analytic margin (naif minus sophisticate) ...
    assert init.margin < 0
    assert (changed.margin > 0) if c > 1 else (changed.margin < 0)
    # ... and the reported ordering, which calls margins within 1e-9 equal
    for r, strict in ((init, Ordering.SOPHISTICATE), (changed, Ordering.NAIF if c > 1 else Ordering.SOPHISTICATE)):
        assert r.ordering is (strict if abs(r.margin) > 1e-9 else Ordering.EQUAL)


def test_changed_value_closed_form():
    s = DualSelfSpec([1.2, 0.7], 0.3, 2.5)
    for t1 in np.linspace(0, 1, 11):
        expect = -(1.2**2) / (1 + t1) - 0.7**2 / (2 - t1) * (1 - 0.3 + 0.3 * 2.5**2)
        assert value_changed(s, [t1, 1 - t1]) == pytest.approx(expect, abs=1e-14)


def test_monte_carlo_values():
    s = DualSelfSpec([1.0, 1.5], 0.4, 2.0)
    for tau in (naif_allocation(s), sophisticate_allocation(s), np.array([0.3, 0.7])):
        init, real = simulate_selves(s, tau, 1_000_000, seed=41)
        assert init.agrees(value_initial(s, tau))
        assert real.agrees(value_changed(s, tau))


def test_input_validation():
    with pytest.raises(InvalidArgument):
        DualSelfSpec([1, 1], 0.5, 1.0)
    with pytest.raises(InvalidArgument):
        DualSelfSpec([1, 1], 1.0, 2.0)
    with pytest.raises(InvalidArgument):
        DualSelfSpec([1, 0], 0.5, 2.0)
    with pytest.raises(InvalidArgument):
        DualSelfSpec([1, 1, 1], 0.5, 2.0)

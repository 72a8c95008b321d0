"""Politician, advisor and two social groups.

Group k's welfare is attribute k.  A politician with discrimination ``delta``
weighs the groups ``((1+delta)/2, (1-delta)/2)``.  An advisor with partiality
``p`` weighs them ``((1-p)/2, (1+p)/2)`` and allocates one unit of tests.
Standard normal priors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core_model import GameSpec, InvalidArgument, Prior
from .solver import allocation_two

PRIOR = Prior([0.0, 0.0], [1.0, 1.0])
BUDGET = 1.0
BISECT_TOL = 1e-12
DELTA_BAR = math.sqrt((2 ** (2 / 3) - 1) / 3)


def _delta(delta) -> float:
    d = float(delta)
    if not (0 < d < 1):
        raise InvalidArgument("delta must lie in (0, 1)")
    return d


def _p(p, extended: bool = False) -> float:
    p = float(p)
    lo = -1.0 if extended else 0.0
    if not (lo <= p < 1) and not (extended and p == 1.0):
        raise InvalidArgument(f"p must lie in [{lo:g}, 1)")
    return p


def politician_weights(delta) -> np.ndarray:
    d = _delta(delta)
    return np.array([(1 + d) / 2, (1 - d) / 2])


def advisor_weights(p, extended: bool = False) -> np.ndarray:
    p = _p(p, extended)
    return np.array([(1 - p) / 2, (1 + p) / 2])


def game(p, delta, extended: bool = False) -> GameSpec:
    return GameSpec(PRIOR, politician_weights(delta), advisor_weights(p, extended), BUDGET)


def aux_weights_pd(p, delta, extended: bool = False) -> np.ndarray:
    p, d = _p(p, extended), _delta(delta)
    a1 = 0.5 * math.sqrt((1 + d) * (1 - 2 * p - d)) if p < (1 - d) / 2 else 0.0
    a2 = 0.5 * math.sqrt((1 - d) * (1 + 2 * p + d)) if p > -(1 + d) / 2 else 0.0
    return np.array([a1, a2])


def tau2_aux(p, delta, extended: bool = False) -> float:
    a1, a2 = aux_weights_pd(p, delta, extended)
    return (2 * a2 - a1) / (a1 + a2)


def equilibrium_tau2(p, delta, extended: bool = False) -> float:
    t = tau2_aux(p, delta, extended)
    return min(max(t, 0.0), 1.0)


def group_value(k: int, tau, delta) -> float:
    """Expected payoff of group ``k`` (1 or 2) at tests ``tau``."""
    if k not in (1, 2):
        raise InvalidArgument("group must be 1 or 2")
    tau = np.asarray(tau, dtype=float)
    if tau.shape != (2,) or np.any(tau < 0) or tau.sum() > BUDGET + 1e-12:
        raise InvalidArgument("tau must be a non-negative pair with sum <= 1")
    a = politician_weights(delta)
    i, j = k - 1, 2 - k
    return -(a @ a + 1) + (a[i] ** 2 + 2 * a[i] * tau[i]) / (1 + tau[i]) + a[j] ** 2 / (1 + tau[j])


def _tau2(tau2) -> float:
    t = float(tau2)
    if not (0 <= t <= 1):
        raise InvalidArgument("tau2 must lie in [0, 1]")
    return t


def inequality_gap(tau2, delta) -> float:
    """Signed payoff gap (group 1 minus group 2) with the budget exhausted."""
    t, d = _tau2(tau2), _delta(delta)
    return (1 + d) * (1 - t) / (2 - t) - (1 - d) * t / (1 + t)


def omega(tau2, delta) -> float:
    """Welfare (sum of group payoffs) with the budget exhausted."""
    t, d = _tau2(tau2), _delta(delta)
    return (
        -3
        - d * d
        + (0.5 * (1 + d) ** 2 + (1 + d) * (1 - t)) / (2 - t)
        + (0.5 * (1 - d) ** 2 + (1 - d) * t) / (1 + t)
    )


def equality_restoring_tau2(delta) -> float:
    d = _delta(delta)
    return (-(1 - d) + math.sqrt(1 + 3 * d * d)) / (2 * d)


def equality_restoring_p(delta) -> float:
    d = _delta(delta)
    return d * (1 / math.sqrt(1 + 3 * d * d) - 0.5)


def bisect(f, lo: float, hi: float, tol: float = BISECT_TOL, max_iter: int = 200) -> float:
    """Root of a monotone ``f`` on ``[lo, hi]``; endpoints must bracket a sign change."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise RuntimeError("root not bracketed")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0 or hi - lo <= tol:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def equality_restoring_tau2_bisect(delta) -> float:
    d = _delta(delta)
    return bisect(lambda t: inequality_gap(t, d), 0.5, 1.0)


def equality_restoring_p_bisect(delta) -> float:
    """Invert the equilibrium response: the p at which tests equalise payoffs."""
    d = _delta(delta)
    target = equality_restoring_tau2_bisect(d)
    return bisect(lambda p: tau2_aux(p, d) - target, 0.0, (1 - d) / 2 * (1 - 1e-15))


def p_aux(delta) -> float:
    """Partiality at which the advisor first sends every test to group 2."""
    d = _delta(delta)
    return bisect(lambda p: tau2_aux(p, d) - 1.0, 0.0, (1 - d) / 2)


def unchecked_tau2(delta) -> float:
    d = _delta(delta)
    return (1 - 3 * d) / 2 if d < 1 / 3 else 0.0


def unchecked_tau2_solver(delta) -> float:
    return float(allocation_two(politician_weights(delta), PRIOR, BUDGET)[1])


def welfare(p, delta) -> float:
    return omega(equilibrium_tau2(p, delta), delta)


def inequality(p, delta) -> float:
    return abs(inequality_gap(equilibrium_tau2(p, delta), delta))


@dataclass(frozen=True)
class FrontierRow:
    p: float
    tau2_star: float
    welfare: float
    inequality: float
    regime: str  # frontier (p <= p_hat), dominated (p_hat < p < p_aux), capped


def frontier_sweep(delta, p_grid) -> list[FrontierRow]:
    d = _delta(delta)
    p_hat, p_cap = equality_restoring_p(d), p_aux(d)
    rows = []
    for p in sorted(float(x) for x in p_grid):
        t2 = equilibrium_tau2(p, d)
        regime = "frontier" if p <= p_hat else ("capped" if p >= p_cap else "dominated")
        rows.append(FrontierRow(p, t2, omega(t2, d), abs(inequality_gap(t2, d)), regime))
    return rows


def slope_sign_changes(values) -> int:
    signs = np.sign(np.diff(np.asarray(values, dtype=float)))
    signs = signs[signs != 0]
    return int(np.count_nonzero(signs[1:] != signs[:-1]))

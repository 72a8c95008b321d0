"""Single-player optimal test allocation (water-filling).

Tests flow first to the attribute with the largest ``alpha_k * sigma0_k``.
Each further attribute switches on once the budget passes its threshold, and
from then on every active attribute absorbs budget in proportion to its
weight.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core_model import InvalidArgument, Prior, as_tau, as_weights, check_budget

KKT_RTOL = 1e-7


class AbstainSignal(Exception):
    """All weights are zero: no attribute is worth testing."""


@dataclass(frozen=True)
class WaterfillSolution:
    tau_star: np.ndarray
    budget: float
    zeta_star: float
    active_count: int
    thresholds: np.ndarray  # sorted order, +inf for zero-weight attributes
    sort_permutation: np.ndarray

    @property
    def is_abstain(self) -> bool:
        return bool(np.all(self.tau_star == 0))


def _inputs(w, p: Prior, T=None):
    w = as_weights(w)
    if w.size != p.K:
        raise InvalidArgument(f"weights have length {w.size}, prior has {p.K}")
    if T is not None:
        T = check_budget(T)
    return w, T


def sort_order(w, p: Prior) -> np.ndarray:
    """Attribute order by ``alpha_k * sigma0_k`` descending; ties by index."""
    w, _ = _inputs(w, p)
    return np.argsort(-(w * p.sigma0), kind="stable")


def _sorted_thresholds(a: np.ndarray, s: np.ndarray) -> np.ndarray:
    # a, s: sorted, strictly positive weights and their prior variances
    cum_a = np.concatenate(([0.0], np.cumsum(a)[:-1]))
    cum_inv = np.concatenate(([0.0], np.cumsum(1.0 / s)[:-1]))
    tb = cum_a / (a * s) - cum_inv
    tb[0] = 0.0
    # exact values are non-decreasing; strip rounding noise at ties
    return np.maximum.accumulate(tb)


def thresholds(w, p: Prior) -> np.ndarray:
    """Budget levels at which each attribute (in sorted order) starts testing."""
    w, _ = _inputs(w, p)
    if not np.any(w > 0):
        raise AbstainSignal("all weights are zero")
    perm = sort_order(w, p)
    ws, ss = w[perm], p.sigma0[perm]
    m = int(np.count_nonzero(ws > 0))
    out = np.full(w.size, np.inf)
    out[:m] = _sorted_thresholds(ws[:m], ss[:m])
    return out


def _abstain(K: int, T: float, perm) -> WaterfillSolution:
    return WaterfillSolution(np.zeros(K), T, 0.0, 0, np.full(K, np.inf), perm)


def optimal_allocation(w, p: Prior, T) -> WaterfillSolution:
    """Unique maximiser of ``-sum alpha_k^2 Sigma_hat_k(tau_k)`` over the budget set."""
    w, T = _inputs(w, p, T)
    perm = sort_order(w, p)
    if not np.any(w > 0):
        return _abstain(w.size, T, perm)
    tb = thresholds(w, p)
    ws, ss = w[perm], p.sigma0[perm]

    J = int(np.count_nonzero(tb <= T))  # T in [tb[J-1], tb[J])
    cum = np.cumsum(ws)
    tau_sorted = np.zeros(w.size)
    for k in range(J):
        share = (T - tb[J - 1]) * (ws[k] / cum[J - 1])
        for j in range(k, J - 1):
            share += (tb[j + 1] - tb[j]) * (ws[k] / cum[j])
        tau_sorted[k] = share
    tau = np.empty_like(tau_sorted)
    tau[perm] = tau_sorted
    with np.errstate(over="ignore"):
        zeta = (T + np.sum(1.0 / ss[:J])) / cum[J - 1]
    return WaterfillSolution(tau, T, float(zeta), J, tb, perm)


def allocation_two(w, p: Prior, T) -> np.ndarray:
    """Closed form for two attributes."""
    w, T = _inputs(w, p, T)
    if w.size != 2:
        raise InvalidArgument("two attributes required")
    a1, a2 = w
    s1, s2 = p.sigma0
    if a1 == 0 and a2 == 0:
        return np.zeros(2)
    t1 = (a1 * s1 - a2 * s2) / (s1 * s2 * (a1 + a2)) + a1 * T / (a1 + a2)
    t1 = max(0.0, min(t1, T))
    return np.array([t1, T - t1])


def budget_spent(zeta: float, w: np.ndarray, sigma0: np.ndarray) -> float:
    return float(np.sum(np.maximum(0.0, w * zeta - 1.0 / sigma0)[w > 0]))


def solve_via_multiplier(w, p: Prior, T, tol: float = 1e-12, max_iter: int = 400) -> WaterfillSolution:
    """Same optimum found by bisecting on the transformed multiplier ``zeta``."""
    w, T = _inputs(w, p, T)
    perm = sort_order(w, p)
    if not np.any(w > 0):
        return _abstain(w.size, T, perm)
    pos = w > 0
    s = p.sigma0
    lo = float(np.min(1.0 / (w[pos] * s[pos])))  # spend is exactly zero here
    hi = 2.0 * lo
    while budget_spent(hi, w, s) < T:
        hi *= 2.0
        if not np.isfinite(hi):
            raise RuntimeError("multiplier bracket failed")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        gap = budget_spent(mid, w, s) - T
        if abs(gap) <= tol or mid in (lo, hi):
            break
        if gap < 0:
            lo = mid
        else:
            hi = mid
    zeta = mid
    tau = np.where(pos, np.maximum(0.0, w * zeta - 1.0 / s), 0.0)
    tb = thresholds(w, p)
    return WaterfillSolution(tau, T, zeta, int(np.count_nonzero(tau > 0)), tb, perm)


def marginal_values(w, p: Prior, tau) -> np.ndarray:
    """Gain in ``-sum alpha^2 Sigma_hat`` per unit of precision on each attribute."""
    w, _ = _inputs(w, p)
    t = as_tau(tau, K=p.K)
    return w**2 * (p.sigma0 / (1.0 + t * p.sigma0)) ** 2


@dataclass(frozen=True)
class KKTReport:
    ok: bool
    stationarity: bool
    complementary_slackness: bool
    budget_binding: bool
    xi: float
    eta: np.ndarray
    marginals: np.ndarray
    notes: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def kkt_certificate(w, p: Prior, sol, T=None, rtol: float = KKT_RTOL) -> KKTReport:
    """Check first-order optimality of an allocation for the single-player problem.

    ``sol`` is a ``WaterfillSolution`` or a raw allocation (then ``T`` is
    required).
    """
    if isinstance(sol, WaterfillSolution):
        tau, T = sol.tau_star, sol.budget
    else:
        if T is None:
            raise InvalidArgument("budget required for a raw allocation")
        tau = sol
    w, T = _inputs(w, p, T)
    tau = as_tau(tau, K=p.K)
    m = marginal_values(w, p, tau)
    notes = []
    if not np.any(w > 0):
        zero = bool(np.all(tau == 0))
        if not zero:
            notes.append("zero weights but positive tests")
        return KKTReport(zero, zero, True, True, 0.0, np.zeros(w.size), m, notes)

    active = tau > 0
    budget_ok = abs(float(tau.sum()) - T) <= rtol * T
    if not budget_ok:
        notes.append(f"budget not binding: spent {tau.sum()!r} of {T!r}")
    if not np.any(active):
        return KKTReport(False, False, False, budget_ok, float("nan"), np.full(w.size, np.nan), m, notes)
    xi = float(np.max(m[active]))
    stat = bool(np.all(np.abs(m[active] - xi) <= rtol * xi))
    if not stat:
        notes.append("marginal values differ across tested attributes")
    comp = bool(np.all(m[~active] <= xi * (1 + rtol)))
    if not comp:
        notes.append("an untested attribute has a higher marginal value")
    eta = xi - m
    return KKTReport(stat and comp and budget_ok, stat, comp, budget_ok, xi, eta, m, notes)

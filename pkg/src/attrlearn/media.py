"""Two media outlets and a voter.

The voter splits attention ``t = (t_A, t_B)`` between the outlets.  Each outlet
splits its coverage ``q`` between two issues.  What the voter learns about
issue k is the aggregate precision ``tau_k = t_A q_A_k + t_B q_B_k``.
Everyone scores decisions by ``-sum_k alpha_k (d - theta_k)^2`` with weights
summing to one.  Outlet A leans towards issue 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core_model import GameSpec, InvalidArgument, Prior, as_weights, value_single
from .equilibrium import auxiliary_weights
from .frameworks import Framework, expected_value
from .oracle_mc import draw_state_and_means, mc_estimate
from .solver import allocation_two

NORM_TOL = 1e-12
DEVIATION_STEP = 0.05


class Case(str, Enum):
    POLARIZED = "polarized"
    SAME_EXTREME = "same-extreme"
    FOLLOW_A = "monopoly-A-followed"
    FOLLOW_B = "monopoly-B-followed"


def _media_weights(w, name):
    w = as_weights(w, name)
    if w.size != 2 or np.any(w <= 0):
        raise InvalidArgument(f"{name} must have two strictly positive entries")
    if abs(w.sum() - 1) > NORM_TOL:
        raise InvalidArgument(f"{name} must sum to 1")
    return w


@dataclass(frozen=True)
class MediaSpec:
    alpha_a: np.ndarray
    alpha_b: np.ndarray
    alpha_v: np.ndarray
    prior: Prior
    T: float

    def __post_init__(self):
        for name in ("alpha_a", "alpha_b", "alpha_v"):
            object.__setattr__(self, name, _media_weights(getattr(self, name), name))
        if not self.alpha_a[0] > self.alpha_b[0]:
            raise InvalidArgument("outlet A must weigh issue 1 more than outlet B")
        if self.prior.K != 2:
            raise InvalidArgument("two-issue prior required")
        T = float(self.T)
        if not (np.isfinite(T) and T > 0):
            raise InvalidArgument("attention budget must be positive")
        object.__setattr__(self, "T", T)


def aggregate_tau(t, q_a, q_b) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    q_a, q_b = np.asarray(q_a, dtype=float), np.asarray(q_b, dtype=float)
    if t.shape != (2,) or q_a.shape != (2,) or q_b.shape != (2,):
        raise InvalidArgument("attention and coverage must be pairs")
    if np.any(t < 0) or np.any(q_a < 0) or np.any(q_b < 0):
        raise InvalidArgument("attention and coverage must be non-negative")
    return t[0] * q_a + t[1] * q_b


def player_best_tau(alpha_i, alpha_v, prior: Prior, T_v: float) -> np.ndarray:
    """Aggregate precision player ``i`` would pick if it controlled all attention."""
    if T_v < 0:
        raise InvalidArgument("attention budget must be non-negative")
    if T_v == 0:
        return np.zeros(2)
    return allocation_two(auxiliary_weights(alpha_i, alpha_v), prior, T_v)


def _switch_budgets(w_hat, prior: Prior):
    """Budgets below which this player wants only issue 1 / only issue 2."""
    a1, a2 = w_hat
    s1, s2 = prior.sigma0
    only1 = np.inf if a2 == 0 else a1 / (a2 * s2) - 1 / s1
    only2 = np.inf if a1 == 0 else a2 / (a1 * s1) - 1 / s2
    return only1, only2


def t_hat(spec: MediaSpec) -> float:
    """Attention level below which both outlets want the same single issue."""
    b1, b2 = [], []
    for w in (spec.alpha_a, spec.alpha_b):
        o1, o2 = _switch_budgets(auxiliary_weights(w, spec.alpha_v), spec.prior)
        b1.append(o1)
        b2.append(o2)
    return float(max(0.0, min(b1), min(b2)))


def t_hat_voter(spec: MediaSpec) -> float:
    """Attention level above which the voter's own optimum covers both issues."""
    return float(max(0.0, *_switch_budgets(spec.alpha_v, spec.prior)))


def media_game(spec: MediaSpec, who: str) -> GameSpec:
    w = {"A": spec.alpha_a, "B": spec.alpha_b, "V": spec.alpha_v}[who]
    return GameSpec(spec.prior, spec.alpha_v, w, spec.T)


def outlet_value(spec: MediaSpec, who: str, tau) -> float:
    """Player's expected utility when the voter acts on aggregate precision ``tau``."""
    return expected_value(Framework.A, media_game(spec, who), tau)


def voter_value(spec: MediaSpec, tau) -> float:
    return value_single(spec.alpha_v, spec.prior, tau)


@dataclass(frozen=True)
class MediaOutcome:
    t_star: np.ndarray
    q_a: np.ndarray
    q_b: np.ndarray
    tau_star: np.ndarray
    case_label: Case
    t_hat: float
    t_hat_voter: float


def _coverage(tau, T):
    return np.array([tau[0] / T, 1.0 - tau[0] / T])


def duopoly_equilibrium(spec: MediaSpec) -> MediaOutcome:
    T = spec.T
    th, thv = t_hat(spec), t_hat_voter(spec)
    tau_a = player_best_tau(spec.alpha_a, spec.alpha_v, spec.prior, T)
    tau_b = player_best_tau(spec.alpha_b, spec.alpha_v, spec.prior, T)
    a1, b1, v1 = spec.alpha_a[0], spec.alpha_b[0], spec.alpha_v[0]

    def out(t, qa, qb, case):
        t, qa, qb = np.asarray(t, float), np.asarray(qa, float), np.asarray(qb, float)
        return MediaOutcome(t, qa, qb, aggregate_tau(t, qa, qb), case, th, thv)

    if v1 >= a1:
        return out([T, 0.0], _coverage(tau_a, T), _coverage(tau_b, T), Case.FOLLOW_A)
    if b1 >= v1:
        return out([0.0, T], _coverage(tau_a, T), _coverage(tau_b, T), Case.FOLLOW_B)
    tau_v = player_best_tau(spec.alpha_v, spec.alpha_v, spec.prior, T)
    if T > thv:
        return out(tau_v, [1.0, 0.0], [0.0, 1.0], Case.POLARIZED)
    # the voter wants a single issue; every outlet on that side already agrees
    corner = np.array([1.0, 0.0]) if tau_v[0] > 0 else np.array([0.0, 1.0])
    if T <= th:
        return out([T / 2, T / 2], corner, corner, Case.SAME_EXTREME)
    if corner[0] == 1.0:
        return out([T, 0.0], corner, _coverage(tau_b, T), Case.FOLLOW_A)
    return out([0.0, T], _coverage(tau_a, T), corner, Case.FOLLOW_B)


@dataclass(frozen=True)
class MonopolyOutcome:
    tau: np.ndarray
    voter_value: float


def monopoly_outcome(spec: MediaSpec, m: str) -> MonopolyOutcome:
    w = {"A": spec.alpha_a, "B": spec.alpha_b}[m]
    tau = player_best_tau(w, spec.alpha_v, spec.prior, spec.T)
    return MonopolyOutcome(tau, voter_value(spec, tau))


@dataclass(frozen=True)
class DeviationReport:
    max_gain: float
    ok: bool


def deviation_check(spec: MediaSpec, outcome: MediaOutcome, step: float = DEVIATION_STEP, tol: float = 1e-9) -> DeviationReport:
    """Largest gain either outlet gets from any coverage on a ``step`` grid,
    holding attention and the rival's coverage fixed."""
    grid = np.linspace(0.0, 1.0, int(round(1 / step)) + 1)
    best = -np.inf
    for who in ("A", "B"):
        base = outlet_value(spec, who, outcome.tau_star)
        for x in grid:
            q = np.array([x, 1.0 - x])
            qa, qb = (q, outcome.q_b) if who == "A" else (outcome.q_a, q)
            tau = aggregate_tau(outcome.t_star, qa, qb)
            best = max(best, outlet_value(spec, who, tau) - base)
    return DeviationReport(float(best), bool(best <= tol))


def simulate_attention(spec: MediaSpec, t, q_a, q_b, n: int, seed: int, workers=None):
    """Monte Carlo with one signal per (outlet, issue).

    Returns estimates of the posterior mean and its square for each issue,
    followed by the voter's and both outlets' realised utilities.
    """
    t = np.asarray(t, dtype=float)
    q_a, q_b = np.asarray(q_a, dtype=float), np.asarray(q_b, dtype=float)
    prec = np.array([t[0] * q_a, t[1] * q_b])  # (outlet, issue)
    p = spec.prior

    def sample(rng, m):
        theta = p.mu0 + np.sqrt(p.sigma0) * rng.standard_normal((m, 2))
        num = np.broadcast_to(p.mu0 / p.sigma0, (m, 2)).copy()
        den = 1.0 / p.sigma0
        for o in range(2):
            on = prec[o] > 0
            z = rng.standard_normal((m, 2))
            if np.any(on):
                s = theta[:, on] + z[:, on] / np.sqrt(prec[o, on])
                num[:, on] += prec[o, on] * s
        den = den + prec.sum(axis=0)
        post = num / den
        d = post @ spec.alpha_v
        us = [-(((d[:, None] - theta) ** 2) @ w) for w in (spec.alpha_v, spec.alpha_a, spec.alpha_b)]
        return np.column_stack([post, post**2, *us])

    return mc_estimate(sample, n, seed, workers)


def simulate_fictitious(spec: MediaSpec, tau, n: int, seed: int, workers=None):
    """Same outputs as ``simulate_attention`` but with one signal per issue."""
    tau = np.asarray(tau, dtype=float)
    p = spec.prior

    def sample(rng, m):
        theta, post = draw_state_and_means(rng, m, p, tau)
        d = post @ spec.alpha_v
        us = [-(((d[:, None] - theta) ** 2) @ w) for w in (spec.alpha_v, spec.alpha_a, spec.alpha_b)]
        return np.column_stack([post, post**2, *us])

    return mc_estimate(sample, n, seed, workers)

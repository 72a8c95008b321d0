"""Strategic test allocation: researcher chooses tests, decision-maker acts.

The researcher's payoff from testing attribute k is governed by
``lambda_k = 2 alpha_r_k alpha_d_k - alpha_d_k**2``.  Testing is a single-player
problem in disguise: the equilibrium equals the lone-agent optimum under the
auxiliary weights ``sqrt(max(lambda_k, 0))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_model import (
    GameSpec,
    InvalidArgument,
    as_tau,
    as_weights,
    lambda_coefficients,
    posterior_variance,
    value_researcher,
)
from .solver import WaterfillSolution, optimal_allocation

VERIFY_TOL = 1e-7


@dataclass(frozen=True)
class Misalignment:
    delta: np.ndarray
    lam: np.ndarray


def misalignment(alpha_r, alpha_d) -> Misalignment:
    ar = as_weights(alpha_r, "alpha_r")
    ad = as_weights(alpha_d, "alpha_d")
    if ar.size != ad.size:
        raise InvalidArgument("dimension mismatch")
    return Misalignment(np.abs(ar - ad), lambda_coefficients(ar, ad))


def auxiliary_weights(alpha_r, alpha_d) -> np.ndarray:
    lam = misalignment(alpha_r, alpha_d).lam
    return np.sqrt(np.maximum(lam, 0.0))


def equilibrium_allocation(g: GameSpec) -> WaterfillSolution:
    sol = optimal_allocation(auxiliary_weights(g.alpha_r, g.alpha_d), g.prior, g.budget)
    if not sol.is_abstain:
        # Indifference between testing and abstaining resolves to abstaining.
        # The gain over abstaining is sum_k lambda_k (sigma0_k - sigma_hat_k);
        # summed termwise it has an exact sign, unlike a difference of values.
        lam = lambda_coefficients(g.alpha_r, g.alpha_d)
        s0 = g.prior.sigma0
        gain = float(np.sum(lam * (s0 - posterior_variance(s0, sol.tau_star))))
        if not gain > 0:
            return optimal_allocation(np.zeros(g.K), g.prior, g.budget)
    return sol


@dataclass(frozen=True)
class EquilibriumCheck:
    ok: bool
    gap: float  # best competitor value minus value at tau (positive = worse)
    best_tau: np.ndarray

    def __bool__(self) -> bool:
        return self.ok


def verify_equilibrium(g: GameSpec, tau, resolution: float = 0.02, tol: float = VERIFY_TOL) -> EquilibriumCheck:
    """Compare ``tau`` against a simplex grid and the analytic equilibrium."""
    from .oracle_mc import GridSpec, grid_argmax, researcher_value_batch

    tau = as_tau(tau, K=g.K, budget=g.budget)
    v = value_researcher(g, tau)
    fn = researcher_value_batch(g)
    grid_best = grid_argmax(fn, g.K, g.budget, GridSpec(resolution=resolution, refine=False))
    candidates = [grid_best, equilibrium_allocation(g).tau_star]
    vals = [value_researcher(g, c) for c in candidates]
    i = int(np.argmax(vals))
    gap = vals[i] - v
    return EquilibriumCheck(bool(gap <= tol), float(gap), candidates[i])

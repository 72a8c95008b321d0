"""Gaussian attribute model: priors, posterior updating, bliss points, values.

The unknown state is a vector of independent Gaussian attributes
``theta_k ~ N(mu0_k, sigma0_k)``.  A test allocation ``tau`` buys a signal
``s_k = theta_k + eps_k`` with noise precision ``tau_k``.  A player with
weights ``alpha`` wants the decision to match ``sum_k alpha_k theta_k``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class InvalidArgument(ValueError):
    """Raised for malformed or out-of-domain inputs."""


def _vector(x, name: str) -> np.ndarray:
    arr = np.array(x, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidArgument(f"{name} must be a non-empty 1-d vector")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgument(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


def as_weights(alpha, name: str = "alpha") -> np.ndarray:
    """Validate a weight vector (non-negative, finite)."""
    w = _vector(alpha, name)
    if np.any(w < 0):
        raise InvalidArgument(f"{name} must be non-negative")
    if np.any((w > 0) & (w < np.finfo(float).tiny)):
        raise InvalidArgument(f"{name} has subnormal entries; use 0 or a normal float")
    return w


def as_tau(tau, K: int | None = None, budget: float | None = None) -> np.ndarray:
    """Validate a test allocation; optionally check length and budget."""
    t = _vector(tau, "tau")
    if np.any(t < 0):
        raise InvalidArgument("tau must be non-negative")
    if K is not None and t.size != K:
        raise InvalidArgument(f"tau has length {t.size}, expected {K}")
    if budget is not None and t.sum() > budget * (1 + 1e-12) + 1e-12:
        raise InvalidArgument(f"tau spends {t.sum()!r} > budget {budget!r}")
    return t


def check_budget(T) -> float:
    T = float(T)
    if not np.isfinite(T) or T <= 0:
        raise InvalidArgument("budget T must be a positive finite number")
    return T


@dataclass(frozen=True)
class Prior:
    mu0: np.ndarray
    sigma0: np.ndarray

    def __post_init__(self):
        mu = _vector(self.mu0, "mu0")
        sig = _vector(self.sigma0, "sigma0")
        if mu.size != sig.size:
            raise InvalidArgument("mu0 and sigma0 differ in length")
        if np.any(sig <= 0):
            raise InvalidArgument("sigma0 must be strictly positive")
        object.__setattr__(self, "mu0", mu)
        object.__setattr__(self, "sigma0", sig)

    @property
    def K(self) -> int:
        return int(self.mu0.size)

    @classmethod
    def standard(cls, K: int) -> "Prior":
        return cls(np.zeros(K), np.ones(K))

    def permuted(self, perm) -> "Prior":
        return Prior(self.mu0[perm], self.sigma0[perm])


@dataclass(frozen=True)
class Allocation:
    tau: np.ndarray
    budget: float

    def __post_init__(self):
        T = check_budget(self.budget)
        object.__setattr__(self, "budget", T)
        object.__setattr__(self, "tau", as_tau(self.tau, budget=T))

    @property
    def is_abstain(self) -> bool:
        return bool(np.all(self.tau == 0))


@dataclass(frozen=True)
class GameSpec:
    prior: Prior
    alpha_d: np.ndarray
    alpha_r: np.ndarray
    budget: float

    def __post_init__(self):
        ad = as_weights(self.alpha_d, "alpha_d")
        ar = as_weights(self.alpha_r, "alpha_r")
        if not (ad.size == ar.size == self.prior.K):
            raise InvalidArgument("weight vectors and prior differ in length")
        object.__setattr__(self, "alpha_d", ad)
        object.__setattr__(self, "alpha_r", ar)
        object.__setattr__(self, "budget", check_budget(self.budget))

    @property
    def K(self) -> int:
        return self.prior.K


def normalize_signs(alpha_r, alpha_d):
    """Map arbitrary-sign weights into the non-negative domain.

    An attribute whose decision-maker weight is negative (or zero with a
    negative researcher weight) is replaced by its negative.  A remaining
    negative researcher weight means the players disagree on direction; the
    researcher then never learns about it, which is the same as weight zero.
    Returns ``(alpha_r, alpha_d, flipped)``; negate ``mu0`` where ``flipped``.
    """
    ar = np.array(alpha_r, dtype=float)
    ad = np.array(alpha_d, dtype=float)
    if ar.shape != ad.shape:
        raise InvalidArgument("dimension mismatch")
    flipped = (ad < 0) | ((ad == 0) & (ar < 0))
    ar[flipped] *= -1
    ad[flipped] *= -1
    ar[ar < 0] = 0.0
    return ar, ad, flipped


def _pair(w, p: Prior) -> np.ndarray:
    w = as_weights(w)
    if w.size != p.K:
        raise InvalidArgument(f"weights have length {w.size}, prior has {p.K}")
    return w


def _tau_for(tau, p: Prior) -> np.ndarray:
    if isinstance(tau, Allocation):
        tau = tau.tau
    return as_tau(tau, K=p.K)


def posterior_variance(sigma0, tau):
    """Posterior variance after a signal of precision ``tau``; vectorised."""
    s = np.asarray(sigma0, dtype=float)
    t = np.asarray(tau, dtype=float)
    if not (np.all(np.isfinite(s)) and np.all(np.isfinite(t))):
        raise InvalidArgument("non-finite input")
    if np.any(s <= 0) or np.any(t < 0):
        raise InvalidArgument("need sigma0 > 0 and tau >= 0")
    out = s / (1.0 + t * s)
    return float(out) if out.ndim == 0 else out


def posterior_mean(mu0, sigma0, tau, s):
    """Precision-weighted average of prior mean and signal; vectorised.

    With ``tau == 0`` the signal is ignored entirely (it may be NaN).
    """
    mu = np.asarray(mu0, dtype=float)
    sig = np.asarray(sigma0, dtype=float)
    t = np.asarray(tau, dtype=float)
    if np.any(sig <= 0) or np.any(t < 0) or not np.all(np.isfinite(t)):
        raise InvalidArgument("need sigma0 > 0 and finite tau >= 0")
    gain = t * sig / (1.0 + t * sig)
    out = np.where(gain > 0, (1.0 - gain) * mu + gain * np.where(gain > 0, s, 0.0), mu)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class BlissDistribution:
    mean: float
    variance: float


def bliss_prior(w, p: Prior) -> BlissDistribution:
    w = _pair(w, p)
    return BlissDistribution(float(w @ p.mu0), float(w**2 @ p.sigma0))


def residual_bliss_variance(w, p: Prior, tau) -> float:
    w = _pair(w, p)
    t = _tau_for(tau, p)
    return float(w**2 @ posterior_variance(p.sigma0, t))


def dm_decision(alpha_d, posterior_means):
    a = as_weights(alpha_d, "alpha_d")
    m = np.asarray(posterior_means, dtype=float)
    if m.shape[-1] != a.size:
        raise InvalidArgument("dimension mismatch")
    return m @ a


def value_single(w, p: Prior, tau) -> float:
    """Expected payoff of a lone agent who acts on their own posterior."""
    return -residual_bliss_variance(w, p, tau)


def value_dm(alpha_d, p: Prior, tau) -> float:
    return value_single(alpha_d, p, tau)


def value_researcher_abstain(g: GameSpec) -> float:
    bd = bliss_prior(g.alpha_d, g.prior)
    br = bliss_prior(g.alpha_r, g.prior)
    return -((bd.mean - br.mean) ** 2) - br.variance


def value_researcher(g: GameSpec, tau) -> float:
    """Researcher's expected payoff when the decision-maker acts on the tests.

    Covariance form: twice the covariance between decision and the
    researcher's bliss point, minus the variance of the decision, plus the
    no-test payoff.
    """
    t = _tau_for(tau, g.prior)
    s0 = g.prior.sigma0
    s_hat = posterior_variance(s0, t)
    cov = 2.0 * float(np.sum(g.alpha_d * g.alpha_r * s0 * s_hat * t))
    psi_d = float(g.alpha_d**2 @ s0) - float(g.alpha_d**2 @ s_hat)
    return cov - psi_d + value_researcher_abstain(g)


def lambda_coefficients(alpha_r, alpha_d) -> np.ndarray:
    ar = as_weights(alpha_r, "alpha_r")
    ad = as_weights(alpha_d, "alpha_d")
    if ar.size != ad.size:
        raise InvalidArgument("dimension mismatch")
    # factored so that sign(lambda) == sign(2 alpha_r - alpha_d) exactly
    return ad * (2.0 * ar - ad)


def value_researcher_reduced(g: GameSpec, tau) -> float:
    """Same value via ``-sum lambda_k Sigma_hat_k + const`` (oracle route)."""
    t = _tau_for(tau, g.prior)
    lam = lambda_coefficients(g.alpha_r, g.alpha_d)
    s0 = g.prior.sigma0
    const = float(lam @ s0) + value_researcher_abstain(g)
    return -float(lam @ posterior_variance(s0, t)) + const


def value_group(g: GameSpec, k: int, tau) -> float:
    """Expected payoff ``E[-(d - theta_k)^2]`` of the group caring only about k."""
    t = _tau_for(tau, g.prior)
    p = g.prior
    ad = g.alpha_d
    s_hat = posterior_variance(p.sigma0, t)
    b0 = float(ad @ p.mu0)
    var_d = float(ad**2 @ (p.sigma0 - s_hat))
    cov = float(ad[k] * (p.sigma0[k] - s_hat[k]))
    return -(var_d - 2.0 * cov + p.sigma0[k] + (b0 - p.mu0[k]) ** 2)

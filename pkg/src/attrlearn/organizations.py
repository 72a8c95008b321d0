"""Manager and analyst: how the analyst's weight profile shapes what gets tested.

The analyst's weights are written as ``beta * alpha_d + gamma * (-alpha_d2, alpha_d1)``:
``beta`` (sensitivity) scales the manager's own weights and ``gamma``
(distortion) tilts them orthogonally.  Two attributes throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core_model import GameSpec, InvalidArgument, Prior, as_weights, check_budget, value_dm
from .equilibrium import auxiliary_weights, equilibrium_allocation
from .solver import allocation_two

VIOLATION_TOL = 1e-9


class Region(str, Enum):
    L0 = "L0"  # no tests
    L1 = "L1"  # only attribute 1
    L2 = "L2"  # only attribute 2
    L12 = "L12"  # both


@dataclass(frozen=True)
class OrgSpec:
    alpha_d: np.ndarray
    beta: float
    gamma: float
    prior: Prior
    T: float

    def __post_init__(self):
        ad = as_weights(self.alpha_d, "alpha_d")
        if ad.size != 2 or np.any(ad <= 0):
            raise InvalidArgument("alpha_d must have two strictly positive entries")
        if self.prior.K != 2:
            raise InvalidArgument("two-attribute prior required")
        beta, gamma = float(self.beta), float(self.gamma)
        if not (np.isfinite(beta) and beta >= 0 and np.isfinite(gamma)):
            raise InvalidArgument("beta must be >= 0 and gamma finite")
        lo, hi = gamma_bounds(ad, beta)
        if not (lo <= gamma <= hi):
            raise InvalidArgument(f"gamma={gamma!r} outside [{lo!r}, {hi!r}] for beta={beta!r}")
        object.__setattr__(self, "alpha_d", ad)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "T", check_budget(self.T))


def gamma_bounds(alpha_d, beta: float) -> tuple[float, float]:
    """Admissible distortions: those keeping both analyst weights non-negative."""
    a1, a2 = alpha_d
    return -beta * a2 / a1, beta * a1 / a2


def compose_weights(spec: OrgSpec) -> np.ndarray:
    a1, a2 = spec.alpha_d
    b, c = spec.beta, spec.gamma
    # clamp tiny negatives produced by rounding at the edges of the admissible set
    return np.maximum(np.array([b * a1 - c * a2, b * a2 + c * a1]), 0.0)


@dataclass(frozen=True)
class Thresholds:
    gamma1: float
    gamma2: float
    beta1: float
    beta2: float


def distortion_thresholds(alpha_d, beta: float) -> Thresholds:
    """Distortions bounding the no-test band (sensitivity <= 1/2), and the
    sensitivities at which the band meets the admissible boundary."""
    a1, a2 = as_weights(alpha_d, "alpha_d")
    if a1 <= 0 or a2 <= 0:
        raise InvalidArgument("alpha_d must be strictly positive")
    norm = a1**2 + a2**2
    return Thresholds(
        gamma1=-(0.5 - beta) * a1 / a2,
        gamma2=(0.5 - beta) * a2 / a1,
        beta1=0.5 * a1**2 / norm,
        beta2=0.5 * a2**2 / norm,
    )


@dataclass(frozen=True)
class RegionResult:
    label: Region
    tau: np.ndarray


def _label(tau: np.ndarray) -> Region:
    on = tau > 0
    if on.all():
        return Region.L12
    if on[0]:
        return Region.L1
    if on[1]:
        return Region.L2
    return Region.L0


def classify_region(spec: OrgSpec) -> RegionResult:
    """Closed-form equilibrium tests for the decomposed analyst, with a label."""
    ar = compose_weights(spec)
    tau = allocation_two(auxiliary_weights(ar, spec.alpha_d), spec.prior, spec.T)
    return RegionResult(_label(tau), tau)


def game_of(spec: OrgSpec) -> GameSpec:
    return GameSpec(spec.prior, spec.alpha_d, compose_weights(spec), spec.T)


def manager_payoff(spec: OrgSpec) -> float:
    return value_dm(spec.alpha_d, spec.prior, classify_region(spec).tau)


def manager_first_best(alpha_d, prior: Prior, T) -> float:
    return value_dm(alpha_d, prior, allocation_two(alpha_d, prior, T))


@dataclass(frozen=True)
class ScanReport:
    direction: str  # "increasing" / "decreasing"
    points: list  # (parameter, payoff) pairs in scan order
    violations: list
    skipped: list

    @property
    def ok(self) -> bool:
        return not self.violations


def _violations(values, increasing: bool, tol: float):
    out = []
    for i in range(1, len(values)):
        step = values[i] - values[i - 1]
        if (increasing and step < -tol) or (not increasing and step > tol):
            out.append((i, step))
    return out


def cs_gamma_scan(alpha_d, beta: float, prior: Prior, T, grid, tol: float = VIOLATION_TOL) -> ScanReport:
    """Manager payoff as the analyst becomes more distorted.

    ``grid`` holds distortion magnitudes; both half-lines (gamma >= 0 moving
    up, gamma <= 0 moving down) are scanned from gamma = 0 outward and never
    compared with each other.  Magnitudes outside the admissible set are
    skipped.
    """
    lo, hi = gamma_bounds(alpha_d, beta)
    mags = np.unique(np.abs(np.asarray(grid, dtype=float)))
    increasing = beta <= 0.5
    points, viols, skipped = [], [], []
    for sign, bound in ((1.0, hi), (-1.0, lo)):
        vals = []
        for m in mags:
            g = sign * m
            if abs(g) > abs(bound):
                skipped.append(g)
                continue
            v = manager_payoff(OrgSpec(alpha_d, beta, g, prior, T))
            points.append((g, v))
            vals.append(v)
        viols += _violations(vals, increasing, tol)
    return ScanReport("increasing" if increasing else "decreasing", points, viols, skipped)


def cs_beta_scan(alpha_d, gamma: float, prior: Prior, T, grid, tol: float = VIOLATION_TOL) -> ScanReport:
    """Manager payoff as the analyst's sensitivity grows, distortion fixed."""
    points, skipped, vals = [], [], []
    for b in np.sort(np.asarray(grid, dtype=float)):
        lo, hi = gamma_bounds(alpha_d, b)
        if not (lo <= gamma <= hi):
            skipped.append(b)
            continue
        v = manager_payoff(OrgSpec(alpha_d, b, gamma, prior, T))
        points.append((b, v))
        vals.append(v)
    return ScanReport("increasing", points, _violations(vals, True, tol), skipped)


@dataclass(frozen=True)
class MapRow:
    beta: float
    gamma: float
    alpha_r: np.ndarray
    region: Region
    tau: np.ndarray
    v_d: float


def region_map(alpha_d, prior: Prior, T, beta_max: float = 2.0, beta_steps: int = 80, gamma_steps: int = 80):
    """Equilibrium regions on a (beta, gamma) lattice spanning the admissible set."""
    rows = []
    for b in np.linspace(0.0, beta_max, beta_steps):
        lo, hi = gamma_bounds(alpha_d, b)
        for u in np.linspace(0.0, 1.0, gamma_steps):
            g = lo + u * (hi - lo)
            spec = OrgSpec(alpha_d, b, min(max(g, lo), hi), prior, T)
            res = classify_region(spec)
            rows.append(MapRow(b, spec.gamma, compose_weights(spec), res.label, res.tau, value_dm(alpha_d, prior, res.tau)))
    return rows


def in_no_test_rectangle(alpha_r, alpha_d) -> bool:
    return bool(np.all(2.0 * np.asarray(alpha_r) <= np.asarray(alpha_d)))


def check_against_equilibrium(spec: OrgSpec, tol: float = 1e-9) -> bool:
    return bool(np.max(np.abs(classify_region(spec).tau - equilibrium_allocation(game_of(spec)).tau_star)) <= tol)

"""Learning before one's own preferences may change.

Today's self has weights ``alpha_r``.  With probability ``p`` the future self
scales its weight on attribute 2 by ``c``.  The naif tests as if nothing will
change; the sophisticate anticipates the change.  Standard normal priors and a
unit test budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .core_model import InvalidArgument, Prior, as_weights
from .oracle_mc import draw_state_and_means, mc_estimate
from .solver import allocation_two

PRIOR = Prior([0.0, 0.0], [1.0, 1.0])
BUDGET = 1.0
MARGIN_TOL = 1e-9


class Criterion(str, Enum):
    INITIAL = "initial"
    CHANGED = "changed"


class Ordering(str, Enum):
    NAIF = "naif-better"
    SOPHISTICATE = "sophisticate-better"
    EQUAL = "equal"


@dataclass(frozen=True)
class DualSelfSpec:
    alpha_r: np.ndarray
    p: float
    c: float

    def __post_init__(self):
        w = as_weights(self.alpha_r, "alpha_r")
        if w.size != 2 or np.any(w <= 0):
            raise InvalidArgument("alpha_r must have two strictly positive entries")
        p, c = float(self.p), float(self.c)
        if not (0 < p < 1):
            raise InvalidArgument("p must lie in (0, 1)")
        if not (np.isfinite(c) and c > 0 and c != 1):
            raise InvalidArgument("c must be positive and different from 1")
        object.__setattr__(self, "alpha_r", w)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "c", c)


def _factor_exact(spec: DualSelfSpec) -> Fraction:
    # 1 - p + p c (2 - c), evaluated exactly on the binary inputs
    p, c = Fraction(spec.p), Fraction(spec.c)
    return 1 - p + p * c * (2 - c)


def sophisticate_aux_weights(spec: DualSelfSpec) -> np.ndarray:
    """Weights under which the sophisticate's problem is a lone-agent problem."""
    f = _factor_exact(spec)
    scale = float(f) ** 0.5 if f > 0 else 0.0
    return np.array([spec.alpha_r[0], spec.alpha_r[1] * scale])


def naif_allocation(spec: DualSelfSpec, T: float = BUDGET) -> np.ndarray:
    return allocation_two(spec.alpha_r, PRIOR, T)


def sophisticate_allocation(spec: DualSelfSpec, T: float = BUDGET) -> np.ndarray:
    return allocation_two(sophisticate_aux_weights(spec), PRIOR, T)


def strategic_ignorance(spec: DualSelfSpec) -> bool:
    """True iff the sophisticate never tests attribute 2, whatever the budget.

    Decided exactly: ``sqrt(p) (c - 1) >= 1`` is ``c > 1 and p (c - 1)^2 >= 1``.
    """
    p, c = Fraction(spec.p), Fraction(spec.c)
    return c > 1 and p * (c - 1) ** 2 >= 1


def value_initial(spec: DualSelfSpec, tau) -> float:
    """Expected initial-preference utility when the future self acts."""
    a1, a2 = spec.alpha_r
    p, c = spec.p, spec.c
    tau = np.asarray(tau, dtype=float)
    s_hat = 1.0 / (1.0 + tau)
    learned2 = 1.0 - s_hat[1]
    unchanged2 = s_hat[1]
    changed2 = (c * c - 2 * c) * learned2 + 1.0
    return -(a1**2 * s_hat[0]) - a2**2 * ((1 - p) * unchanged2 + p * changed2)


def value_changed(spec: DualSelfSpec, tau) -> float:
    """Expected utility evaluated by whichever preferences are realised."""
    a1, a2 = spec.alpha_r
    p, c = spec.p, spec.c
    tau = np.asarray(tau, dtype=float)
    s_hat = 1.0 / (1.0 + tau)
    return -(a1**2) * s_hat[0] - a2**2 * (1 - p + p * c * c) * s_hat[1]


@dataclass(frozen=True)
class WelfareComparison:
    ordering: Ordering
    margin: float  # naif value minus sophisticate value
    naif: np.ndarray
    sophisticate: np.ndarray
    boundary: bool


def equality_region(spec: DualSelfSpec) -> tuple[bool, bool]:
    """``(equal, on_boundary)``: whether both selves pick identical tests."""
    a1, a2 = spec.alpha_r
    a2_hat = sophisticate_aux_weights(spec)[1]
    lo, hi = a2_hat / 2, 2 * a2
    return not (lo < a1 < hi), a1 in (lo, hi)


def welfare_compare(spec: DualSelfSpec, criterion: Criterion | str, tol: float = MARGIN_TOL) -> WelfareComparison:
    crit = Criterion(criterion)
    value = value_initial if crit is Criterion.INITIAL else value_changed
    tn, ts = naif_allocation(spec), sophisticate_allocation(spec)
    margin = value(spec, tn) - value(spec, ts)
    if margin > tol:
        order = Ordering.NAIF
    elif margin < -tol:
        order = Ordering.SOPHISTICATE
    else:
        order = Ordering.EQUAL
    return WelfareComparison(order, float(margin), tn, ts, equality_region(spec)[1])


def simulate_selves(spec: DualSelfSpec, tau, n: int, seed: int, workers=None):
    """Monte Carlo: preferences flip with probability ``p`` per draw.

    Returns estimates of the initial-criterion and changed-criterion values.
    """
    tau = np.asarray(tau, dtype=float)
    a1, a2 = spec.alpha_r

    def sample(rng, m):
        theta, post = draw_state_and_means(rng, m, PRIOR, tau)
        flip = rng.random(m) < spec.p
        w2 = np.where(flip, spec.c * a2, a2)
        d = a1 * post[:, 0] + w2 * post[:, 1]
        u_init = -((d - a1 * theta[:, 0] - a2 * theta[:, 1]) ** 2)
        u_real = -((d - a1 * theta[:, 0] - w2 * theta[:, 1]) ** 2)
        return np.column_stack([u_init, u_real])

    return mc_estimate(sample, n, seed, workers)

"""Independent verification backends.

* ``grid_argmax``: brute force over a lattice of the budget set
  ``{tau >= 0, sum(tau) <= T}``, optionally polished by projected pattern
  search (single-coordinate moves and pairwise transfers, step halving).
* ``simulate_game``: seeded Monte Carlo of the full timeline: draw the
  state, draw signals, update, let the decision-maker act, score realised
  utilities.

Random numbers come from numpy's counter-based Philox generator, one stream
per chunk of draws, keyed by ``stream_split(seed, chunk_index)``.  Normal
variates use ``Generator.standard_normal`` (ziggurat).  Chunks are reduced in
index order, so results depend on ``(inputs, seed, n)`` only, never on the
number of worker threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core_model import GameSpec, InvalidArgument, Prior, as_tau, check_budget

MAX_GRID_POINTS = 3_000_000
CHUNK = 1 << 16
THREADS_ENV = "ATTRLEARN_THREADS"


class ResourceLimit(RuntimeError):
    pass


@dataclass(frozen=True)
class GridSpec:
    resolution: float = 0.05
    refine: bool = True
    max_iter: int = 5000

    def __post_init__(self):
        if not (0 < self.resolution <= 1):
            raise InvalidArgument("resolution must lie in (0, 1]")


def lattice_size(K: int, N: int) -> int:
    return math.comb(N + K, K)


def simplex_lattice(K: int, N: int) -> np.ndarray:
    """All non-negative integer K-vectors with sum <= N, as an (m, K) array."""
    size = lattice_size(K, N)
    if size > MAX_GRID_POINTS:
        raise ResourceLimit(
            f"{size} grid points for K={K} at 1/{N} resolution; "
            "coarsen the resolution or enable refinement instead"
        )
    pts = np.zeros((1, 0), dtype=np.int64)
    rem = np.array([N], dtype=np.int64)
    for _ in range(K):
        counts = rem + 1
        rows = np.repeat(np.arange(len(rem)), counts)
        offsets = np.repeat(np.cumsum(counts) - counts, counts)
        vals = np.arange(rows.size) - offsets
        pts = np.column_stack([pts[rows], vals])
        rem = rem[rows] - vals
    return pts


def project_budget_set(x: np.ndarray, T: float) -> np.ndarray:
    """Euclidean projection of rows onto ``{y >= 0, sum(y) <= T}``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.maximum(x, 0.0)
    over = y.sum(axis=1) > T
    if np.any(over):
        z = x[over]
        u = -np.sort(-z, axis=1)
        css = np.cumsum(u, axis=1) - T
        idx = np.arange(1, z.shape[1] + 1)
        cond = u - css / idx > 0
        rho = z.shape[1] - 1 - np.argmax(cond[:, ::-1], axis=1)
        theta = css[np.arange(len(z)), rho] / (rho + 1)
        y[over] = np.maximum(z - theta[:, None], 0.0)
    return y


def _as_batch(value_fn, vectorized: bool):
    if vectorized:
        return value_fn
    return lambda X: np.array([value_fn(row) for row in X], dtype=float)


def _directions(K: int) -> np.ndarray:
    eye = np.eye(K)
    dirs = [eye, -eye]
    pairs = [eye[i] - eye[j] for i in range(K) for j in range(K) if i != j]
    if pairs:
        dirs.append(np.array(pairs))
    return np.vstack(dirs)


def refine_ascent(batch_fn, tau0, T: float, step: float, max_iter: int = 5000):
    """Projected pattern search from ``tau0``; halves the step when stuck."""
    tau = np.asarray(tau0, dtype=float)
    v = batch_fn(tau[None, :])[0]
    dirs = _directions(tau.size)
    eps = np.finfo(np.result_type(v, float)).eps
    for _ in range(max_iter):
        if step < 1e-10 * T:
            break
        cand = project_budget_set(tau + step * dirs, T)
        vals = batch_fn(cand)
        i = int(np.argmax(vals))
        if vals[i] - v > 8 * eps * abs(v):
            tau, v = cand[i], vals[i]
        else:
            step *= 0.5
    return tau, float(v)


def grid_argmax(value_fn: Callable, K: int, T, spec: GridSpec = GridSpec(), vectorized: bool = False) -> np.ndarray:
    """Best lattice point of the budget set, optionally refined.

    ``value_fn`` maps an allocation to a real; with ``vectorized=True`` it maps
    an (m, K) array of allocations to m values.
    """
    T = check_budget(T)
    N = max(1, int(round(1.0 / spec.resolution)))
    fn = _as_batch(value_fn, vectorized)
    pts = simplex_lattice(K, N) * (T / N)
    vals = fn(pts)
    best = pts[int(np.argmax(vals))]
    if spec.refine:
        best, _ = refine_ascent(fn, best, T, T / N, spec.max_iter)
    return best


# ---------------------------------------------------------------- value batches


# The batches below evaluate in extended precision (where the platform has it):
# near a flat optimum the terms cancel, and double precision cannot separate
# allocations that differ by 1e-6 of a large budget.
EXT = np.longdouble


def single_value_batch(w, p: Prior):
    w2 = np.asarray(w, dtype=EXT) ** 2
    s0 = p.sigma0.astype(EXT)

    def fn(X):
        X = np.atleast_2d(X).astype(EXT)
        return -((w2 * s0 / (1 + X * s0)).sum(axis=1))

    return fn


def researcher_value_batch(g: GameSpec):
    """Vectorised researcher value in covariance form."""
    s0, ad, ar, mu0 = (a.astype(EXT) for a in (g.prior.sigma0, g.alpha_d, g.alpha_r, g.prior.mu0))
    br0 = ar @ mu0
    bd0 = ad @ mu0
    v_empty = -((bd0 - br0) ** 2) - ar**2 @ s0

    def fn(X):
        X = np.atleast_2d(X).astype(EXT)
        s_hat = s0 / (1 + X * s0)
        cov = 2 * (ad * ar * s0 * s_hat * X).sum(axis=1)
        psi = (ad**2 * (s0 - s_hat)).sum(axis=1)
        return cov - psi + v_empty

    return fn


# ---------------------------------------------------------------- Monte Carlo


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n: int
    seed: int

    def agrees(self, value: float, k: float = 3.0) -> bool:
        return abs(self.mean - value) <= k * self.stderr


def stream_split(seed: int, lane: int) -> int:
    """Deterministic 64-bit key for substream ``lane`` of ``seed``."""
    if seed < 0 or lane < 0:
        raise InvalidArgument("seed and lane must be non-negative")
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(lane),))
    hi, lo = ss.generate_state(2, dtype=np.uint32)
    return (int(hi) << 32) | int(lo)


def rng_for(seed: int, lane: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(stream_split(seed, lane)))


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def mc_estimate(sample_fn, n: int, seed: int, workers: int | None = None, chunk: int = CHUNK) -> list[McEstimate]:
    """Average the columns of ``sample_fn(rng, m) -> (m, q)`` over ``n`` draws.

    Chunk ``c`` draws from ``rng_for(seed, c)``; per-chunk means and squared
    deviations are merged in chunk order.
    """
    if int(n) != n or n < 2:
        raise InvalidArgument("n must be an integer >= 2")
    if int(seed) != seed or seed < 0:
        raise InvalidArgument("seed must be a non-negative integer")
    n, seed = int(n), int(seed)
    sizes = [chunk] * (n // chunk) + ([n % chunk] if n % chunk else [])

    def run(c):
        x = np.asarray(sample_fn(rng_for(seed, c), sizes[c]), dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        mu = x.mean(axis=0)
        return x.shape[0], mu, ((x - mu) ** 2).sum(axis=0)

    workers = workers or default_workers()
    if workers == 1:
        parts = [run(c) for c in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(run, range(len(sizes))))

    cnt, mean, m2 = parts[0]
    for nb, mb, m2b in parts[1:]:
        tot = cnt + nb
        d = mb - mean
        mean = mean + d * (nb / tot)
        m2 = m2 + m2b + d**2 * (cnt * nb / tot)
        cnt = tot
    se = np.sqrt(m2 / (cnt - 1) / cnt)
    return [McEstimate(float(a), float(b), n, seed) for a, b in zip(mean, se)]


def draw_state_and_means(rng, m: int, prior: Prior, tau: np.ndarray):
    """Sample ``theta`` and posterior means after signals of precision ``tau``.

    Attributes with ``tau_k == 0`` get no signal: their posterior mean stays
    at the prior mean.
    """
    K = prior.K
    theta = prior.mu0 + np.sqrt(prior.sigma0) * rng.standard_normal((m, K))
    post = np.broadcast_to(prior.mu0, (m, K)).copy()
    on = np.flatnonzero(tau > 0)
    if on.size:
        s = theta[:, on] + rng.standard_normal((m, on.size)) / np.sqrt(tau[on])
        gain = tau[on] * prior.sigma0[on] / (1.0 + tau[on] * prior.sigma0[on])
        post[:, on] = (1.0 - gain) * prior.mu0[on] + gain * s
    return theta, post


@dataclass(frozen=True)
class GameSimulation:
    researcher: McEstimate
    decision_maker: McEstimate
    groups: list  # one McEstimate per attribute: E[-(d - theta_k)^2]


def simulate_game(g: GameSpec, tau, n: int, seed: int, workers: int | None = None) -> GameSimulation:
    tau = as_tau(tau, K=g.K, budget=g.budget)

    def sample(rng, m):
        theta, post = draw_state_and_means(rng, m, g.prior, tau)
        d = post @ g.alpha_d
        u_r = -((d - theta @ g.alpha_r) ** 2)
        u_d = -((d - theta @ g.alpha_d) ** 2)
        u_k = -((d[:, None] - theta) ** 2)
        return np.column_stack([u_r, u_d, u_k])

    est = mc_estimate(sample, n, seed, workers)
    return GameSimulation(est[0], est[1], est[2:])

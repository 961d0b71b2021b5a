"""Maximising Q over the action box, plus softmax diagnostics for 1-D actions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.special import logsumexp

from .qfunction import QFunction


# ascent stops once the trial step is this small, in units of the box width
MIN_STEP = 1e-6


class UnsupportedDiagnostic(ValueError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    n_seeds: int = 64
    ascent_steps: int = 100
    ascent_rate: float = 0.05
    quadrature_points: int = 201
    n_starts: int = 4  # best seeds refined by ascent

    def __post_init__(self):
        if self.n_seeds < 1:
            raise ValueError("n_seeds must be at least 1")
        if self.ascent_steps < 0:
            raise ValueError("ascent_steps must be nonnegative")
        if self.ascent_rate <= 0:
            raise ValueError("ascent_rate must be positive")
        if self.n_starts < 1:
            raise ValueError("n_starts must be at least 1")


def _box(bounds) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = (np.atleast_1d(np.asarray(b, dtype=float)) for b in bounds)
    if lo.shape != hi.shape or np.any(hi < lo):
        raise ValueError(f"invalid action box {bounds}")
    return lo, hi


class _ActionProfile:
    """Q(s, .) for a fixed state, as a Gaussian mixture over actions."""

    def __init__(self, Q: QFunction, s):
        self.u = Q.state_weights(s)
        self.centres = Q.points[:, Q.state_dim:]
        self.scale = Q.kernel.scale[Q.state_dim:]

    def values(self, A: np.ndarray) -> np.ndarray:
        d = (A[:, None, :] - self.centres[None, :, :]) * self.scale
        return np.exp(-0.5 * np.einsum("ijk,ijk->ij", d, d)) @ self.u


@njit(cache=True)
def _value_grad(u, centres, scale, a, grad):
    M, q = centres.shape
    total = 0.0
    for j in range(q):
        grad[j] = 0.0
    for m in range(M):
        r = 0.0
        for j in range(q):
            d = (a[j] - centres[m, j]) * scale[j]
            r += d * d
        k = u[m] * np.exp(-0.5 * r)
        total += k
        for j in range(q):
            grad[j] -= k * (a[j] - centres[m, j]) * scale[j] * scale[j]
    return total


@njit(cache=True)
def _value(u, centres, scale, a):
    M, q = centres.shape
    total = 0.0
    for m in range(M):
        r = 0.0
        for j in range(q):
            d = (a[j] - centres[m, j]) * scale[j]
            r += d * d
        total += u[m] * np.exp(-0.5 * r)
    return total


@njit(cache=True)
def _multistart_ascent(u, centres, scale, lo, hi, seeds, n_starts, steps, rate):
    n, q = seeds.shape
    width = hi - lo
    seed_vals = np.empty(n)
    for i in range(n):
        seed_vals[i] = _value(u, centres, scale, seeds[i])
    order = np.argsort(-seed_vals, kind="mergesort")
    best_a = seeds[order[0]].copy()
    best_v = seed_vals[order[0]]
    g = np.empty(q)
    cg = np.empty(q)
    cand = np.empty(q)
    for k in range(min(n_starts, n)):
        a = seeds[order[k]].copy()
        v = _value_grad(u, centres, scale, a, g)
        h = rate
        for _ in range(steps):
            gnorm = 0.0
            for j in range(q):
                gnorm += (g[j] * width[j]) ** 2
            gnorm = np.sqrt(gnorm)
            if gnorm == 0.0 or h <= MIN_STEP:
                break
            for j in range(q):
                x = a[j] + h * g[j] * width[j] * width[j] / gnorm
                cand[j] = min(max(x, lo[j]), hi[j])
            cv = _value_grad(u, centres, scale, cand, cg)
            if cv > v:
                a[:] = cand
                g[:] = cg
                v = cv
                h = min(h * 1.5, 0.5)
            else:
                h *= 0.5
        if v > best_v:
            best_v = v
            best_a = a.copy()
    return best_a, best_v


def maximize_action(Q: QFunction, s, bounds, cfg: SearchConfig, rng: np.random.Generator):
    """Approximate ``argmax_a Q(s, a)`` over the box ``bounds = (low, high)``.

    Uniform seeds are scored, and the best ``cfg.n_starts`` of them are
    refined by monotone gradient ascent: a step of length ``h`` (in units
    of the box width) is taken along the normalised gradient and kept only
    if it raises Q; accepted steps grow ``h`` by 1.5, rejected ones halve
    it. Iterates are clipped to the box. Ties keep the earliest seed.
    """
    lo, hi = _box(bounds)
    if Q.model_order == 0:
        return (lo + hi) / 2.0, 0.0
    seeds = lo + (hi - lo) * rng.random((cfg.n_seeds, lo.size))
    u = Q.state_weights(s)
    centres = np.ascontiguousarray(Q.points[:, Q.state_dim:])
    scale = np.ascontiguousarray(Q.kernel.scale[Q.state_dim:])
    a, v = _multistart_ascent(u, centres, scale, lo, hi, seeds, cfg.n_starts, cfg.ascent_steps,
                              cfg.ascent_rate)
    return a, float(v)


def _quadrature(Q: QFunction, s, bounds, n: int):
    if Q.action_dim != 1:
        raise UnsupportedDiagnostic("softmax diagnostics support one-dimensional actions only")
    lo, hi = _box(bounds)
    if n < 2:
        raise ValueError("need at least two quadrature points")
    grid = np.linspace(lo[0], hi[0], n)
    dx = np.full(n, (hi[0] - lo[0]) / (n - 1))
    dx[[0, -1]] *= 0.5
    if Q.model_order == 0:
        vals = np.zeros(n)
    else:
        vals = _ActionProfile(Q, s).values(grid[:, None])
    return grid, dx, vals


def softmax_value(Q: QFunction, s, eta: float, bounds, n: int = 201) -> float:
    """``(1/eta) log \\int exp(eta Q(s, a)) da`` by the composite trapezoid rule."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    _, dx, vals = _quadrature(Q, s, bounds, n)
    return float(logsumexp(eta * vals, b=dx) / eta)


def softmax_gradient_weights(Q: QFunction, s, eta: float, bounds, n: int = 201):
    """Quadrature nodes and normalised weights of the softmax functional gradient.

    The gradient is ``sum_i weight_i * k((s, a_i), .)``.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    grid, dx, vals = _quadrature(Q, s, bounds, n)
    logw = eta * vals + np.log(dx)
    w = np.exp(logw - logsumexp(logw))
    return grid, w / w.sum()

"""Update rules: KQ (two-atom quasi-gradient), semi-gradient, and hybrid.

All three share the same bookkeeping: compute the temporal action
difference against the current Q, fold it into the auxiliary average ``z``,
append atoms weighted by ``z``, then compress with budget ``C * alpha_t**2``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .komp import CompressionBudget, CompressionReport, komp_compress
from .qfunction import QFunction, append_atoms, q_eval


@dataclass(frozen=True)
class LearnerConfig:
    alpha: float = 0.25
    beta: float = 1.0
    lambda_reg: float = 1e-4
    parsimony: float = 2.0
    gamma_discount: float = 0.99
    schedule: str = "constant"
    p_alpha: float = 0.9
    p_beta: float = 0.7
    softmax_eta: float | None = None

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0 < self.beta <= 1:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")
        if self.lambda_reg < 0:
            raise ValueError("lambda_reg must be nonnegative")
        if self.parsimony <= 0:
            raise ValueError("parsimony constant must be positive")
        if not 0 < self.gamma_discount < 1:
            raise ValueError(f"discount must lie in (0, 1), got {self.gamma_discount}")
        if self.softmax_eta is not None and self.softmax_eta <= 0:
            raise ValueError("softmax_eta must be positive")
        if self.schedule == "constant":
            if not self.alpha < self.beta:
                raise ValueError(f"constant step sizes need alpha < beta, got {self.alpha} >= {self.beta}")
            if self.beta == 1.0:
                warnings.warn("beta = 1 disables averaging of the temporal difference (z_t = delta_t)",
                              stacklevel=3)
        elif self.schedule == "diminishing":
            pa, pb = self.p_alpha, self.p_beta
            if not (0.5 < pa <= 1 and 0.5 < pb <= 1):
                raise ValueError(f"decay exponents must lie in (0.5, 1], got ({pa}, {pb})")
            # sum alpha_t^2 / beta_t converges iff 2 p_alpha - p_beta > 1
            if not 2 * pa - pb > 1:
                raise ValueError(f"2*p_alpha - p_beta must exceed 1, got {2 * pa - pb:g}")
            if not pa > pb:
                raise ValueError("alpha must decay faster than beta (p_alpha > p_beta)")
        else:
            raise ValueError(f"unknown schedule {self.schedule!r}")


def step_sizes(cfg: LearnerConfig, t: int) -> tuple[float, float, float]:
    """(alpha_t, beta_t, eps_t) at iteration ``t``."""
    if cfg.schedule == "constant":
        a, b = cfg.alpha, cfg.beta
    else:
        a = cfg.alpha * (1.0 + t) ** (-cfg.p_alpha)
        b = cfg.beta * (1.0 + t) ** (-cfg.p_beta)
    return a, b, cfg.parsimony * a * a


@dataclass(frozen=True)
class SarsaTuple:
    """One transition plus the maximising next action.

    ``terminal`` marks a true episode end (no bootstrap); time-limit
    truncation is not terminal.
    """

    s: np.ndarray
    a: np.ndarray
    r: float
    s_next: np.ndarray
    a_next: np.ndarray | None = None
    exploratory: bool = True
    terminal: bool = False

    def with_next_action(self, a_next) -> "SarsaTuple":
        return replace(self, a_next=np.asarray(a_next, dtype=float))

    @property
    def x(self) -> np.ndarray:
        return np.concatenate([np.ravel(self.s), np.ravel(self.a)])

    @property
    def x_next(self) -> np.ndarray:
        return np.concatenate([np.ravel(self.s_next), np.ravel(self.a_next)])


@dataclass
class LearnerState:
    q: QFunction
    z: float = 0.0
    step: int = 0
    eps_current: float = 0.0
    last_delta: float = 0.0

    @classmethod
    def initial(cls, q: QFunction, cfg: LearnerConfig) -> "LearnerState":
        return cls(q=q, z=0.0, step=0, eps_current=step_sizes(cfg, 0)[2])


def temporal_action_difference(q: QFunction, t: SarsaTuple, gamma: float) -> float:
    target = t.r
    if not t.terminal:
        target += gamma * q_eval(q, t.x_next)
    return target - q_eval(q, t.x)


def update_z(z: float, delta: float, beta: float) -> float:
    return (1.0 - beta) * z + beta * delta


def _advance(state: LearnerState, t: SarsaTuple, cfg: LearnerConfig,
             atoms: Callable[[float, float], list]) -> tuple[LearnerState, CompressionReport]:
    if t.a_next is None and not t.terminal:
        raise ValueError("SARSA tuple needs the maximising next action")
    alpha, beta, eps = step_sizes(cfg, state.step)
    delta = temporal_action_difference(state.q, t, cfg.gamma_discount)
    z_next = update_z(state.z, delta, beta)
    new_atoms = atoms(alpha, z_next)
    q_tilde = append_atoms(state.q, 1.0 - alpha * cfg.lambda_reg, new_atoms)
    q_next, report = komp_compress(q_tilde, CompressionBudget(eps))
    report.appended = len(new_atoms)
    _, _, eps_next = step_sizes(cfg, state.step + 1)
    return LearnerState(q_next, z_next, state.step + 1, eps_next, delta), report


def kq_step(state: LearnerState, t: SarsaTuple, cfg: LearnerConfig):
    """Projected stochastic quasi-gradient step (two atoms)."""
    def atoms(alpha, z):
        out = [(t.x, alpha * z)]
        if not t.terminal:
            out.append((t.x_next, -alpha * cfg.gamma_discount * z))
        return out
    return _advance(state, t, cfg, atoms)


def semigradient_step(state: LearnerState, t: SarsaTuple, cfg: LearnerConfig):
    """Single-atom update at the visited pair."""
    return _advance(state, t, cfg, lambda alpha, z: [(t.x, alpha * z)])


def hybrid_step(state: LearnerState, t: SarsaTuple, cfg: LearnerConfig):
    if t.exploratory:
        return kq_step(state, t, cfg)
    return semigradient_step(state, t, cfg)


UPDATE_RULES = {
    "kq": kq_step,
    "semigradient": semigradient_step,
    "hybrid": hybrid_step,
}


def mean_temporal_difference(q: QFunction, sample_next: Callable[[], tuple], s, a,
                             next_action: Callable, gamma: float, n: int = 16) -> float:
    """Monte Carlo estimate of E[delta | s, a].

    ``sample_next()`` returns ``(s_next, reward, terminal)``; for
    deterministic dynamics every draw agrees and the estimate equals the
    single-sample difference.
    """
    total = 0.0
    for _ in range(n):
        s_next, r, terminal = sample_next()
        t = SarsaTuple(np.asarray(s), np.asarray(a), r, np.asarray(s_next),
                       None if terminal else next_action(s_next), terminal=terminal)
        total += temporal_action_difference(q, t, gamma)
    return total / n

"""rho-greedy exploration with a linearly decaying exploration rate."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .action_search import SearchConfig, maximize_action
from .qfunction import QFunction


@dataclass(frozen=True)
class RhoSchedule:
    rho_start: float = 1.0
    rho_end: float = 0.1
    decay_steps: int = 100_000

    def __post_init__(self):
        if not 1.0 >= self.rho_start >= self.rho_end >= 0.0:
            raise ValueError("need 1 >= rho_start >= rho_end >= 0")
        if self.decay_steps < 0:
            raise ValueError("decay_steps must be nonnegative")


def rho_at(schedule: RhoSchedule, t: int) -> float:
    if t >= schedule.decay_steps:
        return schedule.rho_end
    frac = t / schedule.decay_steps
    return schedule.rho_start + frac * (schedule.rho_end - schedule.rho_start)


def uniform_action(bounds, rng: np.random.Generator) -> np.ndarray:
    lo, hi = (np.atleast_1d(np.asarray(b, dtype=float)) for b in bounds)
    return lo + (hi - lo) * rng.random(lo.size)


def select_action(Q: QFunction, s, schedule: RhoSchedule, t: int, bounds,
                  search_cfg: SearchConfig, rng: np.random.Generator):
    """Returns ``(action, exploratory)``."""
    if rng.random() < rho_at(schedule, t):
        return uniform_action(bounds, rng), True
    a, _ = maximize_action(Q, s, bounds, search_cfg, rng)
    return a, False

"""Continuous Mountain Car and Inverted Pendulum with classic-control dynamics.

Both step functions are pure functions of (observation, action). Episode
length limits are enforced by the training loop, not here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class EnvSpec:
    name: str
    p: int
    q: int
    state_low: tuple
    state_high: tuple
    action_low: tuple
    action_high: tuple
    max_episode_steps: int

    def __post_init__(self):
        for lo, hi, n in ((self.state_low, self.state_high, self.p),
                          (self.action_low, self.action_high, self.q)):
            lo, hi = np.asarray(lo, float), np.asarray(hi, float)
            if lo.shape != (n,) or hi.shape != (n,):
                raise ValueError("box dimension does not match the declared size")
            if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(lo < hi)):
                raise ValueError("boxes must be finite and nonempty")

    @property
    def action_bounds(self):
        return np.asarray(self.action_low, float), np.asarray(self.action_high, float)

    @property
    def state_bounds(self):
        return np.asarray(self.state_low, float), np.asarray(self.state_high, float)


@dataclass(frozen=True)
class Transition:
    s_next: np.ndarray
    reward: float
    done: bool


# pendulum constants
G, MASS, LENGTH, DT = 10.0, 1.0, 1.0, 0.05
MAX_SPEED, MAX_TORQUE = 8.0, 2.0

PENDULUM = EnvSpec("pendulum", 3, 1, (-1.0, -1.0, -MAX_SPEED), (1.0, 1.0, MAX_SPEED),
                   (-MAX_TORQUE,), (MAX_TORQUE,), 200)


def angle_normalize(theta: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    x = np.arctan2(np.sin(theta), np.cos(theta))
    return float(np.pi if x == -np.pi else x)


def pendulum_obs(theta: float, theta_dot: float) -> np.ndarray:
    return np.array([np.cos(theta), np.sin(theta), theta_dot])


def pendulum_step(state, action) -> Transition:
    cos_th, sin_th, thdot = (float(v) for v in state)
    th = float(np.arctan2(sin_th, cos_th))
    thdot = float(np.clip(thdot, -MAX_SPEED, MAX_SPEED))
    u = float(np.clip(np.ravel(action)[0], -MAX_TORQUE, MAX_TORQUE))
    th_w = angle_normalize(th)
    reward = -(th_w ** 2 + 0.1 * thdot ** 2 + 0.001 * u ** 2)

    newthdot = thdot + (3 * G / (2 * LENGTH) * np.sin(th) + 3.0 / (MASS * LENGTH ** 2) * u) * DT
    newthdot = float(np.clip(newthdot, -MAX_SPEED, MAX_SPEED))
    newth = th + newthdot * DT
    return Transition(pendulum_obs(newth, newthdot), float(reward), False)


def pendulum_reset(rng: np.random.Generator) -> np.ndarray:
    # (-pi, pi]: reflect the half-open uniform draw on [-pi, pi)
    theta = -rng.uniform(-np.pi, np.pi)
    return pendulum_obs(theta, rng.uniform(-1.0, 1.0))


# mountain car constants
MIN_POS, MAX_POS, MAX_VEL = -1.2, 0.6, 0.07
GOAL_POS, POWER = 0.45, 0.0015

MOUNTAIN_CAR = EnvSpec("mountain_car", 2, 1, (MIN_POS, -MAX_VEL), (MAX_POS, MAX_VEL),
                       (-1.0,), (1.0,), 999)


def mountain_car_step(state, action) -> Transition:
    x, v = (float(c) for c in state)
    force = float(np.clip(np.ravel(action)[0], -1.0, 1.0))
    v = v + force * POWER - 0.0025 * np.cos(3 * x)
    v = float(np.clip(v, -MAX_VEL, MAX_VEL))
    x = float(np.clip(x + v, MIN_POS, MAX_POS))
    if x == MIN_POS and v < 0:
        v = 0.0
    done = x >= GOAL_POS
    reward = -0.1 * force ** 2 + (100.0 if done else 0.0)
    return Transition(np.array([x, v]), float(reward), bool(done))


def mountain_car_reset(rng: np.random.Generator) -> np.ndarray:
    return np.array([rng.uniform(-0.6, 0.4), 0.0])


@dataclass(frozen=True)
class Environment:
    spec: EnvSpec
    step: Callable[[np.ndarray, np.ndarray], Transition]
    reset: Callable[[np.random.Generator], np.ndarray]

    @property
    def name(self) -> str:
        return self.spec.name


ENVIRONMENTS = {
    "pendulum": Environment(PENDULUM, pendulum_step, pendulum_reset),
    "mountain_car": Environment(MOUNTAIN_CAR, mountain_car_step, mountain_car_reset),
}


def make_env(name: str) -> Environment:
    try:
        return ENVIRONMENTS[name]
    except KeyError:
        raise ValueError(f"unknown environment {name!r}; choose from {sorted(ENVIRONMENTS)}") from None


def reset(env: Environment, rng: np.random.Generator) -> np.ndarray:
    return env.reset(rng)


def write_trajectory(path, rows) -> None:
    """Dump ``(t, s, a, r, done)`` rows as comma-separated text."""
    rows = list(rows)
    with open(path, "w") as fh:
        if not rows:
            fh.write("t,r,done\n")
            return
        _, s0, a0, _, _ = rows[0]
        cols = ["t"] + [f"s{i}" for i in range(len(s0))] + [f"a{i}" for i in range(len(np.ravel(a0)))] + ["r", "done"]
        fh.write(",".join(cols) + "\n")
        for t, s, a, r, done in rows:
            vals = [str(int(t))] + [repr(float(v)) for v in np.ravel(s)] + [repr(float(v)) for v in np.ravel(a)]
            fh.write(",".join(vals + [repr(float(r)), str(int(bool(done)))]) + "\n")

"""The training loop, Bellman-error evaluation and multi-seed aggregation."""

from __future__ import annotations

import logging
import time
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ..action_search import SearchConfig, maximize_action
from ..envs import Environment, make_env
from ..learner import UPDATE_RULES, LearnerState, SarsaTuple, temporal_action_difference
from ..policy import RhoSchedule, select_action
from ..qfunction import QFunction, hilbert_norm_sq
from ..replay import BufferEntry, ReplayBuffer
from .config import RunConfig

log = logging.getLogger(__name__)

STEP_FIELDS = ("t", "model_order", "eps", "delta", "z", "appended", "removals", "exploratory")
INTERVAL_FIELDS = ("t", "avg_reward", "episodes", "bellman_raw", "bellman_normalized")
NORM_FLOOR = 1e-12


class BellmanError(NamedTuple):
    raw: float
    normalized: float
    degenerate: bool = False


@dataclass
class RunMetrics:
    seed: int = 0
    steps: dict = field(default_factory=lambda: {k: [] for k in STEP_FIELDS})
    intervals: dict = field(default_factory=lambda: {k: [] for k in INTERVAL_FIELDS})
    episodes: list = field(default_factory=list)  # (t_end, return, length)
    wall_time: float = 0.0

    def step_array(self, name: str) -> np.ndarray:
        return np.asarray(self.steps[name], dtype=float)

    def interval_array(self, name: str) -> np.ndarray:
        return np.asarray(self.intervals[name], dtype=float)

    @property
    def n_steps(self) -> int:
        return len(self.steps["t"])


def eval_bellman_error(Q: QFunction, env: Environment, n_traj: int, search_cfg: SearchConfig,
                       rng: np.random.Generator, gamma: float) -> BellmanError:
    """Sample-average Bellman loss along greedy test trajectories.

    Dynamics are deterministic, so the per-pair residual is
    ``r + gamma * max_a' Q(s', a') - Q(s, a)`` with no inner expectation.
    Returns the loss and the loss divided by the Hilbert norm of ``Q``.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be at least 1")
    bounds = env.spec.action_bounds
    residuals = []
    for _ in range(n_traj):
        s = env.reset(rng)
        a, q_sa = maximize_action(Q, s, bounds, search_cfg, rng)
        for _ in range(env.spec.max_episode_steps):
            tr = env.step(s, a)
            if tr.done:
                residuals.append(tr.reward - q_sa)
                break
            a_next, q_next = maximize_action(Q, tr.s_next, bounds, search_cfg, rng)
            residuals.append(tr.reward + gamma * q_next - q_sa)
            s, a, q_sa = tr.s_next, a_next, q_next
    f = np.asarray(residuals)
    raw = float(0.5 * np.mean(f * f))
    norm = float(np.sqrt(hilbert_norm_sq(Q)))
    degenerate = norm < NORM_FLOOR and raw > 0
    return BellmanError(raw, raw / max(norm, NORM_FLOOR), degenerate)


class TrainingRun:
    """Mutable state of one seeded run; picklable so runs can be checkpointed."""

    def __init__(self, config: RunConfig, seed: int):
        self.config = config
        self.seed = int(seed)
        self.env_name = config.env
        spec = self.env.spec
        self.rng = np.random.default_rng(self.seed)
        self.state = LearnerState.initial(QFunction.empty(config.kernel, spec.p), config.learner)
        self.buffer = ReplayBuffer(config.replay) if config.replay.mode != "off" else None
        self.metrics = RunMetrics(seed=self.seed)
        self.t = 0
        self.s = self.env.reset(self.rng)
        self.ep_return = 0.0
        self.ep_len = 0
        self.interval_returns: list[float] = []

    @property
    def env(self) -> Environment:
        return make_env(self.env_name)

    @property
    def q(self) -> QFunction:
        return self.state.q

    def _schedule(self) -> RhoSchedule:
        if self.config.policy == "exploratory":
            return RhoSchedule(1.0, 1.0, 0)
        return self.config.rho

    def _max_action(self, s):
        return maximize_action(self.state.q, s, self.env.spec.action_bounds, self.config.search, self.rng)[0]

    def step(self):
        cfg, env = self.config, self.env
        bounds = env.spec.action_bounds
        a, exploratory = select_action(self.state.q, self.s, self._schedule(), self.t, bounds,
                                       cfg.search, self.rng)
        tr = env.step(self.s, a)
        fresh = SarsaTuple(self.s, a, tr.reward, tr.s_next, None, exploratory, tr.done)

        entry_id = None
        if self.buffer is None:
            sample = fresh if tr.done else fresh.with_next_action(self._max_action(tr.s_next))
        else:
            priority = 0.0
            if cfg.replay.mode == "prioritized":
                if not tr.done:
                    fresh = fresh.with_next_action(self._max_action(tr.s_next))
                priority = abs(temporal_action_difference(self.state.q, fresh, cfg.learner.gamma_discount))
            self.buffer.push(BufferEntry(fresh, priority))
            entry_id, entry = self.buffer.sample(self.rng)
            sample = entry.tuple
            if not sample.terminal:
                # the maximiser is recomputed against the current Q
                sample = sample.with_next_action(self._max_action(sample.s_next))

        eps_used = self.state.eps_current
        self.state, report = UPDATE_RULES[cfg.algorithm](self.state, sample, cfg.learner)
        if entry_id is not None and cfg.replay.mode == "prioritized":
            self.buffer.update_priority(entry_id, abs(self.state.last_delta))

        self.t += 1
        rec = self.metrics.steps
        rec["t"].append(self.t)
        rec["model_order"].append(self.state.q.model_order)
        rec["eps"].append(eps_used)
        rec["delta"].append(self.state.last_delta)
        rec["z"].append(self.state.z)
        rec["appended"].append(report.appended)
        rec["removals"].append(len(report.removals))
        rec["exploratory"].append(int(exploratory))

        self.ep_return += tr.reward
        self.ep_len += 1
        if tr.done or self.ep_len >= env.spec.max_episode_steps:
            self.metrics.episodes.append((self.t, self.ep_return, self.ep_len))
            self.interval_returns.append(self.ep_return)
            self.s = env.reset(self.rng)
            self.ep_return, self.ep_len = 0.0, 0
        else:
            self.s = tr.s_next

        if self.t % cfg.eval_every == 0:
            self._close_interval()

    def _close_interval(self):
        cfg = self.config
        eval_rng = np.random.default_rng([self.seed, self.t])
        be = eval_bellman_error(self.state.q, self.env, cfg.eval_trajectories, cfg.search, eval_rng,
                                cfg.learner.gamma_discount)
        iv = self.metrics.intervals
        iv["t"].append(self.t)
        iv["avg_reward"].append(float(np.mean(self.interval_returns)) if self.interval_returns else float("nan"))
        iv["episodes"].append(len(self.interval_returns))
        iv["bellman_raw"].append(be.raw)
        iv["bellman_normalized"].append(be.normalized)
        self.interval_returns = []

    def run(self, checkpoint_path=None, progress_every: int = 0):
        start = time.perf_counter()
        total = self.config.total_steps
        while self.t < total:
            self.step()
            if progress_every and self.t % progress_every == 0:
                iv = self.metrics.intervals
                log.info("seed %d step %d order %d reward %s", self.seed, self.t,
                         self.state.q.model_order, iv["avg_reward"][-1] if iv["avg_reward"] else None)
            if checkpoint_path is not None and self.config.checkpoint_every \
                    and self.t % self.config.checkpoint_every == 0:
                from .checkpoint import save_checkpoint
                self.metrics.wall_time += time.perf_counter() - start
                start = time.perf_counter()
                save_checkpoint(self, checkpoint_path)
        self.metrics.wall_time += time.perf_counter() - start
        return self.state.q, self.metrics


def train(config: RunConfig, seed: int | None = None, checkpoint_path=None,
          resume_from=None, progress_every: int = 0) -> tuple[QFunction, RunMetrics]:
    """Run ``config.total_steps`` environment steps for one seed.

    With ``resume_from`` the checkpointed run continues from where it was
    saved up to ``config.total_steps`` (the stored config is otherwise kept).
    """
    if resume_from is not None:
        from .checkpoint import load_checkpoint
        run = load_checkpoint(resume_from)
        if config is not None:
            run.config = run.config.with_(total_steps=config.total_steps)
    else:
        run = TrainingRun(config, config.seeds[0] if seed is None else seed)
    return run.run(checkpoint_path=checkpoint_path, progress_every=progress_every)


def _window(n: int, frac: float) -> int:
    return max(1, int(np.ceil(frac * n))) if n else 0


def final_window_summary(m: RunMetrics, frac: float = 0.1) -> dict:
    """Order / Loss / Rewards over the final ``frac`` of training steps."""
    n = m.n_steps
    if n == 0:
        return {"order": float("nan"), "loss": float("nan"), "loss_raw": float("nan"), "rewards": float("nan")}
    t_cut = m.step_array("t")[-1] - _window(n, frac)
    order = m.step_array("model_order")[-_window(n, frac):].mean()
    it = m.interval_array("t")
    sel = it > t_cut
    rewards = m.interval_array("avg_reward")[sel]
    rewards = rewards[np.isfinite(rewards)]
    return {
        "order": float(order),
        "loss": float(np.mean(m.interval_array("bellman_normalized")[sel])) if sel.any() else float("nan"),
        "loss_raw": float(np.mean(m.interval_array("bellman_raw")[sel])) if sel.any() else float("nan"),
        "rewards": float(np.mean(rewards)) if rewards.size else float("nan"),
    }


def aggregate_seeds(metrics: list[RunMetrics], frac: float = 0.1) -> dict:
    """Per-step and per-interval mean/std (population) across seeds plus final-window triples."""
    if not metrics:
        raise ValueError("need at least one run")
    grid = metrics[0].step_array("t")
    igrid = metrics[0].interval_array("t")
    for m in metrics[1:]:
        if not np.array_equal(m.step_array("t"), grid) or not np.array_equal(m.interval_array("t"), igrid):
            raise ValueError("runs have misaligned step grids")
    out = {"t": grid, "interval_t": igrid, "n_runs": len(metrics)}
    for name in ("model_order", "eps", "delta", "z"):
        stack = np.stack([m.step_array(name) for m in metrics]) if grid.size else np.zeros((len(metrics), 0))
        out[name + "_mean"] = stack.mean(axis=0)
        out[name + "_std"] = stack.std(axis=0)
    for name in ("avg_reward", "bellman_raw", "bellman_normalized"):
        stack = np.stack([m.interval_array(name) for m in metrics]) if igrid.size else np.zeros((len(metrics), 0))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            out[name + "_mean"] = np.nanmean(stack, axis=0) if stack.size else stack.mean(axis=0)
            out[name + "_std"] = np.nanstd(stack, axis=0) if stack.size else stack.std(axis=0)
    per_seed = [final_window_summary(m, frac) for m in metrics]
    out["per_seed"] = per_seed
    out["final"] = {k: float(np.mean([p[k] for p in per_seed])) for k in per_seed[0]}
    out["final_std"] = {k: float(np.std([p[k] for p in per_seed])) for k in per_seed[0]}
    return out

"""Metrics files, run summaries, charts and value/policy grids."""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from ..action_search import SearchConfig, maximize_action
from ..envs import make_env
from ..qfunction import QFunction
from .training import INTERVAL_FIELDS, STEP_FIELDS, RunMetrics, aggregate_seeds

SCHEMA_VERSION = 1
INT_FIELDS = {"t", "model_order", "appended", "removals", "exploratory", "episodes"}


def _fmt(name, v) -> str:
    return str(int(v)) if name in INT_FIELDS else repr(float(v))


def write_table(path, columns: dict, names) -> None:
    n = len(columns[names[0]]) if names else 0
    with open(path, "w") as fh:
        fh.write(",".join(names) + "\n")
        for i in range(n):
            fh.write(",".join(_fmt(k, columns[k][i]) for k in names) + "\n")


def read_table(path) -> dict:
    with open(path) as fh:
        names = fh.readline().strip().split(",")
        cols = {k: [] for k in names}
        for line in fh:
            for k, v in zip(names, line.strip().split(",")):
                cols[k].append(int(v) if k in INT_FIELDS else float(v))
    return cols


def write_metrics(metrics: RunMetrics, out_dir) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    steps, intervals = out / "steps.csv", out / "intervals.csv"
    write_table(steps, metrics.steps, STEP_FIELDS)
    write_table(intervals, metrics.intervals, INTERVAL_FIELDS)
    return steps, intervals


def read_metrics(run_dir, seed: int = 0) -> RunMetrics:
    d = Path(run_dir)
    m = RunMetrics(seed=seed)
    m.steps = read_table(d / "steps.csv")
    m.intervals = read_table(d / "intervals.csv")
    return m


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return None  # per-step curves live in the CSV files
    if isinstance(x, (float, np.floating)):
        return None if not np.isfinite(x) else float(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


def write_summary(path, summary: dict, config=None, extra: dict | None = None) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "config": config.to_dict() if config is not None else None,
        "n_runs": summary.get("n_runs", 0),
        "final": summary.get("final"),
        "final_std": summary.get("final_std"),
        "per_seed": summary.get("per_seed"),
    }
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(_jsonable(doc), fh, indent=2, sort_keys=False)
        fh.write("\n")


def write_charts(summary: dict, out_dir) -> list[Path]:
    """SVG line charts of reward, normalised Bellman error and model order."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "kqlearn"
    out = Path(out_dir)
    panels = [
        ("reward.svg", summary["interval_t"], "avg_reward", "Average training reward"),
        ("bellman_error.svg", summary["interval_t"], "bellman_normalized", "Normalized Bellman error"),
        ("model_order.svg", summary["t"], "model_order", "Model order of Q"),
    ]
    paths = []
    for fname, x, key, title in panels:
        mean, std = summary[key + "_mean"], summary[key + "_std"]
        fig, ax = plt.subplots(figsize=(5, 3.2))
        ax.plot(x, mean, color="black", lw=1.2)
        if summary.get("n_runs", 1) > 1:
            ax.fill_between(x, mean - std, mean + std, color="0.7", alpha=0.5, lw=0)
        ax.set_xlabel("training steps")
        ax.set_title(title)
        fig.tight_layout()
        p = out / fname
        fig.savefig(p, format="svg", metadata={"Date": None})
        plt.close(fig)
        paths.append(p)
    return paths


def value_policy_grids(Q: QFunction, env_name: str = "mountain_car", n: int = 100,
                       search: SearchConfig | None = None, seed: int = 0):
    """V(s) = max_a Q(s, a) and argmax over an n x n grid of a 2-D state box."""
    spec = make_env(env_name).spec
    if spec.p != 2:
        raise ValueError("value grids need a two-dimensional state space")
    search = search or SearchConfig()
    rng = np.random.default_rng(seed)
    lo, hi = spec.state_bounds
    xs = np.linspace(lo[0], hi[0], n)
    vs = np.linspace(lo[1], hi[1], n)
    V = np.empty((n, n))
    P = np.empty((n, n))
    for i, x in enumerate(xs):
        for j, v in enumerate(vs):
            a, val = maximize_action(Q, np.array([x, v]), spec.action_bounds, search, rng)
            V[i, j], P[i, j] = val, a[0]
    return xs, vs, V, P


def write_grid(path, xs, vs, G) -> None:
    with open(path, "w") as fh:
        fh.write("position,velocity,value\n")
        for i, x in enumerate(xs):
            for j, v in enumerate(vs):
                fh.write(f"{float(x)!r},{float(v)!r},{float(G[i, j])!r}\n")


def write_dictionary(path, Q: QFunction) -> None:
    with open(path, "w") as fh:
        cols = [f"s{i}" for i in range(Q.state_dim)] + [f"a{i}" for i in range(Q.action_dim)] + ["weight"]
        fh.write(",".join(cols) + "\n")
        for row, w in zip(Q.points, Q.weights):
            fh.write(",".join(repr(float(c)) for c in row) + f",{float(w)!r}\n")


def emit_outputs(metrics, out_dir, config=None, q: QFunction | None = None,
                 grid_size: int = 100, extra: dict | None = None) -> dict:
    """Write every artifact for one run or a list of runs; returns the paths."""
    runs = metrics if isinstance(metrics, list) else [metrics]
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    paths = {}
    if len(runs) == 1:
        paths["steps"], paths["intervals"] = write_metrics(runs[0], out)
    else:
        for m in runs:
            write_metrics(m, out / f"seed_{m.seed}")
    summary = aggregate_seeds(runs)
    paths["summary"] = out / "summary.json"
    write_summary(paths["summary"], summary, config, extra)
    if runs[0].n_steps > 0:
        paths["charts"] = write_charts(summary, out)
    if q is not None:
        from ..qfunction import save_qfunction

        paths["qfunction"] = out / "qfunction.txt"
        save_qfunction(q, paths["qfunction"])
        env_name = config.env if config is not None else None
        if env_name == "mountain_car" and q.state_dim == 2:
            xs, vs, V, P = value_policy_grids(q, env_name, grid_size, config.search if config else None)
            paths["value_grid"] = out / "value_grid.csv"
            paths["policy_grid"] = out / "policy_grid.csv"
            paths["dictionary"] = out / "dictionary.csv"
            write_grid(paths["value_grid"], xs, vs, V)
            write_grid(paths["policy_grid"], xs, vs, P)
            write_dictionary(paths["dictionary"], q)
    return paths


def default_output_dir() -> Path:
    return Path(os.environ.get("KQLEARN_OUTPUT_DIR", "runs"))

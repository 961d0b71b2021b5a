"""Command line entry point: ``kqlearn {train,eval,sweep,plot}``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .harness.config import RunConfig, dump_config, load_config, published_summary, table1_config
from .harness.outputs import default_output_dir, emit_outputs, read_metrics, write_charts
from .harness.training import aggregate_seeds, eval_bellman_error, train

log = logging.getLogger("kqlearn")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--config", type=Path, help="YAML run configuration")
    src.add_argument("--preset", type=int, metavar="ROW", help="row of the published parameter grid (1-16)")
    p.add_argument("--env", choices=("pendulum", "mountain_car"))
    p.add_argument("--algorithm", choices=("kq", "semigradient", "hybrid"))
    p.add_argument("--policy", choices=("exploratory", "rho_greedy"))
    p.add_argument("--replay", choices=("off", "uniform", "prioritized"))
    p.add_argument("--steps", type=int, dest="total_steps")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--parsimony", type=float, help="compression constant C (budget C * alpha^2)")
    p.add_argument("--gamma", type=float, dest="gamma_discount")
    p.add_argument("--lambda-reg", type=float)
    p.add_argument("--schedule", choices=("constant", "diminishing"))
    p.add_argument("--bandwidths", type=lambda s: tuple(float(x) for x in s.split(",")))
    p.add_argument("--eval-every", type=int)
    p.add_argument("--eval-trajectories", type=int)
    p.add_argument("--checkpoint-every", type=int)
    p.add_argument("--n-seeds", type=int, dest="n_seeds_search", help="action-search seeds")
    p.add_argument("--out", type=Path, help="output directory (default: $KQLEARN_OUTPUT_DIR or ./runs)")


def config_from_args(args) -> RunConfig:
    """Base config from --config/--preset, then individual flag overrides."""
    if args.config is not None:
        cfg = load_config(args.config)
    elif args.preset is not None:
        cfg = table1_config(args.preset)
    else:
        if not (args.env and args.algorithm):
            raise SystemExit("give --config, --preset, or at least --env and --algorithm")
        cfg = table1_config(15 if args.env == "mountain_car" else 3)
        cfg = cfg.with_(env=args.env, algorithm=args.algorithm, policy=args.policy or "rho_greedy",
                        replay=dataclasses.replace(cfg.replay, mode=args.replay or "off"))
    top = {k: getattr(args, k) for k in ("env", "algorithm", "policy", "total_steps",
                                          "eval_every", "eval_trajectories", "checkpoint_every")}
    learner = {k: getattr(args, k) for k in ("alpha", "beta", "parsimony", "gamma_discount",
                                              "lambda_reg", "schedule")}
    top = {k: v for k, v in top.items() if v is not None}
    learner = {k: v for k, v in learner.items() if v is not None}
    d = cfg.to_dict()
    d.update(top)
    d["learner"].update(learner)
    if args.replay is not None:
        d["replay"]["mode"] = args.replay
    if args.bandwidths is not None:
        d["kernel"]["bandwidths"] = list(args.bandwidths)
    if args.n_seeds_search is not None:
        d["search"]["n_seeds"] = args.n_seeds_search
    return RunConfig.from_dict(d)


def _out_dir(args, cfg: RunConfig, suffix: str) -> Path:
    if args.out is not None:
        return args.out
    return default_output_dir() / f"{cfg.env}-{cfg.algorithm}-{cfg.policy}-{cfg.replay.mode}-{suffix}"


def _extra(args, cfg) -> dict:
    extra = {}
    if getattr(args, "preset", None) is not None:
        extra["published"] = published_summary(args.preset)
        extra["preset"] = args.preset
    return extra


def _finite(d: dict) -> dict:
    return {k: (v if np.isfinite(v) else None) for k, v in d.items()}


def _write_timing(out: Path, metrics) -> None:
    # kept apart from the metrics so those stay byte-identical across reruns
    with open(out / "timing.json", "w") as fh:
        json.dump({str(m.seed): m.wall_time for m in metrics}, fh, indent=2)


def cmd_train(args) -> int:
    cfg = config_from_args(args)
    if args.dump_config:
        sys.stdout.write(dump_config(cfg))
        return 0
    seed = cfg.seeds[0] if args.seed is None else args.seed
    out = _out_dir(args, cfg, f"seed{seed}")
    out.mkdir(parents=True, exist_ok=True)
    ckpt = out / "checkpoint.zip" if cfg.checkpoint_every else None
    q, m = train(cfg, seed, checkpoint_path=ckpt, resume_from=args.resume,
                 progress_every=cfg.eval_every if args.verbose else 0)
    (out / "config.yaml").write_text(dump_config(cfg))
    emit_outputs(m, out, cfg, q, grid_size=args.grid_size, extra=_extra(args, cfg))
    _write_timing(out, [m])
    print(json.dumps({"out": str(out), **_finite(aggregate_seeds([m])["final"])}))
    return 0


def _train_one(job):
    cfg, seed = job
    return train(cfg, seed)


def cmd_sweep(args) -> int:
    cfg = config_from_args(args)
    seeds = args.seeds if args.seeds is not None else cfg.seeds
    cfg = cfg.with_(seeds=tuple(seeds))
    out = _out_dir(args, cfg, "sweep")
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(cfg, s) for s in seeds]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_train_one, jobs))
    else:
        results = [_train_one(j) for j in jobs]
    metrics = [m for _, m in results]
    (out / "config.yaml").write_text(dump_config(cfg))
    emit_outputs(metrics, out, cfg, extra=_extra(args, cfg))
    _write_timing(out, metrics)
    print(json.dumps({"out": str(out), **_finite(aggregate_seeds(metrics)["final"])}))
    return 0


def cmd_eval(args) -> int:
    from .envs import make_env
    from .harness.checkpoint import load_checkpoint
    from .qfunction import load_qfunction

    if args.checkpoint is not None:
        run = load_checkpoint(args.checkpoint)
        q, cfg = run.q, run.config
        env_name, search, gamma = cfg.env, cfg.search, cfg.learner.gamma_discount
    else:
        if args.qfunction is None or args.env is None:
            raise SystemExit("eval needs --checkpoint, or --qfunction with --env")
        from .action_search import SearchConfig

        q = load_qfunction(args.qfunction)
        env_name, search, gamma = args.env, SearchConfig(), 0.99
    if args.gamma is not None:
        gamma = args.gamma
    be = eval_bellman_error(q, make_env(env_name), args.trajectories, search,
                            np.random.default_rng(args.seed), gamma)
    print(json.dumps({"raw": be.raw, "normalized": be.normalized, "degenerate": be.degenerate,
                      "model_order": q.model_order}))
    return 0


def cmd_plot(args) -> int:
    run_dir = args.run
    subdirs = sorted((d for d in run_dir.glob("seed_*") if d.is_dir()),
                     key=lambda d: int(d.name.split("_")[1]))
    if not subdirs and not (run_dir / "steps.csv").exists():
        print(f"no metrics files under {run_dir}", file=sys.stderr)
        return 1
    if subdirs:
        metrics = [read_metrics(d, int(d.name.split("_")[1])) for d in subdirs]
    else:
        metrics = [read_metrics(run_dir)]
    if metrics[0].n_steps == 0:
        print("no metrics to plot", file=sys.stderr)
        return 1
    for p in write_charts(aggregate_seeds(metrics), args.out or run_dir):
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kqlearn", description="Sparse kernel Q-learning experiments")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one seed and write its artifacts")
    _add_config_flags(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--resume", type=Path, help="checkpoint archive to continue from")
    p.add_argument("--grid-size", type=int, default=100)
    p.add_argument("--dump-config", action="store_true", help="print the resolved YAML config and exit")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="train several seeds in parallel and aggregate")
    _add_config_flags(p)
    p.add_argument("--seeds", type=lambda s: [int(x) for x in s.split(",")])
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("eval", help="Bellman error of a trained Q along greedy trajectories")
    p.add_argument("--checkpoint", type=Path)
    p.add_argument("--qfunction", type=Path)
    p.add_argument("--env", choices=("pendulum", "mountain_car"))
    p.add_argument("--trajectories", type=int, default=1)
    p.add_argument("--gamma", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("plot", help="redraw charts from a run directory")
    p.add_argument("run", type=Path)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())

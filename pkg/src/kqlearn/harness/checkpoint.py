"""Zip checkpoints: portable learner state plus the pickled training loop."""

from __future__ import annotations

import dataclasses
import json
import os
import pickle
import zipfile

from ..learner import LearnerConfig, LearnerState
from ..qfunction import dumps, loads
from .config import dump_config


def save_checkpoint(run, path) -> None:
    """Write ``run`` (a TrainingRun) atomically to ``path``."""
    state = run.state
    learner = {
        "config": dataclasses.asdict(run.config.learner),
        "z": state.z,
        "step": state.step,
        "eps_current": state.eps_current,
        "last_delta": state.last_delta,
    }
    tmp = f"{path}.tmp"
    with zipfile.ZipFile(tmp, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        zf.writestr("run_config.yaml", dump_config(run.config))
        zf.writestr("learner.json", json.dumps(learner, indent=2))
        zf.writestr("qfunction.txt", dumps(state.q))
        # the Q inside the pickle keeps its cached Gram inverse, which a resumed
        # run needs to continue bit-identically
        zf.writestr("run.pkl", pickle.dumps(run, protocol=pickle.HIGHEST_PROTOCOL))
    os.replace(tmp, path)


def load_checkpoint(path):
    """Restore the full TrainingRun stored by :func:`save_checkpoint`."""
    with zipfile.ZipFile(path) as zf:
        return pickle.loads(zf.read("run.pkl"))


def load_learner(path) -> tuple[LearnerConfig, LearnerState]:
    """Read only the portable parts: learner config, Q, z and step count."""
    import warnings

    with zipfile.ZipFile(path) as zf:
        meta = json.loads(zf.read("learner.json"))
        q = loads(zf.read("qfunction.txt").decode())
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        cfg = LearnerConfig(**meta["config"])
    return cfg, LearnerState(q, meta["z"], meta["step"], meta["eps_current"], meta["last_delta"])

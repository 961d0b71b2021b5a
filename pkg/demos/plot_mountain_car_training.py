"""
Training on mountain car and writing every artifact
===================================================

Runs the hybrid learner without replay for a short while, then writes the
metrics files, summary, charts, the learned Q and the value/policy grids.
Set ``STEPS`` higher (150_000 or more) to see the car reliably reach the
goal; the default keeps the script under a minute.
"""

import json
import os

import numpy as np

from kqlearn.harness.config import table1_config
from kqlearn.harness.outputs import emit_outputs
from kqlearn.harness.training import train

STEPS = int(os.environ.get("STEPS", 20_000))
cfg = table1_config(15, total_steps=STEPS)
q, metrics = train(cfg, seed=0)

paths = emit_outputs(metrics, "mountain_car_run", cfg, q, grid_size=40)
summary = json.loads(paths["summary"].read_text())
print("final-window summary:", summary["final"])
print("model order over time:", metrics.steps["model_order"][:: max(1, STEPS // 10)])

V = np.loadtxt(paths["value_grid"], delimiter=",", skiprows=1)
print("value grid range: %.2f .. %.2f over %d cells" % (V[:, 2].min(), V[:, 2].max(), len(V)))

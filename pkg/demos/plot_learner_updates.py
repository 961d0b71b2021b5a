"""
KQ, semi-gradient and hybrid updates on a synthetic stream
==========================================================

Feeds the same random transitions to the three update rules and tracks how
many atoms each keeps. KQ adds two atoms per step (at (s, a) and at
(s', a')), semi-gradient adds one, and the hybrid picks per sample.
"""

import warnings

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from kqlearn import KernelConfig, LearnerConfig, LearnerState, QFunction, SarsaTuple
from kqlearn import hybrid_step, kq_step, semigradient_step

kernel = KernelConfig((0.5, 0.5, 0.5))
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    cfg = LearnerConfig(alpha=0.25, beta=1.0, parsimony=0.5, gamma_discount=0.9)


def stream(seed, n=1500):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        s, a = rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 1)
        s2, a2 = np.clip(s + rng.normal(0, 0.1, 2), -1, 1), rng.uniform(-1, 1, 1)
        yield SarsaTuple(s, a, -float(s @ s), s2, a2, bool(rng.random() < 0.5), False)


for name, rule in (("kq", kq_step), ("semigradient", semigradient_step), ("hybrid", hybrid_step)):
    st = LearnerState.initial(QFunction.empty(kernel, 2), cfg)
    orders = []
    for t in stream(0):
        st, report = rule(st, t, cfg)
        orders.append(st.q.model_order)
    print(f"{name:13s} final model order {orders[-1]:3d}, z = {st.z:+.3f}")
    plt.plot(orders, label=name)

plt.xlabel("step")
plt.ylabel("model order")
plt.legend()
plt.savefig("learner_orders.png", dpi=100)

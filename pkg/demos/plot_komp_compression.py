"""
Pruning a kernel expansion with KOMP
====================================

Kernel orthogonal matching pursuit removes atoms one at a time while the
Hilbert-norm distance to the original function stays within a budget.
Larger budgets give sparser dictionaries.
"""

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from kqlearn import CompressionBudget, KernelConfig, QFunction, hilbert_dist, hilbert_norm_sq, komp_compress

rng = np.random.default_rng(0)
kernel = KernelConfig((0.4, 0.4, 0.4))
# 60 atoms drawn densely, so many of them are redundant
Q = QFunction(kernel, 2, rng.uniform(-1, 1, (60, 3)), rng.normal(size=60))
norm = np.sqrt(hilbert_norm_sq(Q))

fracs = np.linspace(0.0, 0.6, 13)
orders = []
for f in fracs:
    out, report = komp_compress(Q, CompressionBudget(f * norm))
    assert hilbert_dist(out, Q) <= f * norm + 1e-9
    orders.append(out.model_order)
    print(f"budget {f:4.2f}*||Q||  ->  {out.model_order:2d} atoms, error {report.achieved_error / norm:.3f}*||Q||")

plt.plot(fracs, orders, "o-")
plt.xlabel("budget / ||Q||")
plt.ylabel("atoms kept")
plt.savefig("komp_orders.png", dpi=100)

"""
Finding the greedy action
=========================

Q(s, .) is a mixture of Gaussian bumps in the action, so it can have several
local maxima. Uniform seeds followed by monotone gradient ascent find the
best one. The softmax value tends to the maximum as eta grows.
"""

import numpy as np

from kqlearn import KernelConfig, QFunction, SearchConfig, maximize_action, softmax_value

kernel = KernelConfig((1.0, 0.15))
# two peaks in the action at -1.2 (lower) and 1.1 (higher)
Q = QFunction(kernel, 1, [[0.0, -1.2], [0.0, 1.1]], [1.0, 1.3])
s = np.array([0.0])
bounds = (np.array([-2.0]), np.array([2.0]))

for n_seeds in (1, 4, 64):
    a, v = maximize_action(Q, s, bounds, SearchConfig(n_seeds=n_seeds, n_starts=1), np.random.default_rng(3))
    print(f"{n_seeds:3d} seeds: a* = {a[0]: .4f}, Q = {v:.4f}")

for eta in (1.0, 10.0, 100.0):
    print(f"softmax value, eta = {eta:5.1f}: {softmax_value(Q, s, eta, bounds):.4f}")

"""
A Q-function as a weighted sum of Gaussian bumps
================================================

Builds a small kernel expansion over (state, action) pairs, evaluates it,
measures Hilbert-space distances between expansions and checks the action
gradient against finite differences.
"""

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from kqlearn import KernelConfig, QFunction, gram_matrix, hilbert_dist, hilbert_norm_sq
from kqlearn.qfunction import action_gradient

# one state dimension, one action dimension
kernel = KernelConfig((0.5, 0.3))
points = np.array([[-0.5, 0.2], [0.0, -0.4], [0.6, 0.5]])
Q = QFunction(kernel, 1, points, [1.0, -0.7, 1.5])

K = gram_matrix(kernel, points)
print("Gram matrix\n", np.round(K, 4))
print("||Q||^2 =", hilbert_norm_sq(Q))

# the same function written with a duplicated atom is at distance zero
Q2 = QFunction(kernel, 1, np.vstack([points, points[:1]]), [0.4, -0.7, 1.5, 0.6])
print("distance to a re-parameterisation:", hilbert_dist(Q, Q2))

s, a = np.array([0.1]), np.array([0.05])
h = 1e-5
fd = (Q(s, a + h) - Q(s, a - h)) / (2 * h)
print("dQ/da exact %.8f, finite difference %.8f" % (action_gradient(Q, s, a)[0], fd))

xs = np.linspace(-1, 1, 120)
acts = np.linspace(-1, 1, 120)
Z = np.array([[Q([x], [u]) for x in xs] for u in acts])
plt.imshow(Z, origin="lower", extent=(-1, 1, -1, 1), cmap="RdBu_r")
plt.scatter(points[:, 0], points[:, 1], c="k", s=12)
plt.xlabel("state")
plt.ylabel("action")
plt.colorbar(label="Q(s, a)")
plt.savefig("qfunction.png", dpi=100)

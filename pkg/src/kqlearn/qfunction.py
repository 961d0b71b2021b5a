"""Action-value functions stored as finite kernel expansions.

A :class:`QFunction` is ``Q(x) = sum_n w_n k(d_n, x)`` for a dictionary of
joint state-action atoms ``d_n``. Values are immutable: every update returns
a fresh instance. The Gram matrix of the dictionary and the inverse of its
jittered version are cached lazily and carried forward through
:func:`append_atoms` so that streaming updates stay O(M^2).
"""

from __future__ import annotations

import os
from typing import Iterable, Sequence

import numpy as np

from .kernel import DimensionError, KernelConfig, cross_matrix, gram_inverse, gram_matrix

FORMAT_TAG = "kqlearn-qfunction v1"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


class QFunction:
    __slots__ = ("kernel", "state_dim", "points", "weights", "_gram", "_gram_inv")

    def __init__(self, kernel: KernelConfig, state_dim: int, points=None, weights=None,
                 *, _gram=None, _gram_inv=None):
        if not 0 < state_dim < kernel.dim:
            raise DimensionError(f"state_dim {state_dim} incompatible with kernel dimension {kernel.dim}")
        points = np.zeros((0, kernel.dim)) if points is None else kernel.as_points(points)
        weights = np.zeros(0) if weights is None else np.asarray(weights, dtype=float).ravel()
        if weights.shape[0] != points.shape[0]:
            raise ValueError(f"{weights.shape[0]} weights for {points.shape[0]} atoms")
        self.kernel = kernel
        self.state_dim = int(state_dim)
        self.points = _frozen(points)
        self.weights = _frozen(weights)
        self._gram = None if _gram is None else _frozen(_gram)
        self._gram_inv = None if _gram_inv is None else _frozen(_gram_inv)

    @classmethod
    def empty(cls, kernel: KernelConfig, state_dim: int) -> "QFunction":
        return cls(kernel, state_dim)

    @property
    def action_dim(self) -> int:
        return self.kernel.dim - self.state_dim

    @property
    def model_order(self) -> int:
        return self.points.shape[0]

    def __len__(self):
        return self.model_order

    def __repr__(self):
        return f"QFunction(model_order={self.model_order}, state_dim={self.state_dim}, bandwidths={self.kernel.bandwidths})"

    @property
    def gram(self) -> np.ndarray:
        if self._gram is None:
            self._gram = _frozen(gram_matrix(self.kernel, self.points))
        return self._gram

    @property
    def gram_inv(self) -> np.ndarray:
        """Inverse of ``gram + jitter*I``."""
        if self._gram_inv is None:
            self._gram_inv = _frozen(gram_inverse(self.gram, self.kernel.jitter))
        return self._gram_inv

    def has_cached_inverse(self) -> bool:
        return self._gram_inv is not None

    def evaluate(self, X) -> np.ndarray:
        """Vectorised evaluation at the rows of ``X``."""
        X = self.kernel.as_points(X)
        if self.model_order == 0:
            return np.zeros(X.shape[0])
        return self.weights @ cross_matrix(self.kernel, self.points, X)

    def __call__(self, s, a) -> float:
        return q_eval(self, np.concatenate([np.ravel(s), np.ravel(a)]))

    def state_weights(self, s) -> np.ndarray:
        """Per-atom weights ``w_m * k_state(s, s_m)``.

        The Gaussian factorises over coordinates, so for a fixed state
        ``Q(s, .)`` is a Gaussian mixture over actions with these weights
        centred at the atoms' action parts.
        """
        s = np.asarray(s, dtype=float).ravel()
        if s.shape[0] != self.state_dim:
            raise DimensionError(f"expected a state of dimension {self.state_dim}, got {s.shape[0]}")
        if self.model_order == 0:
            return np.zeros(0)
        u = (self.points[:, : self.state_dim] - s) * self.kernel.scale[: self.state_dim]
        return self.weights * np.exp(-0.5 * np.einsum("ij,ij->i", u, u))


def q_eval(Q: QFunction, x) -> float:
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != Q.kernel.dim:
        raise DimensionError(f"expected a point of dimension {Q.kernel.dim}, got {x.shape[0]}")
    if Q.model_order == 0:
        return 0.0
    u = (Q.points - x) * Q.kernel.scale
    return float(Q.weights @ np.exp(-0.5 * np.einsum("ij,ij->i", u, u)))


def hilbert_norm_sq(Q: QFunction) -> float:
    if Q.model_order == 0:
        return 0.0
    val = float(Q.weights @ Q.gram @ Q.weights)
    return max(val, 0.0)


def _check_same_kernel(Q1: QFunction, Q2: QFunction):
    if Q1.kernel.bandwidths != Q2.kernel.bandwidths:
        raise ValueError("QFunctions use different kernel bandwidths")


def inner_product(Q1: QFunction, Q2: QFunction) -> float:
    _check_same_kernel(Q1, Q2)
    if Q1.model_order == 0 or Q2.model_order == 0:
        return 0.0
    return float(Q1.weights @ cross_matrix(Q1.kernel, Q1.points, Q2.points) @ Q2.weights)


def hilbert_dist(Q1: QFunction, Q2: QFunction) -> float:
    _check_same_kernel(Q1, Q2)
    d2 = hilbert_norm_sq(Q1) - 2.0 * inner_product(Q1, Q2) + hilbert_norm_sq(Q2)
    return float(np.sqrt(max(d2, 0.0)))


def _extend_inverse(inv: np.ndarray, K: np.ndarray, jitter: float, B: np.ndarray,
                    C: np.ndarray) -> np.ndarray:
    """Inverse of [[A, B], [B^T, C]] given inv = A^-1, A = K + jitter I (Schur complement update).

    A near-duplicate new atom makes the Schur complement tiny and leaves it
    dominated by rounding in ``A^-1 B``; one step of iterative refinement on
    that product keeps the update accurate.
    """
    AB = inv @ B
    AB += inv @ (B - K @ AB - jitter * AB)
    S = C - B.T @ AB
    S_inv = np.linalg.inv(S)
    top_right = -AB @ S_inv
    top_left = inv - top_right @ AB.T
    return np.block([[top_left, top_right], [top_right.T, S_inv]])


def append_atoms(Q: QFunction, scale_existing: float,
                 new_atoms: Sequence[tuple[Iterable[float], float]]) -> QFunction:
    """Scale the current weights and append ``(point, weight)`` atoms."""
    if len(new_atoms) == 0:
        pts = Q.points
        new_w = np.zeros(0)
    else:
        pts = Q.kernel.as_points(np.array([np.ravel(p) for p, _ in new_atoms], dtype=float))
        new_w = np.array([float(w) for _, w in new_atoms])
        pts = np.vstack([Q.points, pts])
    weights = np.concatenate([scale_existing * Q.weights, new_w])
    if len(new_atoms) == 0:
        return QFunction(Q.kernel, Q.state_dim, Q.points, weights, _gram=Q._gram, _gram_inv=Q._gram_inv)

    M = Q.model_order
    fresh = pts[M:]
    gram = gram_inv = None
    if Q._gram is not None or M == 0:
        B = cross_matrix(Q.kernel, Q.points, fresh)
        C = gram_matrix(Q.kernel, fresh)
        gram = np.block([[Q.gram, B], [B.T, C]])
        if Q._gram_inv is not None or M == 0:
            jit = Q.kernel.jitter * np.eye(C.shape[0])
            try:
                gram_inv = _extend_inverse(Q.gram_inv, Q.gram, Q.kernel.jitter, B, C + jit)
            except np.linalg.LinAlgError:
                gram_inv = None
            if gram_inv is not None and not np.all(np.isfinite(gram_inv)):
                gram_inv = None
    return QFunction(Q.kernel, Q.state_dim, pts, weights, _gram=gram, _gram_inv=gram_inv)


def action_gradient(Q: QFunction, s, a) -> np.ndarray:
    """Exact derivative of ``Q(s, a)`` with respect to the action."""
    s = np.asarray(s, dtype=float).ravel()
    a = np.asarray(a, dtype=float).ravel()
    if s.shape[0] != Q.state_dim or a.shape[0] != Q.action_dim:
        raise DimensionError(
            f"expected state/action dims ({Q.state_dim}, {Q.action_dim}), got ({s.shape[0]}, {a.shape[0]})")
    if Q.model_order == 0:
        return np.zeros(Q.action_dim)
    x = np.concatenate([s, a])
    u = (Q.points - x) * Q.kernel.scale
    coef = Q.weights * np.exp(-0.5 * np.einsum("ij,ij->i", u, u))
    inv_var = Q.kernel.scale[Q.state_dim:] ** 2
    # d/da exp(-|a - a_m|^2 / 2 sigma^2) = -(a - a_m) / sigma^2 * k
    return -(coef @ (a - Q.points[:, Q.state_dim:])) * inv_var


# -- text serialisation ------------------------------------------------------

def dumps(Q: QFunction) -> str:
    p, q = Q.state_dim, Q.action_dim
    lines = [
        f"# {FORMAT_TAG}",
        f"# p={p} q={q}",
        "# bandwidths=" + ",".join(repr(b) for b in Q.kernel.bandwidths),
        f"# jitter={Q.kernel.jitter!r}",
        ",".join([f"s{i}" for i in range(p)] + [f"a{i}" for i in range(q)] + ["weight"]),
    ]
    for row, w in zip(Q.points, Q.weights):
        lines.append(",".join(repr(float(v)) for v in row) + "," + repr(float(w)))
    return "\n".join(lines) + "\n"


def loads(text: str) -> QFunction:
    header = {}
    rows = []
    lines = text.splitlines()
    if not lines or lines[0].strip() != f"# {FORMAT_TAG}":
        raise ValueError("not a kqlearn QFunction file")
    for line in lines[1:]:
        if line.startswith("#"):
            for field in line[1:].split():
                key, _, val = field.partition("=")
                header[key] = val
        elif line and not line[0].isalpha():
            rows.append([float(v) for v in line.split(",")])
    p, q = int(header["p"]), int(header["q"])
    kernel = KernelConfig(tuple(float(b) for b in header["bandwidths"].split(",")),
                          jitter=float(header["jitter"]))
    data = np.array(rows, dtype=float).reshape(-1, p + q + 1)
    return QFunction(kernel, p, data[:, :-1], data[:, -1])


def save_qfunction(Q: QFunction, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(Q))


def load_qfunction(path: str | os.PathLike) -> QFunction:
    with open(path) as fh:
        return loads(fh.read())

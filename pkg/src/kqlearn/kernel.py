"""Gaussian RBF kernel over concatenated (state, action) vectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

MAX_JITTER = 1e-4


class DimensionError(ValueError):
    """Raised when a point does not match the kernel dimension."""


class SolverError(np.linalg.LinAlgError):
    """Gram system is numerically singular even after jitter."""

    def __init__(self, message: str, condition: float):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


@dataclass(frozen=True)
class KernelConfig:
    """Diagonal-bandwidth Gaussian kernel.

    ``bandwidths`` holds one length scale per coordinate, state coordinates
    first. ``jitter`` is added to Gram diagonals whenever a system is solved.
    """

    bandwidths: tuple[float, ...]
    jitter: float = 1e-8

    def __post_init__(self):
        bw = tuple(float(b) for b in np.atleast_1d(np.asarray(self.bandwidths, dtype=float)))
        if len(bw) == 0:
            raise ValueError("at least one bandwidth is required")
        if not all(np.isfinite(b) and b > 0 for b in bw):
            raise ValueError(f"bandwidths must be strictly positive, got {bw}")
        if not (0.0 <= self.jitter <= MAX_JITTER):
            raise ValueError(f"jitter must lie in [0, {MAX_JITTER}], got {self.jitter}")
        object.__setattr__(self, "bandwidths", bw)
        object.__setattr__(self, "_scale", 1.0 / np.asarray(bw))

    @property
    def dim(self) -> int:
        return len(self.bandwidths)

    @property
    def scale(self) -> np.ndarray:
        """Elementwise 1/sigma."""
        return self._scale

    def as_points(self, X) -> np.ndarray:
        """Coerce ``X`` to a (n, dim) float array, rejecting bad widths."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, self.dim) if X.size == 0 else X.reshape(1, -1)
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise DimensionError(f"expected points of dimension {self.dim}, got shape {X.shape}")
        return X


def _check_point(cfg: KernelConfig, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != cfg.dim:
        raise DimensionError(f"expected a point of dimension {cfg.dim}, got {x.shape[0]}")
    return x


def kernel_eval(cfg: KernelConfig, x, y) -> float:
    x = _check_point(cfg, x)
    y = _check_point(cfg, y)
    u = (x - y) * cfg.scale
    return float(np.exp(-0.5 * np.dot(u, u)))


def cross_matrix(cfg: KernelConfig, D, E) -> np.ndarray:
    """Matrix of kernel values between the rows of ``D`` and ``E``."""
    D = cfg.as_points(D) * cfg.scale
    E = cfg.as_points(E) * cfg.scale
    if D.shape[0] == 0 or E.shape[0] == 0:
        return np.zeros((D.shape[0], E.shape[0]))
    # explicit differences, not the |x|^2 + |y|^2 - 2xy expansion: keeps exact symmetry and unit diagonal
    diff = D[:, None, :] - E[None, :, :]
    return np.exp(-0.5 * np.einsum("ijk,ijk->ij", diff, diff))


def gram_matrix(cfg: KernelConfig, D) -> np.ndarray:
    return cross_matrix(cfg, D, D)


def factor_gram(K: np.ndarray, jitter: float):
    """Cholesky factor of ``K + jitter*I``; raises SolverError when singular."""
    M = K.shape[0]
    A = K + jitter * np.eye(M)
    try:
        c, lower = linalg.cho_factor(A, lower=True, check_finite=False)
    except linalg.LinAlgError:
        raise SolverError("Gram matrix is not positive definite", np.inf) from None
    d = np.abs(np.diag(c))
    cond = float((d.max() / d.min()) ** 2) if d.min() > 0 else np.inf
    if not np.isfinite(cond) or cond * np.finfo(float).eps > 1e-2:
        raise SolverError("Gram matrix is numerically singular", cond)
    return c, lower


def gram_inverse(K: np.ndarray, jitter: float) -> np.ndarray:
    """Explicit inverse of ``K + jitter*I`` from its Cholesky factor."""
    if K.shape[0] == 0:
        return np.zeros((0, 0))
    c, _ = factor_gram(K, jitter)
    inv, info = linalg.lapack.dpotri(c, lower=1)
    if info != 0:
        raise SolverError("inverse from Cholesky factor failed", np.inf)
    inv = np.tril(inv)
    inv += np.tril(inv, -1).T
    return inv


def solve_gram(cfg: KernelConfig, D, rhs) -> np.ndarray:
    """Solve ``(K_DD + jitter*I) x = rhs``."""
    D = cfg.as_points(D)
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != D.shape[0]:
        raise DimensionError(f"rhs has {rhs.shape[0]} rows for {D.shape[0]} atoms")
    if D.shape[0] == 0:
        return rhs.copy()
    K = gram_matrix(cfg, D)
    return linalg.cho_solve(factor_gram(K, cfg.jitter), rhs, check_finite=False)

"""Destructive kernel orthogonal matching pursuit.

Greedily drops dictionary atoms from a kernel expansion while the Hilbert
norm distance to the original stays within a budget, refitting the surviving
weights by least squares after every removal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .kernel import SolverError, cross_matrix, gram_inverse, gram_matrix, solve_gram
from .qfunction import QFunction


@dataclass(frozen=True)
class CompressionBudget:
    epsilon: float

    def __post_init__(self):
        if not (self.epsilon >= 0):
            raise ValueError(f"compression budget must be nonnegative, got {self.epsilon}")


@dataclass
class CompressionReport:
    initial_order: int
    final_order: int
    achieved_error: float
    removals: list[int] = field(default_factory=list)
    aborted: bool = False
    # filled in by the learner: atoms appended before compression
    appended: int = 0


def least_squares_refit(Qref: QFunction, D) -> np.ndarray:
    """Weights on ``D`` whose expansion is the jittered projection of ``Qref``."""
    D = Qref.kernel.as_points(D)
    if D.shape[0] == 0:
        raise ValueError("refit needs a nonempty dictionary")
    rhs = cross_matrix(Qref.kernel, D, Qref.points) @ Qref.weights
    return solve_gram(Qref.kernel, D, rhs)


def removal_error(Qref: QFunction, keep) -> float:
    """Best approximation error of ``Qref`` using only atoms indexed by ``keep``."""
    keep = np.asarray(sorted(set(int(i) for i in keep)), dtype=int)
    if keep.size and (keep[0] < 0 or keep[-1] >= Qref.model_order):
        raise IndexError("keep indices outside the dictionary")
    c = least_squares_refit(Qref, Qref.points[keep]) if keep.size else np.zeros(0)
    # the refit lives on a sub-dictionary, so the difference has weights on
    # Qref's own atoms; this avoids the cancellation of the three-term form
    return _exact_error(gram_matrix(Qref.kernel, Qref.points), Qref.weights, keep, c)


def _exact_error(K: np.ndarray, w_full: np.ndarray, keep: np.ndarray, c: np.ndarray) -> float:
    v = w_full.copy()
    v[keep] -= c
    return float(np.sqrt(max(v @ K @ v, 0.0)))


@njit(cache=True)
def _downdate(inv, j):
    """Inverse of the matrix with row and column ``j`` deleted, from its full inverse."""
    n = inv.shape[0]
    out = np.empty((n - 1, n - 1))
    d = inv[j, j]
    for r in range(n - 1):
        rr = r + (r >= j)
        f = inv[rr, j] / d
        for c in range(n - 1):
            cc = c + (c >= j)
            out[r, c] = inv[rr, cc] - f * inv[cc, j]
    return out


# backward-error threshold for trusting a cached inverse: relative to
# ||K|| ||c||, which a fresh factorisation meets even for ill-conditioned K
INVERSE_TOL = 1e-9



def komp_compress(Qtilde: QFunction, budget) -> tuple[QFunction, CompressionReport]:
    """Prune ``Qtilde`` greedily under a Hilbert-norm error budget.

    Each round scores every surviving atom by the error increase its removal
    would cause, ``c_j^2 / [K^-1]_jj`` with ``c`` the current least-squares
    coefficients (orthogonal projections nest, so this is the exact
    increment of the squared error). The best candidate is then refit and its
    true distance to ``Qtilde`` checked against the budget; the loop stops
    at the first candidate exceeding it. Ties go to the lowest index.
    """
    eps = budget.epsilon if isinstance(budget, CompressionBudget) else CompressionBudget(float(budget)).epsilon
    M = Qtilde.model_order
    if M == 0:
        return Qtilde, CompressionReport(0, 0, 0.0)

    jitter = Qtilde.kernel.jitter
    try:
        K = Qtilde.gram
        inv = Qtilde.gram_inv
    except SolverError:
        return Qtilde, CompressionReport(M, M, 0.0, aborted=True)

    w_full = Qtilde.weights
    keep = np.arange(M)
    removals: list[int] = []
    achieved = 0.0
    weights = None  # None while nothing has been pruned

    b = K @ w_full
    c = inv @ b
    resid = K @ c + jitter * c - b
    if np.linalg.norm(resid) > INVERSE_TOL * (np.linalg.norm(K, 1) * np.linalg.norm(c) + np.linalg.norm(b)):
        try:
            inv = gram_inverse(K, jitter)
        except SolverError:
            return Qtilde, CompressionReport(M, M, 0.0, aborted=True)
        c = inv @ b

    while keep.size > 0:
        score = c * c / np.diag(inv)
        j = int(np.argmin(score))
        b_next = np.delete(b, j)
        if keep.size == 1:
            inv_next = np.zeros((0, 0))
        else:
            inv_next = _downdate(inv, j)
        c_next = inv_next @ b_next
        keep_next = np.delete(keep, j)
        err = _exact_error(K, w_full, keep_next, c_next)
        if err > eps:
            break
        removals.append(int(keep[j]))
        keep, inv, weights = keep_next, inv_next, c_next
        b, c = b_next, c_next
        achieved = err

    if weights is None:
        return Qtilde, CompressionReport(M, M, 0.0)

    Q = QFunction(Qtilde.kernel, Qtilde.state_dim, Qtilde.points[keep], weights,
                  _gram=K[np.ix_(keep, keep)], _gram_inv=inv)
    return Q, CompressionReport(M, int(keep.size), achieved, removals)

"""Soft-margin kernel SVM trained by sequential minimal optimization.

The dual problem is

    minimize    0.5 * a^T Q a - sum(a)
    subject to  0 <= a_i <= C,  sum(y_i a_i) = 0,

with ``Q_ij = y_i y_j K(x_i, x_j)``. Each iteration updates the pair chosen
by maximal violation for ``i`` and second-order gain for ``j``, and stops
once the largest KKT violation falls below ``tol``. Variables stuck at a bound
are shrunk out of the working loops, as in LIBSVM. Kernel rows are computed
on demand and kept in a least-recently-used cache, so the full Gram matrix
is never required.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ..errors import DimensionMismatch, SingleClassData
from .kernels import KernelSpec, kernel_matrix

log = logging.getLogger(__name__)

_TAU = 1e-12
DEFAULT_CACHE_MB = 1024.0
DEFAULT_MAX_ITER = 10_000_000


@njit(cache=True)
def _fill_row(x, i, kind, gamma, out):
    n, d = x.shape
    if kind == 0:
        for t in range(n):
            s = 1.0
            for k in range(d):
                s += x[i, k] * x[t, k]
            out[t] = s * s
    else:
        for t in range(n):
            s = 0.0
            for k in range(d):
                diff = x[i, k] - x[t, k]
                s += diff * diff
            out[t] = np.exp(-gamma * s)


@njit(cache=True)
def _row(x, i, kind, gamma, cache, slot_of, owner, stamp, clock):
    s = slot_of[i]
    if s < 0:
        # evict the least recently used slot
        s = 0
        for k in range(1, owner.shape[0]):
            if stamp[k] < stamp[s]:
                s = k
        if owner[s] >= 0:
            slot_of[owner[s]] = -1
        owner[s] = i
        slot_of[i] = s
        _fill_row(x, i, kind, gamma, cache[s])
    clock[0] += 1
    stamp[s] = clock[0]
    return s


@njit(cache=True)
def _reconstruct(x, y, kind, gamma, cb, alpha, grad, gbar, active, active_size, cache, slot_of, owner, stamp, clock):
    # exact gradient of shrunk variables from gbar plus the free vectors
    n = x.shape[0]
    if active_size == n:
        return
    for p in range(active_size, n):
        t = active[p]
        grad[t] = gbar[t] - 1.0
    for p in range(active_size):
        j = active[p]
        if 0.0 < alpha[j] < cb[j]:
            sj = _row(x, j, kind, gamma, cache, slot_of, owner, stamp, clock)
            kj = cache[sj]
            aj = alpha[j] * y[j]
            for q in range(active_size, n):
                t = active[q]
                grad[t] += y[t] * aj * kj[t]


@njit(cache=True)
def _shrinkable(t, y, alpha, cb, grad, gmax1, gmax2):
    if alpha[t] >= cb[t]:
        if y[t] > 0:
            return -grad[t] > gmax1
        return -grad[t] > gmax2
    if alpha[t] <= 0.0:
        if y[t] > 0:
            return grad[t] > gmax2
        return grad[t] > gmax1
    return False


@njit(cache=True)
def _solve(x, y, kind, gamma, cb, tol, max_iter, cache_rows, shrinking):
    n = x.shape[0]
    alpha = np.zeros(n)
    grad = -np.ones(n)
    gbar = np.zeros(n)  # sum over upper-bounded j of C_j Q_tj
    qd = np.empty(n)
    for t in range(n):
        s = 0.0
        for k in range(x.shape[1]):
            s += x[t, k] * x[t, k]
        qd[t] = (1.0 + s) ** 2 if kind == 0 else 1.0

    cache = np.empty((cache_rows, n))
    slot_of = -np.ones(n, dtype=np.int64)
    owner = -np.ones(cache_rows, dtype=np.int64)
    stamp = np.zeros(cache_rows, dtype=np.int64)
    clock = np.zeros(1, dtype=np.int64)

    active = np.arange(n)
    active_size = n
    unshrunk = False
    counter = min(n, 1000) + 1

    it = 0
    converged = False
    while it < max_iter:
        counter -= 1
        if counter == 0:
            counter = min(n, 1000)
            if shrinking:
                gmax1 = -np.inf
                gmax2 = -np.inf
                for p in range(active_size):
                    t = active[p]
                    if y[t] > 0:
                        if alpha[t] < cb[t] and -grad[t] > gmax1:
                            gmax1 = -grad[t]
                        if alpha[t] > 0 and grad[t] > gmax2:
                            gmax2 = grad[t]
                    else:
                        if alpha[t] > 0 and grad[t] > gmax1:
                            gmax1 = grad[t]
                        if alpha[t] < cb[t] and -grad[t] > gmax2:
                            gmax2 = -grad[t]
                if not unshrunk and gmax1 + gmax2 <= 10.0 * tol:
                    unshrunk = True
                    _reconstruct(x, y, kind, gamma, cb, alpha, grad, gbar, active, active_size,
                                 cache, slot_of, owner, stamp, clock)
                    active_size = n
                p = 0
                while p < active_size:
                    t = active[p]
                    if _shrinkable(t, y, alpha, cb, grad, gmax1, gmax2):
                        active_size -= 1
                        active[p] = active[active_size]
                        active[active_size] = t
                    else:
                        p += 1

        for attempt in range(2):
            # i: maximal violation among the "up" set
            gmax = -np.inf
            i = -1
            for p in range(active_size):
                t = active[p]
                if y[t] > 0:
                    if alpha[t] < cb[t] and -grad[t] >= gmax:
                        gmax = -grad[t]
                        i = t
                else:
                    if alpha[t] > 0 and grad[t] >= gmax:
                        gmax = grad[t]
                        i = t
            j = -1
            gmax2 = -np.inf
            if i >= 0:
                si = _row(x, i, kind, gamma, cache, slot_of, owner, stamp, clock)
                ki = cache[si]
                # j: second-order gain among the "low" set
                best = np.inf
                for p in range(active_size):
                    t = active[p]
                    if y[t] > 0:
                        if alpha[t] > 0:
                            gd = gmax + grad[t]
                            if grad[t] >= gmax2:
                                gmax2 = grad[t]
                            if gd > 0:
                                quad = qd[i] + qd[t] - 2.0 * ki[t]
                                if quad <= 0:
                                    quad = _TAU
                                obj = -(gd * gd) / quad
                                if obj <= best:
                                    best = obj
                                    j = t
                    else:
                        if alpha[t] < cb[t]:
                            gd = gmax - grad[t]
                            if -grad[t] >= gmax2:
                                gmax2 = -grad[t]
                            if gd > 0:
                                quad = qd[i] + qd[t] - 2.0 * ki[t]
                                if quad <= 0:
                                    quad = _TAU
                                obj = -(gd * gd) / quad
                                if obj <= best:
                                    best = obj
                                    j = t
            optimal = i < 0 or j < 0 or gmax + gmax2 < tol
            if not optimal or active_size == n:
                break
            # optimal on the active set: restore every variable and check again
            _reconstruct(x, y, kind, gamma, cb, alpha, grad, gbar, active, active_size,
                         cache, slot_of, owner, stamp, clock)
            active_size = n
            counter = 1
        if optimal:
            converged = True
            break

        sj = _row(x, j, kind, gamma, cache, slot_of, owner, stamp, clock)
        si = _row(x, i, kind, gamma, cache, slot_of, owner, stamp, clock)
        ki = cache[si]
        kj = cache[sj]
        yi = y[i]
        yj = y[j]
        kij = ki[j]
        old_i = alpha[i]
        old_j = alpha[j]
        ci = cb[i]
        cj = cb[j]
        if yi != yj:
            quad = qd[i] + qd[j] + 2.0 * (yi * yj * kij)
            if quad <= 0:
                quad = _TAU
            delta = (-grad[i] - grad[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = -diff
            if diff > ci - cj:
                if alpha[i] > ci:
                    alpha[i] = ci
                    alpha[j] = ci - diff
            else:
                if alpha[j] > cj:
                    alpha[j] = cj
                    alpha[i] = cj + diff
        else:
            quad = qd[i] + qd[j] - 2.0 * (yi * yj * kij)
            if quad <= 0:
                quad = _TAU
            delta = (grad[i] - grad[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > ci:
                if alpha[i] > ci:
                    alpha[i] = ci
                    alpha[j] = total - ci
            else:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = total
            if total > cj:
                if alpha[j] > cj:
                    alpha[j] = cj
                    alpha[i] = total - cj
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = total
        di = (alpha[i] - old_i) * yi
        dj = (alpha[j] - old_j) * yj
        for p in range(active_size):
            t = active[p]
            grad[t] += y[t] * (ki[t] * di + kj[t] * dj)
        # keep gbar in step with upper-bound membership (full rows)
        was_i = old_i >= ci
        was_j = old_j >= cj
        if was_i != (alpha[i] >= ci):
            sgn = ci * yi if not was_i else -ci * yi
            for t in range(n):
                gbar[t] += sgn * y[t] * ki[t]
        if was_j != (alpha[j] >= cj):
            sgn = cj * yj if not was_j else -cj * yj
            for t in range(n):
                gbar[t] += sgn * y[t] * kj[t]
        it += 1
    _reconstruct(x, y, kind, gamma, cb, alpha, grad, gbar, active, active_size,
                 cache, slot_of, owner, stamp, clock)
    return alpha, grad, it, converged


@dataclass(frozen=True)
class DualSolution:
    """Raw solver output for one binary problem.

    ``bounds`` holds the per-sample box limit (``C`` times the sample
    weight).
    """

    alpha: np.ndarray
    grad: np.ndarray
    rho: float
    n_iter: int
    converged: bool
    bounds: np.ndarray

    @property
    def objective(self) -> float:
        """Dual objective ``0.5 a^T Q a - sum(a)``."""
        return float(0.5 * self.alpha @ (self.grad - 1.0))


def _offset(alpha: np.ndarray, grad: np.ndarray, y: np.ndarray, bounds: np.ndarray) -> float:
    """Threshold ``rho``: mean of ``y g`` over free vectors, else the bound midpoint."""
    yg = y * grad
    at_upper = alpha >= bounds
    at_lower = alpha <= 0
    free = ~(at_upper | at_lower)
    if np.any(free):
        return float(np.mean(yg[free]))
    up = (at_upper & (y < 0)) | (at_lower & (y > 0))
    low = (at_upper & (y > 0)) | (at_lower & (y < 0))
    ub = np.min(yg[up]) if np.any(up) else np.inf
    lb = np.max(yg[low]) if np.any(low) else -np.inf
    return float((ub + lb) / 2.0)


def solve_dual(
    samples,
    labels,
    k: KernelSpec,
    c: float = 1.0,
    tol: float = 1e-3,
    *,
    sample_weight=None,
    max_iter: int = DEFAULT_MAX_ITER,
    cache_mb: float = DEFAULT_CACHE_MB,
    shrinking: bool = True,
) -> DualSolution:
    """Solve the soft-margin dual for one binary problem.

    Parameters
    ----------
    samples : array_like, shape (n, d)
    labels : array_like, shape (n,)
        Values in ``{-1, +1}``.
    k : KernelSpec
        Must carry a concrete scale when it is an RBF kernel.
    c : float
        Box constraint.
    tol : float
        Stop once the maximal KKT violation is below this value.
    sample_weight : array_like, optional
        Positive multipliers of ``c`` per sample.
    shrinking : bool
        Drop variables that sit at a bound from the working loops and
        restore them before the final optimality check.
    """
    x = np.ascontiguousarray(samples, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2 or y.shape != (x.shape[0],):
        raise DimensionMismatch(f"samples {x.shape} and labels {y.shape} disagree")
    if not np.all((y == 1) | (y == -1)):
        raise ValueError("labels must be +1 or -1")
    if np.all(y == y[0]):
        raise SingleClassData("training labels contain a single class")
    if not c > 0:
        raise ValueError("c must be positive")
    if k.kind == "rbf" and k.scale is None:
        raise ValueError("rbf kernel needs a resolved scale")
    n = x.shape[0]
    weight = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
    if weight.shape != (n,) or np.any(weight <= 0):
        raise ValueError("sample_weight must be positive with one entry per sample")
    bounds = float(c) * weight
    rows = int(min(n, max(2, cache_mb * 2**20 // (8 * n))))
    gamma = k.gamma if k.kind == "rbf" else 0.0
    alpha, grad, n_iter, converged = _solve(
        x, y, k.code, gamma, bounds, float(tol), int(max_iter), rows, bool(shrinking)
    )
    if not converged:
        log.warning("SMO stopped after %d iterations without meeting tol=%g", n_iter, tol)
    return DualSolution(alpha, grad, _offset(alpha, grad, y, bounds), int(n_iter), bool(converged), bounds)


@dataclass(frozen=True)
class BinaryModel:
    """Support-vector expansion ``f(x) = sum_s w_s K(sv_s, x) + bias``.

    ``weights`` are the signed dual coefficients ``a_s y_s``. When training
    merged repeated samples, a weight stands for all copies of its vector
    and may reach ``C`` times the multiplicity.
    """

    support_vectors: np.ndarray
    weights: np.ndarray
    bias: float
    kernel: KernelSpec
    support_indices: np.ndarray | None = field(default=None, compare=False, repr=False)

    @property
    def dim(self) -> int:
        return int(self.support_vectors.shape[1])


def merge_duplicates(x: np.ndarray, y: np.ndarray):
    """Collapse identical ``(x, y)`` rows.

    Returns the indices of the first occurrence of each distinct row, in
    order of appearance, and the multiplicity of each.
    """
    key = np.concatenate([x, y[:, None]], axis=1)
    _, first, counts = np.unique(key, axis=0, return_index=True, return_counts=True)
    order = np.argsort(first)
    return first[order], counts[order].astype(np.float64)


def train_binary(
    samples,
    labels,
    k: KernelSpec,
    c: float = 1.0,
    tol: float = 1e-3,
    *,
    merge: bool = True,
    max_iter: int = DEFAULT_MAX_ITER,
    cache_mb: float = DEFAULT_CACHE_MB,
) -> BinaryModel:
    """Train one binary SVM; labels are ``+1``/``-1``.

    With ``merge`` (the default) repeated samples are solved as a single
    sample whose box limit is ``C`` times its multiplicity. The dual optimum
    is unchanged, and quantized features train much faster.

    Raises
    ------
    SingleClassData
        If only one label value is present.
    """
    x = np.asarray(samples, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2 or y.shape != (x.shape[0],):
        raise DimensionMismatch(f"samples {x.shape} and labels {y.shape} disagree")
    keep = np.arange(x.shape[0])
    weight = None
    if merge and x.shape[0]:
        first, counts = merge_duplicates(x, y)
        if first.size < x.shape[0]:
            keep, weight = first, counts
    sol = solve_dual(
        x[keep], y[keep], k, c, tol, sample_weight=weight, max_iter=max_iter, cache_mb=cache_mb
    )
    sv = np.flatnonzero(sol.alpha > 0)
    return BinaryModel(x[keep[sv]].copy(), sol.alpha[sv] * y[keep[sv]], -sol.rho, k, keep[sv])


def decision_values(m: BinaryModel, x) -> np.ndarray:
    """Decision function on a batch ``(n, d)`` by direct expansion."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != m.dim:
        raise DimensionMismatch(f"model expects {m.dim} features, got {x.shape[1]}")
    return kernel_matrix(m.kernel, x, m.support_vectors) @ m.weights + m.bias


def decision_value(m: BinaryModel, x) -> float:
    """Decision function for one feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionMismatch("decision_value takes one feature vector")
    return float(decision_values(m, x[None, :])[0])

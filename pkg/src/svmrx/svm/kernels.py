"""Kernel functions and the RBF auto-scale heuristic."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist

from ..errors import DimensionMismatch

KERNELS = ("poly2", "rbf")
AUTO_SCALE_SAMPLE = 1000
SCALE_FLOOR = 1e-12


@dataclass(frozen=True)
class KernelSpec:
    """Kernel choice.

    ``poly2`` is ``(1 + <x, y>)**2``. ``rbf`` is
    ``exp(-||x - y||**2 / (2 scale**2))``.
    """

    kind: str
    scale: float | None = None

    def __post_init__(self):
        if self.kind not in KERNELS:
            raise ValueError(f"kernel must be one of {KERNELS}, got {self.kind!r}")
        if self.kind == "rbf" and self.scale is not None:
            if not (np.isfinite(self.scale) and self.scale > 0):
                raise ValueError("rbf scale must be finite and positive")
        if self.kind == "poly2" and self.scale is not None:
            raise ValueError("poly2 takes no scale")

    @property
    def gamma(self) -> float:
        """Coefficient of ``||x - y||**2`` in the RBF exponent."""
        if self.kind != "rbf" or self.scale is None:
            raise ValueError("gamma is only defined for an rbf kernel with a scale")
        return 1.0 / (2.0 * self.scale**2)

    @property
    def code(self) -> int:
        return KERNELS.index(self.kind)


def _check_dims(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape[-1] != y.shape[-1]:
        raise DimensionMismatch(f"feature dimensions differ: {x.shape[-1]} vs {y.shape[-1]}")


def kernel_eval(k: KernelSpec, x, y) -> float:
    """Kernel value for two feature vectors."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1:
        raise DimensionMismatch("kernel_eval takes two 1-D vectors")
    _check_dims(x, y)
    if k.kind == "poly2":
        return float((1.0 + x @ y) ** 2)
    d = x - y
    return float(np.exp(-k.gamma * (d @ d)))


def kernel_matrix(k: KernelSpec, a, b) -> np.ndarray:
    """Kernel values between rows of ``a`` (m, d) and rows of ``b`` (n, d)."""
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    _check_dims(a, b)
    if k.kind == "poly2":
        return (1.0 + a @ b.T) ** 2
    return np.exp(-k.gamma * cdist(a, b, "sqeuclidean"))


def auto_scale(features, seed: int = 0) -> float:
    """Median pairwise Euclidean distance over a seeded subsample.

    At most :data:`AUTO_SCALE_SAMPLE` rows are drawn without replacement;
    the result is floored at :data:`SCALE_FLOOR`.
    """
    x = np.atleast_2d(np.asarray(features, dtype=np.float64))
    n = x.shape[0]
    if n < 2:
        raise ValueError("auto_scale needs at least two samples")
    rng = np.random.default_rng(seed)
    pick = np.sort(rng.choice(n, size=min(AUTO_SCALE_SAMPLE, n), replace=False))
    return max(float(np.median(pdist(x[pick]))), SCALE_FLOOR)

"""Sixteen-class SVM receivers built from binary machines.

``ovo16`` trains one machine per unordered class pair and predicts by
voting. ``bitbank4`` trains one machine per information bit.

Support vectors of all machines are kept in a shared pool so that batch
prediction evaluates each distinct vector once. For the degree-2 polynomial
kernel the expansion is collapsed into an explicit quadratic form.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import DimensionMismatch, MissingClass
from ..phy import N_CLASSES, N_INFO, InfoWord
from .kernels import KernelSpec, auto_scale
from .smo import DEFAULT_CACHE_MB, DEFAULT_MAX_ITER, BinaryModel, train_binary

log = logging.getLogger(__name__)

TECHNIQUES = ("ovo16", "bitbank4")
PAIRS = tuple(combinations(range(N_CLASSES), 2))
_BATCH = 2048


@dataclass(frozen=True)
class Standardizer:
    """Per-feature affine map ``(x - mean) / scale``."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, x: np.ndarray) -> "Standardizer":
        std = x.std(axis=0)
        return cls(x.mean(axis=0), np.where(std > 1e-12, std, 1.0))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.scale


@dataclass
class ReceiverModel:
    """A trained SVM receiver.

    Attributes
    ----------
    technique : {"ovo16", "bitbank4"}
    kernel : KernelSpec
        Shared by every machine.
    pool : ndarray, shape (n_pool, d)
        Distinct support vectors, in the (possibly standardized) feature space.
    members : list of ndarray
        Per machine, indices into ``pool``.
    weights : list of ndarray
        Per machine, signed dual coefficients aligned with ``members``.
    biases : ndarray, shape (n_machines,)
    labels : list of tuple
        ``(a, b)`` class pairs (positive side ``a``) or ``(bit,)`` indices.
    adc_bits : {1, 32}
    c : float
    standardizer : Standardizer or None
    meta : dict
        Free-form provenance (operating point, seed, training size).
    """

    technique: str
    kernel: KernelSpec
    pool: np.ndarray
    members: list
    weights: list
    biases: np.ndarray
    labels: list
    adc_bits: int = 32
    c: float = 1.0
    standardizer: Standardizer | None = None
    meta: dict = field(default_factory=dict)
    _bank: tuple | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.technique not in TECHNIQUES:
            raise ValueError(f"technique must be one of {TECHNIQUES}")
        expected = len(PAIRS) if self.technique == "ovo16" else N_INFO
        if not (len(self.members) == len(self.weights) == len(self.biases) == len(self.labels) == expected):
            raise ValueError(f"{self.technique} needs exactly {expected} machines")
        self.biases = np.asarray(self.biases, dtype=np.float64)

    @property
    def dim(self) -> int:
        return int(self.pool.shape[1])

    @property
    def machines(self) -> list[BinaryModel]:
        """The binary machines as stand-alone expansions (standardized space)."""
        return [
            BinaryModel(self.pool[idx], w, float(b), self.kernel, idx)
            for idx, w, b in zip(self.members, self.weights, self.biases)
        ]

    def transform(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.dim:
            raise DimensionMismatch(f"model expects {self.dim} features, got {x.shape[1]}")
        return self.standardizer(x) if self.standardizer is not None else x

    # -- batch evaluation -------------------------------------------------

    def _prepare(self):
        if self._bank is not None:
            return self._bank
        n_m = len(self.members)
        if self.kernel.kind == "poly2":
            d = self.dim
            iu = np.triu_indices(d)
            coef = np.zeros((1 + d + iu[0].size, n_m))
            for m, (idx, w) in enumerate(zip(self.members, self.weights)):
                sv = self.pool[idx]
                u = w @ sv
                a = (sv * w[:, None]).T @ sv
                quad = np.where(iu[0] == iu[1], 1.0, 2.0) * a[iu]
                coef[:, m] = np.concatenate([[w.sum() + self.biases[m]], 2.0 * u, quad])
            self._bank = ("poly2", coef, iu)
        else:
            wmat = np.zeros((self.pool.shape[0], n_m))
            for m, (idx, w) in enumerate(zip(self.members, self.weights)):
                wmat[idx, m] = w
            self._bank = ("rbf", wmat, None)
        return self._bank

    def decision_matrix(self, x) -> np.ndarray:
        """Decision values of every machine, shape ``(n, n_machines)``."""
        x = self.transform(x)
        kind, coef, iu = self._prepare()
        out = np.empty((x.shape[0], len(self.members)))
        for s in range(0, x.shape[0], _BATCH):
            xb = x[s : s + _BATCH]
            if kind == "poly2":
                phi = np.concatenate([np.ones((xb.shape[0], 1)), xb, xb[:, iu[0]] * xb[:, iu[1]]], axis=1)
                out[s : s + _BATCH] = phi @ coef
            else:
                kb = np.exp(-self.kernel.gamma * cdist(xb, self.pool, "sqeuclidean"))
                out[s : s + _BATCH] = kb @ coef + self.biases
        return out

    def predict_classes(self, x) -> np.ndarray:
        """Class index per row of ``x``."""
        dec = self.decision_matrix(x)
        if self.technique == "ovo16":
            return vote(dec)
        bits = (dec > 0).astype(np.int64)
        return bits @ (1 << np.arange(N_INFO - 1, -1, -1))


_FIRST = np.zeros((len(PAIRS), N_CLASSES))
_SECOND = np.zeros((len(PAIRS), N_CLASSES))
for _m, (_a, _b) in enumerate(PAIRS):
    _FIRST[_m, _a] = 1.0
    _SECOND[_m, _b] = 1.0


def vote(decisions) -> np.ndarray:
    """Max-wins voting over the 120 pairwise decisions.

    A non-negative value votes for the pair's first class. Ties go to the
    class whose winning machines have the larger summed ``|decision|``, then
    to the lowest index.
    """
    d = np.atleast_2d(decisions)
    pos = d >= 0
    mag = np.abs(d)
    votes = pos @ _FIRST + (~pos) @ _SECOND
    conf = (mag * pos) @ _FIRST + (mag * ~pos) @ _SECOND
    top = votes == votes.max(axis=1, keepdims=True)
    return np.argmax(np.where(top, conf, -np.inf), axis=1)


def _build(technique, kernel, x, machines, labels, adc_bits, c, std, meta) -> ReceiverModel:
    used = np.unique(np.concatenate([m.support_indices for m in machines]))
    # identical vectors (common with quantized features) share one pool row
    pool, inverse = np.unique(x[used], axis=0, return_inverse=True)
    where = np.full(x.shape[0], -1, dtype=np.int64)
    where[used] = inverse.ravel()
    members = [where[m.support_indices] for m in machines]
    return ReceiverModel(
        technique,
        kernel,
        pool,
        members,
        [m.weights for m in machines],
        np.array([m.bias for m in machines]),
        labels,
        adc_bits,
        float(c),
        std,
        dict(meta or {}),
    )


def resolve_kernel(kernel, x: np.ndarray, seed: int, scale_factor: float) -> KernelSpec:
    """Turn ``"poly2"``/``"rbf"`` or an unscaled rbf spec into a concrete kernel.

    The RBF scale is ``scale_factor * auto_scale(x)`` computed once over all
    training features, so every machine of a receiver shares one kernel.
    """
    spec = KernelSpec(kernel) if isinstance(kernel, str) else kernel
    if spec.kind == "rbf" and spec.scale is None:
        return KernelSpec("rbf", scale_factor * auto_scale(x, seed))
    return spec


@dataclass(frozen=True)
class TrainOptions:
    """Knobs shared by the two training routines."""

    c: float = 1.0
    tol: float = 1e-3
    scale_factor: float = 0.25
    standardize: bool = False
    max_iter: int = DEFAULT_MAX_ITER
    cache_mb: float = DEFAULT_CACHE_MB


def _prepare_features(x, opts: TrainOptions):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatch("features must be a 2-D array")
    std = Standardizer.fit(x) if opts.standardize else None
    return (std(x) if std else x), std


def train_ovo(
    features,
    classes,
    kernel: KernelSpec | str = "poly2",
    opts: TrainOptions = TrainOptions(),
    seed: int = 0,
    *,
    adc_bits: int = 32,
    meta: dict | None = None,
) -> ReceiverModel:
    """Train the 120 pairwise machines.

    Raises
    ------
    MissingClass
        If any class has fewer than two samples.
    """
    classes = np.asarray(classes)
    counts = np.bincount(classes, minlength=N_CLASSES)
    if classes.size == 0 or np.any(counts[:N_CLASSES] < 2) or counts.size > N_CLASSES:
        missing = [k for k in range(N_CLASSES) if k >= counts.size or counts[k] < 2]
        raise MissingClass(f"classes with fewer than two samples: {missing}")
    x, std = _prepare_features(features, opts)
    spec = resolve_kernel(kernel, x, seed, opts.scale_factor)
    machines = []
    for a, b in PAIRS:
        idx = np.flatnonzero((classes == a) | (classes == b))
        y = np.where(classes[idx] == a, 1.0, -1.0)
        m = train_binary(x[idx], y, spec, opts.c, opts.tol, max_iter=opts.max_iter, cache_mb=opts.cache_mb)
        machines.append(BinaryModel(m.support_vectors, m.weights, m.bias, spec, idx[m.support_indices]))
    return _build("ovo16", spec, x, machines, list(PAIRS), adc_bits, opts.c, std, meta)


def train_bit_bank(
    features,
    classes,
    kernel: KernelSpec | str = "rbf",
    opts: TrainOptions = TrainOptions(),
    seed: int = 0,
    *,
    adc_bits: int = 32,
    meta: dict | None = None,
) -> ReceiverModel:
    """Train one machine per information bit (label +1 where the bit is 1).

    Raises
    ------
    MissingClass
        If some bit position takes only one value in the training labels.
    """
    classes = np.asarray(classes, dtype=np.int64)
    bits = (classes[:, None] >> np.arange(N_INFO - 1, -1, -1)) & 1
    for j in range(N_INFO):
        if bits[:, j].min() == bits[:, j].max():
            raise MissingClass(f"bit {j} takes a single value in the training set")
    x, std = _prepare_features(features, opts)
    spec = resolve_kernel(kernel, x, seed, opts.scale_factor)
    machines = []
    for j in range(N_INFO):
        y = np.where(bits[:, j] == 1, 1.0, -1.0)
        log.debug("training bit machine %d on %d samples", j, x.shape[0])
        machines.append(train_binary(x, y, spec, opts.c, opts.tol, max_iter=opts.max_iter, cache_mb=opts.cache_mb))
    return _build("bitbank4", spec, x, machines, [(j,) for j in range(N_INFO)], adc_bits, opts.c, std, meta)


def predict_ovo(m: ReceiverModel, x) -> InfoWord:
    """Voting decision for one feature vector."""
    if m.technique != "ovo16":
        raise ValueError("predict_ovo needs an ovo16 model")
    return InfoWord.from_class(int(m.predict_classes(np.asarray(x)[None, :])[0]))


def predict_bits(m: ReceiverModel, x) -> InfoWord:
    """Per-bit sign decisions for one feature vector."""
    if m.technique != "bitbank4":
        raise ValueError("predict_bits needs a bitbank4 model")
    return InfoWord.from_class(int(m.predict_classes(np.asarray(x)[None, :])[0]))

"""First-order Gauss-Markov flat fading with additive white Gaussian noise.

The fading gain follows ``h(t) = alpha * h(t-1) + beta(t)``. It starts from
its stationary distribution so that every sample has variance ``sigma_h2``.

Two sample domains are supported. In ``"complex"`` the fading, innovation
and noise are circularly-symmetric complex Gaussian. In ``"real"`` they are
real Gaussian. The real domain is the default because it reproduces the
reference BER curves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .phy import SymbolFrame, InfoWord

DOMAINS = ("real", "complex")
DEFAULT_DOMAIN = "real"


@dataclass(frozen=True)
class FadingParams:
    """Channel statistics.

    Attributes
    ----------
    alpha : float
        AR(1) correlation coefficient in ``[0, 1]``.
    sigma_h2 : float
        Stationary fading power.
    sigma_w2 : float
        Noise power.
    power : float
        Per-symbol transmit power ``P``.
    domain : str
        ``"real"`` or ``"complex"`` Gaussian samples.
    """

    alpha: float
    sigma_w2: float
    sigma_h2: float = 1.0
    power: float = 1.0
    domain: str = DEFAULT_DOMAIN

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.sigma_h2 > 0:
            raise ValueError("sigma_h2 must be positive")
        if not self.sigma_w2 >= 0:
            raise ValueError("sigma_w2 must be non-negative")
        if not self.power > 0:
            raise ValueError("power must be positive")
        if self.domain not in DOMAINS:
            raise ValueError(f"domain must be one of {DOMAINS}, got {self.domain!r}")

    @property
    def innovation_var(self) -> float:
        return (1.0 - self.alpha**2) * self.sigma_h2

    @classmethod
    def from_snr(cls, alpha: float, snr_db: float, **kwargs) -> "FadingParams":
        power = kwargs.get("power", 1.0)
        return cls(alpha=alpha, sigma_w2=snr_to_noise_var(power, snr_db), **kwargs)


def snr_to_noise_var(power: float, snr_db: float) -> float:
    """Noise power giving ``SNR = P / sigma_w2`` at ``snr_db`` decibels."""
    if not power > 0:
        raise ValueError("power must be positive")
    return float(power * 10.0 ** (-snr_db / 10.0))


def gaussian(rng: np.random.Generator, var: float, size, domain: str) -> np.ndarray:
    """Zero-mean Gaussian samples with total variance ``var``.

    Complex samples split the variance evenly between I and Q. The draw order
    is fixed so that a given generator state always yields the same values.
    """
    if domain == "real":
        return np.sqrt(var) * rng.standard_normal(size)
    re_part = rng.standard_normal(size)
    im_part = rng.standard_normal(size)
    return np.sqrt(var / 2.0) * (re_part + 1j * im_part)


@dataclass
class FadingState:
    """Current fading gain plus the generator that drives the channel.

    A state is owned by a single stream; the generator is advanced in place.
    """

    h_current: complex
    rng: np.random.Generator

    @classmethod
    def stationary(cls, params: FadingParams, rng: np.random.Generator) -> "FadingState":
        h0 = gaussian(rng, params.sigma_h2, (), params.domain)
        return cls(complex(h0), rng)


def step_fading(state: FadingState, params: FadingParams) -> tuple[complex, FadingState]:
    """Advance the fading process by one symbol."""
    beta = gaussian(state.rng, params.innovation_var, (), params.domain)
    h_next = params.alpha * state.h_current + complex(beta)
    return h_next, FadingState(h_next, state.rng)


@dataclass(frozen=True)
class ReceivedFrame:
    """Channel outputs for one frame.

    ``h_true`` holds the fading gains at the frame's own slots, in
    transmission order. It is for diagnostics only and never reaches a
    receiver.
    """

    r: np.ndarray
    z: np.ndarray
    truth: InfoWord
    h_true: np.ndarray


def transmit(
    frame: SymbolFrame, truth: InfoWord, state: FadingState, params: FadingParams
) -> tuple[ReceivedFrame, FadingState]:
    """Send one frame through the channel.

    The first symbol of the frame sees ``state.h_current``; the returned
    state holds the gain for the symbol after the frame, so successive calls
    form one continuous fading process.
    """
    x = frame.symbols
    n = x.size
    h = np.empty(n, dtype=np.complex128)
    h[0] = state.h_current
    for t in range(1, n):
        h[t], state = step_fading(state, params)
    w = gaussian(state.rng, params.sigma_w2, n, params.domain)
    y = h * x + w
    _, state = step_fading(state, params)
    L = frame.pilots.size
    return ReceivedFrame(y[:L], y[L:], truth, h), state


def fading_process(
    rng: np.random.Generator, params: FadingParams, n: int, h0: complex | None = None
) -> np.ndarray:
    """``n`` consecutive fading gains from a stationary start (vectorized).

    ``h0`` overrides the initial gain. The recursion is run with an IIR
    filter on the innovation sequence.
    """
    e = gaussian(rng, params.innovation_var, n, params.domain)
    first = gaussian(rng, params.sigma_h2, (), params.domain) if h0 is None else h0
    if n == 0:
        return e
    e[0] = first
    return lfilter([1.0], [1.0, -params.alpha], e)


def fading_paths(rng: np.random.Generator, params: FadingParams, n_paths: int, n: int) -> np.ndarray:
    """``n_paths`` independent stationary fading paths of length ``n``, shape ``(n_paths, n)``."""
    first = gaussian(rng, params.sigma_h2, n_paths, params.domain)
    e = gaussian(rng, params.innovation_var, (n_paths, n), params.domain)
    if n == 0:
        return e
    e[:, 0] = first
    return lfilter([1.0], [1.0, -params.alpha], e, axis=-1)


def fading_covariance(span: int, params: FadingParams) -> np.ndarray:
    """Covariance ``sigma_h2 * alpha**|m-n|`` of ``span`` consecutive gains.

    The matrix is symmetric Toeplitz, so it is the same under transmission
    order and under reversed order.
    """
    if span < 1:
        raise ValueError("span must be at least 1")
    lag = np.abs(np.subtract.outer(np.arange(span), np.arange(span)))
    with np.errstate(divide="ignore"):
        cov = params.sigma_h2 * np.power(float(params.alpha), lag)
    return cov.astype(np.float64)

"""Maximum-likelihood and pilot-aided conventional receivers.

Window conventions
------------------
A frame ``i`` is observed through a window of ``2L + T`` slots: its own
pilot block, its ``T`` data slots and the next frame's pilot block.

* *Transmission order* lists the window oldest first:
  ``[p_i, s_i(0..T-1), p_{i+1}]``. Channel estimates use this order.
* *Newest-first order* is the reverse, ``[p_{i+1}, s_i reversed, p_i]``. The
  ML hypothesis tables and the Kalman state use it, which makes the state
  transition a simple shift.

The fading covariance is symmetric Toeplitz and so is identical in both
orders.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np
from scipy.signal import lfilter

from . import numerics
from .channel import FadingParams, ReceivedFrame, fading_covariance
from .phy import (
    DEFAULT_LAYOUT,
    N_CLASSES,
    InfoWord,
    bpsk_demodulate_hard,
    hamming_code,
    pilot_symbols,
)

Estimator = Literal["mmse", "kalman"]

#: Below this channel-estimate power the equalizer outputs 0.
EQUALIZER_FLOOR = 1e-30

T_DATA = 7
L_PILOT = 1
WINDOW = 2 * L_PILOT + T_DATA


def newest_first_window(r_cur, z, r_next) -> np.ndarray:
    """Stack ``[r_next, reversed(z), r_cur]`` along the last axis.

    Accepts single frames (1-D blocks) or batches with one frame per row.
    """
    r_cur, z, r_next = (np.asarray(a) for a in (r_cur, z, r_next))
    return np.concatenate([r_next, z[..., ::-1], r_cur[..., ::-1]], axis=-1)


def pilot_stack(r_cur, r_next) -> np.ndarray:
    """Pilot observations ``[r_next, r_cur]``."""
    return np.concatenate([np.asarray(r_next), np.asarray(r_cur)], axis=-1)


# ----------------------------------------------------------------------------
# Maximum likelihood
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class HypothesisTables:
    """Per-class output covariance factors for the ML decoder.

    Attributes
    ----------
    symbols : numpy.ndarray, shape (16, 2L+T)
        Window symbols of each hypothesis in newest-first order.
    factors : numpy.ndarray, shape (16, 2L+T, 2L+T)
        Cholesky factors of the output covariance under each hypothesis.
    log_dets : numpy.ndarray, shape (16,)
    """

    symbols: np.ndarray
    factors: np.ndarray
    log_dets: np.ndarray
    params: FadingParams
    layout: str

    @property
    def log_det_spread(self) -> float:
        return float(np.max(self.log_dets) - np.min(self.log_dets))

    def covariance(self, k: int) -> np.ndarray:
        f = self.factors[k]
        return f @ f.conj().T

    def metrics(self, y) -> np.ndarray:
        """Quadratic forms ``y^H S_k^{-1} y`` for every class, shape ``(..., 16)``."""
        y = np.asarray(y)
        return np.stack(
            [numerics.quadratic_form(None, y, factor=f) for f in self.factors], axis=-1
        )


def hypothesis_covariance(x: np.ndarray, params: FadingParams) -> np.ndarray:
    """``diag(x) C_h diag(x)^H + sigma_w2 I`` for window symbols ``x``."""
    cov_h = fading_covariance(x.size, params)
    return (x[:, None] * cov_h * x.conj()[None, :]) + params.sigma_w2 * np.eye(x.size)


def build_hypothesis_tables(
    params: FadingParams, pilots: np.ndarray | None = None, layout: str = DEFAULT_LAYOUT
) -> HypothesisTables:
    """Factorize the 16 hypothesis covariances.

    Raises
    ------
    NotPositiveDefinite
        Only when ``sigma_w2`` is zero and the fading is degenerate.
    """
    if pilots is None:
        pilots = pilot_symbols(params.power, L_PILOT)
    code = hamming_code(layout)
    data = np.sqrt(params.power) * (1.0 - 2.0 * code.codewords)
    symbols = np.concatenate(
        [np.tile(pilots, (N_CLASSES, 1)), data[:, ::-1], np.tile(pilots[::-1], (N_CLASSES, 1))],
        axis=1,
    )
    if np.all(np.isreal(pilots)):
        symbols = symbols.real
    factors = np.stack([numerics.cholesky(hypothesis_covariance(x, params)) for x in symbols])
    log_dets = np.array([numerics.log_det(None, factor=f) for f in factors])
    return HypothesisTables(symbols, factors, log_dets, params, layout)


def ml_decode_batch(y, tables: HypothesisTables) -> np.ndarray:
    """Class indices minimizing the quadratic metric; ties go to the lowest index."""
    return np.argmin(tables.metrics(y), axis=-1)


def ml_decode(y, tables: HypothesisTables) -> InfoWord:
    """Decode one newest-first window ``y`` of length ``2L+T``."""
    y = np.asarray(y)
    if y.shape != (tables.symbols.shape[1],):
        raise numerics.DimensionMismatch(f"expected window of {tables.symbols.shape[1]}, got {y.shape}")
    return InfoWord.from_class(int(ml_decode_batch(y[None, :], tables)[0]))


# ----------------------------------------------------------------------------
# Channel estimation
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class ChannelEstimate:
    """Fading estimate over the window in transmission order."""

    h_hat: np.ndarray
    source: Estimator

    @property
    def data(self) -> np.ndarray:
        return self.h_hat[..., L_PILOT : L_PILOT + T_DATA]


def _pilot_slots(window: int) -> np.ndarray:
    # transmission-order positions of [p_{i+1}, p_i]
    return np.array([window - 1, 0])


def lmmse_matrix(params: FadingParams, pilots: np.ndarray | None = None) -> np.ndarray:
    """Linear map ``W`` with ``h_hat = W @ [r_next, r_cur]`` (transmission order)."""
    if pilots is None:
        pilots = pilot_symbols(params.power, L_PILOT)
    p = np.asarray(pilots)[0]
    cov = fading_covariance(WINDOW, params)
    slots = _pilot_slots(WINDOW)
    pv = np.array([p, p])
    cross = cov[:, slots] * np.conj(pv)[None, :]
    obs = cov[np.ix_(slots, slots)] * np.outer(pv, np.conj(pv)) + params.sigma_w2 * np.eye(2)
    # W = cross @ obs^{-1}; obs is Hermitian so solve obs W^H = cross^H
    w = numerics.hermitian_solve(obs, cross.conj()).conj()
    return w.real if np.all(np.isreal(w)) else w


def lmmse_estimate(r_stack, params: FadingParams, pilots: np.ndarray | None = None) -> ChannelEstimate:
    """L-MMSE estimate from the pilot observations ``[r_next, r_cur]``."""
    r_stack = np.asarray(r_stack)
    if r_stack.shape[-1] != 2 * L_PILOT:
        raise numerics.DimensionMismatch(f"expected {2 * L_PILOT} pilot observations")
    w = lmmse_matrix(params, pilots)
    return ChannelEstimate(r_stack @ w.T, "mmse")


@dataclass(frozen=True)
class KalmanState:
    """Gaussian belief over the window fading gains, newest-first order."""

    mean: np.ndarray
    cov: np.ndarray
    frame_index: int = 0


@dataclass(frozen=True)
class KalmanModel:
    """State-space matrices of the frame-rate fading recursion.

    ``transition`` shifts the newest pilot gain into the oldest slot and
    extrapolates the new block from it; ``noise_gain @ noise_gain^T`` scaled by
    the innovation variance is the process noise.
    """

    transition: np.ndarray
    process_cov: np.ndarray
    observation: np.ndarray
    noise_var: float


def kalman_model(params: FadingParams, pilots: np.ndarray | None = None) -> KalmanModel:
    if pilots is None:
        pilots = pilot_symbols(params.power, L_PILOT)
    a = float(params.alpha)
    n_new = L_PILOT + T_DATA
    lags = n_new - np.arange(n_new)  # lag of each new entry behind the old newest pilot
    f = np.zeros((WINDOW, WINDOW))
    f[:n_new, 0] = a**lags
    f[n_new:, :L_PILOT] = np.eye(L_PILOT)
    diff = np.subtract.outer(np.arange(n_new), np.arange(n_new))
    alpha_m = np.where(diff <= 0, a ** np.abs(diff), 0.0)
    g = np.zeros((WINDOW, n_new))
    g[:n_new] = alpha_m
    q = params.innovation_var * (g @ g.T)
    p = np.asarray(pilots)[0]
    h = np.zeros((2 * L_PILOT, WINDOW), dtype=np.result_type(p, float))
    h[0, 0] = p
    h[1, WINDOW - 1] = p
    if np.isreal(p):
        h = h.real
    return KalmanModel(f, q, h, params.sigma_w2)


def kalman_init(params: FadingParams) -> KalmanState:
    """Zero mean with the stationary window covariance."""
    return KalmanState(np.zeros(WINDOW), fading_covariance(WINDOW, params), 0)


def kalman_predict(state: KalmanState, params: FadingParams, model: KalmanModel | None = None) -> KalmanState:
    """Propagate the belief from frame ``i-1`` to frame ``i``."""
    model = model or kalman_model(params)
    f = model.transition
    cov = f @ state.cov @ f.T + model.process_cov
    return KalmanState(f @ state.mean, 0.5 * (cov + cov.conj().T), state.frame_index + 1)


def _gain(cov: np.ndarray, model: KalmanModel) -> np.ndarray:
    h = model.observation
    s = h @ cov @ h.conj().T + model.noise_var * np.eye(h.shape[0])
    # K = P H^H S^{-1}  <=>  S K^H = H P
    return numerics.hermitian_solve(s, (h @ cov).T).conj()


def _posterior_cov(cov: np.ndarray, gain: np.ndarray, model: KalmanModel) -> np.ndarray:
    a = np.eye(cov.shape[0]) - gain @ model.observation
    out = a @ cov @ a.conj().T + model.noise_var * (gain @ gain.conj().T)
    return 0.5 * (out + out.conj().T)


def kalman_update(
    state: KalmanState, r_stack, params: FadingParams, model: KalmanModel | None = None
) -> tuple[KalmanState, ChannelEstimate]:
    """Condition the predicted belief on the pilot observations ``[r_next, r_cur]``."""
    model = model or kalman_model(params)
    r_stack = np.asarray(r_stack)
    if r_stack.shape != (2 * L_PILOT,):
        raise numerics.DimensionMismatch(f"expected {2 * L_PILOT} pilot observations")
    gain = _gain(state.cov, model)
    innovation = r_stack - model.observation @ state.mean
    mean = state.mean + gain @ innovation
    post = KalmanState(mean, _posterior_cov(state.cov, gain, model), state.frame_index)
    return post, ChannelEstimate(mean[::-1].copy(), "kalman")


def kalman_gain_schedule(params: FadingParams, max_frames: int = 100_000, rtol: float = 1e-15):
    """Gains of the first frames until they stop changing.

    The covariance recursion does not depend on the data, so the gain
    sequence is precomputed once. Returns the list of gains; the last entry
    is used for every later frame.
    """
    model = kalman_model(params)
    state = kalman_init(params)
    gains = []
    for i in range(max_frames):
        if i:
            state = kalman_predict(state, params, model)
        gain = _gain(state.cov, model)
        state = KalmanState(state.mean, _posterior_cov(state.cov, gain, model), i)
        if gains and np.max(np.abs(gain - gains[-1])) <= rtol * np.max(np.abs(gain)):
            break
        gains.append(gain)
    return gains, model


def kalman_filter_stream(r_cur, r_next, params: FadingParams) -> np.ndarray:
    """Posterior means for a continuous stream of frames, transmission order.

    Equivalent to alternating :func:`kalman_predict` and
    :func:`kalman_update` frame by frame. Because only the newest pilot
    entry of the previous posterior feeds the prediction, the mean recursion
    is scalar and its steady-state part runs as an IIR filter.
    """
    obs = pilot_stack(r_cur, r_next)
    n = obs.shape[0]
    gains, model = kalman_gain_schedule(params)
    f = model.transition[:, 0]
    h = model.observation
    dtype = np.result_type(obs, gains[0])
    means = np.empty((n, WINDOW), dtype=dtype)
    prev = 0.0  # newest pilot entry of the previous posterior
    n_tr = min(len(gains), n)
    for i in range(n_tr):
        k = gains[i]
        pred = f * prev
        means[i] = pred + k @ (obs[i] - h @ pred)
        prev = means[i, 0]
    if n > n_tr:
        k = gains[-1]
        carry = f - k @ (h @ f)  # posterior mean = carry * prev + k @ obs
        drive = obs[n_tr:] @ k.T
        c0 = carry[0]
        newest = lfilter([1.0], [1.0, -c0], drive[:, 0], zi=np.array([c0 * prev]))[0]
        prevs = np.concatenate([[prev], newest[:-1]])
        means[n_tr:] = prevs[:, None] * carry[None, :] + drive
    return means[:, ::-1]


# ----------------------------------------------------------------------------
# Equalization and the full Model 1 pipeline
# ----------------------------------------------------------------------------


def equalize(z, h_hat_data) -> np.ndarray:
    """Zero-forcing ``conj(h) z / |h|^2`` with a zero output for vanishing ``h``."""
    z = np.asarray(z)
    h = np.asarray(h_hat_data)
    if z.shape != h.shape:
        raise numerics.DimensionMismatch(f"shape mismatch {z.shape} vs {h.shape}")
    power = np.abs(h) ** 2
    safe = power >= EQUALIZER_FLOOR
    out = np.zeros(np.broadcast_shapes(z.shape, h.shape), dtype=np.result_type(z, h, float))
    np.divide(np.conj(h) * z, power, out=out, where=safe)
    return out


class ConventionalReceiver:
    """Estimate, equalize, slice and syndrome-decode (Model 1).

    Parameters
    ----------
    estimator : {"mmse", "kalman"}
    params : FadingParams
    layout : str
        Hamming code layout used by the transmitter.
    """

    def __init__(self, estimator: Estimator, params: FadingParams, layout: str = DEFAULT_LAYOUT):
        if estimator not in ("mmse", "kalman"):
            raise ValueError(f"unknown estimator {estimator!r}")
        self.estimator = estimator
        self.params = params
        self.code = hamming_code(layout)
        self._lmmse = lmmse_matrix(params) if estimator == "mmse" else None

    def estimate(self, r_cur, r_next) -> np.ndarray:
        if self.estimator == "mmse":
            return pilot_stack(r_cur, r_next) @ self._lmmse.T
        return kalman_filter_stream(r_cur, r_next, self.params)

    def decode(self, r_cur, z, r_next) -> np.ndarray:
        """Class index per frame; rows must be consecutive frames for Kalman."""
        h_hat = self.estimate(np.atleast_2d(r_cur), np.atleast_2d(r_next))
        eq = equalize(np.atleast_2d(z), h_hat[:, L_PILOT : L_PILOT + T_DATA])
        return self.code.decode_bits(bpsk_demodulate_hard(eq))


def conventional_receive(
    frames: Iterable[tuple[ReceivedFrame, np.ndarray]],
    estimator: Estimator,
    params: FadingParams,
    layout: str = DEFAULT_LAYOUT,
) -> list[InfoWord]:
    """Decode a stream of ``(frame, r_next)`` pairs."""
    frames = list(frames)
    if not frames:
        return []
    r_cur = np.stack([f.r for f, _ in frames])
    z = np.stack([f.z for f, _ in frames])
    r_next = np.stack([np.asarray(rn) for _, rn in frames])
    rx = ConventionalReceiver(estimator, params, layout)
    return [InfoWord.from_class(int(k)) for k in rx.decode(r_cur, z, r_next)]


class MLReceiver:
    """Exhaustive 16-hypothesis ML decoder over the frame window."""

    def __init__(self, params: FadingParams, layout: str = DEFAULT_LAYOUT):
        self.tables = build_hypothesis_tables(params, layout=layout)

    def decode(self, r_cur, z, r_next) -> np.ndarray:
        y = newest_first_window(np.atleast_2d(r_cur), np.atleast_2d(z), np.atleast_2d(r_next))
        return ml_decode_batch(y, self.tables)

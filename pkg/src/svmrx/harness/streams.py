"""Seeded frame streams.

A stream is one continuous fading process carrying ``count`` frames. Frame
``i`` occupies slots ``8i .. 8i+7`` (pilot then data). The pilot at slot
``8(i+1)`` is shared with the next frame, so ``count * 8 + 1`` symbols are
simulated in total.
"""

from __future__ import annotations

import hashlib
from collections.abc import Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..channel import FadingParams, ReceivedFrame, fading_process, gaussian
from ..phy import DEFAULT_LAYOUT, N_CLASSES, InfoWord, hamming_code

L_PILOT = 1
T_DATA = 7
FRAME_LEN = L_PILOT + T_DATA

_MASK64 = (1 << 64) - 1


class StreamId(NamedTuple):
    """Identifies a stream within one grid point."""

    receiver: str
    role: str  # "train" or "eval"


def derive_seed(seed: int, alpha: float, snr_db: float, receiver: str, role: str) -> int:
    """Per-stream seed: ``seed XOR blake2b-64("alpha|snr_db|receiver|role")``.

    Floats are rendered with ``repr`` so the mapping is stable across
    platforms and versions.
    """
    key = f"{float(alpha)!r}|{float(snr_db)!r}|{receiver}|{role}".encode()
    digest = int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "big")
    return (int(seed) & _MASK64) ^ digest


@dataclass(frozen=True)
class FrameBatch(Sequence):
    """A block of consecutive frames stored as arrays.

    Indexing yields ``(ReceivedFrame, r_next)`` pairs, so a batch can be used
    wherever a frame sequence is expected.

    Attributes
    ----------
    r : ndarray, shape (n, L)
        Pilot outputs of each frame.
    z : ndarray, shape (n, T)
        Data outputs.
    r_next : ndarray, shape (n, L)
        Pilot outputs of the following frame.
    classes : ndarray, shape (n,)
        Transmitted class indices.
    h : ndarray, shape (n, 2L+T)
        True fading over each frame's window, transmission order.
    """

    r: np.ndarray
    z: np.ndarray
    r_next: np.ndarray
    classes: np.ndarray
    h: np.ndarray

    def __len__(self) -> int:
        return int(self.classes.shape[0])

    def __getitem__(self, i):
        if isinstance(i, slice):
            return FrameBatch(self.r[i], self.z[i], self.r_next[i], self.classes[i], self.h[i])
        frame = ReceivedFrame(
            self.r[i], self.z[i], InfoWord.from_class(int(self.classes[i])), self.h[i, : FRAME_LEN]
        )
        return frame, self.r_next[i]


def simulate_frames(
    rng: np.random.Generator, params: FadingParams, count: int, layout: str = DEFAULT_LAYOUT
) -> FrameBatch:
    """Draw ``count`` uniformly random words and pass them through the channel.

    Draw order: class indices, fading, noise.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    code = hamming_code(layout)
    classes = rng.integers(0, N_CLASSES, size=count)
    n_sym = count * FRAME_LEN + L_PILOT
    h = fading_process(rng, params, n_sym)
    noise = gaussian(rng, params.sigma_w2, n_sym, params.domain)

    amp = np.sqrt(params.power)
    x = np.full(n_sym, amp)
    if count:
        data = amp * (1.0 - 2.0 * code.codewords[classes])
        x[: count * FRAME_LEN].reshape(count, FRAME_LEN)[:, L_PILOT:] = data
    y = h * x + noise

    body = y[: count * FRAME_LEN].reshape(count, FRAME_LEN)
    r = body[:, :L_PILOT]
    z = body[:, L_PILOT:]
    r_next = y[FRAME_LEN::FRAME_LEN][:count, None]
    idx = np.arange(count)[:, None] * FRAME_LEN + np.arange(FRAME_LEN + L_PILOT)[None, :]
    return FrameBatch(r.copy(), z.copy(), r_next.copy(), classes, h[idx])

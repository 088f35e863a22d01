"""Receiver adapters sharing one decode interface and the BER evaluator."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from ..channel import FadingParams
from ..conventional import ConventionalReceiver, MLReceiver
from ..phy import N_INFO
from ..svm.features import extract_features
from ..svm.multiclass import ReceiverModel
from .records import BerRecord
from .streams import FrameBatch

TECHNIQUE_NAMES = {
    "ml": "ideal",
    "mmse": "model1_tech1",
    "kalman": "model1_tech2",
    "svm_ovo": "model2_tech1",
    "svm_bitbank": "model2_tech2",
}
FULL_PRECISION = 32


class Receiver(Protocol):
    """Anything that maps a frame batch to class indices."""

    name: str
    kernel: str
    adc_bits: int

    def decode(self, batch: FrameBatch) -> np.ndarray: ...


@dataclass
class ConventionalAdapter:
    name: str
    impl: object
    kernel: str = "none"
    adc_bits: int = FULL_PRECISION

    def decode(self, batch: FrameBatch) -> np.ndarray:
        return self.impl.decode(batch.r, batch.z, batch.r_next)


@dataclass
class SvmAdapter:
    name: str
    model: ReceiverModel

    @property
    def kernel(self) -> str:
        return self.model.kernel.kind

    @property
    def adc_bits(self) -> int:
        return self.model.adc_bits

    def decode(self, batch: FrameBatch) -> np.ndarray:
        feats = extract_features(batch.r_next, batch.r, batch.z, self.model.adc_bits)
        return self.model.predict_classes(feats)


def conventional_receiver(name: str, params: FadingParams, layout: str) -> ConventionalAdapter:
    if name == "ml":
        return ConventionalAdapter(name, MLReceiver(params, layout))
    if name in ("mmse", "kalman"):
        return ConventionalAdapter(name, ConventionalReceiver(name, params, layout))
    raise ValueError(f"{name!r} is not a conventional receiver")


def count_bit_errors(decoded, truth) -> int:
    """Total Hamming distance between 4-bit class indices."""
    diff = (np.asarray(decoded, dtype=np.int64) ^ np.asarray(truth, dtype=np.int64)) & 0xF
    return int(np.unpackbits(diff.astype(np.uint8)).sum())


def evaluate_receiver(
    receiver: Receiver, stream: FrameBatch, alpha: float, snr_db: float, seed: int
) -> BerRecord:
    """Decode ``stream`` and count information-bit errors."""
    frames = len(stream)
    errors = count_bit_errors(receiver.decode(stream), stream.classes) if frames else 0
    info_bits = N_INFO * frames
    return BerRecord(
        alpha=float(alpha),
        snr_db=float(snr_db),
        receiver=receiver.name,
        technique=TECHNIQUE_NAMES.get(receiver.name, receiver.name),
        kernel=receiver.kernel,
        adc_bits=int(receiver.adc_bits),
        frames=frames,
        info_bits=info_bits,
        bit_errors=errors,
        ber=errors / info_bits if info_bits else 0.0,
        seed=int(seed),
    )

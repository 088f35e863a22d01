"""Grid execution: streams, training and evaluation per operating point."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..channel import FadingParams, snr_to_noise_var
from ..svm.features import extract_features
from ..svm.multiclass import ReceiverModel, TrainOptions, train_bit_bank, train_ovo
from .config import SVM_RECEIVERS, ExperimentConfig
from .records import BerRecord, write_csv
from .receivers import SvmAdapter, conventional_receiver, evaluate_receiver
from .streams import FrameBatch, StreamId, derive_seed, simulate_frames

log = logging.getLogger(__name__)


def channel_params(config: ExperimentConfig, alpha: float, snr_db: float) -> FadingParams:
    return FadingParams(
        alpha=float(alpha),
        sigma_w2=snr_to_noise_var(config.power, snr_db),
        sigma_h2=config.sigma_h2,
        power=config.power,
        domain=config.fading,
    )


def generate_stream(
    config: ExperimentConfig, alpha: float, snr_db: float, count: int, stream_id: StreamId
) -> FrameBatch:
    """Frames for one stream; identical arguments give identical frames."""
    seed = derive_seed(config.seed, alpha, snr_db, stream_id.receiver, stream_id.role)
    rng = np.random.default_rng(seed)
    return simulate_frames(rng, channel_params(config, alpha, snr_db), count, config.code_layout)


def train_options(config: ExperimentConfig) -> TrainOptions:
    return TrainOptions(
        c=config.c, tol=config.tol, scale_factor=config.rbf_scale_factor, standardize=config.standardize
    )


def train_svm_receiver(
    config: ExperimentConfig, receiver: str, kernel: str, alpha: float, snr_db: float
) -> ReceiverModel:
    """Train one SVM receiver on a fresh stream at ``(alpha, snr_db)``."""
    if receiver not in SVM_RECEIVERS:
        raise ValueError(f"{receiver!r} is not an SVM receiver")
    sid = StreamId(receiver, "train")
    batch = generate_stream(config, alpha, snr_db, config.frames_train, sid)
    feats = extract_features(batch.r_next, batch.r, batch.z, config.adc_bits)
    seed = derive_seed(config.seed, alpha, snr_db, receiver, "train")
    meta = {
        "receiver": receiver,
        "alpha": float(alpha),
        "snr_db": float(snr_db),
        "frames_train": config.frames_train,
        "seed": config.seed,
        "fading": config.fading,
        "code_layout": config.code_layout,
        "power": config.power,
        "sigma_h2": config.sigma_h2,
    }
    trainer = train_ovo if receiver == "svm_ovo" else train_bit_bank
    return trainer(feats, batch.classes, kernel, train_options(config), seed, adc_bits=config.adc_bits, meta=meta)


@dataclass(frozen=True)
class Point:
    """One grid entry; ``kernel`` is ``"none"`` for conventional receivers."""

    alpha: float
    snr_db: float
    receiver: str
    kernel: str


def grid(config: ExperimentConfig) -> list[Point]:
    """Grid entries in output order: alpha, then SNR, then receiver, then kernel."""
    pts = []
    for a in config.alpha:
        for s in config.snr_db:
            for r in config.receivers:
                kernels = config.kernel if r in SVM_RECEIVERS else ("none",)
                pts.extend(Point(a, s, r, k) for k in kernels)
    return pts


def evaluate_model(config: ExperimentConfig, model: ReceiverModel, alpha: float, snr_db: float) -> BerRecord:
    """BER of a trained SVM receiver on the evaluation stream of a point."""
    name = model.meta.get("receiver", "svm_ovo" if model.technique == "ovo16" else "svm_bitbank")
    stream = generate_stream(config, alpha, snr_db, config.frames_eval, StreamId(name, "eval"))
    return evaluate_receiver(SvmAdapter(name, model), stream, alpha, snr_db, config.seed)


def run_point(config: ExperimentConfig, point: Point) -> BerRecord:
    """Train (if needed) and evaluate one grid entry."""
    a, s = point.alpha, point.snr_db
    if point.receiver in SVM_RECEIVERS:
        model = train_svm_receiver(config, point.receiver, point.kernel, a, s)
        rec = evaluate_model(config, model, a, s)
    else:
        rx = conventional_receiver(point.receiver, channel_params(config, a, s), config.code_layout)
        stream = generate_stream(config, a, s, config.frames_eval, StreamId(point.receiver, "eval"))
        rec = evaluate_receiver(rx, stream, a, s, config.seed)
    log.info("alpha=%g snr=%g %s/%s ber=%.5f", a, s, point.receiver, point.kernel, rec.ber)
    return rec


def _run_point_args(args):
    return run_point(*args)


def run_sweep(config: ExperimentConfig, workers: int = 1, write: bool = True) -> list[BerRecord]:
    """Run the full grid and (optionally) write ``config.output``.

    Points are independent, so ``workers > 1`` distributes them over
    processes. Results are merged in grid order and are identical for any
    worker count.
    """
    config.validate()
    points = grid(config)
    if workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_point_args, [(config, p) for p in points]))
    else:
        records = [run_point(config, p) for p in points]
    if write:
        write_csv(records, config.output)
    return records

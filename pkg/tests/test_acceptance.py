"""Acceptance criteria: reproduction of the reference BER curves and the oracle suite.

Each criterion prints one ``PASS``/``FAIL`` line, followed by indented
per-point details. Run with ``pytest tests/test_acceptance.py -s`` or
directly as ``python tests/test_acceptance.py``. The SVM criteria train on
100k frames per point and take roughly half an hour on one core.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from functools import cache

import pytest

from svmrx.harness.config import ExperimentConfig
from svmrx.harness.records import BerRecord
from svmrx.harness.sweep import Point, run_point
from svmrx.selftest import CHECKS

SNRS = (5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
CONVENTIONAL_FRAMES = 200_000
SVM_EVAL_FRAMES = 100_000

# reference curves
ML_95 = dict(zip(SNRS, (0.2101, 0.1372, 0.0971, 0.0784, 0.0710, 0.0687)))
MMSE_99 = dict(zip(SNRS, (0.1973, 0.1309, 0.0886, 0.0665, 0.0596, 0.0549)))
KALMAN_99_30 = 0.0548
OVO_97_30 = {"poly2": 0.0537, "rbf": 0.0550}
BITBANK_99_30 = 0.0470
ONE_BIT_97_30 = 0.0959
MODEL1_97_30 = 0.0953

CURVE_REL, CURVE_ABS = 0.07, 0.005
SVM_REL = 0.25
SVM_TO_ML_MAX = 1.15
MODEL1_TO_ML_MIN = 1.3
KALMAN_MMSE_GAP = 0.006
ONE_BIT_GAP = 0.015


@dataclass
class Verdict:
    name: str
    lines: list[str] = field(default_factory=list)
    ok: bool = True

    def check(self, passed: bool, text: str) -> None:
        self.ok &= bool(passed)
        self.lines.append(f"  [{'ok' if passed else 'XX'}] {text}")

    def report(self) -> str:
        return "\n".join([f"{'PASS' if self.ok else 'FAIL'} {self.name}", *self.lines])


def curve_close(got: float, ref: float) -> bool:
    return abs(got - ref) <= max(CURVE_REL * ref, CURVE_ABS)


def svm_close(got: float, ref: float) -> bool:
    return abs(got - ref) <= SVM_REL * ref


@cache
def point(alpha: float, snr: float, receiver: str, kernel: str = "none", adc_bits: int = 32) -> BerRecord:
    svm = receiver.startswith("svm")
    cfg = ExperimentConfig(
        alpha=(alpha,),
        snr_db=(snr,),
        receivers=(receiver,),
        kernel=(kernel if svm else "poly2",),
        frames_eval=SVM_EVAL_FRAMES if svm else CONVENTIONAL_FRAMES,
        adc_bits=adc_bits,
    )
    return run_point(cfg, Point(alpha, snr, receiver, kernel))


def fmt(rec: BerRecord) -> str:
    return f"{rec.ber:.4f}+-{rec.std_error:.4f}"


@cache
def criterion_1() -> Verdict:
    v = Verdict("C1 ML curve, alpha=0.95 (+-7% or +-0.005)")
    for s in SNRS:
        rec = point(0.95, s, "ml")
        v.check(curve_close(rec.ber, ML_95[s]), f"snr={s:g}: ber {fmt(rec)} vs {ML_95[s]}")
    return v


@cache
def criterion_2() -> Verdict:
    v = Verdict("C2 Model 1 MMSE curve and Kalman, alpha=0.99")
    for s in SNRS:
        m = point(0.99, s, "mmse")
        k = point(0.99, s, "kalman")
        v.check(curve_close(m.ber, MMSE_99[s]), f"snr={s:g}: mmse {fmt(m)} vs {MMSE_99[s]}")
        gap = abs(k.ber - m.ber)
        v.check(gap <= KALMAN_MMSE_GAP, f"snr={s:g}: |kalman {k.ber:.4f} - mmse {m.ber:.4f}| = {gap:.4f} <= {KALMAN_MMSE_GAP}")
    k30 = point(0.99, 30.0, "kalman")
    v.check(curve_close(k30.ber, KALMAN_99_30), f"snr=30: kalman {fmt(k30)} vs {KALMAN_99_30}")
    return v


@cache
def criterion_3() -> Verdict:
    v = Verdict("C3 SVM one-vs-one, alpha=0.97 (+-25% at 30 dB, <=1.15x ML, Model 1 >=1.3x ML from 15 dB)")
    for kernel, ref in OVO_97_30.items():
        rec = point(0.97, 30.0, "svm_ovo", kernel)
        v.check(svm_close(rec.ber, ref), f"{kernel} snr=30: ber {fmt(rec)} vs {ref}")
    for s in SNRS:
        ml = point(0.97, s, "ml")
        for kernel in OVO_97_30:
            rec = point(0.97, s, "svm_ovo", kernel)
            ratio = rec.ber / ml.ber
            v.check(ratio <= SVM_TO_ML_MAX, f"{kernel} snr={s:g}: svm {fmt(rec)} / ml {fmt(ml)} = {ratio:.3f}")
        if s >= 15:
            for est in ("mmse", "kalman"):
                m1 = point(0.97, s, est)
                ratio = m1.ber / ml.ber
                v.check(ratio >= MODEL1_TO_ML_MIN, f"{est} snr={s:g}: {fmt(m1)} / ml = {ratio:.3f}")
    return v


@cache
def criterion_4() -> Verdict:
    v = Verdict("C4 SVM bit bank (rbf), alpha=0.99 (+-25% at 30 dB, ML <= Tech1 <= Tech2 within 2 SE)")
    bank = point(0.99, 30.0, "svm_bitbank", "rbf")
    v.check(svm_close(bank.ber, BITBANK_99_30), f"snr=30: bit bank {fmt(bank)} vs {BITBANK_99_30}")
    for s in (20.0, 25.0, 30.0):
        ml = point(0.99, s, "ml")
        ovo = point(0.99, s, "svm_ovo", "rbf")
        bank = point(0.99, s, "svm_bitbank", "rbf")
        slack1 = 2 * math.hypot(ml.std_error, ovo.std_error)
        slack2 = 2 * math.hypot(ovo.std_error, bank.std_error)
        v.check(ml.ber <= ovo.ber + slack1, f"snr={s:g}: ml {fmt(ml)} <= ovo {fmt(ovo)}")
        v.check(ovo.ber <= bank.ber + slack2, f"snr={s:g}: ovo {fmt(ovo)} <= bit bank {fmt(bank)}")
    return v


@cache
def criterion_5() -> Verdict:
    v = Verdict("C5 1-bit SVM one-vs-one poly vs 32-bit Model 1 MMSE, alpha=0.97 (|diff| <= 0.015 from 20 dB)")
    for s in (20.0, 25.0, 30.0):
        one = point(0.97, s, "svm_ovo", "poly2", 1)
        m1 = point(0.97, s, "mmse")
        gap = abs(one.ber - m1.ber)
        v.check(gap <= ONE_BIT_GAP, f"snr={s:g}: 1-bit {fmt(one)} vs mmse {fmt(m1)}, gap {gap:.4f}")
    one30 = point(0.97, 30.0, "svm_ovo", "poly2", 1)
    v.lines.append(f"  [..] reference at 30 dB: 1-bit {ONE_BIT_97_30}, Model 1 {MODEL1_97_30}; measured {one30.ber:.4f}")
    return v


@cache
def criterion_6() -> Verdict:
    v = Verdict("C6 oracle and property suite")
    for check in CHECKS:
        res = check()
        v.check(res.passed, f"{res.name}: {res.detail}")
    return v


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6)


def _run(criterion, capsys) -> None:
    verdict = criterion()
    with capsys.disabled():
        print("\n" + verdict.report(), flush=True)
    assert verdict.ok, verdict.report()


def test_criterion_1_ml_curve(capsys):
    _run(criterion_1, capsys)


def test_criterion_2_model1_curves(capsys):
    _run(criterion_2, capsys)


def test_criterion_3_svm_ovo(capsys):
    _run(criterion_3, capsys)


def test_criterion_4_svm_bit_bank(capsys):
    _run(criterion_4, capsys)


def test_criterion_5_one_bit(capsys):
    _run(criterion_5, capsys)


def test_criterion_6_oracles(capsys):
    _run(criterion_6, capsys)


if __name__ == "__main__":
    failed = 0
    for crit in CRITERIA:
        verdict = crit()
        print(verdict.report(), flush=True)
        failed += not verdict.ok
    sys.exit(1 if failed else 0)

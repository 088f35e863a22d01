"""BER result rows and their CSV form."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import astuple, dataclass, fields
from pathlib import Path

from ..svm.io import write_atomic

CSV_HEADER = (
    "alpha",
    "snr_db",
    "receiver",
    "technique",
    "kernel",
    "adc_bits",
    "frames",
    "info_bits",
    "bit_errors",
    "ber",
    "seed",
)


@dataclass(frozen=True)
class BerRecord:
    """One Monte-Carlo BER point.

    ``ber`` counts information-bit errors: ``bit_errors / info_bits`` with
    ``info_bits = 4 * frames``.
    """

    alpha: float
    snr_db: float
    receiver: str
    technique: str
    kernel: str
    adc_bits: int
    frames: int
    info_bits: int
    bit_errors: int
    ber: float
    seed: int

    @property
    def std_error(self) -> float:
        """Binomial standard error ``sqrt(p (1 - p) / info_bits)``."""
        p = self.ber
        return math.sqrt(p * (1.0 - p) / self.info_bits) if self.info_bits else float("nan")

    def row(self) -> list[str]:
        out = []
        for v in astuple(self):
            out.append(repr(v) if isinstance(v, float) else str(v))
        return out


assert tuple(f.name for f in fields(BerRecord)) == CSV_HEADER


def frames_for_precision(p: float, std_error: float) -> int:
    """Frames needed so the standard error at BER ``p`` is at most ``std_error``."""
    if not (0 < p < 1 and std_error > 0):
        raise ValueError("need 0 < p < 1 and a positive standard error")
    n = math.ceil(p * (1.0 - p) / (4.0 * std_error**2))
    # undo a round-up caused by floating-point noise in the quotient
    if n > 1 and math.sqrt(p * (1.0 - p) / (4.0 * (n - 1))) <= std_error:
        n -= 1
    return n


def records_to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow(r.row())
    return buf.getvalue()


def write_csv(records, path) -> None:
    """Write the records atomically."""
    path = Path(path)
    write_atomic(path, records_to_csv(records))


def read_csv(path) -> list[BerRecord]:
    casts = (float, float, str, str, str, int, int, int, int, float, int)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        return [BerRecord(*(c(v) for c, v in zip(casts, row))) for row in reader]

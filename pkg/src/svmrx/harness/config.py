"""Experiment configuration: a flat ``key = value`` file.

Lists are comma separated, ``#`` starts a comment. Example::

    alpha = 0.95, 0.97, 0.99
    snr_db = 5, 10, 15, 20, 25, 30
    receivers = ml, mmse, kalman
    frames_eval = 200000
    seed = 7
    output = results/ber.csv

Keys not listed in :class:`ExperimentConfig` are rejected.
"""

from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..channel import DOMAINS
from ..errors import InvalidConfig, IoError
from ..phy import CODE_LAYOUTS
from ..svm.features import ADC_BITS
from ..svm.kernels import KERNELS

RECEIVERS = ("ml", "mmse", "kalman", "svm_ovo", "svm_bitbank")
SVM_RECEIVERS = ("svm_ovo", "svm_bitbank")

_SECTION = "experiment"


@dataclass(frozen=True)
class ExperimentConfig:
    """All settings of a sweep.

    Attributes
    ----------
    alpha, snr_db : tuple of float
        Grid axes.
    frames_train, frames_eval : int
        Frames per SVM training set and per evaluated point.
    receivers : tuple of str
        Subset of :data:`RECEIVERS`.
    kernel : tuple of str
        Kernels for the SVM receivers; each one is a separate grid entry.
    c, tol : float
        SVM box constraint and KKT tolerance.
    adc_bits : int
        Feature quantization of the SVM receivers (1 or 32).
    seed : int
        Base seed, reduced to 64 bits.
    power, sigma_h2 : float
        Transmit power and fading power.
    output : str
        CSV path.
    fading : str
        ``"real"`` or ``"complex"`` Gaussian channel samples.
    code_layout : str
        Hamming bit layout, see :mod:`svmrx.phy`.
    rbf_scale_factor : float
        Multiplier on the auto-scaled RBF width.
    standardize : bool
        Z-score the SVM features before training.
    """

    alpha: tuple[float, ...] = (0.95, 0.97, 0.99)
    snr_db: tuple[float, ...] = (5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    frames_train: int = 100_000
    frames_eval: int = 200_000
    receivers: tuple[str, ...] = ("ml", "mmse", "kalman")
    kernel: tuple[str, ...] = ("poly2",)
    c: float = 1.0
    tol: float = 1e-3
    adc_bits: int = 32
    seed: int = 20240607
    power: float = 1.0
    sigma_h2: float = 1.0
    output: str = "ber.csv"
    fading: str = "real"
    code_layout: str = "parity_first"
    rbf_scale_factor: float = 0.25
    standardize: bool = False

    def __post_init__(self):
        for name in ("alpha", "snr_db", "receivers", "kernel"):
            value = getattr(self, name)
            if isinstance(value, (str, int, float)):
                value = (value,)
            object.__setattr__(self, name, tuple(value))
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        self.validate()

    def validate(self) -> None:
        """Raise :class:`InvalidConfig` describing the first bad field."""

        def bad(msg):
            raise InvalidConfig(msg)

        if not self.alpha:
            bad("alpha list is empty")
        if any(not (0.0 <= a <= 1.0) for a in self.alpha):
            bad(f"every alpha must lie in [0, 1], got {self.alpha}")
        if not self.snr_db or any(not math.isfinite(s) for s in self.snr_db):
            bad("snr_db must be a non-empty list of finite values")
        if not self.receivers:
            bad("receivers list is empty")
        unknown = [r for r in self.receivers if r not in RECEIVERS]
        if unknown:
            bad(f"unknown receivers {unknown}; choose from {RECEIVERS}")
        if len(set(self.receivers)) != len(self.receivers):
            bad("receivers list has duplicates")
        if not self.kernel or any(k not in KERNELS for k in self.kernel):
            bad(f"kernel entries must be in {KERNELS}, got {self.kernel}")
        if len(set(self.kernel)) != len(self.kernel):
            bad("kernel list has duplicates")
        if self.frames_eval < 1:
            bad("frames_eval must be at least 1")
        if self.frames_train < 16 and any(r in SVM_RECEIVERS for r in self.receivers):
            bad("frames_train must be at least 16 when an SVM receiver is selected")
        if not (self.c > 0 and math.isfinite(self.c)):
            bad("c must be positive")
        if not (self.tol > 0):
            bad("tol must be positive")
        if self.adc_bits not in ADC_BITS:
            bad(f"adc_bits must be one of {ADC_BITS}")
        if not (0 <= self.seed < 2**64):
            bad("seed must be a 64-bit unsigned integer")
        if not (self.power > 0 and self.sigma_h2 > 0):
            bad("power and sigma_h2 must be positive")
        if not self.output:
            bad("output path is empty")
        if self.fading not in DOMAINS:
            bad(f"fading must be one of {DOMAINS}")
        if self.code_layout not in CODE_LAYOUTS:
            bad(f"code_layout must be one of {CODE_LAYOUTS}")
        if not self.rbf_scale_factor > 0:
            bad("rbf_scale_factor must be positive")

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_text(self) -> str:
        """Render in the file format accepted by :func:`load_config`."""
        out = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ", ".join(repr(x) if isinstance(x, float) else str(x) for x in v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, float):
                v = repr(v)
            out.append(f"{f.name} = {v}")
        return "\n".join(out) + "\n"


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_LISTS = {"alpha": float, "snr_db": float, "receivers": str, "kernel": str}
_INTS = {"frames_train", "frames_eval", "adc_bits", "seed"}
_FLOATS = {"c", "tol", "power", "sigma_h2", "rbf_scale_factor"}
_BOOLS = {"standardize"}


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key in _LISTS:
        items = [p.strip() for p in raw.split(",") if p.strip()]
        return tuple(_LISTS[key](p) for p in items)
    if key in _INTS:
        return int(float(raw)) if "e" in raw.lower() else int(raw, 0)
    if key in _FLOATS:
        return float(raw)
    if key in _BOOLS:
        low = raw.lower()
        if low not in ("true", "false", "yes", "no", "1", "0"):
            raise ValueError(f"not a boolean: {raw!r}")
        return low in ("true", "yes", "1")
    return raw


def parse_config(text: str) -> ExperimentConfig:
    """Parse configuration text; unspecified keys keep their defaults."""
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"), inline_comment_prefixes=("#",))
    try:
        parser.read_string(f"[{_SECTION}]\n" + text)
    except configparser.Error as exc:
        raise InvalidConfig(f"cannot parse config: {exc}") from None
    values = {}
    for key, raw in parser.items(_SECTION):
        if key not in _FIELDS:
            raise InvalidConfig(f"unknown config key {key!r}")
        try:
            values[key] = _parse_value(key, raw)
        except ValueError as exc:
            raise InvalidConfig(f"bad value for {key}: {exc}") from None
    return ExperimentConfig(**values)


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IoError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)

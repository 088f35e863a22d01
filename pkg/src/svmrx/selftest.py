"""Independent oracle checks, runnable without pytest (``svmrx selftest``).

Each check compares a production routine against a separately written
reference computation and returns a :class:`CheckResult`.
"""

from __future__ import annotations

import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .channel import FadingParams, fading_process
from .conventional import build_hypothesis_tables, kalman_init, kalman_update, lmmse_estimate
from .harness.config import ExperimentConfig
from .harness.sweep import run_sweep
from .phy import CODE_LAYOUTS, hamming_code
from .svm.kernels import KernelSpec, kernel_matrix
from .svm.smo import solve_dual


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


# -- reference implementations -------------------------------------------


def project_box_hyperplane(v: np.ndarray, y: np.ndarray, c: float) -> np.ndarray:
    """Euclidean projection onto ``{0 <= a <= c, y.a = 0}`` with ``y`` in {-1, +1}.

    The projection is ``clip(v - lam * y, 0, c)`` where ``lam`` zeroes the
    piecewise-linear, non-increasing function ``g(lam) = y . clip(...)``.
    ``g`` is evaluated at all breakpoints and the root is interpolated.
    """
    bps = np.unique(np.concatenate([v * y, (v - c) * y]))
    g = np.clip(v[None, :] - bps[:, None] * y[None, :], 0.0, c) @ y
    if g[0] <= 0:
        lam = bps[0]
    elif g[-1] >= 0:
        lam = bps[-1]
    else:
        k = int(np.flatnonzero(g <= 0)[0])
        lam = bps[k - 1] + (bps[k] - bps[k - 1]) * g[k - 1] / (g[k - 1] - g[k])
    return np.clip(v - lam * y, 0.0, c)


def projected_gradient_dual(q: np.ndarray, y: np.ndarray, c: float, iters: int = 20000) -> float:
    """Minimum of ``0.5 a'Qa - sum(a)`` over the SVM dual feasible set (FISTA)."""
    step = 1.0 / np.linalg.eigvalsh(q)[-1]
    a = np.zeros(len(y))
    z, t = a.copy(), 1.0
    for _ in range(iters):
        a_next = project_box_hyperplane(z - step * (q @ z - 1.0), y, c)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        z = a_next + ((t - 1.0) / t_next) * (a_next - a)
        a, t = a_next, t_next
    return float(0.5 * a @ q @ a - a.sum())


def min_distance_decode(code, word_bits: np.ndarray) -> int:
    dist = np.sum(code.codewords != word_bits[None, :], axis=1)
    return int(np.argmin(dist))


# -- checks ----------------------------------------------------------------


def check_log_det_spread() -> CheckResult:
    worst = 0.0
    for layout in CODE_LAYOUTS:
        for alpha in (0.0, 0.5, 0.95, 0.99):
            for sigma_w2 in (1.0, 0.1, 1e-3):
                t = build_hypothesis_tables(FadingParams(alpha, sigma_w2), layout=layout)
                worst = max(worst, t.log_det_spread)
    return CheckResult("log-det spread over 16 hypotheses", worst <= 1e-8, f"max spread {worst:.2e} (limit 1e-8)")


def check_kalman_lmmse() -> CheckResult:
    rng = np.random.default_rng(11)
    worst = 0.0
    for alpha in (0.0, 0.5, 0.95, 0.99, 1.0):
        for sigma_w2 in (1.0, 0.01):
            params = FadingParams(alpha, sigma_w2)
            for _ in range(20):
                r = rng.standard_normal(2)
                _, est_k = kalman_update(kalman_init(params), r, params)
                est_m = lmmse_estimate(r, params)
                worst = max(worst, float(np.max(np.abs(est_k.h_hat - est_m.h_hat))))
    return CheckResult("Kalman frame-0 posterior equals L-MMSE", worst <= 1e-9, f"max |diff| {worst:.2e} (limit 1e-9)")


def check_smo_dual() -> CheckResult:
    rng = np.random.default_rng(5)
    worst = 0.0
    for trial in range(12):
        n = int(rng.integers(10, 51))
        d = int(rng.integers(2, 6))
        x = rng.standard_normal((n, d))
        y = np.where(x[:, 0] + 0.7 * rng.standard_normal(n) > 0, 1.0, -1.0)
        if abs(y.sum()) == n:
            y[0] = -y[0]
        k = KernelSpec("poly2") if trial % 2 else KernelSpec("rbf", float(rng.uniform(0.5, 2.0)))
        c = float(rng.choice([0.1, 1.0, 10.0]))
        sol = solve_dual(x, y, k, c, 1e-6)
        q = np.outer(y, y) * kernel_matrix(k, x, x)
        ref = projected_gradient_dual(q, y, c)
        worst = max(worst, abs(sol.objective - ref))
    return CheckResult("SMO dual objective vs projected-gradient QP", worst <= 1e-3, f"max |diff| {worst:.2e} (limit 1e-3)")


def check_fading_autocorrelation(n: int = 1_000_000) -> CheckResult:
    params = FadingParams(0.95, 0.0)
    h = fading_process(np.random.default_rng(3), params, n)
    worst = 0.0
    for k in range(0, 11):
        rho = float(np.mean(h[: n - k] * h[k:])) / params.sigma_h2
        worst = max(worst, abs(rho - 0.95**k))
    return CheckResult("fading autocorrelation vs alpha^k", worst <= 0.01, f"max |err| {worst:.4f} over lags 0..10 (limit 0.01)")


def check_hamming_single_errors() -> CheckResult:
    failures = 0
    cases = 0
    for layout in CODE_LAYOUTS:
        code = hamming_code(layout)
        for k in range(16):
            for pos in range(7):
                bits = code.codewords[k].copy()
                bits[pos] ^= 1
                cases += 1
                got = int(code.decode_bits(bits))
                if got != k or got != min_distance_decode(code, bits):
                    failures += 1
    return CheckResult("Hamming single-error correction", failures == 0, f"{cases - failures}/{cases} cases corrected")


def check_parallel_serial() -> CheckResult:
    with tempfile.TemporaryDirectory() as tmp:
        base = ExperimentConfig(
            alpha=(0.9, 0.99),
            snr_db=(10.0, 25.0),
            receivers=("ml", "mmse", "kalman", "svm_ovo"),
            kernel=("poly2",),
            frames_train=800,
            frames_eval=3000,
            seed=99,
        )
        serial = base.replace(output=str(Path(tmp) / "serial.csv"))
        parallel = base.replace(output=str(Path(tmp) / "parallel.csv"))
        run_sweep(serial, workers=1)
        run_sweep(parallel, workers=2)
        same = Path(serial.output).read_bytes() == Path(parallel.output).read_bytes()
    return CheckResult("parallel and serial sweeps give identical CSV", same, "byte-identical" if same else "files differ")


CHECKS: tuple[Callable[[], CheckResult], ...] = (
    check_log_det_spread,
    check_kalman_lmmse,
    check_smo_dual,
    check_fading_autocorrelation,
    check_hamming_single_errors,
    check_parallel_serial,
)


def run_all() -> list[CheckResult]:
    return [check() for check in CHECKS]

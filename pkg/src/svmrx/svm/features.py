"""Feature vectors for the SVM receivers."""

from __future__ import annotations

import numpy as np

ADC_BITS = (1, 32)


def quantize_1bit(values) -> np.ndarray:
    """Sign of each entry, with ``sign(0) = +1``."""
    values = np.asarray(values, dtype=np.float64)
    return np.where(values >= 0, 1.0, -1.0)


def extract_features(r_next, r_cur, z, adc_bits: int = 32) -> np.ndarray:
    """Real feature vector(s) from one frame window.

    The complex block ``v = [r_next, r_cur, z]`` (each in transmission order)
    becomes ``[Re(v), Im(v)]``, of length ``2 (2L + T)``. Inputs may be single
    frames or batches with one frame per row.

    Parameters
    ----------
    adc_bits : {1, 32}
        ``1`` keeps only the sign of every real and imaginary component.
    """
    if adc_bits not in ADC_BITS:
        raise ValueError(f"adc_bits must be one of {ADC_BITS}, got {adc_bits}")
    v = np.concatenate([np.asarray(r_next), np.asarray(r_cur), np.asarray(z)], axis=-1)
    feats = np.concatenate([np.real(v), np.imag(v)], axis=-1).astype(np.float64)
    return quantize_1bit(feats) if adc_bits == 1 else feats

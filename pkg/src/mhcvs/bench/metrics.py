import math

import numpy as np

from mhcvs.tensor import Frame


def to_8bit(luma) -> np.ndarray:
    return np.clip(np.rint(np.asarray(luma, dtype=np.float64)), 0, 255).astype(np.uint8)


def psnr(reference: Frame, test: Frame) -> float:
    """Luma PSNR in dB over clamped, rounded 8-bit pixels; ``inf`` for identical frames."""
    a = reference.luma if isinstance(reference, Frame) else np.asarray(reference)
    b = test.luma if isinstance(test, Frame) else np.asarray(test)
    if a.shape != b.shape:
        raise ValueError(f"frame shapes differ: {a.shape} vs {b.shape}")
    diff = to_8bit(a).astype(np.float64) - to_8bit(b).astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0 ** 2 / mse)


def format_psnr(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.6f}"

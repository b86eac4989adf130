"""Deterministic synthetic test sequences."""

from __future__ import annotations

import numpy as np

from mhcvs.tensor import Frame


def smooth_texture(height: int, width: int, seed: int = 0, n_waves: int = 12, max_freq: float = 0.12):
    """A callable (rows, cols) -> intensity built from random low-frequency sinusoids.

    Values stay inside [20, 235] for any real coordinates.
    """
    rng = np.random.default_rng(seed)
    freqs = rng.uniform(-max_freq, max_freq, size=(n_waves, 2))
    phases = rng.uniform(0, 2 * np.pi, size=n_waves)
    amps = rng.uniform(0.5, 1.0, size=n_waves)
    amps *= 107.5 / amps.sum()

    def sample(rows, cols):
        rows = np.asarray(rows, dtype=np.float64)
        cols = np.asarray(cols, dtype=np.float64)
        out = np.full(np.broadcast(rows, cols).shape, 127.5)
        for (fy, fx), ph, a in zip(freqs, phases, amps):
            out += a * np.cos(2 * np.pi * (fy * rows + fx * cols) + ph)
        return out

    return sample


def translating_sequence(
    frames: int = 9,
    height: int = 64,
    width: int = 64,
    velocity: tuple[float, float] = (0.75, 1.25),
    seed: int = 0,
) -> list[Frame]:
    """Texture moving by ``velocity`` (dy, dx) pixels per frame; sub-pixel motion allowed."""
    tex = smooth_texture(height, width, seed)
    rr, cc = np.mgrid[0:height, 0:width]
    vy, vx = velocity
    return [Frame(tex(rr - vy * t, cc - vx * t)) for t in range(frames)]


def static_sequence(frames: int = 9, height: int = 64, width: int = 64, seed: int = 0) -> list[Frame]:
    f = translating_sequence(1, height, width, (0.0, 0.0), seed)[0]
    return [f] * frames


def piecewise_constant_frame(height: int = 64, width: int = 64, seed: int = 0, regions: int = 6) -> Frame:
    """Axis-aligned rectangles of constant intensity on a flat background."""
    rng = np.random.default_rng(seed)
    luma = np.full((height, width), 100.0)
    for _ in range(regions):
        r0, c0 = rng.integers(0, height - 8), rng.integers(0, width - 8)
        r1, c1 = r0 + rng.integers(8, height // 2), c0 + rng.integers(8, width // 2)
        luma[r0:r1, c0:c1] = float(rng.integers(30, 220))
    return Frame(luma)


SEQUENCES = {
    "translate": translating_sequence,
    "static": static_sequence,
}

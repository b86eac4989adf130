"""Search-window hypotheses for non-reference blocks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from mhcvs.tensor import DctBasis, Frame, MeasurementMatrix

GOLDEN_DIR = Path(__file__).parent / "data"


@dataclass(frozen=True)
class DisplacementSet:
    """Ordered (dy, dx) offsets, row-major by (dy, dx)."""

    offsets: tuple[tuple[int, int], ...]

    @property
    def p(self) -> int:
        return len(self.offsets)

    @property
    def radius(self) -> int:
        return max(max(abs(dy), abs(dx)) for dy, dx in self.offsets)

    def to_text(self) -> str:
        return "".join(f"{dy} {dx}\n" for dy, dx in self.offsets)

    @classmethod
    def from_text(cls, text: str) -> "DisplacementSet":
        offsets = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected 'dy dx', got {line!r}")
            offsets.append((int(parts[0]), int(parts[1])))
        if len(set(offsets)) != len(offsets):
            raise ValueError("duplicate offsets")
        return cls(tuple(offsets))


@dataclass(frozen=True, eq=False)
class HypothesisSet:
    H: np.ndarray = field(repr=False)  # (n, p)
    A: np.ndarray = field(repr=False)  # (m, p) = Phi H
    B: np.ndarray = field(repr=False)  # (n, p) = DCT of each column of H
    gamma: np.ndarray = field(repr=False)  # (p,)
    y: np.ndarray = field(repr=False)  # (m,)

    @property
    def p(self) -> int:
        return self.H.shape[1]

    @classmethod
    def from_matrix(cls, H, phi: MeasurementMatrix, dct: DctBasis, y) -> "HypothesisSet":
        H = np.asarray(H, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if y.shape != (phi.m,):
            raise ValueError(f"measurement length {y.shape} != ({phi.m},)")
        if H.shape[0] != phi.n or H.shape[0] != dct.n:
            raise ValueError(f"hypothesis rows {H.shape[0]} != block length {phi.n}")
        A = phi.entries @ H
        return cls(H, A, dct.forward @ H, _residual_norms(y, A), y)


@lru_cache(maxsize=32)
def displacement_set(p: int, window_radius: int | None = None) -> DisplacementSet:
    """The ``p`` integer offsets nearest the origin.

    Candidates come from the smallest (2k+1)^2 grid holding ``p`` points. They
    are ranked by Euclidean distance, then |dy|, then |dx|; an offset and its
    mirror are always taken together, so only the last pick can be unpaired
    (which happens exactly when ``p`` is even). The result is listed row-major.
    """
    if p < 1:
        raise ValueError(f"p must be positive, got {p}")
    k = math.ceil((math.sqrt(p) - 1) / 2)
    if window_radius is not None:
        if p > (2 * window_radius + 1) ** 2:
            raise ValueError(f"p={p} needs a search radius of at least {k}, got {window_radius}")
    pairs = {}
    for dy in range(-k, k + 1):
        for dx in range(-k, k + 1):
            rep = min((dy, dx), (-dy, -dx))
            pairs.setdefault(rep, set()).add((dy, dx))
    ranked = sorted(pairs, key=lambda r: (r[0] ** 2 + r[1] ** 2, abs(r[0]), abs(r[1]), r))
    chosen: list[tuple[int, int]] = []
    for rep in ranked:
        room = p - len(chosen)
        if room <= 0:
            break
        members = sorted(pairs[rep])
        chosen.extend(members[:room])
    return DisplacementSet(tuple(sorted(chosen)))


def load_golden(p: int) -> DisplacementSet:
    return DisplacementSet.from_text((GOLDEN_DIR / f"displacements_p{p}.txt").read_text())


def _residual_norms(y, A):
    return np.sqrt(np.sum((y[:, None] - A) ** 2, axis=0))


def tikhonov_weights(y, phi: MeasurementMatrix, H) -> np.ndarray:
    """Diagonal of the Tikhonov matrix: ||y - Phi h_j||_2 for every column h_j."""
    y = np.asarray(y, dtype=np.float64)
    return _residual_norms(y, phi.entries @ np.asarray(H, dtype=np.float64))


def column_sources(p: int, n_refs: int) -> list[int]:
    """Reference index feeding each hypothesis column."""
    if n_refs == 1:
        return [0] * p
    if n_refs != 2:
        raise ValueError(f"expected 1 or 2 references, got {n_refs}")
    if p % 2:
        return [j % 2 for j in range(p)]
    return [0] * (p // 2) + [1] * (p // 2)


def hypothesis_matrix(
    block_origin: tuple[int, int],
    references: list[Frame],
    disp: DisplacementSet,
    L: int,
) -> np.ndarray:
    """Stack the displaced L x L windows as columns, clamping windows into the frame."""
    if not references:
        raise ValueError("at least one reference frame is required")
    r0, c0 = block_origin
    sources = column_sources(disp.p, len(references))
    H = np.empty((L * L, disp.p))
    order = sorted(range(disp.p), key=lambda j: (sources[j], j))
    for col, j in enumerate(order):
        luma = references[sources[j]].luma
        h, w = luma.shape
        dy, dx = disp.offsets[j]
        r = min(max(r0 + dy, 0), h - L)
        c = min(max(c0 + dx, 0), w - L)
        H[:, col] = luma[r:r + L, c:c + L].reshape(-1)
    return H


def build_hypotheses(
    block_origin: tuple[int, int],
    references: list[Frame],
    disp: DisplacementSet,
    phi: MeasurementMatrix,
    dct: DctBasis,
    y,
) -> HypothesisSet:
    H = hypothesis_matrix(block_origin, references, disp, dct.L)
    return HypothesisSet.from_matrix(H, phi, dct, y)

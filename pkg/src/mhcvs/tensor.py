"""Dense arithmetic shared by the codec: frames, block layout, the 2D DCT,
seeded Gaussian sensing matrices and SPD solves."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.fft
import scipy.linalg


class BoundsError(IndexError):
    pass


class FactorizationError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class Frame:
    """Grayscale luma plane. ``luma`` has shape (height, width), float64."""

    luma: np.ndarray

    def __post_init__(self):
        luma = np.array(self.luma, dtype=np.float64)
        if luma.ndim != 2 or luma.size == 0:
            raise ValueError(f"luma must be a non-empty 2D array, got shape {luma.shape}")
        luma.setflags(write=False)
        object.__setattr__(self, "luma", luma)

    @property
    def height(self) -> int:
        return self.luma.shape[0]

    @property
    def width(self) -> int:
        return self.luma.shape[1]

    def check_block_size(self, L: int) -> None:
        if self.width % L or self.height % L:
            raise ValueError(f"frame {self.width}x{self.height} not divisible by block size {L}")

    def block_origins(self, L: int) -> list[tuple[int, int]]:
        """Top-left corners of the non-overlapping L x L blocks in raster order."""
        self.check_block_size(L)
        return [(r, c) for r in range(0, self.height, L) for c in range(0, self.width, L)]


@dataclass(frozen=True)
class BlockVector:
    data: np.ndarray
    origin: tuple[int, int]

    @property
    def L(self) -> int:
        return int(round(np.sqrt(self.data.size)))


@dataclass(frozen=True)
class MeasurementMatrix:
    entries: np.ndarray = field(repr=False)
    seed: int

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.entries.shape[1]

    @property
    def rate(self) -> float:
        return self.m / self.n


@dataclass(frozen=True)
class DctBasis:
    """Orthonormal 2D DCT-II on row-wise vectorized L x L blocks.

    ``forward`` maps pixels to coefficients, ``inverse`` = ``forward.T`` maps back.
    """

    L: int
    forward: np.ndarray = field(repr=False)
    inverse: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.L * self.L


@lru_cache(maxsize=8)
def dct_basis(L: int) -> DctBasis:
    if L < 1:
        raise ValueError("block size must be positive")
    c = scipy.fft.dct(np.eye(L), type=2, norm="ortho", axis=0)
    # row-wise vectorization: vec(C X C^T) = (C kron C) vec(X)
    fwd = np.kron(c, c)
    inv = np.ascontiguousarray(fwd.T)
    fwd.setflags(write=False)
    inv.setflags(write=False)
    return DctBasis(L, fwd, inv)


def _check_window(shape, origin, L):
    r, c = origin
    h, w = shape
    if r < 0 or c < 0 or r + L > h or c + L > w:
        raise BoundsError(f"block at {origin} of size {L} exceeds frame {w}x{h}")


def vectorize_block(frame: Frame, origin: tuple[int, int], L: int) -> BlockVector:
    _check_window(frame.luma.shape, origin, L)
    r, c = origin
    return BlockVector(frame.luma[r:r + L, c:c + L].reshape(-1).copy(), (r, c))


def assemble_block(vec: BlockVector, frame: Frame) -> Frame:
    """Return a copy of ``frame`` with the block's window overwritten."""
    L = vec.L
    if L * L != vec.data.size:
        raise ValueError(f"block length {vec.data.size} is not a square")
    _check_window(frame.luma.shape, vec.origin, L)
    out = frame.luma.copy()
    r, c = vec.origin
    out[r:r + L, c:c + L] = np.reshape(vec.data, (L, L))
    return Frame(out)


def frame_to_blocks(luma: np.ndarray, L: int) -> np.ndarray:
    """All blocks of a (H, W) array as columns of an (L*L, nblocks) matrix, raster order."""
    h, w = luma.shape
    if h % L or w % L:
        raise ValueError(f"frame {w}x{h} not divisible by block size {L}")
    t = luma.reshape(h // L, L, w // L, L).transpose(0, 2, 1, 3)
    return t.reshape(-1, L * L).T.copy()


def blocks_to_frame(cols: np.ndarray, height: int, width: int, L: int) -> np.ndarray:
    """Inverse of :func:`frame_to_blocks`."""
    nb = (height // L) * (width // L)
    if cols.shape != (L * L, nb):
        raise ValueError(f"expected block matrix {(L * L, nb)}, got {cols.shape}")
    t = cols.T.reshape(height // L, width // L, L, L).transpose(0, 2, 1, 3)
    return t.reshape(height, width).copy()


def dct2_forward(vec, basis: DctBasis) -> np.ndarray:
    v = np.asarray(getattr(vec, "data", vec), dtype=np.float64)
    if v.shape[0] != basis.n:
        raise ValueError(f"vector length {v.shape[0]} != {basis.n}")
    return basis.forward @ v


def dct2_inverse(coef, basis: DctBasis) -> np.ndarray:
    v = np.asarray(coef, dtype=np.float64)
    if v.shape[0] != basis.n:
        raise ValueError(f"coefficient length {v.shape[0]} != {basis.n}")
    return basis.inverse @ v


def gaussian_matrix(seed: int, m: int, n: int) -> MeasurementMatrix:
    """m x n matrix of i.i.d. standard normals from a Philox counter-based generator.

    The stream is a pure function of (seed, m, n): the key is the seed and the
    first m*n normals of that stream are used, row-major. Entries are left at
    unit variance so ||Phi x||^2 ~ m ||x||^2; the default MH-ST weights
    (lambda2 = 1000, rho = 0.01) are tuned for that scale.
    """
    if n < 1 or m < 1:
        raise ValueError("matrix dimensions must be positive")
    if m > n:
        raise ValueError(f"m={m} > n={n}: sampling rate above 1")
    if not 0 <= seed < 2**64:
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    rng = np.random.Generator(np.random.Philox(key=seed))
    phi = rng.standard_normal((m, n))
    phi.setflags(write=False)
    return MeasurementMatrix(phi, seed)


def identity_matrix(n: int) -> MeasurementMatrix:
    """Rate-1 identity sensing operator for test mode."""
    phi = np.eye(n)
    phi.setflags(write=False)
    return MeasurementMatrix(phi, 0)


def cho_factor_spd(M: np.ndarray, jitter: float | None = None):
    """Cholesky factor of an SPD matrix.

    With ``jitter`` set, a failed factorization is retried once on ``M + eps * I``
    where ``eps = jitter * mean(|diag(M)|)``, so the shift is relative to the scale of M.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got {M.shape}")
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    if not np.allclose(M, M.T, rtol=0.0, atol=1e-10 * scale):
        raise ValueError("matrix is not symmetric")
    try:
        return scipy.linalg.cho_factor(M, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        if jitter is None:
            raise FactorizationError("matrix is not positive definite") from exc
    eps = jitter * max(float(np.mean(np.abs(np.diag(M)))), 1.0)
    try:
        return scipy.linalg.cho_factor(M + eps * np.eye(M.shape[0]), lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError("matrix is not positive definite") from exc


def cho_solve(factor, b: np.ndarray) -> np.ndarray:
    return scipy.linalg.cho_solve(factor, b, check_finite=False)


def solve_spd(M: np.ndarray, b: np.ndarray) -> np.ndarray:
    b = np.asarray(b, dtype=np.float64)
    return cho_solve(cho_factor_spd(M), b)

"""Group-of-pictures planning, block compressive sampling and the ``.cvs`` container.

Container layout (all integers little-endian)::

    magic          4s   b"MHCV"
    version        u8   1
    block_size     u16
    width, height  u32, u32
    group_size     u16
    frame_count    u32
    reference      u64 seed, f64 rate, u32 m
    non-reference  u64 seed, f64 rate, u32 m
    per frame:     u8 role (0 reference, 1 non-reference),
                   nblocks * m f64 measurements, block-major in raster order

A role that never occurs in the sequence is written with seed 0, rate 0, m 0.
The sensing matrices are not stored; the decoder regenerates them from the seeds.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field
from typing import BinaryIO

import numpy as np

from mhcvs.tensor import (
    BlockVector,
    Frame,
    MeasurementMatrix,
    frame_to_blocks,
    gaussian_matrix,
    identity_matrix,
)

MAGIC = b"MHCV"
VERSION = 1

_HEAD = struct.Struct("<4sBHIIHI")
_ROLE_ENTRY = struct.Struct("<QdI")


class FrameRole(enum.IntEnum):
    REFERENCE = 0
    NON_REFERENCE = 1


class ConfigError(ValueError):
    pass


class StreamError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class VersionError(StreamError):
    pass


@dataclass(frozen=True)
class GopLayout:
    group_size: int
    frame_roles: tuple[FrameRole, ...]

    @property
    def frame_count(self) -> int:
        return len(self.frame_roles)

    @property
    def reference_positions(self) -> list[int]:
        return [i for i, r in enumerate(self.frame_roles) if r is FrameRole.REFERENCE]

    def groups(self) -> list[range]:
        g = self.group_size
        return [range(s, s + g) for s in range(0, self.frame_count, g)]


def plan_gops(frame_count: int, group_size: int = 9) -> GopLayout:
    if group_size < 3:
        raise ConfigError(f"group_size must be at least 3, got {group_size}")
    if frame_count <= 0 or frame_count % group_size:
        raise ConfigError(f"frame_count {frame_count} is not a positive multiple of group_size {group_size}")
    roles = []
    for i in range(frame_count):
        k = i % group_size
        roles.append(FrameRole.REFERENCE if k in (0, group_size - 1) else FrameRole.NON_REFERENCE)
    return GopLayout(group_size, tuple(roles))


def measurement_count(rate: float, n: int) -> int:
    if not 0 < rate <= 1:
        raise ConfigError(f"sampling rate must lie in (0, 1], got {rate}")
    return max(1, int(round(rate * n)))


def sensing_seed(seed: int, m: int) -> int:
    """Per-rate matrix seed derived from the run seed and the row count."""
    return int(np.random.SeedSequence([seed, m]).generate_state(1, np.uint64)[0])


def sensing_matrix(seed: int, m: int, n: int) -> MeasurementMatrix:
    """Regenerate the matrix an EncodedFrame was sampled with (seed 0, m == n is identity)."""
    if seed == 0 and m == n:
        return identity_matrix(n)
    return gaussian_matrix(seed, m, n)


@dataclass(frozen=True, eq=False)
class EncodedFrame:
    role: FrameRole
    rate: float
    block_measurements: np.ndarray = field(repr=False)  # (nblocks, m)
    m: int
    n: int
    seed: int
    width: int
    height: int
    block_size: int

    @property
    def block_count(self) -> int:
        return self.block_measurements.shape[0]

    def __eq__(self, other):
        if not isinstance(other, EncodedFrame):
            return NotImplemented
        return (
            (self.role, self.rate, self.m, self.n, self.seed, self.width, self.height, self.block_size)
            == (other.role, other.rate, other.m, other.n, other.seed, other.width, other.height, other.block_size)
            and np.array_equal(self.block_measurements, other.block_measurements)
        )

    def phi(self) -> MeasurementMatrix:
        return sensing_matrix(self.seed, self.m, self.n)


def sample_block(x, phi: MeasurementMatrix) -> np.ndarray:
    v = np.asarray(x.data if isinstance(x, BlockVector) else x, dtype=np.float64)
    if v.shape[0] != phi.n:
        raise ValueError(f"block length {v.shape[0]} != sensing matrix width {phi.n}")
    return phi.entries @ v


def sample_frame(frame: Frame, phi: MeasurementMatrix, L: int) -> np.ndarray:
    """Measurements of every block of ``frame`` as an (nblocks, m) array."""
    return (phi.entries @ frame_to_blocks(frame.luma, L)).T.copy()


def encode_sequence(
    frames: list[Frame],
    layout: GopLayout,
    ref_rate: float,
    nonref_rate: float,
    L: int,
    seed: int,
    identity_test_mode: bool = False,
) -> list[EncodedFrame]:
    """Sample every block of every frame.

    ``identity_test_mode`` replaces any rate-1.0 matrix by the identity (seed 0).
    """
    if len(frames) != layout.frame_count:
        raise ConfigError(f"{len(frames)} frames but layout covers {layout.frame_count}")
    if not frames:
        return []
    h, w = frames[0].height, frames[0].width
    for f in frames:
        if (f.height, f.width) != (h, w):
            raise ConfigError("all frames must share one size")
        f.check_block_size(L)
    n = L * L

    matrices = {}
    for role, rate in ((FrameRole.REFERENCE, ref_rate), (FrameRole.NON_REFERENCE, nonref_rate)):
        m = measurement_count(rate, n)
        if identity_test_mode and m == n:
            matrices[role] = (rate, identity_matrix(n))
        else:
            matrices[role] = (rate, gaussian_matrix(sensing_seed(seed, m), m, n))

    out = []
    for f, role in zip(frames, layout.frame_roles):
        rate, phi = matrices[role]
        out.append(EncodedFrame(role, rate, sample_frame(f, phi, L), phi.m, n, phi.seed, w, h, L))
    return out


def serialize(encoded: list[EncodedFrame], sink: BinaryIO, group_size: int = 9) -> None:
    if not encoded:
        raise ConfigError("nothing to serialize")
    first = encoded[0]
    geom = (first.width, first.height, first.block_size, first.n)
    per_role: dict[FrameRole, tuple[int, float, int]] = {}
    for e in encoded:
        if (e.width, e.height, e.block_size, e.n) != geom:
            raise ConfigError("frames of one stream must share geometry")
        params = (e.seed, e.rate, e.m)
        if per_role.setdefault(e.role, params) != params:
            raise ConfigError(f"{e.role.name} frames use more than one sensing matrix")
        if e.block_measurements.shape != (e.block_count, e.m):
            raise ConfigError("measurement array has the wrong shape")
    sink.write(_HEAD.pack(MAGIC, VERSION, first.block_size, first.width, first.height, group_size, len(encoded)))
    for role in FrameRole:
        sink.write(_ROLE_ENTRY.pack(*per_role.get(role, (0, 0.0, 0))))
    for e in encoded:
        sink.write(struct.pack("<B", int(e.role)))
        sink.write(np.ascontiguousarray(e.block_measurements, dtype="<f8").tobytes())


@dataclass(frozen=True)
class StreamHeader:
    block_size: int
    width: int
    height: int
    group_size: int
    frame_count: int
    roles: dict


def deserialize_stream(source: BinaryIO | bytes) -> tuple[StreamHeader, list[EncodedFrame]]:
    buf = source if isinstance(source, (bytes, bytearray, memoryview)) else source.read()
    buf = memoryview(buf)
    pos = 0

    def take(nbytes, what):
        nonlocal pos
        if pos + nbytes > len(buf):
            raise StreamError(f"truncated stream while reading {what}", pos)
        chunk = buf[pos:pos + nbytes]
        pos += nbytes
        return chunk

    if len(buf) >= 5 and bytes(buf[:4]) == MAGIC and buf[4] != VERSION:
        raise VersionError(f"unsupported stream version {buf[4]}", 4)
    magic, version, L, width, height, group_size, count = _HEAD.unpack(take(_HEAD.size, "header"))
    if magic != MAGIC:
        raise StreamError(f"bad magic {magic!r}", 0)
    if L == 0 or width % L or height % L or width == 0 or height == 0:
        raise StreamError(f"invalid geometry {width}x{height} / block {L}", 5)
    n = L * L
    roles = {}
    for role in FrameRole:
        at = pos
        seed, rate, m = _ROLE_ENTRY.unpack(take(_ROLE_ENTRY.size, f"{role.name} parameters"))
        if m > n:
            raise StreamError(f"{role.name} measurement count {m} exceeds block length {n}", at)
        roles[role] = (seed, rate, m)
    nblocks = (width // L) * (height // L)

    frames = []
    for i in range(count):
        at = pos
        tag = take(1, f"role of frame {i}")[0]
        try:
            role = FrameRole(tag)
        except ValueError:
            raise StreamError(f"unknown role tag {tag} for frame {i}", at) from None
        seed, rate, m = roles[role]
        if m == 0:
            raise StreamError(f"frame {i} has role {role.name} with no sensing parameters", at)
        payload = take(8 * nblocks * m, f"measurements of frame {i}")
        y = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(nblocks, m)
        frames.append(EncodedFrame(role, rate, y, m, n, seed, width, height, L))
    if pos != len(buf):
        raise StreamError(f"{len(buf) - pos} trailing bytes", pos)
    header = StreamHeader(L, width, height, group_size, count, roles)
    return header, frames


def deserialize(source: BinaryIO | bytes) -> list[EncodedFrame]:
    return deserialize_stream(source)[1]

"""Luma-plane readers for PGM (P5), planar YUV 4:2:0 and Y4M input."""

from __future__ import annotations

import logging
import re
from pathlib import Path

import numpy as np

from mhcvs.tensor import Frame

log = logging.getLogger(__name__)

FORMATS = ("pgm-sequence", "yuv420-planar", "y4m")


class ParseError(ValueError):
    def __init__(self, message: str, path=None, offset: int | None = None):
        where = []
        if path is not None:
            where.append(str(path))
        if offset is not None:
            where.append(f"byte {offset}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.path = path
        self.offset = offset


def center_crop(luma: np.ndarray, L: int) -> np.ndarray:
    h, w = luma.shape
    nh, nw = h - h % L, w - w % L
    if nh == 0 or nw == 0:
        raise ValueError(f"frame {w}x{h} is smaller than one {L}x{L} block")
    top, left = (h - nh) // 2, (w - nw) // 2
    return luma[top:top + nh, left:left + nw]


def _pgm_token(buf: bytes, pos: int, path) -> tuple[bytes, int]:
    n = len(buf)
    while pos < n:
        ch = buf[pos:pos + 1]
        if ch == b"#":
            while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif ch.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos:pos + 1].isspace() and buf[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise ParseError("truncated PGM header", path, start)
    return buf[start:pos], pos


def parse_pgm(buf: bytes, path=None, pos: int = 0) -> tuple[np.ndarray, int]:
    """Decode one binary PGM image starting at ``pos``; returns (image, next offset)."""
    start = pos
    magic, pos = _pgm_token(buf, pos, path)
    if magic != b"P5":
        raise ParseError(f"expected P5 magic, got {magic[:8]!r}", path, start)
    fields = []
    for name in ("width", "height", "maxval"):
        at = pos
        tok, pos = _pgm_token(buf, pos, path)
        try:
            fields.append(int(tok))
        except ValueError:
            raise ParseError(f"bad PGM {name} {tok[:16]!r}", path, at) from None
    w, h, maxval = fields
    if w <= 0 or h <= 0 or not 0 < maxval < 65536:
        raise ParseError(f"bad PGM geometry {w}x{h} maxval {maxval}", path, start)
    pos += 1  # single whitespace byte before the raster
    dtype = np.dtype("u1") if maxval < 256 else np.dtype(">u2")
    size = w * h * dtype.itemsize
    if pos + size > len(buf):
        raise ParseError(f"truncated PGM raster: need {size} bytes, have {len(buf) - pos}", path, pos)
    img = np.frombuffer(buf, dtype=dtype, count=w * h, offset=pos).reshape(h, w).astype(np.float64)
    if maxval != 255:
        img = img * (255.0 / maxval)
    return img, pos + size


def read_pgm_sequence(path) -> list[np.ndarray]:
    """A directory of ``*.pgm`` files (sorted by name) or one file of concatenated P5 images."""
    path = Path(path)
    files = sorted(path.glob("*.pgm")) if path.is_dir() else [path]
    if not files:
        raise ParseError("no .pgm files found", path)
    planes = []
    for f in files:
        buf = f.read_bytes()
        pos = 0
        while True:
            img, pos = parse_pgm(buf, f, pos)
            planes.append(img)
            rest = buf[pos:].lstrip()
            if not rest:
                break
            pos = len(buf) - len(rest)
    return planes


def read_yuv420(path, width: int, height: int) -> list[np.ndarray]:
    path = Path(path)
    if width is None or height is None:
        raise ValueError("yuv420-planar input needs --width and --height")
    luma = width * height
    frame_bytes = luma + 2 * (((width + 1) // 2) * ((height + 1) // 2))
    buf = path.read_bytes()
    if len(buf) == 0 or len(buf) % frame_bytes:
        k = max(1, len(buf) // frame_bytes)
        raise ParseError(
            f"file size {len(buf)} is not a multiple of the {width}x{height} 4:2:0 frame size "
            f"{frame_bytes} (expected e.g. {k * frame_bytes} bytes for {k} frames)",
            path,
            len(buf) - len(buf) % frame_bytes,
        )
    return [
        np.frombuffer(buf, np.uint8, count=luma, offset=i * frame_bytes).reshape(height, width).astype(np.float64)
        for i in range(len(buf) // frame_bytes)
    ]


def _chroma_bytes(tag: str, w: int, h: int) -> int:
    if tag.startswith("420") or tag == "":
        return 2 * (((w + 1) // 2) * ((h + 1) // 2))
    if tag.startswith("422"):
        return 2 * (((w + 1) // 2) * h)
    if tag.startswith("444"):
        return 2 * w * h
    if tag.startswith("411"):
        return 2 * (((w + 3) // 4) * h)
    if tag == "mono":
        return 0
    raise ValueError(tag)


def read_y4m(path) -> list[np.ndarray]:
    path = Path(path)
    buf = path.read_bytes()
    eol = buf.find(b"\n")
    if eol < 0 or not buf.startswith(b"YUV4MPEG2"):
        raise ParseError("missing YUV4MPEG2 stream header", path, 0)
    params = buf[:eol].split()[1:]
    w = h = None
    colour = ""
    for p in params:
        key, val = chr(p[0]), p[1:].decode("ascii", "replace")
        if key == "W":
            w = int(val)
        elif key == "H":
            h = int(val)
        elif key == "C":
            colour = val
    if not w or not h:
        raise ParseError("Y4M header lacks W/H", path, 0)
    if re.search(r"p\d+$", colour) or colour == "mono16":
        raise ParseError(f"only 8-bit Y4M is supported, got C{colour}", path, 0)
    try:
        chroma = _chroma_bytes(colour, w, h)
    except ValueError:
        raise ParseError(f"unsupported Y4M colour space C{colour}", path, 0) from None
    frames = []
    pos = eol + 1
    while pos < len(buf):
        line_end = buf.find(b"\n", pos)
        if line_end < 0 or not buf.startswith(b"FRAME", pos):
            raise ParseError(f"expected FRAME header for frame {len(frames)}", path, pos)
        pos = line_end + 1
        if pos + w * h + chroma > len(buf):
            raise ParseError(f"truncated payload in frame {len(frames)}", path, pos)
        frames.append(np.frombuffer(buf, np.uint8, count=w * h, offset=pos).reshape(h, w).astype(np.float64))
        pos += w * h + chroma
    return frames


def ingest(path, fmt: str, L: int = 16, width: int | None = None, height: int | None = None,
           frames: int | None = None) -> list[Frame]:
    """Read the luma planes of a sequence, center-cropping to a multiple of ``L``."""
    if fmt == "pgm-sequence":
        planes = read_pgm_sequence(path)
    elif fmt == "yuv420-planar":
        planes = read_yuv420(path, width, height)
    elif fmt == "y4m":
        planes = read_y4m(path)
    else:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    if frames is not None:
        planes = planes[:frames]
    out = []
    for plane in planes:
        h, w = plane.shape
        if h % L or w % L:
            log.warning("cropping %dx%d frame to a multiple of %d", w, h, L)
            plane = center_crop(plane, L)
        out.append(Frame(plane))
    return out


def write_pgm(path, luma) -> None:
    from mhcvs.bench.metrics import to_8bit

    img = to_8bit(luma)
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (img.shape[1], img.shape[0]))
        fh.write(img.tobytes())

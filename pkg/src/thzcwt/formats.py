"""Binary volume files (TVOL) and slice image export (PGM P5, CSV).

TVOL layout, all little-endian::

    offset  size  field
    0       4     magic b"TVOL"
    4       2     format version (u16, currently 1)
    6       12    nx, ny, nz (u32 each)
    18      8     step_xy_m (f64)
    26      8     depth_bin_m (f64)
    34      1     provenance (0 raw, 1 Morlet, 2 Gaussian, 3 Mexican hat)
    35      ...   nx*ny*nz float32 values, z fastest
"""
from __future__ import annotations

import os
import re
import struct

import numpy as np

from .errors import FormatError
from .volume import Provenance, SliceImage, VolumeScan

MAGIC = b"TVOL"
VERSION = 1
_HEADER = struct.Struct("<4sHIIIddB")
HEADER_SIZE = _HEADER.size  # 35
_PGM_HEADER = re.compile(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s")


def tvol_bytes(v: VolumeScan) -> bytes:
    nx, ny, nz = v.data.shape
    header = _HEADER.pack(MAGIC, VERSION, nx, ny, nz, v.step_xy_m, v.depth_bin_m, int(v.provenance))
    return header + np.ascontiguousarray(v.data, dtype="<f4").tobytes()


def write_tvol(path, v: VolumeScan):
    with open(path, "wb") as fh:
        fh.write(tvol_bytes(v))


def parse_tvol(buf: bytes) -> VolumeScan:
    if len(buf) < HEADER_SIZE:
        raise FormatError(f"TVOL header truncated: {len(buf)} bytes")
    magic, version, nx, ny, nz, step, dz, prov = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"unsupported TVOL version {version}")
    if min(nx, ny, nz) < 1:
        raise FormatError(f"invalid dimensions {nx}x{ny}x{nz}")
    try:
        prov = Provenance(prov)
    except ValueError:
        raise FormatError(f"unknown provenance byte {prov}") from None
    expected = HEADER_SIZE + 4 * nx * ny * nz
    if len(buf) != expected:
        raise FormatError(f"TVOL payload size {len(buf)} != expected {expected}")
    if not (step > 0 and dz > 0):
        raise FormatError("grid spacings must be > 0")
    data = np.frombuffer(buf, dtype="<f4", offset=HEADER_SIZE).reshape(nx, ny, nz).astype(np.float64)
    return VolumeScan(data, step, dz, prov)


def read_tvol(path) -> VolumeScan:
    with open(path, "rb") as fh:
        return parse_tvol(fh.read())


def slice_to_u8(img: SliceImage) -> np.ndarray:
    """Linear map of the slice's [min, max] onto 0..255; a constant slice maps to 0."""
    px = img.pixels
    lo, hi = float(px.min()), float(px.max())
    if hi == lo:
        return np.zeros(px.shape, dtype=np.uint8)
    scaled = np.rint((px - lo) * (255.0 / (hi - lo)))
    return np.clip(scaled, 0, 255).astype(np.uint8)


def pgm_bytes(img: SliceImage) -> bytes:
    """Binary PGM; image rows are the x index, columns the y index."""
    u8 = slice_to_u8(img)
    rows, cols = u8.shape
    return f"P5\n{cols} {rows}\n255\n".encode("ascii") + u8.tobytes()


def write_pgm(path, img: SliceImage):
    with open(path, "wb") as fh:
        fh.write(pgm_bytes(img))


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        buf = fh.read()
    head = _PGM_HEADER.match(buf)
    if head is None:
        raise FormatError("not a binary PGM (P5) file")
    cols, rows, maxval = (int(g) for g in head.groups())
    if maxval != 255:
        raise FormatError("only 8-bit PGM is supported")
    data = buf[head.end():]
    if len(data) != rows * cols:
        raise FormatError("PGM payload size mismatch")
    return np.frombuffer(data, dtype=np.uint8).reshape(rows, cols)


def slice_csv_bytes(img: SliceImage) -> bytes:
    """One CSV row per x index, values with full float64 precision."""
    return "".join(",".join(repr(float(v)) for v in row) + "\n" for row in img.pixels).encode()


def write_slice_csv(path, img: SliceImage):
    with open(path, "wb") as fh:
        fh.write(slice_csv_bytes(img))


def read_slice_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)


def atomic_write(path, data: bytes):
    """Write via a temp file in the same directory, then rename."""
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)

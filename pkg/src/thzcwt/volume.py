"""3-D scan volumes: enhancement, normalisation, interface search and slicing."""
from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .cwt import CwtParams, ScalePolicy, WaveletKind, enhance_batch, match_scale
from .errors import DegenerateInputError, DomainError, SpecError


class Provenance(enum.IntEnum):
    """What produced a volume; the value is the TVOL provenance byte."""

    RAW = 0
    MORLET = 1
    GAUSSIAN = 2
    MEXICAN_HAT = 3

    @classmethod
    def enhanced(cls, kind: WaveletKind) -> "Provenance":
        return {
            WaveletKind.MORLET: cls.MORLET,
            WaveletKind.GAUSSIAN: cls.GAUSSIAN,
            WaveletKind.MEXICAN_HAT: cls.MEXICAN_HAT,
        }[kind]

    @property
    def tag(self) -> str:
        return {0: "Raw", 1: "Morlet", 2: "Gaussian", 3: "MexicanHat"}[int(self)]


@dataclass(frozen=True)
class VolumeScan:
    """Scan data of shape ``(nx, ny, nz)``, stored z-fastest (C order)."""

    data: np.ndarray
    step_xy_m: float
    depth_bin_m: float
    provenance: Provenance = Provenance.RAW
    normalized: bool = False

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=float)
        object.__setattr__(self, "data", data)
        if data.ndim != 3 or min(data.shape) < 1:
            raise SpecError(f"volume data must be 3-D with every dimension >= 1, got {data.shape}")
        if not self.step_xy_m > 0:
            raise SpecError("step_xy_m must be > 0")
        if not self.depth_bin_m > 0:
            raise SpecError("depth_bin_m must be > 0")
        object.__setattr__(self, "provenance", Provenance(self.provenance))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    def columns(self) -> np.ndarray:
        nx, ny, nz = self.data.shape
        return self.data.reshape(nx * ny, nz)


@dataclass(frozen=True)
class SliceImage:
    pixels: np.ndarray  # (nx, ny)
    z_index: int
    step_xy_m: float


def _chunks(n: int, parts: int) -> list[slice]:
    parts = max(1, min(parts, n))
    edges = np.linspace(0, n, parts + 1).astype(int)
    return [slice(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def enhance_volume(raw: VolumeScan, kind: WaveletKind, params: CwtParams | None = None,
                   policy: ScalePolicy | None = None, workers: int = 1,
                   backend: str | None = None) -> VolumeScan:
    """Replace every A-scan column by its wavelet-enhanced profile.

    A fixed policy without an explicit scale matches the scale once, on the
    mean A-scan of the whole volume, so every column sees the same kernel.
    Columns are independent, so the result does not depend on ``workers``.
    """
    if raw.provenance is not Provenance.RAW:
        raise DomainError(f"enhance_volume expects a raw volume, got {raw.provenance.tag}")
    params = params or CwtParams()
    policy = policy or ScalePolicy()
    cols = raw.columns()
    out_prov = Provenance.enhanced(kind)
    if not np.any(cols):
        return VolumeScan(np.zeros_like(raw.data), raw.step_xy_m, raw.depth_bin_m, out_prov)
    if policy.mode == "fixed" and policy.scale is None:
        policy = ScalePolicy("fixed", match_scale(cols.mean(axis=0), kind))
    parts = _chunks(cols.shape[0], workers)
    if len(parts) == 1:
        enhanced = enhance_batch(cols, kind, params, policy, backend)
    else:
        with ThreadPoolExecutor(max_workers=len(parts)) as pool:
            pieces = list(pool.map(lambda s: enhance_batch(cols[s], kind, params, policy, backend), parts))
        enhanced = np.concatenate(pieces, axis=0)
    return VolumeScan(enhanced.reshape(raw.data.shape), raw.step_xy_m, raw.depth_bin_m, out_prov)


def normalize_volume(v: VolumeScan) -> VolumeScan:
    """Divide by the global maximum absolute value."""
    peak = float(np.max(np.abs(v.data)))
    if peak == 0.0:
        raise DegenerateInputError("cannot normalise an all-zero volume")
    return replace(v, data=v.data / peak, normalized=True)


def locate_interface_b(v: VolumeScan, search_window: tuple[int, int]) -> int:
    """Depth bin in ``[z_lo, z_hi)`` whose XY slice has the largest variance.

    Ties resolve to the shallowest bin, so a flat sample returns ``z_lo``.
    """
    z_lo, z_hi = (int(z) for z in search_window)
    nz = v.data.shape[2]
    if not 0 <= z_lo < z_hi <= nz:
        raise DomainError(f"search window [{z_lo}, {z_hi}) is empty or outside [0, {nz})")
    var = v.data[:, :, z_lo:z_hi].reshape(-1, z_hi - z_lo).var(axis=0)
    return z_lo + int(np.argmax(var))


def extract_slice(v: VolumeScan, z: int) -> SliceImage:
    nz = v.data.shape[2]
    if int(z) != z or not 0 <= z < nz:
        raise DomainError(f"z index {z} outside [0, {nz})")
    return SliceImage(v.data[:, :, int(z)].copy(), int(z), v.step_xy_m)

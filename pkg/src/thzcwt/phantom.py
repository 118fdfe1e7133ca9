"""Layered heat-shield sample with circular air holes, and its raster scan.

Reflectors per pixel, top to bottom: the top face of every layer (the top of
layer 0 is interface 'a', the top of the defect layer is interface 'b') and
the reflecting platform under the last layer (interface 'c'). Over a hole
only the 'b' reflectivity changes.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import SpecError
from .fmcw import Reflector, SweepConfig, beat_signals, default_fft_size, depth_profiles, path_bin_m
from .volume import Provenance, VolumeScan

NOMINAL_HOLE_DIAMETERS_M = (3e-3, 5e-3, 7e-3, 9e-3, 11e-3, 13e-3)
ROUNDED_PI = 3.14

# two rows of three holes in a 40 x 60 mm field; centres sit 0.25 mm off the
# 1 mm pixel lattice
DEFAULT_HOLE_CENTERS_M = (
    (28.25e-3, 48.25e-3),
    (11.25e-3, 48.25e-3),
    (28.25e-3, 30.25e-3),
    (11.25e-3, 30.25e-3),
    (28.25e-3, 12.25e-3),
    (11.25e-3, 12.25e-3),
)

# (thickness, reflectivity of the layer's top face): composite, resin, pad
DEFAULT_LAYERS = ((3e-3, 0.3), (0.2e-3, 0.2), (2e-3, 0.15))


@dataclass(frozen=True)
class PhantomSpec:
    layer_stack: tuple[tuple[float, float], ...] = DEFAULT_LAYERS
    hole_diameters_m: tuple[float, ...] = NOMINAL_HOLE_DIAMETERS_M
    hole_centers_xy_m: tuple[tuple[float, float], ...] = DEFAULT_HOLE_CENTERS_M
    defect_layer_index: int = 1
    scan_step_m: float = 1e-3
    grid_nx: int = 40
    grid_ny: int = 60
    platform_reflectivity: float = 0.9
    hole_reflectivity: float = 0.6
    standoff_m: float = 15e-3
    clutter_count: int = 3
    clutter_max_reflectivity: float = 0.05
    spot_waist_m: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "layer_stack", tuple((float(t), float(r)) for t, r in self.layer_stack))
        object.__setattr__(self, "hole_diameters_m", tuple(float(d) for d in self.hole_diameters_m))
        object.__setattr__(self, "hole_centers_xy_m", tuple((float(x), float(y)) for x, y in self.hole_centers_xy_m))
        self.validate()

    def validate(self):
        if not self.layer_stack:
            raise SpecError("layer_stack must contain at least one layer")
        for i, (t, r) in enumerate(self.layer_stack):
            if not t > 0:
                raise SpecError(f"layer {i} thickness must be > 0")
            if r < 0:
                raise SpecError(f"layer {i} reflectivity must be >= 0")
        if not 0 <= self.defect_layer_index < len(self.layer_stack):
            raise SpecError("defect_layer_index must name a layer in layer_stack")
        if self.defect_layer_index == 0:
            raise SpecError("defect_layer_index must be below the top layer (interface 'b' != 'a')")
        if len(self.hole_diameters_m) != len(self.hole_centers_xy_m):
            raise SpecError("hole_diameters_m and hole_centers_xy_m must have equal length")
        if any(not d > 0 for d in self.hole_diameters_m):
            raise SpecError("all hole diameters must be > 0")
        if not self.scan_step_m > 0:
            raise SpecError("scan_step_m must be > 0")
        if self.grid_nx < 1 or self.grid_ny < 1:
            raise SpecError("grid_nx and grid_ny must be >= 1")
        x_max = (self.grid_nx - 1) * self.scan_step_m
        y_max = (self.grid_ny - 1) * self.scan_step_m
        for i, (d, (cx, cy)) in enumerate(zip(self.hole_diameters_m, self.hole_centers_xy_m)):
            r = d / 2
            if cx - r < 0 or cy - r < 0 or cx + r > x_max or cy + r > y_max:
                raise SpecError(f"hole {i} (d={d * 1e3:g} mm) does not lie fully inside the scanned grid")
        n = len(self.hole_diameters_m)
        for i in range(n):
            for j in range(i + 1, n):
                (xi, yi), (xj, yj) = self.hole_centers_xy_m[i], self.hole_centers_xy_m[j]
                if math.hypot(xi - xj, yi - yj) <= (self.hole_diameters_m[i] + self.hole_diameters_m[j]) / 2:
                    raise SpecError(f"holes {i} and {j} overlap")
        if self.platform_reflectivity < 0 or self.hole_reflectivity < 0:
            raise SpecError("reflectivities must be >= 0")
        if self.standoff_m < 0:
            raise SpecError("standoff_m must be >= 0")
        if self.clutter_count < 0 or self.clutter_max_reflectivity < 0:
            raise SpecError("clutter_count and clutter_max_reflectivity must be >= 0")
        if self.spot_waist_m < 0:
            raise SpecError("spot_waist_m must be >= 0")


@dataclass(frozen=True)
class GroundTruth:
    per_defect_area_m2: tuple[float, ...]
    defect_mask: np.ndarray
    interface_b_depth_m: float
    interface_depths_m: dict = field(default_factory=dict)
    hole_diameters_m: tuple[float, ...] = ()

    @property
    def rounded_pi_area_m2(self) -> tuple[float, ...]:
        """Areas evaluated with pi rounded to 3.14."""
        return tuple(ROUNDED_PI * (d / 2) ** 2 for d in self.hole_diameters_m)

    def actual_areas_mm2(self, rounded_pi: bool = False) -> list[float]:
        areas = self.rounded_pi_area_m2 if rounded_pi else self.per_defect_area_m2
        return sorted(a * 1e6 for a in areas)

    def z_index(self, interface: str, depth_bin_m: float) -> int:
        return int(round(self.interface_depths_m[interface] / depth_bin_m))

    def search_window(self, depth_bin_m: float) -> tuple[int, int]:
        """Bins from midway a-b to midway b-c: brackets 'b', excludes 'a' and 'c'."""
        za, zb, zc = (self.interface_depths_m[k] / depth_bin_m for k in "abc")
        return int(math.ceil((za + zb) / 2)), int(math.floor((zb + zc) / 2)) + 1


@dataclass(frozen=True)
class Phantom:
    spec: PhantomSpec
    path_differences: np.ndarray  # (nx, ny, k), two-way
    reflectivities: np.ndarray    # (nx, ny, k)
    interface_names: tuple[str, ...]

    def reflectors_at(self, ix: int, iy: int) -> list[Reflector]:
        return [Reflector(float(p), float(r))
                for p, r in zip(self.path_differences[ix, iy], self.reflectivities[ix, iy])]


def hole_mask(spec: PhantomSpec) -> np.ndarray:
    """Integer mask: 0 outside holes, i+1 where a pixel centre lies in hole i."""
    x = np.arange(spec.grid_nx) * spec.scan_step_m
    y = np.arange(spec.grid_ny) * spec.scan_step_m
    xx, yy = np.meshgrid(x, y, indexing="ij")
    mask = np.zeros((spec.grid_nx, spec.grid_ny), dtype=int)
    for i, (d, (cx, cy)) in enumerate(zip(spec.hole_diameters_m, spec.hole_centers_xy_m)):
        mask[(xx - cx) ** 2 + (yy - cy) ** 2 <= (d / 2) ** 2] = i + 1
    return mask


def build_phantom(spec: PhantomSpec) -> tuple[Phantom, GroundTruth]:
    spec.validate()
    labels = hole_mask(spec)
    inside = labels > 0

    depths = [spec.standoff_m]
    for thickness, _ in spec.layer_stack:
        depths.append(depths[-1] + thickness)
    # top faces of each layer, then the platform under the stack
    refl = [r for _, r in spec.layer_stack] + [spec.platform_reflectivity]
    names = ["a"] + [f"layer{i}" for i in range(1, len(spec.layer_stack))] + ["c"]
    b = spec.defect_layer_index
    names[b] = "b"

    shape = (spec.grid_nx, spec.grid_ny)
    k = len(depths)
    paths = np.broadcast_to(2.0 * np.asarray(depths), shape + (k,)).copy()
    reflect = np.broadcast_to(np.asarray(refl), shape + (k,)).copy()
    b_map = np.where(inside, spec.hole_reflectivity, refl[b])
    if spec.spot_waist_m > 0:
        sigma_px = (spec.spot_waist_m / 2) / spec.scan_step_m
        b_map = gaussian_filter(b_map, sigma_px, mode="nearest")
    reflect[..., b] = b_map

    truth = GroundTruth(
        per_defect_area_m2=tuple(math.pi * (d / 2) ** 2 for d in spec.hole_diameters_m),
        defect_mask=inside,
        interface_b_depth_m=depths[b],
        interface_depths_m={"a": depths[0], "b": depths[b], "c": depths[-1]},
        hole_diameters_m=spec.hole_diameters_m,
    )
    return Phantom(spec, paths, reflect, tuple(names)), truth


def _scan_rows(phantom: Phantom, sweep: SweepConfig, noise_sigma: float, rng_seed: int,
               n_depth_bins: int, fft_size: int, rows: slice) -> np.ndarray:
    spec = phantom.spec
    paths = phantom.path_differences[rows]
    refl = phantom.reflectivities[rows]
    nrows, ny, _ = paths.shape
    n_clutter = spec.clutter_count
    signals = np.empty((nrows, ny, sweep.n_time_samples))
    if n_clutter == 0 and noise_sigma == 0:
        signals[:] = beat_signals(sweep, paths, refl)
        return depth_profiles(signals, n_depth_bins, fft_size)

    za = float(phantom.path_differences[0, 0, 0])
    zb = float(phantom.path_differences[0, 0, spec.defect_layer_index])
    x0 = rows.start or 0
    for i in range(nrows):
        for j in range(ny):
            # one stream per pixel, so results do not depend on scan order
            rng = np.random.default_rng([rng_seed, x0 + i, j])
            p, r = paths[i, j], refl[i, j]
            if n_clutter:
                p = np.concatenate([p, rng.uniform(za, zb, n_clutter)])
                r = np.concatenate([r, rng.uniform(0.0, spec.clutter_max_reflectivity, n_clutter)])
            sig = beat_signals(sweep, p, r)
            if noise_sigma > 0:
                sig = sig + noise_sigma * rng.standard_normal(sig.shape)
            signals[i, j] = sig
    return depth_profiles(signals, n_depth_bins, fft_size)


def scan_phantom(phantom: Phantom, sweep: SweepConfig, noise_sigma: float = 0.0, rng_seed: int = 0,
                 n_depth_bins: int = 512, fft_size: int | None = None, workers: int = 1) -> VolumeScan:
    """Raster-scan the phantom point by point into a raw volume.

    Clutter reflectors (between interfaces 'a' and 'b') and beat-signal noise
    are drawn from a generator seeded by ``(rng_seed, ix, iy)``.
    """
    if noise_sigma < 0:
        raise SpecError("noise_sigma must be >= 0")
    if rng_seed < 0:
        raise SpecError("rng_seed must be >= 0")
    if fft_size is None:
        fft_size = default_fft_size(sweep, n_depth_bins)
    nx = phantom.spec.grid_nx
    edges = np.linspace(0, nx, max(1, min(workers, nx)) + 1).astype(int)
    parts = [slice(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    scan = lambda rows: _scan_rows(phantom, sweep, noise_sigma, rng_seed, n_depth_bins, fft_size, rows)  # noqa: E731
    if len(parts) == 1:
        data = scan(parts[0])
    else:
        with ThreadPoolExecutor(max_workers=len(parts)) as pool:
            data = np.concatenate(list(pool.map(scan, parts)), axis=0)
    return VolumeScan(data, phantom.spec.scan_step_m, path_bin_m(sweep, fft_size) / 2.0, Provenance.RAW)


def ground_truth_dict(truth: GroundTruth, depth_bin_m: float | None = None) -> dict:
    out = {
        "n_defects": len(truth.per_defect_area_m2),
        "hole_diameters_mm": [d * 1e3 for d in truth.hole_diameters_m],
        "actual_areas_mm2": [a * 1e6 for a in truth.per_defect_area_m2],
        "actual_areas_rounded_pi_mm2": [a * 1e6 for a in truth.rounded_pi_area_m2],
        "interface_depths_m": dict(truth.interface_depths_m),
        "interface_b_depth_m": truth.interface_b_depth_m,
        "defect_mask": truth.defect_mask.astype(int).tolist(),
    }
    if depth_bin_m is not None:
        out["depth_bin_m"] = depth_bin_m
        out["interface_z_index"] = {k: truth.z_index(k, depth_bin_m) for k in "abc"}
        out["search_window"] = list(truth.search_window(depth_bin_m))
    return out


def write_ground_truth(path, truth: GroundTruth, depth_bin_m: float | None = None):
    with open(path, "w") as fh:
        json.dump(ground_truth_dict(truth, depth_bin_m), fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_ground_truth(path) -> dict:
    with open(path) as fh:
        return json.load(fh)

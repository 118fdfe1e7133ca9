"""Plain-text ``key = value`` configuration files.

Lines are ``key = value``; ``#`` starts a comment. Lists are comma separated,
pairs are written ``a:b``. Lengths are in millimetres in the file and meters
in the objects built from it. See README.md for the full key list.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .cwt import Boundary, CwtParams, ScalePolicy, WaveletKind, default_scales
from .errors import FormatError, SpecError
from .fmcw import SPEED_OF_LIGHT, SweepConfig
from .phantom import PhantomSpec
from .segmentation import ThresholdPolicy

PHANTOM_KEYS = {
    "layers_mm", "hole_diameters_mm", "hole_centers_mm", "defect_layer_index", "scan_step_mm",
    "grid_nx", "grid_ny", "platform_reflectivity", "hole_reflectivity", "standoff_mm",
    "clutter_count", "clutter_max_reflectivity", "spot_waist_mm",
}
SWEEP_KEYS = {
    "sweep_period_us", "freq_span_ghz", "band_start_ghz", "band_end_ghz", "n_time_samples",
    "propagation_speed_mps", "n_depth_bins",
}
RUN_KEYS = {"seed", "noise_sigma", "workers"}
PROCESS_KEYS = {
    "spec", "input", "truth", "out", "wavelet", "scales", "scale_policy", "fixed_scale", "boundary",
    "z_index", "z_window", "threshold", "polarity", "min_size", "format", "pixel_area_mm2",
}
METHOD_NAMES = ("raw", "morlet", "gaussian", "mexican-hat")


def parse_kv(text: str, source: str = "<config>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise FormatError(f"{source}:{lineno}: empty key")
        if key in out:
            raise FormatError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def read_kv(path) -> dict[str, str]:
    with open(path) as fh:
        return parse_kv(fh.read(), str(path))


def _floats(value: str) -> list[float]:
    return [float(v) for v in value.split(",") if v.strip()]


def _pairs(value: str) -> list[tuple[float, float]]:
    out = []
    for item in value.split(","):
        item = item.strip()
        if not item:
            continue
        a, sep, b = item.partition(":")
        if not sep:
            raise SpecError(f"expected 'a:b' pair, got {item!r}")
        out.append((float(a), float(b)))
    return out


def _number(kv, key, cast=float):
    try:
        return cast(kv[key])
    except ValueError:
        raise SpecError(f"{key}: cannot parse {kv[key]!r} as {cast.__name__}") from None


def check_keys(kv: dict, allowed: set[str]):
    unknown = sorted(set(kv) - allowed)
    if unknown:
        raise SpecError(f"unknown config keys: {', '.join(unknown)}")


def phantom_spec_from_kv(kv: dict[str, str]) -> PhantomSpec:
    kw = {}
    mm = 1e-3
    try:
        if "layers_mm" in kv:
            kw["layer_stack"] = tuple((t * mm, r) for t, r in _pairs(kv["layers_mm"]))
        if "hole_diameters_mm" in kv:
            kw["hole_diameters_m"] = tuple(d * mm for d in _floats(kv["hole_diameters_mm"]))
        if "hole_centers_mm" in kv:
            kw["hole_centers_xy_m"] = tuple((x * mm, y * mm) for x, y in _pairs(kv["hole_centers_mm"]))
    except ValueError as exc:
        raise SpecError(f"malformed list value: {exc}") from None
    if "hole_diameters_mm" in kv and "hole_centers_mm" not in kv:
        raise SpecError("hole_centers_mm is required when hole_diameters_mm is given")
    for key, name in (("scan_step_mm", "scan_step_m"), ("standoff_mm", "standoff_m"),
                      ("spot_waist_mm", "spot_waist_m")):
        if key in kv:
            kw[name] = _number(kv, key) * mm
    for key in ("platform_reflectivity", "hole_reflectivity", "clutter_max_reflectivity"):
        if key in kv:
            kw[key] = _number(kv, key)
    for key in ("defect_layer_index", "grid_nx", "grid_ny", "clutter_count"):
        if key in kv:
            kw[key] = _number(kv, key, int)
    return PhantomSpec(**kw)


def sweep_from_kv(kv: dict[str, str]) -> SweepConfig:
    period = _number(kv, "sweep_period_us") * 1e-6 if "sweep_period_us" in kv else 240e-6
    start = _number(kv, "band_start_ghz") * 1e9 if "band_start_ghz" in kv else 0.23e12
    end = _number(kv, "band_end_ghz") * 1e9 if "band_end_ghz" in kv else 0.32e12
    span = _number(kv, "freq_span_ghz") * 1e9 if "freq_span_ghz" in kv else end - start
    n = _number(kv, "n_time_samples", int) if "n_time_samples" in kv else 128
    c = _number(kv, "propagation_speed_mps") if "propagation_speed_mps" in kv else SPEED_OF_LIGHT
    return SweepConfig(period, span, start, end, n, c)


def parse_methods(text: str) -> tuple[str, ...]:
    names = []
    for item in str(text).split(","):
        item = item.strip().lower().replace("_", "-")
        if not item:
            continue
        if item == "all":
            names.extend(METHOD_NAMES)
        elif item == "mexhat":
            names.append("mexican-hat")
        elif item in METHOD_NAMES:
            names.append(item)
        else:
            raise SpecError(f"unknown wavelet/method {item!r}")
    if not names:
        raise SpecError("no methods requested")
    return tuple(dict.fromkeys(names))


def parse_scales(text: str) -> tuple[float, ...]:
    """``"1,2,4"`` or ``"geom:min:max:count"`` (scale values, not widths)."""
    text = str(text).strip()
    if text.startswith("geom:"):
        try:
            lo, hi, n = text[5:].split(":")
            lo, hi, n = float(lo), float(hi), int(n)
        except ValueError:
            raise SpecError(f"bad scale grid {text!r}; expected geom:min:max:count") from None
        if n < 1 or not 0 < lo <= hi:
            raise SpecError(f"bad scale grid {text!r}")
        if n == 1:
            return (lo,)
        ratio = (hi / lo) ** (1.0 / (n - 1))
        return tuple(lo * ratio ** i for i in range(n))
    try:
        return tuple(_floats(text))
    except ValueError:
        raise SpecError(f"bad scale list {text!r}") from None


def parse_window(text: str) -> tuple[int, int]:
    lo, sep, hi = str(text).partition(":")
    if not sep:
        raise SpecError(f"z window must be 'lo:hi', got {text!r}")
    try:
        return int(lo), int(hi)
    except ValueError:
        raise SpecError(f"z window must be integers, got {text!r}") from None


@dataclass
class PipelineConfig:
    spec_path: str | None = None
    input_path: str | None = None
    truth_path: str | None = None
    out_dir: str = "."
    methods: tuple[str, ...] = METHOD_NAMES
    cwt: CwtParams = field(default_factory=CwtParams)
    policy: ScalePolicy = field(default_factory=ScalePolicy)
    z_index: int | None = None
    z_window: tuple[int, int] | None = None
    threshold: ThresholdPolicy = field(default_factory=ThresholdPolicy)
    seed: int = 0
    noise_sigma: float = 0.0
    formats: tuple[str, ...] = ("pgm", "csv")
    workers: int = 1
    pixel_area_mm2: float | None = None

    def validate(self):
        if (self.spec_path is None) == (self.input_path is None):
            raise SpecError("exactly one of a phantom spec or a volume input must be given")
        if self.noise_sigma < 0 or not math.isfinite(self.noise_sigma):
            raise SpecError("noise_sigma must be finite and >= 0")
        if self.seed < 0:
            raise SpecError("seed must be >= 0")
        if self.workers < 1:
            raise SpecError("workers must be >= 1")
        bad = [f for f in self.formats if f not in ("pgm", "csv")]
        if bad:
            raise SpecError(f"unknown slice format(s): {', '.join(bad)}")


def pipeline_config(kv: dict[str, str]) -> PipelineConfig:
    """Build a PipelineConfig from already-merged settings (config file + flags)."""
    cfg = PipelineConfig()
    cfg.spec_path = kv.get("spec") or None
    cfg.input_path = kv.get("input") or None
    cfg.truth_path = kv.get("truth") or None
    cfg.out_dir = kv.get("out", ".")
    if "wavelet" in kv:
        cfg.methods = parse_methods(kv["wavelet"])
    scales = parse_scales(kv["scales"]) if "scales" in kv else default_scales()
    boundary = Boundary(kv.get("boundary", "zero"))
    cfg.cwt = CwtParams(scales, 1, boundary)
    mode = kv.get("scale_policy", "fixed")
    mode = {"fixed": "fixed", "max": "max"}.get(mode)
    if mode is None:
        raise SpecError(f"scale_policy must be 'fixed' or 'max', got {kv['scale_policy']!r}")
    fixed = _number(kv, "fixed_scale") if "fixed_scale" in kv else None
    cfg.policy = ScalePolicy(mode, fixed)
    if "z_index" in kv:
        cfg.z_index = _number(kv, "z_index", int)
    if "z_window" in kv:
        cfg.z_window = parse_window(kv["z_window"])
    tkw = {"polarity": kv.get("polarity", "high")}
    if "min_size" in kv:
        tkw["min_size"] = _number(kv, "min_size", int)
    cfg.threshold = ThresholdPolicy.parse(kv.get("threshold", "otsu"), **tkw)
    if "seed" in kv:
        cfg.seed = _number(kv, "seed", int)
    if "noise_sigma" in kv:
        cfg.noise_sigma = _number(kv, "noise_sigma")
    if "workers" in kv:
        cfg.workers = _number(kv, "workers", int)
    if "format" in kv:
        cfg.formats = tuple(f.strip().lower() for f in kv["format"].split(",") if f.strip())
    if "pixel_area_mm2" in kv:
        cfg.pixel_area_mm2 = _number(kv, "pixel_area_mm2")
    return cfg


def wavelet_of(method: str) -> WaveletKind | None:
    return None if method == "raw" else WaveletKind.parse(method)

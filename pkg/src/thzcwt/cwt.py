"""Continuous wavelet transform of depth profiles.

The transform is the unit-spacing Riemann sum

    W(a, b) = a**-0.5 * sum_t f(t) * psi((t - b) / a)

with the kernel dropped where ``|(t - b) / a| >= 6``. The inner correlation
runs in the compiled ``_ckernels`` extension when it is importable, otherwise
in ``_pykernels``; set ``THZCWT_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks, peak_widths

from . import _pykernels
from .errors import DegenerateInputError, DomainError, SpecError
from .fmcw import AScan

_ckernels = None
if not os.environ.get("THZCWT_PURE_PYTHON"):
    try:
        from . import _ckernels
    except ImportError:  # extension not built
        _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels
DEFAULT_BACKEND = "cython" if _ckernels is not None else "python"

# kernels are zero for |x| >= TRUNCATION
TRUNCATION = 6.0


class WaveletKind(enum.Enum):
    MORLET = "morlet"
    GAUSSIAN = "gaussian"
    MEXICAN_HAT = "mexican-hat"

    @classmethod
    def parse(cls, name: str) -> "WaveletKind":
        key = name.strip().lower().replace("_", "-").replace(" ", "-")
        aliases = {"mexhat": "mexican-hat", "mexican": "mexican-hat", "ricker": "mexican-hat", "gauss": "gaussian"}
        return cls(aliases.get(key, key))


class Boundary(enum.Enum):
    ZERO = "zero"
    REFLECT = "reflect"


# half-width of each kernel's central lobe in units of the scale:
# first zero for Morlet (cos 5x) and Mexican hat, half maximum for the Gaussian
CENTRAL_HALF_WIDTH = {
    WaveletKind.MORLET: math.pi / 10.0,
    WaveletKind.GAUSSIAN: math.sqrt(math.log(2.0)),
    WaveletKind.MEXICAN_HAT: 1.0,
}


def wavelet_eval(kind: WaveletKind, x):
    """Evaluate a basis function at dimensionless ``x`` (scalar or array).

    Morlet ``exp(-x^2/2) cos(5x)``, Gaussian ``exp(-x^2)``, Mexican hat
    ``(1 - x^2) exp(-x^2/2)``; no normalising constants.
    """
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise DomainError("wavelet argument must be finite")
    x2 = xa * xa
    if kind is WaveletKind.MORLET:
        out = np.exp(-0.5 * x2) * np.cos(5.0 * xa)
    elif kind is WaveletKind.GAUSSIAN:
        out = np.exp(-x2)
    elif kind is WaveletKind.MEXICAN_HAT:
        out = (1.0 - x2) * np.exp(-0.5 * x2)
    else:
        raise DomainError(f"unknown wavelet kind {kind!r}")
    return float(out) if out.ndim == 0 else out


def default_scales(n: int = 16, min_width: float = 2.0, max_width: float = 64.0) -> tuple[float, ...]:
    """Log-spaced scales whose central-lobe width ``2a`` spans min..max samples."""
    return tuple(float(a) for a in np.geomspace(min_width / 2.0, max_width / 2.0, n))


@dataclass(frozen=True)
class CwtParams:
    scales: tuple[float, ...] = field(default_factory=default_scales)
    translation_stride: int = 1
    boundary: Boundary = Boundary.ZERO

    def __post_init__(self):
        scales = tuple(float(a) for a in self.scales)
        object.__setattr__(self, "scales", scales)
        if not scales:
            raise SpecError("at least one scale is required")
        if any(not (a > 0 and math.isfinite(a)) for a in scales):
            raise SpecError("scales must be finite and > 0")
        if any(b <= a for a, b in zip(scales, scales[1:])):
            raise SpecError("scales must be strictly increasing")
        if int(self.translation_stride) != self.translation_stride or self.translation_stride < 1:
            raise SpecError("translation_stride must be a positive integer")
        if not isinstance(self.boundary, Boundary):
            object.__setattr__(self, "boundary", Boundary(self.boundary))


@dataclass(frozen=True)
class CwtCoefficients:
    values: np.ndarray  # (n_scales, n_translations)
    scales: tuple[float, ...]
    source_length: int
    translation_stride: int = 1


@dataclass(frozen=True)
class ScalePolicy:
    """How an enhanced profile is read off the coefficient array.

    ``mode="fixed"`` takes ``|W(a*, .)|``; ``scale=None`` picks ``a*`` from
    the peak widths of a reference profile (see :func:`match_scale`).
    ``mode="max"`` takes the maximum of ``|W|`` over ``CwtParams.scales``.
    """

    mode: str = "fixed"
    scale: float | None = None

    def __post_init__(self):
        if self.mode not in ("fixed", "max"):
            raise SpecError(f"unknown scale policy {self.mode!r}")
        if self.scale is not None and not self.scale > 0:
            raise SpecError("fixed scale must be > 0")


def kernel_bank(kind: WaveletKind, scales) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sampled kernels ``psi(k/a)`` for integer offsets ``k`` with ``|k/a| < 6``."""
    scales = np.asarray(scales, dtype=float)
    half = np.array([math.ceil(TRUNCATION * a) for a in scales], dtype=np.intp)
    # ceil(6a) itself may land exactly on |x| == 6, which is excluded
    half = np.array([h if h / a < TRUNCATION else h - 1 for h, a in zip(half, scales)], dtype=np.intp)
    half = np.maximum(half, 0)
    width = int(half.max())
    offsets = np.arange(-width, width + 1, dtype=float)
    bank = np.zeros((len(scales), 2 * width + 1))
    for i, a in enumerate(scales):
        x = offsets / a
        inside = np.abs(x) < TRUNCATION
        bank[i, inside] = wavelet_eval(kind, x[inside])
    return bank, half, 1.0 / np.sqrt(scales)


def _as_rows(signals) -> np.ndarray:
    if isinstance(signals, AScan):
        signals = signals.values
    arr = np.asarray(signals, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise DomainError("signals must be 1-D or a 2-D stack of rows")
    if arr.shape[1] < 2:
        raise DomainError("signal length must be >= 2")
    return arr


def _pad(rows: np.ndarray, pad: int, boundary: Boundary) -> np.ndarray:
    if boundary is Boundary.ZERO:
        return np.pad(rows, ((0, 0), (pad, pad)))
    return np.pad(rows, ((0, 0), (pad, pad)), mode="reflect")


def cwt_batch(signals, kind: WaveletKind, params: CwtParams, backend: str | None = None) -> np.ndarray:
    """Transform many equal-length rows at once; returns ``(m, n_scales, n_translations)``."""
    rows = _as_rows(signals)
    n = rows.shape[1]
    bank, half, norm = kernel_bank(kind, params.scales)
    pad = (bank.shape[1] - 1) // 2
    padded = np.ascontiguousarray(_pad(rows, pad, params.boundary))
    impl = BACKENDS[backend or DEFAULT_BACKEND]
    return impl.correlate(padded, pad, n, bank, half, norm, int(params.translation_stride))


def cwt_transform(signal, kind: WaveletKind, params: CwtParams | None = None,
                  backend: str | None = None) -> CwtCoefficients:
    params = params or CwtParams()
    rows = _as_rows(signal)
    if rows.shape[0] != 1:
        raise DomainError("cwt_transform takes a single signal; use cwt_batch for stacks")
    values = cwt_batch(rows, kind, params, backend)[0]
    return CwtCoefficients(values, params.scales, rows.shape[1], params.translation_stride)


def match_scale(reference, kind: WaveletKind, rel_prominence: float = 0.1) -> float:
    """Scale whose central-lobe half-width equals the median peak half-width of ``reference``.

    Peaks are those with prominence of at least ``rel_prominence`` times the
    profile maximum; widths are measured at half prominence.
    """
    ref = _as_rows(reference)[0]
    top = float(np.max(np.abs(ref)))
    if top == 0.0:
        raise DegenerateInputError("reference profile is all zero; cannot match a scale")
    peaks, _ = find_peaks(ref, prominence=rel_prominence * top)
    if len(peaks) == 0:
        raise DegenerateInputError("no peaks found in reference profile")
    widths = peak_widths(ref, peaks, rel_height=0.5)[0]
    return float(np.median(widths) / 2.0 / CENTRAL_HALF_WIDTH[kind])


def enhance_batch(signals, kind: WaveletKind, params: CwtParams | None = None,
                  policy: ScalePolicy | None = None, backend: str | None = None) -> np.ndarray:
    """Enhanced profiles for a stack of rows. Fixed-scale matching uses the mean row.

    Depth profiles are non-negative envelopes, so only the positive part of
    the coefficients is kept: negative side lobes of a peak's response would
    otherwise show up as spurious maxima next to it.
    """
    params = params or CwtParams()
    policy = policy or ScalePolicy()
    if params.translation_stride != 1:
        raise DomainError("enhancement needs translation_stride == 1 to keep the profile length")
    rows = _as_rows(signals)
    if policy.mode == "fixed":
        scale = policy.scale
        if scale is None:
            scale = match_scale(rows.mean(axis=0), kind)
        fixed = CwtParams((scale,), 1, params.boundary)
        return np.maximum(cwt_batch(rows, kind, fixed, backend)[:, 0, :], 0.0)
    coeffs = cwt_batch(rows, kind, params, backend)
    return np.maximum(coeffs.max(axis=1), 0.0)


def enhance_ascan(signal, kind: WaveletKind, params: CwtParams | None = None,
                  policy: ScalePolicy | None = None, backend: str | None = None) -> AScan:
    depth_bin = signal.depth_bin_m if isinstance(signal, AScan) else 1.0
    rows = _as_rows(signal)
    if rows.shape[0] != 1:
        raise DomainError("enhance_ascan takes a single signal")
    if not np.any(rows):
        return AScan(np.zeros(rows.shape[1]), depth_bin)
    return AScan(enhance_batch(rows, kind, params, policy, backend)[0], depth_bin)

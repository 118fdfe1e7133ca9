"""FMCW interferometry: beat frequency, range mapping and A-scan synthesis.

Beat signal of a single reflector at optical path difference ``dL``::

    I(dL, t) = (I1 + I2) * [1 + V cos(2 pi f_b t + phi0)]
    f_b      = freq_span * dL / (c * T_m)
    phi0     = omega0 * dL / c,   omega0 = 2 pi * band_start

Depth profiles are the magnitude of the Hann-windowed, zero-padded spectrum
of the summed beat signal, so bin ``k`` sits at beat frequency ``k * fs / n_fft``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, SpecError

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class SweepConfig:
    """Linear frequency sweep of the source.

    The span is stored as an ordinary frequency (Hz); the 2*pi lives in
    :attr:`chirp_rate`.
    """

    sweep_period_s: float = 240e-6
    freq_span_hz: float = 90e9
    band_start_hz: float = 0.23e12
    band_end_hz: float = 0.32e12
    n_time_samples: int = 128
    propagation_speed_mps: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if not self.sweep_period_s > 0:
            raise SpecError("sweep_period_s must be > 0")
        if not self.freq_span_hz > 0:
            raise SpecError("freq_span_hz must be > 0")
        if not self.propagation_speed_mps > 0:
            raise SpecError("propagation_speed_mps must be > 0")
        band = self.band_end_hz - self.band_start_hz
        if abs(band - self.freq_span_hz) > 1e-6 * self.freq_span_hz:
            raise SpecError(
                f"band_end_hz - band_start_hz ({band:g}) must equal freq_span_hz ({self.freq_span_hz:g})"
            )
        if int(self.n_time_samples) != self.n_time_samples or self.n_time_samples < 2:
            raise SpecError("n_time_samples must be an integer >= 2")

    @property
    def chirp_rate(self) -> float:
        """Angular chirp rate alpha = 2*pi*freq_span/T_m in rad/s^2."""
        return 2.0 * math.pi * self.freq_span_hz / self.sweep_period_s

    @property
    def sample_rate_hz(self) -> float:
        return self.n_time_samples / self.sweep_period_s

    def time_axis(self) -> np.ndarray:
        return np.arange(self.n_time_samples) * (self.sweep_period_s / self.n_time_samples)


@dataclass(frozen=True)
class InterferenceParams:
    """Two-beam interference parameters for one path difference.

    ``initial_phase_rad`` overrides the default phase ``omega0 * dL / c``.
    """

    i1: float
    i2: float
    visibility: float
    sweep: SweepConfig = field(default_factory=SweepConfig)
    initial_phase_rad: float | None = None

    def __post_init__(self):
        if self.i1 < 0 or self.i2 < 0:
            raise SpecError("intensities i1, i2 must be >= 0")
        if not 0.0 <= self.visibility <= 1.0:
            raise SpecError("visibility must lie in [0, 1]")

    @property
    def chirp_rate_rad_per_s2(self) -> float:
        return self.sweep.chirp_rate

    def phase(self, path_difference: float) -> float:
        if self.initial_phase_rad is not None:
            return self.initial_phase_rad
        omega0 = 2.0 * math.pi * self.sweep.band_start_hz
        return omega0 * path_difference / self.sweep.propagation_speed_mps


@dataclass(frozen=True)
class Reflector:
    path_difference_m: float
    reflectivity: float

    def __post_init__(self):
        if self.path_difference_m < 0:
            raise SpecError("path_difference_m must be >= 0")
        if self.reflectivity < 0:
            raise SpecError("reflectivity must be >= 0")


@dataclass(frozen=True)
class AScan:
    """Depth-resolved magnitude profile at one raster position.

    ``depth_bin_m`` is the one-way depth per bin (half the path-difference bin).
    """

    values: np.ndarray
    depth_bin_m: float = 1.0

    def __len__(self):
        return len(self.values)


def beat_frequency(sweep: SweepConfig, path_difference):
    """Beat frequency in Hz for a two-way optical path difference in meters."""
    dl = np.asarray(path_difference, dtype=float)
    if np.any(dl < 0) or not np.all(np.isfinite(dl)):
        raise DomainError("path_difference must be finite and >= 0")
    fb = sweep.freq_span_hz * dl / (sweep.propagation_speed_mps * sweep.sweep_period_s)
    return float(fb) if fb.ndim == 0 else fb


def range_from_beat(sweep: SweepConfig, beat):
    """Inverse of :func:`beat_frequency`: path difference in meters."""
    fb = np.asarray(beat, dtype=float)
    if np.any(fb < 0) or not np.all(np.isfinite(fb)):
        raise DomainError("beat frequency must be finite and >= 0")
    dl = fb * sweep.propagation_speed_mps * sweep.sweep_period_s / sweep.freq_span_hz
    return float(dl) if dl.ndim == 0 else dl


def interference_intensity(params: InterferenceParams, path_difference: float, t):
    """Interference intensity at time(s) ``t`` within one sweep."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t >= params.sweep.sweep_period_s):
        raise DomainError("t must lie in [0, sweep_period_s)")
    fb = beat_frequency(params.sweep, path_difference)
    phi0 = params.phase(path_difference)
    out = (params.i1 + params.i2) * (1.0 + params.visibility * np.cos(2.0 * math.pi * fb * t + phi0))
    return float(out) if out.ndim == 0 else out


def default_fft_size(sweep: SweepConfig, n_depth_bins: int) -> int:
    n = max(2 * (n_depth_bins - 1), sweep.n_time_samples)
    return 1 << (n - 1).bit_length()


def path_bin_m(sweep: SweepConfig, fft_size: int) -> float:
    """Path difference spanned by one spectral bin."""
    return range_from_beat(sweep, sweep.sample_rate_hz / fft_size)


def beat_signals(sweep: SweepConfig, path_differences, reflectivities) -> np.ndarray:
    """Sum of AC fringe terms for reflector sets along the last axis.

    Each reflector of amplitude reflectivity ``r`` interferes with a unit
    reference beam: ``I1 = 1``, ``I2 = r**2``, ``V = 2r / (1 + r**2)``; the
    DC part ``I1 + I2`` is removed, leaving a fringe of amplitude ``2r``.
    Returns shape ``path_differences.shape[:-1] + (n_time_samples,)``.
    """
    dl = np.asarray(path_differences, dtype=float)
    r = np.asarray(reflectivities, dtype=float)
    if dl.shape != r.shape:
        raise DomainError("path_differences and reflectivities must have the same shape")
    if np.any(dl < 0):
        raise DomainError("path differences must be >= 0")
    if np.any(r < 0):
        raise DomainError("reflectivities must be >= 0")
    t = sweep.time_axis()
    fb = beat_frequency(sweep, dl)
    phi0 = 2.0 * math.pi * sweep.band_start_hz * dl / sweep.propagation_speed_mps
    total = 1.0 + r * r
    vis = np.divide(2.0 * r, total)
    # (..., k, 1) x (n,) -> (..., k, n)
    fringe = total[..., None] * vis[..., None] * np.cos(
        2.0 * math.pi * fb[..., None] * t + phi0[..., None]
    )
    return fringe.sum(axis=-2)


def depth_profiles(signals: np.ndarray, n_depth_bins: int, fft_size: int) -> np.ndarray:
    """Hann-windowed magnitude spectrum, scaled so a fringe of amplitude A peaks near A."""
    n = signals.shape[-1]
    if fft_size // 2 + 1 < n_depth_bins:
        raise DomainError("fft_size too small for the requested number of depth bins")
    window = np.hanning(n)
    spec = np.fft.rfft(signals * window, n=fft_size, axis=-1)
    return np.abs(spec[..., :n_depth_bins]) * (2.0 / window.sum())


def synthesize_ascan(
    sweep: SweepConfig,
    reflectors: Sequence[Reflector],
    noise_sigma: float = 0.0,
    rng_seed: int | np.random.Generator | None = 0,
    n_depth_bins: int = 512,
    fft_size: int | None = None,
) -> AScan:
    """Simulate one depth profile from a list of reflectors.

    White Gaussian noise of standard deviation ``noise_sigma`` (relative to
    the unit reference intensity) is added to the time-domain beat signal.
    With ``noise_sigma == 0`` the seed is never consumed.
    """
    if not reflectors:
        raise DomainError("at least one reflector is required")
    if noise_sigma < 0:
        raise DomainError("noise_sigma must be >= 0")
    if fft_size is None:
        fft_size = default_fft_size(sweep, n_depth_bins)
    dl = np.array([r.path_difference_m for r in reflectors])
    refl = np.array([r.reflectivity for r in reflectors])
    sig = beat_signals(sweep, dl, refl)
    if noise_sigma > 0:
        rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
        sig = sig + noise_sigma * rng.standard_normal(sig.shape)
    prof = depth_profiles(sig, n_depth_bins, fft_size)
    return AScan(prof, path_bin_m(sweep, fft_size) / 2.0)


def depth_bin_of(sweep: SweepConfig, path_difference: float, fft_size: int) -> int:
    """Index of the depth bin nearest a reflector's path difference."""
    return int(round(path_difference / path_bin_m(sweep, fft_size)))

"""Defect segmentation of slice images and area accuracy metrics."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import ndimage
from skimage.filters import threshold_otsu

from .errors import DegenerateInputError, DomainError, SpecError
from .volume import SliceImage

METHOD_TAGS = ("Raw", "Morlet", "Gaussian", "MexicanHat")

# 4-connectivity
_CROSS = ndimage.generate_binary_structure(2, 1)


@dataclass(frozen=True)
class ThresholdPolicy:
    """``method`` is ``"otsu"`` or ``"fixed"``; ``polarity="high"`` marks
    pixels above the threshold as defect."""

    method: str = "otsu"
    value: float | None = None
    polarity: str = "high"
    min_size: int = 2

    def __post_init__(self):
        if self.method not in ("otsu", "fixed"):
            raise SpecError(f"unknown threshold method {self.method!r}")
        if self.method == "fixed" and self.value is None:
            raise SpecError("fixed threshold needs a value")
        if self.polarity not in ("high", "low"):
            raise SpecError("polarity must be 'high' or 'low'")
        if self.min_size < 1:
            raise SpecError("min_size must be >= 1")

    @classmethod
    def parse(cls, text: str, **kw) -> "ThresholdPolicy":
        text = str(text).strip().lower()
        if text == "otsu":
            return cls("otsu", **kw)
        try:
            return cls("fixed", float(text), **kw)
        except ValueError:
            raise SpecError(f"threshold must be 'otsu' or a number, got {text!r}") from None


@dataclass(frozen=True)
class DefectLabelMap:
    labels: np.ndarray  # 0 background, 1..k defects
    k: int


@dataclass(frozen=True)
class DefectReport:
    measured_areas_mm2: tuple[float, ...]
    actual_areas_mm2: tuple[float, ...]
    per_defect_abs_diff_mm2: tuple[float, ...]
    total_difference_mm2: float
    percent_difference: float
    method_tag: str


def slice_threshold(pixels: np.ndarray, policy: ThresholdPolicy) -> float:
    if policy.method == "fixed":
        return float(policy.value)
    if np.ptp(pixels) == 0:
        raise DegenerateInputError("slice is constant; automatic threshold undefined")
    return float(threshold_otsu(pixels))


def segment_defects(slice_img: SliceImage | np.ndarray, policy: ThresholdPolicy | None = None) -> DefectLabelMap:
    """Threshold, label 4-connected components, drop those under ``min_size`` pixels."""
    policy = policy or ThresholdPolicy()
    pixels = slice_img.pixels if isinstance(slice_img, SliceImage) else np.asarray(slice_img, dtype=float)
    thr = slice_threshold(pixels, policy)
    fg = pixels > thr if policy.polarity == "high" else pixels < thr
    labels, n = ndimage.label(fg, structure=_CROSS)
    if n == 0:
        return DefectLabelMap(labels, 0)
    sizes = np.bincount(labels.ravel(), minlength=n + 1)
    keep = sizes >= policy.min_size
    keep[0] = False
    remap = np.zeros(n + 1, dtype=labels.dtype)
    remap[keep] = np.arange(1, int(keep.sum()) + 1)
    return DefectLabelMap(remap[labels], int(keep.sum()))


def measure_areas(labels: DefectLabelMap, pixel_area_mm2: float = 1.0) -> list[float]:
    """Component areas in mm^2, ascending."""
    if labels.k == 0:
        return []
    counts = np.bincount(labels.labels.ravel(), minlength=labels.k + 1)[1:]
    return sorted(float(c) * pixel_area_mm2 for c in counts)


def compute_metrics(measured: Sequence[float], actual: Sequence[float], tag: str = "Raw") -> DefectReport:
    """Pair defects by rank and total the absolute area errors.

    Raises DomainError when the counts differ: a missed or spurious defect
    must not be silently paired.
    """
    if len(measured) != len(actual):
        raise DomainError(f"{tag}: {len(measured)} measured defects vs {len(actual)} actual")
    m = sorted(float(v) for v in measured)
    a = sorted(float(v) for v in actual)
    diffs = tuple(abs(x - y) for x, y in zip(m, a))
    total = float(sum(diffs))
    denom = sum(a)
    pct = 100.0 * total / denom if denom > 0 else 0.0
    return DefectReport(tuple(m), tuple(a), diffs, total, pct, tag)


def table_header(n: int) -> list[str]:
    return (["row"] + [f"defect_{i + 1}_mm2" for i in range(n)]
            + ["total_difference_mm2", "percent_difference"])


def report_row(rep: DefectReport) -> list[str]:
    return ([rep.method_tag] + [f"{v:.3f}" for v in rep.measured_areas_mm2]
            + [f"{rep.total_difference_mm2:.3f}", f"{rep.percent_difference:.3f}"])


def reports_to_csv(actual: Sequence[float], reports: Sequence[DefectReport]) -> str:
    """Table layout: an ``Actual`` row, then one row per method."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table_header(len(actual)))
    w.writerow(["Actual"] + [f"{v:.3f}" for v in sorted(actual)] + ["0.000", "0.000"])
    for rep in reports:
        w.writerow(report_row(rep))
    return buf.getvalue()

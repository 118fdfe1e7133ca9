"""End-to-end processing: raw volume -> per-method slice -> defect areas -> metrics."""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass

from .config import PipelineConfig, wavelet_of
from .errors import DegenerateInputError, DomainError
from .segmentation import (
    DefectLabelMap, DefectReport, compute_metrics, measure_areas, report_row, segment_defects, table_header,
)
from .volume import Provenance, SliceImage, VolumeScan, enhance_volume, extract_slice, locate_interface_b, normalize_volume

log = logging.getLogger(__name__)


@dataclass
class MethodResult:
    method: str
    tag: str
    z_index: int
    slice: SliceImage
    labels: DefectLabelMap
    measured_mm2: list[float]
    report: DefectReport | None
    error: str | None = None


def resolve_window(cfg: PipelineConfig, truth: dict | None) -> tuple[int, int]:
    if cfg.z_window is not None:
        return cfg.z_window
    if truth is not None and "search_window" in truth:
        lo, hi = truth["search_window"]
        return int(lo), int(hi)
    raise DomainError("no interface search window: pass --z-window, --z-index or a ground-truth sidecar")


def run_method(raw: VolumeScan, method: str, cfg: PipelineConfig, actual_mm2,
               window: tuple[int, int] | None) -> MethodResult:
    kind = wavelet_of(method)
    if kind is None:
        log.info("method raw: no wavelet transform")
        vol = raw
        tag = Provenance.RAW.tag
    else:
        log.info("method %s: running CWT", method)
        vol = enhance_volume(raw, kind, cfg.cwt, cfg.policy, workers=cfg.workers)
        tag = vol.provenance.tag
    vol = normalize_volume(vol)
    z = cfg.z_index if cfg.z_index is not None else locate_interface_b(vol, window)
    img = extract_slice(vol, z)
    labels = segment_defects(img, cfg.threshold)
    pixel_area = cfg.pixel_area_mm2 if cfg.pixel_area_mm2 is not None else (raw.step_xy_m * 1e3) ** 2
    areas = measure_areas(labels, pixel_area)
    try:
        report = compute_metrics(areas, actual_mm2, tag)
        err = None
    except DomainError as exc:
        report, err = None, str(exc)
        log.error("%s", err)
    log.info("method %s: z=%d, %d defects", method, z, labels.k)
    return MethodResult(method, tag, z, img, labels, areas, report, err)


def process_volume(raw: VolumeScan, cfg: PipelineConfig, truth: dict) -> list[MethodResult]:
    if raw.provenance is not Provenance.RAW:
        raise DomainError("process expects a raw volume")
    actual = sorted(truth["actual_areas_mm2"])
    window = None if cfg.z_index is not None else resolve_window(cfg, truth)
    results = []
    for method in cfg.methods:
        try:
            results.append(run_method(raw, method, cfg, actual, window))
        except DegenerateInputError as exc:
            raise DegenerateInputError(f"method {method}: {exc}") from exc
    return results


def results_csv(actual_mm2, results: list[MethodResult]) -> str:
    """Table layout: ``Actual`` row then one row per method.

    A method whose defect count differs from the ground truth keeps its
    measured areas (truncated or blank-padded to the table width) and gets
    ``NA`` in the metric columns.
    """
    n = len(actual_mm2)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table_header(n))
    w.writerow(["Actual"] + [f"{v:.3f}" for v in sorted(actual_mm2)] + ["0.000", "0.000"])
    for r in results:
        if r.report is not None:
            w.writerow(report_row(r.report))
        else:
            cells = [f"{v:.3f}" for v in r.measured_mm2][:n]
            w.writerow([r.tag] + cells + [""] * (n - len(cells)) + ["NA", "NA"])
    return buf.getvalue()

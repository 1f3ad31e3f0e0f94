"""Bit-stable text rendering of reports.

All floats render with 17 significant digits so identical runs produce
identical bytes; the two wall-time columns are the only fields excluded
from determinism comparisons.
"""

from __future__ import annotations

import json
from dataclasses import asdict

from .corrections import EnergyReport

_TIMING_COLUMNS = ("t_scatter_ms", "t_sums_ms")


def fmt(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def csv_header() -> str:
    return ",".join(EnergyReport.CSV_COLUMNS)


def render_csv_row(report: EnergyReport, physics_only: bool = False) -> str:
    cols = EnergyReport.CSV_COLUMNS
    vals = report.csv_values()
    parts = []
    for name, val in zip(cols, vals):
        if physics_only and name in _TIMING_COLUMNS:
            continue
        parts.append(fmt(val))
    return ",".join(parts)


def report_to_json(report: EnergyReport, config_hash: str = "") -> str:
    doc = asdict(report)
    doc["warnings"] = list(report.warnings)
    doc["config_hash"] = config_hash
    rendered = {
        k: (fmt(v) if isinstance(v, float) else v) for k, v in doc.items()
    }
    return json.dumps(rendered, indent=2, sort_keys=True)

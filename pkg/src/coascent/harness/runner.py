"""Run an experiment and write its JSON report and per-sample CSV."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..stattest import VerificationReport
from ..transform import FUNCTIONALS
from .config import ExperimentConfig
from .identities import CATALOG, Table, run_identity

__all__ = ["RunResult", "run", "report_document", "EXIT_CODES", "CSV_COLUMNS"]

EXIT_CODES = {"pass": 0, "fail": 1, "inconclusive": 2}
USAGE_ERROR = 64
CSV_COLUMNS = ["sample_index", "seed", "weight"] + [f"f_{name}" for name in FUNCTIONALS]

# settings that may not influence the report
_EXCLUDED_KEYS = ("workers", "output_json", "output_csv")


@dataclass
class RunResult:
    config: ExperimentConfig
    report: VerificationReport
    tables: list[Table]
    document: dict
    text: str

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.report.status]


def run(config: ExperimentConfig) -> RunResult:
    """Run the configured identity and write the requested output files.

    The JSON text depends only on the resolved configuration minus worker
    count and output paths, so repeated runs produce identical bytes.
    """
    resolved, report, tables = run_identity(config)
    document = report_document(resolved, report, tables)
    text = json.dumps(_plain(document), indent=2, sort_keys=True, allow_nan=False) + "\n"
    if resolved.output_json:
        Path(resolved.output_json).write_text(text)
    if resolved.output_csv:
        write_csv(resolved.output_csv, tables)
    return RunResult(resolved, report, tables, document, text)


def report_document(config: ExperimentConfig, report: VerificationReport, tables) -> dict:
    settings = {k: v for k, v in config.to_dict().items() if k not in _EXCLUDED_KEYS}
    info = CATALOG[config.identity]
    ranges, start = [], 0
    for t in tables:
        ranges.append({"name": t.name, "first_row": start, "rows": int(len(t.seeds))})
        start += len(t.seeds)
    return {
        "identity": config.identity,
        "anchor": info.anchor,
        "claim": info.claim,
        "status": report.status,
        "exit_code": EXIT_CODES[report.status],
        "config": settings,
        "report": report.to_dict(),
        "ensembles": ranges,
    }


def write_csv(path, tables) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for t in tables:
            for i in range(len(t.seeds)):
                row = [i, int(t.seeds[i]), _cell(t.weights[i])]
                row += [_cell(v) for v in t.battery[i]]
                writer.writerow(row)


def _cell(value) -> str:
    value = float(value)
    return "" if math.isnan(value) else repr(value)


def _plain(obj):
    """Convert numpy scalars and non-finite floats into JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    return obj

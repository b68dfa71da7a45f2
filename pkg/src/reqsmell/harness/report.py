"""Result tables: one row per configuration, CSV or JSON on disk.

CSV rounds metric columns to 3 decimals (the table-reading convention);
JSON keeps full float precision so downstream tooling can re-derive the
rounded view exactly.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .simulate import RunResult

COLUMNS = (
    "pool_size",
    "approach",
    "cot",
    "k",
    "precision",
    "recall",
    "f1",
    "p_lo",
    "p_hi",
    "r_lo",
    "r_hi",
    "f1_lo",
    "f1_hi",
    "n",
    "parse_failures",
)

_FLOAT_COLUMNS = ("precision", "recall", "f1", "p_lo", "p_hi", "r_lo", "r_hi", "f1_lo", "f1_hi")


def rows_from_results(results: list[RunResult]) -> list[dict]:
    """Display rows sorted by (pool size, CoT yes-first); zero-shot pools render as "--"."""
    ordered = sorted(results, key=lambda r: (r.config.pool_size, not r.config.cot))
    rows = []
    for result in ordered:
        config = result.config
        rows.append(
            {
                "pool_size": "--" if config.pool_size == 0 else config.pool_size,
                "approach": config.approach,
                "cot": "Yes" if config.cot else "No",
                "k": config.k,
                "precision": result.metrics.precision,
                "recall": result.metrics.recall,
                "f1": result.metrics.f1,
                "p_lo": result.ci.p_lo,
                "p_hi": result.ci.p_hi,
                "r_lo": result.ci.r_lo,
                "r_hi": result.ci.r_hi,
                "f1_lo": result.ci.f1_lo,
                "f1_hi": result.ci.f1_hi,
                "n": result.n_predictions,
                "parse_failures": result.parse_failures,
            }
        )
    return rows


def write_rows(rows: list[dict], fmt: str, path: str | Path) -> None:
    """Write already-built rows; lets a JSON report be re-emitted as CSV."""
    path = Path(path)
    if fmt == "json":
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)
            fh.write("\n")
    elif fmt == "csv":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=COLUMNS)
            writer.writeheader()
            for row in rows:
                rendered = dict(row)
                for column in _FLOAT_COLUMNS:
                    rendered[column] = f"{row[column]:.3f}"
                writer.writerow(rendered)
    else:
        raise ValueError(f"unknown report format {fmt!r} (expected csv or json)")


def emit_report(results: list[RunResult], fmt: str, path: str | Path) -> None:
    """Render results to a report file in the requested format."""
    write_rows(rows_from_results(results), fmt, path)


def read_report_rows(path: str | Path) -> list[dict]:
    """Load a JSON report back as rows (for audits and format conversion)."""
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)

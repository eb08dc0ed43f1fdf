"""CSV and JSON output for experiment results.

Floats are written with ``repr`` so a rerun with the same config produces a
byte-identical file.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from ..constants import surface_tension, variance_constant
from .experiments import ExperimentResult

__all__ = ["format_value", "header_lines", "result_to_csv", "result_to_json", "write_result"]


def format_value(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "item"):  # numpy scalar
        return format_value(value.item())
    return str(value)


def header_lines(result: ExperimentResult) -> list[str]:
    cfg = result.config
    lines = [f"# experiment={result.experiment}"]
    lines += [f"# {k}={v}" for k, v in cfg.record().items()]
    lines.append(f"# sigma_d={surface_tension(cfg.d)!r}")
    lines.append(f"# C_d={variance_constant(cfg.d)!r}")
    lines.append(f"# config_hash={cfg.config_hash}")
    return lines


def result_to_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    for line in header_lines(result):
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    cols = result.columns
    writer.writerow(cols)
    for row in result.rows:
        writer.writerow([format_value(row.get(c, math.nan)) for c in cols])
    for key in sorted(result.meta):
        buf.write(f"# {key}={format_value(result.meta[key])}\n")
    for check in result.checks:
        buf.write(f"# check {'PASS' if check.passed else 'FAIL'}: {check.name} {check.detail}".rstrip() + "\n")
    return buf.getvalue()


def _jsonable(value):
    if hasattr(value, "item"):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def result_to_json(result: ExperimentResult) -> str:
    doc = {
        "experiment": result.experiment,
        "config": result.config.record(),
        "config_hash": result.config.config_hash,
        "sigma_d": surface_tension(result.config.d),
        "C_d": variance_constant(result.config.d),
        "columns": result.columns,
        "rows": [{c: _jsonable(row.get(c)) for c in result.columns} for row in result.rows],
        "meta": {k: _jsonable(v) for k, v in sorted(result.meta.items())},
        "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in result.checks],
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def write_result(result: ExperimentResult, output: str | None = None, json_path: str | None = None) -> str:
    """Write the CSV (to ``output`` if given) and optional JSON mirror; return the CSV text."""
    text = result_to_csv(result)
    if output:
        Path(output).write_text(text)
    if json_path:
        Path(json_path).write_text(result_to_json(result))
    return text

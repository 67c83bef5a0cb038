"""
Utility functions for experiment output: CSV with a metadata header, report files
and optional gnuplot scripts.
"""

import csv
import io
import json
import logging
import os
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"


def format_value(value: Any) -> str:
    """Stable text for one CSV cell."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if np.isnan(value):
            return "nan"
        return FLOAT_FORMAT % float(value)
    if value is None:
        return ""
    return str(value)


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars and arrays inside nested containers to plain Python."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def render_csv(columns: Sequence[str], rows: Iterable[Sequence[Any]], metadata: Dict[str, Any]) -> str:
    """
    CSV text preceded by `# key: value` lines.

    Metadata values are written as sorted-key JSON so the header is byte-stable.
    """
    buffer = io.StringIO()
    for key in sorted(metadata):
        buffer.write(f"# {key}: {json.dumps(to_jsonable(metadata[key]), sort_keys=True)}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buffer.getvalue()


def read_csv(text: str) -> List[Dict[str, str]]:
    """Rows of a rendered CSV, metadata lines skipped."""
    body = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(body))


def gnuplot_script(csv_name: str, columns: Sequence[str], title: str) -> str:
    """Plot script drawing every column against the first one."""
    lines = [
        f"set title {json.dumps(title)}",
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set key autotitle columnhead",
        f"set xlabel {json.dumps(columns[0])}",
        "set grid",
    ]
    plots = [f"'{csv_name}' using 1:{i + 1} with lines" for i in range(1, len(columns))]
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def write_report(report: Any, out_dir: str, gnuplot: bool = False) -> List[str]:
    """
    Write every CSV payload of a RunReport plus report.json.

    Returns:
        Paths written
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for name, text in report.csv.items():
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        written.append(path)
        if gnuplot:
            header = next(line for line in text.splitlines() if not line.startswith("#"))
            columns = header.split(",")
            plot_path = os.path.join(out_dir, os.path.splitext(name)[0] + ".gp")
            with open(plot_path, "w", encoding="utf-8") as f:
                f.write(gnuplot_script(name, columns, f"{report.experiment}: {name}"))
            written.append(plot_path)

    report_path = os.path.join(out_dir, "report.json")
    payload = report.model_dump(exclude={"csv"})
    payload["files"] = sorted(report.csv)
    with open(report_path, "w", encoding="utf-8") as f:
        json.dump(to_jsonable(payload), f, indent=2, sort_keys=True)
    written.append(report_path)
    logger.info(f"Wrote {len(written)} files to {out_dir}")
    return written

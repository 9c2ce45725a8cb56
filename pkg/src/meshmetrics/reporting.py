"""Report rendering: comparison CSV and the full JSON scenario report.

Output is byte-deterministic: floats print with 6 significant digits, JSON
keys are sorted, and row order follows the report (hop-count baseline first,
then metrics in request order).  Error rows keep the CSV field count constant
by carrying the error label in the route column.
"""

from __future__ import annotations

import json
from pathlib import Path as FsPath

from .errors import IoError
from .harness import ComparisonRow, ComparisonTable, ScenarioReport, compare_metrics
from .schemas import scenario_to_dict

CSV_HEADER = "metric,route,hops,metric_value,availability,mean_ant,throughput_bps"


def format_float(value: float) -> str:
    return f"{value:.6g}"


def _sig6(value: float) -> float:
    return float(format_float(value))


def _cell(value: float | int | str | None) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def render_csv(table: ComparisonTable) -> str:
    lines = [CSV_HEADER]
    for row in table.rows:
        route = row.route if row.error is None else row.error
        lines.append(
            ",".join(
                (
                    row.metric,
                    route,
                    _cell(row.hops),
                    _cell(row.metric_value),
                    _cell(row.availability),
                    _cell(row.mean_ant),
                    _cell(row.throughput_bps),
                )
            )
        )
    return "\n".join(lines) + "\n"


def _row_payload(row: ComparisonRow) -> dict:
    return {
        "metric": row.metric,
        "route": row.route,
        "hops": row.hops,
        "metric_value": None if row.metric_value is None else _sig6(row.metric_value),
        "availability": None if row.availability is None else _sig6(row.availability),
        "mean_ant": None if row.mean_ant is None else _sig6(row.mean_ant),
        "throughput_bps": None if row.throughput_bps is None else _sig6(row.throughput_bps),
        "error": row.error,
    }


def comparison_payload(table: ComparisonTable) -> dict:
    return {"rows": [_row_payload(row) for row in table.rows]}


def report_payload(report: ScenarioReport) -> dict:
    """The JSON report body: scenario echo, per-link estimates, metric rows."""
    estimates = {}
    for link in sorted(report.link_estimates):
        e = report.link_estimates[link]
        estimates[str(link)] = {
            "d_f": _sig6(e.d_f),
            "d_r": _sig6(e.d_r),
            "mu": _sig6(e.mu),
            "sigma2": _sig6(e.sigma2),
            "bandwidth_bps": _sig6(e.bandwidth_bps),
            "snr": _sig6(e.snr),
            "sinr": _sig6(e.sinr),
            "interferer_count": e.interferer_count,
            "neighbor_tau": {str(n): _sig6(t) for n, t in sorted(e.neighbor_tau.items())},
        }
    table = compare_metrics(report)
    rows = []
    for payload, outcome in zip(comparison_payload(table)["rows"], report.rows):
        if outcome.flow is not None:
            payload = dict(payload)
            payload["delivered"] = outcome.flow.delivered
            payload["offered"] = outcome.flow.offered
        rows.append(payload)
    return {
        "scenario_echo": scenario_to_dict(report.scenario),
        "seed": report.seed,
        "link_estimates": estimates,
        "rows": rows,
    }


def render_report_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_text(text: str, path: str | FsPath) -> None:
    try:
        FsPath(path).write_text(text)
    except OSError as exc:
        raise IoError(f"cannot write report to {path}: {exc}") from exc

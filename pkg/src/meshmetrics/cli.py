"""Command-line client for the metric service.

Subcommands map one-to-one onto the service handlers: eval computes a metric
from inline key=value parameters, route/simulate/compare load a scenario file
and run the pipeline.  Exit codes: 0 success, 1 usage error, 2 bad input or
unwritable output, 3 no route found.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import reporting, service
from .errors import MeshMetricsError, SchemaError
from .schemas import parse_scenario_file, scenario_to_dict

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NO_ROUTE = 3


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 on usage errors instead of the default 2."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="meshmetrics", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="evaluate one metric from inline parameters")
    p_eval.add_argument("metric", help="metric id, e.g. etx")
    p_eval.add_argument("params", nargs="*", help="key=value pairs; lists as comma-separated values")
    p_eval.add_argument("--format", choices=("text", "json"), default="text")

    for name, help_text in (
        ("route", "select a route per metric (no replay)"),
        ("simulate", "measure, route and replay; write the full report"),
        ("compare", "measure, route and replay; write the comparison table"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--scenario", required=True, help="scenario file (JSON)")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--seed", type=int, help="override the scenario seed")
        p.add_argument("--metrics", help="comma-separated metric filter, e.g. etx,ett,wcett")
    return parser


def _parse_param_value(raw: str) -> float | list[float]:
    if "," in raw:
        return [float(part) for part in raw.split(",") if part != ""]
    return float(raw)


def _parse_params(pairs: Sequence[str]) -> dict:
    params = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ValueError(f"parameters must be key=value, got '{pair}'")
        try:
            params[key] = _parse_param_value(value)
        except ValueError:
            raise ValueError(f"parameter '{key}' has non-numeric value '{value}'") from None
    return params


def _usage_error(message: str) -> int:
    print(f"meshmetrics: error: {message}", file=sys.stderr)
    return EXIT_USAGE


def _input_error(message: str) -> int:
    print(f"meshmetrics: error: {message}", file=sys.stderr)
    return EXIT_INPUT


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        reporting.write_text(text, out)


def _scenario_request(args: argparse.Namespace) -> service.ScenarioRequest:
    scenario = parse_scenario_file(args.scenario)
    metric_filter = None
    if args.metrics:
        metric_filter = [m.strip() for m in args.metrics.split(",") if m.strip()]
    return service.ScenarioRequest(
        scenario=scenario_to_dict(scenario), seed=args.seed, metrics=metric_filter
    )


def _cmd_eval(args: argparse.Namespace) -> int:
    try:
        params = _parse_params(args.params)
    except ValueError as exc:
        return _usage_error(str(exc))
    try:
        response = service.evaluate_inline(service.EvalRequest(metric=args.metric, params=params))
    except SchemaError as exc:  # unknown metric, unknown/missing parameter
        return _usage_error(str(exc))
    except MeshMetricsError as exc:  # domain errors: dead link, bad ratio...
        return _input_error(str(exc))
    except ValueError as exc:
        return _usage_error(str(exc))
    if args.format == "json":
        print(json.dumps(response.model_dump(), sort_keys=True))
    else:
        print(reporting.format_float(response.value))
        if response.admissible is not None:
            print(f"admissible={'true' if response.admissible else 'false'}")
    return EXIT_OK


def _cmd_route(args: argparse.Namespace) -> int:
    if args.format == "csv":
        return _usage_error("route output is json or text; csv applies to simulate/compare")
    try:
        request = _scenario_request(args)
        response = service.run_routes(request)
    except FileNotFoundError as exc:
        return _input_error(str(exc))
    except MeshMetricsError as exc:
        return _input_error(str(exc))
    if all(row.error is not None for row in response.rows):
        for row in response.rows:
            print(f"{row.metric}: {row.error}", file=sys.stderr)
        print("meshmetrics: error: no route for any requested metric", file=sys.stderr)
        return EXIT_NO_ROUTE
    if args.out is not None:
        payload = {"rows": [row.model_dump() for row in response.rows]}
        try:
            _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
        except MeshMetricsError as exc:
            return _input_error(str(exc))
        return EXIT_OK
    for row in response.rows:
        if row.error is not None:
            print(f"{row.metric}: {row.error}")
        else:
            route = "->".join(str(n) for n in row.route or [])
            print(f"{row.metric}: {route} value={reporting.format_float(row.value)}")
    return EXIT_OK


def _cmd_report(args: argparse.Namespace, full_report: bool) -> int:
    try:
        request = _scenario_request(args)
        if full_report:
            payload = service.run_simulation(request)
        else:
            payload = service.run_comparison(request)
    except FileNotFoundError as exc:
        return _input_error(str(exc))
    except MeshMetricsError as exc:
        return _input_error(str(exc))
    if args.format == "csv":
        rows = payload["rows"]
        text = _csv_from_rows(rows)
    else:
        text = reporting.render_report_json(payload)
    try:
        _emit(text, args.out)
    except MeshMetricsError as exc:
        return _input_error(str(exc))
    return EXIT_OK


def _csv_from_rows(rows: list[dict]) -> str:
    lines = [reporting.CSV_HEADER]
    for row in rows:
        route = row["route"] if row.get("error") is None else row["error"]
        cells = [row["metric"], route]
        for key in ("hops", "metric_value", "availability", "mean_ant", "throughput_bps"):
            value = row.get(key)
            if value is None:
                cells.append("")
            elif isinstance(value, float):
                cells.append(reporting.format_float(value))
            else:
                cells.append(str(value))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "eval":
        return _cmd_eval(args)
    if args.command == "route":
        return _cmd_route(args)
    if args.command == "simulate":
        return _cmd_report(args, full_report=True)
    if args.command == "compare":
        return _cmd_report(args, full_report=False)
    return _usage_error(f"unknown command {args.command!r}")


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

"""HTTP service wrapping the metric library.

Endpoints mirror the CLI verbs: /eval computes one metric from inline
parameters, /route selects a route per metric, /simulate runs the full
measure-route-replay pipeline, /compare returns just the comparison rows.
The CLI calls the same handler functions in-process, so both surfaces share
one code path.
"""

from __future__ import annotations

import re
from typing import Any, Callable

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import core, metrics, reporting
from .core import MetricId, MetricValue, direction_of
from .errors import MeshMetricsError, NoRoute, SchemaError
from .harness import compare_metrics, derive_seed, run_scenario
from .linksim import measure_link
from .metrics import MetricConfig, MtmHop
from .routing import EXHAUSTIVE_HOP_GUARD, RouteRequest, select_route
from .schemas import ScenarioModel, apply_overrides, scenario_from_model


class EvalRequest(BaseModel):
    metric: str
    params: dict[str, Any] = Field(default_factory=dict)


class EvalResponse(BaseModel):
    metric: str
    value: float
    direction: str
    admissible: bool | None = None


class ScenarioRequest(BaseModel):
    scenario: ScenarioModel
    seed: int | None = None
    metrics: list[str] | None = None


class RouteRow(BaseModel):
    metric: str
    route: list[int] | None = None
    channels: list[int] | None = None
    value: float | None = None
    direction: str
    error: str | None = None


class RoutesResponse(BaseModel):
    rows: list[RouteRow]


class HealthResponse(BaseModel):
    status: str = "ok"


class MetricInfo(BaseModel):
    id: str
    direction: str
    inline_params: list[str] | None = None


def _float(params: dict, name: str, default: float | None = None) -> float:
    if name not in params:
        if default is None:
            raise ValueError(f"missing parameter '{name}'")
        return default
    return float(params[name])


def _int(params: dict, name: str, default: int | None = None) -> int:
    if name not in params:
        if default is None:
            raise ValueError(f"missing parameter '{name}'")
        return default
    return int(params[name])


def _floats(params: dict, name: str, default: list[float] | None = None) -> list[float]:
    if name not in params:
        if default is None:
            raise ValueError(f"missing parameter '{name}'")
        return default
    raw = params[name]
    if not isinstance(raw, (list, tuple)):
        raw = [raw]
    return [float(v) for v in raw]


def _ints(params: dict, name: str, default: list[int] | None = None) -> list[int]:
    return [int(v) for v in _floats(params, name, default)]


def _eval_etx(p: dict) -> MetricValue:
    return metrics.etx(_float(p, "d_f"), _float(p, "d_r"))


def _eval_metx(p: dict) -> MetricValue:
    return metrics.modified_etx(_float(p, "mu"), _float(p, "sigma2"))


def _eval_ent(p: dict) -> tuple[MetricValue, bool]:
    config = MetricConfig(
        loss_target_pal=_float(p, "p_al", 1.0),
        retrans_threshold_m=_float(p, "m", 7.0),
    )
    return metrics.ent(_float(p, "mu"), _float(p, "sigma2"), config)


def _eval_ett(p: dict) -> MetricValue:
    return metrics.ett(_float(p, "etx"), _int(p, "packet_bits", 8192), _float(p, "bandwidth_bps"))


def _eval_wcett(p: dict) -> MetricValue:
    return metrics.wcett(_floats(p, "etts"), _ints(p, "channels"), _float(p, "beta", 0.5))


def _eval_iaware(p: dict) -> MetricValue:
    return metrics.iaware(_float(p, "ett"), _float(p, "snr"), _float(p, "sinr"))


def _eval_dbetx(p: dict) -> MetricValue:
    return metrics.dbetx(_floats(p, "snir"), _int(p, "packet_bits", 8192), _int(p, "max_retry", 7))


def _eval_edr(p: dict) -> MetricValue:
    return metrics.edr(_float(p, "rate_bps"), _float(p, "ett"), _floats(p, "tcds"))


def _eval_mcr(p: dict) -> MetricValue:
    usage = {ch: u for ch, u in enumerate(_floats(p, "usage", []))}
    return metrics.mcr(
        _floats(p, "etts"),
        _ints(p, "channels"),
        _float(p, "beta", 0.5),
        _float(p, "switching_delay_s", 0.0),
        usage,
    )


def _eval_mtm(p: dict) -> MetricValue:
    overheads = _floats(p, "overheads")
    rates = _floats(p, "rates")
    reliabilities = _floats(p, "reliabilities")
    if not len(overheads) == len(rates) == len(reliabilities):
        raise ValueError("overheads, rates and reliabilities must have equal length")
    hops = [MtmHop(o, r, rel) for o, r, rel in zip(overheads, rates, reliabilities)]
    return metrics.mtm(hops, _int(p, "packet_bits", 8192))


def _eval_estdtt(p: dict) -> MetricValue:
    return metrics.estd_tt(_float(p, "etx"), _float(p, "rate_bps"))


def _eval_multicast_etx(p: dict) -> MetricValue:
    return metrics.multicast_etx(_floats(p, "p"))


def _eval_energy_cost(p: dict) -> MetricValue:
    return metrics.energy_cost(_floats(p, "p"), _floats(p, "w"))


_INLINE_EVALUATORS: dict[str, tuple[list[str], Callable[[dict], Any]]] = {
    "etx": (["d_f", "d_r"], _eval_etx),
    "metx": (["mu", "sigma2"], _eval_metx),
    "ent": (["mu", "sigma2", "p_al", "m"], _eval_ent),
    "ett": (["etx", "packet_bits", "bandwidth_bps"], _eval_ett),
    "wcett": (["etts", "channels", "beta"], _eval_wcett),
    "iaware": (["ett", "snr", "sinr"], _eval_iaware),
    "dbetx": (["snir", "packet_bits", "max_retry"], _eval_dbetx),
    "edr": (["rate_bps", "ett", "tcds"], _eval_edr),
    "mcr": (["etts", "channels", "beta", "switching_delay_s", "usage"], _eval_mcr),
    "mtm": (["overheads", "rates", "reliabilities", "packet_bits"], _eval_mtm),
    "estdtt": (["etx", "rate_bps"], _eval_estdtt),
    "multicast_etx": (["p"], _eval_multicast_etx),
    "energy_cost": (["p", "w"], _eval_energy_cost),
}


def evaluate_inline(request: EvalRequest) -> EvalResponse:
    """Compute one metric from inline parameters.

    Metrics that need a topology (mic, etp, eett, etx_distance, hop_count)
    are rejected; use /route or /simulate for those.
    """
    name = request.metric
    if name not in _INLINE_EVALUATORS:
        if name in {m.value for m in MetricId}:
            raise SchemaError(
                f"metric '{name}' needs a topology; use the route or simulate commands"
            )
        raise SchemaError(f"unknown metric id '{name}'")
    allowed, fn = _INLINE_EVALUATORS[name]
    unknown = set(request.params) - set(allowed)
    if unknown:
        raise SchemaError(
            f"unknown parameter(s) for {name}: {', '.join(sorted(unknown))}"
            f" (expected: {', '.join(allowed)})"
        )
    result = fn(request.params)
    if isinstance(result, tuple):
        value, admissible = result
        return EvalResponse(
            metric=value.metric_id.value,
            value=value.value,
            direction=value.direction.value,
            admissible=admissible,
        )
    return EvalResponse(
        metric=result.metric_id.value, value=result.value, direction=result.direction.value
    )


def run_routes(request: ScenarioRequest) -> RoutesResponse:
    """Measure the scenario's links and select a route per requested metric,
    without replaying traffic."""
    scenario = scenario_from_model(request.scenario)
    scenario = apply_overrides(scenario, seed=request.seed, metric_ids=request.metrics)
    topology = scenario.topology
    estimates = {
        link: measure_link(topology, scenario.truths, link, scenario.measurement,
                           derive_seed(scenario.seed, 101, i))
        for i, link in enumerate(topology.links)
    }
    rows: list[RouteRow] = []
    for metric_id, config in scenario.metrics:
        try:
            req = RouteRequest(
                source=scenario.flow.src,
                destination=scenario.flow.dst,
                metric_id=metric_id,
                config=config,
                max_hops=min(EXHAUSTIVE_HOP_GUARD, max(1, len(topology.nodes) - 1)),
            )
            path, value = select_route(topology, estimates, req)
            rows.append(
                RouteRow(
                    metric=metric_id.value,
                    route=core.path_nodes(path),
                    channels=[l.channel for l in path],
                    value=value.value,
                    direction=value.direction.value,
                )
            )
        except MeshMetricsError as exc:
            rows.append(
                RouteRow(
                    metric=metric_id.value,
                    direction=direction_of(metric_id).value,
                    error=_label(exc),
                )
            )
    return RoutesResponse(rows=rows)


def run_simulation(request: ScenarioRequest) -> dict:
    """Full pipeline; returns the JSON report payload."""
    scenario = scenario_from_model(request.scenario)
    scenario = apply_overrides(scenario, seed=request.seed, metric_ids=request.metrics)
    report = run_scenario(scenario)
    return reporting.report_payload(report)


def run_comparison(request: ScenarioRequest) -> dict:
    """Full pipeline; returns only the comparison rows."""
    scenario = scenario_from_model(request.scenario)
    scenario = apply_overrides(scenario, seed=request.seed, metric_ids=request.metrics)
    report = run_scenario(scenario)
    return reporting.comparison_payload(compare_metrics(report))


def _label(exc: BaseException) -> str:
    return re.sub(r"(?<!^)(?=[A-Z])", "_", type(exc).__name__).lower()


app = FastAPI(
    title="meshmetrics",
    description="Link-quality routing metrics for wireless mesh networks",
    version="0.1.0",
)


def _http(exc: MeshMetricsError) -> HTTPException:
    status = 404 if isinstance(exc, NoRoute) else 422
    return HTTPException(status_code=status, detail=f"{_label(exc)}: {exc}")


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse()


@app.get("/metrics", response_model=list[MetricInfo])
def list_metrics() -> list[MetricInfo]:
    infos = []
    for metric_id in MetricId:
        inline = _INLINE_EVALUATORS.get(metric_id.value)
        infos.append(
            MetricInfo(
                id=metric_id.value,
                direction=direction_of(metric_id).value,
                inline_params=inline[0] if inline else None,
            )
        )
    return infos


@app.post("/eval", response_model=EvalResponse)
def eval_endpoint(request: EvalRequest) -> EvalResponse:
    try:
        return evaluate_inline(request)
    except (MeshMetricsError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


@app.post("/route", response_model=RoutesResponse)
def route_endpoint(request: ScenarioRequest) -> RoutesResponse:
    try:
        return run_routes(request)
    except MeshMetricsError as exc:
        raise _http(exc) from exc


@app.post("/simulate")
def simulate_endpoint(request: ScenarioRequest) -> dict:
    try:
        return run_simulation(request)
    except MeshMetricsError as exc:
        raise _http(exc) from exc


@app.post("/compare")
def compare_endpoint(request: ScenarioRequest) -> dict:
    try:
        return run_comparison(request)
    except MeshMetricsError as exc:
        raise _http(exc) from exc

"""Scenario-file schema and the conversions between wire format and domain
objects.

Scenario files are JSON with explicit units in field names (rate_bps,
overhead_s, switching_delay_s) so that a number can never be misread.  The
same pydantic models validate service request bodies, which keeps the file
format and the HTTP API in lockstep.
"""

from __future__ import annotations

import json
from pathlib import Path as FsPath
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from . import core
from .core import Link, MetricId
from .errors import InvariantViolation, MeshMetricsError, SchemaError
from .harness import FlowSpec, Scenario
from .linksim import (
    BernoulliLoss,
    FadingSnr,
    GilbertElliott,
    LinkTruth,
    LossModel,
    MeasurementConfig,
)
from .metrics import MetricConfig

_METRIC_IDS = {m.value: m for m in MetricId}
_CONFIG_FIELDS = {
    "beta",
    "w1",
    "w2",
    "max_retry",
    "loss_target_pal",
    "retrans_threshold_m",
    "packet_bits",
    "switching_delay_s",
    "interface_usage",
    "offered_load",
}


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class BernoulliSpec(_Strict):
    model: Literal["bernoulli"] = "bernoulli"
    p_f: float = 0.0
    p_r: float = 0.0


class GilbertElliottSpec(_Strict):
    model: Literal["gilbert_elliott"]
    p_good: float
    p_bad: float
    t_gb: float
    t_bg: float


class FadingSnrSpec(_Strict):
    model: Literal["fading_snr"]
    mean_snr_db: float
    sigma_db: float
    coherence_slots: int = 8


LossSpec = Annotated[
    Union[BernoulliSpec, GilbertElliottSpec, FadingSnrSpec],
    Field(discriminator="model"),
]


class LinkModel(_Strict):
    src: int = Field(alias="from")
    dst: int = Field(alias="to")
    channel: int = 0
    rate_bps: float = 1_000_000.0
    overhead_s: float = 0.0
    loss: LossSpec = Field(default_factory=BernoulliSpec)
    tau: float = 0.0
    max_retry: int = 7
    snr_db: float = 30.0


class MeasurementModel(_Strict):
    duration_s: int = 100
    window_s: int = 10
    probe_bits: int = 1024
    sinr_samples: int = 64
    pair_probes: int = 8
    pair_large_bits: int = 12000
    pair_jitter_s: float = 2e-4


class MetricModel(_Strict):
    id: str
    config: dict = Field(default_factory=dict)


class FlowModel(_Strict):
    src: int
    dst: int
    packets: int = 1000
    packet_bits: int = 8192
    offered_load: float = 1.0


class ScenarioModel(_Strict):
    nodes: list[int]
    links: list[LinkModel]
    channels: int = 1
    interference_range_hops: int = 1
    measurement: MeasurementModel = Field(default_factory=MeasurementModel)
    metrics: list[MetricModel] = Field(default_factory=lambda: [MetricModel(id="etx")])
    flow: FlowModel
    seed: int = 0


def _loss_to_domain(spec: BernoulliSpec | GilbertElliottSpec | FadingSnrSpec) -> LossModel:
    try:
        if isinstance(spec, BernoulliSpec):
            return BernoulliLoss(p_f=spec.p_f, p_r=spec.p_r)
        if isinstance(spec, GilbertElliottSpec):
            return GilbertElliott(
                p_good=spec.p_good, p_bad=spec.p_bad, t_gb=spec.t_gb, t_bg=spec.t_bg
            )
        return FadingSnr(
            mean_snr_db=spec.mean_snr_db,
            sigma_db=spec.sigma_db,
            coherence_slots=spec.coherence_slots,
        )
    except ValueError as exc:
        raise InvariantViolation(str(exc)) from exc


def _loss_to_dict(model: LossModel) -> dict:
    if isinstance(model, BernoulliLoss):
        return {"model": "bernoulli", "p_f": model.p_f, "p_r": model.p_r}
    if isinstance(model, GilbertElliott):
        return {
            "model": "gilbert_elliott",
            "p_good": model.p_good,
            "p_bad": model.p_bad,
            "t_gb": model.t_gb,
            "t_bg": model.t_bg,
        }
    return {
        "model": "fading_snr",
        "mean_snr_db": model.mean_snr_db,
        "sigma_db": model.sigma_db,
        "coherence_slots": model.coherence_slots,
    }


def metric_id_from_string(raw: str) -> MetricId:
    if raw not in _METRIC_IDS:
        known = ", ".join(sorted(_METRIC_IDS))
        raise SchemaError(f"unknown metric id '{raw}' (known: {known})")
    return _METRIC_IDS[raw]


def _metric_config_from_dict(raw: dict) -> MetricConfig:
    unknown = set(raw) - _CONFIG_FIELDS
    if unknown:
        raise SchemaError(f"unknown metric config field(s): {', '.join(sorted(unknown))}")
    kwargs = dict(raw)
    if "interface_usage" in kwargs:
        usage = kwargs["interface_usage"]
        if not isinstance(usage, dict):
            raise SchemaError("interface_usage must map channel to fraction")
        kwargs["interface_usage"] = {int(ch): float(u) for ch, u in usage.items()}
    return MetricConfig(**kwargs)


def _metric_config_to_dict(config: MetricConfig) -> dict:
    out: dict = {}
    defaults = MetricConfig()
    for name in sorted(_CONFIG_FIELDS):
        value = getattr(config, name)
        if name == "interface_usage":
            if dict(value) != dict(defaults.interface_usage):
                out[name] = {str(ch): u for ch, u in sorted(dict(value).items())}
        elif value != getattr(defaults, name):
            out[name] = value
    return out


def scenario_from_model(model: ScenarioModel) -> Scenario:
    """Turn a validated scenario document into domain objects.

    Structural problems surface as SchemaError; semantic bound violations
    (beta outside [0,1], negative probabilities...) as InvariantViolation.
    """
    links: list[Link] = []
    truths: dict[Link, LinkTruth] = {}
    try:
        for spec in model.links:
            link = Link(
                src=spec.src,
                dst=spec.dst,
                channel=spec.channel,
                rate_bps=spec.rate_bps,
                overhead_s=spec.overhead_s,
            )
            links.append(link)
            truths[link] = LinkTruth(
                link=link,
                loss_model=_loss_to_domain(spec.loss),
                max_retry=spec.max_retry,
                tau=spec.tau,
                snr_db=spec.snr_db,
            )
        topology = core.build_topology(
            model.nodes,
            links,
            channel_count=model.channels,
            interference_range_hops=model.interference_range_hops,
        )
        measurement = MeasurementConfig(
            duration_s=model.measurement.duration_s,
            window_s=model.measurement.window_s,
            probe_bits=model.measurement.probe_bits,
            sinr_samples=model.measurement.sinr_samples,
            pair_probes=model.measurement.pair_probes,
            pair_large_bits=model.measurement.pair_large_bits,
            pair_jitter_s=model.measurement.pair_jitter_s,
        )
        metrics = tuple(
            (metric_id_from_string(m.id), _metric_config_from_dict(m.config))
            for m in model.metrics
        )
        flow = FlowSpec(
            src=model.flow.src,
            dst=model.flow.dst,
            packets=model.flow.packets,
            packet_bits=model.flow.packet_bits,
            offered_load=model.flow.offered_load,
        )
        if model.seed < 0:
            raise InvariantViolation("seed must be >= 0")
    except (SchemaError, InvariantViolation):
        raise
    except ValueError as exc:
        raise InvariantViolation(str(exc)) from exc
    except MeshMetricsError as exc:
        raise InvariantViolation(str(exc)) from exc
    return Scenario(
        topology=topology,
        truths=truths,
        measurement=measurement,
        metrics=metrics,
        flow=flow,
        seed=model.seed,
    )


def _format_validation_error(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(piece) for piece in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def scenario_from_dict(document: dict) -> Scenario:
    try:
        model = ScenarioModel.model_validate(document)
    except ValidationError as exc:
        raise SchemaError(_format_validation_error(exc)) from exc
    return scenario_from_model(model)


def parse_scenario_file(path: str | FsPath) -> Scenario:
    """Load, validate and default-fill a scenario file."""
    path = FsPath(path)
    if not path.exists():
        raise FileNotFoundError(f"scenario file not found: {path}")
    try:
        document = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(document, dict):
        raise SchemaError("scenario file must contain a JSON object")
    return scenario_from_dict(document)


def scenario_to_dict(scenario: Scenario) -> dict:
    """Serialize a scenario back to its file form (parse round-trips to the
    identical Scenario)."""
    links = []
    for link in scenario.topology.links:
        truth = scenario.truths[link]
        links.append(
            {
                "from": link.src,
                "to": link.dst,
                "channel": link.channel,
                "rate_bps": link.rate_bps,
                "overhead_s": link.overhead_s,
                "loss": _loss_to_dict(truth.loss_model),
                "tau": truth.tau,
                "max_retry": truth.max_retry,
                "snr_db": truth.snr_db,
            }
        )
    m = scenario.measurement
    return {
        "nodes": sorted(scenario.topology.nodes),
        "links": links,
        "channels": scenario.topology.channel_count,
        "interference_range_hops": scenario.topology.interference_range_hops,
        "measurement": {
            "duration_s": m.duration_s,
            "window_s": m.window_s,
            "probe_bits": m.probe_bits,
            "sinr_samples": m.sinr_samples,
            "pair_probes": m.pair_probes,
            "pair_large_bits": m.pair_large_bits,
            "pair_jitter_s": m.pair_jitter_s,
        },
        "metrics": [
            {"id": mid.value, "config": _metric_config_to_dict(cfg)}
            for mid, cfg in scenario.metrics
        ],
        "flow": {
            "src": scenario.flow.src,
            "dst": scenario.flow.dst,
            "packets": scenario.flow.packets,
            "packet_bits": scenario.flow.packet_bits,
            "offered_load": scenario.flow.offered_load,
        },
        "seed": scenario.seed,
    }


def apply_overrides(
    scenario: Scenario, seed: int | None = None, metric_ids: list[str] | None = None
) -> Scenario:
    """Apply a CLI/service seed override and metric filter to a scenario.

    Filtered metrics keep their file config when present and fall back to
    defaults otherwise; the filter's order wins.
    """
    metrics = scenario.metrics
    if metric_ids is not None:
        configured = {mid: cfg for mid, cfg in scenario.metrics}
        wanted = [metric_id_from_string(raw) for raw in metric_ids]
        metrics = tuple((mid, configured.get(mid, MetricConfig())) for mid in wanted)
    return Scenario(
        topology=scenario.topology,
        truths=scenario.truths,
        measurement=scenario.measurement,
        metrics=metrics,
        flow=scenario.flow,
        seed=scenario.seed if seed is None else seed,
    )

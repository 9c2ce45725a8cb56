"""End-to-end scenarios: measure every link, select a route per metric,
replay the flow over each route, and tabulate the outcomes.

The replayer abstracts the MAC to per-hop independent transmission attempts
truncated at max_retry + 1; contention only stretches serialization time by
the number of same-channel route links sharing the air.  All metric rows of
one scenario replay with common random numbers so route choice, not noise,
drives the comparison.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import core
from .core import Link, MetricId, NodeId, Path, Topology
from .errors import InvalidRoute, InvariantViolation, MeshMetricsError
from .linksim import LinkEstimate, LinkTruth, MeasurementConfig, measure_link, slot_success_probs
from .metrics import MetricConfig
from .routing import EXHAUSTIVE_HOP_GUARD, RouteRequest, select_route


@dataclass(frozen=True)
class FlowSpec:
    """One unicast flow replayed over every selected route."""

    src: NodeId
    dst: NodeId
    packets: int = 1000
    packet_bits: int = 8192
    offered_load: float = 1.0

    def __post_init__(self) -> None:
        if self.packets < 1:
            raise InvariantViolation("flow must offer at least one packet")
        if self.packet_bits < 1:
            raise InvariantViolation("packet_bits must be >= 1")
        if not 0.0 <= self.offered_load <= 1.0:
            raise InvariantViolation("offered_load must be in [0,1]")


@dataclass(frozen=True)
class Scenario:
    """A full experiment: topology, ground truth, measurement plan, metrics
    to compare, the flow to replay, and the master seed."""

    topology: Topology
    truths: Mapping[Link, LinkTruth]
    measurement: MeasurementConfig
    metrics: tuple[tuple[MetricId, MetricConfig], ...]
    flow: FlowSpec
    seed: int = 0


@dataclass(frozen=True)
class FlowResult:
    delivered: int
    offered: int
    availability: float
    ant_per_link: Mapping[Link, float]
    throughput_bps: float
    route: Path


@dataclass(frozen=True)
class MetricOutcome:
    """Route selection plus replay for one metric, or the error that stopped it."""

    metric_id: MetricId
    metric_value: float | None = None
    flow: FlowResult | None = None
    error: str | None = None


@dataclass(frozen=True)
class ScenarioReport:
    scenario: Scenario
    rows: tuple[MetricOutcome, ...]
    link_estimates: Mapping[Link, LinkEstimate]
    seed: int


@dataclass(frozen=True)
class ComparisonRow:
    metric: str
    route: str
    hops: int | None
    metric_value: float | None
    availability: float | None
    mean_ant: float | None
    throughput_bps: float | None
    error: str | None = None


@dataclass(frozen=True)
class ComparisonTable:
    rows: tuple[ComparisonRow, ...]


def derive_seed(master: int, *tags: int) -> int:
    """Stable child seed for an independent random stream."""
    sequence = np.random.SeedSequence([master, *tags])
    return int(sequence.generate_state(1, np.uint64)[0])


def _error_label(exc: BaseException) -> str:
    name = type(exc).__name__
    return re.sub(r"(?<!^)(?=[A-Z])", "_", name).lower()


def replay_flow(
    topology: Topology,
    truths: Mapping[Link, LinkTruth],
    route: Path,
    flow: FlowSpec,
    max_retry: int,
    seed: int,
) -> FlowResult:
    """Push the flow's packets hop by hop over the route.

    Each hop attempt succeeds with the channel's instantaneous bidirectional
    success probability (data frame and ACK); after max_retry + 1 failed
    attempts the packet is dropped.  Throughput divides delivered bits by the
    total air time spent, where each attempt costs the frame overhead plus the
    serialization time stretched by same-channel contention on the route.
    """
    if max_retry < 1:
        raise InvalidRoute("max_retry must be >= 1")
    if not route:
        raise InvalidRoute("route is empty")
    try:
        core.validate_path(topology, route)
    except MeshMetricsError as exc:
        raise InvalidRoute(str(exc)) from exc
    if route[0].src != flow.src or route[-1].dst != flow.dst:
        raise InvalidRoute(
            f"route {'->'.join(map(str, core.path_nodes(route)))} does not serve "
            f"flow {flow.src}->{flow.dst}"
        )
    for link in route:
        if link not in truths:
            raise InvalidRoute(f"no truth for route link {link}")

    attempts_cap = max_retry + 1
    n_hops = len(route)
    max_slots = flow.packets * attempts_cap

    route_links = set(route)
    contention = []
    success = []
    for h, link in enumerate(route):
        interferers = core.interference_set(topology, link)
        contention.append(sum(1 for other in route_links if other in interferers))
        rng_f = np.random.default_rng(np.random.SeedSequence([seed, 21, h]))
        rng_r = np.random.default_rng(np.random.SeedSequence([seed, 22, h]))
        s_f = slot_success_probs(truths[link], False, max_slots, flow.packet_bits, rng_f)
        s_r = slot_success_probs(truths[link], True, max_slots, flow.packet_bits, rng_r)
        success.append(s_f * s_r)

    rng_u = np.random.default_rng(np.random.SeedSequence([seed, 23]))
    uniforms = rng_u.random((flow.packets, n_hops, attempts_cap))

    slot = [0] * n_hops
    attempts_ok = [0] * n_hops
    crossings = [0] * n_hops
    busy_s = 0.0
    delivered = 0

    for p in range(flow.packets):
        alive = True
        for h, link in enumerate(route):
            if not alive:
                break
            made = 0
            crossed = False
            for a in range(attempts_cap):
                s = success[h][slot[h]]
                slot[h] += 1
                made += 1
                if uniforms[p, h, a] < s:
                    crossed = True
                    break
            busy_s += made * (link.overhead_s + flow.packet_bits * contention[h] / link.rate_bps)
            if crossed:
                attempts_ok[h] += made
                crossings[h] += 1
            else:
                alive = False
        if alive:
            delivered += 1

    ant = {
        route[h]: attempts_ok[h] / crossings[h] for h in range(n_hops) if crossings[h] > 0
    }
    throughput = delivered * flow.packet_bits / busy_s if busy_s > 0 else 0.0
    return FlowResult(
        delivered=delivered,
        offered=flow.packets,
        availability=delivered / flow.packets,
        ant_per_link=ant,
        throughput_bps=throughput,
        route=route,
    )


def _requested_metrics(scenario: Scenario) -> list[tuple[MetricId, MetricConfig]]:
    """hop_count baseline first, then the scenario's metrics in order."""
    rows: list[tuple[MetricId, MetricConfig]] = []
    if all(mid != MetricId.HOP_COUNT for mid, _ in scenario.metrics):
        rows.append((MetricId.HOP_COUNT, MetricConfig()))
    rows.extend(scenario.metrics)
    return rows


def run_scenario(scenario: Scenario) -> ScenarioReport:
    """Measure, route, replay and report.  Per-metric routing failures are
    recorded as error rows; only an invalid scenario is fatal."""
    topology = scenario.topology
    if scenario.flow.src not in topology.nodes or scenario.flow.dst not in topology.nodes:
        raise InvariantViolation("flow endpoints must be topology nodes")
    if scenario.flow.src == scenario.flow.dst:
        raise InvariantViolation("flow source and destination must differ")
    for link in topology.links:
        if link not in scenario.truths:
            raise InvariantViolation(f"scenario is missing truth for link {link}")

    estimates = {
        link: measure_link(
            topology, scenario.truths, link, scenario.measurement, derive_seed(scenario.seed, 101, i)
        )
        for i, link in enumerate(topology.links)
    }

    replay_seed = derive_seed(scenario.seed, 7)
    max_hops = min(EXHAUSTIVE_HOP_GUARD, max(1, len(topology.nodes) - 1))

    rows: list[MetricOutcome] = []
    for metric_id, config in _requested_metrics(scenario):
        cfg = _with_flow_load(config, scenario.flow.offered_load)
        request = RouteRequest(
            source=scenario.flow.src,
            destination=scenario.flow.dst,
            metric_id=metric_id,
            config=cfg,
            max_hops=max_hops,
        )
        try:
            path, value = select_route(topology, estimates, request)
            max_retry = max(scenario.truths[l].max_retry for l in path)
            flow = replay_flow(topology, scenario.truths, path, scenario.flow, max_retry, replay_seed)
            rows.append(MetricOutcome(metric_id=metric_id, metric_value=value.value, flow=flow))
        except MeshMetricsError as exc:
            rows.append(MetricOutcome(metric_id=metric_id, error=_error_label(exc)))

    return ScenarioReport(
        scenario=scenario,
        rows=tuple(rows),
        link_estimates=estimates,
        seed=scenario.seed,
    )


def _with_flow_load(config: MetricConfig, offered_load: float) -> MetricConfig:
    """Propagate the flow's offered load into the contention-degree default."""
    if config.offered_load == offered_load:
        return config
    return MetricConfig(
        beta=config.beta,
        w1=config.w1,
        w2=config.w2,
        max_retry=config.max_retry,
        loss_target_pal=config.loss_target_pal,
        retrans_threshold_m=config.retrans_threshold_m,
        packet_bits=config.packet_bits,
        switching_delay_s=config.switching_delay_s,
        interface_usage=config.interface_usage,
        offered_load=offered_load,
    )


def _route_text(route: Path) -> str:
    return "->".join(str(n) for n in core.path_nodes(route))


def _mean_ant(flow: FlowResult) -> float | None:
    if not flow.ant_per_link:
        return None
    values = list(flow.ant_per_link.values())
    return sum(values) / len(values)


def compare_metrics(report: ScenarioReport) -> ComparisonTable:
    """Flatten a scenario report into one comparison row per metric."""
    rows = []
    for outcome in report.rows:
        if outcome.error is not None or outcome.flow is None:
            rows.append(
                ComparisonRow(
                    metric=outcome.metric_id.value,
                    route="",
                    hops=None,
                    metric_value=None,
                    availability=None,
                    mean_ant=None,
                    throughput_bps=None,
                    error=outcome.error or "no_route",
                )
            )
            continue
        flow = outcome.flow
        rows.append(
            ComparisonRow(
                metric=outcome.metric_id.value,
                route=_route_text(flow.route),
                hops=len(flow.route),
                metric_value=outcome.metric_value,
                availability=flow.availability,
                mean_ant=_mean_ant(flow),
                throughput_bps=flow.throughput_bps,
            )
        )
    return ComparisonTable(rows=tuple(rows))

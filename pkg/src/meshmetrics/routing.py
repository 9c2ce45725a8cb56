"""Route selection under each metric.

Additive metrics use a label-setting shortest path; end-to-end metrics whose
cost is not isotone (the busiest-channel term, channel-switching coupling,
bottleneck aggregation) are solved exactly by enumerating simple paths under
an explicit budget; the recursive energy-style cost composes monotonically and
gets its own label-setting search.

Every search breaks ties the same way - fewer hops, then lowest node
sequence, then lowest channel sequence - so selections are replayable
byte-for-byte.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping

from . import core, metrics
from .core import Direction, Link, MetricId, MetricValue, NodeId, Path, Topology, metric_value
from .errors import (
    LocalMinimum,
    MetricError,
    NoRoute,
    SearchBudgetExceeded,
)
from .linksim import LinkEstimate
from .metrics import EtpHop, MetricConfig, MicHop, MtmHop

EXHAUSTIVE_NODE_GUARD = 12
EXHAUSTIVE_HOP_GUARD = 10


@dataclass(frozen=True)
class RouteRequest:
    """What to route, under which metric, with which enumeration budget."""

    source: NodeId
    destination: NodeId
    metric_id: MetricId
    config: MetricConfig = field(default_factory=MetricConfig)
    max_hops: int = 8

    def __post_init__(self) -> None:
        if self.source == self.destination:
            raise ValueError("source and destination must differ")
        if self.max_hops < 1:
            raise ValueError("max_hops must be >= 1")


@dataclass(frozen=True)
class DistanceTable:
    """Minimal path cost between node pairs; absent entries mean disconnected."""

    entries: Mapping[tuple[NodeId, NodeId], float]

    def delta(self, src: NodeId, dst: NodeId) -> float | None:
        return self.entries.get((src, dst))


def _check_costs(link_costs: Mapping[Link, float]) -> None:
    for link, cost in link_costs.items():
        if not math.isfinite(cost) or cost < 0:
            raise ValueError(f"cost for {link} must be finite and >= 0, got {cost}")


def _adjacency(links) -> dict[NodeId, list[Link]]:
    adj: dict[NodeId, list[Link]] = {}
    for link in sorted(links):
        adj.setdefault(link.src, []).append(link)
    return adj


def shortest_path_additive(
    topology: Topology,
    link_costs: Mapping[Link, float],
    source: NodeId,
    destination: NodeId,
) -> Path:
    """Minimum-total-cost simple path over the links present in link_costs.

    Links absent from link_costs are treated as pruned.  Label-setting over
    the composite key (cost, hops, node sequence, channel sequence) makes the
    result and its tie-breaks deterministic.
    """
    _check_costs(link_costs)
    if source not in topology.nodes or destination not in topology.nodes:
        raise ValueError("source and destination must be topology nodes")
    adj = _adjacency(link_costs.keys())

    start = (0.0, 0, (source,), (), ())
    heap = [start]
    done: set[NodeId] = set()
    while heap:
        cost, hops, nodeseq, chseq, links = heapq.heappop(heap)
        node = nodeseq[-1]
        if node in done:
            continue
        done.add(node)
        if node == destination:
            return tuple(links)
        for link in adj.get(node, ()):
            if link.dst in done or link.dst in nodeseq:
                continue
            heapq.heappush(
                heap,
                (
                    cost + link_costs[link],
                    hops + 1,
                    nodeseq + (link.dst,),
                    chseq + (link.channel,),
                    links + (link,),
                ),
            )
    raise NoRoute(f"no path from {source} to {destination}")


def _simple_paths(
    adj: dict[NodeId, list[Link]], source: NodeId, destination: NodeId, max_hops: int
) -> Iterator[Path]:
    """All simple paths source->destination up to max_hops links, in
    lexicographic (node sequence, channel sequence) order."""
    stack: list[Link] = []
    visited = {source}

    def walk(node: NodeId) -> Iterator[Path]:
        if node == destination:
            yield tuple(stack)
            return
        if len(stack) >= max_hops:
            return
        for link in adj.get(node, ()):
            if link.dst in visited:
                continue
            stack.append(link)
            visited.add(link.dst)
            yield from walk(link.dst)
            visited.remove(link.dst)
            stack.pop()

    yield from walk(source)


def best_path_exhaustive(
    topology: Topology,
    request: RouteRequest,
    path_evaluator: Callable[[Path], MetricValue],
) -> tuple[Path, MetricValue]:
    """Enumerate every simple path within the budget and keep the best one
    under the evaluator's direction.  Exact for non-isotonic metrics; paths
    the evaluator rejects (dead link, full outage...) are skipped."""
    if len(topology.nodes) > EXHAUSTIVE_NODE_GUARD:
        raise SearchBudgetExceeded(
            f"{len(topology.nodes)} nodes exceeds the enumeration guard of {EXHAUSTIVE_NODE_GUARD}"
        )
    if request.max_hops > EXHAUSTIVE_HOP_GUARD:
        raise SearchBudgetExceeded(
            f"max_hops {request.max_hops} exceeds the enumeration guard of {EXHAUSTIVE_HOP_GUARD}"
        )
    adj = _adjacency(topology.links)

    best_key = None
    best: tuple[Path, MetricValue] | None = None
    for path in _simple_paths(adj, request.source, request.destination, request.max_hops):
        try:
            value = path_evaluator(path)
        except MetricError:
            continue
        signed = value.value if value.direction == Direction.MINIMIZE else -value.value
        key = (
            signed,
            len(path),
            tuple(core.path_nodes(path)),
            tuple(l.channel for l in path),
        )
        if best_key is None or key < best_key:
            best_key = key
            best = (path, value)
    if best is None:
        raise NoRoute(f"no path from {request.source} to {request.destination}")
    return best


def best_path_recursive(
    topology: Topology,
    error_rates: Mapping[Link, float],
    source: NodeId,
    destination: NodeId,
    energies: Mapping[Link, float] | None = None,
) -> tuple[Path, MetricValue]:
    """Minimize the recursive lossy-delivery cost C' = (C + W) / (1 - p).

    The composition is monotone and isotone, so greedy label-setting is exact.
    With unit energies (the default) the optimum is the multicast transmission
    count; explicit energies give the energy-cost metric.
    """
    metric_id = MetricId.MULTICAST_ETX if energies is None else MetricId.ENERGY_COST
    for link, p in error_rates.items():
        if not 0.0 <= p < 1.0:
            raise ValueError(f"error rate for {link} must be in [0,1), got {p}")
    if energies is not None and any(w < 0 for w in energies.values()):
        raise ValueError("energies must be >= 0")
    adj = _adjacency(error_rates.keys())

    heap = [(0.0, 0, (source,), (), ())]
    done: set[NodeId] = set()
    while heap:
        cost, hops, nodeseq, chseq, links = heapq.heappop(heap)
        node = nodeseq[-1]
        if node in done:
            continue
        done.add(node)
        if node == destination:
            return tuple(links), metric_value(metric_id, cost)
        for link in adj.get(node, ()):
            if link.dst in done or link.dst in nodeseq:
                continue
            weight = 1.0 if energies is None else energies[link]
            heapq.heappush(
                heap,
                (
                    (cost + weight) / (1.0 - error_rates[link]),
                    hops + 1,
                    nodeseq + (link.dst,),
                    chseq + (link.channel,),
                    links + (link,),
                ),
            )
    raise NoRoute(f"no path from {source} to {destination}")


def etx_distance_table(topology: Topology, link_etx: Mapping[Link, float]) -> DistanceTable:
    """All-pairs minimal path transmission count; the distance a greedy
    forwarder compares neighbors by."""
    _check_costs(link_etx)
    adj = _adjacency(link_etx.keys())
    entries: dict[tuple[NodeId, NodeId], float] = {}
    for source in sorted(topology.nodes):
        dist = {source: 0.0}
        heap = [(0.0, source)]
        seen: set[NodeId] = set()
        while heap:
            d, u = heapq.heappop(heap)
            if u in seen:
                continue
            seen.add(u)
            for link in adj.get(u, ()):
                nd = d + link_etx[link]
                if nd < dist.get(link.dst, math.inf):
                    dist[link.dst] = nd
                    heapq.heappush(heap, (nd, link.dst))
        for target, d in dist.items():
            entries[(source, target)] = d
    return DistanceTable(entries=entries)


def greedy_forward(
    topology: Topology, table: DistanceTable, source: NodeId, destination: NodeId
) -> Path:
    """Forward hop by hop to the out-neighbor with the smallest distance to
    the destination.

    With an exact table on a connected graph the distance strictly decreases
    every hop (each link costs at least one transmission), so delivery is
    guaranteed; LocalMinimum is kept for approximate tables.
    """
    if source == destination:
        raise ValueError("source and destination must differ")
    adj = _adjacency(topology.links)
    path: list[Link] = []
    node = source
    visited = {source}
    while node != destination:
        current = table.delta(node, destination)
        candidates: list[tuple[float, NodeId, Link]] = []
        for link in adj.get(node, ()):
            remaining = 0.0 if link.dst == destination else table.delta(link.dst, destination)
            if remaining is not None:
                candidates.append((remaining, link.dst, link))
        if not candidates or current is None:
            raise NoRoute(f"no forwarding option from {node} toward {destination}")
        remaining, nxt, link = min(candidates)
        if remaining >= current:
            raise LocalMinimum(
                f"no neighbor of {node} improves the distance to {destination}"
            )
        if nxt in visited:
            raise LocalMinimum(f"greedy forwarding revisited node {nxt}")
        path.append(link)
        visited.add(nxt)
        node = nxt
    return tuple(path)


ADDITIVE_METRICS = frozenset(
    {
        MetricId.ETX,
        MetricId.MODIFIED_ETX,
        MetricId.ENT,
        MetricId.ETT,
        MetricId.IAWARE,
        MetricId.DBETX,
        MetricId.MTM,
        MetricId.ESTDTT,
        MetricId.HOP_COUNT,
    }
)

EXHAUSTIVE_METRICS = frozenset(
    {
        MetricId.WCETT,
        MetricId.MCR,
        MetricId.MIC,
        MetricId.EETT,
        MetricId.ETP,
        MetricId.EDR,
    }
)


def _live_links(
    topology: Topology, estimates: Mapping[Link, LinkEstimate]
) -> dict[Link, LinkEstimate]:
    for link in topology.links:
        if link not in estimates:
            raise ValueError(f"estimates must cover every link, missing {link}")
    return {l: e for l, e in estimates.items() if l in set(topology.links) and e.d_f > 0 and e.d_r > 0}


def _pruned_topology(topology: Topology, live: Mapping[Link, LinkEstimate]) -> Topology:
    return Topology(
        nodes=topology.nodes,
        links=tuple(sorted(live.keys())),
        channel_count=topology.channel_count,
        interference_range_hops=topology.interference_range_hops,
    )


def select_route(
    topology: Topology,
    estimates: Mapping[Link, LinkEstimate],
    request: RouteRequest,
) -> tuple[Path, MetricValue]:
    """Pick the route a given metric would install, plus its figure of merit.

    Links dead in either direction are pruned up front; the metric decides the
    search strategy (additive, exhaustive, recursive fold, or distance-table
    greedy forwarding).
    """
    live = _live_links(topology, estimates)
    pruned = _pruned_topology(topology, live)
    cfg = request.config
    mid = request.metric_id

    def etx_of(link: Link) -> float:
        e = live[link]
        return metrics.etx(e.d_f, e.d_r).value

    def ett_of(link: Link) -> float:
        e = live[link]
        return metrics.ett(etx_of(link), cfg.packet_bits, e.bandwidth_bps).value

    if mid in ADDITIVE_METRICS:
        costs = _additive_costs(mid, live, cfg, ett_of, etx_of)
        path = shortest_path_additive(pruned, costs, request.source, request.destination)
        value = metric_value(mid, sum(costs[l] for l in path))
    elif mid in EXHAUSTIVE_METRICS:
        evaluator = _path_evaluator(mid, pruned, live, cfg, ett_of)
        path, value = best_path_exhaustive(pruned, request, evaluator)
    elif mid in (MetricId.MULTICAST_ETX, MetricId.ENERGY_COST):
        rates = {l: 1.0 - e.d_f * e.d_r for l, e in live.items()}
        energies = None if mid == MetricId.MULTICAST_ETX else {l: 1.0 for l in live}
        path, value = best_path_recursive(
            pruned, rates, request.source, request.destination, energies=energies
        )
    elif mid == MetricId.ETX_DISTANCE:
        link_etx = {l: etx_of(l) for l in live}
        table = etx_distance_table(pruned, link_etx)
        path = greedy_forward(pruned, table, request.source, request.destination)
        value = metric_value(mid, sum(link_etx[l] for l in path))
    else:
        raise ValueError(f"unsupported metric id {mid!r}")

    core.validate_path(pruned, path)
    return path, value


def _additive_costs(
    mid: MetricId,
    live: Mapping[Link, LinkEstimate],
    cfg: MetricConfig,
    ett_of: Callable[[Link], float],
    etx_of: Callable[[Link], float],
) -> dict[Link, float]:
    costs: dict[Link, float] = {}
    for link, e in live.items():
        if mid == MetricId.ETX:
            costs[link] = etx_of(link)
        elif mid == MetricId.MODIFIED_ETX:
            costs[link] = metrics.modified_etx(e.mu, e.sigma2).value
        elif mid == MetricId.ENT:
            value, admissible = metrics.ent(e.mu, e.sigma2, cfg)
            if admissible:
                costs[link] = value.value
        elif mid == MetricId.ETT:
            costs[link] = ett_of(link)
        elif mid == MetricId.IAWARE:
            costs[link] = metrics.iaware(ett_of(link), e.snr, e.sinr).value
        elif mid == MetricId.DBETX:
            try:
                costs[link] = metrics.dbetx(e.snir_samples, cfg.packet_bits, cfg.max_retry).value
            except MetricError:
                continue  # fully-outaged link: treat as dead
        elif mid == MetricId.MTM:
            hop = MtmHop(link.overhead_s, link.rate_bps, e.d_f * e.d_r)
            costs[link] = metrics.mtm([hop], cfg.packet_bits).value
        elif mid == MetricId.ESTDTT:
            costs[link] = metrics.estd_tt(etx_of(link), link.rate_bps).value
        elif mid == MetricId.HOP_COUNT:
            costs[link] = 1.0
    return costs


def _path_evaluator(
    mid: MetricId,
    pruned: Topology,
    live: Mapping[Link, LinkEstimate],
    cfg: MetricConfig,
    ett_of: Callable[[Link], float],
) -> Callable[[Path], MetricValue]:
    ett_map = {l: ett_of(l) for l in live}

    if mid == MetricId.WCETT:
        return lambda path: metrics.wcett(
            [ett_map[l] for l in path], [l.channel for l in path], cfg.beta
        )

    if mid == MetricId.MCR:
        return lambda path: metrics.mcr(
            [ett_map[l] for l in path],
            [l.channel for l in path],
            cfg.beta,
            cfg.switching_delay_s,
            cfg.interface_usage,
        )

    if mid == MetricId.MIC:
        min_ett = min(ett_map.values())
        n = len(pruned.nodes)

        def eval_mic(path: Path) -> MetricValue:
            hops = [MicHop(ett_map[l], live[l].interferer_count, l.channel) for l in path]
            return metrics.mic(hops, n, min_ett, cfg)

        return eval_mic

    if mid == MetricId.EETT:
        eett_map = {
            l: metrics.eett(l, {m: ett_map[m] for m in core.interference_set(pruned, l)}).value
            for l in live
        }

        def eval_eett(path: Path) -> MetricValue:
            return metric_value(MetricId.EETT, sum(eett_map[l] for l in path))

        return eval_eett

    if mid == MetricId.ETP:

        def eval_etp(path: Path) -> MetricValue:
            hops = [EtpHop(l.rate_bps, live[l].d_f, live[l].d_r) for l in path]
            contention = []
            for link in path:
                interferers = core.interference_set(pruned, link)
                contention.append({j for j, other in enumerate(path) if other in interferers})
            return metrics.etp(hops, contention)

        return eval_etp

    if mid == MetricId.EDR:
        tcd = min(1.0, cfg.offered_load)

        def eval_edr(path: Path) -> MetricValue:
            per_link = []
            for link in path:
                interferers = core.interference_set(pruned, link)
                tcds = [tcd for other in path if other in interferers]
                per_link.append(metrics.edr(link.rate_bps, ett_map[link], tcds).value)
            return metric_value(MetricId.EDR, min(per_link))

        return eval_edr

    raise ValueError(f"no path evaluator for {mid!r}")

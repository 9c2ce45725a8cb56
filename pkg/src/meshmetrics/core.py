"""Domain types shared by all modules: nodes, links, topologies, paths, metric values.

Everything here is immutable after construction and safe to share across
threads.  Links are directed: a bidirectional radio link is modeled as two
directed links, because delivery ratios differ per direction.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .errors import (
    ChannelOutOfRange,
    DanglingEndpoint,
    Discontiguous,
    DuplicateLink,
    RepeatedNode,
    UnknownLink,
)

NodeId = int
ChannelId = int

DEFAULT_RATE_BPS = 1_000_000.0


@dataclass(frozen=True, order=True)
class Link:
    """A directed radio link on one channel.

    rate_bps is the nominal bit rate; overhead_s is the fixed per-frame
    MAC/PHY cost in seconds.
    """

    src: NodeId
    dst: NodeId
    channel: ChannelId = 0
    rate_bps: float = DEFAULT_RATE_BPS
    overhead_s: float = 0.0

    def __post_init__(self) -> None:
        if self.src == self.dst:
            raise ValueError(f"link endpoints must differ, got {self.src}->{self.dst}")
        if self.rate_bps <= 0:
            raise ValueError(f"link rate must be positive, got {self.rate_bps}")
        if self.overhead_s < 0:
            raise ValueError(f"link overhead must be >= 0, got {self.overhead_s}")

    @property
    def key(self) -> tuple[NodeId, NodeId, ChannelId]:
        return (self.src, self.dst, self.channel)

    def __str__(self) -> str:
        return f"{self.src}->{self.dst}@{self.channel}"


Path = tuple[Link, ...]


@dataclass(frozen=True)
class Topology:
    """Nodes, directed links, channel budget and the interference range in hops."""

    nodes: frozenset[NodeId]
    links: tuple[Link, ...]
    channel_count: int = 1
    interference_range_hops: int = 1

    def has_link(self, link: Link) -> bool:
        return link in set(self.links)

    def out_links(self, node: NodeId) -> tuple[Link, ...]:
        return tuple(l for l in self.links if l.src == node)


def build_topology(
    nodes: Iterable[NodeId],
    links: Iterable[Link],
    channel_count: int = 1,
    interference_range_hops: int = 1,
) -> Topology:
    """Validate and freeze a topology.

    Rejects links whose endpoints are not declared (DanglingEndpoint), whose
    channel is outside [0, channel_count) (ChannelOutOfRange), and duplicate
    (src, dst, channel) triples (DuplicateLink).
    """
    node_set = frozenset(nodes)
    if any(n < 0 for n in node_set):
        raise ValueError("node ids must be non-negative")
    if channel_count < 1:
        raise ValueError(f"channel_count must be >= 1, got {channel_count}")
    if interference_range_hops < 0:
        raise ValueError("interference_range_hops must be >= 0")

    seen: set[tuple[NodeId, NodeId, ChannelId]] = set()
    checked: list[Link] = []
    for link in links:
        for endpoint in (link.src, link.dst):
            if endpoint not in node_set:
                raise DanglingEndpoint(f"link {link} references unknown node {endpoint}")
        if not 0 <= link.channel < channel_count:
            raise ChannelOutOfRange(
                f"link {link} uses channel {link.channel}, valid range is [0, {channel_count})"
            )
        if link.key in seen:
            raise DuplicateLink(f"duplicate link {link}")
        seen.add(link.key)
        checked.append(link)

    return Topology(
        nodes=node_set,
        links=tuple(sorted(checked)),
        channel_count=channel_count,
        interference_range_hops=interference_range_hops,
    )


def _undirected_neighbors(topology: Topology) -> dict[NodeId, set[NodeId]]:
    adj: dict[NodeId, set[NodeId]] = {n: set() for n in topology.nodes}
    for link in topology.links:
        adj[link.src].add(link.dst)
        adj[link.dst].add(link.src)
    return adj


def hop_distances(topology: Topology, sources: Iterable[NodeId], limit: int | None = None) -> dict[NodeId, int]:
    """BFS hop distance from the nearest of `sources` on the undirected node
    graph, ignoring channels.  Nodes beyond `limit` hops are omitted."""
    adj = _undirected_neighbors(topology)
    dist: dict[NodeId, int] = {}
    queue: deque[NodeId] = deque()
    for s in sources:
        if s in topology.nodes and s not in dist:
            dist[s] = 0
            queue.append(s)
    while queue:
        u = queue.popleft()
        if limit is not None and dist[u] >= limit:
            continue
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def interference_set(topology: Topology, link: Link) -> frozenset[Link]:
    """Links that interfere with `link`: same channel, nearer endpoint within
    interference_range_hops of either endpoint of `link`.  Always contains
    the link itself."""
    if not topology.has_link(link):
        raise UnknownLink(f"link {link} is not in the topology")
    reach = hop_distances(topology, (link.src, link.dst), limit=topology.interference_range_hops)
    members = {
        other
        for other in topology.links
        if other.channel == link.channel and (other.src in reach or other.dst in reach)
    }
    members.add(link)
    return frozenset(members)


def interfering_nodes(topology: Topology, link: Link) -> frozenset[NodeId]:
    """Nodes whose links interfere with `link`, excluding its own endpoints.

    This is the position-based interferer count consumed by interference-aware
    metrics; whether a node actually transmits is weighted elsewhere.
    """
    others = interference_set(topology, link) - {link}
    nodes = {n for l in others for n in (l.src, l.dst)}
    return frozenset(nodes - {link.src, link.dst})


def path_nodes(path: Sequence[Link]) -> list[NodeId]:
    if not path:
        return []
    return [path[0].src] + [l.dst for l in path]


def validate_path(topology: Topology, path: Sequence[Link]) -> None:
    """Check membership, contiguity and simplicity of a path.

    Raises UnknownLink, Discontiguous or RepeatedNode; returns None when the
    path is valid.  The empty path is trivially valid.
    """
    known = set(topology.links)
    for link in path:
        if link not in known:
            raise UnknownLink(f"path link {link} is not in the topology")
    for a, b in zip(path, path[1:]):
        if a.dst != b.src:
            raise Discontiguous(f"link {a} does not connect to {b}")
    nodes = path_nodes(path)
    if len(set(nodes)) != len(nodes):
        raise RepeatedNode(f"path revisits a node: {nodes}")


class Direction(str, Enum):
    MINIMIZE = "minimize"
    MAXIMIZE = "maximize"


class MetricId(str, Enum):
    """Identifiers for every supported link/path metric.

    hop_count is a pseudo-metric (unit link costs) used as the comparison
    baseline in reports.
    """

    ETX = "etx"
    MODIFIED_ETX = "metx"
    ENT = "ent"
    ETT = "ett"
    WCETT = "wcett"
    MIC = "mic"
    IAWARE = "iaware"
    DBETX = "dbetx"
    EETT = "eett"
    EDR = "edr"
    ETP = "etp"
    MCR = "mcr"
    MTM = "mtm"
    ESTDTT = "estdtt"
    ETX_DISTANCE = "etx_distance"
    MULTICAST_ETX = "multicast_etx"
    ENERGY_COST = "energy_cost"
    HOP_COUNT = "hop_count"


MAXIMIZED_METRICS = frozenset({MetricId.EDR, MetricId.ETP})


def direction_of(metric_id: MetricId) -> Direction:
    return Direction.MAXIMIZE if metric_id in MAXIMIZED_METRICS else Direction.MINIMIZE


@dataclass(frozen=True)
class MetricValue:
    """A metric figure with its optimization direction."""

    metric_id: MetricId
    value: float
    direction: Direction

    def __post_init__(self) -> None:
        if not math.isfinite(self.value) or self.value < 0:
            raise ValueError(f"metric value must be finite and >= 0, got {self.value}")
        if self.direction != direction_of(self.metric_id):
            raise ValueError(
                f"{self.metric_id.value} must be {direction_of(self.metric_id).value}d"
            )


def metric_value(metric_id: MetricId, value: float) -> MetricValue:
    """Build a MetricValue with the direction canonical for the metric."""
    return MetricValue(metric_id, float(value), direction_of(metric_id))

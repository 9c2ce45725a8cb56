"""Shared generators and independent oracles for the test suite.

The oracles here (path enumeration, Floyd-Warshall hop distances) are written
from scratch so they never share code with the implementations they check.
"""

from __future__ import annotations

import itertools
import math
import random

from meshmetrics.core import Link, MetricId, Topology, build_topology
from meshmetrics.harness import FlowSpec, Scenario
from meshmetrics.linksim import BernoulliLoss, LinkEstimate, LinkTruth, MeasurementConfig
from meshmetrics.metrics import MetricConfig


def make_estimate(
    d_f: float = 1.0,
    d_r: float = 1.0,
    mu: float = 0.0,
    sigma2: float = 0.0,
    bandwidth_bps: float = 1_000_000.0,
    snr: float = 1000.0,
    sinr: float | None = None,
    interferer_count: int = 0,
    neighbor_tau: dict | None = None,
    snir_samples: tuple[float, ...] = (1000.0,),
) -> LinkEstimate:
    return LinkEstimate(
        d_f=d_f,
        d_r=d_r,
        mu=mu,
        sigma2=sigma2,
        bandwidth_bps=bandwidth_bps,
        snr=snr,
        sinr=snr if sinr is None else sinr,
        interferer_count=interferer_count,
        neighbor_tau=neighbor_tau or {},
        snir_samples=snir_samples,
    )


def random_topology(
    seed: int,
    max_nodes: int = 10,
    max_links: int = 20,
    channel_count: int = 2,
    interference_range_hops: int = 1,
) -> Topology:
    rng = random.Random(seed)
    n = rng.randint(3, max_nodes)
    nodes = list(range(n))
    candidates = [
        (u, v, ch)
        for u, v in itertools.permutations(nodes, 2)
        for ch in range(channel_count)
    ]
    rng.shuffle(candidates)
    links = [
        Link(src=u, dst=v, channel=ch, rate_bps=rng.choice([1e6, 2e6, 5.5e6, 11e6]))
        for u, v, ch in candidates[: rng.randint(n - 1, max_links)]
    ]
    return build_topology(nodes, links, channel_count, interference_range_hops)


def random_estimates(topology: Topology, seed: int) -> dict[Link, LinkEstimate]:
    rng = random.Random(seed + 5000)
    estimates = {}
    for link in topology.links:
        d_f = rng.uniform(0.5, 1.0)
        d_r = rng.uniform(0.5, 1.0)
        estimates[link] = make_estimate(
            d_f=d_f,
            d_r=d_r,
            mu=-math.log(d_f * d_r),
            sigma2=rng.uniform(0.0, 0.5),
            bandwidth_bps=link.rate_bps,
        )
    return estimates


def enumerate_simple_paths(topology: Topology, source: int, destination: int, max_hops: int):
    """Independent recursive enumeration of simple paths (link sequences)."""
    by_src: dict[int, list[Link]] = {}
    for link in topology.links:
        by_src.setdefault(link.src, []).append(link)

    results: list[tuple[Link, ...]] = []

    def extend(node: int, used: list[Link], seen: set[int]) -> None:
        if node == destination:
            results.append(tuple(used))
            return
        if len(used) >= max_hops:
            return
        for link in by_src.get(node, []):
            if link.dst in seen:
                continue
            extend(link.dst, used + [link], seen | {link.dst})

    extend(source, [], {source})
    return results


def brute_force_min_cost(
    topology: Topology, costs: dict[Link, float], source: int, destination: int
) -> float | None:
    """Minimum additive path cost by full enumeration; None when disconnected."""
    usable = Topology(
        nodes=topology.nodes,
        links=tuple(sorted(l for l in topology.links if l in costs)),
        channel_count=topology.channel_count,
        interference_range_hops=topology.interference_range_hops,
    )
    paths = enumerate_simple_paths(usable, source, destination, len(topology.nodes) - 1)
    if not paths:
        return None
    return min(sum(costs[l] for l in path) for path in paths)


def floyd_warshall_hops(topology: Topology) -> dict[tuple[int, int], float]:
    """All-pairs hop distance on the undirected node graph, ignoring channels."""
    nodes = sorted(topology.nodes)
    dist = {(u, v): (0.0 if u == v else math.inf) for u in nodes for v in nodes}
    for link in topology.links:
        dist[(link.src, link.dst)] = min(dist[(link.src, link.dst)], 1.0)
        dist[(link.dst, link.src)] = min(dist[(link.dst, link.src)], 1.0)
    for k in nodes:
        for i in nodes:
            for j in nodes:
                through = dist[(i, k)] + dist[(k, j)]
                if through < dist[(i, j)]:
                    dist[(i, j)] = through
    return dist


def random_scenario(seed: int, metric_ids=(MetricId.ETX,), packets: int = 200) -> Scenario:
    """Small random Bernoulli scenario guaranteed to have a usable route."""
    rng = random.Random(seed + 7000)
    n = rng.randint(3, 6)
    nodes = list(range(n))
    links = [Link(i, i + 1, rate_bps=rng.choice([1e6, 2e6])) for i in range(n - 1)]
    extras = [
        (u, v)
        for u, v in itertools.permutations(nodes, 2)
        if abs(u - v) > 1 and rng.random() < 0.3
    ]
    links += [Link(u, v, rate_bps=rng.choice([1e6, 2e6])) for u, v in extras]
    topology = build_topology(nodes, links)
    truths = {
        l: LinkTruth(link=l, loss_model=BernoulliLoss(rng.uniform(0, 0.4), rng.uniform(0, 0.4)))
        for l in topology.links
    }
    return Scenario(
        topology=topology,
        truths=truths,
        measurement=MeasurementConfig(duration_s=40, window_s=20, probe_bits=256, sinr_samples=8),
        metrics=tuple((mid, MetricConfig()) for mid in metric_ids),
        flow=FlowSpec(src=0, dst=n - 1, packets=packets),
        seed=seed,
    )


def interference_oracle(topology: Topology, link: Link) -> set[Link]:
    """Brute-force interference set: same channel, nearest endpoint pair within
    the hop range per Floyd-Warshall distances."""
    hops = floyd_warshall_hops(topology)
    members = {link}
    for other in topology.links:
        if other.channel != link.channel:
            continue
        nearest = min(
            hops[(a, b)] for a in (other.src, other.dst) for b in (link.src, link.dst)
        )
        if nearest <= topology.interference_range_hops:
            members.add(other)
    return members

"""Pure evaluators for every supported link and path metric.

Each function takes already-measured quantities (delivery ratios, bit
statistics, bandwidths, SNIR samples...) and returns a MetricValue carrying
the canonical optimization direction.  Nothing here touches topology state or
randomness; same inputs, same outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import AbstractSet, Mapping, NamedTuple, Sequence

from scipy.special import erfc

from .core import ChannelId, Link, MetricId, MetricValue, metric_value
from .errors import (
    BadRatio,
    BadScale,
    BadThreshold,
    DeadLink,
    EmptyPath,
    FullOutage,
    InvariantViolation,
    MissingSelf,
    NegativeVariance,
    NoSamples,
    ZeroBandwidth,
    ZeroContention,
    ZeroRate,
)

# EstdTT assumes a constant 1500-byte packet
ESTDTT_PACKET_BITS = 12000


@dataclass(frozen=True)
class MetricConfig:
    """Tunables shared by the metric evaluators.

    beta weighs the bottleneck-channel term of wcett/mcr; w1 < w2 are the
    channel-switching costs of mic; loss_target_pal and retrans_threshold_m
    parameterize ent's admission rule; offered_load feeds the static
    contention-degree approximation used by edr at route-selection time.
    """

    beta: float = 0.5
    w1: float = 0.0
    w2: float = 1.0
    max_retry: int = 7
    loss_target_pal: float = 1.0
    retrans_threshold_m: float = 7.0
    packet_bits: int = 8192
    switching_delay_s: float = 0.0
    interface_usage: Mapping[ChannelId, float] = field(default_factory=dict)
    offered_load: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.beta <= 1.0:
            raise InvariantViolation(f"beta must be in [0,1], got {self.beta}")
        if not 0.0 <= self.w1 < self.w2:
            raise InvariantViolation(f"need 0 <= w1 < w2, got w1={self.w1}, w2={self.w2}")
        if self.max_retry < 1:
            raise InvariantViolation("max_retry must be >= 1")
        if self.packet_bits < 1:
            raise InvariantViolation("packet_bits must be >= 1")
        if self.switching_delay_s < 0:
            raise InvariantViolation("switching_delay_s must be >= 0")
        if any(not 0.0 <= u <= 1.0 for u in self.interface_usage.values()):
            raise InvariantViolation("interface usage fractions must be in [0,1]")
        if not 0.0 <= self.offered_load <= 1.0:
            raise InvariantViolation("offered_load must be in [0,1]")


def etx(d_f: float, d_r: float) -> MetricValue:
    """Expected transmission count: inverse of the bidirectional delivery
    probability (data frame forward, ACK back)."""
    for d in (d_f, d_r):
        if d == 0:
            raise DeadLink("delivery ratio is zero")
        if not 0 < d <= 1:
            raise ValueError(f"delivery ratio must be in (0,1], got {d}")
    return metric_value(MetricId.ETX, 1.0 / (d_f * d_r))


def modified_etx(mu: float, sigma2: float) -> MetricValue:
    """Variability-aware transmission count exp(mu + sigma2/2); collapses to
    exp(mu) on stable channels."""
    if sigma2 < 0:
        raise NegativeVariance(f"sigma2 must be >= 0, got {sigma2}")
    return metric_value(MetricId.MODIFIED_ETX, math.exp(mu + sigma2 / 2.0))


def diversity_gain(loss_target_pal: float, retrans_threshold_m: float) -> float:
    """Temporal diversity gain G steering how hard variance is penalized."""
    if retrans_threshold_m <= 1:
        raise BadThreshold(f"retransmission threshold must be > 1, got {retrans_threshold_m}")
    if not 0 < loss_target_pal <= 1:
        raise BadThreshold(f"loss target must be in (0,1], got {loss_target_pal}")
    return -math.log(loss_target_pal) / math.log(retrans_threshold_m)


def ent(mu: float, sigma2: float, config: MetricConfig) -> tuple[MetricValue, bool]:
    """Effective number of transmissions exp(mu + 2*G*sigma2) plus the
    admission verdict mu + 2*G*sigma2 <= ln(threshold).

    Not additive over paths: routing prunes inadmissible links and sums the
    per-link cost over the survivors.
    """
    if sigma2 < 0:
        raise NegativeVariance(f"sigma2 must be >= 0, got {sigma2}")
    gain = diversity_gain(config.loss_target_pal, config.retrans_threshold_m)
    exponent = mu + 2.0 * gain * sigma2
    admissible = exponent <= math.log(config.retrans_threshold_m)
    return metric_value(MetricId.ENT, math.exp(exponent)), admissible


def ett(etx_value: float, packet_bits: int, bandwidth_bps: float) -> MetricValue:
    """Expected transmission time: etx scaled by the packet serialization time."""
    if bandwidth_bps <= 0:
        raise ZeroBandwidth(f"bandwidth must be positive, got {bandwidth_bps}")
    if etx_value < 1:
        raise ValueError(f"etx must be >= 1, got {etx_value}")
    if packet_bits < 1:
        raise ValueError("packet_bits must be >= 1")
    return metric_value(MetricId.ETT, etx_value * packet_bits / bandwidth_bps)


def _busiest_channel_time(ett_by_hop: Sequence[float], channel_by_hop: Sequence[ChannelId]) -> float:
    per_channel: dict[ChannelId, float] = {}
    for t, ch in zip(ett_by_hop, channel_by_hop):
        per_channel[ch] = per_channel.get(ch, 0.0) + t
    return max(per_channel.values())


def wcett(
    ett_by_hop: Sequence[float],
    channel_by_hop: Sequence[ChannelId],
    beta: float,
    channel_count: int | None = None,
) -> MetricValue:
    """End-to-end blend of total transmission time and the busiest-channel
    time; beta > 0 rewards channel-diverse paths."""
    if not ett_by_hop:
        raise EmptyPath("wcett needs a non-empty path")
    if len(ett_by_hop) != len(channel_by_hop):
        raise ValueError("one channel per hop required")
    if not 0.0 <= beta <= 1.0:
        raise InvariantViolation(f"beta must be in [0,1], got {beta}")
    if channel_count is not None and any(not 0 <= c < channel_count for c in channel_by_hop):
        raise ValueError("channel id outside [0, channel_count)")
    total = sum(ett_by_hop)
    busiest = _busiest_channel_time(ett_by_hop, channel_by_hop)
    return metric_value(MetricId.WCETT, (1.0 - beta) * total + beta * busiest)


class MicHop(NamedTuple):
    ett_s: float
    interferer_count: int
    channel: ChannelId


def mic(
    hops: Sequence[MicHop],
    network_size: int,
    min_ett_network: float,
    config: MetricConfig,
) -> MetricValue:
    """Interference and channel-switching cost of a path.

    Per-hop resource usage is ett * interferer_count, normalized by the
    network size and its smallest transmission time; every intermediate node
    adds w1 when it switches channels and w2 when it repeats the inbound one.
    """
    if not hops:
        raise EmptyPath("mic needs a non-empty path")
    if min_ett_network <= 0:
        raise BadScale(f"min_ett_network must be positive, got {min_ett_network}")
    if network_size < 2:
        raise ValueError("network_size must be >= 2")
    usage = sum(h.ett_s * h.interferer_count for h in hops)
    switching = 0.0
    for prev, cur in zip(hops, hops[1:]):
        switching += config.w1 if cur.channel != prev.channel else config.w2
    value = usage / (network_size * min_ett_network) + switching
    return metric_value(MetricId.MIC, value)


def iaware(ett_value: float, snr: float, sinr: float) -> MetricValue:
    """Transmission time inflated by the interference ratio sinr/snr; equals
    the plain transmission time when nobody interferes."""
    if ett_value <= 0:
        raise ValueError(f"ett must be positive, got {ett_value}")
    if sinr <= 0 or snr <= 0 or sinr > snr:
        raise BadRatio(f"need 0 < sinr <= snr, got sinr={sinr}, snr={snr}")
    return metric_value(MetricId.IAWARE, ett_value * snr / sinr)


def _success_probability(snir_linear: float, packet_bits: int) -> float:
    if snir_linear < 0:
        raise ValueError("SNIR samples must be >= 0")
    ber = 0.5 * float(erfc(math.sqrt(snir_linear)))
    return (1.0 - ber) ** packet_bits


def dbetx(snir_samples: Sequence[float], packet_bits: int, max_retry: int) -> MetricValue:
    """Distribution-based transmission count over the observed SNIR samples.

    Each sample maps to an expected attempt count, clamped at max_retry once
    the per-attempt success probability drops below 1/max_retry; the mean is
    then inflated by the MAC outage fraction.
    """
    if not snir_samples:
        raise NoSamples("dbetx needs at least one SNIR sample")
    if packet_bits < 1:
        raise ValueError("packet_bits must be >= 1")
    if max_retry < 1:
        raise ValueError("max_retry must be >= 1")
    p_limit = 1.0 / max_retry
    attempts = []
    outages = 0
    for sample in snir_samples:
        p_suc = _success_probability(sample, packet_bits)
        attempts.append(1.0 / p_suc if p_suc > p_limit else float(max_retry))
        if p_suc < p_limit:
            outages += 1
    p_out = outages / len(snir_samples)
    if p_out == 1.0:
        raise FullOutage("every SNIR sample is below the MAC outage threshold")
    expected = sum(attempts) / len(attempts)
    return metric_value(MetricId.DBETX, expected / (1.0 - p_out))


def eett(link: Link, interference_etts: Mapping[Link, float]) -> MetricValue:
    """Total transmission time of a link's interference set (itself included):
    higher means the link waits longer for its channel."""
    if link not in interference_etts:
        raise MissingSelf(f"interference set must include {link} itself")
    if any(t < 0 for t in interference_etts.values()):
        raise ValueError("ett values must be >= 0")
    return metric_value(MetricId.EETT, sum(interference_etts.values()))


def edr(rate_bps: float, ett_value: float, tcd_values: Sequence[float]) -> MetricValue:
    """Expected data rate: nominal rate discounted by transmission time and
    the summed contention degrees of the links it shares air time with."""
    if rate_bps <= 0:
        raise ZeroRate(f"rate must be positive, got {rate_bps}")
    if ett_value <= 0:
        raise ValueError(f"ett must be positive, got {ett_value}")
    if any(not 0.0 <= t <= 1.0 for t in tcd_values):
        raise ValueError("contention degrees must be in [0,1]")
    contention = sum(tcd_values)
    if contention == 0:
        raise ZeroContention("sum of contention degrees is zero")
    return metric_value(MetricId.EDR, rate_bps / (ett_value * contention))


class EtpHop(NamedTuple):
    rate_bps: float
    d_f: float
    d_r: float


def etp(hops: Sequence[EtpHop], contention: Sequence[AbstractSet[int]] | None = None) -> MetricValue:
    """Expected throughput of a path's bottleneck link.

    Each hop's share of the medium is the harmonic split of nominal rates over
    the path links contending with it (itself always included), scaled down by
    its bidirectional delivery probability; the path value is the minimum.
    """
    if not hops:
        raise EmptyPath("etp needs a non-empty path")
    if contention is None:
        contention = [{i} for i in range(len(hops))]
    if len(contention) != len(hops):
        raise ValueError("one contention set per hop required")
    per_hop = []
    for i, hop in enumerate(hops):
        if hop.rate_bps <= 0:
            raise ZeroRate(f"rate must be positive, got {hop.rate_bps}")
        if hop.d_f * hop.d_r == 0:
            raise DeadLink("delivery ratio is zero")
        if not (0 < hop.d_f <= 1 and 0 < hop.d_r <= 1):
            raise ValueError("delivery ratios must be in (0,1]")
        contenders = set(contention[i]) | {i}
        if any(not 0 <= j < len(hops) for j in contenders):
            raise ValueError("contention indices out of range")
        share = 1.0 / sum(1.0 / hops[j].rate_bps for j in contenders)
        per_hop.append(hop.d_f * hop.d_r * share)
    return metric_value(MetricId.ETP, min(per_hop))


def switching_cost(
    channel: ChannelId, switching_delay_s: float, interface_usage: Mapping[ChannelId, float]
) -> float:
    """Expected latency of retuning an interface that is busy elsewhere."""
    if switching_delay_s < 0:
        raise ValueError("switching_delay_s must be >= 0")
    other = sum(u for ch, u in interface_usage.items() if ch != channel)
    return other * switching_delay_s


def mcr(
    ett_by_hop: Sequence[float],
    channel_by_hop: Sequence[ChannelId],
    beta: float,
    switching_delay_s: float,
    interface_usage: Mapping[ChannelId, float],
) -> MetricValue:
    """wcett plus a per-hop channel switching cost; identical to wcett when
    switching is free."""
    if not ett_by_hop:
        raise EmptyPath("mcr needs a non-empty path")
    if len(ett_by_hop) != len(channel_by_hop):
        raise ValueError("one channel per hop required")
    if not 0.0 <= beta <= 1.0:
        raise InvariantViolation(f"beta must be in [0,1], got {beta}")
    total = sum(
        t + switching_cost(ch, switching_delay_s, interface_usage)
        for t, ch in zip(ett_by_hop, channel_by_hop)
    )
    busiest = _busiest_channel_time(ett_by_hop, channel_by_hop)
    return metric_value(MetricId.MCR, (1.0 - beta) * total + beta * busiest)


class MtmHop(NamedTuple):
    overhead_s: float
    rate_bps: float
    reliability: float


def mtm(hops: Sequence[MtmHop], packet_bits: int) -> MetricValue:
    """Total medium occupancy: per hop, frame overhead plus serialization time
    divided by link reliability; additive over the path."""
    if not hops:
        raise EmptyPath("mtm needs a non-empty path")
    if packet_bits < 1:
        raise ValueError("packet_bits must be >= 1")
    total = 0.0
    for hop in hops:
        if hop.rate_bps <= 0:
            raise ZeroRate(f"rate must be positive, got {hop.rate_bps}")
        if hop.reliability == 0:
            raise DeadLink("reliability is zero")
        if not 0 < hop.reliability <= 1:
            raise ValueError(f"reliability must be in (0,1], got {hop.reliability}")
        if hop.overhead_s < 0:
            raise ValueError("overhead must be >= 0")
        total += (hop.overhead_s + packet_bits / hop.rate_bps) / hop.reliability
    return metric_value(MetricId.MTM, total)


def estd_tt(etx_value: float, rate_bps: float) -> MetricValue:
    """Transmission count over link rate, scaled to a constant 1500-byte
    packet so the value carries time units; additive over paths."""
    if rate_bps <= 0:
        raise ZeroRate(f"rate must be positive, got {rate_bps}")
    if etx_value < 1:
        raise ValueError(f"etx must be >= 1, got {etx_value}")
    return metric_value(MetricId.ESTDTT, etx_value * ESTDTT_PACKET_BITS / rate_bps)


def _check_error_rate(p: float) -> None:
    if p >= 1:
        raise DeadLink(f"error rate {p} means the link never delivers")
    if p < 0:
        raise ValueError(f"error rate must be in [0,1), got {p}")


def multicast_etx(error_rates: Sequence[float]) -> MetricValue:
    """Total transmissions all nodes of a path spend to push one packet
    end-to-end; order-sensitive because upstream hops retransmit for every
    downstream failure."""
    if not error_rates:
        raise EmptyPath("multicast_etx needs a non-empty path")
    for p in error_rates:
        _check_error_rate(p)
    total = 0.0
    suffix_success = 1.0
    for p in reversed(error_rates):
        suffix_success *= 1.0 - p
        total += 1.0 / suffix_success
    return metric_value(MetricId.MULTICAST_ETX, total)


def energy_cost(error_rates: Sequence[float], energies: Sequence[float]) -> MetricValue:
    """Expected energy to deliver across a lossy path, folding each hop's
    energy and error rate from source to destination.  With unit energies this
    coincides with multicast_etx."""
    if not error_rates:
        raise EmptyPath("energy_cost needs a non-empty path")
    if len(error_rates) != len(energies):
        raise ValueError("one energy per hop required")
    cost = 0.0
    for p, w in zip(error_rates, energies):
        _check_error_rate(p)
        if w < 0:
            raise ValueError(f"energy must be >= 0, got {w}")
        cost = (cost + w) / (1.0 - p)
    return metric_value(MetricId.ENERGY_COST, cost)

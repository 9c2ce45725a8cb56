"""Ground-truth channel models and the measurement procedures that turn them
into per-link estimates.

Probes are broadcast once per second per direction and are never
retransmitted.  The receiver knows the probe bit pattern, so it can count
erred bits even in probes that fail as packets; a probe only counts as
received (for the delivery ratio) when it arrives with zero bit errors, which
keeps the measured ratios consistent with the loss model by construction.
Probes corrupted beyond SYNC_LOSS_BER carry no bit information at all and are
recorded as fully lost.

All randomness flows from explicit integer seeds through numpy generators;
repeated calls are bit-identical.  Noise power is normalized to 1, so SNR
values are plain linear ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np
from scipy.special import erfc

from . import core
from .core import Link, NodeId, Topology
from .errors import EmptyWindow, NonPositiveDelay, NoSamples, TooFewRecords, UnknownLink

PROBES_PER_SECOND = 1  # probe cadence is fixed at one per second per direction
BER_CAP = 0.5          # bit error rate assigned to probes that carried no bit info
SUCCESS_FLOOR = 1e-6   # lower clamp on per-probe success before taking logs
SYNC_LOSS_BER = 0.25   # above this fraction of erred bits the receiver never syncs
DEFAULT_SNR_DB = 30.0

_LN10_OVER_10 = math.log(10.0) / 10.0


@dataclass(frozen=True)
class BernoulliLoss:
    """Independent per-slot packet loss, one probability per direction."""

    p_f: float = 0.0
    p_r: float = 0.0

    def __post_init__(self) -> None:
        for p in (self.p_f, self.p_r):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"loss probability must be in [0,1], got {p}")


@dataclass(frozen=True)
class GilbertElliott:
    """Two-state burst loss channel, applied independently per direction.

    p_good/p_bad are per-slot packet loss probabilities inside each state;
    t_gb and t_bg are the per-slot transition probabilities good->bad and
    bad->good.
    """

    p_good: float
    p_bad: float
    t_gb: float
    t_bg: float

    def __post_init__(self) -> None:
        for name in ("p_good", "p_bad", "t_gb", "t_bg"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0,1], got {v}")

    @property
    def stationary_bad(self) -> float:
        total = self.t_gb + self.t_bg
        return self.t_gb / total if total > 0 else 0.0

    @property
    def long_run_loss(self) -> float:
        pb = self.stationary_bad
        return (1 - pb) * self.p_good + pb * self.p_bad


@dataclass(frozen=True)
class FadingSnr:
    """Slowly varying SNR: first-order autoregressive process in dB.

    coherence_slots sets the correlation time; sigma_db the stationary
    deviation around mean_snr_db.
    """

    mean_snr_db: float
    sigma_db: float
    coherence_slots: int = 8

    def __post_init__(self) -> None:
        if self.sigma_db < 0:
            raise ValueError("sigma_db must be >= 0")
        if self.coherence_slots < 1:
            raise ValueError("coherence_slots must be >= 1")


LossModel = Union[BernoulliLoss, GilbertElliott, FadingSnr]


@dataclass(frozen=True)
class LinkTruth:
    """Ground-truth channel parameters of a directed link pair.

    tau is the fraction of time this link's transmitter occupies the channel
    (used to weight its interference on neighbors).  snr_db is the fixed
    received SNR for loss models without their own fading process.
    """

    link: Link
    loss_model: LossModel = field(default_factory=BernoulliLoss)
    max_retry: int = 7
    tau: float = 0.0
    snr_db: float = DEFAULT_SNR_DB

    def __post_init__(self) -> None:
        if self.max_retry < 1:
            raise ValueError("max_retry must be >= 1")
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError("tau must be in [0,1]")


@dataclass(frozen=True)
class ProbeRecord:
    """One directional probe: slot index, whether it counted as received, and
    how many of its bits arrived erred (0 when no bit info was recovered)."""

    slot: int
    received: bool
    erred_bits: float


@dataclass(frozen=True)
class ProbeTrace:
    """Both directions of a probe run plus the windowed delivery ratios."""

    forward: tuple[ProbeRecord, ...]
    reverse: tuple[ProbeRecord, ...]
    d_f: float
    d_r: float


@dataclass(frozen=True)
class SinrSample:
    snr: float
    sinr: float
    snir_samples: tuple[float, ...]
    neighbor_tau: Mapping[NodeId, float]
    interferer_count: int


@dataclass(frozen=True)
class LinkEstimate:
    """Everything a node can measure about one directed link."""

    d_f: float
    d_r: float
    mu: float
    sigma2: float
    bandwidth_bps: float
    snr: float
    sinr: float
    interferer_count: int
    neighbor_tau: Mapping[NodeId, float]
    snir_samples: tuple[float, ...]

    def __post_init__(self) -> None:
        if not (0.0 <= self.d_f <= 1.0 and 0.0 <= self.d_r <= 1.0):
            raise ValueError("delivery ratios must be in [0,1]")
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be >= 0")
        if self.bandwidth_bps <= 0:
            raise ValueError("bandwidth must be positive")
        if not 0 < self.sinr <= self.snr:
            raise ValueError("need 0 < sinr <= snr")


@dataclass(frozen=True)
class MeasurementConfig:
    """Knobs of the measurement campaign run against each link."""

    duration_s: int = 100
    window_s: int = 10
    probe_bits: int = 1024
    sinr_samples: int = 64
    pair_probes: int = 8
    pair_large_bits: int = 12000
    pair_jitter_s: float = 2e-4


def bit_error_rate(snir_linear: float) -> float:
    """BER of coherent binary signaling at the given linear SNIR."""
    if snir_linear < 0:
        raise ValueError("SNIR must be >= 0")
    return 0.5 * float(erfc(math.sqrt(snir_linear)))


def _fading_snr_db(model: FadingSnr, n: int, rng: np.random.Generator) -> np.ndarray:
    phi = math.exp(-1.0 / model.coherence_slots)
    innovation_sd = model.sigma_db * math.sqrt(max(0.0, 1.0 - phi * phi))
    noise = rng.normal(0.0, 1.0, size=n)
    db = np.empty(n)
    level = model.sigma_db * noise[0] if n else 0.0
    for i in range(n):
        if i:
            level = phi * level + innovation_sd * noise[i]
        db[i] = model.mean_snr_db + level
    return db


def _slot_loss_probs(
    model: LossModel, reverse: bool, n: int, packet_bits: int, rng: np.random.Generator
) -> np.ndarray:
    """Per-slot probability that a packet_bits-sized frame is lost."""
    if isinstance(model, BernoulliLoss):
        return np.full(n, model.p_r if reverse else model.p_f)
    if isinstance(model, GilbertElliott):
        uniforms = rng.random(n + 1)
        probs = np.empty(n)
        bad = uniforms[0] < model.stationary_bad
        for i in range(n):
            probs[i] = model.p_bad if bad else model.p_good
            flip = model.t_bg if bad else model.t_gb
            if uniforms[i + 1] < flip:
                bad = not bad
        return probs
    snr_db = _fading_snr_db(model, n, rng)
    snr_lin = np.power(10.0, snr_db / 10.0)
    ber = 0.5 * erfc(np.sqrt(snr_lin))
    return 1.0 - np.power(1.0 - ber, packet_bits)


def slot_success_probs(
    truth: LinkTruth, reverse: bool, n: int, packet_bits: int, rng: np.random.Generator
) -> np.ndarray:
    """Per-slot probability that one transmission attempt succeeds."""
    return 1.0 - _slot_loss_probs(truth.loss_model, reverse, n, packet_bits, rng)


def _direction_records(
    model: LossModel, reverse: bool, duration_s: int, probe_bits: int, rng: np.random.Generator
) -> tuple[ProbeRecord, ...]:
    loss = _slot_loss_probs(model, reverse, duration_s, probe_bits, rng)
    # per-bit error rate consistent with the slot's packet loss probability
    q = 1.0 - np.power(1.0 - loss, 1.0 / probe_bits)
    erred = rng.binomial(probe_bits, q)
    records = []
    sync_limit = probe_bits * SYNC_LOSS_BER
    for slot, k in enumerate(erred):
        if k > sync_limit:
            records.append(ProbeRecord(slot=slot, received=False, erred_bits=0))
        else:
            records.append(ProbeRecord(slot=slot, received=k == 0, erred_bits=int(k)))
    return tuple(records)


def _window_ratio(records: Sequence[ProbeRecord], window_s: int) -> float:
    window = records[-window_s:]
    return sum(1 for r in window if r.received) / len(window)


def simulate_probes(
    truth: LinkTruth, duration_s: int, window_s: int, probe_bits: int, seed: int
) -> ProbeTrace:
    """Run the probe campaign on both directions of a link.

    Emits one probe per direction per second for duration_s seconds and
    reports the delivery ratios over the final window_s slots.
    """
    if window_s < 1:
        raise EmptyWindow("window_s must be >= 1")
    if duration_s < window_s:
        raise ValueError("duration_s must be >= window_s")
    if probe_bits < 1:
        raise ValueError("probe_bits must be >= 1")
    slots = duration_s * PROBES_PER_SECOND
    rng_f = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    rng_r = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    forward = _direction_records(truth.loss_model, False, slots, probe_bits, rng_f)
    reverse = _direction_records(truth.loss_model, True, slots, probe_bits, rng_r)
    return ProbeTrace(
        forward=forward,
        reverse=reverse,
        d_f=_window_ratio(forward, window_s),
        d_r=_window_ratio(reverse, window_s),
    )


def estimate_bit_stats(records: Sequence[ProbeRecord], probe_bits: int) -> tuple[float, float]:
    """Mean and population variance of the per-probe log transmission count.

    Each probe contributes x = -ln(success) where success is the packet
    success probability implied by its observed bit error rate; probes with no
    bit information count as BER_CAP.  Stable channels give sigma2 = 0, bursty
    channels inflate it.
    """
    if probe_bits < 1:
        raise ValueError("probe_bits must be >= 1")
    if len(records) < 2:
        raise TooFewRecords("need at least 2 probe records")
    xs = np.empty(len(records))
    for i, record in enumerate(records):
        if not record.received and record.erred_bits == 0:
            ber = BER_CAP
        else:
            if not 0 <= record.erred_bits <= probe_bits:
                raise ValueError(f"erred_bits out of range: {record.erred_bits}")
            ber = record.erred_bits / probe_bits
        success = max((1.0 - ber) ** probe_bits, SUCCESS_FLOOR)
        xs[i] = -math.log(success)
    if xs.max() == xs.min():  # identical probes: variance exactly zero
        return float(xs[0]), 0.0
    return float(np.mean(xs)), float(np.var(xs))


def packet_pair_bandwidth(samples: Sequence[float], large_packet_bits: int) -> float:
    """Bandwidth from packet-pair probing: large packet size over the smallest
    observed inter-arrival gap."""
    if large_packet_bits < 1:
        raise ValueError("large_packet_bits must be >= 1")
    if not samples:
        raise NoSamples("no packet-pair samples")
    if any(s <= 0 for s in samples):
        raise NonPositiveDelay("inter-arrival samples must be positive")
    return large_packet_bits / min(samples)


def _mean_snr_linear(truth: LinkTruth) -> float:
    model = truth.loss_model
    if isinstance(model, FadingSnr):
        sigma_nat = model.sigma_db * _LN10_OVER_10
        return 10.0 ** (model.mean_snr_db / 10.0) * math.exp(sigma_nat * sigma_nat / 2.0)
    return 10.0 ** (truth.snr_db / 10.0)


def _node_activity(
    topology: Topology, truths: Mapping[Link, LinkTruth], node: NodeId
) -> tuple[float, float]:
    """(tau, power) an interfering node presents: the max over its outgoing links."""
    taus = [truths[l].tau for l in topology.links if l.src == node and l in truths]
    powers = [_mean_snr_linear(truths[l]) for l in topology.links if l.src == node and l in truths]
    return (max(taus) if taus else 0.0, max(powers) if powers else 0.0)


def sample_sinr(
    topology: Topology,
    truths: Mapping[Link, LinkTruth],
    link: Link,
    samples_n: int,
    seed: int,
) -> SinrSample:
    """Mean SNR/SINR of a link plus an instantaneous SNIR sample stream.

    Interference is the activity-weighted power of every interfering node on
    the link's channel; noise is normalized to 1, so SINR = SNR when nobody
    interferes.
    """
    if samples_n < 1:
        raise ValueError("samples_n must be >= 1")
    if not topology.has_link(link) or link not in truths:
        raise UnknownLink(f"no truth for link {link}")
    truth = truths[link]

    neighbor_tau: dict[NodeId, float] = {}
    interference = 0.0
    interferers = sorted(core.interfering_nodes(topology, link))
    for node in interferers:
        tau, power = _node_activity(topology, truths, node)
        neighbor_tau[node] = tau
        interference += tau * power

    snr = _mean_snr_linear(truth)
    denominator = 1.0 + interference
    sinr = snr / denominator

    rng = np.random.default_rng(np.random.SeedSequence([seed, 3]))
    if isinstance(truth.loss_model, FadingSnr):
        db = _fading_snr_db(truth.loss_model, samples_n, rng)
        instantaneous = np.power(10.0, db / 10.0) / denominator
        samples = tuple(float(v) for v in instantaneous)
    else:
        samples = (sinr,) * samples_n
    return SinrSample(
        snr=snr,
        sinr=sinr,
        snir_samples=samples,
        neighbor_tau=neighbor_tau,
        interferer_count=len(interferers),
    )


def measure_link(
    topology: Topology,
    truths: Mapping[Link, LinkTruth],
    link: Link,
    config: MeasurementConfig,
    seed: int,
) -> LinkEstimate:
    """Run every measurement procedure against one link and bundle the results.

    Deterministic for a given seed: probing, packet-pair jitter and SNIR
    sampling each draw from their own derived stream.
    """
    if link not in truths:
        raise UnknownLink(f"no truth for link {link}")
    truth = truths[link]

    trace = simulate_probes(truth, config.duration_s, config.window_s, config.probe_bits, seed)
    mu_f, s2_f = estimate_bit_stats(trace.forward, config.probe_bits)
    mu_r, s2_r = estimate_bit_stats(trace.reverse, config.probe_bits)

    rng_pair = np.random.default_rng(np.random.SeedSequence([seed, 2]))
    serialization = config.pair_large_bits / link.rate_bps
    gaps = serialization + rng_pair.uniform(0.0, config.pair_jitter_s, size=config.pair_probes)
    bandwidth = packet_pair_bandwidth([float(g) for g in gaps], config.pair_large_bits)

    sinr = sample_sinr(topology, truths, link, config.sinr_samples, seed)

    return LinkEstimate(
        d_f=trace.d_f,
        d_r=trace.d_r,
        mu=mu_f + mu_r,
        sigma2=s2_f + s2_r,
        bandwidth_bps=bandwidth,
        snr=sinr.snr,
        sinr=sinr.sinr,
        interferer_count=sinr.interferer_count,
        neighbor_tau=sinr.neighbor_tau,
        snir_samples=sinr.snir_samples,
    )

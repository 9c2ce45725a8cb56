import math

import pytest

from meshmetrics.core import Link, build_topology
from meshmetrics.errors import EmptyWindow, NonPositiveDelay, NoSamples, TooFewRecords, UnknownLink
from meshmetrics.linksim import (
    BernoulliLoss,
    FadingSnr,
    GilbertElliott,
    LinkTruth,
    MeasurementConfig,
    ProbeRecord,
    SUCCESS_FLOOR,
    estimate_bit_stats,
    measure_link,
    packet_pair_bandwidth,
    sample_sinr,
    simulate_probes,
)

LN2 = math.log(2.0)

# per-direction loss giving a bidirectional delivery of one half (ETX ~ 2)
HALF_ETX_LOSS = 1.0 - math.sqrt(0.5)


def single_link_topology():
    link = Link(0, 1)
    return build_topology([0, 1], [link]), link


def mild_burst_pair():
    """Bernoulli and Gilbert-Elliott truths with equal long-run loss and
    moderate burstiness (bursts of ~5 slots)."""
    p = HALF_ETX_LOSS
    stationary_bad = (p - 0.2) / (0.6 - 0.2)
    t_bg = 0.2
    t_gb = t_bg * stationary_bad / (1.0 - stationary_bad)
    return (
        BernoulliLoss(p_f=p, p_r=p),
        GilbertElliott(p_good=0.2, p_bad=0.6, t_gb=t_gb, t_bg=t_bg),
    )


def strong_burst_pair():
    """Same long-run loss but long deep bursts: the short-term behaviors of
    the two channels differ sharply while the averages agree."""
    p = HALF_ETX_LOSS
    stationary_bad = (p - 0.1) / (0.9 - 0.1)
    t_bg = 0.25
    t_gb = t_bg * stationary_bad / (1.0 - stationary_bad)
    return (
        BernoulliLoss(p_f=p, p_r=p),
        GilbertElliott(p_good=0.1, p_bad=0.9, t_gb=t_gb, t_bg=t_bg),
    )


class TestSimulateProbes:
    def test_lossless(self):
        truth = LinkTruth(link=Link(0, 1), loss_model=BernoulliLoss(0.0, 0.0))
        trace = simulate_probes(truth, 50, 10, 1024, 1)
        assert trace.d_f == 1.0
        assert trace.d_r == 1.0
        assert all(r.received and r.erred_bits == 0 for r in trace.forward)

    def test_fully_lossy(self):
        truth = LinkTruth(link=Link(0, 1), loss_model=BernoulliLoss(1.0, 1.0))
        trace = simulate_probes(truth, 50, 10, 1024, 1)
        assert trace.d_f == 0.0
        assert trace.d_r == 0.0

    def test_bernoulli_point_three_window_100_seed_7(self):
        truth = LinkTruth(link=Link(0, 1), loss_model=BernoulliLoss(0.3, 0.0))
        trace = simulate_probes(truth, 100, 100, 1024, 7)
        assert trace.d_f == pytest.approx(0.75, abs=1e-12)  # frozen observed value
        assert abs(trace.d_f - 0.7) <= 0.1

    def test_one_probe_per_second_per_direction(self):
        truth = LinkTruth(link=Link(0, 1))
        trace = simulate_probes(truth, 30, 10, 64, 4)
        assert len(trace.forward) == 30
        assert len(trace.reverse) == 30
        assert [r.slot for r in trace.forward] == list(range(30))

    def test_empty_window(self):
        truth = LinkTruth(link=Link(0, 1))
        with pytest.raises(EmptyWindow):
            simulate_probes(truth, 10, 0, 1024, 1)


class TestEstimateBitStats:
    def test_error_free(self):
        records = [ProbeRecord(i, True, 0) for i in range(10)]
        mu, sigma2 = estimate_bit_stats(records, 1024)
        assert mu == 0.0
        assert sigma2 == 0.0

    def test_constant_half_success(self):
        # one-bit probes with a half bit error rate: success exactly 1/2
        records = [ProbeRecord(i, True, 0.5) for i in range(8)]
        mu, sigma2 = estimate_bit_stats(records, 1)
        assert mu == pytest.approx(LN2, rel=1e-12)
        assert sigma2 == pytest.approx(0.0, abs=1e-15)

    def test_alternating_success(self):
        # two-bit probes alternating 0 and 1 erred bits: success 1 and 1/4
        records = [ProbeRecord(i, i % 2 == 0, i % 2) for i in range(8)]
        mu, sigma2 = estimate_bit_stats(records, 2)
        assert mu == pytest.approx(LN2, rel=1e-12)
        assert sigma2 == pytest.approx(math.log(4.0) ** 2 / 4.0, rel=1e-12)

    def test_fully_lost_probe_uses_ber_cap(self):
        # a record with no bit info is charged the uninformative channel rate,
        # which floors the per-probe success
        records = [ProbeRecord(0, False, 0), ProbeRecord(1, False, 0)]
        mu, sigma2 = estimate_bit_stats(records, 1024)
        assert mu == pytest.approx(-math.log(SUCCESS_FLOOR), rel=1e-12)
        assert sigma2 == 0.0

    def test_too_few_records(self):
        with pytest.raises(TooFewRecords):
            estimate_bit_stats([ProbeRecord(0, True, 0)], 1024)

    def test_sigma2_zero_for_identical_errs(self):
        for erred in (0, 1, 3):
            records = [ProbeRecord(i, erred == 0, erred) for i in range(20)]
            _, sigma2 = estimate_bit_stats(records, 64)
            assert sigma2 == 0.0


class TestPacketPair:
    def test_single_sample(self):
        assert packet_pair_bandwidth([0.002], 12000) == pytest.approx(6e6, rel=1e-9)

    def test_minimum_wins(self):
        assert packet_pair_bandwidth([0.004, 0.002, 0.003], 12000) == pytest.approx(6e6, rel=1e-9)

    def test_no_samples(self):
        with pytest.raises(NoSamples):
            packet_pair_bandwidth([], 12000)

    def test_non_positive_delay(self):
        with pytest.raises(NonPositiveDelay):
            packet_pair_bandwidth([0.002, 0.0], 12000)


class TestSampleSinr:
    def test_no_interferers_sinr_equals_snr(self):
        topo, link = single_link_topology()
        truths = {link: LinkTruth(link=link, snr_db=13.0)}
        sample = sample_sinr(topo, truths, link, 16, 3)
        assert sample.sinr == sample.snr
        assert sample.interferer_count == 0
        assert all(s == sample.sinr for s in sample.snir_samples)

    def test_single_interferer_halves_snr_20(self):
        # link 0->1 at snr 20; node 2 transmits at power 1 with tau 1 nearby
        link = Link(0, 1)
        jammer = Link(2, 3)
        topo = build_topology([0, 1, 2, 3], [link, jammer, Link(1, 2)])
        snr20_db = 10.0 * math.log10(20.0)
        truths = {
            link: LinkTruth(link=link, snr_db=snr20_db),
            jammer: LinkTruth(link=jammer, snr_db=0.0, tau=1.0),
            Link(1, 2): LinkTruth(link=Link(1, 2), tau=0.0, snr_db=0.0),
        }
        sample = sample_sinr(topo, truths, link, 8, 3)
        assert sample.snr == pytest.approx(20.0, rel=1e-9)
        assert sample.sinr == pytest.approx(10.0, rel=1e-9)
        assert sample.neighbor_tau[2] == 1.0

    def test_zero_samples_rejected(self):
        topo, link = single_link_topology()
        truths = {link: LinkTruth(link=link)}
        with pytest.raises(ValueError):
            sample_sinr(topo, truths, link, 0, 3)

    def test_unknown_link(self):
        topo, link = single_link_topology()
        with pytest.raises(UnknownLink):
            sample_sinr(topo, {link: LinkTruth(link=link)}, Link(1, 0), 8, 3)


class TestMeasureLink:
    def test_lossless_link(self):
        topo, link = single_link_topology()
        truths = {link: LinkTruth(link=link, loss_model=BernoulliLoss(0.0, 0.0))}
        estimate = measure_link(topo, truths, link, MeasurementConfig(), 11)
        assert estimate.d_f == 1.0
        assert estimate.d_r == 1.0
        assert estimate.mu == 0.0
        assert estimate.sigma2 == 0.0
        assert estimate.sinr == estimate.snr

    def test_bandwidth_tracks_nominal_rate(self):
        topo, link = single_link_topology()
        truths = {link: LinkTruth(link=link)}
        estimate = measure_link(topo, truths, link, MeasurementConfig(), 11)
        assert estimate.bandwidth_bps <= link.rate_bps
        assert estimate.bandwidth_bps == pytest.approx(link.rate_bps, rel=0.02)

    def test_burstiness_detector(self):
        # equal long-run loss: delivery ratios agree, variance separates
        topo, link = single_link_topology()
        bern, bursty = mild_burst_pair()
        config = MeasurementConfig(duration_s=2000, window_s=2000)
        estimate_b = measure_link(topo, {link: LinkTruth(link=link, loss_model=bern)}, link, config, 5)
        estimate_g = measure_link(topo, {link: LinkTruth(link=link, loss_model=bursty)}, link, config, 5)
        assert abs(estimate_b.d_f - estimate_g.d_f) < 0.1
        assert estimate_g.sigma2 > estimate_b.sigma2

    def test_deterministic_per_seed(self):
        topo, link = single_link_topology()
        truths = {link: LinkTruth(link=link, loss_model=BernoulliLoss(0.2, 0.1))}
        config = MeasurementConfig()
        first = measure_link(topo, truths, link, config, 99)
        second = measure_link(topo, truths, link, config, 99)
        assert first == second


# ---------------------------------------------------------------------------
# property checks shared with the acceptance suite
# ---------------------------------------------------------------------------


def check_delivery_concentration(n_seeds: int = 100) -> None:
    """|d - (1-p)| within four binomial deviations for >= 95 of 100 seeds."""
    p, window = 0.3, 100
    bound = 4.0 * math.sqrt(p * (1 - p) / window)
    truth = LinkTruth(link=Link(0, 1), loss_model=BernoulliLoss(p, p))
    hits = 0
    for seed in range(n_seeds):
        trace = simulate_probes(truth, window, window, 256, seed)
        if abs(trace.d_f - (1 - p)) <= bound:
            hits += 1
        assert 0.0 <= trace.d_f <= 1.0
        assert 0.0 <= trace.d_r <= 1.0
    assert hits >= 95


def check_burstiness_properties(n_seeds: int = 10) -> None:
    """Equal long-run loss: mu agrees within 0.15 nats, bursty sigma2 wins."""
    topo = build_topology([0, 1], [Link(0, 1)])
    link = topo.links[0]
    bern, bursty = mild_burst_pair()
    config = MeasurementConfig(duration_s=2000, window_s=2000)
    for seed in range(n_seeds):
        e_b = measure_link(topo, {link: LinkTruth(link=link, loss_model=bern)}, link, config, seed)
        e_g = measure_link(topo, {link: LinkTruth(link=link, loss_model=bursty)}, link, config, seed)
        assert abs(e_b.mu - e_g.mu) <= 0.15
        assert e_g.sigma2 > e_b.sigma2


def check_sinr_dominance() -> None:
    """sinr never exceeds snr, with or without interferers."""
    link = Link(0, 1)
    jammer = Link(2, 3)
    topo = build_topology([0, 1, 2, 3], [link, jammer, Link(1, 2)])
    for tau in (0.0, 0.3, 1.0):
        truths = {
            link: LinkTruth(link=link, loss_model=FadingSnr(12.0, 3.0, 6)),
            jammer: LinkTruth(link=jammer, snr_db=3.0, tau=tau),
            Link(1, 2): LinkTruth(link=Link(1, 2)),
        }
        sample = sample_sinr(topo, truths, link, 32, 7)
        assert sample.sinr <= sample.snr


def check_measurement_determinism() -> None:
    topo = build_topology([0, 1], [Link(0, 1)])
    link = topo.links[0]
    for model in (BernoulliLoss(0.2, 0.3), mild_burst_pair()[1], FadingSnr(12.0, 3.0, 6)):
        truths = {link: LinkTruth(link=link, loss_model=model)}
        config = MeasurementConfig(duration_s=60, window_s=20)
        assert measure_link(topo, truths, link, config, 31) == measure_link(
            topo, truths, link, config, 31
        )


def test_delivery_concentration():
    check_delivery_concentration()


def test_burstiness_properties():
    check_burstiness_properties()


def test_sinr_dominance():
    check_sinr_dominance()


def test_measurement_determinism():
    check_measurement_determinism()

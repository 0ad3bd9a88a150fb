from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate, stats

from osdlab.analysis import (
    OrderStatModel,
    ReliabilityModel,
    Tolerances,
    list_coverage_prob,
    order_stat_pdf,
    pairwise_error_prob,
    prob_mrip_error,
    prob_rank_window,
    prob_segment_errors,
    segment_probabilities,
    total_segment_error_prob,
    union_bound_ber,
)
from osdlab.channel import ChannelConfig, transmit_batch
from osdlab.codes import hamming_7_4, load_code
from osdlab.decoders import MLDecoder, decoder_for, parse_decoder

from oracles import clustered_ber_ci, coverage_frequency, draw_reliabilities, ordered_error_counts
from properties import noisy_words

CHANNELS = ["awgn", "rayleigh-fast"]
RATE = 16 / 31


def model(channel, snr, n=31):
    return OrderStatModel(n, ReliabilityModel(channel, snr, RATE))


# ----- single-bit model -------------------------------------------------------


@pytest.mark.parametrize("channel", CHANNELS)
@pytest.mark.parametrize("snr", [0.0, 6.0, 12.0])
def test_base_model_normalised(channel, snr):
    m = ReliabilityModel(channel, snr, RATE)
    total, _ = integrate.quad(m.pdf, 0, m.upper, limit=200)
    assert total == pytest.approx(1.0, abs=1e-6)
    err, _ = integrate.quad(m.err_pdf, 0, m.upper, limit=200)
    assert err == pytest.approx(m.raw_ber, rel=1e-6)
    assert float(m.sf(0.0)) == pytest.approx(1.0)
    grid = np.linspace(0.01, 2.0, 9)
    assert np.allclose(m.err_pdf(grid) / m.pdf(grid), m.cond_error(grid))


def test_rayleigh_density_by_conditioning_on_gain():
    m = ReliabilityModel("rayleigh-fast", 4.0, RATE)
    s = m.sigma

    def folded(u):
        # r = a^2 + a n with |h| = a Rayleigh, n ~ N(0, sigma^2)
        f = lambda a, sgn: 2 * a * math.exp(-a * a) * stats.norm.pdf(sgn * u, a * a, a * s)
        return sum(integrate.quad(f, 0, np.inf, args=(sgn,))[0] for sgn in (1, -1))

    for u in (0.05, 0.3, 1.0, 2.5):
        assert float(m.pdf(u)) == pytest.approx(folded(u), rel=1e-6)


@pytest.mark.parametrize("channel,snr", [("awgn", 3.0), ("rayleigh-fast", 8.0)])
def test_raw_ber_matches_simulation(channel, snr):
    m = ReliabilityModel(channel, snr, RATE)
    r = draw_reliabilities(channel, snr, RATE, (1_000_000,), np.random.default_rng(3))
    assert np.mean(r < 0) == pytest.approx(m.raw_ber, rel=0.03)


# ----- order statistics -------------------------------------------------------


def test_single_draw_order_statistic_is_base():
    base = ReliabilityModel("awgn", 2.0, RATE)
    om = OrderStatModel(1, base)
    grid = np.linspace(0, 3, 13)
    assert np.allclose(order_stat_pdf(1, grid, om), base.pdf(grid))
    assert order_stat_pdf(1, -0.5, om) == 0.0


@pytest.mark.parametrize("channel", CHANNELS)
@pytest.mark.parametrize("k", [1, 6, 16, 17, 31])
def test_order_statistic_normalised(channel, k):
    om = model(channel, 4.0)
    total, _ = integrate.quad(lambda v: float(om.pdf(k, v)), 0, om.base.upper, points=om.breakpoints(k), limit=400)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_order_statistic_rank_errors():
    om = model("awgn", 2.0)
    with pytest.raises(ValueError):
        om.pdf(0, 1.0)
    with pytest.raises(ValueError):
        om.pdf(32, 1.0)


@pytest.mark.parametrize("channel", CHANNELS)
def test_order_statistic_ks(channel):
    om = model(channel, 3.0)
    r = draw_reliabilities(channel, 3.0, RATE, (100_000, 31), np.random.default_rng(7))
    desc = -np.sort(-np.abs(r), axis=1)
    for k in (1, 6, 17, 31):
        d = stats.kstest(desc[:, k - 1], lambda v: om.cdf(k, v)).statistic
        assert d < 0.01, (k, d)


def test_joint_density_integrates_to_one():
    om = model("awgn", 3.0)
    up = om.base.upper
    total, _ = integrate.dblquad(lambda b, a: float(om.joint_pdf(6, 17, a, b)), 0, up, 0, lambda a: a)
    assert total == pytest.approx(1.0, abs=1e-5)


# ----- ranked error probabilities ---------------------------------------------


def test_p0_forms_agree():
    for channel, snr in (("awgn", 2.0), ("rayleigh-fast", 6.0)):
        om = model(channel, snr)
        assert prob_mrip_error(om, 16, nested=True) == pytest.approx(prob_mrip_error(om, 16), rel=1e-5)


@pytest.mark.parametrize("channel", CHANNELS)
def test_probability_ordering_and_limits(channel):
    grid = [0.0, 2.0, 4.0, 6.0, 8.0, 10.0]
    p0s, ratio = [], []
    for snr in grid:
        om = model(channel, snr)
        p0 = prob_mrip_error(om, 16)
        p1, p2 = prob_segment_errors(om, 6, 16)
        assert 0 < p1 <= p0 <= p2
        assert p0 <= om.base.raw_ber
        p0s.append(p0)
        ratio.append(p1 / p2)
    assert np.all(np.diff(p0s) < 0)
    assert np.all(np.diff(ratio) < 0)


def test_window_decomposition():
    """The per-rank error probabilities average back to the raw BER."""
    om = model("rayleigh-fast", 6.0)
    parts = [prob_rank_window(om, 1, 6), prob_rank_window(om, 7, 16), prob_rank_window(om, 17, 31)]
    mean = (6 * parts[0] + 10 * parts[1] + 15 * parts[2]) / 31
    assert mean == pytest.approx(om.base.raw_ber, rel=1e-5)
    assert prob_rank_window(om, 1, 16) == pytest.approx(prob_mrip_error(om, 16))
    assert prob_rank_window(om, 1, 31) == om.base.raw_ber
    with pytest.raises(ValueError):
        prob_rank_window(om, 5, 4)


@pytest.mark.parametrize("channel", CHANNELS)
def test_windows_against_ordering_simulation(channel):
    snr = 2.0
    om = model(channel, snr)
    counts = ordered_error_counts(channel, snr, 31, RATE, 200_000, np.random.default_rng(21))
    freq = counts / 200_000
    for lo, hi in ((1, 16), (1, 6), (7, 16)):
        assert freq[lo - 1 : hi].mean() == pytest.approx(prob_rank_window(om, lo, hi), rel=0.05)


def test_printed_segment_form_is_below_exact_for_rayleigh():
    om = model("rayleigh-fast", 10.0)
    _, exact = prob_segment_errors(om, 6, 16, "exact")
    _, printed = prob_segment_errors(om, 6, 16, "printed")
    assert 0.8 * exact < printed < exact
    with pytest.raises(ValueError):
        prob_segment_errors(om, 6, 16, "other")
    with pytest.raises(ValueError):
        prob_segment_errors(om, 16, 16)


def test_tolerance_halving_is_stable():
    fine = Tolerances(epsrel=5e-7)
    for channel, snr in (("awgn", 4.0), ("rayleigh-fast", 10.0)):
        om = model(channel, snr)
        for method in ("exact", "printed"):
            a = prob_segment_errors(om, 6, 16, method)
            b = prob_segment_errors(om, 6, 16, method, tol=fine)
            assert np.allclose(a, b, rtol=1e-3, atol=0)
        assert prob_mrip_error(om, 16, tol=fine) == pytest.approx(prob_mrip_error(om, 16), rel=1e-3)


# ----- segment totals ---------------------------------------------------------


def test_total_segment_error_prob_examples():
    assert total_segment_error_prob(4, 0, 0.3) == 1.0
    assert total_segment_error_prob(4, 2, 0.1) == pytest.approx(0.06)
    with pytest.raises(ValueError):
        total_segment_error_prob(3, 4, 0.1)


@pytest.mark.parametrize("channel,snr", [("awgn", 2.0), ("rayleigh-fast", 6.0)])
def test_total_segment_error_prob_against_simulation(channel, snr):
    """Summed subset error frequencies: exact for single errors; errors sharing a
    segment are positively correlated, so pairs occur at least as often as the
    independent-bit formula predicts."""
    om = model(channel, snr)
    r = draw_reliabilities(channel, snr, RATE, (200_000, 31), np.random.default_rng(5))
    E = np.take_along_axis(r, np.argsort(-np.abs(r), axis=1), axis=1) < 0
    for lo, hi in ((1, 16), (7, 16)):
        X = E[:, lo - 1 : hi].sum(axis=1)
        p = prob_rank_window(om, lo, hi)
        size = hi - lo + 1
        assert X.mean() == pytest.approx(total_segment_error_prob(size, 1, p), rel=0.05)
        assert np.mean(X * (X - 1) / 2) >= total_segment_error_prob(size, 2, p)


# ----- list coverage ----------------------------------------------------------


def test_coverage_trivial_cases():
    om = model("awgn", 2.0)
    assert list_coverage_prob(parse_decoder("osd:16", 16), om) == 1.0
    assert list_coverage_prob(parse_decoder("isd:16", 16), om) == 1.0
    quiet = model("awgn", 40.0)
    assert list_coverage_prob(parse_decoder("posd:1,3@6", 16), quiet) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        list_coverage_prob(parse_decoder("ml", 16), om)


def test_coverage_rules():
    om = model("awgn", 2.0)
    spec = parse_decoder("osd:1,3@6", 16)
    union = list_coverage_prob(spec, om)
    product = list_coverage_prob(spec, om, rule="product")
    assert union < product <= 1.0
    p1, p2 = segment_probabilities(spec, om)
    b1, b2 = stats.binom(6, p1), stats.binom(10, p2)
    expected = b1.pmf(0) * b2.cdf(3) + b1.cdf(1) * b2.pmf(0) - b1.pmf(0) * b2.pmf(0)
    assert union == pytest.approx(expected, rel=1e-12)
    assert product == pytest.approx(b1.cdf(1) * b2.cdf(3), rel=1e-12)
    with pytest.raises(ValueError):
        list_coverage_prob(spec, om, rule="other")


def test_segment_probabilities_by_family():
    om = model("rayleigh-fast", 6.0)
    raw = om.base.raw_ber
    assert segment_probabilities(parse_decoder("isd:2", 16), om) == [raw]
    assert segment_probabilities(parse_decoder("posd:2", 16), om) == [raw]
    p_posd = segment_probabilities(parse_decoder("posd:1,3@6", 16), om)
    p_osd = segment_probabilities(parse_decoder("osd:1,3@6", 16), om)
    # sorting 16 bits out of 16 gives weaker segments than picking 16 of 31
    assert p_osd[0] < p_posd[0] and p_osd[1] < p_posd[1]
    assert (6 * p_posd[0] + 10 * p_posd[1]) / 16 == pytest.approx(raw, rel=1e-5)


def test_coverage_against_simulation():
    spec = parse_decoder("isd:2", 16)
    model_p = list_coverage_prob(spec, model("awgn", 4.0))
    sim = coverage_frequency(spec, "awgn", 4.0, 31, RATE, 200_000, np.random.default_rng(13))
    assert sim == pytest.approx(model_p, rel=0.05)


# ----- union bound ------------------------------------------------------------


def test_pairwise_error_prob():
    assert float(pairwise_error_prob(3, "awgn", 5.0, 0.5)) == pytest.approx(stats.norm.sf(math.sqrt(3 * 10**0.5)))
    # Rayleigh pairwise probability against direct averaging over the gains
    g = 0.5 * 10**0.5
    rng = np.random.default_rng(0)
    s = rng.gamma(2, size=2_000_000)
    mc = np.mean(stats.norm.sf(np.sqrt(2 * g * s)))
    assert float(pairwise_error_prob(2, "rayleigh-fast", 5.0, 0.5)) == pytest.approx(mc, rel=0.01)
    with pytest.raises(ValueError):
        pairwise_error_prob(2, "rayleigh-block", 5.0, 0.5)


def test_union_bound_monotone_and_refuses_large_k():
    snr = np.arange(0.0, 12.0, 0.5)
    for channel in CHANNELS:
        ub = union_bound_ber(hamming_7_4().G, channel, snr)
        assert np.all(np.diff(ub) < 0)
    with pytest.raises(ValueError):
        union_bound_ber(load_code("bch-63-45").G, "awgn", 3.0)


@pytest.mark.slow
def test_union_bound_tracks_ml_on_hamming():
    code = hamming_7_4()
    ml = MLDecoder(code.G)
    snr = 7.0
    rng = np.random.default_rng(5)
    bit_err = word_err = 0
    words = 10_000_000
    for _ in range(words // 1_000_000):
        _, _, r = transmit_batch(np.ones((1_000_000, 7)), ChannelConfig("awgn", snr, code.rate), rng)
        errs = ml.decode_batch(r).codewords[:, :4].sum(axis=1)
        bit_err += int(errs.sum())
        word_err += int(np.count_nonzero(errs))
    ber = bit_err / (4 * words)
    bound = float(union_bound_ber(code.G, "awgn", snr))
    assert ber <= 1e-4
    assert ber == pytest.approx(bound, rel=0.10)


def test_union_bound_below_list_decoders():
    code = load_code("bch-31-16")
    for snr in (6.0, 7.0):
        bound = float(union_bound_ber(code.G, "awgn", snr))
        C, r = noisy_words(code, "awgn", snr, 100_000)
        for text in ("hard", "isd:2", "posd:1,3@6"):
            D = decoder_for(code, text).decode_batch(r).codewords
            errs = np.sum(D[:, :16] != C[:, :16], axis=1)
            _, hi = clustered_ber_ci(int(errs.sum()), int(np.count_nonzero(errs)), 16 * len(C), len(C))
            assert bound < hi, (snr, text)
            assert bound < errs.sum() / (16 * len(C)), (snr, text)


@pytest.mark.parametrize("name,snrs", [("hamming", (0.0, 2.0, 4.0)), ("bch-31-16", (1.0, 2.0, 3.0))])
def test_list_error_decomposition(name, snrs):
    """Word error rate <= ML word error rate + P(list decision wrong | ML right)."""
    code = hamming_7_4() if name == "hamming" else load_code(name)
    text = "osd:1" if name == "hamming" else "posd:1,3@6"
    ml, dec = MLDecoder(code.G), decoder_for(code, text)
    for snr in snrs:
        C, r = noisy_words(code, "awgn", snr, 20_000 if code.k < 8 else 4_000)
        ml_wrong = np.any(ml.decode_batch(r).codewords != C, axis=1)
        wrong = np.any(dec.decode_batch(r).codewords != C, axis=1)
        cond = wrong[~ml_wrong].mean() if (~ml_wrong).any() else 0.0
        assert wrong.mean() <= ml_wrong.mean() + cond + 1e-12
        assert wrong.mean() >= ml_wrong.mean() - 3 * math.sqrt(ml_wrong.mean() / len(C))

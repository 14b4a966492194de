import math
import warnings
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import binom, chisquare

from netsep.channels import Dmc, bsc, identity_channel
from netsep.codecs import (
    EmulationCodebook,
    TypicalSetCode,
    bhattacharyya_max_error_bound,
    build_binning_code,
    build_channel_code,
    build_emulation_code,
    build_rd_code,
    channel_decode,
    channel_decode_batch,
    channel_encode,
    emulate_decode,
    emulate_encode,
    emulate_encode_status,
    emulation_fidelity,
    estimate_max_error,
    rd_decode,
    rd_encode,
    sw_bins,
    sw_decode,
    sw_encode,
)
from netsep.coding_theorems import DistortionMeasure
from netsep.errors import InvalidArgument, ResourceLimit
from netsep.info_core import JointPmf, Pmf, is_jointly_typical, is_typical, mutual_information
from netsep.rng import RngStream

from .conftest import h2

I_BSC01 = 1.0 - h2(0.1)
DSBS = np.array([[0.45, 0.05], [0.05, 0.45]])


def _block_error(cb, ch, trials, seed):
    g = np.random.default_rng(seed)
    m = g.integers(0, cb.size, trials)
    x = cb.codewords[m].astype(np.int64)
    y = x ^ (g.random(x.shape) < ch.transitions[0, 1])
    return float((channel_decode_batch(cb, y, ch) != m).mean())


# -- channel codes -------------------------------------------------------------------------------


def test_channel_code_shape():
    cb = build_channel_code(bsc(0.1), 1.0, 1, seed=3)
    assert cb.codewords.shape == (2, 1)
    assert cb.bits == 1 and cb.size == 2


def test_channel_code_golden_values():
    cb = build_channel_code(bsc(0.05), 1 / 3, 12, 99)
    assert cb.codewords[:3].tolist() == [
        [0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 1, 0],
        [0, 1, 0, 0, 1, 1, 0, 1, 1, 1, 1, 0],
        [0, 1, 1, 0, 1, 1, 0, 1, 1, 0, 1, 0],
    ]


def test_channel_code_is_reproducible_from_seed():
    a = build_channel_code(bsc(0.05), 0.5, 16, 7)
    b = build_channel_code(bsc(0.05), 0.5, 16, 7)
    c = build_channel_code(bsc(0.05), 0.5, 16, 8)
    assert np.array_equal(a.codewords, b.codewords)
    assert not np.array_equal(a.codewords, c.codewords)
    assert a.descriptor() == b.descriptor()


def test_channel_code_preconditions():
    with pytest.raises(InvalidArgument):
        build_channel_code(bsc(0.1), 0.0, 8, 0)
    with pytest.raises(InvalidArgument):
        build_channel_code(bsc(0.1), 0.1, 8, 0)
    with pytest.raises(ResourceLimit):
        build_channel_code(bsc(0.1), 1.0, 23, 0)


def test_zero_capacity_channel_flags_degenerate_code():
    with pytest.warns(RuntimeWarning):
        cb = build_channel_code(bsc(0.5), 0.5, 8, 0)
    assert cb.degenerate


def _distinct_seed(rate, n, start=0):
    # collision scan: the first seed whose codewords are pairwise distinct
    for seed in range(start, start + 200):
        cb = build_channel_code(identity_channel(2), rate, n, seed)
        if np.unique(cb.codewords, axis=0).shape[0] == cb.size:
            return cb
    raise AssertionError("no collision-free seed found")


def test_noiseless_round_trip_for_every_message():
    # 256 i.i.d. words of length 8 collide almost surely, so use length 16
    cb = _distinct_seed(0.5, 16)
    ch = identity_channel(2)
    msgs = np.arange(cb.size)
    words = np.stack([channel_encode(cb, m) for m in msgs])
    assert np.array_equal(channel_decode_batch(cb, words, ch), msgs)
    # the typical rule also needs the codeword composition itself to be typical
    expected = [m if is_typical(w, [0.5, 0.5], 0.1) else -1 for m, w in enumerate(words)]
    assert np.array_equal(channel_decode_batch(cb, words, ch, rule="typical"), expected)
    assert all(channel_decode(cb, words[m], ch) == m for m in (0, 17, 255))


def test_channel_encode_lookup_and_range():
    cb = build_channel_code(bsc(0.1), 0.5, 8, 1)
    assert np.array_equal(channel_encode(cb, 0), cb.codewords[0])
    assert np.array_equal(channel_encode(cb, 5), channel_encode(cb, 5))
    with pytest.raises(InvalidArgument):
        channel_encode(cb, cb.size)
    with pytest.raises(InvalidArgument):
        channel_encode(cb, -1)


def test_ml_ties_go_to_smallest_index():
    words = np.array([[0, 1, 1], [1, 1, 1], [0, 1, 1], [1, 0, 0]], dtype=np.uint8)
    base = build_channel_code(bsc(0.1), 2 / 3, 3, 0)
    cb = type(base)(2 / 3, 3, words, 0, base.input_law, base.channel_fingerprint)
    assert channel_decode(cb, [0, 1, 1], bsc(0.1)) == 0
    # equidistant from words 0 and 1
    assert channel_decode(cb, [1, 1, 0], bsc(0.1)) == 1


def test_useless_channel_decodes_at_chance_or_worse():
    ch = bsc(0.5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        cb = build_channel_code(ch, 0.5, 8, 4)
    assert _block_error(cb, ch, 2000, 1) >= 0.5


def test_channel_code_block_error_below_oracle_threshold():
    # oracle: independent min-Hamming decoder, 1000 trials, seed-0 codebook: 0.005
    cb = build_channel_code(bsc(0.05), 1 / 3, 24, 0)
    assert _block_error(cb, bsc(0.05), 1000, 2) <= 0.015


def test_rate_above_capacity_fails_often():
    cb = build_channel_code(bsc(0.05), 0.9, 16, 0)
    assert _block_error(cb, bsc(0.05), 1000, 3) > 0.5


def test_typical_decoder_reports_failure_as_none():
    cb = build_channel_code(bsc(0.1), 0.5, 8, 2)
    # at N=8 the flip cells admit no integer count, so nothing is typical
    assert channel_decode(cb, cb.codewords[0], bsc(0.1), rule="typical") is None
    assert channel_decode(cb, cb.codewords[0], bsc(0.1)) is not None
    with pytest.raises(InvalidArgument):
        channel_decode_batch(cb, np.zeros((1, 8), dtype=np.int64), bsc(0.1), rule="bogus")


# -- maximal error ---------------------------------------------------------------------------------


def test_max_error_zero_on_noiseless_channel():
    cb = _distinct_seed(0.25, 16)
    est = estimate_max_error(cb, identity_channel(2), 500, RngStream(1))
    assert est.max_error == 0.0 and est.mean_error == 0.0


def test_max_error_at_chance_on_useless_channel():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        cb = build_channel_code(bsc(0.5), 0.5, 8, 0)
    est = estimate_max_error(cb, bsc(0.5), 2000, RngStream(2))
    assert cb.bits == 4
    assert est.max_error >= 0.5 and est.complete


def test_max_error_estimate_matches_oracle():
    # oracle: 4000 trials per message with an independent decoder give mean
    # error 0.00761 and worst message 0.0368 on this codebook
    cb = build_channel_code(bsc(0.05), 1 / 3, 24, 0)
    est = estimate_max_error(cb, bsc(0.05), 10_000, RngStream(3, ("pm",)))
    se = math.sqrt(0.00761 * (1 - 0.00761) / 10_000)
    assert abs(est.mean_error - 0.00761) <= 2 * se
    assert est.max_error >= est.mean_error
    assert est.per_message_trials.sum() == 10_000
    assert bhattacharyya_max_error_bound(cb, bsc(0.05)) >= 0.0368


def test_bhattacharyya_bound_flags_duplicates():
    words = np.array([[0, 1], [0, 1]], dtype=np.uint8)
    base = build_channel_code(bsc(0.1), 0.5, 2, 0)
    cb = type(base)(0.5, 2, words, 0, base.input_law, base.channel_fingerprint)
    assert bhattacharyya_max_error_bound(cb, bsc(0.1)) >= 1.0


# -- emulation codes ------------------------------------------------------------------------------


def test_single_output_channel_gives_constant_codewords():
    ch = Dmc(np.ones((2, 1)))
    cb = build_emulation_code(ch, [0.5, 0.5], 0.5, 8, seed=1)
    assert cb.size == 16 and np.all(cb.codewords == 0)


def test_emulation_code_golden_and_determinism():
    cb = build_emulation_code(bsc(0.1), [0.5, 0.5], 0.7, 10, seed=99)
    assert cb.codewords[:2].tolist() == [[0, 0, 1, 0, 0, 1, 1, 1, 0, 1], [0, 0, 1, 0, 0, 0, 1, 0, 0, 1]]
    again = build_emulation_code(bsc(0.1), [0.5, 0.5], 0.7, 10, seed=99)
    assert np.array_equal(cb.codewords, again.codewords)
    other = build_emulation_code(bsc(0.1), [0.5, 0.5], 0.7, 10, seed=99, time_index=2)
    assert not np.array_equal(cb.codewords, other.codewords)


def test_emulation_codewords_follow_output_marginal():
    cb = build_emulation_code(bsc(0.1), [0.5, 0.5], 1.0, 12, seed=5)
    n = cb.codewords.size
    assert abs(cb.codewords.mean() - 0.5) <= 3 * math.sqrt(0.25 / n)
    skew = build_emulation_code(bsc(0.1), [0.8, 0.2], 1.0, 12, seed=5)
    p1 = 0.8 * 0.1 + 0.2 * 0.9
    assert abs(skew.codewords.mean() - p1) <= 3 * math.sqrt(p1 * (1 - p1) / n)


def _custom_codebook(words, joint, epsilon):
    w = np.asarray(words, dtype=np.uint8)
    w.setflags(write=False)
    return EmulationCodebook(1.0, w.shape[1], epsilon, 0, 1, JointPmf(joint), w)


def test_emulate_encode_picks_first_typical_codeword():
    joint = np.diag([0.5, 0.5])
    x = [0, 1, 0, 1]
    words = [[1, 1, 0, 0], [0, 0, 1, 1], [1, 0, 1, 0], [0, 1, 0, 1], [0, 1, 0, 1]]
    cb = _custom_codebook(words, joint, 0.1)
    assert emulate_encode(cb, x) == 3
    assert emulate_encode_status(cb, x) == (3, False)
    assert np.array_equal(emulate_decode(cb, 3), x)


def test_emulate_encode_falls_back_to_first_message():
    cb = _custom_codebook([[1, 1, 0, 0], [0, 0, 1, 1]], np.diag([0.5, 0.5]), 0.1)
    assert emulate_encode(cb, [0, 1, 0, 1]) == 0
    assert emulate_encode_status(cb, [0, 1, 0, 1]) == (0, True)
    # a typical word at index 0 is not a fallback
    hit = _custom_codebook([[0, 1, 0, 1], [0, 0, 1, 1]], np.diag([0.5, 0.5]), 0.1)
    assert emulate_encode_status(hit, [0, 1, 0, 1]) == (0, False)


def test_emulate_decode_range():
    cb = build_emulation_code(bsc(0.1), [0.5, 0.5], 0.5, 8, seed=1)
    assert np.array_equal(emulate_decode(cb, 2), cb.codewords[2])
    with pytest.raises(InvalidArgument):
        emulate_decode(cb, cb.size)


def test_emulation_round_trip_is_jointly_typical():
    ch = bsc(0.1)
    cb = build_emulation_code(ch, [0.5, 0.5], 0.8, 24, epsilon=0.5, seed=3)
    g = np.random.default_rng(0)
    encoded = 0
    for _ in range(40):
        x = g.integers(0, 2, 24)
        m, fell_back = emulate_encode_status(cb, x)
        if not fell_back:
            encoded += 1
            assert is_jointly_typical(x, emulate_decode(cb, m), cb.joint, 0.5)
    assert encoded > 20


def _fallback_oracle(n, rate, trials=2000, seed=7):
    """Exact fallback probability of a fresh codebook, averaged over source draws."""
    from scipy.special import logsumexp

    k = math.floor(n * rate)
    lo1, hi1 = math.ceil(0.9 * 0.05 * n - 1e-9), math.floor(1.1 * 0.05 * n + 1e-9)
    lo0, hi0 = math.ceil(0.9 * 0.45 * n - 1e-9), math.floor(1.1 * 0.45 * n + 1e-9)

    def log_hit(m):
        a, b = max(lo1, m - hi0), min(hi1, m - lo0)
        return logsumexp(binom.logpmf(np.arange(a, b + 1), m, 0.5)) if b >= a else -np.inf

    g = np.random.default_rng(seed)
    out = []
    for _ in range(trials):
        n0 = g.binomial(n, 0.5)
        lq = log_hit(n0) + log_hit(n - n0)
        out.append(math.exp(-math.exp(k * math.log(2) + lq)) if np.isfinite(lq) else 1.0)
    return float(np.mean(out))


def test_soft_covering_fallback_is_rare_above_mutual_information():
    # oracle at N=1024: 0.0005
    assert _fallback_oracle(1024, I_BSC01 + 0.15) <= 0.02
    stats = emulation_fidelity(bsc(0.1), [0.5, 0.5], I_BSC01 + 0.15, 1024, 0.1, 1000, RngStream(4, ("fb",)))
    assert stats.mode == "ensemble"
    assert stats.fallback_rate <= 0.02


def test_fallback_rate_decays_with_blocklength():
    rates = [
        emulation_fidelity(bsc(0.1), [0.5, 0.5], I_BSC01 + 0.15, n, 0.1, 60, RngStream(5, ("decay", n))).fallback_rate
        for n in (256, 1024, 4096)
    ]
    assert rates[0] >= rates[1] >= rates[2]
    # N=256 oracle: 0.1075
    assert abs(rates[0] - _fallback_oracle(256, I_BSC01 + 0.15)) <= 3 * math.sqrt(0.11 * 0.89 / 60)


def test_identity_channel_emulation_is_faithful():
    stats = emulation_fidelity(identity_channel(2), [0.5, 0.5], 1.05, 1024, 0.1, 100, RngStream(6))
    assert stats.mean_tv <= 0.05


def test_emulation_below_mutual_information_fails():
    stats = emulation_fidelity(bsc(0.1), [0.5, 0.5], I_BSC01 - 0.2, 1024, 0.1, 100, RngStream(7))
    assert stats.mean_tv >= 0.05
    assert stats.fallback_rate > 0.9


def test_degenerate_input_reduces_to_the_channel_row():
    stats = emulation_fidelity(bsc(0.1), [1.0, 0.0], 0.2, 1024, 0.1, 100, RngStream(8))
    assert np.allclose(stats.tvs, stats.channel_tvs)
    assert stats.mean_tv <= 0.05
    assert stats.margin == pytest.approx(0.2)


def test_explicit_and_ensemble_modes_agree_in_distribution():
    a = emulation_fidelity(bsc(0.1), [0.5, 0.5], 1.0, 16, 0.3, 300, RngStream(9), mode="explicit")
    b = emulation_fidelity(bsc(0.1), [0.5, 0.5], 1.0, 16, 0.3, 300, RngStream(9), mode="ensemble")
    assert (a.mode, b.mode) == ("explicit", "ensemble")
    assert abs(a.mean_tv - b.mean_tv) <= 0.05
    with pytest.raises(InvalidArgument):
        emulation_fidelity(bsc(0.1), [0.5, 0.5], 1.0, 16, 0.3, 10, RngStream(9), mode="other")


# -- binning ---------------------------------------------------------------------------------------


def test_binning_golden_and_determinism():
    bc = build_binning_code(0.5, 8, 2, 99)
    u = [0, 1, 1, 0, 1, 0, 0, 1]
    assert sw_encode(bc, u) == 15
    assert sw_encode(build_binning_code(0.5, 8, 2, 99), u) == 15
    assert bc.num_bins == 16


def test_bins_are_uniform():
    bc = build_binning_code(0.5, 16, 2, 3)
    seqs = np.random.default_rng(0).integers(0, 2, (16_000, 16))
    counts = np.bincount(sw_bins(bc, seqs), minlength=bc.num_bins)
    assert chisquare(counts).pvalue > 1e-3


def test_pigeonhole_forces_shared_bins():
    bc = build_binning_code(0.25, 8, 2, 1)
    all_seqs = (np.arange(256)[:, None] >> np.arange(8)) & 1
    bins = sw_bins(bc, all_seqs)
    assert np.unique(bins).size <= bc.num_bins < 256


def test_sw_decode_with_identical_side_information():
    bc = build_binning_code(0.5, 24, 2, 4)
    g = np.random.default_rng(1)
    for _ in range(50):
        u = g.integers(0, 2, 24)
        res = sw_decode(bc, sw_encode(bc, u), u, np.diag([0.5, 0.5]), method="ml")
        assert res.ok and np.array_equal(res.sequence, u)


def test_typical_decoder_errors_match_atypicality_oracle():
    # with U equal to the side information the shell is {v} when v is typical, else empty
    n, trials = 24, 400
    p_typ = sum(binom.pmf(k, n, 0.5) for k in range(n + 1) if abs(k - 12) <= 0.1 * 12 + 1e-9)
    bc = build_binning_code(0.5, n, 2, 4)
    g = np.random.default_rng(2)
    errors = 0
    for _ in range(trials):
        u = g.integers(0, 2, n)
        res = sw_decode(bc, sw_encode(bc, u), u, np.diag([0.5, 0.5]))
        errors += not res.ok
        if res.ok:
            assert np.array_equal(res.sequence, u)
        else:
            assert res.status == "none"
    assert abs(errors / trials - (1 - p_typ)) <= 3 * math.sqrt(p_typ * (1 - p_typ) / trials)


def test_independent_side_information_cannot_help():
    bc = build_binning_code(0.5, 16, 2, 2)
    g = np.random.default_rng(3)
    errors = 0
    for _ in range(200):
        u, v = g.integers(0, 2, 16), g.integers(0, 2, 16)
        res = sw_decode(bc, sw_encode(bc, u), v, np.full((2, 2), 0.25), method="ml")
        errors += not (res.ok and np.array_equal(res.sequence, u))
    assert errors / 200 >= 0.5


def _sw_ensemble_error(n, rate, flip):
    # random binning, ML (nearest) decoding, ties counted as errors
    q = 2.0 ** -math.floor(n * rate + 1e-9)
    total = 0.0
    for d in range(n + 1):
        pd = comb(n, d) * flip**d * (1 - flip) ** (n - d)
        rivals = sum(comb(n, j) for j in range(d + 1)) - 1
        total += pd * (1 - (1 - q) ** rivals)
    return total


def test_dsbs_binning_error_matches_ensemble_oracle():
    oracle = _sw_ensemble_error(24, 0.6, 0.1)
    assert oracle == pytest.approx(0.1882, abs=1e-3)
    g = np.random.default_rng(4)
    codes, trials, errors = 8, 125, 0
    for seed in range(codes):
        bc = build_binning_code(0.6, 24, 2, seed)
        for _ in range(trials):
            u = g.integers(0, 2, 24)
            v = u ^ (g.random(24) < 0.1)
            res = sw_decode(bc, sw_encode(bc, u), v, DSBS, method="ml")
            errors += not (res.ok and np.array_equal(res.sequence, u))
    rate = errors / (codes * trials)
    assert rate <= oracle + 3 * math.sqrt(oracle * (1 - oracle) / (codes * trials)) + 0.03


def test_sw_decode_preconditions():
    bc = build_binning_code(0.5, 8, 2, 0)
    with pytest.raises(InvalidArgument):
        sw_decode(bc, bc.num_bins, np.zeros(8, dtype=int), DSBS)
    with pytest.raises(InvalidArgument):
        sw_decode(bc, 0, np.zeros(7, dtype=int), DSBS)
    with pytest.raises(InvalidArgument):
        sw_decode(bc, 0, np.zeros(8, dtype=int), DSBS, method="other")


@settings(max_examples=30)
@given(st.integers(0, 2**16 - 1), st.integers(0, 50))
def test_sw_decode_stays_in_the_claimed_bin(word, seed):
    bc = build_binning_code(0.5, 16, 2, seed)
    v = (word >> np.arange(16)) & 1
    for b in (0, bc.num_bins - 1, sw_encode(bc, v)):
        res = sw_decode(bc, b, v, DSBS, method="ml", radius=3)
        if res.ok:
            assert sw_encode(bc, res.sequence) == b


# -- source codes ------------------------------------------------------------------------------------


def test_typical_set_code_counts_and_round_trip():
    code = TypicalSetCode(Pmf([0.5, 0.5]), 10, 0.2)
    # counts of ones in [4, 6]
    assert code.count == comb(10, 4) + comb(10, 5) + comb(10, 6)
    assert code.bits == math.ceil(math.log2(code.count))
    for idx in range(code.count):
        assert code.encode(code.decode(idx)) == idx
    assert code.encode([1] * 10) == 0 and not code.covers([1] * 10)


@given(st.lists(st.integers(0, 2), min_size=9, max_size=9))
def test_typical_set_rank_is_a_bijection(seq):
    code = TypicalSetCode(Pmf([1 / 3, 1 / 3, 1 / 3]), 9, 0.5)
    if code.covers(seq):
        assert code.decode(code.encode(seq)).tolist() == seq


def test_rd_code_encodes_to_minimum_distortion():
    d = DistortionMeasure.hamming(2)
    cb = build_rd_code(Pmf([0.5, 0.5]), d, 6, 12, seed=2)
    blocks = np.random.default_rng(0).integers(0, 2, (50, 12))
    idx = rd_encode(cb, blocks)
    dist = (blocks[:, None, :] != cb.codewords[None, :, :].astype(int)).sum(axis=2)
    assert np.array_equal(dist[np.arange(50), idx], dist.min(axis=1))
    # ties resolve to the smallest index
    assert np.array_equal(idx, dist.argmin(axis=1))
    assert np.array_equal(rd_decode(cb, idx), cb.codewords[idx])
    with pytest.raises(InvalidArgument):
        rd_decode(cb, [cb.size])


def test_mutual_information_used_for_margins():
    joint = JointPmf.from_channel(Pmf([0.5, 0.5]), bsc(0.1).transitions)
    assert mutual_information(joint) == pytest.approx(I_BSC01, abs=1e-12)

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from logfsk import experiments as ex
from logfsk import theory
from logfsk.channel import AwgnChannel, add_awgn, derive_seed, superpose
from logfsk.receiver import (
    ReceiverConfig, SaturationError, demodulate, demodulate_batch, exp_postprocess, measure_destination_snr,
)
from logfsk.transform import build_analysis
from logfsk.waveform import LogFskParams, ParameterError, cosine_basis, modulate


def test_exp_of_zero_frame(params64):
    np.testing.assert_array_equal(exp_postprocess(np.zeros(64), params64), np.ones(64))


def test_exp_turns_sum_into_product(params256):
    p = params256
    y = superpose([modulate(40, p), modulate(60, p)])
    r = exp_postprocess(y, p)
    direct = (p.b_c * cosine_basis(40, 256) + p.alpha) * (p.b_c * cosine_basis(60, 256) + p.alpha)
    np.testing.assert_allclose(r, direct, rtol=1e-12)


def test_exp_with_noise_is_multiplicative(params64):
    p = params64
    clean = modulate(3, p) + modulate(9, p)
    ch = AwgnChannel(0.2, 7)
    w = ch.noise(64, 0)
    np.testing.assert_allclose(exp_postprocess(clean + w, p), exp_postprocess(clean, p) * np.exp(w / p.a_c),
                               rtol=1e-12)


def test_saturation_guard(params64):
    with pytest.raises(SaturationError, match="overflow"):
        exp_postprocess(np.full(64, 800 * params64.a_c), params64)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), snr_db=st.floats(-20, 40))
def test_postprocess_positive(seed, snr_db):
    p = LogFskParams.design(32)
    y = modulate(5, p) + modulate(11, p)
    y = add_awgn(y, AwgnChannel(10 ** (-snr_db / 10), seed), 0)
    assert np.all(exp_postprocess(y, p) > 0)


def test_single_user_round_trip(params64):
    op = build_analysis(64)
    cfg = ReceiverConfig(params64, 1)
    for m in range(64):
        out = demodulate(modulate(m, params64), cfg, op)
        assert out.sum_estimate == m and not out.below_threshold_fallback


def test_fig2_equal_peaks(params256):
    op = build_analysis(256)
    a = demodulate(superpose([modulate(m, params256) for m in (40, 60)]), ReceiverConfig(params256, 2), op)
    b = demodulate(superpose([modulate(m, params256) for m in (10, 35, 55)]), ReceiverConfig(params256, 3), op)
    assert a.sum_estimate == b.sum_estimate == 100
    assert a.peak_magnitude == pytest.approx(b.peak_magnitude, rel=1e-9)
    assert 100 in a.candidates and a.threshold == pytest.approx(math.sqrt(512) / 2)


def test_exhaustive_pairs_n64(params64):
    op = build_analysis(64)
    cfg = ReceiverConfig(params64, 2)
    pairs = np.array([(a, b) for a in range(64) for b in range(64 - a)])
    y = ex.frame_table(params64)[:, pairs].sum(axis=2).T
    est, fb, _ = demodulate_batch(y, cfg, op)
    assert np.array_equal(est, pairs.sum(axis=1)) and not fb.any()


def test_exhaustive_triples_n16():
    p = LogFskParams.design(16)
    cfg = ReceiverConfig(p, 3)
    triples = np.array([(a, b, c) for a in range(16) for b in range(16) for c in range(16) if a + b + c <= 15])
    y = ex.frame_table(p)[:, triples].sum(axis=2).T
    est, _, _ = demodulate_batch(y, cfg, build_analysis(16))
    assert np.array_equal(est, triples.sum(axis=1))


def test_dc_removal_off_still_exact(params64):
    cfg = ReceiverConfig(params64, 2, dc_removal=False)
    pairs = np.array([(a, b) for a in range(64) for b in range(64 - a)])
    y = ex.frame_table(params64)[:, pairs].sum(axis=2).T
    est, _, _ = demodulate_batch(y, cfg, build_analysis(64))
    assert np.array_equal(est, pairs.sum(axis=1))


def test_subtract_mean_noiseless_detection():
    p = LogFskParams.design(128, subtract_mean=True)
    op = build_analysis(128)
    cfg = ReceiverConfig(p, 2)
    for pair in [(10, 20), (32, 33), (5, 100), (60, 60)]:
        assert demodulate(superpose([modulate(m, p) for m in pair]), cfg, op).sum_estimate == sum(pair)


def test_receiver_rejects_weak_b_c():
    p = LogFskParams.design(64, b_c=1.0)
    with pytest.raises(ParameterError, match="b_c"):
        ReceiverConfig(p, 2)


def test_operator_mismatch(params64):
    with pytest.raises(ParameterError):
        demodulate(np.zeros(64), ReceiverConfig(params64, 2), build_analysis(32))


def test_destination_snr_noiseless_is_infinite():
    assert measure_destination_snr(np.full(2000, 22.627416997969522), math.sqrt(512)) == math.inf


def test_destination_snr_needs_trials():
    with pytest.raises(ValueError):
        measure_destination_snr(np.ones(10), 1.0)


def test_destination_snr_definition():
    v = np.array([1.0, 3.0] * 600)
    # mean 2, var 1, target 1 -> 1 / (1 + 1)
    assert measure_destination_snr(v, 1.0) == pytest.approx(0.5)


def _sweep(params, messages, snr_dbs, trials, seed=0):
    msgs = np.tile(messages, (trials, 1))
    out = []
    for gi, s in enumerate(snr_dbs):
        block = ex.simulate(params, len(messages), ex.sigma2_for(params, s), msgs, derive_seed(seed, gi))
        out.append(block)
    return out


def test_destination_snr_matches_closed_form_at_20db(params256):
    (block,) = _sweep(params256, (40, 60), [20.0], 10_000)
    emp = measure_destination_snr(block.sum_bin, theory.a_sigma(2, params256.b_c, 256))
    pred = theory.snr_sigma_from_snr_r(100.0, theory.p_p(params256, (40, 60)), params256.log_power, 256)
    assert abs(10 * math.log10(emp / pred)) < 1.0


def test_monotone_degradation(params256):
    grid = [0.0, 4.0, 8.0, 12.0, 16.0]
    trials = 10_000
    rates = []
    for block in _sweep(params256, (40, 60), grid, trials, seed=5):
        rates.append(np.mean(block.estimates != 100))
    for lo, hi in zip(rates, rates[1:]):
        slack = 2 * math.sqrt(max(lo * (1 - lo), hi * (1 - hi), 1 / trials) / trials)
        assert hi <= lo + slack


def test_fallback_rare_above_7db(params256):
    pp = theory.p_p(params256, (40, 60))
    grid = [s for s in (2.0, 4.0, 8.0, 16.0)
            if theory.db(theory.snr_sigma_from_snr_r(theory.undb(s), pp, params256.log_power, 256)) >= 7]
    assert grid
    for block in _sweep(params256, (40, 60), grid, 5000, seed=9):
        assert np.mean(block.fallback) < 0.01

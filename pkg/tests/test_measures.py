"""Tests for the benchmark measures."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvteleport.measures import (
    CLASSICAL_FIDELITY_LIMIT,
    CLASSICAL_TQ_LIMIT,
    CLASSICAL_VQ_LIMIT,
    NO_CLONING_FIDELITY_LIMIT,
    build_report,
    classical_vq_bound,
    conditional_variance_product,
    fidelity,
    gain_normalized_cv,
    inseparability,
    m_gain_bandwidth,
    m_min,
    measure_scenario,
    optimize_symmetric_gain,
    run_report,
    separable_vq_limit,
    signal_transfer,
    snr,
    tv_sweep,
)
from cvteleport.noise import MINUS, PLUS, variance
from cvteleport.protocol import (
    Gains,
    ProtocolConfig,
    SqueezerSpec,
    UNITY_GAINS,
    make_epr,
    teleport_assembled,
)
from helpers import random_protocol, random_squeezer


def _pure_pair_cfg(var_sqz, **overrides):
    s = SqueezerSpec.pure(var_sqz)
    base = dict(squeezer_1=s, squeezer_2=s, gains=UNITY_GAINS)
    base.update(overrides)
    return ProtocolConfig(**base)


def test_limit_constants():
    assert CLASSICAL_FIDELITY_LIMIT == 0.5
    assert NO_CLONING_FIDELITY_LIMIT == pytest.approx(2.0 / 3.0)
    assert CLASSICAL_TQ_LIMIT == 1.0
    assert CLASSICAL_VQ_LIMIT == 1.0


def test_snr_squared_amplitude_form():
    # Signal power over noise power: alpha^2 / variance.  (The spectrum
    # pipeline's 4 alpha^2 carrier convention cancels in any SNR ratio.)
    assert snr(3.0, 1.0) == pytest.approx(9.0)
    assert snr(0.0, 2.0) == 0.0
    with pytest.raises(ValueError):
        snr(1.0, 0.0)


def test_separable_vq_limit_values():
    assert separable_vq_limit(UNITY_GAINS) == pytest.approx(4.0)
    assert separable_vq_limit(Gains(2.0, 0.5)) == pytest.approx(4.0)
    assert separable_vq_limit(Gains(0.0, 0.0)) == pytest.approx(1.0)


def test_m_min_values():
    assert m_min(UNITY_GAINS) == 0.0
    assert m_min(Gains(2.0, 1.0)) == pytest.approx(1.0 / 9.0)


def test_fidelity_perfect_and_classical():
    assert fidelity((0.0, 0.0), UNITY_GAINS, (1.0, 1.0)) == pytest.approx(1.0)
    # Unity-gain classical teleporter: two units of added noise each way.
    assert fidelity((5.0, -2.0), UNITY_GAINS, (3.0, 3.0)) == pytest.approx(0.5)


def test_fidelity_gain_error_penalty():
    # k+ = alpha^2 (1-g)^2 / (1+V) = 4 * 0.25 / 2 = 0.5 by hand.
    value = fidelity((2.0, 0.0), Gains(0.5, 1.0), (1.0, 1.0))
    assert value == pytest.approx(math.exp(-0.5), abs=1e-12)


def test_fidelity_rejects_non_coherent_input():
    with pytest.raises(ValueError):
        fidelity((1.0, 1.0), UNITY_GAINS, (2.0, 2.0), in_variances=(1.5, 1.0))


def test_signal_transfer_matches_classical_point():
    t_plus, t_minus, t_q = signal_transfer((2.0, 2.0), (1.0, 1.0), (2.0, 2.0), (3.0, 3.0))
    assert t_plus == pytest.approx(1.0 / 3.0)
    assert t_minus == pytest.approx(1.0 / 3.0)
    assert t_q == pytest.approx(2.0 / 3.0)
    with pytest.raises(ValueError):
        signal_transfer((0.0, 1.0), (1.0, 1.0), (1.0, 1.0), (1.0, 1.0))


def test_gain_normalized_cv_keeps_sign():
    assert gain_normalized_cv(4.0, UNITY_GAINS) == pytest.approx(1.0)
    # Sampled estimates can go slightly negative and must survive.
    assert gain_normalized_cv(-0.2, UNITY_GAINS) == pytest.approx(-0.05)


def test_classical_unity_report():
    report = run_report(ProtocolConfig(
        squeezer_1=SqueezerSpec(1.0, 1.0), squeezer_2=SqueezerSpec(1.0, 1.0),
    ))
    assert report.fidelity == pytest.approx(0.5, abs=1e-12)
    assert report.t_q == pytest.approx(2.0 / 3.0, abs=1e-12)
    assert report.v_q == pytest.approx(4.0, abs=1e-12)
    assert report.m == pytest.approx(1.0, abs=1e-12)


def test_report_metric_accessor_and_validation():
    report = run_report(_pure_pair_cfg(0.5))
    assert report.metric("v_q") == report.v_q
    with pytest.raises(KeyError):
        report.metric("nope")


def test_measure_report_rejects_inconsistent_m():
    from cvteleport.measures import MeasureReport

    with pytest.raises(ValueError):
        MeasureReport(
            fidelity=0.5, t_plus=0.3, t_minus=0.3, t_q=0.6,
            v_plus=2.0, v_minus=2.0, v_q=4.0, m=0.5,
            gains=UNITY_GAINS, alpha_in=(0.0, 0.0), alpha_out=(0.0, 0.0),
            in_variances=(1.0, 1.0), out_variances=(3.0, 3.0),
        )


def test_conditional_variance_product_of_epr_pair():
    x, y = make_epr(SqueezerSpec.pure(0.5), SqueezerSpec.pure(0.5))
    v_plus, v_minus, product = conditional_variance_product(x, y)
    # 1.25 - 0.75^2 / 1.25 = 0.8 per quadrature.
    assert v_plus == pytest.approx(0.8, abs=1e-12)
    assert v_minus == pytest.approx(0.8, abs=1e-12)
    assert product == pytest.approx(0.64, abs=1e-12)


def test_inseparability_of_symmetric_epr_pair():
    s = SqueezerSpec.pure(0.5)
    x, y = make_epr(s, s)
    report = inseparability(x, y, resource=s)
    assert report.i_value == pytest.approx(0.5, abs=1e-9)
    assert report.k_opt == pytest.approx(1.0, abs=1e-6)
    assert report.i_at_unit_k == pytest.approx(0.5, abs=1e-12)
    assert report.tan_sum == pytest.approx(2.0, abs=1e-12)
    assert report.epr_product == pytest.approx(0.64, abs=1e-12)
    assert report.mixedness == pytest.approx(1.0, abs=1e-12)


def test_inseparability_vacuum_pair_sits_on_boundary():
    from cvteleport.noise import vacuum_field

    report = inseparability(vacuum_field("a"), vacuum_field("b"))
    assert report.i_value == pytest.approx(1.0, abs=1e-9)
    assert report.tan_sum == pytest.approx(4.0, abs=1e-12)


def test_inseparability_unit_k_relates_to_tan_sum():
    rng = np.random.default_rng(301)
    for _ in range(200):
        x, y = make_epr(random_squeezer(rng), random_squeezer(rng))
        report = inseparability(x, y)
        # AM-GM: the geometric k=1 form never exceeds a quarter of the sum.
        assert report.i_at_unit_k <= report.tan_sum / 4.0 + 1e-12
        assert report.i_value <= report.i_at_unit_k + 1e-9


def test_inseparability_golden_matches_brute_force():
    rng = np.random.default_rng(302)
    log_grid = np.linspace(-4.0, 4.0, 10_000)
    for _ in range(60):
        x, y = make_epr(random_squeezer(rng), random_squeezer(rng))
        report = inseparability(x, y)
        vx = {q: variance(x, q) for q in (PLUS, MINUS)}
        vy = {q: variance(y, q) for q in (PLUS, MINUS)}
        from cvteleport.noise import covariance

        cov = {q: covariance(x, q, y, q) for q in (PLUS, MINUS)}
        best = math.inf
        for k in np.exp(log_grid):
            for s_plus, s_minus in ((1, -1), (-1, 1)):
                v_p = k * k * vx[PLUS] + vy[PLUS] / (k * k) + 2 * s_plus * cov[PLUS]
                v_m = k * k * vx[MINUS] + vy[MINUS] / (k * k) + 2 * s_minus * cov[MINUS]
                value = math.sqrt(max(v_p, 0.0) * max(v_m, 0.0)) / (k * k + 1.0 / (k * k))
                best = min(best, value)
        assert report.i_value == pytest.approx(best, rel=1e-4)


def test_m_gain_bandwidth_closed_form_half_squeezing():
    lo, hi = m_gain_bandwidth(SqueezerSpec.pure(0.5))
    assert lo == pytest.approx(3.0 - 2.0 * math.sqrt(2.0), abs=1e-12)
    assert hi == pytest.approx(3.0 + 2.0 * math.sqrt(2.0), abs=1e-12)


def test_m_gain_bandwidth_edges_sit_on_unit_measure():
    for var_sqz in (0.9, 0.5, 0.25, 0.125):
        cfg = _pure_pair_cfg(var_sqz)
        lo, hi = m_gain_bandwidth(cfg.squeezer_1)
        for edge in (lo, hi):
            report = run_report(cfg.with_gains(Gains.symmetric(edge)))
            assert report.m == pytest.approx(1.0, abs=1e-6)


def test_m_gain_bandwidth_degenerate_resource():
    with pytest.raises(ValueError):
        m_gain_bandwidth(SqueezerSpec(1.0, 1.0))
    # Fully mixed but nondegenerate: the band collapses onto g = 1.
    lo, hi = m_gain_bandwidth(SqueezerSpec(1.0, 3.0))
    assert lo == pytest.approx(1.0) and hi == pytest.approx(1.0)


def test_classical_vq_bound_matches_closed_form():
    rng = np.random.default_rng(303)
    for _ in range(12):
        gains = Gains(float(rng.uniform(0.0, 2.0)), float(rng.uniform(0.0, 2.0)))
        bound = classical_vq_bound(gains, restarts=60)
        assert bound == pytest.approx(separable_vq_limit(gains), rel=1e-6)


def test_transfer_fractions_stay_in_unit_interval_1000_cases():
    rng = np.random.default_rng(304)
    for _ in range(1000):
        report = run_report(random_protocol(rng))
        assert -1e-12 <= report.t_plus <= 1.0 + 1e-12
        assert -1e-12 <= report.t_minus <= 1.0 + 1e-12
        assert report.t_q <= 2.0 + 1e-9


def test_vq_floor_and_m_floor_1000_cases():
    rng = np.random.default_rng(305)
    for _ in range(1000):
        cfg = random_protocol(rng)
        report = run_report(cfg)
        product = cfg.gains.product
        assert report.v_q >= (product - 1.0) ** 2 - 1e-9
        assert report.m >= m_min(cfg.gains) - 1e-9


def test_vacuum_resource_never_beats_classical_vq():
    cfg = ProtocolConfig(squeezer_1=SqueezerSpec(1.0, 1.0), squeezer_2=SqueezerSpec(1.0, 1.0))
    for g in np.linspace(0.0, 3.0, 100):
        report = run_report(cfg.with_gains(Gains.symmetric(float(g))))
        assert report.m >= 1.0 - 1e-9


def test_fidelity_decreases_with_amplitude_under_gain_error():
    cfg = _pure_pair_cfg(0.5, gains=Gains.symmetric(1.05))
    previous = math.inf
    for alpha in np.linspace(0.0, 12.0, 40):
        from dataclasses import replace

        value = run_report(replace(cfg, input_alpha=(float(alpha), float(alpha)))).fidelity
        assert value < previous or alpha == 0.0
        previous = value


def test_symmetric_pure_resource_m_minimizes_at_unit_gain():
    gain, value = optimize_symmetric_gain(_pure_pair_cfg(0.5), "m", 0.2, 3.0)
    assert gain == pytest.approx(1.0, abs=1e-6)
    assert value == pytest.approx(0.25, abs=1e-9)


def test_optimizer_landmarks_for_lossy_mixed_resource():
    from cvteleport.checks import reference_protocol

    cfg = reference_protocol()
    gain, best_tq = optimize_symmetric_gain(cfg, "t_q", 0.2, 3.0)
    assert gain == pytest.approx(1.075024, abs=1e-4)
    assert best_tq == pytest.approx(1.079519, abs=1e-4)
    gain, best_vq = optimize_symmetric_gain(cfg, "v_q", 0.2, 3.0)
    assert gain == pytest.approx(0.876074, abs=1e-4)
    assert best_vq == pytest.approx(0.644893, abs=1e-4)


def test_measure_scenario_corrected_equals_lossless_model():
    from dataclasses import replace

    rng = np.random.default_rng(306)
    for _ in range(100):
        cfg = random_protocol(rng)
        if cfg.victor_loss == 0.0:
            continue
        corrected = run_report(cfg, corrected=True)
        lossless = run_report(replace(cfg, victor_loss=0.0))
        for name in ("t_q", "v_q", "m", "fidelity"):
            assert corrected.metric(name) == pytest.approx(
                lossless.metric(name), abs=1e-9
            )


def test_measure_scenario_eve_party_requires_tap():
    result = teleport_assembled(_pure_pair_cfg(0.5))
    with pytest.raises(ValueError):
        measure_scenario(result, party="eve")


def test_tv_sweep_row_order_is_squeezer_major():
    squeezers = [SqueezerSpec.pure(0.5), SqueezerSpec.pure(0.25)]
    gains = np.array([0.8, 1.0])
    rows = tv_sweep(squeezers, gains, _pure_pair_cfg(0.5))
    assert [(r.var_sqz, r.gain) for r in rows] == [
        (0.5, 0.8), (0.5, 1.0), (0.25, 0.8), (0.25, 1.0),
    ]
    unity = rows[1]
    assert unity.t_q == pytest.approx(run_report(_pure_pair_cfg(0.5)).t_q, abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(
    g_plus=st.floats(0.0, 2.5),
    g_minus=st.floats(0.0, 2.5),
    var_sqz=st.floats(0.05, 1.0),
)
def test_report_internal_consistency(g_plus, g_minus, var_sqz):
    s = SqueezerSpec.pure(var_sqz)
    cfg = ProtocolConfig(squeezer_1=s, squeezer_2=s, gains=Gains(g_plus, g_minus))
    report = run_report(cfg)
    floor = separable_vq_limit(cfg.gains)
    assert report.m * floor == pytest.approx(report.v_q, abs=1e-9 * max(1.0, report.v_q))
    assert report.v_plus * report.v_minus == pytest.approx(report.v_q, rel=1e-9)

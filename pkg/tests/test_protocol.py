"""Tests for the teleporter assembly and its closed form."""

import math

import numpy as np
import pytest

from cvteleport.noise import MINUS, PLUS, covariance, variance
from cvteleport.protocol import (
    EveTapSite,
    Gains,
    ProtocolConfig,
    SqueezerSpec,
    UNITY_GAINS,
    db_to_variance,
    eve_reconstruction,
    infer_out_loss,
    make_epr,
    teleport_assembled,
    teleport_closed_form,
    variance_to_db,
)
from helpers import random_protocol

CLASSICAL = SqueezerSpec(1.0, 1.0)


def _classical_cfg(**overrides):
    base = dict(squeezer_1=CLASSICAL, squeezer_2=CLASSICAL, gains=UNITY_GAINS)
    base.update(overrides)
    return ProtocolConfig(**base)


def test_db_conversion_round_trip():
    # "3 dB of squeezing" is shorthand for variance one half; the exact
    # figure is 10*log10(2) = 3.0103 dB.
    assert db_to_variance(10.0 * math.log10(2.0)) == pytest.approx(0.5, abs=1e-12)
    assert variance_to_db(0.5) == pytest.approx(10.0 * math.log10(2.0), abs=1e-12)
    for var in (0.1, 0.33, 1.0, 2.5):
        assert db_to_variance(variance_to_db(var)) == pytest.approx(var, abs=1e-12)


def test_squeezer_spec_validation():
    with pytest.raises(ValueError):
        SqueezerSpec(0.0, 2.0)
    with pytest.raises(ValueError):
        SqueezerSpec(1.2, 1.0)
    with pytest.raises(ValueError):
        SqueezerSpec(0.5, 1.0)  # below the uncertainty floor 1/0.5
    spec = SqueezerSpec.pure(0.25)
    assert spec.is_pure
    assert spec.var_anti == pytest.approx(4.0)
    assert SqueezerSpec(0.5, 4.0).mixedness == pytest.approx(2.0)


def test_gains_validation_and_scalar():
    with pytest.raises(ValueError):
        Gains(-0.1, 1.0)
    g = Gains(2.0, 0.5)
    assert g.product == pytest.approx(1.0)
    assert g.scalar == pytest.approx(1.0)
    assert Gains.symmetric(0.7).g_minus == 0.7


def test_make_epr_second_moments():
    """Pure half-variance squeezers give the textbook entangled pair."""
    s = SqueezerSpec.pure(0.5)
    x, y = make_epr(s, s)
    for quad in (PLUS, MINUS):
        assert variance(x, quad) == pytest.approx(1.25, abs=1e-12)
        assert variance(y, quad) == pytest.approx(1.25, abs=1e-12)
        assert abs(covariance(x, quad, y, quad)) == pytest.approx(0.75, abs=1e-12)
    # Cross-quadrature correlations vanish by construction.
    assert covariance(x, PLUS, y, MINUS) == 0.0


def test_closed_form_classical_unity_gain():
    result = teleport_closed_form(_classical_cfg())
    assert variance(result.output, PLUS) == pytest.approx(3.0, abs=1e-12)
    assert variance(result.output, MINUS) == pytest.approx(3.0, abs=1e-12)


def test_closed_form_zero_gain_outputs_vacuum():
    result = teleport_closed_form(_classical_cfg(gains=Gains(0.0, 0.0), input_alpha=(2.0, 1.0)))
    assert variance(result.output, PLUS) == pytest.approx(1.0, abs=1e-12)
    assert result.output.alpha(PLUS) == 0.0
    assert result.output.alpha(MINUS) == 0.0


def test_closed_form_strong_squeezing_reproduces_input():
    cfg = ProtocolConfig(
        squeezer_1=SqueezerSpec.pure(1e-9),
        squeezer_2=SqueezerSpec.pure(1e-9),
        input_alpha=(1.5, -0.5),
        gains=UNITY_GAINS,
    )
    result = teleport_closed_form(cfg)
    for quad in (PLUS, MINUS):
        assert variance(result.output, quad) == pytest.approx(1.0, abs=1e-6)
    assert result.output.alpha(PLUS) == pytest.approx(1.5, abs=1e-12)
    assert result.output.alpha(MINUS) == pytest.approx(-0.5, abs=1e-12)


def test_closed_form_rejects_taps():
    cfg = _classical_cfg(eve_tap_site=EveTapSite.BOB_ARM, eve_tap_fraction=0.5)
    with pytest.raises(ValueError, match="assembled"):
        teleport_closed_form(cfg)


def test_dark_noise_adds_twice_per_quadrature():
    # Both feed-forward channels inject their detector's dark noise,
    # scaled by the gain: + 2 g^2 * dark on each output quadrature.
    result = teleport_closed_form(_classical_cfg(dark_noise=0.1))
    assert variance(result.output, PLUS) == pytest.approx(3.2, abs=1e-12)


def test_victor_loss_applies_after_reconstruction():
    cfg = _classical_cfg(victor_loss=0.2)
    result = teleport_closed_form(cfg)
    assert variance(result.output, PLUS) == pytest.approx(0.8 * 3.0 + 0.2, abs=1e-12)
    assert result.realized_gains.g_plus == pytest.approx(math.sqrt(0.8), abs=1e-12)


def test_infer_out_loss_inverts_detection_loss():
    assert infer_out_loss(0.4305, 0.85) == pytest.approx(0.33, abs=1e-12)
    assert infer_out_loss(1.0, 1.0) == 1.0
    with pytest.raises(ValueError):
        infer_out_loss(0.1, 0.85)  # would imply negative pre-loss variance


def test_assembled_matches_closed_form_1000_random_configs():
    rng = np.random.default_rng(201)
    for _ in range(1000):
        cfg = random_protocol(rng)
        closed = teleport_closed_form(cfg)
        assembled = teleport_assembled(cfg)
        for quad in (PLUS, MINUS):
            assert variance(assembled.output, quad) == pytest.approx(
                variance(closed.output, quad), abs=1e-10
            )
            assert covariance(
                assembled.input, quad, assembled.output, quad
            ) == pytest.approx(
                covariance(closed.input, quad, closed.output, quad), abs=1e-10
            )
        assert assembled.output.alpha(PLUS) == pytest.approx(
            closed.output.alpha(PLUS), abs=1e-10
        )


def test_output_variance_floor_1000_random_configs():
    rng = np.random.default_rng(202)
    for _ in range(1000):
        cfg = random_protocol(rng)
        result = teleport_closed_form(cfg)
        eta = cfg.victor_efficiency
        for quad, g in ((PLUS, cfg.gains.g_plus), (MINUS, cfg.gains.g_minus)):
            floor = eta * g * g * variance(result.input, quad)
            assert variance(result.output, quad) >= floor - 1e-12


def test_output_variance_monotone_in_squeezing():
    previous = math.inf
    for var_sqz in np.geomspace(1.0, 1e-4, 25):
        cfg = ProtocolConfig(
            squeezer_1=SqueezerSpec.pure(float(var_sqz)),
            squeezer_2=SqueezerSpec.pure(float(var_sqz)),
            gains=UNITY_GAINS,
        )
        out_var = variance(teleport_closed_form(cfg).output, PLUS)
        assert out_var <= previous + 1e-12
        previous = out_var


def test_gain_realization_is_exact_without_loss():
    rng = np.random.default_rng(203)
    for _ in range(200):
        cfg = random_protocol(rng, with_loss=False)
        if cfg.input_alpha[0] == 0.0 or cfg.input_alpha[1] == 0.0:
            continue
        result = teleport_assembled(cfg)
        assert result.output.alpha(PLUS) / cfg.input_alpha[0] == pytest.approx(
            cfg.gains.g_plus, abs=1e-12
        )
        assert result.output.alpha(MINUS) / cfg.input_alpha[1] == pytest.approx(
            cfg.gains.g_minus, abs=1e-12
        )


def test_bob_tap_gives_eve_a_field():
    cfg = _classical_cfg(
        squeezer_1=SqueezerSpec.pure(0.5),
        squeezer_2=SqueezerSpec.pure(0.5),
        eve_tap_site=EveTapSite.BOB_ARM,
        eve_tap_fraction=0.5,
    )
    result = teleport_assembled(cfg)
    assert result.eve_output is not None
    # Matched gains make the 50/50 arrangement fully symmetric.
    for quad in (PLUS, MINUS):
        assert variance(result.eve_output, quad) == pytest.approx(
            variance(result.output, quad), abs=1e-10
        )


def test_eve_reconstruction_requires_a_tap():
    with pytest.raises(ValueError):
        eve_reconstruction(_classical_cfg(), UNITY_GAINS)


def test_protocol_config_validation():
    with pytest.raises(ValueError):
        _classical_cfg(victor_loss=1.5)
    with pytest.raises(ValueError):
        _classical_cfg(eve_tap_fraction=1.0, eve_tap_site=EveTapSite.BOB_ARM)
    with pytest.raises(ValueError):
        _classical_cfg(dark_noise=-0.1)
    with pytest.raises(ValueError):
        _classical_cfg(bob_efficiency=0.0)

"""Tests for entanglement swapping through the teleporter."""

import math

import numpy as np
import pytest

from cvteleport.measures import m_gain_bandwidth
from cvteleport.protocol import SqueezerSpec
from cvteleport.swapping import (
    SwapConfig,
    g_opt_closed_form,
    swap_band_matches_teleporter,
    swap_bandwidth,
    swap_report,
    swap_run,
)


def _pure_pair(teleporter_var, input_var, gain=1.0):
    return SwapConfig(
        SqueezerSpec.pure(teleporter_var), SqueezerSpec.pure(input_var), gain
    )


def test_symmetric_half_squeezed_swap_landmarks():
    initial, final, k_opt = swap_run(_pure_pair(0.5, 0.5))
    assert initial == pytest.approx(0.5, abs=1e-9)
    assert final == pytest.approx(0.848612, abs=1e-6)
    assert k_opt == pytest.approx(1.366947, abs=1e-4)

    _, report = swap_report(_pure_pair(0.5, 0.5))
    assert report.i_at_unit_k == pytest.approx(1.0, abs=1e-9)
    assert report.tan_sum == pytest.approx(4.0, abs=1e-9)


def test_swapping_cannot_improve_entanglement():
    rng = np.random.default_rng(401)
    for _ in range(200):
        cfg = _pure_pair(
            float(rng.uniform(0.1, 0.95)),
            float(rng.uniform(0.1, 0.95)),
            float(rng.uniform(0.1, 2.5)),
        )
        initial, final, _ = swap_run(cfg)
        assert final >= initial - 1e-9


def test_g_opt_closed_form_values():
    assert g_opt_closed_form(_pure_pair(0.5, 0.5)) == pytest.approx(0.6, abs=1e-12)
    # Stronger input entanglement leaves more worth keeping, so the
    # optimum attenuates less and moves toward unity gain.
    assert g_opt_closed_form(_pure_pair(0.5, 0.1)) > g_opt_closed_form(_pure_pair(0.5, 0.5))
    assert g_opt_closed_form(_pure_pair(0.5, 0.9)) < g_opt_closed_form(_pure_pair(0.5, 0.5))


def test_g_opt_closed_form_requires_pure_inputs():
    cfg = SwapConfig(SqueezerSpec(0.5, 4.0), SqueezerSpec.pure(0.5), 1.0)
    with pytest.raises(ValueError):
        g_opt_closed_form(cfg)


def test_gain_scan_minimum_sits_at_closed_form_optimum():
    rng = np.random.default_rng(402)
    from dataclasses import replace

    for _ in range(12):
        cfg = _pure_pair(float(rng.uniform(0.2, 0.9)), float(rng.uniform(0.2, 0.9)))
        g_star = g_opt_closed_form(cfg)
        grid = np.linspace(max(0.05, g_star - 0.3), g_star + 0.3, 121)
        finals = [swap_run(replace(cfg, gain=float(g)))[1] for g in grid]
        assert grid[int(np.argmin(finals))] == pytest.approx(g_star, abs=0.01)


def test_final_inseparability_continuous_in_gain():
    from dataclasses import replace

    cfg = _pure_pair(0.5, 0.25)
    base = swap_run(cfg)[1]
    nudged = swap_run(replace(cfg, gain=1.0 + 1e-6))[1]
    assert abs(nudged - base) < 1e-4


def test_swap_band_matches_teleporter_band():
    for tel_var, in_var in ((0.5, 0.5), (0.5, 0.1), (0.25, 0.5), (0.9, 0.1)):
        cfg = _pure_pair(tel_var, in_var)
        assert swap_band_matches_teleporter(cfg, tol=1e-5)


def test_swap_band_independent_of_input_entanglement():
    lo_a, hi_a = swap_bandwidth(_pure_pair(0.5, 0.5))
    lo_b, hi_b = swap_bandwidth(_pure_pair(0.5, 0.1))
    assert lo_a == pytest.approx(lo_b, abs=1e-5)
    assert hi_a == pytest.approx(hi_b, abs=1e-5)
    ref_lo, ref_hi = m_gain_bandwidth(SqueezerSpec.pure(0.5))
    assert lo_a == pytest.approx(ref_lo, abs=1e-5)
    assert hi_a == pytest.approx(ref_hi, abs=1e-5)
    assert lo_a == pytest.approx(3.0 - 2.0 * math.sqrt(2.0), abs=1e-5)


def test_vacuum_teleporter_has_no_swapping_band():
    cfg = SwapConfig(SqueezerSpec(1.0, 1.0), SqueezerSpec.pure(0.5), 1.0)
    with pytest.raises(ValueError, match="band"):
        swap_bandwidth(cfg)


def test_swap_config_validation():
    with pytest.raises(ValueError):
        SwapConfig(SqueezerSpec.pure(0.5), SqueezerSpec.pure(0.5), -0.1)

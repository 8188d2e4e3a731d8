"""Containment checks of bundled reference datapoints against the model.

The bundled datapoints are published measurements from a teleportation
experiment whose resource the ``reference-experiment`` preset models
(inferred squeezing, receiver coupler efficiency, detector dark noise,
verifier loss).  A simulator cannot reproduce one run's exact numbers,
but every claimed value must be *feasible*: at or below the model's
optimum curve for measures where higher is better, at or above the
model's minimum where lower is better, within the stated uncertainty.
Band edges must lie inside the model's nonclassical band, and values
the model pins exactly (loss-corrected inseparability, squeezing
levels in dB) must agree within twice the stated uncertainty.

Two datapoints (the resource pair's conditional-variance paradox
product and its variance product) were characterized through a
different detection path than the teleporter, so no shared-basis model
comparison is honest; they are reported as informational only.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from importlib import resources
from typing import Optional

import numpy as np

from .config import build_protocol
from .measures import (
    NO_CLONING_FIDELITY_LIMIT,
    inseparability,
    optimize_symmetric_gain,
    run_report,
)
from .noise import apply_loss
from .numerics import bisect_root, scan_sign_changes
from .pipeline import loophole_demo
from .presets import preset_sections
from .protocol import Gains, ProtocolConfig, make_epr, variance_to_db


@dataclass(frozen=True)
class ReferenceDatapoint:
    """One published measurement, with whatever context was reported."""

    measure: str
    value: float
    uncertainty: Optional[float]
    gain: Optional[float]
    gain_uncertainty: Optional[float]
    alpha_plus: Optional[float]
    alpha_minus: Optional[float]
    note: str


def load_reference_datapoints() -> list[ReferenceDatapoint]:
    text = (
        resources.files("cvteleport.data")
        .joinpath("reference_datapoints.csv")
        .read_text(encoding="utf-8")
    )
    rows = list(csv.DictReader(text.splitlines()))

    def cell(row: dict[str, str], key: str) -> Optional[float]:
        raw = row[key].strip()
        return float(raw) if raw else None

    points = []
    for row in rows:
        value = cell(row, "value")
        assert value is not None, "datapoint rows always carry a value"
        points.append(
            ReferenceDatapoint(
                measure=row["measure"].strip(),
                value=value,
                uncertainty=cell(row, "uncertainty"),
                gain=cell(row, "gain"),
                gain_uncertainty=cell(row, "gain_uncertainty"),
                alpha_plus=cell(row, "alpha_plus"),
                alpha_minus=cell(row, "alpha_minus"),
                note=row["note"].strip(),
            )
        )
    return points


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str  # "pass", "fail" or "info"
    detail: str

    def __post_init__(self) -> None:
        if self.status not in ("pass", "fail", "info"):
            raise ValueError(f"unknown check status {self.status!r}")

    @property
    def failed(self) -> bool:
        return self.status == "fail"


def reference_protocol() -> ProtocolConfig:
    """Scenario behind the bundled datapoints, from the shipped preset."""
    return build_protocol(preset_sections("reference-experiment"))


def _at_gain(cfg: ProtocolConfig, g: float) -> ProtocolConfig:
    return cfg.with_gains(Gains.symmetric(g))


def model_m_band(cfg: ProtocolConfig, lo: float = 0.2, hi: float = 3.0) -> tuple[float, float]:
    """Gain band where the model's normalized product stays below 1."""

    def excess(g: float) -> float:
        return run_report(_at_gain(cfg, g)).m - 1.0

    grid = np.linspace(lo, hi, 200)
    brackets = scan_sign_changes(excess, list(grid))
    if len(brackets) < 2:
        raise RuntimeError("model normalized product has no complete band on the scan range")
    first, last = brackets[0], brackets[-1]
    return (
        bisect_root(excess, first[0], first[1], first[2], first[3]),
        bisect_root(excess, last[0], last[1], last[2], last[3]),
    )


def detected_resource_inseparability(cfg: ProtocolConfig, corrected: bool) -> float:
    """Model inseparability of the entangled pair as the verifier sees it."""
    arm_a, arm_b = make_epr(cfg.squeezer_1, cfg.squeezer_2)
    if not corrected:
        arm_a = apply_loss(arm_a, cfg.victor_efficiency, "check_vac_a")
        arm_b = apply_loss(arm_b, cfg.victor_efficiency, "check_vac_b")
    return inseparability(arm_a, arm_b).i_value


def _single(points: list[ReferenceDatapoint], measure: str, note: Optional[str] = None) -> ReferenceDatapoint:
    matches = [
        p for p in points if p.measure == measure and (note is None or p.note == note)
    ]
    if len(matches) != 1:
        raise RuntimeError(f"expected one {measure!r} datapoint, found {len(matches)}")
    return matches[0]


def run_reference_checks() -> list[CheckResult]:
    """All datapoint checks, in a stable order."""
    points = load_reference_datapoints()
    cfg = reference_protocol()
    results: list[CheckResult] = []

    def add(name: str, ok: bool, detail: str) -> None:
        results.append(CheckResult(name, "pass" if ok else "fail", detail))

    def info(name: str, detail: str) -> None:
        results.append(CheckResult(name, "info", detail))

    # Fidelity point: feasible against the model at its own gain and signal.
    dp = _single(points, "fidelity")
    f_cfg = replace(
        cfg,
        input_alpha=(dp.alpha_plus or 0.0, dp.alpha_minus or 0.0),
        gains=Gains.symmetric(dp.gain or 1.0),
    )
    f_model = run_report(f_cfg).fidelity
    assert f_model is not None
    add(
        "fidelity-point-feasible",
        dp.value - (dp.uncertainty or 0.0) <= f_model + 1e-12,
        f"measured {dp.value}+/-{dp.uncertainty} at gain {dp.gain}; model allows {f_model:.4f}",
    )
    add(
        "fidelity-below-no-cloning",
        dp.value + (dp.uncertainty or 0.0) <= NO_CLONING_FIDELITY_LIMIT,
        f"{dp.value}+/-{dp.uncertainty} stays below 2/3, matching the unclaimed no-cloning regime",
    )

    # Joint transfer: the best measured value must fit under the model optimum.
    dp_t = _single(points, "t_q", note="best joint transfer")
    g_best, t_max = optimize_symmetric_gain(cfg, "t_q", 0.2, 2.5)
    add(
        "transfer-point-feasible",
        dp_t.value - (dp_t.uncertainty or 0.0) <= t_max + 1e-12,
        f"measured {dp_t.value}+/-{dp_t.uncertainty}; model max {t_max:.4f} at gain {g_best:.4f}",
    )
    add(
        "transfer-beats-classical",
        dp_t.value - (dp_t.uncertainty or 0.0) > 1.0,
        f"{dp_t.value}-{dp_t.uncertainty} > 1 certifies two-quadrature transfer",
    )

    # Simultaneous transfer/conditional-variance pair.
    dp_tp = _single(points, "t_q", note="two-in-two-out pair")
    dp_vp = _single(points, "v_q", note="two-in-two-out pair")
    t_need = dp_tp.value - (dp_tp.uncertainty or 0.0)
    v_need = dp_vp.value + (dp_vp.uncertainty or 0.0)
    pair_ok = False
    for g in np.linspace(0.2, 2.2, 201):
        report = run_report(_at_gain(cfg, g))
        if report.t_q >= t_need and report.v_q <= v_need:
            pair_ok = True
            break
    add(
        "tv-pair-feasible",
        pair_ok,
        f"some model gain reaches t_q >= {t_need:.3f} with v_q <= {v_need:.3f}",
    )
    add(
        "tv-pair-nonclassical",
        dp_tp.value > 1.0 and dp_vp.value < 1.0,
        f"point estimates t_q = {dp_tp.value} > 1 and v_q = {dp_vp.value} < 1 "
        "(uncertainty straddles the v_q bound)",
    )

    # Gain-normalized product: best point and the nonclassical band edges.
    dp_m = _single(points, "m")
    m_model = run_report(_at_gain(cfg, dp_m.gain or 1.0)).m
    add(
        "m-point-feasible",
        dp_m.value + (dp_m.uncertainty or 0.0) >= m_model - 1e-12,
        f"measured {dp_m.value}+/-{dp_m.uncertainty} at gain {dp_m.gain}; "
        f"model floor {m_model:.4f}",
    )
    add(
        "m-point-nonclassical",
        dp_m.value + (dp_m.uncertainty or 0.0) < 1.0,
        f"{dp_m.value}+{dp_m.uncertainty} < 1 certifies entanglement at that gain",
    )
    lo = _single(points, "m_band_lo").value
    hi = _single(points, "m_band_hi").value
    band = model_m_band(cfg)
    add(
        "m-band-contained",
        band[0] <= lo and hi <= band[1],
        f"measured band [{lo}, {hi}] inside model band [{band[0]:.4f}, {band[1]:.4f}]",
    )

    # Resource pair inseparability, detected and loss-corrected.
    dp_i = _single(points, "inseparability")
    i_detected = detected_resource_inseparability(cfg, corrected=False)
    tol = 2.0 * (dp_i.uncertainty or 0.0)
    add(
        "inseparability-detected-consistent",
        abs(i_detected - dp_i.value) <= tol,
        f"measured {dp_i.value}+/-{dp_i.uncertainty}; detected-basis model {i_detected:.4f}",
    )
    dp_ii = _single(points, "inseparability_inferred")
    i_corrected = detected_resource_inseparability(cfg, corrected=True)
    add(
        "inseparability-inferred-consistent",
        abs(i_corrected - dp_ii.value) <= 2.0 * (dp_ii.uncertainty or 0.0),
        f"inferred {dp_ii.value}+/-{dp_ii.uncertainty}; loss-free model {i_corrected:.4f}",
    )

    # Squeezing levels in dB, detected and loss-corrected.
    dp_sd = _single(points, "squeezing_detected_db")
    eta = cfg.victor_efficiency
    detected_db = variance_to_db(eta * cfg.squeezer_1.var_sqz + (1.0 - eta))
    add(
        "squeezing-detected-consistent",
        abs(detected_db - dp_sd.value) <= 2.0 * (dp_sd.uncertainty or 0.0),
        f"observed {dp_sd.value}+/-{dp_sd.uncertainty} dB; model {detected_db:.3f} dB",
    )
    dp_si = _single(points, "squeezing_inferred_db")
    inferred_db = variance_to_db(cfg.squeezer_1.var_sqz)
    add(
        "squeezing-inferred-consistent",
        abs(inferred_db - dp_si.value) <= 2.0 * (dp_si.uncertainty or 0.0),
        f"inferred {dp_si.value}+/-{dp_si.uncertainty} dB; model {inferred_db:.3f} dB",
    )

    # Gain-asymmetry exploit: apparent fidelity matches and beats honest.
    dp_l = _single(points, "loophole_fidelity")
    exploit_cfg = build_protocol(preset_sections("loophole"))
    f_apparent, _ = loophole_demo(exploit_cfg)
    honest = run_report(_at_gain(cfg, 1.0)).fidelity
    assert honest is not None
    add(
        "loophole-fidelity-consistent",
        abs(f_apparent - dp_l.value) <= (dp_l.uncertainty or 0.0),
        f"claimed {dp_l.value}+/-{dp_l.uncertainty}; model exploit reaches {f_apparent:.4f}",
    )
    add(
        "loophole-exceeds-honest",
        f_apparent > honest,
        f"exploit {f_apparent:.4f} > honest unity-gain {honest:.4f}",
    )

    # Context rows with no shared-basis model comparison.
    dp_e = _single(points, "epr_product")
    info(
        "epr-product-context",
        f"measured {dp_e.value}+/-{dp_e.uncertainty}; characterized through a "
        "separate detection path, not gated against this model",
    )
    dp_k = _single(points, "mixedness")
    info(
        "mixedness-context",
        f"measured {dp_k.value}; resource model uses "
        f"{cfg.squeezer_1.mixedness:.3f} after loss correction",
    )
    return results

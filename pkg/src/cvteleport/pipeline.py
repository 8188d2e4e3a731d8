"""Synthetic spectrum analyzer runs and moment estimation.

The verifier sees each beam as a power spectrum around the modulation
carrier: sideband bins carry the quadrature noise variance, the carrier
bin additionally carries the coherent signal power (mean square
``4 alpha^2 + variance`` in shot-noise units).  Finite spectrum-analyzer
averaging makes every bin a scaled chi-square variate, so estimates
carry realistic statistical scatter while staying exactly reproducible
from the run seed.

Estimation inverts the verifier's calibrated homodyne loss, reads the
noise floor from sideband windows, extracts signal amplitudes from the
carrier excess, calibrates gains from amplitude ratios, and scores the
run with the shared measure formulas.  A ``noiseless`` switch replaces
sampling with the infinite-averaging limit so the whole chain can be
checked against closed-form moments.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial
from typing import Iterable, Optional, Sequence

import numpy as np

from .measures import MeasureReport, build_report, fidelity, run_report
from .noise import MINUS, PLUS, Quadrature, apply_loss, variance
from .protocol import (
    Gains,
    ProtocolConfig,
    UNITY_GAINS,
    infer_out_loss,
    teleport_assembled,
)

#: Environment variable selecting the worker-process count for seed fans.
WORKERS_ENV = "CVTELEPORT_WORKERS"

RUNRECORD_SCHEMA = "# cvteleport runrecord schema v1"

PORTS = ("input", "output")


@dataclass(frozen=True)
class PipelineConfig:
    """Spectrum synthesis and estimation settings around one scenario.

    ``gain_drift_sigma`` adds a per-run common offset, drawn once per
    seed before any spectrum sampling, to both feed-forward gains.
    ``noiseless`` replaces chi-square bin sampling with exact levels.
    """

    protocol: ProtocolConfig
    averages: int = 1000
    gain_drift_sigma: float = 0.0
    noiseless: bool = False
    carrier_hz: float = 8.4e6
    span_hz: float = 100e3
    rbw_hz: float = 10e3
    windows_hz: tuple[tuple[float, float], ...] = (
        (8.35e6, 8.37e6),
        (8.43e6, 8.45e6),
    )

    def __post_init__(self) -> None:
        if self.averages < 1:
            raise ValueError(f"averages must be >= 1, got {self.averages}")
        if self.gain_drift_sigma < 0.0:
            raise ValueError(f"gain_drift_sigma must be >= 0, got {self.gain_drift_sigma}")
        if self.rbw_hz <= 0.0 or self.span_hz <= 0.0:
            raise ValueError("span_hz and rbw_hz must be > 0")

    def bin_freqs(self) -> np.ndarray:
        return make_bins(self.carrier_hz, self.span_hz, self.rbw_hz)

    def carrier_index(self) -> int:
        freqs = self.bin_freqs()
        idx = int(np.argmin(np.abs(freqs - self.carrier_hz)))
        if abs(freqs[idx] - self.carrier_hz) > 1e-6 * self.rbw_hz:
            raise ValueError(
                f"carrier {self.carrier_hz!r} Hz does not land on a bin center"
            )
        return idx


def make_bins(carrier_hz: float, span_hz: float, rbw_hz: float) -> np.ndarray:
    """Bin center frequencies: the span around the carrier in RBW steps."""
    n_steps = int(round(span_hz / rbw_hz))
    if abs(n_steps * rbw_hz - span_hz) > 1e-6 * rbw_hz or n_steps < 2:
        raise ValueError(
            f"span {span_hz!r} Hz must be a multiple (>= 2) of the RBW {rbw_hz!r} Hz"
        )
    return carrier_hz - span_hz / 2.0 + rbw_hz * np.arange(n_steps + 1)


@dataclass(frozen=True)
class SpectrumRecord:
    """One measured spectrum: a port, a quadrature, and per-bin levels."""

    port: str
    quadrature: Quadrature
    freqs_hz: np.ndarray
    levels: np.ndarray
    averages: int


@dataclass(frozen=True)
class RunRecord:
    """Estimates from one seeded run, all on the loss-corrected basis."""

    seed: int
    gain_true_plus: float
    gain_true_minus: float
    gain_est_plus: float
    gain_est_minus: float
    alpha_in_plus: float
    alpha_in_minus: float
    alpha_out_plus: float
    alpha_out_minus: float
    var_in_plus: float
    var_in_minus: float
    var_out_plus: float
    var_out_minus: float
    fidelity_verified: float
    fidelity_assumed: float
    t_q: float
    v_q: float
    m: float
    timestamp: str = ""


_RUNRECORD_COLUMNS = tuple(RunRecord.__dataclass_fields__)


def _realized_protocol(cfg: PipelineConfig, rng: np.random.Generator) -> ProtocolConfig:
    if cfg.gain_drift_sigma == 0.0:
        return cfg.protocol
    offset = rng.normal(0.0, cfg.gain_drift_sigma)
    gains = cfg.protocol.gains
    return cfg.protocol.with_gains(
        Gains(max(gains.g_plus + offset, 0.0), max(gains.g_minus + offset, 0.0))
    )


def _true_levels(protocol: ProtocolConfig) -> dict[tuple[str, Quadrature], tuple[float, float]]:
    """(noise floor, carrier mean square) per port and quadrature, as detected.

    The verifier measures the input beam through the same lossy homodyne
    as the output, so its moments pass through the loss map too; the
    output field already carries that loss from the protocol run.
    """
    result = teleport_assembled(protocol)
    seen_input = apply_loss(result.input, protocol.victor_efficiency, "victor_in_vac")
    levels = {}
    for port, field_ in (("input", seen_input), ("output", result.output)):
        for quad in (PLUS, MINUS):
            floor = variance(field_, quad)
            carrier = floor + 4.0 * field_.alpha(quad) ** 2
            levels[(port, quad)] = (floor, carrier)
    return levels


def synth_spectra(
    cfg: PipelineConfig, seed: int
) -> tuple[list[SpectrumRecord], ProtocolConfig]:
    """Simulate the four analyzer traces for one seeded run.

    Draw order is fixed (gain drift first, then input plus, input minus,
    output plus, output minus) so records are bit-reproducible.  Each bin
    averages ``cfg.averages`` exponential periodogram samples, giving a
    scaled chi-square law.  Returns the traces and the per-run protocol
    actually realized (drifted gains included).
    """
    rng = np.random.default_rng(seed)
    realized = _realized_protocol(cfg, rng)
    levels = _true_levels(realized)
    freqs = cfg.bin_freqs()
    carrier_idx = cfg.carrier_index()
    records = []
    for port in PORTS:
        for quad in (PLUS, MINUS):
            floor, carrier = levels[(port, quad)]
            truth = np.full(freqs.size, floor)
            truth[carrier_idx] = carrier
            if cfg.noiseless:
                sampled = truth
            else:
                sampled = truth * rng.chisquare(cfg.averages, size=freqs.size) / cfg.averages
            records.append(
                SpectrumRecord(
                    port=port,
                    quadrature=quad,
                    freqs_hz=freqs,
                    levels=sampled,
                    averages=cfg.averages,
                )
            )
    return records, realized


def band_average(
    spectrum: SpectrumRecord,
    windows_hz: Sequence[tuple[float, float]],
    rbw_hz: float,
    carrier_hz: Optional[float] = None,
) -> float:
    """Overlap-weighted mean level over the sideband windows.

    Each bin spans ``rbw_hz`` around its center; its weight is the
    fraction of that span covered by the windows.  Passing the carrier
    frequency arms a guard: any positive weight on the carrier bin is an
    error, because the signal peak would contaminate the noise floor.
    """
    freqs = spectrum.freqs_hz
    weights = np.zeros(freqs.size)
    for lo, hi in windows_hz:
        if hi <= lo:
            raise ValueError(f"window ({lo!r}, {hi!r}) Hz is empty")
        left = np.maximum(freqs - rbw_hz / 2.0, lo)
        right = np.minimum(freqs + rbw_hz / 2.0, hi)
        weights += np.maximum(right - left, 0.0) / rbw_hz
    if carrier_hz is not None:
        on_carrier = np.abs(freqs - carrier_hz) <= rbw_hz / 2.0
        if np.any(weights[on_carrier] > 0.0):
            raise ValueError("sideband window overlaps the carrier bin")
    total = float(weights.sum())
    if total <= 0.0:
        raise ValueError("sideband windows do not overlap any bin")
    return float(np.dot(weights, spectrum.levels) / total)


def estimate_alpha(mean_square: float, noise_floor: float) -> float:
    """Coherent amplitude from the carrier excess over the noise floor.

    Inverts ``mean_square = 4 alpha^2 + noise_floor``.  A carrier below
    the floor has no real solution and is reported as an error rather
    than clamped; with signal-free runs this happens roughly half the
    time, so amplitude estimation needs a visible carrier.
    """
    excess = mean_square - noise_floor
    if excess < 0.0:
        raise ValueError(
            f"carrier level {mean_square!r} below the noise floor {noise_floor!r}"
        )
    return 0.5 * math.sqrt(excess)


def calibrate_gain_large_signal(mean_square_in: float, mean_square_out: float) -> float:
    """Gain from carrier powers alone, valid when the signal dwarfs the noise."""
    if mean_square_in <= 0.0 or mean_square_out < 0.0:
        raise ValueError("mean squares must be positive")
    return math.sqrt(mean_square_out / mean_square_in)


CARRIER_SIGNIFICANCE = 5.0
"""How many sampling sigmas the carrier must clear the floor by.

One chi-square-averaged bin has relative standard error sqrt(2/averages),
so an undisplaced quadrature pokes above the floor on about half of all
runs.  Demanding a five-sigma excess keeps those flukes out of the gain
calibration without ever consulting the ground truth.
"""


def run_once(cfg: PipelineConfig, seed: int, timestamp: str = "") -> RunRecord:
    """Full estimation chain for one seed.

    Synthesizes spectra, undoes the verifier loss on every measured
    level, reads noise floors and amplitudes, calibrates the gains from
    the amplitude ratios, and scores the run both with the verified
    gains and under the unity-gain assumption.  A quadrature without a
    statistically significant carrier gets amplitude zero; if that
    happens on an input, the gain there is unverifiable and every
    gain-dependent figure of merit in the record is NaN.
    """
    records, realized = synth_spectra(cfg, seed)
    eta = realized.victor_efficiency
    carrier_idx = cfg.carrier_index()

    floors: dict[tuple[str, Quadrature], float] = {}
    alphas: dict[tuple[str, Quadrature], float] = {}
    for record in records:
        floor = band_average(record, cfg.windows_hz, cfg.rbw_hz, cfg.carrier_hz)
        carrier = float(record.levels[carrier_idx])
        if eta < 1.0:
            floor = infer_out_loss(floor, eta)
            carrier = infer_out_loss(carrier, eta)
        key = (record.port, record.quadrature)
        floors[key] = floor
        threshold = CARRIER_SIGNIFICANCE * carrier * math.sqrt(2.0 / record.averages)
        visible = carrier - floor > threshold or (cfg.noiseless and carrier > floor)
        alphas[key] = estimate_alpha(carrier, floor) if visible else 0.0

    alpha_in = (alphas[("input", PLUS)], alphas[("input", MINUS)])
    alpha_out = (alphas[("output", PLUS)], alphas[("output", MINUS)])
    gain_est = tuple(
        out / inp if inp > 0.0 else math.nan
        for inp, out in zip(alpha_in, alpha_out)
    )
    var_in = (floors[("input", PLUS)], floors[("input", MINUS)])
    var_out = (floors[("output", PLUS)], floors[("output", MINUS)])

    coherent = all(abs(v - 1.0) <= 1e-9 for v in realized.input_variances)
    if not coherent:
        raise ValueError("fidelity estimation requires a coherent input scenario")
    if all(math.isfinite(g) for g in gain_est):
        report = build_report(
            alpha_in, alpha_out, var_in, var_out, Gains(*gain_est),
            corrected=True, coherent=True,
        )
        verified = report.fidelity if report.fidelity is not None else math.nan
        t_q, v_q, m = report.t_q, report.v_q, report.m
    else:
        # No carrier in some quadrature: the gain there cannot be
        # verified, so every gain-dependent figure of merit is undefined.
        # The unity-gain fidelity below survives; this is exactly the
        # opening the single-quadrature loophole walks through.
        verified = t_q = v_q = m = math.nan
    assumed = fidelity(alpha_in, UNITY_GAINS, var_out)

    return RunRecord(
        seed=seed,
        gain_true_plus=realized.gains.g_plus,
        gain_true_minus=realized.gains.g_minus,
        gain_est_plus=gain_est[0],
        gain_est_minus=gain_est[1],
        alpha_in_plus=alpha_in[0],
        alpha_in_minus=alpha_in[1],
        alpha_out_plus=alpha_out[0],
        alpha_out_minus=alpha_out[1],
        var_in_plus=var_in[0],
        var_in_minus=var_in[1],
        var_out_plus=var_out[0],
        var_out_minus=var_out[1],
        fidelity_verified=verified,
        fidelity_assumed=assumed,
        t_q=t_q,
        v_q=v_q,
        m=m,
        timestamp=timestamp,
    )


def worker_count() -> int:
    """Worker processes requested through the environment, default serial."""
    raw = os.environ.get(WORKERS_ENV, "").strip()
    if not raw:
        return 1
    try:
        count = int(raw)
    except ValueError as exc:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from exc
    if count < 1:
        raise ValueError(f"{WORKERS_ENV} must be >= 1, got {count}")
    return count


def run_many(
    cfg: PipelineConfig, seeds: Iterable[int], timestamp: str = ""
) -> list[RunRecord]:
    """One record per seed, in the given seed order.

    Fans out over processes when the environment requests workers; the
    per-seed generators make the result identical for any worker count.
    """
    seed_list = list(seeds)
    workers = worker_count()
    job = partial(run_once, cfg, timestamp=timestamp)
    if workers == 1 or len(seed_list) < 2:
        return [job(seed) for seed in seed_list]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunk = max(1, len(seed_list) // (workers * 4))
        return list(pool.map(job, seed_list, chunksize=chunk))


def fidelity_histogram(runs: Sequence[RunRecord], mode: str = "verified_gain") -> np.ndarray:
    """Per-run fidelities under one gain treatment, in run order.

    ``verified_gain`` scores each run with its calibrated gains;
    ``assume_unity`` pretends the gain was exactly 1, which inflates the
    score whenever the true gain wandered (the penalty exponent is
    silently dropped).
    """
    if mode == "verified_gain":
        return np.array([r.fidelity_verified for r in runs])
    if mode == "assume_unity":
        return np.array([r.fidelity_assumed for r in runs])
    raise ValueError(f"unknown histogram mode {mode!r}")


def loophole_demo(cfg: ProtocolConfig) -> tuple[float, MeasureReport]:
    """Exact-moment evaluation of a gain-asymmetry benchmark exploit.

    With the signal confined to one quadrature, lowering the other
    quadrature's gain sheds added noise without any amplitude penalty,
    so the computed fidelity rises above the honest symmetric value.
    The returned report shows the joint measures staying unimpressive,
    which is how the exploit is caught.
    """
    report = run_report(cfg, corrected=True)
    if report.fidelity is None:
        raise ValueError("the fidelity exploit needs a coherent input")
    return report.fidelity, report


def frequency_response_model(
    protocol: ProtocolConfig,
    freqs_hz: np.ndarray,
    *,
    delay_s: float = 0.0,
    rolloff: str = "flat",
    corner_hz: Optional[float] = None,
    carrier_hz: float = 8.4e6,
) -> tuple[np.ndarray, np.ndarray]:
    """Output noise spectra when the feed-forward has delay and rolloff.

    The electronic path multiplies the gains by a magnitude profile
    (``flat``, or ``one-pole`` normalized to 1 at the carrier) and a
    phase ``2 pi (f - carrier) delay``, referenced to the carrier where
    the loop is locked for maximum cancellation.  Away from ideal phase
    the squeezed-arm cross term rotates out of cancellation, producing
    fringes with period ``1/delay``; as the gain rolls off the spectrum
    settles to the receiver's bare arm variance.  Verifier loss is
    applied last, matching how the scenario's spectra are detected.
    """
    freqs = np.asarray(freqs_hz, dtype=float)
    if rolloff == "flat":
        profile = np.ones_like(freqs)
    elif rolloff == "one-pole":
        if corner_hz is None or corner_hz <= 0.0:
            raise ValueError("one-pole rolloff needs a positive corner_hz")
        profile = np.sqrt(
            (1.0 + (carrier_hz / corner_hz) ** 2) / (1.0 + (freqs / corner_hz) ** 2)
        )
    else:
        raise ValueError(f"unknown rolloff {rolloff!r}")
    phase_cos = np.cos(2.0 * math.pi * (freqs - carrier_hz) * delay_s)

    s1, s2 = protocol.squeezer_1, protocol.squeezer_2
    eta_b = protocol.bob_efficiency
    root_eta_b = math.sqrt(eta_b)
    spectra = []
    for quad, g0 in ((PLUS, protocol.gains.g_plus), (MINUS, protocol.gains.g_minus)):
        if quad is PLUS:
            arm_var = (s1.var_sqz + s2.var_anti) / 2.0
            cross = (s1.var_sqz - s2.var_anti) / 2.0
            v_in = protocol.input_variances[0]
        else:
            arm_var = (s1.var_anti + s2.var_sqz) / 2.0
            cross = (s2.var_sqz - s1.var_anti) / 2.0
            v_in = protocol.input_variances[1]
        g = g0 * profile
        var = (
            g * g * (v_in + arm_var + 2.0 * protocol.dark_noise)
            + eta_b * arm_var
            + (1.0 - eta_b)
            + 2.0 * root_eta_b * g * phase_cos * cross
        )
        eta_v = protocol.victor_efficiency
        spectra.append(eta_v * var + (1.0 - eta_v))
    return spectra[0], spectra[1]


def write_runrecords(path: str, runs: Sequence[RunRecord]) -> None:
    """Persist records as versioned line-delimited text (header + CSV rows)."""
    columns = _RUNRECORD_COLUMNS
    lines = [RUNRECORD_SCHEMA, ",".join(columns)]
    for run in runs:
        lines.append(",".join(_format_cell(getattr(run, col)) for col in columns))
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


def read_runrecords(path: str) -> list[RunRecord]:
    with open(path, "r", encoding="utf-8") as handle:
        lines = [line.rstrip("\n") for line in handle]
    if not lines or lines[0] != RUNRECORD_SCHEMA:
        raise ValueError(f"{path} does not start with {RUNRECORD_SCHEMA!r}")
    header = lines[1].split(",")
    if header != list(_RUNRECORD_COLUMNS):
        raise ValueError(f"unexpected run record columns: {header!r}")
    runs = []
    for line in lines[2:]:
        if not line:
            continue
        cells = line.split(",")
        kwargs = {}
        for name, cell in zip(header, cells):
            if name == "seed":
                kwargs[name] = int(cell)
            elif name == "timestamp":
                kwargs[name] = cell
            else:
                kwargs[name] = float(cell)
        runs.append(RunRecord(**kwargs))
    return runs


def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def spectra_rows(records: Sequence[SpectrumRecord]) -> list[tuple[float, str, str, float]]:
    """Flatten spectra to (freq_hz, quadrature, port, variance) rows."""
    rows = []
    for record in records:
        for freq, level in zip(record.freqs_hz, record.levels):
            rows.append((float(freq), record.quadrature.value, record.port, float(level)))
    return rows

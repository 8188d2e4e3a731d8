"""Characterization measures for teleportation runs.

Four families of figures of merit are computed, all from first and
second moments:

* fidelity of coherent-state reconstruction,
* quadrature signal-transfer coefficients and their joint form,
* the conditional-variance product between input and output,
* the gain-normalized conditional-variance product, whose value below 1
  certifies that the channel used entanglement at any gain.

Entanglement between two beams is quantified by the normalized product
form of the two-mode correlation inequality, minimized over the
combination weight, alongside the conditional-variance paradox product
and the resource mixedness.

Reports can be stated in the raw detected basis or corrected for the
verifier's calibrated homodyne loss; benchmark comparisons use the
corrected basis throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .noise import LinearField, MINUS, PLUS, conditional_variance, covariance, variance
from .numerics import coarse_then_golden, golden_section_min_vec
from .protocol import (
    Gains,
    ProtocolConfig,
    ScenarioResult,
    SqueezerSpec,
    infer_out_loss,
    teleport_assembled,
)

#: Best fidelity a channel with no entanglement can reach on a broad,
#: uniformly drawn alphabet of coherent inputs.  Finite alphabets shift
#: this bound upward a little; that caveat is documented, not modeled.
CLASSICAL_FIDELITY_LIMIT = 0.5

#: Fidelity above which the receiver's copy is guaranteed better than any
#: other party's, for the same broad coherent alphabet.
NO_CLONING_FIDELITY_LIMIT = 2.0 / 3.0

#: Joint signal transfer reachable without entanglement.
CLASSICAL_TQ_LIMIT = 1.0

#: Unity-gain conditional-variance product floor without entanglement.
CLASSICAL_VQ_LIMIT = 1.0


def snr(alpha: float, variance_: float) -> float:
    """Signal-to-noise ratio of one quadrature: amplitude power over noise power."""
    if variance_ <= 0.0:
        raise ValueError(f"variance must be > 0, got {variance_}")
    return alpha * alpha / variance_


def separable_vq_limit(gains: Gains) -> float:
    """Conditional-variance product floor for separable added noise, (|g+g-|+1)^2."""
    return (abs(gains.g_plus * gains.g_minus) + 1.0) ** 2


def fidelity(
    alpha_in: tuple[float, float],
    gains: Gains,
    out_variances: tuple[float, float],
    in_variances: tuple[float, float] = (1.0, 1.0),
) -> float:
    """Coherent-state teleportation fidelity.

    The overlap of a coherent input with the Gaussian output is
    ``2 exp(-k+ - k-) / sqrt((1 + V+)(1 + V-))`` with penalty exponents
    ``k = alpha_in^2 (1 - g)^2 / (1 + V)`` per quadrature.  The closed
    form holds for coherent inputs only, so non-unit input variances are
    rejected.
    """
    for v in in_variances:
        if abs(v - 1.0) > 1e-9:
            raise ValueError(
                f"fidelity is defined for coherent inputs only; "
                f"got input variances {in_variances!r}"
            )
    vp, vm = out_variances
    if vp <= 0.0 or vm <= 0.0:
        raise ValueError(f"output variances must be > 0, got {out_variances!r}")
    k_plus = alpha_in[0] ** 2 * (1.0 - gains.g_plus) ** 2 / (1.0 + vp)
    k_minus = alpha_in[1] ** 2 * (1.0 - gains.g_minus) ** 2 / (1.0 + vm)
    return 2.0 * math.exp(-k_plus - k_minus) / math.sqrt((1.0 + vp) * (1.0 + vm))


def signal_transfer(
    alpha_in: tuple[float, float],
    in_variances: tuple[float, float],
    alpha_out: tuple[float, float],
    out_variances: tuple[float, float],
) -> tuple[float, float, float]:
    """Quadrature signal-transfer coefficients and their joint form.

    ``T = SNR_out / SNR_in`` per quadrature.  The joint coefficient is
    ``T+ + T- - T+ T- (1 - 1/(Vin+ Vin-))``, which for minimum-uncertainty
    inputs reduces to the plain sum.  Requires nonzero input amplitudes;
    scenario reports use the gain-based equivalent instead so that
    signal-free runs still characterize.
    """
    if alpha_in[0] == 0.0 or alpha_in[1] == 0.0:
        raise ValueError("signal transfer is undefined for zero input amplitude")
    t_plus = snr(alpha_out[0], out_variances[0]) / snr(alpha_in[0], in_variances[0])
    t_minus = snr(alpha_out[1], out_variances[1]) / snr(alpha_in[1], in_variances[1])
    t_q = _joint_transfer(t_plus, t_minus, in_variances)
    return t_plus, t_minus, t_q


def _joint_transfer(
    t_plus: float, t_minus: float, in_variances: tuple[float, float]
) -> float:
    penalty = 1.0 - 1.0 / (in_variances[0] * in_variances[1])
    return t_plus + t_minus - t_plus * t_minus * penalty


def conditional_variance_product(
    in_field: LinearField, out_field: LinearField
) -> tuple[float, float, float]:
    """Per-quadrature conditional variances of output given input, and their product."""
    v_plus = conditional_variance(out_field, in_field, PLUS)
    v_minus = conditional_variance(out_field, in_field, MINUS)
    return v_plus, v_minus, v_plus * v_minus


def gain_normalized_cv(v_q: float, gains: Gains) -> float:
    """Conditional-variance product over its separable-noise floor.

    Exact moments give ``v_q >= 0``; sampled estimates may dip below
    zero, and the normalized form keeps the sign in that case.
    """
    return v_q / separable_vq_limit(gains)


def m_min(gains: Gains) -> float:
    """Smallest physically possible gain-normalized product at fixed gains."""
    product = gains.g_plus * gains.g_minus
    return (product - 1.0) ** 2 / (abs(product) + 1.0) ** 2


def m_gain_bandwidth(squeezer: SqueezerSpec) -> tuple[float, float]:
    """Gain interval on which the normalized product drops below 1.

    For matched squeezers through the ideal protocol the endpoints are
    ``r +/- sqrt(r^2 - 1)`` with ``r = (var_anti - var_sqz) /
    (var_anti + var_sqz - 2)``; their product is 1.  Stronger squeezing
    narrows the band toward {1}, weaker squeezing widens it.
    """
    s, a = squeezer.var_sqz, squeezer.var_anti
    if a + s <= 2.0:
        raise ValueError(
            f"degenerate resource: var_anti + var_sqz = {a + s!r} <= 2 "
            "gives no finite band"
        )
    r = (a - s) / (a + s - 2.0)
    if r < 1.0:
        raise ValueError(f"no real band endpoints: r = {r!r} < 1")
    half_width = math.sqrt(r * r - 1.0)
    return r - half_width, r + half_width


def classical_vq_bound(
    gains: Gains,
    *,
    restarts: int = 200,
    seed: int = 0,
    box: float = 12.0,
    tol: float = 1e-10,
    max_sweeps: int = 40,
) -> float:
    """Numerically minimized conditional-variance product without entanglement.

    The measure-and-displace channel adds one uncertainty-limited noise
    pair at the measurement and one at the reconstruction.  With both
    pairs saturated the variances reduce to a two-exponent family,

        (g+^2 e^a + e^b) (g-^2 e^-a + e^-b),

    where ``a`` and ``b`` are the log variances of the sender-side and
    receiver-side plus-quadrature noises (the minus partners are pinned
    by the saturated products).  Projected coordinate descent with
    golden-section line searches runs from log-uniform restarts; the
    deterministic seed keeps the result reproducible.
    """
    gp2 = gains.g_plus ** 2
    gm2 = gains.g_minus ** 2

    def product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return (gp2 * np.exp(a) + np.exp(b)) * (gm2 * np.exp(-a) + np.exp(-b))

    rng = np.random.default_rng(seed)
    a = rng.uniform(-4.0, 4.0, size=restarts)
    b = rng.uniform(-4.0, 4.0, size=restarts)
    lo = np.full(restarts, -box)
    hi = np.full(restarts, box)

    best = product(a, b)
    for _ in range(max_sweeps):
        a, _ = golden_section_min_vec(lambda t: product(t, b), lo, hi)
        b, _ = golden_section_min_vec(lambda t: product(a, t), lo, hi)
        current = product(a, b)
        improved = best - current
        best = np.minimum(best, current)
        if np.all(improved <= tol):
            return float(best.min())
    worst = int(np.argmax(best))
    raise RuntimeError(
        "classical bound optimizer did not converge after "
        f"{max_sweeps} sweeps; worst iterate a={a[worst]!r} b={b[worst]!r} "
        f"value={best[worst]!r} for gains {gains!r}"
    )


@dataclass(frozen=True)
class InseparabilityReport:
    """Two-mode entanglement summary.

    ``i_value`` is the normalized product form minimized over the
    combination weight ``k`` (both sign pairings tried); values below 1
    certify inseparability.  ``i_at_unit_k`` restricts the same form to
    ``k = 1``, and ``tan_sum`` is the corresponding raw sum of combination
    variances whose separable floor is 4.  ``epr_product`` is the product
    of conditional variances of one beam given the other (below 1
    demonstrates the quadrature paradox), and ``mixedness`` the variance
    product of the generating squeezers when the caller knows it.
    """

    i_value: float
    k_opt: float
    i_at_unit_k: float
    tan_sum: float
    epr_product: float
    mixedness: Optional[float] = None
    signs: tuple[int, int] = (1, -1)

    def __post_init__(self) -> None:
        if self.i_value > self.i_at_unit_k + 1e-9:
            raise ValueError(
                f"weight optimization must not lose to k=1: "
                f"{self.i_value!r} > {self.i_at_unit_k!r}"
            )


_SIGN_PAIRINGS = ((1, -1), (-1, 1))


def inseparability(
    x: LinearField,
    y: LinearField,
    resource: Optional[SqueezerSpec] = None,
) -> InseparabilityReport:
    """Degree of inseparability between two beams.

    Evaluates sqrt(V+ V-) / (k^2 + 1/k^2) where V+- are the variances of
    the combinations ``k X_x + s X_y / k`` with opposite signs ``s`` on
    the two quadratures.  The weight is minimized by golden-section
    search on log k in [-4, 4] after a 64-point coarse bracket; both
    sign pairings are evaluated and the better kept.
    """
    moments = {}
    for quad in (PLUS, MINUS):
        vx = variance(x, quad)
        vy = variance(y, quad)
        if vx <= 0.0 or vy <= 0.0:
            raise ValueError(f"degenerate variance on quadrature {quad.value!r}")
        moments[quad] = (vx, vy, covariance(x, quad, y, quad))

    def product_form(k: float, signs: tuple[int, int]) -> float:
        k2 = k * k
        combos = []
        for quad, sign in zip((PLUS, MINUS), signs):
            vx, vy, c = moments[quad]
            combos.append(max(k2 * vx + vy / k2 + 2.0 * sign * c, 0.0))
        return math.sqrt(combos[0] * combos[1]) / (k2 + 1.0 / k2)

    best: Optional[tuple[float, float, tuple[int, int]]] = None
    for signs in _SIGN_PAIRINGS:
        log_k, value = coarse_then_golden(
            lambda u, s=signs: product_form(math.exp(u), s),
            -4.0,
            4.0,
            n_coarse=64,
            tol=1e-8,
        )
        if best is None or value < best[1]:
            best = (math.exp(log_k), value, signs)
    assert best is not None
    k_opt, i_value, signs = best

    unit_combos = []
    for quad, sign in zip((PLUS, MINUS), signs):
        vx, vy, c = moments[quad]
        unit_combos.append(max(vx + vy + 2.0 * sign * c, 0.0))
    tan_sum = unit_combos[0] + unit_combos[1]
    i_at_unit_k = math.sqrt(unit_combos[0] * unit_combos[1]) / 2.0

    epr_product = conditional_variance(x, y, PLUS) * conditional_variance(x, y, MINUS)
    return InseparabilityReport(
        i_value=min(i_value, i_at_unit_k),
        k_opt=k_opt,
        i_at_unit_k=i_at_unit_k,
        tan_sum=tan_sum,
        epr_product=epr_product,
        mixedness=resource.mixedness if resource is not None else None,
        signs=signs,
    )


@dataclass(frozen=True)
class MeasureReport:
    """All scalar measures of one scenario, with the moments behind them.

    ``fidelity`` is None when the input is not coherent (the closed form
    does not apply there).  ``corrected`` records whether the verifier's
    homodyne loss was inferred out of the output moments before measures
    were computed.
    """

    fidelity: Optional[float]
    t_plus: float
    t_minus: float
    t_q: float
    v_plus: float
    v_minus: float
    v_q: float
    m: float
    gains: Gains
    alpha_in: tuple[float, float]
    alpha_out: tuple[float, float]
    in_variances: tuple[float, float]
    out_variances: tuple[float, float]
    corrected: bool = False

    def __post_init__(self) -> None:
        if self.t_q > 2.0 + 1e-9:
            raise ValueError(f"joint transfer cannot exceed 2: {self.t_q!r}")
        floor = separable_vq_limit(self.gains)
        if abs(self.m * floor - self.v_q) > 1e-9 * max(1.0, self.v_q):
            raise ValueError(
                f"m = {self.m!r} does not match v_q = {self.v_q!r} at gains {self.gains!r}"
            )
        if self.fidelity is not None and not -1e-12 <= self.fidelity <= 1.0 + 1e-6:
            raise ValueError(f"fidelity out of range: {self.fidelity!r}")

    def metric(self, name: str) -> float:
        """Scalar accessor used by gain optimizers and CSV writers."""
        if name.startswith("_") or not hasattr(self, name):
            raise KeyError(
                f"no metric {name!r}; known scalars include fidelity, "
                "t_plus, t_minus, t_q, v_plus, v_minus, v_q, m"
            )
        value = getattr(self, name)
        if value is None:
            raise ValueError(f"metric {name!r} is undefined for this report")
        if not isinstance(value, (int, float)):
            raise KeyError(f"metric {name!r} is not scalar")
        return float(value)


def build_report(
    alpha_in: tuple[float, float],
    alpha_out: tuple[float, float],
    in_variances: tuple[float, float],
    out_variances: tuple[float, float],
    gains: Gains,
    corrected: bool = False,
    coherent: Optional[bool] = None,
) -> MeasureReport:
    """Assemble a report from moments, however they were obtained.

    This is the single formula path shared by exact scenario evaluation
    and by the sampled estimation pipeline: transfer uses the
    gain-squared variance ratio (identical to the SNR ratio whenever the
    amplitudes are nonzero), and the conditional variances use
    ``V_out - g^2 V_in``.  ``coherent`` asserts that the source is known
    to be coherent even when sampled input variances wander off 1; left
    as None it is auto-detected from the input variances.
    """
    t_plus = gains.g_plus ** 2 * in_variances[0] / out_variances[0]
    t_minus = gains.g_minus ** 2 * in_variances[1] / out_variances[1]
    t_q = _joint_transfer(t_plus, t_minus, in_variances)
    v_plus = out_variances[0] - gains.g_plus ** 2 * in_variances[0]
    v_minus = out_variances[1] - gains.g_minus ** 2 * in_variances[1]
    v_q = v_plus * v_minus
    if coherent is None:
        coherent = all(abs(v - 1.0) <= 1e-9 for v in in_variances)
    return MeasureReport(
        fidelity=fidelity(alpha_in, gains, out_variances) if coherent else None,
        t_plus=t_plus,
        t_minus=t_minus,
        t_q=t_q,
        v_plus=v_plus,
        v_minus=v_minus,
        v_q=v_q,
        m=gain_normalized_cv(v_q, gains),
        gains=gains,
        alpha_in=alpha_in,
        alpha_out=alpha_out,
        in_variances=in_variances,
        out_variances=out_variances,
        corrected=corrected,
    )


def measure_scenario(
    result: ScenarioResult,
    corrected: bool = True,
    party: str = "bob",
) -> MeasureReport:
    """Report for one protocol run, from exact moments.

    ``party`` selects the receiver's output or the eavesdropper's
    reconstruction; the eavesdropper detects losslessly so no correction
    applies to her.  Gains are estimated from the input/output covariance
    (well defined even for signal-free runs) and, in the corrected basis,
    return to the configured feed-forward values.
    """
    if party == "bob":
        out = result.output
        efficiency = result.config.victor_efficiency
    elif party == "eve":
        if result.eve_output is None:
            raise ValueError("scenario has no eavesdropper output")
        out = result.eve_output
        efficiency = 1.0
    else:
        raise ValueError(f"unknown party {party!r}")

    in_field = result.input
    in_vars = (variance(in_field, PLUS), variance(in_field, MINUS))
    out_vars = [variance(out, PLUS), variance(out, MINUS)]
    covs = [covariance(in_field, PLUS, out, PLUS), covariance(in_field, MINUS, out, MINUS)]
    alpha_out = [out.alpha(PLUS), out.alpha(MINUS)]

    if corrected and efficiency < 1.0:
        root_eff = math.sqrt(efficiency)
        out_vars = [infer_out_loss(v, efficiency) for v in out_vars]
        covs = [c / root_eff for c in covs]
        alpha_out = [a / root_eff for a in alpha_out]

    gains = Gains(covs[0] / in_vars[0], covs[1] / in_vars[1])
    return build_report(
        alpha_in=(in_field.alpha(PLUS), in_field.alpha(MINUS)),
        alpha_out=(alpha_out[0], alpha_out[1]),
        in_variances=in_vars,
        out_variances=(out_vars[0], out_vars[1]),
        gains=gains,
        corrected=corrected,
    )


def run_report(cfg: ProtocolConfig, corrected: bool = True) -> MeasureReport:
    """Assemble the protocol for ``cfg`` and report its measures."""
    return measure_scenario(teleport_assembled(cfg), corrected=corrected)


_METRIC_MAXIMIZE = {"fidelity": True, "t_q": True, "v_q": False, "m": False}


def optimize_symmetric_gain(
    cfg: ProtocolConfig,
    metric: str,
    lo: float = 0.0,
    hi: float = 2.5,
    *,
    party: str = "bob",
    maximize: Optional[bool] = None,
    n_coarse: int = 96,
    tol: float = 1e-9,
) -> tuple[float, float]:
    """Best symmetric gain for one metric, by coarse scan plus golden section.

    For ``party="eve"`` the protocol gains stay fixed and the
    eavesdropper's reconstruction gain is varied instead.
    """
    if maximize is None:
        maximize = _METRIC_MAXIMIZE[metric]

    def objective(g: float) -> float:
        gains = Gains.symmetric(g)
        if party == "eve":
            result = teleport_assembled(cfg, eve_gains=gains)
        else:
            result = teleport_assembled(cfg.with_gains(gains))
        value = measure_scenario(result, corrected=True, party=party).metric(metric)
        return -value if maximize else value

    g_best, f_best = coarse_then_golden(objective, lo, hi, n_coarse=n_coarse, tol=tol)
    return g_best, -f_best if maximize else f_best


@dataclass(frozen=True)
class TvRow:
    """One grid point of a transfer-versus-conditional-variance map."""

    var_sqz: float
    gain: float
    t_q: float
    v_q: float
    fidelity: Optional[float]
    alpha: float


def tv_sweep(
    squeezers: Sequence[SqueezerSpec],
    gain_values: Iterable[float],
    template: ProtocolConfig,
) -> list[TvRow]:
    """Evaluate the T-V map over a squeezer grid times a gain grid.

    Fidelity is evaluated at the template's input amplitude; the sum of
    the squared quadrature amplitudes is reported as the scalar signal
    size.  Rows are emitted in grid order (squeezer-major) and each point
    is independent, so concurrent evaluation cannot reorder results.
    """
    alpha = math.hypot(*template.input_alpha)
    rows = []
    for squeezer in squeezers:
        for g in gain_values:
            cfg = replace(
                template,
                squeezer_1=squeezer,
                squeezer_2=squeezer,
                gains=Gains.symmetric(g),
            )
            report = run_report(cfg)
            rows.append(
                TvRow(
                    var_sqz=squeezer.var_sqz,
                    gain=g,
                    t_q=report.t_q,
                    v_q=report.v_q,
                    fidelity=report.fidelity,
                    alpha=alpha,
                )
            )
    return rows

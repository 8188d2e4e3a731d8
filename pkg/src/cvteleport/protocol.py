"""Continuous-variable teleportation protocol built on the noise algebra.

The sender interferes the input with one arm of an entangled pair
produced by combining two amplitude-squeezed beams on a pi/2 beamsplitter,
detects both quadrature photocurrents, and the receiver displaces the
other arm with electronic gains.  Two construction routes are provided:

* ``teleport_closed_form`` writes the output expansion directly,
* ``teleport_assembled`` walks the optical layout element by element
  (measurement beamsplitter, optional eavesdropper tap, receiver coupler
  loss, detector dark noise, verifier loss).

The two routes agree on every second moment; they may differ in the sign
of individual squeezed-term coefficients, which no measurement can see.
Feed-forward gains are real and nonnegative throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from .noise import (
    MINUS,
    MINUS_ONLY,
    PLUS,
    PLUS_ONLY,
    ElementaryNoise,
    LinearField,
    Route,
    STRAIGHT,
    apply_loss,
    beamsplitter,
    mode_field,
    superpose,
    vacuum_field,
)

SQRT2 = math.sqrt(2.0)


def db_to_variance(db: float) -> float:
    """Squeezing quoted in dB below shot noise to a variance."""
    return 10.0 ** (-db / 10.0)


def variance_to_db(var: float) -> float:
    if var <= 0.0:
        raise ValueError(f"variance must be > 0, got {var}")
    return -10.0 * math.log10(var)


@dataclass(frozen=True)
class SqueezerSpec:
    """Squeezed-quadrature and antisqueezed-quadrature variances of one source.

    ``var_sqz`` must lie in (0, 1]; the uncertainty floor requires
    ``var_sqz * var_anti >= 1``.  A spec is pure when the product is 1.
    """

    var_sqz: float
    var_anti: float

    def __post_init__(self) -> None:
        if not 0.0 < self.var_sqz <= 1.0:
            raise ValueError(f"var_sqz must be in (0, 1], got {self.var_sqz}")
        if self.var_sqz * self.var_anti < 1.0 - 1e-9:
            raise ValueError(
                f"uncertainty floor violated: var_sqz*var_anti = "
                f"{self.var_sqz * self.var_anti!r} < 1"
            )

    @property
    def is_pure(self) -> bool:
        return abs(self.var_sqz * self.var_anti - 1.0) <= 1e-9

    @property
    def mixedness(self) -> float:
        """Product of the two variances; 1 for a pure squeezed state."""
        return self.var_sqz * self.var_anti

    @classmethod
    def pure(cls, var_sqz: float) -> "SqueezerSpec":
        return cls(var_sqz, 1.0 / var_sqz)

    @classmethod
    def vacuum(cls) -> "SqueezerSpec":
        return cls(1.0, 1.0)

    def as_noise(self, noise_id: str) -> ElementaryNoise:
        return ElementaryNoise.squeezed(noise_id, self.var_sqz, self.var_anti)


@dataclass(frozen=True)
class Gains:
    """Amplitude-domain feed-forward gains for the two quadratures."""

    g_plus: float
    g_minus: float

    def __post_init__(self) -> None:
        if self.g_plus < 0.0 or self.g_minus < 0.0:
            raise ValueError(f"gains must be nonnegative, got {self}")

    @property
    def product(self) -> float:
        return self.g_plus * self.g_minus

    @property
    def scalar(self) -> float:
        """Geometric mean, the single-number gain used on sweep axes."""
        return math.sqrt(self.g_plus * self.g_minus)

    @classmethod
    def symmetric(cls, g: float) -> "Gains":
        return cls(g, g)


UNITY_GAINS = Gains(1.0, 1.0)


class EveTapSite(Enum):
    """Where an eavesdropper inserts her beamsplitter tap, if anywhere."""

    NONE = "none"
    ALICE_ARM = "alice_arm"
    BOB_ARM = "bob_arm"


@dataclass(frozen=True)
class ProtocolConfig:
    """Complete description of one teleportation scenario.

    The channel defaults are ideal (no verifier loss, no detector dark
    noise, lossless receiver coupler); the experiment-matching presets
    switch the imperfections on explicitly.  ``dark_noise`` is an
    additive variance on each detected photocurrent, ``victor_loss`` the
    verifier's homodyne loss, and ``bob_efficiency`` the effective
    transmission of the receiver's entangled arm through its
    displacement coupler.
    """

    squeezer_1: SqueezerSpec
    squeezer_2: SqueezerSpec
    input_alpha: tuple[float, float] = (0.0, 0.0)
    input_variances: tuple[float, float] = (1.0, 1.0)
    gains: Gains = UNITY_GAINS
    victor_loss: float = 0.0
    dark_noise: float = 0.0
    bob_efficiency: float = 1.0
    eve_tap_site: EveTapSite = EveTapSite.NONE
    eve_tap_fraction: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.victor_loss < 1.0:
            raise ValueError(f"victor_loss must be in [0, 1), got {self.victor_loss}")
        if self.dark_noise < 0.0:
            raise ValueError(f"dark_noise must be >= 0, got {self.dark_noise}")
        if not 0.0 < self.bob_efficiency <= 1.0:
            raise ValueError(f"bob_efficiency must be in (0, 1], got {self.bob_efficiency}")
        if not 0.0 <= self.eve_tap_fraction < 1.0:
            raise ValueError(
                f"eve_tap_fraction must be in [0, 1), got {self.eve_tap_fraction}"
            )
        for name, value in (
            ("input_variances[0]", self.input_variances[0]),
            ("input_variances[1]", self.input_variances[1]),
        ):
            if value <= 0.0:
                raise ValueError(f"{name} must be > 0, got {value}")

    @property
    def victor_efficiency(self) -> float:
        return 1.0 - self.victor_loss

    def with_gains(self, gains: Gains) -> "ProtocolConfig":
        return replace(self, gains=gains)


@dataclass(frozen=True)
class ScenarioResult:
    """Fields produced by one protocol run.

    ``output`` is the field the verifier receives (verifier loss already
    applied when configured); ``realized_gains`` are the amplitude map
    coefficients of that field relative to the input, so they shrink by
    ``sqrt(victor_efficiency)`` under verifier loss.
    """

    config: ProtocolConfig
    input: LinearField
    output: LinearField
    eve_output: Optional[LinearField]
    realized_gains: Gains


def make_epr(
    squeezer_1: SqueezerSpec,
    squeezer_2: SqueezerSpec,
    ids: tuple[str, str] = ("sqz1", "sqz2"),
) -> tuple[LinearField, LinearField]:
    """Entangled pair from two amplitude-squeezed beams on a pi/2 beamsplitter.

    Returns ``(arm_a, arm_b)``.  Both arms carry variance
    ``(var_sqz + var_anti) / 2`` per quadrature for matched squeezers,
    with inter-arm covariances of magnitude ``(var_anti - var_sqz) / 2``,
    negative on the amplitude quadrature and positive on the phase
    quadrature under this sign convention.
    """
    f1 = mode_field(squeezer_1.as_noise(ids[0]))
    f2 = mode_field(squeezer_2.as_noise(ids[1]))
    return beamsplitter(f1, f2, 0.5, math.pi / 2.0)


def infer_out_loss(measured_variance: float, efficiency: float) -> float:
    """Invert the loss map to recover the variance before a known loss.

    ``measured = efficiency * true + (1 - efficiency)`` solved for
    ``true``.  Raises if the arguments imply a negative variance.
    """
    if not 0.0 < efficiency <= 1.0:
        raise ValueError(f"efficiency must be in (0, 1], got {efficiency}")
    true_var = (measured_variance - (1.0 - efficiency)) / efficiency
    if true_var < 0.0:
        raise ValueError(
            f"measured variance {measured_variance!r} through efficiency "
            f"{efficiency!r} implies a negative inferred variance"
        )
    return true_var


def _input_field(cfg: ProtocolConfig, noise_id: str = "in") -> LinearField:
    noise = ElementaryNoise(
        noise_id, cfg.input_variances[0], cfg.input_variances[1],
        pure=abs(cfg.input_variances[0] * cfg.input_variances[1] - 1.0) <= 1e-12,
    )
    return mode_field(noise, cfg.input_alpha[0], cfg.input_alpha[1])


def _dark_field(dark_noise: float, noise_id: str) -> LinearField:
    """Detector dark noise as an electronic source, one quadrature per photocurrent."""
    return mode_field(ElementaryNoise(noise_id, dark_noise, dark_noise))


def teleport_field(
    input_field: LinearField,
    squeezer_1: SqueezerSpec,
    squeezer_2: SqueezerSpec,
    gains: Gains,
    *,
    bob_efficiency: float = 1.0,
    dark_noise: float = 0.0,
    victor_loss: float = 0.0,
    id_prefix: str = "tp",
) -> LinearField:
    """Closed-form teleportation map applied to an arbitrary field.

    The output expansion is written directly: the input enters with the
    feed-forward gains, and each pi/2-combined squeezed beam enters with
    weight ``(sqrt(bob_efficiency) +/- g) / sqrt(2)`` so that unity gain
    cancels the antisqueezed quadratures.  Verifier loss and photocurrent
    dark noise are appended at the end.
    """
    s1 = mode_field(squeezer_1.as_noise(f"{id_prefix}.sqz1"))
    s2 = mode_field(squeezer_2.as_noise(f"{id_prefix}.sqz2"))
    gp, gm = gains.g_plus, gains.g_minus
    root_eff = math.sqrt(bob_efficiency)
    terms = [
        (gp, input_field, PLUS_ONLY),
        (gm, input_field, MINUS_ONLY),
        ((root_eff + gp) / SQRT2, s1, PLUS_ONLY),
        ((root_eff - gp) / SQRT2, s2, Route(plus=MINUS, minus=None)),
        ((root_eff + gm) / SQRT2, s2, Route(plus=None, minus=PLUS)),
        ((root_eff - gm) / SQRT2, s1, MINUS_ONLY),
    ]
    if bob_efficiency < 1.0:
        coupler_vac = vacuum_field(f"{id_prefix}.coupler_vac")
        terms.append((math.sqrt(1.0 - bob_efficiency), coupler_vac, STRAIGHT))
    if dark_noise > 0.0:
        dark = _dark_field(dark_noise, f"{id_prefix}.dark")
        terms.append((SQRT2 * gp, dark, PLUS_ONLY))
        terms.append((SQRT2 * gm, dark, Route(plus=None, minus=MINUS)))
    out = superpose(terms)
    if victor_loss > 0.0:
        out = apply_loss(out, 1.0 - victor_loss, f"{id_prefix}.victor_vac")
    return out


def teleport_closed_form(cfg: ProtocolConfig) -> ScenarioResult:
    """Run the protocol through the direct output expansion.

    Only tap-free scenarios have a closed form; eavesdropper taps need
    the assembled layout.  With ideal channel settings the output
    variances are ``g^2 var_in + (1+g)^2/2 var_sqz + (1-g)^2/2 var_anti``
    per quadrature.
    """
    if cfg.eve_tap_site is not EveTapSite.NONE:
        raise ValueError(
            "closed form is defined for tap-free scenarios only; "
            "use teleport_assembled for tap configurations"
        )
    input_field = _input_field(cfg)
    output = teleport_field(
        input_field,
        cfg.squeezer_1,
        cfg.squeezer_2,
        cfg.gains,
        bob_efficiency=cfg.bob_efficiency,
        dark_noise=cfg.dark_noise,
        victor_loss=cfg.victor_loss,
    )
    return ScenarioResult(
        config=cfg,
        input=input_field,
        output=output,
        eve_output=None,
        realized_gains=_realized_gains(cfg),
    )


def _realized_gains(cfg: ProtocolConfig) -> Gains:
    scale = math.sqrt(cfg.victor_efficiency)
    return Gains(scale * cfg.gains.g_plus, scale * cfg.gains.g_minus)


def teleport_assembled(
    cfg: ProtocolConfig, eve_gains: Optional[Gains] = None
) -> ScenarioResult:
    """Run the protocol by assembling the optical layout element by element.

    The entangled pair is split between sender and receiver, the sender
    measures the sum and difference photocurrents of her beamsplitter
    outputs (dark noise added per photocurrent), and the receiver
    displaces his arm, attenuated by his coupler efficiency, with
    ``sqrt(2) * g`` times each photocurrent.  When a tap is configured,
    the eavesdropper receives the tapped beam plus the same photocurrents
    and reconstructs with her own gains (defaulting to the receiver's);
    her detection is lossless.
    """
    input_field = _input_field(cfg)
    alice_arm, bob_arm = make_epr(cfg.squeezer_1, cfg.squeezer_2)
    eve_tap: Optional[LinearField] = None
    if cfg.eve_tap_site is EveTapSite.ALICE_ARM:
        alice_arm, eve_tap = beamsplitter(
            alice_arm, vacuum_field("eve_tap_vac"), 1.0 - cfg.eve_tap_fraction
        )
    elif cfg.eve_tap_site is EveTapSite.BOB_ARM:
        bob_arm, eve_tap = beamsplitter(
            bob_arm, vacuum_field("eve_tap_vac"), 1.0 - cfg.eve_tap_fraction
        )

    dark = _dark_field(cfg.dark_noise, "tp.dark") if cfg.dark_noise > 0.0 else None

    def displaced(beam: LinearField, gains: Gains) -> LinearField:
        # Photocurrents: m+ = (in+ + arm+)/sqrt(2), m- = (in- - arm-)/sqrt(2),
        # fed forward with sqrt(2) * g so the input amplitude maps with gain g.
        terms = [
            (1.0, beam, STRAIGHT),
            (gains.g_plus, input_field, PLUS_ONLY),
            (gains.g_minus, input_field, MINUS_ONLY),
            (gains.g_plus, alice_arm, PLUS_ONLY),
            (-gains.g_minus, alice_arm, MINUS_ONLY),
        ]
        if dark is not None:
            terms.append((SQRT2 * gains.g_plus, dark, PLUS_ONLY))
            terms.append((SQRT2 * gains.g_minus, dark, Route(plus=None, minus=MINUS)))
        return superpose(terms)

    bob_beam = apply_loss(bob_arm, cfg.bob_efficiency, "bob_coupler_vac")
    output = displaced(bob_beam, cfg.gains)
    if cfg.victor_loss > 0.0:
        output = apply_loss(output, cfg.victor_efficiency, "victor_vac")

    eve_output: Optional[LinearField] = None
    if eve_tap is not None:
        eve_output = displaced(eve_tap, eve_gains if eve_gains is not None else cfg.gains)

    return ScenarioResult(
        config=cfg,
        input=input_field,
        output=output,
        eve_output=eve_output,
        realized_gains=_realized_gains(cfg),
    )


def eve_reconstruction(cfg: ProtocolConfig, eve_gains: Gains) -> LinearField:
    """Eavesdropper's best-effort output from her tap and the photocurrents."""
    if cfg.eve_tap_site is EveTapSite.NONE:
        raise ValueError("eve_reconstruction requires a configured tap site")
    result = teleport_assembled(cfg, eve_gains=eve_gains)
    assert result.eve_output is not None
    return result.eve_output

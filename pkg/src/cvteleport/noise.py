"""Linear noise algebra for optical fields in shot-noise units.

A field is tracked as a pair of coherent amplitudes plus, for each
quadrature, a linear expansion over the quadratures of independent
elementary noise modes.  All second moments (variances, covariances,
conditional variances) follow exactly from the expansion coefficients,
so lossless protocol algebra stays closed form.  The vacuum variance is
1 in these units and minimum-uncertainty states satisfy
``var_plus * var_minus == 1``.

Only second moments are tracked.  Commutators are not modeled; sign
conventions for beamsplitters are therefore fixed explicitly below and
documented where they matter.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional

# Expansion coefficients below this magnitude are dropped when fields are
# combined, so exact cancellations do not leave stale entries behind.
COEFF_PRUNE_EPS = 1e-15

_fresh_counter = itertools.count()


def _fresh_id(prefix: str) -> str:
    """Process-locally unique noise id, used for implicit vacua."""
    return f"{prefix}#{next(_fresh_counter)}"


class Quadrature(Enum):
    """Tag for the two field quadratures (amplitude and phase)."""

    PLUS = "+"
    MINUS = "-"

    def other(self) -> "Quadrature":
        return Quadrature.MINUS if self is Quadrature.PLUS else Quadrature.PLUS


PLUS = Quadrature.PLUS
MINUS = Quadrature.MINUS

#: Alias used in type signatures where "tag" reads better than the enum name.
QuadratureTag = Quadrature


@dataclass(frozen=True)
class ElementaryNoise:
    """An independent Gaussian noise mode with per-quadrature variances.

    The two quadratures of one source are uncorrelated with each other
    and with every other source.  ``pure`` marks a minimum-uncertainty
    source and is validated against ``var_plus * var_minus == 1``.
    """

    id: str
    var_plus: float
    var_minus: float
    pure: bool = False

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("noise id must be a non-empty string")
        for name, value in (("var_plus", self.var_plus), ("var_minus", self.var_minus)):
            if not math.isfinite(value) or value <= 0.0:
                raise ValueError(f"{name} of noise '{self.id}' must be finite and > 0, got {value}")
        if self.pure and abs(self.var_plus * self.var_minus - 1.0) > 1e-12:
            raise ValueError(
                f"noise '{self.id}' flagged pure but var_plus*var_minus = "
                f"{self.var_plus * self.var_minus!r}"
            )

    def variance(self, quad: Quadrature) -> float:
        return self.var_plus if quad is PLUS else self.var_minus

    @classmethod
    def vacuum(cls, noise_id: str) -> "ElementaryNoise":
        return cls(noise_id, 1.0, 1.0, pure=True)

    @classmethod
    def squeezed(
        cls, noise_id: str, var_sqz: float, var_anti: Optional[float] = None
    ) -> "ElementaryNoise":
        """Amplitude-squeezed source; ``var_anti`` defaults to the pure value."""
        if var_anti is None:
            var_anti = 1.0 / var_sqz
        pure = abs(var_sqz * var_anti - 1.0) <= 1e-12
        return cls(noise_id, var_sqz, var_anti, pure=pure)


# Expansion key: (noise id, which quadrature of that source).
ExpansionKey = tuple[str, Quadrature]
Expansion = dict[ExpansionKey, float]


def _merged_sources(
    parts: Iterable[Mapping[str, ElementaryNoise]],
) -> dict[str, ElementaryNoise]:
    merged: dict[str, ElementaryNoise] = {}
    for sources in parts:
        for noise_id, noise in sources.items():
            existing = merged.get(noise_id)
            if existing is not None and existing != noise:
                raise ValueError(f"conflicting definitions for noise id '{noise_id}'")
            merged[noise_id] = noise
    return merged


def _pruned(expansion: Expansion) -> Expansion:
    return {k: c for k, c in expansion.items() if abs(c) >= COEFF_PRUNE_EPS}


@dataclass(frozen=True)
class LinearField:
    """Coherent amplitudes plus per-quadrature noise expansions.

    ``plus_coeffs`` and ``minus_coeffs`` map ``(noise_id, quadrature)``
    to a real coefficient; ``sources`` holds every referenced noise
    mode.  Instances are treated as immutable; all operations return new
    fields.  Construction validates that each expansion key references a
    registered source.
    """

    alpha_plus: float
    alpha_minus: float
    plus_coeffs: Expansion = field(default_factory=dict)
    minus_coeffs: Expansion = field(default_factory=dict)
    sources: dict[str, ElementaryNoise] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "plus_coeffs", _pruned(self.plus_coeffs))
        object.__setattr__(self, "minus_coeffs", _pruned(self.minus_coeffs))
        for expansion in (self.plus_coeffs, self.minus_coeffs):
            for noise_id, _quad in expansion:
                if noise_id not in self.sources:
                    raise ValueError(f"expansion references unregistered noise id '{noise_id}'")

    def coeffs(self, quad: Quadrature) -> Expansion:
        return self.plus_coeffs if quad is PLUS else self.minus_coeffs

    def alpha(self, quad: Quadrature) -> float:
        return self.alpha_plus if quad is PLUS else self.alpha_minus


def mode_field(
    noise: ElementaryNoise, alpha_plus: float = 0.0, alpha_minus: float = 0.0
) -> LinearField:
    """Field carrying exactly one elementary mode with unit coefficients."""
    return LinearField(
        alpha_plus=alpha_plus,
        alpha_minus=alpha_minus,
        plus_coeffs={(noise.id, PLUS): 1.0},
        minus_coeffs={(noise.id, MINUS): 1.0},
        sources={noise.id: noise},
    )


def vacuum_field(noise_id: Optional[str] = None) -> LinearField:
    """Fresh vacuum mode, used as the open port of taps and couplers."""
    if noise_id is None:
        noise_id = _fresh_id("vac")
    return mode_field(ElementaryNoise.vacuum(noise_id))


def variance(field_: LinearField, quad: Quadrature) -> float:
    """Noise variance of one quadrature, in shot-noise units."""
    total = 0.0
    for (noise_id, src_quad), coeff in field_.coeffs(quad).items():
        total += coeff * coeff * field_.sources[noise_id].variance(src_quad)
    return total


def covariance(
    field_a: LinearField,
    quad_a: Quadrature,
    field_b: LinearField,
    quad_b: Quadrature,
) -> float:
    """Symmetrized covariance between two quadrature observables.

    Shared noise ids must refer to identical sources; quadratures of one
    source are mutually uncorrelated, so only matching expansion keys
    contribute.
    """
    ca = field_a.coeffs(quad_a)
    cb = field_b.coeffs(quad_b)
    if len(cb) < len(ca):
        ca, cb = cb, ca
        field_a, field_b = field_b, field_a
    total = 0.0
    for key, coeff_a in ca.items():
        coeff_b = cb.get(key)
        if coeff_b is None:
            continue
        noise_id = key[0]
        src_a = field_a.sources[noise_id]
        src_b = field_b.sources[noise_id]
        if src_a != src_b:
            raise ValueError(f"conflicting definitions for noise id '{noise_id}'")
        total += coeff_a * coeff_b * src_a.variance(key[1])
    return total


def conditional_variance(
    target: LinearField,
    given: LinearField,
    quad: Quadrature,
) -> float:
    """Variance of ``target`` left after optimal linear estimation from ``given``.

    Computes ``var(target) - cov(target, given)^2 / var(given)`` on the
    chosen quadrature.  Nonnegative up to rounding; tiny negative results
    are clamped to zero.
    """
    var_given = variance(given, quad)
    if var_given == 0.0:
        raise ValueError("conditioning field has zero variance on this quadrature")
    value = variance(target, quad) - covariance(target, quad, given, quad) ** 2 / var_given
    if value < 0.0:
        if value < -1e-12 * max(1.0, variance(target, quad)):
            raise ValueError(f"conditional variance evaluated to {value!r}")
        value = 0.0
    return value


@dataclass(frozen=True)
class Route:
    """Which source quadrature feeds each output quadrature in a superposition.

    ``None`` means the term contributes nothing to that output quadrature.
    """

    plus: Optional[Quadrature]
    minus: Optional[Quadrature]


STRAIGHT = Route(PLUS, MINUS)
SWAPPED = Route(MINUS, PLUS)
PLUS_ONLY = Route(PLUS, None)
MINUS_ONLY = Route(None, MINUS)
PLUS_FROM_MINUS = Route(MINUS, None)
MINUS_FROM_PLUS = Route(None, PLUS)

Term = tuple[float, LinearField, Route]


def superpose(terms: Iterable[Term]) -> LinearField:
    """Linear combination of fields with per-term quadrature routing.

    Each term is ``(coefficient, field, route)``.  Coherent amplitudes
    follow the same routing as the noise expansions.  The result
    references only the inputs' noise sources.
    """
    terms = list(terms)
    alpha = {PLUS: 0.0, MINUS: 0.0}
    expansions: dict[Quadrature, Expansion] = {PLUS: {}, MINUS: {}}
    for coeff, field_, route in terms:
        for out_quad, src_quad in ((PLUS, route.plus), (MINUS, route.minus)):
            if src_quad is None:
                continue
            alpha[out_quad] += coeff * field_.alpha(src_quad)
            target = expansions[out_quad]
            for key, c in field_.coeffs(src_quad).items():
                target[key] = target.get(key, 0.0) + coeff * c
    return LinearField(
        alpha_plus=alpha[PLUS],
        alpha_minus=alpha[MINUS],
        plus_coeffs=expansions[PLUS],
        minus_coeffs=expansions[MINUS],
        sources=_merged_sources([f.sources for _, f, _ in terms]),
    )


def beamsplitter(
    field_a: LinearField,
    field_b: LinearField,
    transmittance: float,
    relative_phase: float = 0.0,
) -> tuple[LinearField, LinearField]:
    """Two-port beamsplitter acting on both quadratures.

    With ``relative_phase == 0`` the convention is

        out1 = sqrt(T) a + sqrt(1-T) b
        out2 = sqrt(1-T) a - sqrt(T) b

    With ``relative_phase == pi/2`` the second input couples with its
    quadratures exchanged:

        out1+ = sqrt(T) a+ - sqrt(1-T) b-     out1- = sqrt(T) a- + sqrt(1-T) b+
        out2+ = sqrt(1-T) a+ + sqrt(T) b-     out2- = sqrt(1-T) a- - sqrt(T) b+

    Both conventions conserve the per-quadrature variance sums (the
    pi/2 form swaps which input quadrature a sum refers to).
    """
    if not 0.0 <= transmittance <= 1.0:
        raise ValueError(f"transmittance must be in [0, 1], got {transmittance}")
    t = math.sqrt(transmittance)
    r = math.sqrt(1.0 - transmittance)
    if abs(relative_phase) <= 1e-12:
        out1 = superpose([(t, field_a, STRAIGHT), (r, field_b, STRAIGHT)])
        out2 = superpose([(r, field_a, STRAIGHT), (-t, field_b, STRAIGHT)])
    elif abs(relative_phase - math.pi / 2.0) <= 1e-12:
        out1 = superpose(
            [
                (t, field_a, STRAIGHT),
                (-r, field_b, PLUS_FROM_MINUS),
                (r, field_b, MINUS_FROM_PLUS),
            ]
        )
        out2 = superpose(
            [
                (r, field_a, STRAIGHT),
                (t, field_b, PLUS_FROM_MINUS),
                (-t, field_b, MINUS_FROM_PLUS),
            ]
        )
    else:
        raise ValueError(f"relative_phase must be 0 or pi/2, got {relative_phase}")
    return out1, out2


def apply_loss(
    field_: LinearField, efficiency: float, vacuum_id: Optional[str] = None
) -> LinearField:
    """Mix the field with a fresh vacuum to model optical loss.

    Amplitudes scale by ``sqrt(efficiency)`` and every quadrature
    variance maps to ``efficiency * var + (1 - efficiency)``.  Losses
    compose multiplicatively in the efficiency.
    """
    if not 0.0 <= efficiency <= 1.0:
        raise ValueError(f"efficiency must be in [0, 1], got {efficiency}")
    if efficiency == 1.0:
        return field_
    vac = vacuum_field(vacuum_id)
    return superpose(
        [
            (math.sqrt(efficiency), field_, STRAIGHT),
            (math.sqrt(1.0 - efficiency), vac, STRAIGHT),
        ]
    )

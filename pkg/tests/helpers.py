"""Shared utilities for the test suite.

Holds the random scenario generators the property suites draw from and
the two statistics routines the tests need (two-sample KS and a paired
t statistic); the package itself never needs them, so they live here.
"""

import math

import numpy as np

from cvteleport.protocol import Gains, ProtocolConfig, SqueezerSpec


def random_squeezer(rng: np.random.Generator, pure_probability: float = 0.5) -> SqueezerSpec:
    var_sqz = float(rng.uniform(0.05, 1.0))
    if rng.random() < pure_probability:
        return SqueezerSpec.pure(var_sqz)
    return SqueezerSpec(var_sqz, (1.0 / var_sqz) * float(rng.uniform(1.0, 4.0)))


def random_protocol(rng: np.random.Generator, with_loss: bool = True) -> ProtocolConfig:
    """A random no-tap scenario, optionally with loss and dark noise."""
    extras = {}
    if with_loss:
        extras = dict(
            victor_loss=float(rng.uniform(0.0, 0.5)),
            dark_noise=float(rng.uniform(0.0, 0.3)),
            bob_efficiency=float(rng.uniform(0.5, 1.0)),
        )
    return ProtocolConfig(
        squeezer_1=random_squeezer(rng),
        squeezer_2=random_squeezer(rng),
        input_alpha=(float(rng.uniform(-4.0, 4.0)), float(rng.uniform(-4.0, 4.0))),
        gains=Gains(float(rng.uniform(0.0, 2.5)), float(rng.uniform(0.0, 2.5))),
        **extras,
    )


def ks_two_sample(a, b) -> tuple[float, float]:
    """Two-sample Kolmogorov-Smirnov statistic with asymptotic p-value.

    The p-value uses the classic Kolmogorov series with the small-sample
    effective-size correction; good enough for the >= 100-point samples
    the suite feeds it.
    """
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side="right") / a.size
    cdf_b = np.searchsorted(b, pooled, side="right") / b.size
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    n_eff = a.size * b.size / (a.size + b.size)
    lam = (math.sqrt(n_eff) + 0.12 + 0.11 / math.sqrt(n_eff)) * d
    total = 0.0
    for j in range(1, 101):
        term = 2.0 * (-1.0) ** (j - 1) * math.exp(-2.0 * j * j * lam * lam)
        total += term
        if abs(term) < 1e-12:
            break
    return d, min(1.0, max(0.0, total))


def paired_t_statistic(diffs) -> float:
    diffs = np.asarray(diffs, dtype=float)
    spread = diffs.std(ddof=1)
    if spread == 0.0:
        raise ValueError("paired differences are constant")
    return float(diffs.mean() / (spread / math.sqrt(diffs.size)))

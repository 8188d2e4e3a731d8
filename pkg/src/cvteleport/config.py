"""Text configuration grammar for scenarios and command runs.

Configs are INI-style sections of ``key = value`` pairs parsed with
:mod:`configparser`.  Values are plain numbers except where noted;
squeezing levels may be quoted in decibels with a ``dB`` suffix
("4.8 dB" means the variance ``10^(-4.8/10)``).  Unknown keys are
rejected so typos fail loudly instead of silently running defaults.

Sections:

* ``[protocol]``: the scenario itself (squeezers, input, gains, losses).
* ``[sweep]``: one swept parameter with optional per-curve second
  parameter, plus feed-forward response settings for frequency sweeps.
* ``[tvmap]``: squeezing grid times gain grid times signal sizes.
* ``[swap]``: teleporter/input squeezer lists and a gain axis.
* ``[pipeline]``: spectrum-analyzer averaging and seeded run counts.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .protocol import (
    EveTapSite,
    Gains,
    ProtocolConfig,
    SqueezerSpec,
    db_to_variance,
)
from .pipeline import PipelineConfig

Sections = dict[str, dict[str, str]]


class ConfigError(Exception):
    """A config file or preset cannot be interpreted; maps to exit code 2."""


def config_from_text(text: str, origin: str = "<config>") -> Sections:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ConfigError(f"{origin}: {exc}") from exc
    return {name: dict(parser.items(name)) for name in parser.sections()}


def load_config(path: str) -> Sections:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return config_from_text(handle.read(), origin=path)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc


def merge_sections(base: Sections, override: Sections) -> Sections:
    """Key-wise overlay of ``override`` on ``base`` (presets under files)."""
    merged = {name: dict(body) for name, body in base.items()}
    for name, body in override.items():
        merged.setdefault(name, {}).update(body)
    return merged


def _variance_value(raw: str, context: str) -> float:
    text = raw.strip()
    lowered = text.lower()
    if lowered.endswith("db"):
        return db_to_variance(_float(text[:-2], context))
    return _float(text, context)


def _float(raw: str, context: str) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{context}: not a number: {raw!r}") from exc


def _int(raw: str, context: str) -> int:
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{context}: not an integer: {raw!r}") from exc


def _bool(raw: str, context: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{context}: not a boolean: {raw!r}")


def _float_list(raw: str, context: str) -> tuple[float, ...]:
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    if not parts:
        raise ConfigError(f"{context}: empty list")
    return tuple(_float(p, context) for p in parts)


def _variance_list(raw: str, context: str) -> tuple[float, ...]:
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    if not parts:
        raise ConfigError(f"{context}: empty list")
    return tuple(_variance_value(p, context) for p in parts)


class _SectionReader:
    """Tracks consumed keys so leftovers can be reported as errors."""

    def __init__(self, sections: Sections, name: str):
        self.name = name
        self.body = dict(sections.get(name, {}))

    def take(self, key: str) -> Optional[str]:
        return self.body.pop(key, None)

    def context(self, key: str) -> str:
        return f"[{self.name}] {key}"

    def finish(self) -> None:
        if self.body:
            stray = ", ".join(sorted(self.body))
            raise ConfigError(f"unknown keys in [{self.name}]: {stray}")


def build_protocol(sections: Sections) -> ProtocolConfig:
    """Scenario from the ``[protocol]`` section; everything is optional
    except the first squeezer's squeezed variance."""
    reader = _SectionReader(sections, "protocol")
    raw_sqz = reader.take("var_sqz")
    if raw_sqz is None:
        raise ConfigError("[protocol] var_sqz is required")
    var_sqz = _variance_value(raw_sqz, reader.context("var_sqz"))
    raw_anti = reader.take("var_anti")
    if raw_anti is None:
        squeezer_1 = SqueezerSpec.pure(var_sqz)
    else:
        squeezer_1 = SqueezerSpec(var_sqz, _variance_value(raw_anti, reader.context("var_anti")))

    raw_sqz2 = reader.take("var_sqz_2")
    raw_anti2 = reader.take("var_anti_2")
    if raw_sqz2 is None and raw_anti2 is None:
        squeezer_2 = squeezer_1
    else:
        sqz2 = (
            _variance_value(raw_sqz2, reader.context("var_sqz_2"))
            if raw_sqz2 is not None
            else var_sqz
        )
        if raw_anti2 is None:
            squeezer_2 = SqueezerSpec.pure(sqz2)
        else:
            squeezer_2 = SqueezerSpec(sqz2, _variance_value(raw_anti2, reader.context("var_anti_2")))

    def take_float(key: str, default: float) -> float:
        raw = reader.take(key)
        return default if raw is None else _float(raw, reader.context(key))

    alpha = (take_float("alpha_plus", 0.0), take_float("alpha_minus", 0.0))
    input_variances = (take_float("input_var_plus", 1.0), take_float("input_var_minus", 1.0))

    raw_gain = reader.take("gain")
    base_gain = 1.0 if raw_gain is None else _float(raw_gain, reader.context("gain"))
    gains = Gains(
        take_float("gain_plus", base_gain),
        take_float("gain_minus", base_gain),
    )

    victor_loss = take_float("victor_loss", 0.0)
    dark_noise = take_float("dark_noise", 0.0)
    bob_efficiency = take_float("bob_efficiency", 1.0)

    raw_site = reader.take("eve_tap_site")
    if raw_site is None:
        site = EveTapSite.NONE
    else:
        try:
            site = EveTapSite(raw_site.strip().lower())
        except ValueError as exc:
            allowed = ", ".join(s.value for s in EveTapSite)
            raise ConfigError(
                f"{reader.context('eve_tap_site')}: must be one of {allowed}"
            ) from exc
    fraction = take_float("eve_tap_fraction", 0.0)
    reader.finish()

    try:
        return ProtocolConfig(
            squeezer_1=squeezer_1,
            squeezer_2=squeezer_2,
            input_alpha=alpha,
            input_variances=input_variances,
            gains=gains,
            victor_loss=victor_loss,
            dark_noise=dark_noise,
            bob_efficiency=bob_efficiency,
            eve_tap_site=site,
            eve_tap_fraction=fraction,
        )
    except ValueError as exc:
        raise ConfigError(f"[protocol]: {exc}") from exc


#: Parameter paths a sweep may vary.  ``gain`` moves both feed-forward
#: gains together, ``gain_error`` sets them to ``1 + value``, ``alpha``
#: splits a total signal amplitude equally over the quadratures, and
#: ``var_sqz`` replaces both squeezers with pure ones at that level.
SWEEP_PARAMETERS = (
    "gain",
    "gain_error",
    "gains.g_plus",
    "gains.g_minus",
    "alpha",
    "input_alpha.plus",
    "input_alpha.minus",
    "var_sqz",
    "victor_loss",
    "dark_noise",
    "bob_efficiency",
    "eve_tap_fraction",
    "frequency",
)


def apply_parameter(cfg: ProtocolConfig, path: str, value: float) -> ProtocolConfig:
    """New scenario with one named parameter replaced."""
    try:
        if path == "gain":
            return cfg.with_gains(Gains.symmetric(value))
        if path == "gain_error":
            return cfg.with_gains(Gains.symmetric(1.0 + value))
        if path == "gains.g_plus":
            return cfg.with_gains(Gains(value, cfg.gains.g_minus))
        if path == "gains.g_minus":
            return cfg.with_gains(Gains(cfg.gains.g_plus, value))
        if path == "alpha":
            half = value / np.sqrt(2.0)
            return replace(cfg, input_alpha=(half, half))
        if path == "input_alpha.plus":
            return replace(cfg, input_alpha=(value, cfg.input_alpha[1]))
        if path == "input_alpha.minus":
            return replace(cfg, input_alpha=(cfg.input_alpha[0], value))
        if path == "var_sqz":
            squeezer = SqueezerSpec.pure(value)
            return replace(cfg, squeezer_1=squeezer, squeezer_2=squeezer)
        if path == "victor_loss":
            return replace(cfg, victor_loss=value)
        if path == "dark_noise":
            return replace(cfg, dark_noise=value)
        if path == "bob_efficiency":
            return replace(cfg, bob_efficiency=value)
        if path == "eve_tap_fraction":
            return replace(cfg, eve_tap_fraction=value)
    except ValueError as exc:
        raise ConfigError(f"sweep value {value!r} for {path!r}: {exc}") from exc
    raise ConfigError(f"unknown sweep parameter {path!r}")


@dataclass(frozen=True)
class SweepSpec:
    """One swept axis, optionally fanned into curves by a second parameter.

    ``response`` settings participate only when the axis is
    ``frequency``, where the row values are the feed-forward response
    model's output spectra instead of teleportation measures.
    """

    parameter: str
    start: float
    stop: float
    count: int
    scale: str = "linear"
    curve_parameter: Optional[str] = None
    curve_values: tuple[float, ...] = ()
    delay_s: float = 0.0
    rolloff: str = "flat"
    corner_hz: Optional[float] = None

    def __post_init__(self) -> None:
        if self.parameter not in SWEEP_PARAMETERS:
            raise ConfigError(
                f"unknown sweep parameter {self.parameter!r}; "
                f"one of {', '.join(SWEEP_PARAMETERS)}"
            )
        if self.count < 2:
            raise ConfigError(f"sweep count must be >= 2, got {self.count}")
        if self.scale not in ("linear", "log"):
            raise ConfigError(f"sweep scale must be linear or log, got {self.scale!r}")
        if self.curve_parameter is not None and self.curve_parameter not in SWEEP_PARAMETERS:
            raise ConfigError(f"unknown curve parameter {self.curve_parameter!r}")

    def axis_values(self) -> np.ndarray:
        if self.scale == "log":
            if self.start <= 0.0 or self.stop <= 0.0:
                raise ConfigError("log-scale sweeps need positive endpoints")
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


def build_sweep(sections: Sections) -> SweepSpec:
    reader = _SectionReader(sections, "sweep")
    parameter = reader.take("parameter")
    if parameter is None:
        raise ConfigError("[sweep] parameter is required")
    start = reader.take("start")
    stop = reader.take("stop")
    count = reader.take("count")
    if start is None or stop is None or count is None:
        raise ConfigError("[sweep] needs start, stop and count")
    scale = reader.take("scale") or "linear"
    curve_parameter = reader.take("curve_parameter")
    raw_curves = reader.take("curve_values")
    if (curve_parameter is None) != (raw_curves is None):
        raise ConfigError("[sweep] curve_parameter and curve_values go together")
    if raw_curves is not None:
        if curve_parameter == "var_sqz":
            curve_values = _variance_list(raw_curves, reader.context("curve_values"))
        else:
            curve_values = _float_list(raw_curves, reader.context("curve_values"))
    else:
        curve_values = ()
    delay_raw = reader.take("delay_s")
    rolloff = reader.take("rolloff") or "flat"
    corner_raw = reader.take("corner_hz")
    spec = SweepSpec(
        parameter=parameter.strip(),
        start=_float(start, reader.context("start")),
        stop=_float(stop, reader.context("stop")),
        count=_int(count, reader.context("count")),
        scale=scale.strip(),
        curve_parameter=curve_parameter.strip() if curve_parameter else None,
        curve_values=curve_values,
        delay_s=_float(delay_raw, reader.context("delay_s")) if delay_raw else 0.0,
        rolloff=rolloff.strip(),
        corner_hz=_float(corner_raw, reader.context("corner_hz")) if corner_raw else None,
    )
    reader.finish()
    return spec


@dataclass(frozen=True)
class TvMapSpec:
    """Grid for transfer-versus-conditional-variance maps."""

    var_sqz_values: tuple[float, ...]
    gain_start: float
    gain_stop: float
    gain_count: int
    alphas: tuple[float, ...] = (0.0,)

    def gain_values(self) -> np.ndarray:
        return np.linspace(self.gain_start, self.gain_stop, self.gain_count)

    def squeezers(self) -> tuple[SqueezerSpec, ...]:
        return tuple(SqueezerSpec.pure(v) for v in self.var_sqz_values)


def build_tvmap(sections: Sections) -> TvMapSpec:
    reader = _SectionReader(sections, "tvmap")
    raw_sqz = reader.take("var_sqz")
    if raw_sqz is None:
        raise ConfigError("[tvmap] var_sqz list is required")
    var_values = _variance_list(raw_sqz, reader.context("var_sqz"))
    gain_start = reader.take("gain_start")
    gain_stop = reader.take("gain_stop")
    gain_count = reader.take("gain_count")
    if gain_start is None or gain_stop is None or gain_count is None:
        raise ConfigError("[tvmap] needs gain_start, gain_stop and gain_count")
    raw_alphas = reader.take("alphas")
    alphas = (
        _float_list(raw_alphas, reader.context("alphas")) if raw_alphas else (0.0,)
    )
    spec = TvMapSpec(
        var_sqz_values=var_values,
        gain_start=_float(gain_start, reader.context("gain_start")),
        gain_stop=_float(gain_stop, reader.context("gain_stop")),
        gain_count=_int(gain_count, reader.context("gain_count")),
        alphas=alphas,
    )
    reader.finish()
    if spec.gain_count < 1:
        raise ConfigError("[tvmap] gain_count must be >= 1")
    return spec


@dataclass(frozen=True)
class SwapGridSpec:
    """Swapping curves: every teleporter/input squeezer pair over a gain axis."""

    teleporter_var_sqz: tuple[float, ...]
    input_var_sqz: tuple[float, ...]
    gain_start: float
    gain_stop: float
    gain_count: int
    gain_scale: str = "linear"

    def gain_values(self) -> np.ndarray:
        if self.gain_scale == "log":
            return np.geomspace(self.gain_start, self.gain_stop, self.gain_count)
        return np.linspace(self.gain_start, self.gain_stop, self.gain_count)


def build_swap_grid(sections: Sections) -> SwapGridSpec:
    reader = _SectionReader(sections, "swap")
    raw_tel = reader.take("var_sqz")
    raw_inp = reader.take("input_var_sqz")
    if raw_tel is None or raw_inp is None:
        raise ConfigError("[swap] needs var_sqz and input_var_sqz lists")
    gain_start = reader.take("gain_start")
    gain_stop = reader.take("gain_stop")
    gain_count = reader.take("gain_count")
    if gain_start is None or gain_stop is None or gain_count is None:
        raise ConfigError("[swap] needs gain_start, gain_stop and gain_count")
    scale = (reader.take("gain_scale") or "linear").strip()
    if scale not in ("linear", "log"):
        raise ConfigError(f"[swap] gain_scale must be linear or log, got {scale!r}")
    spec = SwapGridSpec(
        teleporter_var_sqz=_variance_list(raw_tel, reader.context("var_sqz")),
        input_var_sqz=_variance_list(raw_inp, reader.context("input_var_sqz")),
        gain_start=_float(gain_start, reader.context("gain_start")),
        gain_stop=_float(gain_stop, reader.context("gain_stop")),
        gain_count=_int(gain_count, reader.context("gain_count")),
        gain_scale=scale,
    )
    reader.finish()
    if spec.gain_count < 1:
        raise ConfigError("[swap] gain_count must be >= 1")
    return spec


@dataclass(frozen=True)
class PipelineSpec:
    """Seeded-run settings wrapped around a scenario."""

    averages: int = 1000
    seeds: int = 100
    seed_start: int = 0
    gain_drift_sigma: float = 0.0
    noiseless: bool = False

    def seed_values(self) -> range:
        return range(self.seed_start, self.seed_start + self.seeds)

    def pipeline_config(self, protocol: ProtocolConfig) -> PipelineConfig:
        return PipelineConfig(
            protocol=protocol,
            averages=self.averages,
            gain_drift_sigma=self.gain_drift_sigma,
            noiseless=self.noiseless,
        )


def build_pipeline_spec(sections: Sections) -> PipelineSpec:
    reader = _SectionReader(sections, "pipeline")

    def take_int(key: str, default: int) -> int:
        raw = reader.take(key)
        return default if raw is None else _int(raw, reader.context(key))

    raw_sigma = reader.take("gain_drift_sigma")
    raw_noiseless = reader.take("noiseless")
    spec = PipelineSpec(
        averages=take_int("averages", 1000),
        seeds=take_int("seeds", 100),
        seed_start=take_int("seed_start", 0),
        gain_drift_sigma=(
            _float(raw_sigma, reader.context("gain_drift_sigma"))
            if raw_sigma is not None
            else 0.0
        ),
        noiseless=(
            _bool(raw_noiseless, reader.context("noiseless"))
            if raw_noiseless is not None
            else False
        ),
    )
    reader.finish()
    if spec.averages < 1 or spec.seeds < 1:
        raise ConfigError("[pipeline] averages and seeds must be >= 1")
    return spec

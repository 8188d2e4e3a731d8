"""Named preset configurations for the command-line tools.

A preset is the parsed-section form of a config file; ``--preset`` and
``--config`` flow through the same validation, and a config file given
alongside a preset overrides it key by key.  The five scenarios that
double as documentation examples ship as real config files under
``data/`` and are loaded from there, so the bundled files and the
presets cannot drift apart.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

from .config import ConfigError, Sections, config_from_text

_GRID_50 = ",".join(repr(float(v)) for v in np.linspace(0.02, 1.0, 50))
_LOCUS_SQZ = ",".join(repr(float(v)) for v in np.geomspace(0.01, 1.0, 60))


def _bundled(name: str) -> Sections:
    text = resources.files("cvteleport.data").joinpath(name).read_text(encoding="utf-8")
    return config_from_text(text, origin=f"builtin:{name}")


def _build_presets() -> dict[str, Sections]:
    reference_protocol = _bundled("reference_experiment.cfg")["protocol"]
    presets: dict[str, Sections] = {
        "classical-unity": _bundled("classical_unity.cfg"),
        "ideal": _bundled("ideal_teleporter.cfg"),
        "reference-experiment": _bundled("reference_experiment.cfg"),
        "loophole": _bundled("loophole.cfg"),
        "drifting-gain": _bundled("drifting_gain.cfg"),
        "m-vs-gain": {
            "protocol": {"var_sqz": "0.5"},
            "sweep": {
                "parameter": "gain",
                "start": "0.05",
                "stop": "3.0",
                "count": "296",
                "curve_parameter": "var_sqz",
                "curve_values": "0.9, 0.5, 0.25, 0.125",
            },
        },
        "fidelity-vs-alpha": {
            "protocol": {"var_sqz": "0.5"},
            "sweep": {
                "parameter": "alpha",
                "start": "0.0",
                "stop": "100.0",
                "count": "201",
                "curve_parameter": "gain_error",
                "curve_values": "0.0, 0.02, -0.02, 0.05, -0.05",
            },
        },
        "fidelity-vs-gain": {
            "protocol": dict(reference_protocol, alpha_plus="2.9", alpha_minus="3.5"),
            "sweep": {
                "parameter": "gain",
                "start": "0.5",
                "stop": "1.5",
                "count": "201",
            },
        },
        "tv-vs-gain": {
            "protocol": dict(reference_protocol, alpha_plus="4.5", alpha_minus="5.4"),
            "sweep": {
                "parameter": "gain",
                "start": "0.2",
                "stop": "2.2",
                "count": "201",
            },
        },
        "frequency-response": {
            "protocol": dict(reference_protocol),
            "sweep": {
                "parameter": "frequency",
                "start": "6.4e6",
                "stop": "10.4e6",
                "count": "401",
                "delay_s": "2.86e-7",
                "rolloff": "one-pole",
                "corner_hz": "12e6",
            },
        },
        "tv-fidelity-contours": {
            "protocol": {"var_sqz": "0.5"},
            "tvmap": {
                "var_sqz": "1.0, 0.5, 0.25, 0.125, 0.05",
                "gain_start": "0.0",
                "gain_stop": "2.0",
                "gain_count": "81",
                "alphas": "0.0, 2.0, 5.0, 15.0",
            },
        },
        "eve-bob-tap": {
            "protocol": {
                "var_sqz": "0.5",
                "eve_tap_site": "bob_arm",
                "eve_tap_fraction": "0.5",
            },
            "tvmap": {
                "var_sqz": _GRID_50,
                "gain_start": "0.05",
                "gain_stop": "2.5",
                "gain_count": "50",
            },
        },
        "eve-alice-tap": {
            "protocol": {
                "var_sqz": "0.5",
                "eve_tap_site": "alice_arm",
                "eve_tap_fraction": "0.5",
            },
            "tvmap": {
                "var_sqz": _GRID_50,
                "gain_start": "0.05",
                "gain_stop": "2.5",
                "gain_count": "50",
            },
        },
        "unity-gain-locus": {
            "protocol": {"var_sqz": "0.5", "gain": "1.0"},
            "tvmap": {
                "var_sqz": _LOCUS_SQZ,
                "gain_start": "1.0",
                "gain_stop": "1.0",
                "gain_count": "1",
            },
        },
        "swap-vs-gain": {
            "swap": {
                "var_sqz": "0.9, 0.5, 0.25",
                "input_var_sqz": "0.5, 0.1",
                "gain_start": "0.05",
                "gain_stop": "3.0",
                "gain_count": "60",
            },
        },
        "pipeline-default": {
            "protocol": {
                "var_sqz": "0.5",
                "alpha_plus": "3.5355339059327378",
                "alpha_minus": "3.5355339059327378",
                "gain": "1.0",
            },
            "pipeline": {"averages": "1000", "seeds": "1000"},
        },
    }
    return presets


PRESETS = _build_presets()


def preset_sections(name: str) -> Sections:
    """Deep copy of one preset's sections; unknown names list the catalog."""
    try:
        preset = PRESETS[name]
    except KeyError as exc:
        known = ", ".join(sorted(PRESETS))
        raise ConfigError(f"unknown preset {name!r}; available: {known}") from exc
    return {section: dict(body) for section, body in preset.items()}


def preset_names() -> list[str]:
    return sorted(PRESETS)

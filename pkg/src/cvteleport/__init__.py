"""Simulator and characterization toolkit for quadrature teleportation.

The package models a continuous-variable teleporter (two-mode squeezed
resource, dual homodyne measurement, feed-forward displacement) in
shot-noise units and evaluates the standard benchmarks: fidelity against
coherent inputs, two-quadrature signal transfer, the conditional
variance product, its gain-normalized form, and the inseparability of
entangled beams before and after swapping.  A measurement pipeline
synthesizes spectrum-analyzer traces with finite averaging so the
estimation chain (carrier calibration, loss correction, gain inference)
can be exercised end to end.
"""

from .checks import (
    CheckResult,
    ReferenceDatapoint,
    load_reference_datapoints,
    reference_protocol,
    run_reference_checks,
)
from .config import (
    ConfigError,
    PipelineSpec,
    SwapGridSpec,
    SweepSpec,
    TvMapSpec,
    apply_parameter,
    build_pipeline_spec,
    build_protocol,
    build_swap_grid,
    build_sweep,
    build_tvmap,
    load_config,
    merge_sections,
)
from .measures import (
    CLASSICAL_FIDELITY_LIMIT,
    CLASSICAL_TQ_LIMIT,
    CLASSICAL_VQ_LIMIT,
    NO_CLONING_FIDELITY_LIMIT,
    InseparabilityReport,
    MeasureReport,
    TvRow,
    build_report,
    classical_vq_bound,
    conditional_variance_product,
    fidelity,
    gain_normalized_cv,
    inseparability,
    m_gain_bandwidth,
    m_min,
    measure_scenario,
    optimize_symmetric_gain,
    run_report,
    separable_vq_limit,
    signal_transfer,
    snr,
    tv_sweep,
)
from .noise import (
    ElementaryNoise,
    LinearField,
    Quadrature,
    Route,
    apply_loss,
    beamsplitter,
    conditional_variance,
    covariance,
    mode_field,
    superpose,
    vacuum_field,
    variance,
)
from .pipeline import (
    PipelineConfig,
    RunRecord,
    SpectrumRecord,
    band_average,
    calibrate_gain_large_signal,
    estimate_alpha,
    fidelity_histogram,
    frequency_response_model,
    loophole_demo,
    read_runrecords,
    run_many,
    run_once,
    synth_spectra,
    write_runrecords,
)
from .presets import preset_names, preset_sections
from .protocol import (
    EveTapSite,
    Gains,
    ProtocolConfig,
    ScenarioResult,
    SqueezerSpec,
    UNITY_GAINS,
    db_to_variance,
    eve_reconstruction,
    infer_out_loss,
    make_epr,
    teleport_assembled,
    teleport_closed_form,
    teleport_field,
    variance_to_db,
)
from .swapping import (
    SwapConfig,
    g_opt_closed_form,
    swap_band_matches_teleporter,
    swap_bandwidth,
    swap_report,
    swap_run,
)

__version__ = "0.1.0"

__all__ = [
    "CheckResult",
    "ReferenceDatapoint",
    "load_reference_datapoints",
    "reference_protocol",
    "run_reference_checks",
    "ConfigError",
    "PipelineSpec",
    "SwapGridSpec",
    "SweepSpec",
    "TvMapSpec",
    "apply_parameter",
    "build_pipeline_spec",
    "build_protocol",
    "build_swap_grid",
    "build_sweep",
    "build_tvmap",
    "load_config",
    "merge_sections",
    "CLASSICAL_FIDELITY_LIMIT",
    "CLASSICAL_TQ_LIMIT",
    "CLASSICAL_VQ_LIMIT",
    "NO_CLONING_FIDELITY_LIMIT",
    "InseparabilityReport",
    "MeasureReport",
    "TvRow",
    "build_report",
    "classical_vq_bound",
    "conditional_variance_product",
    "fidelity",
    "gain_normalized_cv",
    "inseparability",
    "m_gain_bandwidth",
    "m_min",
    "measure_scenario",
    "optimize_symmetric_gain",
    "run_report",
    "separable_vq_limit",
    "signal_transfer",
    "snr",
    "tv_sweep",
    "ElementaryNoise",
    "LinearField",
    "Quadrature",
    "Route",
    "apply_loss",
    "beamsplitter",
    "conditional_variance",
    "covariance",
    "mode_field",
    "superpose",
    "vacuum_field",
    "variance",
    "PipelineConfig",
    "RunRecord",
    "SpectrumRecord",
    "band_average",
    "calibrate_gain_large_signal",
    "estimate_alpha",
    "fidelity_histogram",
    "frequency_response_model",
    "loophole_demo",
    "read_runrecords",
    "run_many",
    "run_once",
    "synth_spectra",
    "write_runrecords",
    "preset_names",
    "preset_sections",
    "EveTapSite",
    "Gains",
    "ProtocolConfig",
    "ScenarioResult",
    "SqueezerSpec",
    "UNITY_GAINS",
    "db_to_variance",
    "eve_reconstruction",
    "infer_out_loss",
    "make_epr",
    "teleport_assembled",
    "teleport_closed_form",
    "teleport_field",
    "variance_to_db",
    "SwapConfig",
    "g_opt_closed_form",
    "swap_band_matches_teleporter",
    "swap_bandwidth",
    "swap_report",
    "swap_run",
    "__version__",
]

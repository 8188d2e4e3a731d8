"""Command-line interface.

Subcommands:

* ``teleport``: one scenario, printed as key/value lines.
* ``sweep``: one swept parameter (optionally fanned into curves).
* ``tvmap``: squeezing-times-gain grids of transfer and conditional
  variance, including eavesdropper columns for tap scenarios.
* ``swap``: entanglement swapping curves over gain plus band summaries.
* ``pipeline``: seeded spectrum-analyzer runs with estimation.
* ``check-paper``: bundled reference datapoints against the model.

Scenarios come from ``--preset`` and/or ``--config`` (a file overrides
the preset key by key).  ``--out`` writes delimited output and, unless
``--no-plot`` is given, a PNG figure next to it.  Exit codes: 0 on
success, 1 when a check fails, 2 for usage or config problems.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from typing import Optional, Sequence

import numpy as np

from .checks import load_reference_datapoints, reference_protocol, run_reference_checks
from .config import (
    ConfigError,
    Sections,
    SweepSpec,
    apply_parameter,
    build_pipeline_spec,
    build_protocol,
    build_swap_grid,
    build_sweep,
    build_tvmap,
    load_config,
    merge_sections,
)
from .measures import m_gain_bandwidth, measure_scenario, run_report, tv_sweep
from .pipeline import (
    fidelity_histogram,
    frequency_response_model,
    run_many,
    spectra_rows,
    synth_spectra,
    write_runrecords,
)
from .presets import preset_names, preset_sections
from .protocol import EveTapSite, Gains, SqueezerSpec, teleport_assembled
from .swapping import SwapConfig, g_opt_closed_form, swap_bandwidth, swap_run

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

_REPORT_FIELDS = (
    "gain_plus",
    "gain_minus",
    "alpha_in_plus",
    "alpha_in_minus",
    "alpha_out_plus",
    "alpha_out_minus",
    "var_in_plus",
    "var_in_minus",
    "var_out_plus",
    "var_out_minus",
    "fidelity",
    "t_plus",
    "t_minus",
    "t_q",
    "v_plus",
    "v_minus",
    "v_q",
    "m",
)


def _fmt(value) -> str:
    if value is None:
        return "nan"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _report_cells(report) -> dict[str, object]:
    return {
        "gain_plus": report.gains.g_plus,
        "gain_minus": report.gains.g_minus,
        "alpha_in_plus": report.alpha_in[0],
        "alpha_in_minus": report.alpha_in[1],
        "alpha_out_plus": report.alpha_out[0],
        "alpha_out_minus": report.alpha_out[1],
        "var_in_plus": report.in_variances[0],
        "var_in_minus": report.in_variances[1],
        "var_out_plus": report.out_variances[0],
        "var_out_minus": report.out_variances[1],
        "fidelity": report.fidelity,
        "t_plus": report.t_plus,
        "t_minus": report.t_minus,
        "t_q": report.t_q,
        "v_plus": report.v_plus,
        "v_minus": report.v_minus,
        "v_q": report.v_q,
        "m": report.m,
    }


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(cell) for cell in row))
    return "\n".join(lines) + "\n"


def _emit_csv(
    out: Optional[str], header: Sequence[str], rows: Sequence[Sequence[object]]
) -> None:
    text = _csv_text(header, rows)
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)


def _figure_path(out: str, suffix: str = "") -> str:
    stem, _ext = os.path.splitext(out)
    return f"{stem}{suffix}.png"


def _gather_sections(args: argparse.Namespace) -> Sections:
    sections: Sections = {}
    if args.preset:
        sections = preset_sections(args.preset)
    if args.config:
        sections = merge_sections(sections, load_config(args.config))
    if not sections:
        raise ConfigError("give --preset and/or --config to define the scenario")
    return sections


def _parse_grid(text: str) -> tuple[float, float, int, str]:
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise ConfigError(f"--grid wants start:stop:count[:log], got {text!r}")
    scale = "linear"
    if len(parts) == 4:
        scale = parts[3].strip()
        if scale not in ("linear", "log"):
            raise ConfigError(f"--grid scale must be linear or log, got {scale!r}")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2]), scale
    except ValueError as exc:
        raise ConfigError(f"--grid wants numbers, got {text!r}") from exc


def cmd_teleport(args: argparse.Namespace) -> int:
    sections = _gather_sections(args)
    protocol = build_protocol(sections)
    result = teleport_assembled(protocol)
    reports = [("bob", measure_scenario(result, corrected=not args.raw))]
    if protocol.eve_tap_site is not EveTapSite.NONE:
        reports.append(("eve", measure_scenario(result, corrected=not args.raw, party="eve")))

    for party, report in reports:
        print(f"party: {party}")
        cells = _report_cells(report)
        for name in _REPORT_FIELDS:
            print(f"  {name}: {_fmt(cells[name])}")
    if args.out:
        header = ("party",) + _REPORT_FIELDS
        rows = [
            [party] + [_report_cells(report)[name] for name in _REPORT_FIELDS]
            for party, report in reports
        ]
        _emit_csv(args.out, header, rows)
        if not args.no_plot:
            from .plotting import save_scenario_figure

            save_scenario_figure(reports[0][1], _figure_path(args.out))
    return EXIT_OK


def _sweep_axis_column(parameter: str) -> str:
    if parameter == "frequency":
        return "freq_hz"
    return parameter.replace(".", "_")


def cmd_sweep(args: argparse.Namespace) -> int:
    sections = _gather_sections(args)
    protocol = build_protocol(sections)
    spec = build_sweep(sections)
    if args.grid:
        start, stop, count, scale = _parse_grid(args.grid)
        spec = replace(spec, start=start, stop=stop, count=count, scale=scale)
    axis = spec.axis_values()
    curve_values: Sequence[Optional[float]] = spec.curve_values or (None,)

    axis_col = _sweep_axis_column(spec.parameter)
    curve_col = spec.curve_parameter.replace(".", "_") if spec.curve_parameter else None
    metric_cols = (
        ("var_plus", "var_minus")
        if spec.parameter == "frequency"
        else ("fidelity", "t_plus", "t_minus", "t_q", "v_plus", "v_minus", "v_q", "m")
    )
    header = ((curve_col,) if curve_col else ()) + (axis_col,) + metric_cols

    rows: list[list[object]] = []
    curves: dict[str, tuple[np.ndarray, dict[str, np.ndarray]]] = {}
    for curve_value in curve_values:
        cfg = protocol
        if curve_value is not None:
            assert spec.curve_parameter is not None
            cfg = apply_parameter(cfg, spec.curve_parameter, curve_value)
        label = (
            f"{spec.curve_parameter}={curve_value:g}" if curve_value is not None else "model"
        )
        series: dict[str, list[float]] = {name: [] for name in metric_cols}
        if spec.parameter == "frequency":
            var_plus, var_minus = frequency_response_model(
                cfg,
                axis,
                delay_s=spec.delay_s,
                rolloff=spec.rolloff,
                corner_hz=spec.corner_hz,
            )
            for freq, vp, vm in zip(axis, var_plus, var_minus):
                prefix: list[object] = [curve_value] if curve_col else []
                rows.append(prefix + [freq, vp, vm])
            series = {"var_plus": list(var_plus), "var_minus": list(var_minus)}
        else:
            for value in axis:
                point = apply_parameter(cfg, spec.parameter, float(value))
                report = run_report(point)
                cells = _report_cells(report)
                prefix = [curve_value] if curve_col else []
                rows.append(prefix + [value] + [cells[name] for name in metric_cols])
                for name in metric_cols:
                    series[name].append(np.nan if cells[name] is None else float(cells[name]))
        curves[label] = (axis, {k: np.asarray(v) for k, v in series.items()})

    _emit_csv(args.out, header, rows)
    if args.out and not args.no_plot:
        from .plotting import save_curves_figure

        save_curves_figure(
            axis_col,
            curves,
            _figure_path(args.out),
            reference_lines={"t_q": 1.0, "v_q": 1.0, "m": 1.0},
        )
    return EXIT_OK


def cmd_tvmap(args: argparse.Namespace) -> int:
    sections = _gather_sections(args)
    protocol = build_protocol(sections)
    spec = build_tvmap(sections)
    if args.grid:
        start, stop, count, scale = _parse_grid(args.grid)
        if scale != "linear":
            raise ConfigError("tvmap gain grids are linear")
        spec = replace(spec, gain_start=start, gain_stop=stop, gain_count=count)

    gains = spec.gain_values()
    squeezers = spec.squeezers()
    tapped = protocol.eve_tap_site is not EveTapSite.NONE
    header: tuple[str, ...] = ("alpha", "var_sqz", "gain", "fidelity", "t_q", "v_q")
    if tapped:
        header += ("eve_t_q", "eve_v_q")
    rows: list[list[object]] = []
    traces: dict[str, tuple[list[float], list[float]]] = {}

    for alpha in spec.alphas:
        half = alpha / np.sqrt(2.0)
        template = replace(protocol, input_alpha=(half, half))
        if not tapped:
            for tv_row in tv_sweep(squeezers, gains, template):
                rows.append(
                    [alpha, tv_row.var_sqz, tv_row.gain, tv_row.fidelity, tv_row.t_q, tv_row.v_q]
                )
        else:
            for squeezer in squeezers:
                for gain in gains:
                    cfg = replace(
                        template,
                        squeezer_1=squeezer,
                        squeezer_2=squeezer,
                        gains=Gains.symmetric(float(gain)),
                    )
                    result = teleport_assembled(cfg)
                    bob = measure_scenario(result)
                    eve = measure_scenario(result, party="eve")
                    rows.append(
                        [alpha, squeezer.var_sqz, gain, bob.fidelity, bob.t_q, bob.v_q,
                         eve.t_q, eve.v_q]
                    )
        for squeezer in _trace_subset(squeezers):
            label = f"alpha={alpha:g}, var_sqz={squeezer.var_sqz:.3g}"
            t_vals = [float(r[4]) for r in rows if r[0] == alpha and r[1] == squeezer.var_sqz]
            v_vals = [float(r[5]) for r in rows if r[0] == alpha and r[1] == squeezer.var_sqz]
            traces[label] = (t_vals, v_vals)

    _emit_csv(args.out, header, rows)
    if args.out and not args.no_plot:
        from .plotting import save_tv_figure

        save_tv_figure(
            {k: (np.asarray(t), np.asarray(v)) for k, (t, v) in traces.items()},
            _figure_path(args.out),
        )
    return EXIT_OK


def _trace_subset(squeezers: Sequence[SqueezerSpec], limit: int = 6) -> list[SqueezerSpec]:
    if len(squeezers) <= limit:
        return list(squeezers)
    idx = np.unique(np.linspace(0, len(squeezers) - 1, limit).astype(int))
    return [squeezers[i] for i in idx]


def cmd_swap(args: argparse.Namespace) -> int:
    sections = _gather_sections(args)
    grid = build_swap_grid(sections)
    if args.grid:
        start, stop, count, scale = _parse_grid(args.grid)
        grid = replace(
            grid, gain_start=start, gain_stop=stop, gain_count=count, gain_scale=scale
        )
    gains = grid.gain_values()
    header = ("var_sqz", "input_var_sqz", "gain", "i_initial", "i_final", "k_opt")
    rows: list[list[object]] = []
    curves: dict[str, tuple[np.ndarray, dict[str, np.ndarray]]] = {}
    summaries: list[str] = []
    for tel_value in grid.teleporter_var_sqz:
        teleporter = SqueezerSpec.pure(tel_value)
        for inp_value in grid.input_var_sqz:
            inp = SqueezerSpec.pure(inp_value)
            finals = []
            for gain in gains:
                cfg = SwapConfig(teleporter, inp, float(gain))
                i_initial, i_final, k_opt = swap_run(cfg)
                rows.append([tel_value, inp_value, gain, i_initial, i_final, k_opt])
                finals.append(i_final)
            label = f"var_sqz={tel_value:g}, input={inp_value:g}"
            curves[label] = (gains, {"i_final": np.asarray(finals)})
            cfg = SwapConfig(teleporter, inp, 1.0)
            try:
                band = swap_bandwidth(cfg)
                ref = m_gain_bandwidth(teleporter)
                summaries.append(
                    f"{label}: optimum gain {g_opt_closed_form(cfg):.4f}, "
                    f"band [{band[0]:.6f}, {band[1]:.6f}] "
                    f"(teleporter band [{ref[0]:.6f}, {ref[1]:.6f}])"
                )
            except ValueError as exc:
                summaries.append(f"{label}: {exc}")

    _emit_csv(args.out, header, rows)
    if args.out:
        for line in summaries:
            print(line)
        if not args.no_plot:
            from .plotting import save_curves_figure

            save_curves_figure(
                "gain", curves, _figure_path(args.out), reference_lines={"i_final": 1.0}
            )
    return EXIT_OK


def cmd_pipeline(args: argparse.Namespace) -> int:
    sections = _gather_sections(args)
    protocol = build_protocol(sections)
    spec = build_pipeline_spec(sections)
    if args.seeds is not None:
        if args.seeds < 1:
            raise ConfigError("--seeds must be >= 1")
        spec = replace(spec, seeds=args.seeds)
    if args.seed is not None:
        spec = replace(spec, seed_start=args.seed)
    if args.averages is not None:
        if args.averages < 1:
            raise ConfigError("--averages must be >= 1")
        spec = replace(spec, averages=args.averages)

    pcfg = spec.pipeline_config(protocol)
    runs = run_many(pcfg, spec.seed_values())
    verified = fidelity_histogram(runs, "verified_gain")
    assumed = fidelity_histogram(runs, "assume_unity")
    ok = np.isfinite(verified)
    gain_est = np.array([0.5 * (r.gain_est_plus + r.gain_est_minus) for r in runs])
    gain_true = np.array([0.5 * (r.gain_true_plus + r.gain_true_minus) for r in runs])

    def _sem(values: np.ndarray) -> float:
        if values.size < 2:
            return 0.0
        return float(values.std(ddof=1) / np.sqrt(values.size))

    print(f"runs: {len(runs)} (averages {spec.averages}, seed start {spec.seed_start})")
    if ok.all():
        print(f"mean gain: estimated {gain_est.mean():.6f}, realized {gain_true.mean():.6f}")
        print(f"fidelity verified-gain: {verified.mean():.6f} +/- {_sem(verified):.6f}")
    elif ok.any():
        print(
            f"fidelity verified-gain: {verified[ok].mean():.6f} +/- "
            f"{_sem(verified[ok]):.6f} ({int((~ok).sum())} runs unverifiable)"
        )
    else:
        print("fidelity verified-gain: undefined (no run had both carriers visible)")
    print(f"fidelity assume-unity:  {assumed.mean():.6f} +/- {_sem(assumed):.6f}")
    diffs = (assumed - verified)[ok]
    if diffs.size >= 2 and diffs.std(ddof=1) > 0.0:
        t_stat = diffs.mean() / (diffs.std(ddof=1) / np.sqrt(diffs.size))
        print(f"assume-unity excess: {diffs.mean():.6f} (t = {t_stat:.2f})")
    if not ok.all():
        print(
            "warning: some quadrature carried no visible signal, so its gain "
            "was never verified; the assume-unity fidelity above is unchecked "
            "and can be inflated by deliberately reducing that gain"
        )
    if (
        protocol.input_alpha[1] == 0.0
        and protocol.input_alpha[0] != 0.0
        and protocol.gains.g_minus != protocol.gains.g_plus
    ):
        print(
            "warning: the signal occupies a single quadrature and the gains are "
            "asymmetric; the fidelity benchmark can be gamed this way "
            "(see check-paper's loophole checks)"
        )

    if args.out:
        write_runrecords(args.out, runs)
        records, _realized = synth_spectra(pcfg, spec.seed_start)
        stem, _ext = os.path.splitext(args.out)
        spectra_path = f"{stem}-spectra.csv"
        _emit_csv(
            spectra_path,
            ("freq_hz", "quadrature", "port", "variance"),
            spectra_rows(records),
        )
        if not args.no_plot:
            from .plotting import save_histogram_figure

            save_histogram_figure(verified, assumed, _figure_path(args.out))
    return EXIT_OK


def cmd_check_paper(args: argparse.Namespace) -> int:
    results = run_reference_checks()
    width = max(len(r.name) for r in results)
    for result in results:
        print(f"{result.status.upper():4s} {result.name:<{width}s} {result.detail}")
    failed = [r for r in results if r.failed]
    print(
        f"{len(results) - len(failed)} of {len(results)} checks passed"
        + (f", {len(failed)} failed" if failed else "")
    )

    if args.out:
        _emit_csv(
            args.out,
            ("status", "name", "detail"),
            [[r.status, r.name, r.detail.replace(",", ";")] for r in results],
        )
        if not args.no_plot:
            from .plotting import save_check_figure

            cfg = reference_protocol()
            grid = np.linspace(0.2, 2.2, 161)
            cfg = replace(cfg, input_alpha=(3.5, 3.5))
            curve_data: dict[str, list[float]] = {
                "fidelity": [], "t_q": [], "v_q": [], "m": []
            }
            for g in grid:
                report = run_report(cfg.with_gains(Gains.symmetric(float(g))))
                cells = _report_cells(report)
                for name in curve_data:
                    value = cells[name]
                    curve_data[name].append(np.nan if value is None else float(value))
            datapoints = []
            for point in load_reference_datapoints():
                if point.measure in curve_data:
                    datapoints.append(
                        (point.measure, point.gain, point.value, point.uncertainty)
                    )
            save_check_figure(
                grid,
                {k: np.asarray(v) for k, v in curve_data.items()},
                datapoints,
                _figure_path(args.out),
            )
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cvteleport",
        description="Quadrature teleportation simulator and characterization toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, *, grid: bool = False) -> None:
        p.add_argument("--config", help="config file (overrides the preset key by key)")
        p.add_argument(
            "--preset",
            help=f"named preset; one of: {', '.join(preset_names())}",
        )
        p.add_argument("--out", help="write delimited output to this path")
        p.add_argument(
            "--no-plot",
            action="store_true",
            help="skip the PNG figure normally written next to --out",
        )
        if grid:
            p.add_argument(
                "--grid",
                help="override the swept axis as start:stop:count[:log]",
            )

    p = sub.add_parser("teleport", help="run one scenario and report its measures")
    common(p)
    p.add_argument(
        "--raw",
        action="store_true",
        help="report detected moments without undoing the verifier loss",
    )
    p.set_defaults(func=cmd_teleport)

    p = sub.add_parser("sweep", help="vary one parameter and tabulate the measures")
    common(p, grid=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("tvmap", help="transfer/conditional-variance grids")
    common(p, grid=True)
    p.set_defaults(func=cmd_tvmap)

    p = sub.add_parser("swap", help="entanglement swapping curves and bands")
    common(p, grid=True)
    p.set_defaults(func=cmd_swap)

    p = sub.add_parser("pipeline", help="seeded spectrum-analyzer runs with estimation")
    common(p)
    p.add_argument("--seed", type=int, help="first seed (default from config)")
    p.add_argument("--seeds", type=int, help="number of seeded runs")
    p.add_argument("--averages", type=int, help="spectrum analyzer averages per bin")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser(
        "check-paper", help="compare bundled reference datapoints against the model"
    )
    p.add_argument("--out", help="write check results as CSV to this path")
    p.add_argument("--no-plot", action="store_true", help="skip the model-curve figure")
    p.set_defaults(func=cmd_check_paper)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Batch command-line pipeline.

``patchsim simulate <config>`` runs the full chain for every requested
switch state: matched-load calibration run, antenna run, S11/VSWR
spectra, band detection, far-field gain, CSV + SVG outputs, and a
comparison report against the published reference bands.

Exit codes: 0 success, 1 configuration error, 2 solver error,
3 run(s) did not converge (outputs are still written).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, parse_config
from .farfield import (EquivalenceBox, FarFieldError, peak_gain,
                       write_pattern_csv)
from .fdtd import (CpmlSpec, GridError, InstabilityError, init_grid, run)
from .geometry import (GeometryError, SwitchState, apply_switch, voxelize,
                       voxelize_calibration)
from .reference import (compare_to_reference, render_comparison_text,
                        write_comparison_csv)
from .spectra import (accepted_power, find_bands, reflection_spectrum,
                      write_band_summary_csv, write_spectrum_csv)
from . import svgplot

OUTPUT_ROOT_ENV = "PATCHSIM_OUTPUT_ROOT"
CALIBRATION_MAX_STEPS = 8000
GAIN_MATCH_TOLERANCE = 0.35e9     # band gain = gain at nearest sampled freq

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_UNCONVERGED = 3


def _gain_frequencies(cfg: RunConfig) -> np.ndarray:
    """Far-field sample frequencies, fixed before the time stepping.

    'auto' covers the sweep at 0.5 GHz spacing plus the 5.9 GHz
    comparison point; band gains are read from the nearest sample."""
    spec = cfg[("output", "gain_frequencies_ghz")]
    if spec == "auto":
        f0 = cfg[("solver", "frequency_start_ghz")]
        f1 = cfg[("solver", "frequency_stop_ghz")]
        vals = list(np.arange(f0, f1 + 1e-9, 0.5))
        if f0 <= 5.9 <= f1 and 5.9 not in vals:
            vals.append(5.9)
    else:
        vals = [float(x) for x in spec.split(",") if x.strip()]
    return np.array(sorted(set(vals))) * 1e9


def _design_block(cfg: RunConfig) -> str:
    """Human-readable design parameter table (no simulation)."""
    scene = cfg.scene()
    res = None
    if cfg[("design", "enabled")]:
        from .design import design
        res = design(cfg.design_spec(),
                     square_patch=cfg[("design", "square_patch")])
    rows = [
        ("operating frequency", f"{cfg[('design', 'frequency_ghz')]:.3f} GHz"),
        ("dielectric constant of substrate",
         f"{scene.substrate_permittivity:.2f}"),
        ("loss tangent of substrate", f"{scene.substrate_loss_tangent:.4f}"),
        ("height of substrate", f"{scene.substrate_height:.3f} mm"),
        ("length of substrate", f"{scene.substrate_length:.2f} mm"),
        ("width of substrate", f"{scene.substrate_width:.2f} mm"),
        ("thickness of ground plane", f"{scene.ground_thickness:.2f} mm"),
        ("length of patch", f"{scene.patch_length:.3f} mm"),
        ("width of patch", f"{scene.patch_width:.3f} mm"),
        ("thickness of patch", f"{scene.patch_thickness:.3f} mm"),
        ("feed position (x, y)",
         f"({scene.feed.position[0]:.2f}, {scene.feed.position[1]:.2f}) mm"),
        ("coax inner / outer radius",
         f"{scene.feed.inner_radius:.2f} / {scene.feed.outer_radius:.2f} mm"),
    ]
    if scene.srr is not None:
        rows += [
            ("slot ring outer side", f"{scene.srr.outer_side:.2f} mm"),
            ("slot width", f"{scene.srr.slot_width:.2f} mm"),
            ("switch gap width", f"{scene.srr.gap_width:.2f} mm"),
            ("ring spacing", f"{scene.srr.ring_spacing:.2f} mm"),
            ("ring count", f"{scene.srr.ring_count}"),
            ("gap orientation", ",".join(scene.srr.gap_orientation)),
        ]
    if res is not None:
        rows += [
            ("effective permittivity", f"{res.effective_permittivity:.4f}"),
            ("length extension", f"{res.length_extension:.4f} mm"),
        ]
    width = max(len(r[0]) for r in rows) + 2
    lines = ["Design parameters", "-" * (width + 16)]
    lines += [f"{name:<{width}}{value}" for name, value in rows]
    return "\n".join(lines)


def _set_threads(cfg: RunConfig, override: int | None):
    n = override if override is not None else cfg[("solver", "threads")]
    if n and n > 0:
        os.environ["NUMBA_NUM_THREADS"] = str(n)
        try:
            import numba
            numba.set_num_threads(n)
        except (ImportError, ValueError):
            pass


def _output_dir(cfg: RunConfig, out_flag: str | None,
                config_path: Path) -> Path:
    if out_flag:
        return Path(out_flag)
    if cfg[("output", "directory")]:
        return Path(cfg[("output", "directory")])
    root = Path(os.environ.get(OUTPUT_ROOT_ENV, "."))
    return root / (config_path.stem + "_out")


def run_pipeline(cfg: RunConfig, out_dir: Path, log=print) -> int:
    """Execute calibration + per-state antenna runs; write all artifacts.

    Returns a CLI exit code. Outputs are written even when a run fails to
    converge (the report flags it and the exit code is 3)."""
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "resolved_config.txt").write_text(cfg.resolved_text())
    meta_base = {"config_sha256": cfg.sha256, "patchsim_version": __version__}

    cell = cfg[("solver", "cell_size_mm")]
    cpml = CpmlSpec(depth=cfg[("solver", "cpml_depth_cells")])
    margin = cfg[("solver", "air_margin_cells")]
    dtype = cfg.dtype()
    cap = cfg[("solver", "memory_cap_gib")]
    source = cfg.source()
    freqs = cfg.frequency_grid()
    gain_freqs = _gain_frequencies(cfg)
    scene = cfg.scene()

    # matched-load calibration: incident waveform, shared by both states
    log(f"calibration run (cell {cell} mm) ...")
    cal_map = voxelize_calibration(scene.feed, cell)
    cal_grid = init_grid(cal_map, air_margin_cells=margin, cpml=cpml,
                         cfl=cfg[("solver", "cfl")], dtype=dtype,
                         memory_cap_gib=cap)
    incident = run(cal_grid, source,
                   min(cfg[("solver", "max_steps")], CALIBRATION_MAX_STEPS))
    if not incident.converged:
        log("warning: calibration run did not converge")

    spectra = {}
    patterns = {}
    bands_by_state = {}
    unconverged = []
    for state in cfg[("solver", "switch_states")]:
        name = state.value
        log(f"switch {name}: voxelizing and running ...")
        mat = voxelize(apply_switch(scene, state), cell)
        grid = init_grid(mat, air_margin_cells=margin, cpml=cpml,
                         cfl=cfg[("solver", "cfl")], dtype=dtype,
                         memory_cap_gib=cap)
        box = EquivalenceBox(grid, gain_freqs)
        record = run(grid, source, cfg[("solver", "max_steps")],
                     observers=(box,))
        if not record.converged:
            unconverged.append(name)
            log(f"warning: switch {name} run did not converge within "
                f"{cfg[('solver', 'max_steps')]} steps")

        spectrum = reflection_spectrum(record, incident, freqs)
        bands = find_bands(spectrum)
        p_acc = accepted_power(record, gain_freqs)

        gains = {}
        for k, f in enumerate(gain_freqs):
            if p_acc[k] > 0:
                gains[f] = peak_gain(to_far_field_cached(box, f, p_acc[k]))
        for b in bands:
            near = min(gain_freqs,
                       key=lambda f: abs(f - b.resonant_frequency))
            if abs(near - b.resonant_frequency) <= GAIN_MATCH_TOLERANCE:
                b.gain_dbi = gains.get(near)

        state_dir = out_dir / name.lower()
        state_dir.mkdir(exist_ok=True)
        meta = dict(meta_base, switch_state=name,
                    converged=record.converged,
                    gain_reference="accepted port power")
        write_spectrum_csv(state_dir / "spectrum.csv", spectrum, meta)
        write_band_summary_csv(state_dir / "bands.csv", {name: bands}, meta)
        f_pat = min(gain_freqs, key=lambda f: abs(f - 5.9e9))
        k_pat = int(np.where(gain_freqs == f_pat)[0][0])
        if p_acc[k_pat] > 0:
            pat = to_far_field_cached(box, f_pat, p_acc[k_pat])
            patterns[name] = pat
            write_pattern_csv(state_dir / "pattern.csv", pat,
                              dict(meta, frequency_Hz=f"{f_pat:.0f}"))
        svgplot.write_svg(state_dir / "s11.svg", _stamp(
            svgplot.s11_plot({name: spectrum}), cfg.sha256))

        spectra[name] = spectrum
        bands_by_state[name] = bands
        for b in bands:
            g = "n/a" if b.gain_dbi is None else f"{b.gain_dbi:+.2f} dBi"
            log(f"  band {b.resonant_frequency / 1e9:.3f} GHz, "
                f"S11 {b.s11_min_db:.2f} dB, "
                f"BW {b.bandwidth / 1e6:.0f} MHz, gain {g}")

    # cross-state overlays and comparison report
    svgplot.write_svg(out_dir / "s11_comparison.svg",
                      _stamp(svgplot.s11_plot(spectra), cfg.sha256))
    svgplot.write_svg(out_dir / "vswr_comparison.svg",
                      _stamp(svgplot.vswr_plot(spectra), cfg.sha256))
    if patterns:
        svgplot.write_svg(out_dir / "pattern_comparison.svg",
                          _stamp(svgplot.pattern_cut_plot(patterns),
                                 cfg.sha256))
    report = compare_to_reference(bands_by_state)
    write_comparison_csv(out_dir / "comparison.csv", report, meta_base)
    text = (f"# config_sha256={cfg.sha256}\n"
            f"# patchsim_version={__version__}\n\n"
            + render_comparison_text(report))
    if unconverged:
        text += ("\nUNCONVERGED RUNS: "
                 + ", ".join(unconverged)
                 + " (port signal above the decay threshold at max_steps)\n")
    (out_dir / "report.txt").write_text(text)
    log(f"outputs written to {out_dir}")
    for w in report.warnings:
        log(f"warning: {w}")
    return EXIT_UNCONVERGED if unconverged else EXIT_OK


def to_far_field_cached(box, frequency, p_acc):
    """Far-field pattern with per-box memoization of repeated frequencies."""
    from .farfield import to_far_field
    cache = getattr(box, "_pattern_cache", None)
    if cache is None:
        cache = box._pattern_cache = {}
    key = float(frequency)
    if key not in cache:
        cache[key] = to_far_field(box, frequency, None)
    pat = cache[key]
    from .farfield import FarFieldPattern
    return FarFieldPattern(pat.theta_deg, pat.phi_deg, pat.intensity,
                           pat.frequency, p_acc)


def _stamp(svg_text: str, sha: str) -> str:
    """Embed the resolved config hash as an SVG comment."""
    head, _, rest = svg_text.partition("\n")
    return f"{head}\n<!-- config_sha256={sha} -->\n{rest}"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="patchsim",
        description="Microstrip patch antenna design and FDTD verification")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    sim = sub.add_parser("simulate", help="run the full pipeline")
    sim.add_argument("config", help="path to a run configuration file")
    sim.add_argument("--out", default=None, metavar="DIR",
                     help=f"output directory (default: "
                          f"${OUTPUT_ROOT_ENV}/<config>_out)")
    sim.add_argument("--design-only", action="store_true",
                     help="print the design parameter block and exit")
    sim.add_argument("--threads", type=int, default=None, metavar="N",
                     help="solver threads (overrides config)")
    sim.add_argument("--cell-size-mm", type=float, default=None, metavar="X",
                     help="grid cell size in mm (overrides config)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        cfg = parse_config(path.read_text(encoding="utf-8"))
        if args.cell_size_mm is not None:
            if args.cell_size_mm <= 0:
                raise ConfigError("cell_size_mm: must be > 0")
            cfg.values[("solver", "cell_size_mm")] = args.cell_size_mm
        if args.threads is not None and args.threads < 0:
            raise ConfigError("threads: must be >= 0")
    except (ConfigError, GeometryError, OSError, UnicodeDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.design_only:
        print(_design_block(cfg))
        return EXIT_OK

    _set_threads(cfg, args.threads)
    out_dir = _output_dir(cfg, args.out, Path(args.config))
    try:
        return run_pipeline(cfg, out_dir)
    except (GridError, InstabilityError, FarFieldError, GeometryError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())

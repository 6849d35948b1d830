"""Flat plain-text run configuration.

Format: optional ``[section]`` headers, ``key = value`` lines, ``#``
comments, UTF-8. One section level, no nesting. Unknown keys are
rejected by name; parse errors carry the line number. An empty file
yields the shipped reference antenna, both switch states, 4-10 GHz.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .design import DesignSpec, design
from .geometry import (AntennaScene, CoaxFeedSpec, GeometryError, SrrSlotSpec,
                       SwitchState, build_scene)
from .fdtd import SourceSpec

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Configuration parse or validation failure."""


def _bool(v: str) -> bool:
    lv = v.strip().lower()
    if lv in ("true", "yes", "on", "1"):
        return True
    if lv in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _states(v: str) -> tuple:
    out = []
    for part in v.split(","):
        part = part.strip().upper()
        if part not in ("OFF", "ON"):
            raise ValueError(f"not a switch state: {part!r}")
        st = SwitchState[part]
        if st not in out:
            out.append(st)
    if not out:
        raise ValueError("at least one switch state required")
    return tuple(out)


def _sides(v: str) -> tuple:
    out = tuple(p.strip() for p in v.split(",") if p.strip())
    if not out:
        raise ValueError("empty side list")
    return out


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ",".join(x.value if isinstance(x, SwitchState) else str(x)
                        for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


# (section, key) -> (converter, default). Units are explicit in key names.
_SCHEMA = {
    ("", "schema_version"): (int, SCHEMA_VERSION),
    # closed-form sizing; applied only when design.enabled is true
    ("design", "enabled"): (_bool, False),
    ("design", "frequency_ghz"): (float, 6.0),
    ("design", "permittivity"): (float, 4.4),
    ("design", "substrate_height_mm"): (float, 1.55),
    ("design", "square_patch"): (_bool, True),
    # geometry (reference antenna defaults)
    ("geometry", "substrate_length_mm"): (float, 20.6),
    ("geometry", "substrate_width_mm"): (float, 20.6),
    ("geometry", "substrate_height_mm"): (float, 1.55),
    ("geometry", "permittivity"): (float, 4.4),
    ("geometry", "loss_tangent"): (float, 0.02),
    ("geometry", "ground_thickness_mm"): (float, 0.5),
    ("geometry", "patch_length_mm"): (float, 11.6),
    ("geometry", "patch_width_mm"): (float, 11.6),
    ("geometry", "patch_thickness_mm"): (float, 0.035),
    ("geometry", "srr_enabled"): (_bool, True),
    ("geometry", "srr_outer_side_mm"): (float, 9.0),
    ("geometry", "srr_slot_width_mm"): (float, 0.4),
    ("geometry", "srr_gap_width_mm"): (float, 0.6),
    ("geometry", "srr_ring_spacing_mm"): (float, 0.8),
    ("geometry", "srr_ring_count"): (int, 2),
    ("geometry", "srr_gap_orientation"): (_sides, ("+x", "-x")),
    ("geometry", "feed_x_mm"): (float, 2.8),
    ("geometry", "feed_y_mm"): (float, 0.0),
    ("geometry", "feed_inner_radius_mm"): (float, 0.12),
    ("geometry", "feed_outer_radius_mm"): (float, 0.42),
    ("geometry", "port_impedance_ohm"): (float, 50.0),
    # solver
    ("solver", "cell_size_mm"): (float, 0.2),
    ("solver", "cfl"): (float, 0.99),
    ("solver", "max_steps"): (int, 40000),
    ("solver", "air_margin_cells"): (int, 8),
    ("solver", "cpml_depth_cells"): (int, 10),
    ("solver", "precision"): (str, "single"),
    ("solver", "switch_states"): (_states, (SwitchState.OFF, SwitchState.ON)),
    ("solver", "source_center_ghz"): (float, 7.0),
    ("solver", "source_bandwidth_ghz"): (float, 6.0),
    ("solver", "frequency_start_ghz"): (float, 4.0),
    ("solver", "frequency_stop_ghz"): (float, 10.0),
    ("solver", "frequency_step_mhz"): (float, 5.0),
    ("solver", "threads"): (int, 0),
    ("solver", "memory_cap_gib"): (float, 4.0),
    # output
    ("output", "directory"): (str, ""),
    ("output", "gain_frequencies_ghz"): (str, "auto"),
    ("output", "seed"): (int, 0),   # reserved; the solver is deterministic
}

_SECTIONS = ("", "design", "geometry", "solver", "output")


@dataclass
class RunConfig:
    """Validated, fully-resolved run configuration."""

    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    # -- derived objects --------------------------------------------------
    def design_spec(self) -> DesignSpec:
        return DesignSpec(
            center_frequency=self[("design", "frequency_ghz")] * 1e9,
            relative_permittivity=self[("design", "permittivity")],
            substrate_height=self[("design", "substrate_height_mm")])

    def scene(self) -> AntennaScene:
        v = self.values
        srr = None
        if v[("geometry", "srr_enabled")] and v[("geometry", "srr_ring_count")] > 0:
            srr = SrrSlotSpec(
                outer_side=v[("geometry", "srr_outer_side_mm")],
                slot_width=v[("geometry", "srr_slot_width_mm")],
                gap_width=v[("geometry", "srr_gap_width_mm")],
                ring_spacing=v[("geometry", "srr_ring_spacing_mm")],
                ring_count=v[("geometry", "srr_ring_count")],
                gap_orientation=v[("geometry", "srr_gap_orientation")])
        feed = CoaxFeedSpec(
            inner_radius=v[("geometry", "feed_inner_radius_mm")],
            outer_radius=v[("geometry", "feed_outer_radius_mm")],
            position=(v[("geometry", "feed_x_mm")], v[("geometry", "feed_y_mm")]),
            reference_impedance=v[("geometry", "port_impedance_ohm")])
        patch_l = v[("geometry", "patch_length_mm")]
        patch_w = v[("geometry", "patch_width_mm")]
        if v[("design", "enabled")]:
            res = design(self.design_spec(),
                         square_patch=v[("design", "square_patch")])
            patch_l, patch_w = res.patch_length, res.patch_width
        try:
            return build_scene(
                substrate_length=v[("geometry", "substrate_length_mm")],
                substrate_width=v[("geometry", "substrate_width_mm")],
                substrate_height=v[("geometry", "substrate_height_mm")],
                substrate_permittivity=v[("geometry", "permittivity")],
                substrate_loss_tangent=v[("geometry", "loss_tangent")],
                ground_thickness=v[("geometry", "ground_thickness_mm")],
                patch_length=patch_l, patch_width=patch_w,
                patch_thickness=v[("geometry", "patch_thickness_mm")],
                srr=srr, feed=feed)
        except GeometryError as exc:
            raise ConfigError(f"invalid geometry: {exc}") from exc

    def source(self) -> SourceSpec:
        return SourceSpec(
            center_frequency=self[("solver", "source_center_ghz")] * 1e9,
            bandwidth=self[("solver", "source_bandwidth_ghz")] * 1e9)

    def frequency_grid(self) -> np.ndarray:
        f0 = self[("solver", "frequency_start_ghz")] * 1e9
        f1 = self[("solver", "frequency_stop_ghz")] * 1e9
        df = self[("solver", "frequency_step_mhz")] * 1e6
        n = int(round((f1 - f0) / df))
        return f0 + df * np.arange(n + 1)

    def dtype(self):
        return np.float32 if self[("solver", "precision")] == "single" \
            else np.float64

    # -- canonical echo ----------------------------------------------------
    def resolved_text(self) -> str:
        lines = ["# fully-resolved configuration (canonical echo)"]
        for section in _SECTIONS:
            keys = sorted(k for (s, k) in _SCHEMA if s == section)
            if section:
                lines.append("")
                lines.append(f"[{section}]")
            for k in keys:
                lines.append(f"{k} = {_fmt(self.values[(section, k)])}")
        return "\n".join(lines) + "\n"

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.resolved_text().encode()).hexdigest()


def _validate(cfg: RunConfig):
    v = cfg.values
    if v[("", "schema_version")] != SCHEMA_VERSION:
        raise ConfigError(
            f"schema_version: unsupported value {v[('', 'schema_version')]}, "
            f"expected {SCHEMA_VERSION}")
    positive = [("solver", "cell_size_mm"), ("solver", "max_steps"),
                ("solver", "frequency_step_mhz"), ("solver", "memory_cap_gib"),
                ("solver", "source_center_ghz"),
                ("solver", "source_bandwidth_ghz"),
                ("geometry", "port_impedance_ohm"),
                ("design", "frequency_ghz"),
                ("design", "substrate_height_mm")]
    for key in positive:
        if v[key] <= 0:
            raise ConfigError(f"{key[1]}: must be > 0, got {v[key]}")
    if not (0 < v[("solver", "cfl")] <= 1.0):
        raise ConfigError(f"cfl: must be in (0, 1], got {v[('solver', 'cfl')]}")
    if v[("solver", "precision")] not in ("single", "double"):
        raise ConfigError(
            f"precision: must be 'single' or 'double', "
            f"got {v[('solver', 'precision')]!r}")
    if v[("solver", "air_margin_cells")] < 4:
        raise ConfigError("air_margin_cells: must be >= 4")
    if v[("solver", "cpml_depth_cells")] < 1:
        raise ConfigError("cpml_depth_cells: must be >= 1")
    if v[("solver", "frequency_stop_ghz")] <= v[("solver", "frequency_start_ghz")]:
        raise ConfigError("frequency_stop_ghz: must exceed frequency_start_ghz")
    if v[("solver", "threads")] < 0:
        raise ConfigError("threads: must be >= 0")
    gf = v[("output", "gain_frequencies_ghz")]
    if gf != "auto":
        try:
            vals = [float(x) for x in gf.split(",") if x.strip()]
        except ValueError:
            raise ConfigError(
                f"gain_frequencies_ghz: expected 'auto' or a comma list, "
                f"got {gf!r}") from None
        if not vals or any(x <= 0 for x in vals):
            raise ConfigError("gain_frequencies_ghz: values must be > 0")
    cfg.scene()  # geometry invariants


def parse_config(text: str) -> RunConfig:
    """Parse and validate; defaults fill every omitted key."""
    values = {key: default for key, (_, default) in _SCHEMA.items()}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SECTIONS or not section:
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', "
                              f"got {line!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        skey = (section, key)
        if skey not in _SCHEMA:
            # schema_version may appear before any section header only
            raise ConfigError(
                f"line {lineno}: unknown key {key!r} in section "
                f"[{section or 'top level'}]")
        conv = _SCHEMA[skey][0]
        try:
            values[skey] = conv(val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {key}: {exc}") from exc
    cfg = RunConfig(values)
    _validate(cfg)
    return cfg

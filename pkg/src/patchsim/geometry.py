"""Parametric antenna scene and its voxelization onto the Yee lattice.

The scene frame is centred on the patch: x along the resonant length,
y along the width, z upward with z = 0 at the bottom of the coax port
cavity that hangs under the ground plane.

Cell membership uses half-open intervals [lo, hi) on cell centres for
rectangles and |coordinate| in [lo, hi) for the slot annuli; conductor
edges are then derived as "any adjacent cell is metal", which rounds
metal outward (conservative staircase).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .constants import EPS0
from .design import DesignResult

# substrate conductivity is evaluated at this frequency (band centre)
LOSS_REFERENCE_FREQUENCY = 7.0e9

# cells under the ground plane occupied by the coax port cavity
PORT_STUB_CELLS = 2
PORT_WALL_CELLS = 2


class GeometryError(ValueError):
    """Scene invariant violation; message names the offending parameter."""


class ResolutionError(GeometryError):
    """A geometric feature spans less than one grid cell."""


class SwitchState(Enum):
    OFF = "OFF"
    ON = "ON"


_SIDES = ("+x", "-x", "+y", "-y")


@dataclass(frozen=True)
class SrrSlotSpec:
    """Concentric square slot rings etched into the patch.

    Each ring may carry a conducting bridge ("gap") interrupting the slot;
    the outer ring's bridge is the reconfiguration switch and only exists
    in the ON state, inner bridges are permanent. Dimensions in mm.
    """

    outer_side: float = 9.0
    slot_width: float = 0.4
    gap_width: float = 0.6
    ring_spacing: float = 0.8
    ring_count: int = 2
    # opposite sides, on the arms crossed by the resonant-mode current:
    # calibrated so the bridge toggles the band structure
    gap_orientation: tuple[str, ...] = ("+x", "-x")


@dataclass(frozen=True)
class CoaxFeedSpec:
    """Coaxial probe feed; position is the (x, y) offset from patch centre."""

    inner_radius: float = 0.12     # mm
    outer_radius: float = 0.42     # mm
    position: tuple[float, float] = (2.8, 0.0)   # mm, ~L/4 toward an edge
    reference_impedance: float = 50.0            # ohm


@dataclass(frozen=True)
class AntennaScene:
    """Full parametric description of the slotted reconfigurable patch."""

    substrate_length: float = 20.6      # mm, x
    substrate_width: float = 20.6       # mm, y
    substrate_height: float = 1.55      # mm
    substrate_permittivity: float = 4.4
    substrate_loss_tangent: float = 0.02
    ground_thickness: float = 0.5       # mm
    patch_length: float = 11.6          # mm, x
    patch_width: float = 11.6           # mm, y
    patch_thickness: float = 0.035      # mm, 1-oz copper foil
    srr: SrrSlotSpec | None = dataclasses.field(default_factory=SrrSlotSpec)
    switch_state: SwitchState = SwitchState.OFF
    feed: CoaxFeedSpec = dataclasses.field(default_factory=CoaxFeedSpec)

    def __post_init__(self):
        for name in ("substrate_height", "ground_thickness", "patch_thickness",
                     "substrate_length", "substrate_width",
                     "patch_length", "patch_width"):
            if getattr(self, name) <= 0:
                raise GeometryError(f"{name} must be > 0")
        if self.substrate_permittivity < 1:
            raise GeometryError("substrate_permittivity must be >= 1")
        if self.substrate_loss_tangent < 0:
            raise GeometryError("substrate_loss_tangent must be >= 0")
        if self.patch_length > self.substrate_length:
            raise GeometryError("patch_length exceeds substrate_length")
        if self.patch_width > self.substrate_width:
            raise GeometryError("patch_width exceeds substrate_width")
        srr = self.srr
        if srr is not None and srr.ring_count > 0:
            if srr.slot_width <= 0:
                raise GeometryError("slot_width must be > 0")
            if srr.gap_width <= 0:
                raise GeometryError("gap_width must be > 0")
            if srr.ring_spacing < 0:
                raise GeometryError("ring_spacing must be >= 0")
            if srr.outer_side >= min(self.patch_length, self.patch_width):
                raise GeometryError("outer_side: SRR exceeds patch")
            if len(srr.gap_orientation) < srr.ring_count:
                raise GeometryError(
                    "gap_orientation must name a side for every ring")
            for s in srr.gap_orientation[:srr.ring_count]:
                if s not in _SIDES:
                    raise GeometryError(
                        f"gap_orientation: unknown side {s!r}")
            inner = srr.outer_side / 2 - (srr.ring_count - 1) * (
                srr.slot_width + srr.ring_spacing) - srr.slot_width
            if inner <= 0:
                raise GeometryError(
                    "ring_count/ring_spacing: innermost ring collapses")
        feed = self.feed
        if not (0 < feed.inner_radius < feed.outer_radius):
            raise GeometryError(
                "inner_radius must satisfy 0 < inner_radius < outer_radius")
        if feed.reference_impedance <= 0:
            raise GeometryError("reference_impedance must be > 0")
        px, py = feed.position
        if (abs(px) + feed.outer_radius > self.patch_length / 2
                or abs(py) + feed.outer_radius > self.patch_width / 2):
            raise GeometryError("feed position lies outside the patch footprint")


def build_scene(design: DesignResult | None = None, **overrides) -> AntennaScene:
    """Scene with reference defaults; patch sized from a design result when
    given; any field overridable by keyword."""
    kwargs = {}
    if design is not None:
        kwargs["patch_length"] = design.patch_length
        kwargs["patch_width"] = design.patch_width
    kwargs.update(overrides)
    return AntennaScene(**kwargs)


def apply_switch(scene: AntennaScene, state: SwitchState) -> AntennaScene:
    """Same scene with the reconfiguration switch set to ``state``."""
    return dataclasses.replace(scene, switch_state=state)


@dataclass
class MaterialMap:
    """Voxelized scene: cell materials plus per-edge conductor masks."""

    cell_size: float                 # mm
    eps_r: np.ndarray                # (nx, ny, nz) cells
    sigma: np.ndarray                # S/m per cell
    pec_ex: np.ndarray               # bool, Ex edge shape
    pec_ey: np.ndarray
    pec_ez: np.ndarray
    port_edge: tuple[int, int, int]          # Ez edge of the lumped source
    port_monitor_k: int                      # z level for the Ampere loop
    port_impedance: float
    pin_node: tuple[int, int]
    z_levels: dict
    origin: tuple[float, float]              # scene-frame mm of cell (0,0)
    load_edge: tuple[int, int, int] | None = None
    patch_mask: np.ndarray | None = None     # lateral metal mask of the patch

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.eps_r.shape

    def pec_edge_count(self) -> int:
        return int(self.pec_ex.sum() + self.pec_ey.sum() + self.pec_ez.sum())

    def edge_classes(self) -> dict:
        """Count edges per material class (PEC / FR4 / AIR)."""
        counts = {"PEC": 0, "FR4": 0, "AIR": 0}
        diel = self.eps_r > 1.0
        for pec, axes in ((self.pec_ex, (1, 2)), (self.pec_ey, (0, 2)),
                          (self.pec_ez, (0, 1))):
            touch = _adjacent_any(diel, axes)
            counts["PEC"] += int(pec.sum())
            counts["FR4"] += int((touch & ~pec).sum())
            counts["AIR"] += int((~touch & ~pec).sum())
        return counts

    def export_layers(self, path):
        """Debug dump: one ASCII PGM per z layer (0 air, 1 FR4, 2 metal)."""
        import pathlib

        base = pathlib.Path(path)
        base.mkdir(parents=True, exist_ok=True)
        metal = self._metal_cells
        for k in range(self.shape[2]):
            layer = np.where(metal[:, :, k], 2,
                             np.where(self.eps_r[:, :, k] > 1, 1, 0))
            lines = [f"P2 {layer.shape[1]} {layer.shape[0]} 2"]
            for row in layer:
                lines.append(" ".join(str(v) for v in row))
            (base / f"layer_{k:03d}.pgm").write_text("\n".join(lines) + "\n")


def _adjacent_any(cells: np.ndarray, axes: tuple[int, int]) -> np.ndarray:
    """Edge mask: true where any of the four adjacent cells is true."""
    pad = [(0, 0)] * 3
    for ax in axes:
        pad[ax] = (1, 1)
    c = np.pad(cells, pad, mode="constant")
    a1, a2 = axes

    def take(o1, o2):
        s = [slice(None)] * 3
        s[a1] = slice(o1, c.shape[a1] - 1 + o1)
        s[a2] = slice(o2, c.shape[a2] - 1 + o2)
        return c[tuple(s)]

    return take(0, 0) | take(0, 1) | take(1, 0) | take(1, 1)


def _rect(xc, yc, x0, x1, y0, y1):
    return ((xc[:, None] >= x0) & (xc[:, None] < x1)
            & (yc[None, :] >= y0) & (yc[None, :] < y1))


def _patch_metal_2d(scene: AntennaScene, xc, yc) -> np.ndarray:
    """Lateral metal mask of the patch layer: patch minus slot rings plus
    the ring bridges (inner bridges always, outer bridge in the ON state)."""
    lp, wp = scene.patch_length / 2, scene.patch_width / 2
    metal = _rect(xc, yc, -lp, lp, -wp, wp)
    srr = scene.srr
    if srr is None or srr.ring_count == 0:
        return metal
    ax = np.abs(xc)[:, None]
    ay = np.abs(yc)[None, :]
    m = np.maximum(np.broadcast_to(ax, metal.shape),
                   np.broadcast_to(ay, metal.shape))
    for r in range(srr.ring_count):
        oh = srr.outer_side / 2 - r * (srr.slot_width + srr.ring_spacing)
        ih = oh - srr.slot_width
        slot = (m >= ih) & (m < oh)
        bridged = (r > 0) or scene.switch_state is SwitchState.ON
        if bridged:
            side = srr.gap_orientation[r]
            along = xc[:, None] if side[1] == "x" else yc[None, :]
            perp = yc[None, :] if side[1] == "x" else xc[:, None]
            sgn = 1.0 if side[0] == "+" else -1.0
            in_arm = (sgn * along >= ih) & (sgn * along < oh)
            in_gap = (perp >= -srr.gap_width / 2) & (perp < srr.gap_width / 2)
            slot &= ~(in_arm & in_gap)
        metal &= ~slot
    return metal


def voxelize(scene: AntennaScene, cell_size: float) -> MaterialMap:
    """Staircase the scene onto a uniform lattice of ``cell_size`` mm.

    The lateral grid is aligned so the patch corners sit on cell
    boundaries; the coax pin snaps to the nearest lattice node. Deterministic
    for identical inputs.
    """
    cs = float(cell_size)
    if cs <= 0:
        raise GeometryError("cell_size must be > 0")
    srr = scene.srr
    if srr is not None and srr.ring_count > 0:
        if srr.slot_width < cs - 1e-12:
            raise ResolutionError(
                f"slot_width {srr.slot_width} mm spans < 1 cell at "
                f"cell_size {cs} mm")
        if srr.gap_width < cs - 1e-12:
            raise ResolutionError(
                f"gap_width {srr.gap_width} mm spans < 1 cell at "
                f"cell_size {cs} mm")
    if scene.feed.outer_radius < cs - 1e-12:
        raise ResolutionError(
            f"feed outer_radius {scene.feed.outer_radius} mm spans < 1 cell "
            f"at cell_size {cs} mm")

    eps_ix = 1e-9

    def lateral_axis(sub_len, patch_len):
        n_out = math.ceil((sub_len - patch_len) / 2 / cs - eps_ix)
        lo = -patch_len / 2 - n_out * cs
        n = math.ceil((sub_len / 2 - lo) / cs - eps_ix)
        return lo, n

    x0, nx = lateral_axis(scene.substrate_length, scene.patch_length)
    y0, ny = lateral_axis(scene.substrate_width, scene.patch_width)
    xc = x0 + (np.arange(nx) + 0.5) * cs
    yc = y0 + (np.arange(ny) + 0.5) * cs

    ng = math.ceil(scene.ground_thickness / cs - eps_ix)
    nsub = math.ceil(scene.substrate_height / cs - eps_ix)
    # metal thinner than one cell is modelled as a zero-thickness sheet
    sheet_patch = scene.patch_thickness < cs - 1e-12
    npatch = 0 if sheet_patch else math.ceil(scene.patch_thickness / cs - eps_ix)
    k_ground = 1 + PORT_STUB_CELLS
    k_sub = k_ground + ng
    k_patch = k_sub + nsub
    nz = k_patch + npatch

    # pin node snapped to the lattice
    px, py = scene.feed.position
    i_pin = int(round((px - x0) / cs))
    j_pin = int(round((py - y0) / cs))
    xf, yf = x0 + i_pin * cs, y0 + j_pin * cs
    dist = np.hypot(xc[:, None] - xf, yc[None, :] - yf)

    sub2d = _rect(xc, yc, -scene.substrate_length / 2, scene.substrate_length / 2,
                  -scene.substrate_width / 2, scene.substrate_width / 2)
    r_out = scene.feed.outer_radius
    r_shield = r_out + PORT_WALL_CELLS * cs
    ground2d = sub2d & (dist >= r_out)
    patch2d = _patch_metal_2d(scene, xc, yc)

    metal = np.zeros((nx, ny, nz), dtype=bool)
    metal[:, :, 0] = dist < r_shield                      # port cavity cap
    for k in range(1, k_ground):                          # shield tube
        metal[:, :, k] = (dist >= r_out) & (dist < r_shield)
    for k in range(k_ground, k_sub):                      # ground plane
        metal[:, :, k] = ground2d
    for k in range(k_patch, nz):                          # patch (thick case)
        metal[:, :, k] = patch2d

    eps_r = np.ones((nx, ny, nz))
    sigma = np.zeros((nx, ny, nz))
    eps_sub = scene.substrate_permittivity
    sigma_sub = (2 * math.pi * LOSS_REFERENCE_FREQUENCY * EPS0 * eps_sub
                 * scene.substrate_loss_tangent)
    # the top substrate cell may be partially filled; represent the exact
    # substrate height by series (perpendicular-field) dielectric mixing
    frac_top = scene.substrate_height / cs - (nsub - 1)
    eps_top = 1.0 / (frac_top / eps_sub + (1.0 - frac_top))
    sigma_top = sigma_sub * frac_top * (eps_top / eps_sub) ** 2
    for k in range(k_sub, k_patch):
        top = (k == k_patch - 1) and frac_top < 1.0 - 1e-9
        eps_r[:, :, k][sub2d] = eps_top if top else eps_sub
        sigma[:, :, k][sub2d] = sigma_top if top else sigma_sub

    pec_ex = _adjacent_any(metal, (1, 2))
    pec_ey = _adjacent_any(metal, (0, 2))
    pec_ez = _adjacent_any(metal, (0, 1))
    if sheet_patch:
        pad_y = np.pad(patch2d, ((0, 0), (1, 1)))
        pec_ex[:, :, k_patch] |= pad_y[:, :-1] | pad_y[:, 1:]
        pad_x = np.pad(patch2d, ((1, 1), (0, 0)))
        pec_ey[:, :, k_patch] |= pad_x[:-1, :] | pad_x[1:, :]
    # coax pin: one-cell column of Ez edges from above the source edge up
    # to the patch underside
    pec_ez[i_pin, j_pin, 2:k_patch] = True

    m = MaterialMap(
        cell_size=cs, eps_r=eps_r, sigma=sigma,
        pec_ex=pec_ex, pec_ey=pec_ey, pec_ez=pec_ez,
        port_edge=(i_pin, j_pin, 1), port_monitor_k=2,
        port_impedance=scene.feed.reference_impedance,
        pin_node=(i_pin, j_pin),
        z_levels={"cap": 0, "ground": k_ground, "substrate": k_sub,
                  "patch": k_patch, "top": nz},
        origin=(x0, y0),
        patch_mask=patch2d,
    )
    m._metal_cells = metal
    return m


def voxelize_calibration(feed: CoaxFeedSpec, cell_size: float) -> MaterialMap:
    """Port stack alone, terminated by a matched lumped load: a closed coax
    cavity whose recorded port voltage is the incident waveform for the
    two-run reflection extraction."""
    cs = float(cell_size)
    if feed.outer_radius < cs - 1e-12:
        raise ResolutionError(
            f"feed outer_radius {feed.outer_radius} mm spans < 1 cell at "
            f"cell_size {cs} mm")
    r_shield = feed.outer_radius + PORT_WALL_CELLS * cs
    n_side = math.ceil(r_shield / cs) + 2
    nx = ny = 2 * n_side + 1
    i_pin = j_pin = n_side
    # z: cap, source edge cell, pin cell, load edge cell, top cap
    nz = 5
    xc = (np.arange(nx) - i_pin + 0.5) * cs
    yc = (np.arange(ny) - j_pin + 0.5) * cs
    dist = np.hypot(xc[:, None], yc[None, :])

    metal = np.zeros((nx, ny, nz), dtype=bool)
    metal[:, :, 0] = dist < r_shield
    metal[:, :, 4] = dist < r_shield
    for k in (1, 2, 3):
        metal[:, :, k] = (dist >= feed.outer_radius) & (dist < r_shield)

    pec_ex = _adjacent_any(metal, (1, 2))
    pec_ey = _adjacent_any(metal, (0, 2))
    pec_ez = _adjacent_any(metal, (0, 1))
    pec_ez[i_pin, j_pin, 2] = True

    m = MaterialMap(
        cell_size=cs,
        eps_r=np.ones((nx, ny, nz)), sigma=np.zeros((nx, ny, nz)),
        pec_ex=pec_ex, pec_ey=pec_ey, pec_ez=pec_ez,
        port_edge=(i_pin, j_pin, 1), port_monitor_k=2,
        port_impedance=feed.reference_impedance,
        pin_node=(i_pin, j_pin),
        z_levels={"cap": 0, "load": 3, "top": nz},
        origin=(float(xc[0] - 0.5 * cs), float(yc[0] - 0.5 * cs)),
        load_edge=(i_pin, j_pin, 3),
    )
    m._metal_cells = metal
    return m

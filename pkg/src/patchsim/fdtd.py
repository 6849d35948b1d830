"""3-D FDTD Maxwell solver on a Yee lattice with CPML absorbing boundaries.

The grid owns the staggered field arrays and precomputed update
coefficients; the per-step arithmetic lives in :mod:`patchsim.kernels`
(numba-compiled with a pure-numpy fallback). Lumped resistive elements
(the coax port source and matched loads) are applied as a local
correction after the bulk E update.

Field layout for nx x ny x nz cells:
    Ex (nx, ny+1, nz+1)   Ey (nx+1, ny, nz+1)   Ez (nx+1, ny+1, nz)
    Hx (nx+1, ny, nz)     Hy (nx, ny+1, nz)     Hz (nx, ny, nz+1)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .constants import C0, EPS0, ETA0, MM, MU0


class GridError(ValueError):
    """Invalid grid construction parameters."""


class MemoryCapError(GridError):
    """Estimated grid memory exceeds the configured cap."""


class InstabilityError(RuntimeError):
    """Non-finite or diverging fields detected during time stepping."""

    def __init__(self, step_index: int, max_value: float):
        self.step_index = step_index
        self.max_value = max_value
        super().__init__(
            f"field instability at step {step_index} (max |field| = {max_value:.3e})"
        )


@dataclass(frozen=True)
class CpmlSpec:
    """Convolutional PML configuration (per boundary, all six faces)."""

    depth: int = 10                # cells
    grading_order: float = 3.0     # polynomial grading exponent
    kappa_max: float = 4.0         # max coordinate stretching
    alpha_max: float = 0.05        # CFS parameter, S/m
    sigma_ratio: float = 0.8       # fraction of the textbook optimum sigma


@dataclass(frozen=True)
class SourceSpec:
    """Gaussian-modulated sinusoid drive for the coax port.

    ``bandwidth`` is the two-sided span over which the spectral envelope
    stays within -20 dB of its peak.
    """

    center_frequency: float = 7.0e9   # Hz
    bandwidth: float = 6.0e9          # Hz
    amplitude: float = 1.0            # volts

    def __post_init__(self):
        if self.center_frequency <= 0 or self.bandwidth <= 0:
            raise ValueError("source frequency and bandwidth must be > 0")

    @property
    def tau(self) -> float:
        # -20 dB amplitude at +-bandwidth/2 around the carrier
        return math.sqrt(math.log(10.0)) / (math.pi * 0.5 * self.bandwidth)

    @property
    def delay(self) -> float:
        return 4.5 * self.tau

    @property
    def t_end(self) -> float:
        return self.delay + 4.5 * self.tau

    def voltage(self, t: float) -> float:
        u = (t - self.delay) / self.tau
        return self.amplitude * math.exp(-u * u) * math.sin(
            2.0 * math.pi * self.center_frequency * (t - self.delay)
        )

    def envelope_db(self, f: float) -> float:
        """Spectral envelope at frequency f relative to the carrier peak, dB."""
        u = math.pi * self.tau * (f - self.center_frequency)
        v = math.pi * self.tau * (f + self.center_frequency)
        amp = math.exp(-u * u) + math.exp(-v * v)
        return 20.0 * math.log10(max(amp, 1e-300))


@dataclass
class PortRecord:
    """Per-step port voltage and current samples from one run.

    Voltage samples are taken at integer time steps, current samples half a
    step earlier (Yee staggering).
    """

    voltage: np.ndarray
    current: np.ndarray
    time_step: float
    converged: bool

    def __post_init__(self):
        if len(self.voltage) != len(self.current):
            raise ValueError("voltage and current records must have equal length")
        if not (np.all(np.isfinite(self.voltage)) and np.all(np.isfinite(self.current))):
            raise ValueError("port record contains non-finite samples")

    def __len__(self) -> int:
        return len(self.voltage)


class LumpedElement:
    """Resistor (optionally with a series voltage source) on one Ez edge."""

    def __init__(self, index: tuple[int, int, int], resistance: float,
                 waveform=None):
        if resistance <= 0:
            raise ValueError("lumped resistance must be > 0")
        self.index = index
        self.resistance = resistance
        self.waveform = waveform   # callable t -> volts, or None for a resistor

    def attach(self, grid: "SimulationGrid"):
        beta = grid.dt * grid.dz / (
            2.0 * self.resistance * EPS0 * grid.dx * grid.dy)
        self._ca = (1.0 - beta) / (1.0 + beta)
        self._cb = (grid.dt / EPS0) / (1.0 + beta)
        self._cs = 2.0 * beta / (1.0 + beta) / grid.dz

    def apply(self, grid: "SimulationGrid", ez_old: float, t_half: float):
        i, j, k = self.index
        curl = (grid.Hy[i, j, k] - grid.Hy[i - 1, j, k]) * grid.inv_dx \
            - (grid.Hx[i, j, k] - grid.Hx[i, j - 1, k]) * grid.inv_dy
        v = self._ca * ez_old + self._cb * curl
        if self.waveform is not None:
            v += self._cs * self.waveform(t_half)
        grid.Ez[i, j, k] = v


class SoftSource:
    """Additive Ez excitation on a single edge (test instrumentation)."""

    def __init__(self, index: tuple[int, int, int], waveform):
        self.index = index
        self.waveform = waveform

    def apply(self, grid: "SimulationGrid", t: float):
        grid.Ez[self.index] += grid.Ez.dtype.type(self.waveform(t))


def _cpml_axis(n_cells: int, depth: int, d: float, dt: float, spec: CpmlSpec,
               dtype):
    """1-D CPML coefficient profiles for one axis.

    Returns node-sampled (be, ce, ike) of length n_cells+1 and half-sampled
    (bh, ch, ikh) of length n_cells. Outside the absorbing layers b == 1,
    c == 0 and 1/kappa == 1.
    """
    m = spec.grading_order
    sigma_max = spec.sigma_ratio * (m + 1.0) / (ETA0 * d)

    def profile(positions):
        b = np.ones_like(positions)
        c = np.zeros_like(positions)
        ik = np.ones_like(positions)
        for idx, p in enumerate(positions):
            if depth <= 0:
                continue
            if p < depth:
                dist = (depth - p) / depth
            elif p > n_cells - depth:
                dist = (p - (n_cells - depth)) / depth
            else:
                continue
            sigma = sigma_max * dist ** m
            kappa = 1.0 + (spec.kappa_max - 1.0) * dist ** m
            alpha = spec.alpha_max * (1.0 - dist)
            b[idx] = math.exp(-(sigma / kappa + alpha) * dt / EPS0)
            denom = sigma * kappa + kappa * kappa * alpha
            c[idx] = sigma * (b[idx] - 1.0) / denom if denom > 0 else 0.0
            ik[idx] = 1.0 / kappa
        return b.astype(dtype), c.astype(dtype), ik.astype(dtype)

    nodes = np.arange(n_cells + 1, dtype=np.float64)
    halves = nodes[:-1] + 0.5
    be, ce, ike = profile(nodes)
    bh, ch, ikh = profile(halves)
    return be, ce, ike, bh, ch, ikh


class SimulationGrid:
    """Discretized Yee lattice with precomputed update coefficients."""

    def __init__(self, nx: int, ny: int, nz: int, cell_size: float,
                 cfl: float = 0.99, cpml: CpmlSpec | None = None,
                 dtype=np.float64, memory_cap_gib: float = 4.0):
        if cfl <= 0 or cfl > 1.0:
            raise GridError(f"CFL factor must be in (0, 1], got {cfl}")
        if min(nx, ny, nz) < 4:
            raise GridError("grid must be at least 4 cells per axis")
        self.nx, self.ny, self.nz = nx, ny, nz
        self.dx = self.dy = self.dz = cell_size * MM
        self.inv_dx = 1.0 / self.dx
        self.inv_dy = 1.0 / self.dy
        self.inv_dz = 1.0 / self.dz
        self.cell_size = cell_size
        self.cfl = cfl
        self.dtype = np.dtype(dtype)
        self.cpml = cpml or CpmlSpec(depth=0)
        self.dt = cfl / (C0 * math.sqrt(
            self.inv_dx ** 2 + self.inv_dy ** 2 + self.inv_dz ** 2))
        self.n = 0
        self.lumped: list[LumpedElement] = []
        self.soft_sources: list[SoftSource] = []
        self.port: LumpedElement | None = None
        self.port_monitor_k: int | None = None
        self.origin_cells: tuple[int, int, int] = (0, 0, 0)

        n_cells = nx * ny * nz
        est = 26 * n_cells * self.dtype.itemsize
        if est > memory_cap_gib * 2 ** 30:
            raise MemoryCapError(
                f"estimated grid memory {est / 2**30:.2f} GiB exceeds cap "
                f"{memory_cap_gib} GiB")

        dt_ = self.dtype
        self.Ex = np.zeros((nx, ny + 1, nz + 1), dt_)
        self.Ey = np.zeros((nx + 1, ny, nz + 1), dt_)
        self.Ez = np.zeros((nx + 1, ny + 1, nz), dt_)
        self.Hx = np.zeros((nx + 1, ny, nz), dt_)
        self.Hy = np.zeros((nx, ny + 1, nz), dt_)
        self.Hz = np.zeros((nx, ny, nz + 1), dt_)

        # vacuum coefficients by default; set_materials() overwrites
        ca0 = dt_.type(1.0)
        cb0 = dt_.type(self.dt / EPS0)
        self.caex = np.full_like(self.Ex, ca0)
        self.cbex = np.full_like(self.Ex, cb0)
        self.caey = np.full_like(self.Ey, ca0)
        self.cbey = np.full_like(self.Ey, cb0)
        self.caez = np.full_like(self.Ez, ca0)
        self.cbez = np.full_like(self.Ez, cb0)

        self.psi_e = tuple(np.zeros_like(a) for a in
                           (self.Ex, self.Ex, self.Ey, self.Ey, self.Ez, self.Ez))
        self.psi_h = tuple(np.zeros_like(a) for a in
                           (self.Hx, self.Hx, self.Hy, self.Hy, self.Hz, self.Hz))

        self.bex, self.cex, self.ikex, self.bhx, self.chx, self.ikhx = \
            _cpml_axis(nx, self.cpml.depth, self.dx, self.dt, self.cpml, dt_)
        self.bey, self.cey, self.ikey, self.bhy, self.chy, self.ikhy = \
            _cpml_axis(ny, self.cpml.depth, self.dy, self.dt, self.cpml, dt_)
        self.bez, self.cez, self.ikez, self.bhz, self.chz, self.ikhz = \
            _cpml_axis(nz, self.cpml.depth, self.dz, self.dt, self.cpml, dt_)

        self._dt_over_mu = dt_.type(self.dt / MU0)
        self._sc = tuple(dt_.type(v) for v in
                         (self.inv_dx, self.inv_dy, self.inv_dz))

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.nx, self.ny, self.nz)

    def set_materials(self, eps_r_cells: np.ndarray, sigma_cells: np.ndarray,
                      pec_ex: np.ndarray, pec_ey: np.ndarray,
                      pec_ez: np.ndarray):
        """Precompute per-edge E-update coefficients from cell materials.

        Edge permittivity/conductivity is the mean over the four adjacent
        cells (clamped at the outer boundary). PEC edges get ca = cb = 0.
        """
        if eps_r_cells.shape != self.shape:
            raise GridError("material array shape mismatch")

        def edge_avg(cells, pad_axes):
            p = [(0, 0)] * 3
            for ax in pad_axes:
                p[ax] = (1, 1)
            c = np.pad(cells, p, mode="edge")
            a1, a2 = pad_axes
            sl = [slice(None)] * 3

            def take(o1, o2):
                s = list(sl)
                s[a1] = slice(o1, c.shape[a1] - 1 + o1)
                s[a2] = slice(o2, c.shape[a2] - 1 + o2)
                return c[tuple(s)]

            return 0.25 * (take(0, 0) + take(0, 1) + take(1, 0) + take(1, 1))

        for comp, axes, ca, cb, pec in (
            ("x", (1, 2), self.caex, self.cbex, pec_ex),
            ("y", (0, 2), self.caey, self.cbey, pec_ey),
            ("z", (0, 1), self.caez, self.cbez, pec_ez),
        ):
            eps = edge_avg(eps_r_cells, axes) * EPS0
            sig = edge_avg(sigma_cells, axes)
            loss = sig * self.dt / (2.0 * eps)
            ca[...] = ((1.0 - loss) / (1.0 + loss)).astype(self.dtype)
            cb[...] = ((self.dt / eps) / (1.0 + loss)).astype(self.dtype)
            ca[pec] = 0.0
            cb[pec] = 0.0

    def add_lumped(self, element: LumpedElement):
        element.attach(self)
        self.lumped.append(element)

    def step(self):
        """One leapfrog update: H to (n+1/2) dt, then E to (n+1) dt."""
        inv_dx, inv_dy, inv_dz = self._sc
        kernels.update_h(
            self.Ex, self.Ey, self.Ez, self.Hx, self.Hy, self.Hz,
            *self.psi_h,
            self.bhx, self.chx, self.bhy, self.chy, self.bhz, self.chz,
            self.ikhx, self.ikhy, self.ikhz,
            inv_dx, inv_dy, inv_dz, self._dt_over_mu)
        ez_old = [float(self.Ez[el.index]) for el in self.lumped]
        kernels.update_e(
            self.Ex, self.Ey, self.Ez, self.Hx, self.Hy, self.Hz,
            self.caex, self.cbex, self.caey, self.cbey, self.caez, self.cbez,
            *self.psi_e,
            self.bex, self.cex, self.bey, self.cey, self.bez, self.cez,
            self.ikex, self.ikey, self.ikez,
            inv_dx, inv_dy, inv_dz)
        t_half = (self.n + 0.5) * self.dt
        for el, old in zip(self.lumped, ez_old):
            el.apply(self, old, t_half)
        for src in self.soft_sources:
            src.apply(self, t_half)
        self.n += 1

    def check_stability(self, limit: float = 1e12):
        m = float(np.max(np.abs(self.Ez)))
        if not math.isfinite(m) or m > limit:
            raise InstabilityError(self.n, m)

    def port_voltage(self) -> float:
        assert self.port is not None
        return float(self.Ez[self.port.index]) * self.dz

    def port_current(self) -> float:
        """Ampere-loop current around the feed pin at the monitor level."""
        assert self.port is not None and self.port_monitor_k is not None
        i, j, _ = self.port.index
        k = self.port_monitor_k
        return -(self.dy * (self.Hy[i, j, k] - self.Hy[i - 1, j, k])
                 - self.dx * (self.Hx[i, j, k] - self.Hx[i, j - 1, k]))


def total_field_energy(grid: SimulationGrid, e_prev) -> float:
    """Discrete EM energy after a step, using the time-staggered product
    E(n) . E(n+1) with H(n+1/2) squared; exactly conserved by the lossless
    update in a closed PEC box. ``e_prev`` holds (Ex, Ey, Ez) copies taken
    before the last step() call."""
    dv = grid.dx * grid.dy * grid.dz
    ue = 0.0
    for e_now, e_old, cb in ((grid.Ex, e_prev[0], grid.cbex),
                             (grid.Ey, e_prev[1], grid.cbey),
                             (grid.Ez, e_prev[2], grid.cbez)):
        eps = np.where(cb > 0, grid.dt / cb, 0.0)  # dt/cb = eps for lossless
        ue += float(np.sum(eps * e_now.astype(np.float64) * e_old))
    uh = 0.0
    for h_now in (grid.Hx, grid.Hy, grid.Hz):
        uh += MU0 * float(np.sum(h_now.astype(np.float64) ** 2))
    return 0.5 * dv * (ue + uh)


def div_h(grid: SimulationGrid) -> np.ndarray:
    """Discrete divergence of H sampled at cell centres."""
    h = [a.astype(np.float64) for a in (grid.Hx, grid.Hy, grid.Hz)]
    return (np.diff(h[0], axis=0) * grid.inv_dx
            + np.diff(h[1], axis=1) * grid.inv_dy
            + np.diff(h[2], axis=2) * grid.inv_dz)


def run(grid: SimulationGrid, source: SourceSpec | None, max_steps: int,
        observers=(), decay_threshold: float = 1e-5,
        check_interval: int = 100, stability_interval: int = 200,
        progress=None):
    """Step the grid until the port signal decays or max_steps is reached.

    ``observers`` are callables invoked as obs(grid) after each full step.
    Returns a PortRecord when the grid has a port, else None (after
    max_steps). The record's ``converged`` flag reports whether the decay
    criterion was met.
    """
    has_port = grid.port is not None
    if has_port:
        grid.port.waveform = (source.voltage if source is not None else None)
    v_rec: list[float] = []
    i_rec: list[float] = []
    peak = 0.0
    converged = False
    n_source = (int(math.ceil(source.t_end / grid.dt)) + 1) if source else 0

    for n in range(max_steps):
        grid.step()
        if has_port:
            i_rec.append(grid.port_current())
            v = grid.port_voltage()
            v_rec.append(v)
            peak = max(peak, abs(v))
        for obs in observers:
            obs(grid)
        if (n + 1) % stability_interval == 0:
            grid.check_stability()
        if has_port and n > n_source and (n + 1) % check_interval == 0:
            tail = v_rec[-check_interval:]
            if peak > 0 and max(abs(s) for s in tail) < decay_threshold * peak:
                converged = True
                break
        if progress is not None and (n + 1) % 1000 == 0:
            progress(n + 1, max_steps)
    grid.check_stability()

    if not has_port:
        return None
    return PortRecord(np.asarray(v_rec), np.asarray(i_rec), grid.dt, converged)


def init_grid(material_map, air_margin_cells: int = 8,
              cpml: CpmlSpec | None = None, cfl: float = 0.99,
              dtype=np.float64, memory_cap_gib: float = 4.0,
              ) -> SimulationGrid:
    """Embed a voxelized material map in a grid padded on all sides by the
    CPML depth plus an air margin, and attach the lumped port (and, for
    calibration maps, the matched load)."""
    if air_margin_cells < 4:
        raise GridError("air_margin_cells must be >= 4")
    cpml = cpml or CpmlSpec()
    p = cpml.depth + air_margin_cells
    mnx, mny, mnz = material_map.shape
    grid = SimulationGrid(mnx + 2 * p, mny + 2 * p, mnz + 2 * p,
                          material_map.cell_size, cfl=cfl, cpml=cpml,
                          dtype=dtype, memory_cap_gib=memory_cap_gib)

    eps = np.ones(grid.shape)
    sig = np.zeros(grid.shape)
    eps[p:p + mnx, p:p + mny, p:p + mnz] = material_map.eps_r
    sig[p:p + mnx, p:p + mny, p:p + mnz] = material_map.sigma
    pec = []
    for mask, shape in ((material_map.pec_ex, grid.Ex.shape),
                        (material_map.pec_ey, grid.Ey.shape),
                        (material_map.pec_ez, grid.Ez.shape)):
        full = np.zeros(shape, dtype=bool)
        mx, my, mz = mask.shape
        full[p:p + mx, p:p + my, p:p + mz] = mask
        pec.append(full)
    grid.set_materials(eps, sig, *pec)

    i, j, k = material_map.port_edge
    port = LumpedElement((i + p, j + p, k + p),
                         material_map.port_impedance)
    grid.add_lumped(port)
    grid.port = port
    grid.port_monitor_k = material_map.port_monitor_k + p
    if material_map.load_edge is not None:
        li, lj, lk = material_map.load_edge
        grid.add_lumped(LumpedElement(
            (li + p, lj + p, lk + p), material_map.port_impedance))
    grid.origin_cells = (p, p, p)
    return grid


class SnapshotWriter:
    """Observer that appends raw little-endian float32 Ez snapshots.

    File format: 4-byte magic b'PSIM', three little-endian int32 array
    dims, then one full Ez array per recorded step.
    """

    def __init__(self, path, interval: int):
        if interval < 1:
            raise ValueError("snapshot interval must be >= 1")
        self.path = path
        self.interval = interval
        self._fh = None

    def __call__(self, grid: SimulationGrid):
        if grid.n % self.interval != 0:
            return
        if self._fh is None:
            self._fh = open(self.path, "wb")
            self._fh.write(b"PSIM")
            np.asarray(grid.Ez.shape, dtype="<i4").tofile(self._fh)
        grid.Ez.astype("<f4").tofile(self._fh)

    def close(self):
        if self._fh is not None:
            self._fh.close()
            self._fh = None

"""Near-to-far-field transformation and gain extraction.

Tangential E and H on a closed box in the air region are Fourier-
transformed on the fly during the run (surface equivalence principle);
the radiation integrals then give the far-field pattern and the gain
referenced to the accepted port power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import C0, EPS0, ETA0


class FarFieldError(ValueError):
    """Invalid equivalence-surface or pattern construction."""


@dataclass
class _Face:
    """One box face: normal axis/sign, tangential axes, geometry, and the
    complex tangential field phasors (filled in finalize)."""

    axis: int                  # normal axis 0/1/2
    sign: int                  # +1 high face, -1 low face
    t1: int                    # first tangential axis (ascending order)
    t2: int
    coord_n: float             # normal coordinate of the face plane, m
    c1: np.ndarray             # tangential cell-centre coordinates, m
    c2: np.ndarray
    e1: np.ndarray = None      # E along t1, per frequency (nf, n1, n2)
    e2: np.ndarray = None
    h1: np.ndarray = None
    h2: np.ndarray = None


class EquivalenceBox:
    """Step observer accumulating the running DFT of the tangential fields
    on a closed box ``offset_cells`` from the grid edge (default: CPML depth
    plus 4 air cells).

    E slices are taken at integer time steps, H slices half a step earlier;
    the per-step samples are buffered and folded into the frequency
    accumulators by blocked matrix products.
    """

    def __init__(self, grid, frequencies, offset_cells: int | None = None,
                 block: int = 32):
        self.frequencies = np.asarray(frequencies, dtype=np.float64)
        if self.frequencies.ndim != 1 or len(self.frequencies) == 0:
            raise FarFieldError("frequency list must be non-empty")
        off = offset_cells if offset_cells is not None else grid.cpml.depth + 4
        if off <= grid.cpml.depth:
            raise FarFieldError("equivalence box must lie outside the CPML")
        lo = (off, off, off)
        hi = (grid.nx - off, grid.ny - off, grid.nz - off)
        if min(h - l for l, h in zip(lo, hi)) < 2:
            raise FarFieldError("grid too small for the equivalence box")
        self.grid = grid
        self.lo, self.hi = lo, hi
        self._check_in_air(grid)
        self._build_slices(grid)
        nf = len(self.frequencies)
        self._acc_e = np.zeros((nf, self._len_e), dtype=np.complex128)
        self._acc_h = np.zeros((nf, self._len_h), dtype=np.complex128)
        self._block = block
        self._buf_e = np.empty((block, self._len_e))
        self._buf_h = np.empty((block, self._len_h))
        self._steps = np.empty(block, dtype=np.int64)
        self._fill = 0
        self._finalized = False

    # -- construction ---------------------------------------------------
    def _check_in_air(self, grid):
        # only the box surface (one cell to either side of each face plane)
        # must be vacuum; the interior may contain the scene
        vac_cb = grid.dt / EPS0
        for name, cb in (("x", grid.cbex), ("y", grid.cbey), ("z", grid.cbez)):
            for axis in range(3):
                for plane in (self.lo[axis], self.hi[axis]):
                    idx = [slice(l, h + 1) for l, h in zip(self.lo, self.hi)]
                    idx[axis] = slice(plane - 1, plane + 1)
                    if not np.allclose(cb[tuple(idx)], vac_cb, rtol=1e-6):
                        raise FarFieldError(
                            "equivalence box intersects non-air cells "
                            f"(E{name} coefficients)")

    def _build_slices(self, grid):
        (i0, j0, k0), (i1, j1, k1) = self.lo, self.hi
        d = (grid.dx, grid.dy, grid.dz)
        n_mid = (grid.nx / 2.0, grid.ny / 2.0, grid.nz / 2.0)
        bounds = ((i0, i1), (j0, j1), (k0, k1))
        ecomp = (grid.Ex, grid.Ey, grid.Ez)
        hcomp = (grid.Hx, grid.Hy, grid.Hz)

        def centres(ax):
            b0, b1 = bounds[ax]
            return (np.arange(b0, b1) + 0.5 - n_mid[ax]) * d[ax]

        self.faces = []
        self._e_slices = []    # (array, index-tuple) pairs, flattened order
        self._h_slices = []
        for axis in range(3):
            t1, t2 = [a for a in range(3) if a != axis]
            for sign, plane in ((-1, bounds[axis][0]), (1, bounds[axis][1])):
                face = _Face(
                    axis=axis, sign=sign, t1=t1, t2=t2,
                    coord_n=(plane - n_mid[axis]) * d[axis],
                    c1=centres(t1), c2=centres(t2))
                # tangential E on the face plane: for the component along
                # t1, the slice spans cells along t1 and nodes along t2
                # (averaged to cell centres in finalize); vice versa for t2.
                def esl(comp_axis):
                    arr = ecomp[comp_axis]
                    idx = [None, None, None]
                    idx[axis] = slice(plane, plane + 1)
                    for a in (t1, t2):
                        b0, b1 = bounds[a]
                        idx[a] = slice(b0, b1) if a == comp_axis \
                            else slice(b0, b1 + 1)
                    return arr, tuple(idx)

                # tangential H: two slabs straddling the face plane along
                # the normal; spans nodes along its own axis, cells along
                # the other tangential axis.
                def hsl(comp_axis):
                    arr = hcomp[comp_axis]
                    idx = [None, None, None]
                    idx[axis] = slice(plane - 1, plane + 1)
                    for a in (t1, t2):
                        b0, b1 = bounds[a]
                        idx[a] = slice(b0, b1 + 1) if a == comp_axis \
                            else slice(b0, b1)
                    return arr, tuple(idx)

                face._esl = (esl(t1), esl(t2))
                face._hsl = (hsl(t1), hsl(t2))
                self.faces.append(face)
                self._e_slices.extend(face._esl)
                self._h_slices.extend(face._hsl)

        self._len_e = sum(a[idx].size for a, idx in self._e_slices)
        self._len_h = sum(a[idx].size for a, idx in self._h_slices)

    # -- per-step accumulation ------------------------------------------
    def __call__(self, grid):
        fe = self._buf_e[self._fill]
        fh = self._buf_h[self._fill]
        pos = 0
        for arr, idx in self._e_slices:
            v = arr[idx].ravel()
            fe[pos:pos + v.size] = v
            pos += v.size
        pos = 0
        for arr, idx in self._h_slices:
            v = arr[idx].ravel()
            fh[pos:pos + v.size] = v
            pos += v.size
        self._steps[self._fill] = grid.n
        self._fill += 1
        if self._fill == self._block:
            self._flush()

    def _flush(self):
        if self._fill == 0:
            return
        n = self._steps[:self._fill].astype(np.float64)
        dt = self.grid.dt
        w = 2.0 * math.pi * self.frequencies[:, None]
        # observer runs after step(): E at n*dt, H at (n - 1/2)*dt
        ph_e = np.exp(-1j * w * (n[None, :] * dt))
        ph_h = np.exp(-1j * w * ((n[None, :] - 0.5) * dt))
        self._acc_e += ph_e @ self._buf_e[:self._fill]
        self._acc_h += ph_h @ self._buf_h[:self._fill]
        self._fill = 0

    # -- extraction ------------------------------------------------------
    def finalize(self):
        """Average the accumulated phasors to face cell centres; idempotent."""
        if self._finalized:
            return
        self._flush()
        nf = len(self.frequencies)

        def unpack(acc, slices):
            out = []
            pos = 0
            for arr, idx in slices:
                shp = arr[idx].shape
                size = int(np.prod(shp))
                out.append(acc[:, pos:pos + size].reshape((nf,) + shp))
                pos += size
            return out

        eparts = unpack(self._acc_e, self._e_slices)
        hparts = unpack(self._acc_h, self._h_slices)
        pe = ph = 0
        for face in self.faces:
            ax, t1, t2 = face.axis, face.t1, face.t2

            def to_centres(block, comp_axis, is_h):
                # drop the normal axis (slab of 1 for E, mean of 2 for H)
                b = block.mean(axis=1 + ax) if is_h else np.take(block, 0, 1 + ax)
                # average node-sampled tangential axis to cell centres
                node_ax = t2 if comp_axis == t1 else t1
                if is_h:
                    node_ax = comp_axis
                rel = 1 + (0 if node_ax == min(t1, t2) else 1)
                sl0 = [slice(None)] * 3
                sl1 = [slice(None)] * 3
                sl0[rel] = slice(0, -1)
                sl1[rel] = slice(1, None)
                return 0.5 * (b[tuple(sl0)] + b[tuple(sl1)])

            face.e1 = to_centres(eparts[pe], t1, False)
            face.e2 = to_centres(eparts[pe + 1], t2, False)
            face.h1 = to_centres(hparts[ph], t1, True)
            face.h2 = to_centres(hparts[ph + 1], t2, True)
            pe += 2
            ph += 2
        self._finalized = True

    def frequency_index(self, frequency: float) -> int:
        idx = int(np.argmin(np.abs(self.frequencies - frequency)))
        if abs(self.frequencies[idx] - frequency) > 1.0:
            raise FarFieldError(
                f"frequency {frequency} Hz was not accumulated")
        return idx


@dataclass
class FarFieldPattern:
    """Radiation pattern on a regular (theta, phi) grid."""

    theta_deg: np.ndarray
    phi_deg: np.ndarray
    intensity: np.ndarray          # U(theta, phi), W/sr
    frequency: float
    accepted_power: float | None   # W; None -> gain references radiated power

    def __post_init__(self):
        if np.any(self.intensity < 0) or not np.all(np.isfinite(self.intensity)):
            raise FarFieldError("radiation intensity must be finite and >= 0")

    @property
    def radiated_power(self) -> float:
        th = np.deg2rad(self.theta_deg)
        ph = np.deg2rad(self.phi_deg)
        integrand = self.intensity * np.sin(th)[:, None]
        return float(np.trapezoid(np.trapezoid(integrand, ph, axis=1), th))

    @property
    def gain_dbi(self) -> np.ndarray:
        p_ref = self.accepted_power
        if p_ref is None:
            p_ref = self.radiated_power
        if p_ref <= 0:
            raise FarFieldError("reference power must be > 0")
        with np.errstate(divide="ignore"):
            g = 10.0 * np.log10(4.0 * math.pi * self.intensity / p_ref)
        return np.maximum(g, -100.0)


def _face_sum(face: _Face, fields, k: float, u1, u2, un):
    """Sum field * exp(jk r_hat . r') * dA over one face for every
    direction, using the separability of the phase over the regular
    face grid. ``fields`` is (m, n1, n2); returns (m, D)."""
    p1 = np.exp(1j * k * np.outer(u1, face.c1))          # (D, n1)
    p2 = np.exp(1j * k * np.outer(u2, face.c2))          # (D, n2)
    pn = np.exp(1j * k * un * face.coord_n)              # (D,)
    m, n1, n2 = fields.shape
    t = fields.reshape(m * n1, n2) @ p2.T                # (m*n1, D)
    t = t.reshape(m, n1, -1)
    out = np.einsum("da,mad->md", p1, t, optimize=True)
    return out * pn[None, :]


def to_far_field(box: EquivalenceBox, frequency: float,
                 accepted_power: float | None,
                 theta_step_deg: float = 2.0,
                 phi_step_deg: float = 2.0) -> FarFieldPattern:
    """Radiation integrals over the equivalence box at one accumulated
    frequency; gain is referenced to ``accepted_power`` (pass None to
    reference the radiated power, i.e. report directivity)."""
    box.finalize()
    fi = box.frequency_index(frequency)
    if accepted_power is not None and accepted_power <= 0:
        raise FarFieldError("accepted power must be > 0")
    k = 2.0 * math.pi * frequency / C0

    theta = np.arange(0.0, 180.0 + 0.5 * theta_step_deg, theta_step_deg)
    phi = np.arange(0.0, 360.0 + 0.5 * phi_step_deg, phi_step_deg)
    th = np.deg2rad(theta)[:, None]
    ph = np.deg2rad(phi)[None, :]
    ux = (np.sin(th) * np.cos(ph)).ravel()
    uy = (np.sin(th) * np.sin(ph)).ravel()
    uz = np.broadcast_to(np.cos(th), (len(theta), len(phi))).ravel()
    u = (ux, uy, uz)

    n_vec = np.zeros((len(ux), 3), dtype=np.complex128)   # N radiation vector
    l_vec = np.zeros_like(n_vec)
    for face in box.faces:
        ax, t1, t2 = face.axis, face.t1, face.t2
        da = (box.grid.dx * box.grid.dy * box.grid.dz) / \
            (box.grid.dx, box.grid.dy, box.grid.dz)[ax]
        # J = n x H, M = -n x E with n = sign * unit(axis). In the frame
        # (axis, t1, t2) with t1 < t2, n x (0, H1, H2) = (0, -H2, H1)
        # when the frame is right-handed; for axis == 1 the ascending
        # ordering (y, x, z) is left-handed, flipping the sign.
        parity = -1.0 if ax == 1 else 1.0
        h1 = face.h1[fi]
        h2 = face.h2[fi]
        e1 = face.e1[fi]
        e2 = face.e2[fi]
        # rows 0,1: J_t1, J_t2 = (-H2, H1); rows 2,3: M_t1, M_t2 =
        # -(n x E) = (E2, -E1)
        fields = np.stack([-h2, h1, e2, -e1]) * (face.sign * parity * da)
        s = _face_sum(face, fields, k, u[t1], u[t2], u[ax])
        n_vec[:, t1] += s[0]
        n_vec[:, t2] += s[1]
        l_vec[:, t1] += s[2]
        l_vec[:, t2] += s[3]

    ct = np.cos(np.deg2rad(np.repeat(theta, len(phi))))
    st = np.sin(np.deg2rad(np.repeat(theta, len(phi))))
    cp = np.cos(np.deg2rad(np.tile(phi, len(theta))))
    sp = np.sin(np.deg2rad(np.tile(phi, len(theta))))

    def sph(vec):
        vt = vec[:, 0] * ct * cp + vec[:, 1] * ct * sp - vec[:, 2] * st
        vp = -vec[:, 0] * sp + vec[:, 1] * cp
        return vt, vp

    n_t, n_p = sph(n_vec)
    l_t, l_p = sph(l_vec)
    pref = k ** 2 / (32.0 * math.pi ** 2 * ETA0)
    u_int = pref * (np.abs(l_p + ETA0 * n_t) ** 2
                    + np.abs(l_t - ETA0 * n_p) ** 2)
    intensity = u_int.reshape(len(theta), len(phi))
    return FarFieldPattern(theta, phi, intensity, frequency, accepted_power)


def peak_gain(pattern: FarFieldPattern) -> float:
    """Maximum gain over the sample grid, dBi."""
    return float(np.max(pattern.gain_dbi))


def write_pattern_csv(path, pattern: FarFieldPattern, meta: dict | None = None):
    """CSV columns: theta_deg, phi_deg, gain_dBi."""
    lines = [f"# {k}={v}" for k, v in (meta or {}).items()]
    lines.append("theta_deg,phi_deg,gain_dBi")
    g = pattern.gain_dbi
    for i, th in enumerate(pattern.theta_deg):
        for j, ph in enumerate(pattern.phi_deg):
            lines.append(f"{th:.1f},{ph:.1f},{g[i, j]:.4f}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")

"""Near-to-far-field transformation: dipole oracle and pattern properties."""

import math

import numpy as np
import pytest

from patchsim.farfield import (EquivalenceBox, FarFieldError, FarFieldPattern,
                               peak_gain, to_far_field, write_pattern_csv)
from patchsim.fdtd import CpmlSpec, SimulationGrid, init_grid
from patchsim.geometry import build_scene, voxelize


class TestDipoleOracle:
    """Hertzian z-dipole in vacuum: directivity 1.5 (1.761 dBi), sin^2
    theta intensity, azimuthal symmetry."""

    def test_peak_directivity(self, dipole_far_field):
        assert peak_gain(dipole_far_field) == pytest.approx(1.7609, abs=0.1)

    def test_sin_squared_shape(self, dipole_far_field):
        pat = dipole_far_field
        u = pat.intensity / pat.intensity.max()
        th = np.deg2rad(pat.theta_deg)[:, None]
        rms = math.sqrt(float(np.mean((u - np.sin(th) ** 2) ** 2)))
        assert rms < 0.02

    def test_azimuthal_symmetry(self, dipole_far_field):
        pat = dipole_far_field
        mid = pat.intensity[len(pat.theta_deg) // 2, :]
        assert np.max(np.abs(mid - mid.mean())) / mid.mean() < 0.01

    def test_radiated_power_positive(self, dipole_far_field):
        assert dipole_far_field.radiated_power > 0

    def test_directivity_normalization(self, dipole_far_field):
        """Directivity integrates to ~1 over the sphere (4 pi U / P)."""
        pat = dipole_far_field
        d_lin = 4 * math.pi * pat.intensity / pat.radiated_power
        th = np.deg2rad(pat.theta_deg)
        ph = np.deg2rad(pat.phi_deg)
        integral = np.trapezoid(
            np.trapezoid(d_lin * np.sin(th)[:, None], ph, axis=1), th)
        assert integral / (4 * math.pi) == pytest.approx(1.0, abs=0.02)


class TestPatternProperties:
    def test_gain_scales_with_accepted_power(self, dipole_far_field):
        pat = dipole_far_field
        p_rad = pat.radiated_power
        g1 = FarFieldPattern(pat.theta_deg, pat.phi_deg, pat.intensity,
                             pat.frequency, p_rad)
        g2 = FarFieldPattern(pat.theta_deg, pat.phi_deg, pat.intensity,
                             pat.frequency, 2 * p_rad)
        assert peak_gain(g1) - peak_gain(g2) == pytest.approx(
            10 * math.log10(2.0), abs=1e-9)

    def test_passivity(self, dipole_far_field):
        """Gain referenced to the full accepted power never exceeds the
        directivity (radiated <= accepted)."""
        pat = dipole_far_field
        p_rad = pat.radiated_power
        gain = FarFieldPattern(pat.theta_deg, pat.phi_deg, pat.intensity,
                               pat.frequency, 1.3 * p_rad)
        assert peak_gain(gain) < peak_gain(pat)

    def test_amplitude_invariance(self, dipole_far_field):
        """Directivity is invariant under uniform field scaling."""
        pat = dipole_far_field
        scaled = FarFieldPattern(pat.theta_deg, pat.phi_deg,
                                 25.0 * pat.intensity, pat.frequency, None)
        assert peak_gain(scaled) == pytest.approx(peak_gain(pat), abs=1e-9)

    def test_floor_clamp(self):
        pat = FarFieldPattern(np.array([0.0, 90.0, 180.0]),
                              np.array([0.0, 180.0, 360.0]),
                              np.zeros((3, 3)), 6e9, 1.0)
        assert np.all(pat.gain_dbi == -100.0)

    def test_csv(self, tmp_path, dipole_far_field):
        path = tmp_path / "pattern.csv"
        write_pattern_csv(path, dipole_far_field, {"config_sha256": "x"})
        lines = path.read_text().splitlines()
        assert lines[0] == "# config_sha256=x"
        assert lines[1] == "theta_deg,phi_deg,gain_dBi"
        n_expected = (len(dipole_far_field.theta_deg)
                      * len(dipole_far_field.phi_deg))
        assert len(lines) == 2 + n_expected


class TestEquivalenceBox:
    def test_box_must_clear_cpml(self):
        grid = SimulationGrid(40, 40, 40, 0.5, cpml=CpmlSpec(depth=10))
        with pytest.raises(FarFieldError, match="CPML"):
            EquivalenceBox(grid, [6e9], offset_cells=9)

    def test_box_must_be_in_air(self):
        mat = voxelize(build_scene(), 0.4)
        grid = init_grid(mat, air_margin_cells=4, cpml=CpmlSpec(depth=8))
        # offset 13 puts the box surface through the substrate stack
        with pytest.raises(FarFieldError, match="non-air"):
            EquivalenceBox(grid, [6e9], offset_cells=13)

    def test_empty_frequency_list(self):
        grid = SimulationGrid(40, 40, 40, 0.5, cpml=CpmlSpec(depth=10))
        with pytest.raises(FarFieldError):
            EquivalenceBox(grid, [])

    def test_frequency_index_tolerance(self):
        grid = SimulationGrid(40, 40, 40, 0.5, cpml=CpmlSpec(depth=10))
        box = EquivalenceBox(grid, [6e9], offset_cells=14)
        assert box.frequency_index(6e9) == 0
        with pytest.raises(FarFieldError):
            box.frequency_index(7e9)

    def test_nonpositive_accepted_power(self):
        grid = SimulationGrid(40, 40, 40, 0.5, cpml=CpmlSpec(depth=10))
        box = EquivalenceBox(grid, [6e9], offset_cells=14)
        with pytest.raises(FarFieldError):
            to_far_field(box, 6e9, accepted_power=0.0)

"""Closed-form patch sizing: frozen oracle values and formula properties."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from patchsim.design import (DesignError, DesignSpec, design,
                             effective_permittivity, length_extension,
                             patch_length, patch_width)

SPEC = DesignSpec(center_frequency=6.0e9, relative_permittivity=4.4,
                  substrate_height=1.55)


class TestFrozenOracles:
    """Values computed independently (high-precision arithmetic), frozen."""

    def test_radiating_width(self):
        # c/(2 f) sqrt(2/(eps_r+1)) at 6 GHz, eps_r 4.4
        assert patch_width(SPEC) == pytest.approx(15.2044, abs=2e-3)

    def test_effective_permittivity(self):
        assert effective_permittivity(4.4, 1.55, 11.6) == pytest.approx(
            3.7536, abs=1e-3)

    def test_length_extension(self):
        e_eff = effective_permittivity(4.4, 1.55, 11.6)
        assert length_extension(e_eff, 11.6, 1.55) == pytest.approx(
            0.6926, abs=1e-3)

    def test_length_chain(self):
        e_eff = effective_permittivity(4.4, 1.55, 11.6)
        d_l = length_extension(e_eff, 11.6, 1.55)
        length = patch_length(6.0e9, e_eff, d_l)
        assert 11.45 <= length <= 11.65

    def test_square_patch_fixed_point(self):
        res = design(SPEC, square_patch=True)
        assert res.patch_length == pytest.approx(res.patch_width, abs=1e-8)
        assert res.patch_length == pytest.approx(11.51, abs=0.02)


class TestErrors:
    def test_nonpositive_frequency(self):
        with pytest.raises(DesignError):
            DesignSpec(center_frequency=0, relative_permittivity=4.4,
                       substrate_height=1.55)

    def test_permittivity_below_one(self):
        with pytest.raises(DesignError):
            effective_permittivity(0.5, 1.55, 11.6)

    def test_nonphysical_length(self):
        # enormous fringing extension swallows the whole half wavelength
        with pytest.raises(DesignError):
            patch_length(6.0e9, 3.75, 1000.0)


@settings(deadline=None, max_examples=60)
@given(eps_r=st.floats(1.0, 12.0), h=st.floats(0.1, 5.0),
       w=st.floats(0.5, 100.0))
def test_effective_permittivity_bounds(eps_r, h, w):
    """eps_eff lies between 1 and eps_r (air/dielectric mix)."""
    e = effective_permittivity(eps_r, h, w)
    assert 1.0 - 1e-12 <= e <= eps_r + 1e-12


@settings(deadline=None, max_examples=60)
@given(eps_r=st.floats(1.5, 12.0), h=st.floats(0.2, 3.0))
def test_effective_permittivity_monotone_in_width(eps_r, h):
    """Wider strip concentrates the field in the dielectric."""
    widths = [0.5, 2.0, 8.0, 32.0]
    vals = [effective_permittivity(eps_r, h, w) for w in widths]
    assert all(a < b for a, b in zip(vals, vals[1:]))


@settings(deadline=None, max_examples=60)
@given(f=st.floats(1e9, 30e9), eps_r=st.floats(2.0, 10.0),
       h=st.floats(0.2, 2.0))
def test_design_chain_sanity(f, eps_r, h):
    """Full chain yields positive dimensions scaling like 1/f."""
    spec = DesignSpec(center_frequency=f, relative_permittivity=eps_r,
                      substrate_height=h)
    try:
        res = design(spec)
    except DesignError:
        return  # nonphysical corner (extension exceeds half wavelength)
    assert res.patch_width > 0 and res.patch_length > 0
    # shorter than the unshortened half guided wavelength
    half_guided_mm = 299792458.0 / (2 * f * math.sqrt(
        res.effective_permittivity)) / 1e-3
    assert res.patch_length < half_guided_mm


def test_zero_extension_gives_longer_patch():
    full = design(SPEC)
    no_ext = design(SPEC, zero_length_extension=True)
    assert no_ext.patch_length > full.patch_length
    assert no_ext.length_extension == 0.0

"""Closed-form transmission-line sizing of a rectangular microstrip patch.

All public values are in millimetres (and Hz for frequencies); lengths are
converted to metres only inside the formulas to keep the unit discipline in
one place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import C0, MM


class DesignError(ValueError):
    """Raised for nonphysical design inputs or non-converging iterations."""


@dataclass(frozen=True)
class DesignSpec:
    """Target operating point: centre frequency, substrate permittivity, height."""

    center_frequency: float        # Hz
    relative_permittivity: float   # dimensionless
    substrate_height: float        # mm

    def __post_init__(self):
        if self.center_frequency <= 0:
            raise DesignError("center_frequency must be > 0")
        if self.relative_permittivity < 1:
            raise DesignError("relative_permittivity must be >= 1")
        if self.substrate_height <= 0:
            raise DesignError("substrate_height must be > 0")


@dataclass(frozen=True)
class DesignResult:
    """Patch dimensions and intermediate quantities, lengths in mm."""

    patch_width: float             # W, mm
    effective_permittivity: float  # dimensionless
    length_extension: float        # ΔL, mm
    patch_length: float            # L, mm


def patch_width(spec: DesignSpec) -> float:
    """Radiating-edge width W in mm for an efficient radiator at spec frequency."""
    if spec.relative_permittivity + 1 <= 0:
        raise DesignError("relative_permittivity + 1 must be positive")
    w_m = (C0 / (2.0 * spec.center_frequency)) * math.sqrt(
        2.0 / (spec.relative_permittivity + 1.0)
    )
    return w_m / MM


def effective_permittivity(eps_r: float, h: float, w: float) -> float:
    """Quasi-TEM effective permittivity of a microstrip of width w over height h.

    h and w in mm (only their ratio matters).
    """
    if w <= 0:
        raise DesignError("patch width must be > 0")
    if h <= 0:
        raise DesignError("substrate height must be > 0")
    if eps_r < 1:
        raise DesignError("relative_permittivity must be >= 1")
    return (eps_r + 1.0) / 2.0 + (eps_r - 1.0) / 2.0 / math.sqrt(1.0 + 12.0 * h / w)


def length_extension(eps_eff: float, w: float, h: float) -> float:
    """Fringing-field length extension ΔL in mm (w, h in mm)."""
    if eps_eff <= 0.258:
        raise DesignError("effective permittivity must exceed 0.258")
    if w <= 0 or h <= 0:
        raise DesignError("w and h must be > 0")
    ratio = w / h
    return 0.412 * h * (eps_eff + 0.3) * (ratio + 0.264) / (
        (eps_eff - 0.258) * (ratio + 0.8)
    )


def patch_length(f_r: float, eps_eff: float, delta_l: float) -> float:
    """Resonant patch length L in mm from the half-guided-wavelength condition.

    f_r in Hz, delta_l in mm.
    """
    if f_r <= 0 or eps_eff <= 0 or delta_l < 0:
        raise DesignError("inputs must be positive (delta_l >= 0)")
    l_m = C0 / (2.0 * f_r * math.sqrt(eps_eff)) - 2.0 * delta_l * MM
    if l_m <= 0:
        raise DesignError("nonphysical design: patch length <= 0")
    return l_m / MM


def design(
    spec: DesignSpec,
    square_patch: bool = False,
    zero_length_extension: bool = False,
    max_iterations: int = 100,
    tolerance: float = 1e-9,
) -> DesignResult:
    """Chain the four sizing formulas into a complete patch design.

    With ``square_patch=True`` the width is overridden to equal the length;
    since the effective permittivity depends on the width, the constraint is
    solved by fixed-point iteration (tolerance in mm).
    """
    w = patch_width(spec)
    eps_r = spec.relative_permittivity
    h = spec.substrate_height

    def chain(width: float) -> tuple[float, float, float]:
        e_eff = effective_permittivity(eps_r, h, width)
        d_l = 0.0 if zero_length_extension else length_extension(e_eff, width, h)
        return e_eff, d_l, patch_length(spec.center_frequency, e_eff, d_l)

    eps_eff, d_l, length = chain(w)
    if square_patch:
        for _ in range(max_iterations):
            prev = length
            w = length
            eps_eff, d_l, length = chain(w)
            if abs(length - prev) < tolerance:
                break
        else:
            raise DesignError(
                f"square-patch fixed point did not converge in {max_iterations} "
                f"iterations (tolerance {tolerance} mm)"
            )
        w = length
    return DesignResult(
        patch_width=w,
        effective_permittivity=eps_eff,
        length_extension=d_l,
        patch_length=length,
    )

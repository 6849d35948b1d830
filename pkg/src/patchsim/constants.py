"""Physical constants (SI units)."""

C0 = 2.99792458e8           # speed of light in vacuum, m/s
MU0 = 1.25663706212e-6      # vacuum permeability, H/m
EPS0 = 1.0 / (MU0 * C0 * C0)  # vacuum permittivity, F/m
ETA0 = MU0 * C0             # free-space wave impedance, ohm

MM = 1e-3                   # millimetre in metres
GHZ = 1e9                   # gigahertz in Hz

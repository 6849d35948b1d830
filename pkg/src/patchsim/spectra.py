"""Frequency-domain post-processing of port records.

Reflection coefficient via the two-run method (a matched-load calibration
run supplies the incident waveform), S11 / VSWR curves, resonance
detection and -10 dB bandwidth extraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fdtd import PortRecord

S11_FLOOR_DB = -100.0          # display/CSV clamp
INCIDENT_GUARD = 1e-9          # of the incident spectrum peak


class SpectrumError(ValueError):
    """Invalid inputs to the spectral post-processing."""


def default_frequency_grid(f_min: float = 4.0e9, f_max: float = 10.0e9,
                           spacing: float = 5.0e6) -> np.ndarray:
    """Uniform frequency axis, default 4-10 GHz at 5 MHz spacing."""
    n = int(round((f_max - f_min) / spacing))
    return f_min + spacing * np.arange(n + 1)


def _dft(samples: np.ndarray, times: np.ndarray,
         frequencies: np.ndarray) -> np.ndarray:
    """Direct-summation DFT at arbitrary frequencies (fixed sum order)."""
    out = np.empty(len(frequencies), dtype=np.complex128)
    x = np.asarray(samples, dtype=np.float64)
    for idx, f in enumerate(frequencies):
        ph = np.exp(-2j * math.pi * f * times)
        out[idx] = np.dot(ph, x)
    return out


def port_phasors(record: PortRecord, frequencies) -> tuple[np.ndarray, np.ndarray]:
    """Voltage and current phasors at the port.

    Voltage samples sit at integer steps (n+1)dt, current samples half a
    step earlier; each is transformed on its own time axis so the pair is
    phase-consistent.
    """
    f = np.asarray(frequencies, dtype=np.float64)
    n = np.arange(len(record))
    t_v = (n + 1.0) * record.time_step
    t_i = (n + 0.5) * record.time_step
    return _dft(record.voltage, t_v, f), _dft(record.current, t_i, f)


def accepted_power(record: PortRecord, frequencies) -> np.ndarray:
    """Net power delivered through the port per unit DFT bandwidth,
    0.5 Re(V conj(I)); positive when the scene absorbs/radiates."""
    v, i = port_phasors(record, frequencies)
    return 0.5 * np.real(v * np.conj(i))


@dataclass
class Spectrum:
    """Complex reflection coefficient on an explicit frequency axis."""

    frequency: np.ndarray          # Hz
    gamma: np.ndarray              # complex reflection coefficient
    valid: np.ndarray              # False where the incident spectrum vanishes

    def __post_init__(self):
        self.frequency = np.asarray(self.frequency, dtype=np.float64)
        self.gamma = np.asarray(self.gamma, dtype=np.complex128)
        self.valid = np.asarray(self.valid, dtype=bool)
        if not (len(self.frequency) == len(self.gamma) == len(self.valid)):
            raise SpectrumError("spectrum arrays must have equal length")
        if not np.all(np.isfinite(self.gamma[self.valid])):
            raise SpectrumError("non-finite reflection coefficient")

    @property
    def s11_db(self) -> np.ndarray:
        mag = np.abs(self.gamma)
        with np.errstate(divide="ignore"):
            db = 20.0 * np.log10(mag)
        return np.maximum(db, S11_FLOOR_DB)

    @property
    def vswr(self) -> np.ndarray:
        return vswr(np.abs(self.gamma))


def reflection_spectrum(total: PortRecord, incident: PortRecord,
                        frequencies) -> Spectrum:
    """Two-run reflection coefficient Gamma(f) = DFT(total - incident) /
    DFT(incident), evaluated by direct summation at each requested
    frequency."""
    if abs(total.time_step - incident.time_step) > 1e-18:
        raise SpectrumError("total and incident records use different time steps")
    f = np.asarray(frequencies, dtype=np.float64)
    n = min(len(total), len(incident))
    t = (np.arange(n) + 1.0) * total.time_step
    v_inc = _dft(incident.voltage[:n], t, f)
    v_ref = _dft(total.voltage[:n] - incident.voltage[:n], t, f)
    guard = INCIDENT_GUARD * np.max(np.abs(v_inc))
    valid = np.abs(v_inc) > guard
    gamma = np.zeros(len(f), dtype=np.complex128)
    gamma[valid] = v_ref[valid] / v_inc[valid]
    return Spectrum(f, gamma, valid)


def vswr(gamma_mag):
    """Voltage standing-wave ratio (1+|G|)/(1-|G|); +inf where |G| >= 1."""
    g = np.asarray(gamma_mag, dtype=np.float64)
    if np.any(g < 0):
        raise SpectrumError("reflection magnitude must be >= 0")
    with np.errstate(divide="ignore"):
        out = np.where(g >= 1.0, np.inf, (1.0 + g) / (1.0 - np.minimum(g, 1.0 - 1e-300)))
    if np.isscalar(gamma_mag):
        return float(out)
    return out


def vswr_from_s11_db(s11_db: float) -> float:
    return vswr(10.0 ** (s11_db / 20.0))


@dataclass
class BandReport:
    """One resonance: minimum location, depth, and -10 dB span."""

    resonant_frequency: float      # Hz
    s11_min_db: float
    vswr: float
    f_low: float                   # Hz, threshold crossings
    f_high: float
    gain_dbi: float | None = None

    @property
    def bandwidth(self) -> float:
        return self.f_high - self.f_low


def _median3(x: np.ndarray) -> np.ndarray:
    out = x.copy()
    if len(x) >= 3:
        out[1:-1] = np.median(np.stack([x[:-2], x[1:-1], x[2:]]), axis=0)
    return out


def _crossing(f, s, i0, i1, threshold):
    """Linear interpolation of the frequency where s crosses threshold
    between samples i0 and i1."""
    s0, s1 = s[i0], s[i1]
    if s1 == s0:
        return f[i1]
    w = (threshold - s0) / (s1 - s0)
    return f[i0] + w * (f[i1] - f[i0])


def find_bands(spectrum: Spectrum, threshold_db: float = -10.0) -> list[BandReport]:
    """Resonances: local minima of S11 below threshold (after 3-point
    median smoothing to suppress DFT ripple), each with its contiguous
    below-threshold span; overlapping spans merged at the deeper minimum."""
    f = spectrum.frequency
    s = spectrum.s11_db
    ok = spectrum.valid
    if len(f) < 3:
        return []
    sm = _median3(s)
    bands: list[BandReport] = []
    for i in range(1, len(f) - 1):
        if not (ok[i] and sm[i] < threshold_db and s[i] < threshold_db):
            continue
        if not (sm[i] <= sm[i - 1] and sm[i] < sm[i + 1]):
            continue
        lo = i
        while lo > 0 and s[lo - 1] <= threshold_db and ok[lo - 1]:
            lo -= 1
        hi = i
        while hi < len(f) - 1 and s[hi + 1] <= threshold_db and ok[hi + 1]:
            hi += 1
        # refine the true minimum on the raw curve within the span
        i_min = lo + int(np.argmin(s[lo:hi + 1]))
        f_low = _crossing(f, s, lo, lo - 1, threshold_db) if lo > 0 else f[0]
        f_high = _crossing(f, s, hi, hi + 1, threshold_db) if hi < len(f) - 1 else f[-1]
        bands.append(BandReport(
            resonant_frequency=float(f[i_min]),
            s11_min_db=float(s[i_min]),
            vswr=float(vswr(abs(spectrum.gamma[i_min]))),
            f_low=float(f_low), f_high=float(f_high)))
    # merge bands sharing a span, keep the deeper minimum
    bands.sort(key=lambda b: b.resonant_frequency)
    merged: list[BandReport] = []
    for b in bands:
        if merged and b.f_low < merged[-1].f_high - 1e-6:
            prev = merged[-1]
            keep = b if b.s11_min_db < prev.s11_min_db else prev
            merged[-1] = BandReport(
                resonant_frequency=keep.resonant_frequency,
                s11_min_db=keep.s11_min_db, vswr=keep.vswr,
                f_low=min(prev.f_low, b.f_low),
                f_high=max(prev.f_high, b.f_high),
                gain_dbi=keep.gain_dbi)
        else:
            merged.append(b)
    return merged


def write_spectrum_csv(path, spectrum: Spectrum, meta: dict | None = None):
    """CSV columns: frequency_Hz, S11_dB, VSWR, valid_flag. ``meta`` pairs
    are embedded as leading '# key=value' comment lines."""
    lines = [f"# {k}={v}" for k, v in (meta or {}).items()]
    lines.append("frequency_Hz,S11_dB,VSWR,valid_flag")
    vs = spectrum.vswr
    s11 = spectrum.s11_db
    for i, f in enumerate(spectrum.frequency):
        v = "inf" if np.isinf(vs[i]) else f"{vs[i]:.6f}"
        lines.append(f"{f:.0f},{s11[i]:.6f},{v},{int(spectrum.valid[i])}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_band_summary_csv(path, bands_by_state: dict, meta: dict | None = None):
    """Band summary CSV: one row per detected resonance per switch state."""
    lines = [f"# {k}={v}" for k, v in (meta or {}).items()]
    lines.append("switch_state,resonant_frequency_Hz,S11_dB,VSWR,"
                 "gain_dBi,bandwidth_Hz")
    for state, bands in bands_by_state.items():
        for b in bands:
            g = "" if b.gain_dbi is None else f"{b.gain_dbi:.3f}"
            lines.append(
                f"{state},{b.resonant_frequency:.0f},{b.s11_min_db:.3f},"
                f"{b.vswr:.3f},{g},{b.bandwidth:.0f}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")

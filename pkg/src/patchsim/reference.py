"""Published reference performance data and the simulated-vs-published
comparison report.

Reference numbers live in ``data/reference_bands.csv`` (with per-value table
citations), not in code.
"""

from __future__ import annotations

import csv
import importlib.resources
from dataclasses import dataclass, field

from .spectra import BandReport


@dataclass(frozen=True)
class ReferenceBand:
    """One published band: headline numbers plus their table citation."""

    switch_state: str              # "OFF" / "ON"
    frequency: float               # Hz
    s11_db: float
    vswr: float
    gain_dbi: float
    bandwidth: float               # Hz
    citation: str
    note: str = ""


def load_reference() -> list[ReferenceBand]:
    """Reference bands from the packaged data file."""
    res = importlib.resources.files("patchsim.data") / "reference_bands.csv"
    rows = []
    with res.open("r", encoding="utf-8") as fh:
        reader = csv.DictReader(line for line in fh
                                if not line.startswith("#"))
        for r in reader:
            rows.append(ReferenceBand(
                switch_state=r["switch_state"].strip(),
                frequency=float(r["frequency_GHz"]) * 1e9,
                s11_db=float(r["S11_dB"]),
                vswr=float(r["VSWR"]),
                gain_dbi=float(r["gain_dBi"]),
                bandwidth=float(r["bandwidth_MHz"]) * 1e6,
                citation=r["citation"].strip(),
                note=(r.get("note") or "").strip()))
    return rows


@dataclass
class ComparisonRow:
    """One reference band paired with its nearest simulated band (if any)."""

    switch_state: str
    reference: ReferenceBand
    simulated: BandReport | None   # None when the state produced no match

    def deltas(self) -> dict:
        """Absolute and relative differences, simulated minus reference."""
        if self.simulated is None:
            return {}
        s, r = self.simulated, self.reference
        out = {}
        pairs = [("frequency", s.resonant_frequency, r.frequency),
                 ("S11_dB", s.s11_min_db, r.s11_db),
                 ("VSWR", s.vswr, r.vswr),
                 ("bandwidth", s.bandwidth, r.bandwidth)]
        if s.gain_dbi is not None:
            pairs.append(("gain_dBi", s.gain_dbi, r.gain_dbi))
        for name, sim, ref in pairs:
            out[name] = (sim - ref, (sim - ref) / abs(ref) if ref else float("inf"))
        return out


@dataclass
class ComparisonReport:
    """All reference bands with matches, plus extra simulated bands the
    reference does not list and any warnings (e.g. a state with no band)."""

    rows: list[ComparisonRow]
    unmatched_simulated: dict = field(default_factory=dict)  # state -> bands
    warnings: list[str] = field(default_factory=list)


def compare_to_reference(bands_by_state: dict,
                     reference: list[ReferenceBand] | None = None,
                     ) -> ComparisonReport:
    """Match each published band to the nearest simulated band of the same
    switch state (each simulated band used at most once). States without
    any band below threshold produce a warning, not an error."""
    reference = load_reference() if reference is None else reference
    rows: list[ComparisonRow] = []
    used: dict[str, set] = {}
    warnings: list[str] = []
    for state, bands in bands_by_state.items():
        if not bands:
            warnings.append(f"switch {state}: no band below threshold")
    for ref in reference:
        if ref.switch_state not in bands_by_state:
            continue    # state not requested in this run
        cands = bands_by_state[ref.switch_state]
        taken = used.setdefault(ref.switch_state, set())
        best, best_i = None, None
        for i, b in enumerate(cands):
            if i in taken:
                continue
            if best is None or (abs(b.resonant_frequency - ref.frequency)
                                < abs(best.resonant_frequency - ref.frequency)):
                best, best_i = b, i
        if best_i is not None:
            taken.add(best_i)
        rows.append(ComparisonRow(ref.switch_state, ref, best))
    unmatched = {}
    for state, bands in bands_by_state.items():
        extra = [b for i, b in enumerate(bands)
                 if i not in used.get(state, set())]
        if extra:
            unmatched[state] = extra
    return ComparisonReport(rows, unmatched, warnings)


def _num(x, fmt="{:.3f}"):
    return "" if x is None else fmt.format(x)


def write_comparison_csv(path, report: ComparisonReport,
                         meta: dict | None = None):
    """Comparison CSV: one row per published band, simulated values and
    absolute/relative deltas alongside, citation in every row."""
    lines = [f"# {k}={v}" for k, v in (meta or {}).items()]
    lines.append(
        "switch_state,ref_frequency_Hz,ref_S11_dB,ref_VSWR,ref_gain_dBi,"
        "ref_bandwidth_Hz,citation,sim_frequency_Hz,sim_S11_dB,sim_VSWR,"
        "sim_gain_dBi,sim_bandwidth_Hz,delta_frequency_Hz,"
        "rel_delta_frequency,delta_S11_dB,delta_VSWR,delta_gain_dBi,"
        "delta_bandwidth_Hz")
    for row in report.rows:
        r = row.reference
        base = (f"{r.switch_state},{r.frequency:.0f},{r.s11_db:.2f},"
                f"{r.vswr:.3f},{r.gain_dbi:.3f},{r.bandwidth:.0f},"
                f"\"{r.citation}\"")
        s = row.simulated
        if s is None:
            lines.append(base + ",no band,,,,,,,,,,")
            continue
        d = row.deltas()
        g = d.get("gain_dBi")
        lines.append(
            base + f",{s.resonant_frequency:.0f},{s.s11_min_db:.3f},"
            f"{s.vswr:.3f},{_num(s.gain_dbi)},{s.bandwidth:.0f},"
            f"{d['frequency'][0]:.0f},{d['frequency'][1]:.4f},"
            f"{d['S11_dB'][0]:.3f},{d['VSWR'][0]:.3f},"
            f"{_num(g[0] if g else None)},{d['bandwidth'][0]:.0f}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def render_comparison_text(report: ComparisonReport) -> str:
    """Human-readable comparison report."""
    out = ["Simulated vs published band comparison", "=" * 44]
    for w in report.warnings:
        out.append(f"WARNING: {w}")
    for row in report.rows:
        r = row.reference
        out.append("")
        out.append(f"[{r.switch_state}] published {r.frequency / 1e9:.2f} GHz "
                   f"({r.citation})")
        out.append(f"  published: S11 {r.s11_db:.2f} dB, VSWR {r.vswr:.3f}, "
                   f"gain {r.gain_dbi:.3f} dBi, "
                   f"BW {r.bandwidth / 1e6:.0f} MHz")
        if r.note:
            out.append(f"  note: {r.note}")
        s = row.simulated
        if s is None:
            out.append("  simulated: no matching band below threshold")
            continue
        g = "" if s.gain_dbi is None else f", gain {s.gain_dbi:.3f} dBi"
        out.append(f"  simulated: {s.resonant_frequency / 1e9:.3f} GHz, "
                   f"S11 {s.s11_min_db:.2f} dB, VSWR {s.vswr:.3f}{g}, "
                   f"BW {s.bandwidth / 1e6:.0f} MHz")
        d = row.deltas()
        out.append(f"  delta: f {d['frequency'][0] / 1e9:+.3f} GHz "
                   f"({100 * d['frequency'][1]:+.1f}%), "
                   f"S11 {d['S11_dB'][0]:+.2f} dB, "
                   f"BW {d['bandwidth'][0] / 1e6:+.0f} MHz")
    for state, bands in report.unmatched_simulated.items():
        out.append("")
        out.append(f"[{state}] additional simulated bands with no published "
                   f"counterpart:")
        for b in bands:
            out.append(f"  {b.resonant_frequency / 1e9:.3f} GHz, "
                       f"S11 {b.s11_min_db:.2f} dB, "
                       f"BW {b.bandwidth / 1e6:.0f} MHz")
    return "\n".join(out) + "\n"

"""Command-line pipeline: exit codes, artifact manifest, determinism,
and the simulated-vs-published comparison logic."""

import numpy as np
import pytest

from patchsim import cli
from patchsim.reference import (ReferenceBand, compare_to_reference,
                                load_reference, write_comparison_csv)
from patchsim.spectra import BandReport

# Coarse, fast configuration: one switch state, short run, small sweep.
FAST_CONFIG = """\
[solver]
cell_size_mm = 0.4
max_steps = 3000
switch_states = OFF
frequency_start_ghz = 4
frequency_stop_ghz = 8
frequency_step_mhz = 50
[output]
gain_frequencies_ghz = 5.9
"""


@pytest.fixture(scope="module")
def fast_run(tmp_path_factory):
    """One coarse end-to-end CLI run shared by the manifest tests."""
    root = tmp_path_factory.mktemp("cli")
    cfg = root / "fast.cfg"
    cfg.write_text(FAST_CONFIG)
    out = root / "result"
    code = cli.main(["simulate", str(cfg), "--out", str(out)])
    return cfg, out, code


class TestPipeline:
    def test_exit_code_unconverged(self, fast_run):
        # 3000 steps is deliberately too short to converge: outputs exist, exit code 3
        _, _, code = fast_run
        assert code == cli.EXIT_UNCONVERGED

    def test_artifact_manifest(self, fast_run):
        _, out, _ = fast_run
        for name in ["resolved_config.txt", "report.txt", "comparison.csv",
                     "s11_comparison.svg", "vswr_comparison.svg",
                     "off/spectrum.csv", "off/bands.csv", "off/pattern.csv",
                     "off/s11.svg"]:
            assert (out / name).is_file(), name

    def test_config_hash_embedded_everywhere(self, fast_run):
        cfg_path, out, _ = fast_run
        from patchsim.config import parse_config
        sha = parse_config(cfg_path.read_text()).sha256
        for name in ["report.txt", "comparison.csv", "off/spectrum.csv",
                     "off/bands.csv", "off/pattern.csv", "off/s11.svg",
                     "s11_comparison.svg", "vswr_comparison.svg"]:
            text = (out / name).read_text()
            assert f"config_sha256={sha}" in text, name

    def test_resolved_config_round_trips(self, fast_run):
        cfg_path, out, _ = fast_run
        from patchsim.config import parse_config
        original = parse_config(cfg_path.read_text())
        echoed = parse_config((out / "resolved_config.txt").read_text())
        assert echoed.sha256 == original.sha256

    def test_report_flags_unconverged(self, fast_run):
        _, out, _ = fast_run
        assert "UNCONVERGED RUNS: OFF" in (out / "report.txt").read_text()

    def test_rerun_byte_identical(self, fast_run, tmp_path):
        cfg_path, out, _ = fast_run
        out2 = tmp_path / "again"
        code = cli.main(["simulate", str(cfg_path), "--out", str(out2)])
        assert code == cli.EXIT_UNCONVERGED
        for name in ["off/spectrum.csv", "off/bands.csv", "off/pattern.csv",
                     "comparison.csv", "off/s11.svg", "report.txt"]:
            assert (out / name).read_bytes() == (out2 / name).read_bytes(), \
                name


class TestExitCodes:
    def test_design_only_success(self, tmp_path, capsys):
        cfg = tmp_path / "d.cfg"
        cfg.write_text("[design]\nenabled = true\n")
        assert cli.main(["simulate", str(cfg), "--design-only"]) == cli.EXIT_OK
        text = capsys.readouterr().out
        assert "length of patch" in text
        assert "effective permittivity" in text

    def test_missing_file(self, capsys):
        assert cli.main(["simulate", "/no/such/file.cfg"]) == cli.EXIT_CONFIG
        assert "configuration error" in capsys.readouterr().err

    def test_bad_config(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("[solver]\ncell_size_mm = banana\n")
        assert cli.main(["simulate", str(cfg)]) == cli.EXIT_CONFIG
        assert "cell_size_mm" in capsys.readouterr().err

    def test_bad_cell_size_flag(self, tmp_path):
        cfg = tmp_path / "ok.cfg"
        cfg.write_text("")
        assert cli.main(["simulate", str(cfg), "--cell-size-mm", "-2",
                         "--design-only"]) == cli.EXIT_CONFIG

    def test_cell_size_flag_overrides(self, tmp_path):
        cfg = tmp_path / "ok.cfg"
        cfg.write_text("[solver]\ncell_size_mm = 0.2\n")
        from patchsim.config import parse_config
        parsed = parse_config(cfg.read_text())
        parsed.values[("solver", "cell_size_mm")] = 0.4
        # the override changes the resolved config and therefore the hash
        assert parsed.sha256 != parse_config(cfg.read_text()).sha256


class TestOutputDir:
    def test_env_root_default(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUTPUT_ROOT_ENV, str(tmp_path / "root"))
        from patchsim.config import parse_config
        cfg = parse_config("")
        d = cli._output_dir(cfg, None, tmp_path / "myrun.cfg")
        assert d == tmp_path / "root" / "myrun_out"

    def test_out_flag_wins(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUTPUT_ROOT_ENV, str(tmp_path))
        from patchsim.config import parse_config
        cfg = parse_config("[output]\ndirectory = elsewhere\n")
        assert cli._output_dir(cfg, "chosen", tmp_path / "a.cfg") \
            .name == "chosen"
        assert cli._output_dir(cfg, None, tmp_path / "a.cfg") \
            .name == "elsewhere"


class TestGainFrequencies:
    def test_auto_includes_comparison_point(self):
        from patchsim.config import parse_config
        f = cli._gain_frequencies(parse_config(""))
        assert 5.9e9 in f
        assert f[0] == 4e9 and f[-1] == 10e9
        assert np.all(np.diff(f) > 0)

    def test_explicit_list(self):
        from patchsim.config import parse_config
        cfg = parse_config("[output]\ngain_frequencies_ghz = 5.0, 5.9\n")
        assert list(cli._gain_frequencies(cfg)) == [5.0e9, 5.9e9]


def _band(f_ghz, s11=-15.0, bw=0.2e9):
    from patchsim.spectra import vswr_from_s11_db
    return BandReport(f_ghz * 1e9, s11, vswr_from_s11_db(s11),
                      f_ghz * 1e9 - bw / 2, f_ghz * 1e9 + bw / 2)


class TestReference:
    def test_load_reference(self):
        rows = load_reference()
        assert len(rows) == 4
        assert {r.switch_state for r in rows} == {"OFF", "ON"}
        assert all(r.citation for r in rows)
        off59 = next(r for r in rows
                     if r.switch_state == "OFF" and r.frequency == 5.9e9)
        assert off59.s11_db == -15.16 and off59.bandwidth == 210e6

    def test_nearest_matching(self):
        """Simulated 5.85 and 8.0 GHz pair with published 5.9 and 8.1."""
        report = compare_to_reference({"OFF": [_band(5.85), _band(8.0)]})
        by_ref = {row.reference.frequency: row for row in report.rows}
        assert by_ref[5.9e9].simulated.resonant_frequency == 5.85e9
        assert by_ref[8.1e9].simulated.resonant_frequency == 8.0e9
        assert not report.unmatched_simulated

    def test_extra_band_unmatched(self):
        report = compare_to_reference(
            {"OFF": [_band(5.85), _band(7.0), _band(8.0)]})
        extra = report.unmatched_simulated["OFF"]
        assert [b.resonant_frequency for b in extra] == [7.0e9]

    def test_empty_state_warns(self):
        report = compare_to_reference({"OFF": []})
        assert any("OFF" in w for w in report.warnings)
        assert all(row.simulated is None for row in report.rows)

    def test_unsimulated_state_skipped(self):
        report = compare_to_reference({"OFF": [_band(5.9)]})
        assert all(row.switch_state == "OFF" for row in report.rows)

    def test_deltas(self):
        ref = ReferenceBand("OFF", 5.9e9, -15.16, 1.65, 0.811, 210e6, "t")
        report = compare_to_reference({"OFF": [_band(6.0, s11=-17.0)]}, [ref])
        d = report.rows[0].deltas()
        assert d["frequency"][0] == pytest.approx(0.1e9)
        assert d["frequency"][1] == pytest.approx(0.1 / 5.9, rel=1e-6)
        assert d["S11_dB"][0] == pytest.approx(-1.84)

    def test_comparison_csv_schema(self, tmp_path):
        report = compare_to_reference({"OFF": [_band(5.85)], "ON": []})
        path = tmp_path / "comparison.csv"
        write_comparison_csv(path, report, {"config_sha256": "z"})
        lines = path.read_text().splitlines()
        assert lines[0] == "# config_sha256=z"
        header = lines[1].split(",")
        assert header[0] == "switch_state"
        assert "citation" in header
        assert len(header) == 18
        matched = lines[2].split(",")
        assert matched[0] == "OFF"
        # data rows carry the citation in quotes
        assert '"' in lines[2]

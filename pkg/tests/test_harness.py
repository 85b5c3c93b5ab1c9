import json
import subprocess
import sys

import pytest
from mpmath import mp, mpf, workprec

import nextremal as nx
from nextremal.cli import cli_main


def sw_handle(count=64):
    return nx.FamilyHandle(family="stieltjes_wigert", q=mpf("0.5"), atom_count=count)


class TestVerifyDrivers:
    def test_unknown_theorem_rejected(self, ctx):
        with pytest.raises(ValueError, match="unknown theorem"):
            nx.verify("T9.9", sw_handle(), ctx)

    def test_e110_sw(self, ctx):
        report = nx.verify("E1.10", sw_handle(), ctx)
        assert report.overall == "pass"
        assert report.precision_bits == ctx.bits

    def test_p16_sw(self, ctx):
        report = nx.verify("P1.6", sw_handle(), ctx)
        assert report.overall == "pass"
        descriptions = [c.description for c in report.checks]
        assert any("interlacing" in d for d in descriptions)
        assert any("-B/D" in d for d in descriptions)

    def test_t31_sw(self, ctx):
        report = nx.verify("T3.1", sw_handle(), ctx, t=1)
        assert report.overall == "pass"

    def test_t34_sw(self, ctx):
        report = nx.verify("T3.4", sw_handle(), ctx, t=1)
        assert report.overall == "pass"

    def test_t35_sw(self, ctx):
        report = nx.verify("T3.5", sw_handle(), ctx)
        assert report.overall == "pass"

    def test_t36_sw(self, ctx):
        report = nx.verify("T3.6", sw_handle(), ctx, t=1)
        assert report.overall == "pass"
        alias = nx.verify("C3.7", sw_handle(), ctx, t=1)
        assert alias.overall == "pass"

    def test_c32_sw(self, ctx):
        report = nx.verify("C3.2", sw_handle(), ctx)
        assert report.overall == "pass"

    def test_p32i_sw(self, ctx):
        report = nx.verify("P3.2i", sw_handle(), ctx)
        assert report.overall == "pass"

    def test_e110_needs_supported_family(self, ctx):
        with pytest.raises(ValueError, match="family"):
            nx.verify("E1.10", nx.FamilyHandle(family="quartic"), ctx)

    def test_t31_requires_sw(self, ctx):
        handle = nx.FamilyHandle(family="al_salam_carlitz", a=mpf("1.5"), q=mpf("0.5"))
        with pytest.raises(ValueError, match="stieltjes_wigert"):
            nx.verify("T3.1", handle, ctx, t=1)

    def test_report_is_deterministic(self, ctx):
        r1 = nx.verify("E1.10", sw_handle(), ctx)
        r2 = nx.verify("E1.10", sw_handle(), ctx)
        d1, d2 = r1.to_dict(), r2.to_dict()
        d1.pop("runtime_seconds")
        d2.pop("runtime_seconds")
        assert d1 == d2

    def test_report_serialization(self, ctx):
        report = nx.verify("E1.10", sw_handle(), ctx)
        data = json.loads(report.to_json())
        assert data["theorem_id"] == "E1.10"
        assert data["config"]["bits"] == ctx.bits
        assert all(c["status"] == "pass" for c in data["checks"])
        csv_text = report.to_csv()
        assert csv_text.splitlines()[0].startswith("theorem_id,")
        assert len(csv_text.splitlines()) == len(report.checks) + 1


class TestCliInProcess:
    def test_family_info(self, capsys):
        code = cli_main(["family", "info", "--family", "stieltjes_wigert",
                         "--q", "0.5"])
        out = capsys.readouterr().out
        assert code == 0
        assert "F(s) = 0.7112119049" in out
        assert "alpha(s) = -1.40605" in out

    def test_family_info_asc(self, capsys):
        code = cli_main(["family", "info", "--family", "al_salam_carlitz",
                         "--q", "0.5", "--a", "1.5"])
        out = capsys.readouterr().out
        assert code == 0
        assert "series form" in out

    def test_measure_build_and_classify(self, tmp_path, capsys):
        out_file = tmp_path / "mu.json"
        code = cli_main(["measure", "build", "--family", "stieltjes_wigert",
                         "--q", "0.5", "--solution", "t=1", "--count", "64",
                         "--out", str(out_file)])
        assert code == 0
        assert out_file.exists()
        capsys.readouterr()

        code = cli_main(["classify", "--in", str(out_file)])
        out = capsys.readouterr().out
        assert code == 0
        assert "verdict: indeterminate" in out
        assert "indet(S)" in out

    def test_measure_build_csv(self, tmp_path, capsys):
        out_file = tmp_path / "mu.csv"
        code = cli_main(["measure", "build", "--family", "quartic",
                         "--solution", "friedrichs", "--count", "12",
                         "--out", str(out_file)])
        assert code == 0
        lines = out_file.read_text().strip().splitlines()
        assert lines[0] == "atom,mass"
        assert len(lines) == 13

    def test_classify_with_alpha(self, tmp_path, capsys):
        out_file = tmp_path / "muF.json"
        cli_main(["measure", "build", "--family", "stieltjes_wigert",
                  "--q", "0.5", "--solution", "friedrichs", "--count", "64",
                  "--out", str(out_file)])
        capsys.readouterr()
        code = cli_main(["classify", "--in", str(out_file), "--alpha", "0.5"])
        out = capsys.readouterr().out
        assert code == 0
        assert "verdict: determinate" in out

    def test_nevanlinna_eval(self, capsys):
        code = cli_main(["nevanlinna", "eval", "--family", "stieltjes_wigert",
                         "--q", "0.5", "--z", "0,1", "--t", "1"])
        out = capsys.readouterr().out
        assert code == 0
        assert "A(z)" in out and "D(z)" in out
        assert "AD - BC - 1" in out

    def test_verify_report_file(self, tmp_path, capsys):
        report_file = tmp_path / "report.json"
        code = cli_main(["verify", "--theorem", "E1.10", "--family",
                         "stieltjes_wigert", "--q", "0.5",
                         "--report", str(report_file)])
        out = capsys.readouterr().out
        assert code == 0
        assert "overall: pass" in out
        data = json.loads(report_file.read_text())
        assert data["overall"] == "pass"

    def test_verify_csv_format(self, tmp_path, capsys):
        report_file = tmp_path / "report.csv"
        code = cli_main(["--format", "csv", "verify", "--theorem", "E1.10",
                         "--family", "stieltjes_wigert", "--q", "0.5",
                         "--report", str(report_file)])
        capsys.readouterr()
        assert code == 0
        assert report_file.read_text().startswith("theorem_id,")

    def test_usage_error_exit_code(self, capsys):
        code = cli_main(["verify", "--theorem", "T9.9", "--family",
                         "stieltjes_wigert", "--q", "0.5"])
        assert code == 1
        code = cli_main(["measure", "build", "--family", "quartic",
                         "--solution", "nonsense", "--count", "4",
                         "--out", "/tmp/never.json"])
        assert code == 1

    def test_config_file_overridden_by_flags(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"bits": 128, "tail_tol": 1e-20}))
        code = cli_main(["--config", str(cfg), "--bits", "192",
                         "verify", "--theorem", "E1.10",
                         "--family", "stieltjes_wigert", "--q", "0.5"])
        out = capsys.readouterr().out
        assert code == 0
        assert "at 192 bits" in out

    def test_no_command_is_usage_error(self, capsys):
        assert cli_main([]) == 1


class TestCliSubprocess:
    def test_entry_point_runs(self):
        proc = subprocess.run(
            [sys.executable, "-m", "nextremal", "family", "info",
             "--family", "stieltjes_wigert", "--q", "0.5"],
            capture_output=True, text=True, timeout=600)
        assert proc.returncode == 0
        assert "F(s)" in proc.stdout

    def test_bad_flag_exits_one(self):
        proc = subprocess.run(
            [sys.executable, "-m", "nextremal", "--no-such-flag"],
            capture_output=True, text=True, timeout=120)
        assert proc.returncode == 1

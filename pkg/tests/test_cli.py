import json

import pytest

from bosegas.cli import main
from bosegas.config import parse_config
from bosegas.errors import RejectedConfig
from bosegas.reporting import csv_header


BASE = {
    "N": 300,
    "beta": 0.75,
    "kappa": 0.1,
    "R": 0.25,
    "cutoff_K_over_2pi": 3,
    "cutoff_K2_over_2pi": 2,
}


def write_config(tmp_path, name="cfg.json", **overrides):
    doc = dict(BASE)
    doc.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


class TestConfigValidation:
    def test_beta_above_one_rejected(self, tmp_path):
        path = write_config(tmp_path, beta=1.2)
        assert main(["energy", "--config", path]) == 2

    def test_beta_at_bounds_rejected(self):
        with pytest.raises(RejectedConfig):
            parse_config(dict(BASE, beta=0.0))
        with pytest.raises(RejectedConfig):
            parse_config(dict(BASE, beta=1.0))

    def test_negative_kappa_rejected(self):
        with pytest.raises(RejectedConfig):
            parse_config(dict(BASE, kappa=-0.1))

    def test_radius_outside_torus_rejected(self):
        with pytest.raises(RejectedConfig):
            parse_config(dict(BASE, R=0.3))

    def test_k2_above_k_rejected(self):
        with pytest.raises(RejectedConfig):
            parse_config(dict(BASE, cutoff_K2_over_2pi=5))

    def test_unknown_key_rejected(self):
        with pytest.raises(RejectedConfig):
            parse_config(dict(BASE, junk=1))

    def test_missing_file(self):
        assert main(["energy", "--config", "/nonexistent/cfg.json"]) == 2

    def test_beta_outside_window_warns(self):
        cfg = parse_config(dict(BASE, beta=0.3))
        assert any("1/2" in w for w in cfg.warnings)

    def test_n_below_two_rejected(self):
        with pytest.raises(RejectedConfig):
            parse_config(dict(BASE, N=1))

    def test_hash_tracks_content(self):
        a = parse_config(dict(BASE))
        b = parse_config(dict(BASE, kappa=0.2))
        assert a.config_hash != b.config_hash


class TestEnergy:
    def test_zero_coupling_all_zero_columns(self, tmp_path, capsys):
        path = write_config(tmp_path, kappa=0.0)
        assert main(["energy", "--config", path]) == 0
        doc = json.loads(capsys.readouterr().out)
        for key in ("a_box", "leading", "E00", "E01", "C1", "C2", "E_corr",
                    "g2_expect", "e_pert_tilde", "E0", "C_const",
                    "total_route_A", "total_route_B", "depletion"):
            assert float(doc[key]) == 0.0, key

    def test_report_embeds_hash_and_truncation(self, tmp_path, capsys):
        path = write_config(tmp_path)
        assert main(["energy", "--config", path]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["config_hash"]
        assert float(doc["cutoff_K"]) > float(doc["cutoff_K2"])
        assert "born2_tail" in doc and "E01_tail" in doc


class TestScan:
    def test_single_n_rejected(self, tmp_path):
        path = write_config(tmp_path)
        assert main(["scan", "--config", path]) == 2

    def test_csv_columns_fixed_order(self, tmp_path):
        out = tmp_path / "scan.csv"
        path = write_config(tmp_path, N=[300, 600], out=str(out))
        assert main(["scan", "--config", path]) == 0
        lines = out.read_text().splitlines()
        assert lines[1] == csv_header()
        assert lines[1].startswith(
            "N,beta,kappa,a_box,leading,E00,E01,C1,C2,E_corr,g2_expect,"
            "e_pert_tilde,E0,C_const,total_A,total_B,route_discrepancy,"
            "depletion,t_scatter_ms,t_sums_ms"
        )
        assert len(lines) == 4

    def test_zero_coupling_scan_zero_columns(self, tmp_path):
        out = tmp_path / "scan.csv"
        path = write_config(tmp_path, N=[300, 600], kappa=0.0, out=str(out))
        assert main(["scan", "--config", path]) == 0
        for line in out.read_text().splitlines()[2:]:
            cells = line.split(",")
            # every physics column after the run parameters is zero
            assert all(float(c) == 0.0 for c in cells[3:18])

    def test_determinism_bit_identical(self, tmp_path):
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        p1 = write_config(tmp_path, "c1.json", N=[300, 500], out=str(out1))
        p2 = write_config(tmp_path, "c2.json", N=[300, 500], out=str(out2))
        assert main(["scan", "--config", p1]) == 0
        assert main(["scan", "--config", p2]) == 0

        def physics(text):
            rows = []
            for line in text.splitlines()[2:]:
                rows.append(line.split(",")[:18])  # strip wall-time columns
            return rows

        assert physics(out1.read_text()) == physics(out2.read_text())

    def test_thread_count_does_not_change_results(self, tmp_path):
        out1 = tmp_path / "t1.csv"
        out2 = tmp_path / "t4.csv"
        p1 = write_config(tmp_path, "t1.json", N=[300, 500], out=str(out1))
        p2 = write_config(tmp_path, "t4.json", N=[300, 500], out=str(out2))
        assert main(["scan", "--config", p1, "--threads", "1"]) == 0
        assert main(["scan", "--config", p2, "--threads", "4"]) == 0
        strip = lambda text: [l.split(",")[:18] for l in text.splitlines()[2:]]
        assert strip(out1.read_text()) == strip(out2.read_text())


class TestThreads:
    def test_env_var_takes_precedence(self, monkeypatch):
        from bosegas import sums

        monkeypatch.setenv("BOSEGAS_THREADS", "2")
        sums.set_thread_count(8)
        assert sums.thread_count() == 2
        monkeypatch.delenv("BOSEGAS_THREADS")
        assert sums.thread_count() == 8
        sums.set_thread_count(None)
        assert sums.thread_count() >= 1


class TestWarnings:
    def test_out_of_window_beta_warns_on_stderr(self, tmp_path, capsys):
        path = write_config(tmp_path, beta=0.4)
        assert main(["energy", "--config", path]) == 0
        assert "1/2" in capsys.readouterr().err


class TestScanFailures:
    def test_row_failures_recorded_run_continues(self, tmp_path):
        out = tmp_path / "scan.csv"
        path = write_config(tmp_path, N=[300, 600], out=str(out),
                            scattering={"tol": 1e-30, "max_iter": 2})
        assert main(["scan", "--config", path]) == 1
        text = out.read_text()
        assert text.count("failed") == 2  # both rows recorded, run continued


class TestVerify:
    def test_good_config_passes(self, tmp_path, capsys):
        path = write_config(tmp_path)
        assert main(["verify", "--config", path]) == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out
        assert "deterministic_rerun" in out

    def test_out_of_regime_surfaces_named_failure(self, tmp_path, capsys):
        # the built-in family needs an enormous coupling before |G| >= F
        path = write_config(tmp_path, kappa=30000.0)
        code = main(["verify", "--config", path])
        out = capsys.readouterr().out
        assert code == 1
        assert "diagonalizable" in out and "FAIL" in out

    def test_zero_coupling_trivially_passes(self, tmp_path, capsys):
        path = write_config(tmp_path, kappa=0.0)
        assert main(["verify", "--config", path]) == 0
        assert "zero_coupling_collapse" in capsys.readouterr().out


class TestOracle:
    def test_comparison_table(self, tmp_path, capsys):
        path = write_config(
            tmp_path,
            oracle={"modes": {"nsq_max": 1}, "n_max": [3, 5]},
        )
        assert main(["oracle", "--config", path]) == 0
        out = capsys.readouterr().out
        lines = out.splitlines()
        names = [l.split(",")[0] for l in lines[2:]]
        assert names == ["E0", "e_pert_tilde", "g2_expect", "depletion"]
        assert "relgap_n5" in lines[1]

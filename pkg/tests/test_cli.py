"""Command-line interface: subcommands, report schema, exit codes, determinism."""

import json
import math

import pytest

from sphere_zeros.cli import main


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(argv, capsys):
    code, out, err = run_cli(argv, capsys)
    return code, json.loads(out), err


class TestAverageCommand:
    def test_degree3_report(self, capsys):
        code, report, _ = run_json(
            ["average", "--sphere", "2", "--degree", "3", "--trials", "60", "--seed", "7"],
            capsys,
        )
        assert code == 0
        assert report["command"] == "average"
        assert report["theory"] == {"value": 12.0, "formula_id": "THM_1_1"}
        assert report["estimate"]["trials"] == 60
        assert abs(report["estimate"]["mean"] - 12.0) <= 4.0 * report["estimate"]["stderr"]
        assert report["experimental"] is False
        assert report["config"]["seed"] == 7
        assert "version" in report

    def test_circle_exact(self, capsys):
        code, report, _ = run_json(
            ["average", "--sphere", "1", "--degree", "9", "--trials", "25"], capsys
        )
        assert code == 0
        assert report["estimate"]["mean"] == 18.0
        assert report["estimate"]["stderr"] == 0.0
        assert report["histogram"] == {"18": 25}

    def test_byte_identical_reports(self, capsys, tmp_path):
        argv = ["average", "--sphere", "2", "--degree", "2", "--trials", "40", "--seed", "3"]
        out1 = tmp_path / "a.json"
        out2 = tmp_path / "b.json"
        assert main(argv + ["--out", str(out1)]) == 0
        assert main(argv + ["--out", str(out2)]) == 0
        capsys.readouterr()
        assert out1.read_bytes() == out2.read_bytes()

    def test_trials_cap(self, capsys):
        code, _, err = run_cli(
            ["average", "--sphere", "2", "--degree", "2", "--trials", "2000000"], capsys
        )
        assert code == 2
        assert "trials" in err


class TestConjectureCommand:
    def test_mixed_1_2(self, capsys):
        code, report, _ = run_json(
            ["conjecture", "--degrees", "1", "2", "--trials", "80", "--seed", "11"], capsys
        )
        assert code == 0
        assert report["experimental"] is True
        assert report["theory"]["formula_id"] == "SEC5_CONJECTURE"
        assert report["theory"]["value"] == pytest.approx(math.sqrt(12.0), rel=1e-12)


class TestCountCommand:
    def test_sphere_run(self, capsys):
        code, report, _ = run_json(
            ["count", "--sphere", "2", "--degree", "3", "--seed", "5"], capsys
        )
        assert code == 0
        assert report["status"] in ("Complete", "DepthEscalated")
        assert report["zero_count"] == len(report["zeros"])
        assert report["zero_count"] <= 18
        assert report["theory"]["formula_id"] == "THM_4_1"

    def test_circle_run(self, capsys):
        code, report, _ = run_json(
            ["count", "--sphere", "1", "--degree", "12", "--seed", "5"], capsys
        )
        assert code == 0
        assert report["zero_count"] == 24
        assert all(len(z) == 2 for z in report["zeros"])

    def test_circle_rejects_second_degree(self, capsys):
        code, _, err = run_cli(
            ["count", "--sphere", "1", "--degree", "3", "--degree2", "4"], capsys
        )
        assert code == 2

    def test_mixed_degrees(self, capsys):
        code, report, _ = run_json(
            ["count", "--sphere", "2", "--degree", "1", "--degree2", "4", "--seed", "2"],
            capsys,
        )
        assert code == 0
        assert report["theory"]["value"] == 8.0


class TestZonalCommand:
    def test_default_tilt(self, capsys):
        code, report, _ = run_json(["zonal", "--degree", "4"], capsys)
        assert code == 0
        assert report["zero_count"] == 8
        assert report["theory"] == {"value": 8.0, "formula_id": "SEC5_ZONAL"}

    def test_zero_tilt_is_degenerate(self, capsys):
        code, report, err = run_json(["zonal", "--degree", "2", "--alpha", "0"], capsys)
        assert code == 4
        assert report["status"] == "Degenerate"
        assert "degenerate" in err


class TestInvariantsCommand:
    def test_sphere_degree6(self, capsys):
        code, report, _ = run_json(["invariants", "--sphere", "2", "--degree", "6"], capsys)
        assert code == 0
        names = [item["name"] for item in report["identities"]]
        assert names == ["orthonormality", "sum_of_squares", "gradient_sum"]
        assert all(item["passed"] for item in report["identities"])

    def test_circle(self, capsys):
        code, report, _ = run_json(["invariants", "--sphere", "1", "--degree", "30"], capsys)
        assert code == 0
        assert all(item["passed"] for item in report["identities"])


class TestEmbeddingCommand:
    def test_degree2(self, capsys):
        code, report, _ = run_json(["embedding", "--sphere", "2", "--degree", "2"], capsys)
        assert code == 0
        emb = report["embedding"]
        assert emb["covering_degree"] == 2
        assert emb["numeric_integral"] == pytest.approx(15.0, rel=5e-3)
        assert report["theory"]["value"] == pytest.approx(7.5, rel=1e-12)

    def test_circle_degree3(self, capsys):
        code, report, _ = run_json(["embedding", "--sphere", "1", "--degree", "3"], capsys)
        assert code == 0
        assert report["embedding"]["covering_degree"] == 3


class TestCroftonCommand:
    def test_zonal_reference(self, capsys):
        code, report, _ = run_json(
            ["crofton-length", "--degree", "2", "--trials", "400", "--seed", "9"], capsys
        )
        assert code == 0
        assert report["theory"]["formula_id"] == "SEC3_CROFTON"
        reference = report["theory"]["value"]
        assert reference == pytest.approx(4.0 * math.pi * math.sqrt(2.0 / 3.0), rel=1e-10)
        assert abs(report["estimate"]["mean"] - reference) <= 3.0 * report["estimate"]["stderr"]

    def test_random_function(self, capsys):
        code, report, _ = run_json(
            ["crofton-length", "--degree", "3", "--function", "random", "--trials", "100"],
            capsys,
        )
        assert code == 0
        assert report["theory"]["value"] is None
        assert report["estimate"]["mean"] > 0.0


class TestOutputFormats:
    def test_csv_has_header_and_row(self, capsys):
        code, out, _ = run_cli(
            ["invariants", "--sphere", "2", "--degree", "2", "--format", "csv"], capsys
        )
        assert code == 0
        lines = out.strip().split("\n")
        assert len(lines) == 2
        header = lines[0].split(",")
        assert "command" in header and "config.degree" in header
        assert len(header) == len(lines[1].split(",")) or '"' in lines[1]

    def test_csv_deterministic(self, capsys, tmp_path):
        argv = [
            "zonal", "--degree", "3", "--format", "csv",
        ]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(argv + ["--out", str(a)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        capsys.readouterr()
        assert a.read_bytes() == b.read_bytes()

    def test_degree_out_of_range(self, capsys):
        code, _, err = run_cli(["average", "--sphere", "2", "--degree", "51"], capsys)
        assert code == 2
        assert "degrees" in err

    def test_solver_degree_cap(self, capsys):
        code, _, err = run_cli(["count", "--sphere", "2", "--degree", "13"], capsys)
        assert code == 2
        assert "degrees up to" in err

    def test_depth_cap(self, capsys):
        code, _, err = run_cli(["count", "--sphere", "2", "--degree", "3", "--depth", "8"], capsys)
        assert code == 2

    def test_negative_seed_rejected(self, capsys):
        code, _, err = run_cli(["average", "--sphere", "1", "--degree", "2", "--seed", "-1"], capsys)
        assert code == 2
        assert "seed" in err

    def test_high_degree_allowed_off_solver_paths(self, capsys):
        code, report, _ = run_json(["invariants", "--sphere", "2", "--degree", "50"], capsys)
        assert code == 0
        assert all(item["passed"] for item in report["identities"])

    def test_violated_identity_exits_3(self, capsys, monkeypatch):
        import sphere_zeros.cli as cli_module

        monkeypatch.setattr(cli_module, "TOL_ORTHONORMALITY", -1.0)
        code, report, err = run_json(["invariants", "--sphere", "2", "--degree", "2"], capsys)
        assert code == 3
        assert report["violated"] == "orthonormality"
        assert "invariant violation" in err

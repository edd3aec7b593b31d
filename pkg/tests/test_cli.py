import json

import numpy as np
import pytest

from gatefid import depolarizing_kraus
from gatefid.cli import main
from gatefid.serialize import kraus_to_obj, save_matrix

L0 = 0.7 * np.exp(1j * np.pi / 8)
L1 = 0.8 * np.exp(1j * 4 * np.pi / 5)
REFERENCE_MEAN = (0.49 + 0.64 + 0.56 * np.cos(4 * np.pi / 5 - np.pi / 8)) / 3


@pytest.fixture
def files(tmp_path):
    paths = {}
    save_matrix(np.eye(2), tmp_path / "eye2.json")
    save_matrix(np.eye(3), tmp_path / "eye3.json")
    save_matrix(np.diag([L0, L1]), tmp_path / "reference.json")
    save_matrix(np.diag([1.0, 0.5]), tmp_path / "nonunitary.json")
    (tmp_path / "depol.json").write_text(json.dumps(kraus_to_obj(depolarizing_kraus(0.2))))
    (tmp_path / "broken.json").write_text("{not json")
    for name in ("eye2", "eye3", "reference", "nonunitary", "depol", "broken"):
        paths[name] = str(tmp_path / f"{name}.json")
    paths["dir"] = tmp_path
    return paths


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestMoments:
    def test_reference_mean(self, files, capsys):
        code, out, _ = run(
            capsys, "moments", "--target", files["eye2"], "--actual", files["reference"]
        )
        assert code == 0
        report = json.loads(out)
        assert abs(report["mean"] - REFERENCE_MEAN) <= 1e-9
        assert report["n_eff"] == 2
        assert report["method"] == "closed_form"

    def test_perfect_gate(self, files, capsys):
        code, out, _ = run(
            capsys, "moments", "--target", files["eye3"], "--actual", files["eye3"]
        )
        report = json.loads(out)
        assert code == 0
        assert report["mean"] == pytest.approx(1.0, abs=1e-12)
        assert report["variance"] == 0.0

    def test_kraus_depolarizing(self, files, capsys):
        code, out, _ = run(
            capsys, "moments", "--target", files["eye2"], "--kraus", files["depol"]
        )
        report = json.loads(out)
        assert code == 0
        assert report["mean"] == pytest.approx(0.9, abs=1e-12)
        assert "variance" not in report
        assert report["trace_preserving"] is True

    def test_subspace(self, files, capsys):
        code, out, _ = run(
            capsys,
            "moments",
            "--target",
            files["eye3"],
            "--actual",
            files["eye3"],
            "--subspace",
            "0,1",
        )
        report = json.loads(out)
        assert code == 0
        assert report["n_eff"] == 2
        assert report["mean"] == pytest.approx(1.0)

    def test_non_unitary_target_exits_2(self, files, capsys):
        code, _, err = run(
            capsys,
            "moments",
            "--target",
            files["nonunitary"],
            "--actual",
            files["eye2"],
        )
        assert code == 2
        assert "nonunitary.json" in err
        assert "unitary" in err

    def test_missing_file_exits_1(self, files, capsys):
        code, _, err = run(
            capsys, "moments", "--target", files["eye2"], "--actual", "missing.json"
        )
        assert code == 1
        assert "missing.json" in err

    def test_malformed_json_exits_1(self, files, capsys):
        code, _, err = run(
            capsys, "moments", "--target", files["broken"], "--actual", files["eye2"]
        )
        assert code == 1
        assert "broken.json" in err

    def test_kraus_with_subspace_rejected(self, files, capsys):
        code, _, _ = run(
            capsys,
            "moments",
            "--target",
            files["eye2"],
            "--kraus",
            files["depol"],
            "--subspace",
            "0",
        )
        assert code == 1

    def test_dim_mismatch_exits_2(self, files, capsys):
        code, _, err = run(
            capsys, "moments", "--target", files["eye3"], "--actual", files["eye2"]
        )
        assert code == 2
        assert "mismatch" in err


class TestDist:
    def test_reference_matrix(self, files, capsys):
        out_csv = str(files["dir"] / "pdf.csv")
        code, out, _ = run(
            capsys, "dist", "--matrix", files["reference"], "--out", out_csv, "--grid", "64"
        )
        assert code == 0
        meta = json.loads(out)
        assert meta["case"] == "two_piece"
        assert abs(meta["moments"]["mean"] - REFERENCE_MEAN) <= 1e-9
        lines = (files["dir"] / "pdf.csv").read_text().strip().splitlines()
        assert lines[0] == "f,density"
        assert len(lines) == 65

    def test_spectrum_flags(self, files, capsys):
        code, out, _ = run(
            capsys,
            "dist",
            "--lambda0",
            "0.5,0",
            "--lambda1",
            "1,0",
            "--out",
            str(files["dir"] / "one.csv"),
        )
        meta = json.loads(out)
        assert code == 0
        assert meta["case"] == "one_piece"
        assert meta["support"] == [pytest.approx(0.25), pytest.approx(1.0)]

    def test_unitary_spectrum(self, files, capsys):
        code, out, _ = run(
            capsys,
            "dist",
            "--lambda0=1,0",
            "--lambda1=-1,0",
            "--out",
            str(files["dir"] / "u.csv"),
        )
        meta = json.loads(out)
        assert code == 0
        assert meta["support"][1] == pytest.approx(1.0)
        assert meta["support"][0] == pytest.approx(0.0, abs=1e-30)

    def test_degenerate_exits_2_with_point_mass(self, files, capsys):
        code, _, err = run(
            capsys,
            "dist",
            "--lambda0",
            "1,0",
            "--lambda1",
            "1,0",
            "--out",
            str(files["dir"] / "d.csv"),
        )
        assert code == 2
        assert "point mass" in err
        assert "1.0" in err

    def test_agrees_with_moments_command(self, files, capsys):
        code, out, _ = run(
            capsys, "moments", "--target", files["eye2"], "--actual", files["reference"]
        )
        moments_report = json.loads(out)
        code2, out2, _ = run(
            capsys,
            "dist",
            "--matrix",
            files["reference"],
            "--out",
            str(files["dir"] / "x.csv"),
        )
        dist_report = json.loads(out2)["moments"]
        assert code == code2 == 0
        assert abs(moments_report["mean"] - dist_report["mean"]) <= 1e-9
        assert abs(moments_report["variance"] - dist_report["variance"]) <= 1e-9


class TestSample:
    def test_identity(self, files, capsys):
        prefix = str(files["dir"] / "ident")
        code, out, _ = run(
            capsys,
            "sample",
            "--matrix",
            files["eye2"],
            "--samples",
            "1000",
            "--bins",
            "10",
            "--seed",
            "7",
            "--out",
            prefix,
        )
        assert code == 0
        est = json.loads(out)
        assert est["mean"] == pytest.approx(1.0, abs=1e-12)
        assert est["std_error"] <= 1e-12

    def test_outputs_and_manifest(self, files, capsys):
        prefix = str(files["dir"] / "run")
        code, _, _ = run(
            capsys,
            "sample",
            "--matrix",
            files["reference"],
            "--samples",
            "2000",
            "--bins",
            "20",
            "--seed",
            "3",
            "--out",
            prefix,
        )
        assert code == 0
        manifest = json.loads((files["dir"] / "run.manifest.json").read_text())
        assert manifest["seed"] == 3
        assert str(files["dir"] / "run.csv") in manifest["outputs"]
        assert manifest["inputs"] == [files["reference"]]
        assert "gatefid" in manifest["versions"]
        lines = (files["dir"] / "run.csv").read_text().strip().splitlines()
        assert lines[0] == "bin_lo,bin_hi,count,density"
        assert len(lines) == 21
        est = json.loads((files["dir"] / "run.json").read_text())
        assert est["samples"] == 2000

    def test_reproducible_for_fixed_seed(self, files, capsys):
        a = str(files["dir"] / "a")
        b = str(files["dir"] / "b")
        for prefix in (a, b):
            code, _, _ = run(
                capsys,
                "sample",
                "--matrix",
                files["reference"],
                "--samples",
                "3000",
                "--bins",
                "15",
                "--seed",
                "11",
                "--workers",
                "2",
                "--out",
                prefix,
            )
            assert code == 0
        assert (files["dir"] / "a.csv").read_text() == (files["dir"] / "b.csv").read_text()
        est_a = json.loads((files["dir"] / "a.json").read_text())
        est_b = json.loads((files["dir"] / "b.json").read_text())
        assert est_a == est_b

    def test_reference_mean_within_three_sigma(self, files, capsys):
        code, out, _ = run(
            capsys,
            "sample",
            "--matrix",
            files["reference"],
            "--samples",
            "1000000",
            "--bins",
            "50",
            "--seed",
            "42",
            "--out",
            str(files["dir"] / "ref"),
        )
        est = json.loads(out)
        assert code == 0
        assert abs(est["mean"] - REFERENCE_MEAN) <= 3 * est["std_error"]

    def test_projector_mean_within_three_sigma(self, files, tmp_path, capsys):
        save_matrix(np.diag([1.0, 0.0]), tmp_path / "proj.json")
        code, out, _ = run(
            capsys,
            "sample",
            "--matrix",
            str(tmp_path / "proj.json"),
            "--samples",
            "1000000",
            "--seed",
            "42",
            "--out",
            str(files["dir"] / "proj"),
        )
        est = json.loads(out)
        assert code == 0
        assert abs(est["mean"] - 1 / 3) <= 3 * est["std_error"]


class TestOptimize:
    def test_phase_problem(self, tmp_path, capsys):
        problem = {
            "family": "phase",
            "target": {"dim": 2, "entries": [[1, 0], [0, 0], [0, 0], [1, 0]]},
            "objective": {"kind": "mean"},
            "start": [2.0],
            "box": [[-3.141592653589793, 3.141592653589793]],
            "f_tol": 1e-12,
        }
        path = tmp_path / "phase.json"
        path.write_text(json.dumps(problem))
        trace_path = tmp_path / "trace.csv"
        code, out, _ = run(capsys, "optimize", str(path), "--trace-out", str(trace_path))
        assert code == 0
        result = json.loads(out)
        assert abs(result["best_params"][0]) < 1e-6
        assert result["best_value"] == pytest.approx(1.0, abs=1e-10)
        assert result["converged"] is True
        lines = trace_path.read_text().strip().splitlines()
        assert lines[0] == "eval,p0,value"
        assert len(lines) == result["evaluations"] + 1

    def test_unknown_family_exits_1(self, tmp_path, capsys):
        problem = {
            "family": "nope",
            "target": {"dim": 2, "entries": [[1, 0], [0, 0], [0, 0], [1, 0]]},
            "objective": {"kind": "mean"},
            "start": [0.0],
            "box": [[-1, 1]],
        }
        path = tmp_path / "p.json"
        path.write_text(json.dumps(problem))
        code, _, err = run(capsys, "optimize", str(path))
        assert code == 1
        assert "nope" in err

    def test_start_outside_box_exits_2(self, tmp_path, capsys):
        problem = {
            "family": "phase",
            "target": {"dim": 2, "entries": [[1, 0], [0, 0], [0, 0], [1, 0]]},
            "objective": {"kind": "mean"},
            "start": [5.0],
            "box": [[-1, 1]],
        }
        path = tmp_path / "p.json"
        path.write_text(json.dumps(problem))
        code, _, err = run(capsys, "optimize", str(path))
        assert code == 2
        assert "outside" in err


class TestVerifyCommand:
    def test_quick_passes(self, tmp_path, capsys):
        report_path = tmp_path / "report.json"
        code, out, _ = run(capsys, "verify", "--level", "quick", "--out", str(report_path))
        assert code == 0
        report = json.loads(out)
        assert report["passed"] is True
        assert {c["name"] for c in report["checks"]} >= {
            "monomial_patterns",
            "hermitian_collapse",
            "distribution_moments",
            "mc_closed_form",
        }
        assert json.loads(report_path.read_text()) == report

    def test_corrupted_second_moment_fails(self, capsys, monkeypatch):
        import gatefid.moments as moments_mod

        true_fn = moments_mod.fourth_moment_general
        monkeypatch.setattr(
            moments_mod, "fourth_moment_general", lambda m: 1.2 * true_fn(m)
        )
        code, out, _ = run(capsys, "verify", "--level", "quick")
        assert code == 3
        report = json.loads(out)
        failed = {c["name"] for c in report["checks"] if not c["passed"]}
        assert "mc_closed_form" in failed


class TestUsage:
    def test_no_command(self, capsys):
        code, _, _ = run(capsys)
        assert code == 1

    def test_unknown_flag(self, capsys):
        code, _, _ = run(capsys, "moments", "--bogus", "x")
        assert code == 1

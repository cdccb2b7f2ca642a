import json

import pytest

from gravirrev.cli import run

from conftest import DATA


def call(capsys, *argv):
    code = run([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_planck(capsys):
    code, out, _ = call(capsys, "planck", "--mass-kg", 1, "--speed-mps", 1000)
    assert code == 0
    rep = json.loads(out)
    assert rep["l_planck_m"] == pytest.approx(1.616e-35, rel=1e-3)
    assert rep["sub_planckian"] is True


def test_bekenstein(capsys):
    code, out, _ = call(capsys, "bekenstein", "--area-m2", 0)
    assert code == 0 and json.loads(out)["entropy_J_per_K"] == 0.0
    code, _, err = call(capsys, "bekenstein", "--area-m2", -1)
    assert code == 2 and "invalid input" in err


def test_unknown_flag_and_subcommand(capsys):
    code, _, err = call(capsys, "planck", "--mass-kg", 1, "--speed-mps", 1, "--bogus")
    assert code == 2 and "usage" in err
    code, _, err = call(capsys, "nonsense")
    assert code == 2 and "usage" in err


def test_dephase_outputs(capsys, tmp_path):
    spec = DATA / "three_level_spectrum.json"
    code, out, _ = call(capsys, "dephase", "--spectrum", spec, "--sigma", 0.05, "--t-max", 0.05, "--t-steps", 4,
                        "--samples", 200, "--seed", 1, "--output-dir", tmp_path)
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "t_s,entry_m,entry_n,re,im,abs"
    assert len(lines) == 1 + 4 * 3
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["subcommand"] == "dephase" and manifest["seed"] == 1
    assert manifest["input_paths"][0]["sha256"]
    assert (tmp_path / "dephase.csv").read_text() == out


def test_dephase_needs_seed_unless_analytic(capsys):
    spec = DATA / "three_level_spectrum.json"
    code, _, _ = call(capsys, "dephase", "--spectrum", spec, "--sigma", 0.05, "--t-max", 0.05, "--t-steps", 3)
    assert code == 2
    code, out, _ = call(capsys, "dephase", "--spectrum", spec, "--sigma", 0.05, "--t-max", 0.05, "--t-steps", 3,
                        "--analytic", "--entries", "0:2")
    assert code == 0 and len(out.strip().split("\n")) == 4


def test_evolve_csv(capsys):
    code, out, _ = call(capsys, "evolve", "--system", DATA / "two_site_cat.json", "--t-final", 0.01, "--dt", 1e-4,
                        "--observables", "purity,0:1")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "t_s,trace,purity,min_eig,energy_J,re_0_1,im_0_1,abs_0_1"
    assert len(lines) == 102


def test_evolve_instability_exit_code(capsys):
    code, _, err = call(capsys, "evolve", "--system", DATA / "two_site_cat.json", "--t-final", 1.0, "--dt", 0.1)
    assert code == 3 and "smaller dt" in err


def test_missing_file_is_input_error(capsys, tmp_path):
    code, _, _ = call(capsys, "evolve", "--system", tmp_path / "nope.json", "--t-final", 1.0, "--dt", 0.1)
    assert code == 2


def test_cat_decay(capsys):
    a, b = DATA / "cat_left.json", DATA / "cat_right.json"
    code, out, _ = call(capsys, "cat-decay", "--config-a", a, "--config-b", a, "--sigma-reg", 1e-7)
    assert code == 0 and json.loads(out)["closed_form_rate_hz"] == 0
    code, out, _ = call(capsys, "cat-decay", "--config-a", a, "--config-b", b, "--sigma-reg", 1e-7, "--oracle")
    res = json.loads(out)
    assert code == 0 and res["relative_gap"] < 1e-3


def test_noise_check(capsys):
    code, out, _ = call(capsys, "noise-check", "--config", DATA / "three_cells.json", "--sigma-reg", 1e-7,
                        "--dt", 1e-3, "--steps", 1000, "--samples", 100, "--seed", 3)
    res = json.loads(out)
    assert code == 0 and res["n_draws"] == 100_000
    assert res["max_relative_error"] < 0.05


def test_unravel_within_bound(capsys):
    code, out, _ = call(capsys, "unravel", "--system", DATA / "two_site_cat.json", "--dt", 1e-4, "--steps", 200,
                        "--trajectories", 1000, "--seed", 7)
    res = json.loads(out)
    assert code == 0
    assert res["worst_entry_deviation"] <= res["worst_entry_3sigma_bound"]
    assert res["within_3sigma"] and res["max_trajectory_purity_error"] <= 1e-10


@pytest.mark.filterwarnings("ignore:grid spacing")
def test_sn_soliton(capsys, tmp_path):
    code, out, _ = call(capsys, "sn-soliton", "--mass-kg", 1e-17, "--n-points", 400, "--tol", 1e-6,
                        "--output-dir", tmp_path)
    assert code == 0
    summary = json.loads(out)
    assert summary["dimensionless_eigenvalue"] == pytest.approx(-0.1628, rel=1e-2)
    csv_lines = (tmp_path / "soliton.csv").read_text().strip().split("\n")
    assert csv_lines[0] == "r_m,u,phi_J" and len(csv_lines) == 401


def test_manifest_hashes_outputs(capsys, tmp_path):
    import hashlib
    call(capsys, "planck", "--mass-kg", 2, "--speed-mps", 3, "--output-dir", tmp_path)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    entry = manifest["output_paths"][0]
    assert hashlib.sha256((tmp_path / "planck.json").read_bytes()).hexdigest() == entry["sha256"]
    assert "timestamp" in manifest and manifest["tool_version"]

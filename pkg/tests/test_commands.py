"""Command bodies and the CLI wrapper: files, exit codes, determinism."""

import json

import pytest

from deconv.cli import main
from deconv.commands import (cmd_analyze_kernel, cmd_deconvolve, cmd_smallset,
                             cmd_sweep, cmd_zeros)
from deconv.config import parse_config
from deconv.errors import AcceptanceGateError, ConfigError


def small_config(kernel=None, eps_list=None):
    return {
        "kernel": kernel or {"type": "indicator", "a": 0.0, "b": 1.0},
        "f0": {"type": "synth_smooth"},
        "eps_list": eps_list or [1e-4, 1e-5, 1e-6, 1e-7],
        "beta": 0.2,
        "q": 1.0,
        "seed": 7,
        "grids": {"t_extent": 10.0, "t_step": 0.01,
                  "freq_extent_factor": 60.0, "freq_step": 0.01},
    }


def write_config(tmp_path, data):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data))
    return str(path)


def read_json(out_dir, name):
    with open(out_dir / name, "r", encoding="utf-8") as fh:
        return json.load(fh)


def test_analyze_kernel_outputs(tmp_path):
    data = small_config()
    # the superlinearity detector spans s_hi/100 .. s_hi, so the indicator
    # profile needs a step finer than 1/100 of its unit support
    data["grids"]["t_step"] = 0.005
    cfg = parse_config(data)
    out = tmp_path / "out"
    manifest = cmd_analyze_kernel(cfg, str(out))
    for name in ("profile.csv", "dual.csv", "detector.json", "zeros.csv",
                 "zeros.json", "manifest.json"):
        assert (out / name).is_file()
    assert manifest["outputs"]["profile_csv"] == "profile.csv"
    detector = read_json(out, "detector.json")
    assert detector["superlinear"] is True  # compact support blows p up
    zeros = read_json(out, "zeros.json")
    assert abs(zeros["d_hat"] - zeros["predicted_d"]) <= 0.1


def test_analyze_kernel_skips_zeros_off_unit_support(tmp_path):
    cfg = parse_config(small_config(kernel={"type": "two_sided_exp",
                                            "rate": 1.0}))
    out = tmp_path / "out"
    manifest = cmd_analyze_kernel(cfg, str(out))
    assert not (out / "zeros.csv").exists()
    assert any("skipped" in note for note in manifest["notes"])
    detector = read_json(out, "detector.json")
    assert detector["superlinear"] is False


def test_deconvolve_outputs(tmp_path):
    cfg = parse_config(small_config())
    out = tmp_path / "out"
    cmd_deconvolve(cfg, str(out), eps=1e-6, noise_free=True)
    plan = read_json(out, "plan.json")
    assert plan["eps"] == 1e-6
    assert plan["noise_free"] is True
    assert plan["achieved_error"] < 0.06
    dec = read_json(out, "decomposition.json")
    assert dec["achieved_sq_error"] <= dec["total_bound"] + 1e-6
    assert (out / "reconstruction.csv").is_file()


def test_sweep_writes_everything_then_gates(tmp_path):
    cfg = parse_config(small_config())
    out = tmp_path / "out"
    # desk-scale radii sit far from the asymptotic regime, so the
    # log R / log log(1/eps) gate must fail while the files still land
    with pytest.raises(AcceptanceGateError, match="asymptotic_radius_ok"):
        cmd_sweep(cfg, str(out))
    summary = read_json(out, "summary.json")
    assert summary["gates"]["bounds_ok"] is True
    assert summary["gates"]["stability_ok"] is True
    assert summary["gates"]["valid"] is True
    assert summary["gates"]["asymptotic_radius_ok"] is False
    assert summary["bound_violations"] == 0
    lines = (out / "sweep.csv").read_text().strip().split("\n")
    assert lines[0].startswith("eps,")
    assert len(lines) == 5
    assert (out / "manifest.json").is_file()


def test_sweep_needs_four_levels(tmp_path):
    cfg = parse_config(small_config(eps_list=[1e-4, 1e-5, 1e-6]))
    with pytest.raises(ConfigError):
        cmd_sweep(cfg, str(tmp_path / "out"))


def test_smallset_outputs(tmp_path):
    cfg = parse_config(small_config())
    out = tmp_path / "out"
    with pytest.warns(RuntimeWarning):  # cartan ceiling is loose at r <= 1
        cmd_smallset(cfg, str(out), eps=1e-8)
    report = read_json(out, "smallset.json")
    assert report["eps"] == 1e-8
    assert report["interval_count"] == 0
    assert report["measure_estimate"] == 0.0
    assert report["bound"] > 1.0


def test_zeros_outputs_and_compactness_guard(tmp_path):
    cfg = parse_config(small_config())
    out = tmp_path / "out"
    cmd_zeros(cfg, str(out))
    lines = (out / "zeros.csv").read_text().strip().split("\n")
    assert lines[0] == "R,n,density"
    assert len(lines) == 6
    gauss = parse_config(small_config(kernel={"type": "gaussian",
                                              "scale": 1.0}))
    with pytest.raises(ConfigError):
        cmd_zeros(gauss, str(tmp_path / "out2"))


def test_cli_success_exit_code(tmp_path):
    cfg_path = write_config(tmp_path, small_config())
    out = tmp_path / "out"
    code = main(["deconvolve", "--config", cfg_path, "--out", str(out),
                 "--eps", "1e-6", "--noise-free"])
    assert code == 0
    assert (out / "manifest.json").is_file()
    assert not (out / "error.json").exists()


def test_cli_config_error_writes_error_json(tmp_path):
    bad = small_config()
    bad["beta"] = 0.5
    cfg_path = write_config(tmp_path, bad)
    out = tmp_path / "out"
    code = main(["smallset", "--config", cfg_path, "--out", str(out)])
    assert code == 2
    err = read_json(out, "error.json")
    assert err["error"] == "ConfigError"
    assert "beta" in err["message"]


def test_cli_gate_failure_exit_code(tmp_path):
    cfg_path = write_config(tmp_path, small_config())
    out = tmp_path / "out"
    code = main(["sweep", "--config", cfg_path, "--out", str(out)])
    assert code == 4
    assert (out / "summary.json").is_file()
    err = read_json(out, "error.json")
    assert err["error"] == "AcceptanceGateError"


def test_reruns_are_byte_identical(tmp_path):
    cfg = parse_config(small_config())
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    with pytest.warns(RuntimeWarning):
        cmd_smallset(cfg, str(out_a), eps=1e-6)
    with pytest.warns(RuntimeWarning):
        cmd_smallset(cfg, str(out_b), eps=1e-6)
    assert ((out_a / "smallset.json").read_bytes()
            == (out_b / "smallset.json").read_bytes())

    exp = parse_config(small_config(kernel={"type": "two_sided_exp",
                                            "rate": 1.0}))
    out_c = tmp_path / "c"
    out_d = tmp_path / "d"
    cmd_analyze_kernel(exp, str(out_c))
    cmd_analyze_kernel(exp, str(out_d))
    for name in ("profile.csv", "dual.csv", "detector.json"):
        assert (out_c / name).read_bytes() == (out_d / name).read_bytes()
    # manifests agree except for the one intentionally variable block
    man_c = read_json(out_c, "manifest.json")
    man_d = read_json(out_d, "manifest.json")
    man_c.pop("wall_clock_seconds")
    man_d.pop("wall_clock_seconds")
    assert man_c == man_d

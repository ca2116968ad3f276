import json

import numpy as np
import pytest

from phasecone import cli


def run(tmp_path, name, pipeline="cone", **overrides):
    config = cli.RunConfig(pipeline=pipeline, outdir=str(tmp_path / name),
                           **overrides)
    return config, cli.run_pipeline(config)


def strip_timings(report):
    return {k: v for k, v in report.items() if k != "timings"}


def test_config_validation():
    with pytest.raises(ValueError):
        cli.RunConfig(pipeline="bogus").validate()
    with pytest.raises(ValueError):
        cli.RunConfig(eps=(0.25,), h=0.1).validate()       # h > eps/8
    with pytest.raises(ValueError):
        cli.RunConfig(newton_tol=-1.0).validate()
    with pytest.raises(ValueError):
        cli.RunConfig(nu=-0.5, pipeline="solve").validate()  # outside window
    cli.RunConfig(nu=-2.1, pipeline="cone").validate()       # cone: no window


def test_cone_pipeline_artifacts(tmp_path):
    _, report = run(tmp_path, "a", jmax=4)
    assert report["all_checks_pass"]
    data = json.loads((tmp_path / "a" / "cone.json").read_text())
    assert data["nu0_plus"] == -2.0
    assert data["nu0_minus"] == -3.0
    assert data["stability"] == "strictly_stable"
    assert "cone.json" in report["manifest"]


def test_determinism_modulo_timings(tmp_path):
    _, r1 = run(tmp_path, "d1", jmax=4)
    _, r2 = run(tmp_path, "d2", jmax=4)
    a, b = strip_timings(r1), strip_timings(r2)
    a["config"]["outdir"] = b["config"]["outdir"] = "X"
    assert a == b
    assert ((tmp_path / "d1" / "cone.json").read_bytes()
            == (tmp_path / "d2" / "cone.json").read_bytes())


def test_resume_and_recompute(tmp_path):
    config, r1 = run(tmp_path, "r", jmax=4)
    assert r1["resumed_stages"] == []
    r2 = cli.run_pipeline(config)
    assert r2["resumed_stages"] == ["cone"]
    (tmp_path / "r" / "cone.json").unlink()
    r3 = cli.run_pipeline(config)
    assert r3["resumed_stages"] == []
    assert r3["all_checks_pass"]
    # Changing a relevant key invalidates the cache.
    config2 = cli.RunConfig(pipeline="cone", outdir=str(tmp_path / "r"),
                            jmax=6)
    r4 = cli.run_pipeline(config2)
    assert r4["resumed_stages"] == []


def test_lock_file(tmp_path):
    outdir = tmp_path / "locked"
    outdir.mkdir()
    (outdir / ".lock").write_text("12345")
    with pytest.raises(RuntimeError, match="locked"):
        cli.run_pipeline(cli.RunConfig(pipeline="cone", outdir=str(outdir)))


def test_config_file_roundtrip(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n1 = 2\nn2 = 4\neps = 0.25 0.125\n# comment\nseed = 7\n")
    loaded = cli.load_config_file(cfg)
    assert loaded == {"n1": 2, "n2": 4, "eps": (0.25, 0.125), "seed": 7}


def test_csv_roundtrip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    x = rng.standard_normal(50) * 10.0 ** rng.integers(-12, 12, 50)
    path = tmp_path / "t.csv"
    cli.write_csv(path, {"x": x})
    back = cli.read_csv(path)["x"]
    assert np.array_equal(back, x)


def test_minsurf_negative_control_pipeline(tmp_path):
    _, report = run(tmp_path, "neg", pipeline="minsurf", n1=1, n2=1,
                    s_max=100.0)
    assert report["all_checks_pass"]
    assert report["stages"]["minsurf"]["cone_crossing"]


def test_small_end_to_end_solve_cli(tmp_path):
    """Exercise the console entry point on a small but real solve."""
    outdir = tmp_path / "solve"
    rc = cli.main(["solve", "--n1", "3", "--n2", "3", "--eps", "0.25",
                   "--R", "4", "--smax", "40", "--outdir", str(outdir)])
    assert rc == 0
    report = json.loads((outdir / "report.json").read_text())
    stage = report["stages"]["solve"]["per_eps"]["0.25"]
    assert stage["converged"]
    assert stage["final_sup_residual"] < 1e-10
    assert (outdir / "zeroset_eps0.25.csv").exists()
    assert (outdir / "field_eps0.25.npz").exists()
    # Plot-data emission from the artifacts.
    path = cli.emit_plot_data(outdir, "zeroset")
    cols = cli.read_csv(path)
    assert set(cols) == {"s1", "s2", "source"}
    with pytest.raises(ValueError, match="unknown plot kind"):
        cli.emit_plot_data(outdir, "hexbin")


def test_emit_decay_and_spectrum_require_artifacts(tmp_path):
    with pytest.raises(FileNotFoundError):
        cli.emit_plot_data(tmp_path, "decay")

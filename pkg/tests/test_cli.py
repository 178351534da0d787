import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helfrich import cli
from helfrich.export import PROFILE_COLUMNS, fmt17, mesh_area_volume

PAPER_FLAGS = ["--c0", "1", "--lambda", "0.25", "--p", "1"]
SOLVE_FLAGS = PAPER_FLAGS + ["--w0p", "0.05"]


def run_cli(args):
    return cli.main(args)


def test_solve_paper_params(tmp_path):
    code = run_cli(["solve", *SOLVE_FLAGS, "--out", str(tmp_path)])
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["classification"]["verdict"] == "Biconcave"
    assert report["equator_identity_residual"] <= 1e-4
    text = (tmp_path / "profile.csv").read_text()
    assert text.splitlines()[0] == ",".join(PROFILE_COLUMNS)


def test_profile_csv_roundtrip_bit_exact(tmp_path):
    run_cli(["solve", *SOLVE_FLAGS, "--out", str(tmp_path)])
    lines = (tmp_path / "profile.csv").read_text().splitlines()
    for line in lines[1:]:
        for tok in line.split(","):
            assert fmt17(float(tok)) == tok


def test_solve_rejects_negative_w0p(capsys):
    with pytest.raises(SystemExit) as ei:
        run_cli(["solve", *PAPER_FLAGS, "--w0p", "-1"])
    assert ei.value.code == 64
    assert "--w0p" in capsys.readouterr().err


def test_solve_blowup_exit_code(tmp_path):
    code = run_cli(["solve", "--c0", "5", "--lambda", "0", "--p", "0.1",
                    "--w0p", "1", "--out", str(tmp_path)])
    assert code == 2
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["classification"]["verdict"] == "BlowUpPositive"


def test_verify_small_sweep(tmp_path):
    code = run_cli(["verify", *PAPER_FLAGS, "--sweep-points", "5",
                    "--sweep-min", "1e-3", "--out", str(tmp_path)])
    assert code == 0
    report = json.loads((tmp_path / "bounds_report.json").read_text())
    assert report["all_passed"]
    assert len(report["per_point"]) == 5


def test_verify_excludes_non_biconcave(tmp_path):
    # w0p = 2 has R(2) > 0 with c0 > 0: guaranteed positive blow-up
    code = run_cli(["verify", *PAPER_FLAGS, "--sweep-points", "4",
                    "--sweep-min", "0.02", "--sweep-max", "2",
                    "--out", str(tmp_path)])
    report = json.loads((tmp_path / "bounds_report.json").read_text())
    assert len(report["excluded"]) >= 1
    assert code == 0  # remaining checks pass


def test_verify_rejects_zero_points(capsys):
    with pytest.raises(SystemExit) as ei:
        run_cli(["verify", *PAPER_FLAGS, "--sweep-points", "0"])
    assert ei.value.code == 64


def test_sweep_grid_shape(tmp_path):
    code = run_cli(["sweep", "--c0-range", "1:2:2", "--lambda-range",
                    "0.25:0.5:2", "--p-range", "1:1:1", "--w0p-range",
                    "0.02:0.06:3", "--out", str(tmp_path)])
    assert code == 0
    lines = (tmp_path / "phase.csv").read_text().splitlines()
    assert lines[0] == ("c0,lambda,p,w0p,classification,r_M,r0,wp_r0,"
                        "r_inf,z_inf,roots_all_positive")
    assert len(lines) == 13  # 12 cells + header
    assert all(line.split(",")[4] == "Biconcave" for line in lines[1:])


def test_sweep_anomaly_exit_code(tmp_path, monkeypatch):
    from helfrich.bounds import PhaseCell
    monkeypatch.setattr(cli, "phase_sweep", lambda grid, cfg: [
        PhaseCell(1.0, 0.25, 1.0, 0.01, "Aborted", True, True)])
    code = run_cli(["sweep", "--out", str(tmp_path)])
    assert code == 3


def test_sweep_bad_range(capsys):
    with pytest.raises(SystemExit) as ei:
        run_cli(["sweep", "--c0-range", "1:2"])
    assert ei.value.code == 64


def test_plot_solve_and_determinism(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run_cli(["plot", *SOLVE_FLAGS, "--out", str(out1)]) == 0
    assert run_cli(["plot", *SOLVE_FLAGS, "--out", str(out2)]) == 0
    svg1 = (out1 / "profile.svg").read_bytes()
    svg2 = (out2 / "profile.svg").read_bytes()
    assert svg1 == svg2
    assert svg1.startswith(b"<svg")
    assert b"path" in svg1


def test_plot_from_csv(tmp_path):
    run_cli(["solve", *SOLVE_FLAGS, "--out", str(tmp_path)])
    code = run_cli(["plot", "--in", str(tmp_path / "profile.csv"),
                    "--out", str(tmp_path / "svg")])
    assert code == 0
    assert (tmp_path / "svg" / "profile.svg").exists()


def test_plot_rejects_blowup(tmp_path):
    code = run_cli(["plot", "--c0", "5", "--lambda", "0", "--p", "0.1",
                    "--w0p", "1", "--out", str(tmp_path)])
    assert code == 2


def test_mesh_default_resolution(tmp_path):
    code = run_cli(["mesh", *SOLVE_FLAGS, "--out", str(tmp_path)])
    assert code == 0
    verts, faces = _read_obj(tmp_path / "mesh.obj")
    n_theta, n_prof = 128, 256
    assert len(verts) == n_theta * (2 * n_prof - 1) + 2
    # Euler characteristic via the edge set
    edges = set()
    for f in faces:
        for a, b in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
            edges.add((min(a, b), max(a, b)))
    V, E, F = len(verts), len(edges), len(faces)
    assert V - E + F == 2
    # watertight: every edge borders exactly two triangles
    from collections import Counter
    cnt = Counter()
    for f in faces:
        for a, b in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
            cnt[(min(a, b), max(a, b))] += 1
    assert set(cnt.values()) == {2}
    # quadrature comparison
    from helfrich import integrate, surface_totals, HelfrichParams
    tot = surface_totals(integrate(HelfrichParams(1.0, 0.25, 1.0), 0.05))
    area, volume = mesh_area_volume(np.array(verts), np.array(faces))
    assert abs(area - tot.area) / tot.area <= 0.01
    assert abs(volume - tot.volume) / tot.volume <= 0.01


def _read_obj(path):
    verts, faces = [], []
    for line in path.read_text().splitlines():
        parts = line.split()
        if parts[0] == "v":
            verts.append([float(v) for v in parts[1:]])
        elif parts[0] == "f":
            faces.append([int(v) - 1 for v in parts[1:]])
    return verts, faces


def test_mesh_rejects_blowup(tmp_path):
    code = run_cli(["mesh", "--c0", "5", "--lambda", "0", "--p", "0.1",
                    "--w0p", "1", "--out", str(tmp_path)])
    assert code == 2


def test_solve_determinism(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    run_cli(["solve", *SOLVE_FLAGS, "--format", "csv,json,svg", "--out", str(out1)])
    run_cli(["solve", *SOLVE_FLAGS, "--format", "csv,json,svg", "--out", str(out2)])
    for name in ("profile.csv", "report.json", "profile.svg"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("OUTPUT_DIR", str(tmp_path / "env_out"))
    run_cli(["solve", *SOLVE_FLAGS])
    assert (tmp_path / "env_out" / "report.json").exists()


def test_config_file_and_unknown_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"c0": 1, "lambda": 0.25, "p": 1, "w0p": 0.05}))
    assert run_cli(["solve", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    cfg.write_text(json.dumps({"c0": 1, "nonsense": 2}))
    with pytest.raises(SystemExit) as ei:
        run_cli(["solve", "--config", str(cfg), "--out", str(tmp_path)])
    assert ei.value.code == 64


@settings(max_examples=25, deadline=None)
@given(flag_keys=st.sets(st.sampled_from(["c0", "lambda", "p", "w0p", "rel-tol"])),
       cfg_keys=st.sets(st.sampled_from(["c0", "lambda", "p", "w0p", "rel-tol"])))
def test_config_precedence_property(flag_keys, cfg_keys, tmp_path_factory):
    """Flag beats config file beats default, for any key subset."""
    flag_vals = {"c0": 2.0, "lambda": 0.5, "p": 2.0, "w0p": 0.01, "rel-tol": 1e-7}
    cfg_vals = {"c0": 3.0, "lambda": 0.7, "p": 3.0, "w0p": 0.02, "rel-tol": 1e-6}
    defaults = {"c0": None, "lambda": None, "p": None, "w0p": None,
                "rel-tol": 1e-10}
    argv = ["solve"]
    for k in sorted(flag_keys):
        argv += [f"--{k}", repr(flag_vals[k])]
    parser = cli.build_parser()
    args = parser.parse_args(argv)
    config = {k: cfg_vals[k] for k in cfg_keys}
    opts = cli.PARAM_OPTS + [cli.W0P_OPT] + cli.SOLVER_OPTS
    resolved = cli._resolve(parser, args, opts, config)
    by_flag = {cli._flag_key(o.flag): o.dest for o in opts}
    for k in ("c0", "lambda", "p", "w0p", "rel-tol"):
        want = (flag_vals[k] if k in flag_keys
                else cfg_vals[k] if k in cfg_keys
                else defaults[k])
        assert resolved[by_flag[k]] == want

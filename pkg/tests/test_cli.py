import csv
import json

import jsonschema
import numpy as np
import pytest

from capillary_orlicz import body as cb
from capillary_orlicz.cli import load_schema, main

MESH = ["--resolution", "16x32"]


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_make_body_cap(tmp_path, capsys):
    path = tmp_path / "K.json"
    code, rec = run(["make-body", "cap", "--r", "1", "--theta", "1.0471975512", "--n", "2",
                     *MESH, "--out", str(path)], capsys)
    assert code == 0 and rec["valid"]
    K = cb.load_body(path)
    assert np.allclose(K.u, 1.0, atol=1e-9)
    jsonschema.validate(json.loads(path.read_text()), load_schema("body"))


def test_make_body_perturbed(tmp_path, capsys):
    code, rec = run(["make-body", "perturbed", "--eps", "0.05", "--mode", "cos2", *MESH,
                     "--out", str(tmp_path / "P.json")], capsys)
    assert code == 0 and rec["valid"]
    assert rec["u_range"][1] - rec["u_range"][0] > 1e-3


def test_make_body_invalid_radius(capsys):
    assert main(["make-body", "cap", "--r", "-1"]) == 2


def test_bad_arguments(capsys):
    assert main(["make-body", "cap", "--resolution", "abc"]) == 2
    assert main(["solve", "--phi", "x^0.5", *MESH]) == 2
    assert main(["nonsense"]) == 2


def test_measure_and_combine(tmp_path, capsys):
    k, l, m = (str(tmp_path / f) for f in ("K.json", "L.json", "M.json"))
    main(["make-body", "cap", "--r", "2", *MESH, "--out", k])
    main(["make-body", "translate", "--r", "1", "--x", "0.05,0.0", *MESH, "--out", l])
    capsys.readouterr()
    code, rec = run(["measure", k, "--phi", "x^3", "--csv", str(tmp_path / "d.csv")], capsys)
    assert code == 0
    jsonschema.validate(rec, load_schema("measure"))
    assert rec["volume"] == pytest.approx(8 * 5 * np.pi / 24, rel=1e-4)
    assert rec["orlicz_ratio"] == pytest.approx(1.0)
    with open(tmp_path / "d.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 16 * 32 and "cone_volume" in rows[0]
    code, rec = run(["combine", k, l, "--phi", "x^3", "--alpha", "0.5", "--beta", "0.5",
                     "--out", m], capsys)
    assert rec["root_residual"] <= 1e-11
    assert cb.load_body(m).mesh.resolution == (16, 32)


def test_measure_missing_file(tmp_path, capsys):
    assert main(["measure", str(tmp_path / "missing.json")]) == 2


def test_verify_suites(tmp_path, capsys):
    code, rec = run(["verify", "--suite", "orlicz-minkowski,minkowski,af", "--seed", "7",
                     "--pairs", "4", "--resolution", "32x64"], capsys)
    assert code == 0 and rec["all_passed"]
    jsonschema.validate(rec, load_schema("verify"))


def test_verify_variational(capsys):
    code, rec = run(["verify", "--suite", "variational", "--seed", "7", "--pairs", "3",
                     "--resolution", "32x64", "--phi", "x^3;x^3+x^4"], capsys)
    assert code == 0
    assert all(r["relative_error"] <= 1e-3 for r in rec["reports"])


def test_verify_is_deterministic(capsys):
    argv = ["verify", "--suite", "obm", "--seed", "3", "--pairs", "3", *MESH]
    main(argv)
    a = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == a


def test_verify_obtuse_angle_gate(capsys):
    code = main(["verify", "--suite", "obm,symmetry", "--theta", "2.0", "--pairs", "2", *MESH])
    cap = capsys.readouterr()
    assert code == 0
    assert "theta < pi/2" in cap.err
    rec = json.loads(cap.out)
    assert rec["skipped"] and {r["suite"] for r in rec["reports"]} == {"obm"}


def test_verify_unknown_suite(capsys):
    assert main(["verify", "--suite", "bogus"]) == 2


def test_solve_manufactured(tmp_path, capsys):
    trace = tmp_path / "t.csv"
    code, rec = run(["solve", "--phi", "x^4", "--f", "manufactured:r=1.5", *MESH,
                     "--trace", str(trace), "--out", str(tmp_path / "S.json"),
                     "--metadata", str(tmp_path / "meta.json")], capsys)
    assert code == 0 and rec["status"] == "converged"
    assert rec["max_error_over_r"] < 1e-10
    jsonschema.validate(rec, load_schema("solve"))
    assert "runtime_s" not in json.dumps(rec)
    assert "runtime_s" in json.loads((tmp_path / "meta.json").read_text())
    with open(trace) as fh:
        rows = list(csv.DictReader(fh))
    ts = [float(r["t"]) for r in rows]
    assert ts == sorted(ts) and ts[-1] == 1.0
    for step in {r["step"] for r in rows}:
        res = [float(r["residual"]) for r in rows if r["step"] == step]
        assert all(b <= a for a, b in zip(res, res[1:]))


def test_solve_equality_case(capsys):
    code, rec = run(["solve", "--phi", "x^3", "--f", "equality-case", "--form", "normalized",
                     "--resolution", "32x64"], capsys)
    assert code == 0
    assert rec["volume"] == pytest.approx(1.0, abs=1e-6)


def test_solve_data_file(tmp_path, capsys):
    from capillary_orlicz import mesh as cm
    m = cm.build_mesh(2, np.pi / 3, (16, 32))
    path = tmp_path / "f.json"
    path.write_text(json.dumps({"mesh": m.descriptor(), "f": (2.0 * m.ell).tolist()}))
    code, rec = run(["solve", "--phi", "x^4", "--f", str(path), *MESH], capsys)
    assert code == 0
    path.write_text(json.dumps({"f": (-m.ell).tolist()}))
    assert main(["solve", "--phi", "x^4", "--f", str(path), *MESH]) == 2


def test_solve_stall_exit_code(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("[solver]\nmax_iter = 1\ndt_min = 0.2\n")
    code, rec = run(["solve", "--config", str(cfg), "--phi", "x^4", "--f", "manufactured:r=3",
                     *MESH], capsys)
    assert code == 3 and rec["status"] == "stalled"


def test_solve_obtuse_angle_rejected(capsys):
    assert main(["solve", "--theta", "2.0", *MESH]) == 2


def test_config_merge_flags_win(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text('resolution = "16x32"\nphi = "x^4"\nf = "manufactured:r=1.3"\n'
                   "[solver]\ntol = 1e-10\n")
    code, rec = run(["solve", "--config", str(cfg)], capsys)
    assert code == 0 and rec["resolution"] == [16, 32] and rec["phi"]["p"] == 4.0
    code, rec = run(["solve", "--config", str(cfg), "--resolution", "8x16"], capsys)
    assert rec["resolution"] == [8, 16]
    js = tmp_path / "c.json"
    js.write_text(json.dumps({"resolution": [8, 16], "phi": {"kind": "power", "p": 5}}))
    code, rec = run(["solve", "--config", str(js), "--f", "manufactured:r=1.1"], capsys)
    assert code == 0 and rec["phi"]["p"] == 5.0


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"bogus": 1}')
    assert main(["solve", "--config", str(cfg)]) == 2
    cfg.write_text('{"solver": {"bogus": 1}}')
    assert main(["solve", "--config", str(cfg), *MESH]) == 2


def test_sweep(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, rec = run(["sweep", "--phi", "x^4", "--f", "manufactured:r=1.5",
                     "--resolutions", "8x16;16x32", "--csv", str(out)], capsys)
    assert code == 0 and len(rec["runs"]) == 2
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert [r["resolution"] for r in rows] == ["8x16", "16x32"]


def test_sweep_smooth_target_order(capsys):
    code, rec = run(["sweep", "--phi", "x^4", "--f", "smooth:eps=0.1",
                     "--resolutions", "16x32;32x64"], capsys)
    assert code == 0
    assert rec["runs"][0]["observed_order"] == pytest.approx(2.0, abs=0.3)


def test_bad_smooth_spec(capsys):
    assert main(["solve", "--f", "smooth:r=1", *MESH]) == 2
    assert main(["solve", "--f", "manufactured:r=-2", *MESH]) == 2

import json

import numpy as np
import pytest

from magspec import __version__, cli
from magspec import geometry as geo
from magspec.fem import SolverError


def _data_lines(text):
    return [l for l in text.splitlines() if l and not l.startswith("#")]


@pytest.mark.parametrize("text, kind, params", [
    ("disk:R=1", "disk", {"R": 1.0}),
    ("rectangle:w=2,h=1", "rectangle", {"w": 2.0, "h": 1.0}),
    ('{"kind": "annulus", "params": {"r_in": 1, "r_out": 2}}', "annulus", {"r_in": 1, "r_out": 2}),
])
def test_parse_domain(text, kind, params):
    spec = cli.parse_domain(text)
    assert spec.kind == kind and spec.params == params


def test_parse_tube_domain():
    spec = cli.parse_domain("tube:curve=circle,R=1.4142,h=0.1")
    assert spec.kind == "tube"


@pytest.mark.parametrize("text", ["disk:R", "disk:R=abc", "{bad json"])
def test_parse_domain_errors(text):
    with pytest.raises(cli.InputError):
        cli.parse_domain(text)


@pytest.mark.parametrize("text, expected", [("1:2:3", [1.0, 1.5, 2.0]), ("0.5,1", [0.5, 1.0])])
def test_parse_grid(text, expected):
    np.testing.assert_allclose(cli.parse_grid(text), expected)


@pytest.mark.parametrize("text", ["", "1:2", "0,1", "-1:2:3"])
def test_parse_grid_errors(text):
    with pytest.raises(cli.InputError):
        cli.parse_grid(text)


def test_version_exit_zero(capsys):
    assert cli.main(["--version"]) == 0
    assert __version__ in capsys.readouterr().out


def test_spectrum_disk(capsys):
    assert cli.main(["spectrum", "--domain", "disk:R=1", "--beta", "1", "--h", "0.1"]) == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert lines[0] == f"# magspec {__version__}" and lines[1].startswith("# config ")
    rows = _data_lines(out)
    assert rows[0] == "index,lambda,residual,method,beta,domain_id,h"
    assert len(rows) == 11
    lam = [float(r.split(",")[1]) for r in rows[1:]]
    assert np.all(np.diff(lam) >= 0) and 0 < lam[0] < 1


def test_spectrum_closedform(capsys):
    assert cli.main(["spectrum", "--domain", "disk:R=2", "--method", "closedform", "--k", "3"]) == 0
    assert len(_data_lines(capsys.readouterr().out)) == 4


def test_spectrum_closedform_needs_disk(capsys):
    assert cli.main(["spectrum", "--domain", "rectangle:w=1,h=1", "--method", "closedform"]) == 1


@pytest.mark.parametrize("argv", [
    ["spectrum", "--domain", "blob:R=1"],
    ["spectrum", "--domain", "disk:R=-1"],
    ["spectrum", "--domain", "disk:R=1", "--h", "0"],
    ["spectrum", "--domain", "disk:R=1", "--k", "0"],
    ["disk-branches", "--R-grid", ""],
    ["disk-branches", "--R-grid", "1:2"],
    ["figure", "other"],
    ["nonsense"],
])
def test_invalid_input_exit_one(argv, capsys):
    assert cli.main(argv) == 1


def test_solver_failure_exit_two(monkeypatch, capsys):
    def boom(*a, **kw):
        raise SolverError("no convergence")

    monkeypatch.setattr(cli, "fem_spectrum", boom)
    assert cli.main(["spectrum", "--domain", "disk:R=1", "--h", "0.2"]) == 2
    assert "solver error" in capsys.readouterr().err


def test_io_failure_exit_three(tmp_path, capsys):
    out = str(tmp_path / "missing" / "s.csv")
    assert cli.main(["spectrum", "--domain", "disk:R=1", "--h", "0.2", "--out", out]) == 3


def test_spectrum_files_deterministic(tmp_path):
    paths = [str(tmp_path / f"s{i}.csv") for i in range(2)]
    for p in paths:
        assert cli.main(["spectrum", "--domain", "ellipse:a=1,b=0.5", "--h", "0.1", "--k", "4",
                         "--out", p]) == 0
    a, b = (open(p, "rb").read() for p in paths)
    assert a == b
    meta = json.loads(open(paths[0] + ".json").read())
    assert meta["version"] == __version__ and meta["n_eigenvalues"] == 4
    assert f"# config {meta['config_hash']}" in a.decode()


def test_config_hash_depends_on_inputs():
    base = cli.RunConfig("spectrum", {"kind": "disk", "params": {"R": 1.0}})
    other = cli.RunConfig("spectrum", {"kind": "disk", "params": {"R": 1.0}}, beta=2.0)
    assert base.digest() == cli.RunConfig("spectrum", {"kind": "disk", "params": {"R": 1.0}}).digest()
    assert base.digest() != other.digest()


def test_disk_branches(capsys):
    assert cli.main(["disk-branches", "--R-grid", "1,2", "--n-max", "2"]) == 0
    rows = _data_lines(capsys.readouterr().out)
    assert rows[0] == "n,R,lambda1_n,residual"
    assert len(rows) == 1 + 2 * 3


def test_disk_branches_circle(capsys):
    assert cli.main(["disk-branches", "--R-grid", "1", "--circle"]) == 0
    rows = _data_lines(capsys.readouterr().out)
    assert float(rows[1].split(",")[1]) == pytest.approx(0.25)


def test_bounds_annulus_flags_inapplicable(tmp_path):
    out = tmp_path / "b.json"
    assert cli.main(["bounds", "--domain", "annulus:r_in=1,r_out=2", "--h", "0.1",
                     "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    status = {b["theorem"]: b["status"] for b in rep["bounds"]}
    assert status["area_quadratic"] == status["area_exponential"] == "inapplicable"
    assert status["universal"] == "pass" and status["rolling_radius"] == "conditional"
    assert not any(s == "fail" for s in status.values())
    assert "neumann_lambda2" not in rep
    assert rep["version"] == __version__


def test_bounds_disk_all_hold(tmp_path):
    out = tmp_path / "b.json"
    assert cli.main(["bounds", "--domain", "disk:R=1", "--h", "0.05", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert all(b["status"] != "fail" for b in rep["bounds"])
    assert sum(b["status"] == "pass" for b in rep["bounds"]) >= 5
    assert 0 < rep["lambda1"] < 1


def test_bad_constants_file(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"c": -1.0}))
    assert cli.main(["bounds", "--domain", "disk:R=1", "--h", "0.2", "--constants-file", str(p)]) == 1


def test_theta0(tmp_path):
    out = tmp_path / "t.json"
    assert cli.main(["theta0", "--out", str(out)]) == 0
    assert abs(json.loads(out.read_text())["theta0"] - 0.590106) < 5e-4


def test_figure_dvsn(capsys):
    assert cli.main(["figure", "dvsn", "--R-grid", "1,2"]) == 0
    rows = _data_lines(capsys.readouterr().out)[1:]
    for r in rows:
        _, d, n = map(float, r.split(","))
        assert d > n


def test_sweep_single_width(capsys):
    assert cli.main(["sweep", "--widths", "0.2"]) == 0
    rows = _data_lines(capsys.readouterr().out)
    assert len(rows) == 3
    for r in rows[1:]:
        f = r.split(",")
        assert float(f[2]) >= float(f[4])


def test_verify_fast(tmp_path, capsys):
    out = tmp_path / "v.json"
    assert cli.main(["verify", "--fast", "--out", str(out)]) == 0
    printed = capsys.readouterr().out.splitlines()
    assert len(printed) == 5 and all(l.startswith("[PASS]") for l in printed)
    assert json.loads(out.read_text())["fast"] is True


def test_verify_negative_control_exit_one(capsys):
    assert cli.main(["verify", "--fast", "--perturb", "1.5"]) == 1
    assert capsys.readouterr().out.splitlines()[-1].startswith("[FAIL]")


def test_domain_file(tmp_path, capsys):
    p = tmp_path / "d.json"
    p.write_text(json.dumps(geo.disk(1.0).to_dict()))
    assert cli.main(["spectrum", "--domain", str(p), "--h", "0.2", "--k", "2"]) == 0
    assert len(_data_lines(capsys.readouterr().out)) == 3

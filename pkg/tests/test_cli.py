import csv
import io
import json

import numpy as np
import pytest

from artifact import cli


@pytest.fixture
def s3file(tmp_path):
    f = tmp_path / "s3.json"
    f.write_text(json.dumps({"kind": "spheroid", "a": 1, "b": 3, "n_t": 40, "n_phi": 40}))
    return str(f)


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_evaluate_plane(s3file, tmp_path):
    out = tmp_path / "u.csv"
    rc = cli.main(["evaluate", "--surface", s3file, "--targets", "plane:-2,2,4,-4,4,3", "--out", str(out)])
    assert rc == 0
    rows = _rows(out)
    assert len(rows) == 12
    assert list(rows[0]) == ["x", "y", "z", "u", "method", "gate_estimate", "npan", "d_estimate"]
    assert {r["method"] for r in rows} <= {"regular", "s3q", "flagged"}


def test_evaluate_deterministic(s3file, tmp_path):
    args = ["evaluate", "--surface", s3file, "--targets", "normal:0.6,2.856,1e-3,1e-1,3", "--kernel",
            "laplace_dlp", "--eps", "1e-8"]
    cli.main(args + ["--out", str(tmp_path / "a.csv")])
    cli.main(args + ["--out", str(tmp_path / "b.csv")])
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_evaluate_oracle_and_stokes(s3file, tmp_path):
    out = tmp_path / "o.csv"
    rc = cli.main(["evaluate", "--surface", s3file, "--targets", "normal:0.6,2.856,1e-2,1e-1,2",
                   "--with-oracle", "--eps", "1e-8", "--out", str(out)])
    assert rc == 0
    assert all(float(r["abs_error"]) < 1e-7 for r in _rows(out))
    out = tmp_path / "st.csv"
    rc = cli.main(["evaluate", "--surface", '{"kind": "spheroid", "a": 1, "b": 2}', "--kernel", "stokes_dlp",
                   "--density", "const:0.3,-0.5,1", "--targets", "plane:0,0.5,2,0,0.5,2", "--out", str(out)])
    rows = _rows(out)
    assert rc == 0 and {"u", "u2", "u3"} <= set(rows[0])
    assert float(rows[0]["u"]) == pytest.approx(8 * np.pi * 0.3, rel=1e-8)


def test_estimate_map(s3file, tmp_path):
    out = tmp_path / "e.csv"
    rc = cli.main(["estimate-map", "--surface", s3file, "--targets", "normal:0.0,2.856,1e-2,1,4",
                   "--density", "1 + sin(6*phi + theta)*sin(theta)**2", "--with-oracle", "--out", str(out)])
    rows = _rows(out)
    assert rc == 0 and len(rows) == 4
    g = np.array([float(r["gate_estimate"]) for r in rows])
    e = np.array([float(r["abs_error"]) for r in rows])
    assert g[0] > g[-1] and e[0] > e[-1]


def test_validate_suite(tmp_path, capsys):
    out = tmp_path / "v.csv"
    rc = cli.main(["validate", "identity_quotient", "--out", str(out)])
    assert rc == 0
    assert capsys.readouterr().out.startswith("PASS identity_quotient")
    assert len(_rows(out)) == 50


def test_error_exits(s3file, capsys):
    assert cli.main(["evaluate", "--surface", "missing.json", "--targets", "plane:0,1,2,0,1,2"]) == 2
    assert "not found" in capsys.readouterr().err
    assert cli.main(["validate", "bogus"]) == 2
    assert cli.main(["evaluate", "--surface", s3file, "--targets", "plane:0,1"]) == 2
    assert cli.main(["evaluate", "--surface", s3file, "--targets", "plane:0,1,2,0,1,2",
                     "--density", "__import__('os')"]) == 2
    assert cli.main(["evaluate", "--surface", s3file, "--targets", "plane:0,1,2,0,1,2", "--kernel", "x"]) == 2
    assert cli.main([]) == 2


def test_parse_helpers():
    sig = cli.parse_density("const:2")
    assert sig(np.zeros(2), np.zeros(2)) == pytest.approx(2.0)
    f = cli.parse_density("sin(5*theta)*exp(-cos(phi)**2) + 1.03")
    th, ph = np.array([0.2, 1.0]), np.array([0.4, 3.0])
    from artifact import engine as en
    assert np.allclose(f(th, ph), en.fig1_density(th, ph))
    surf = cli.load_surface('{"kind": "trig", "beta": 0.3, "m": 2, "panels": [[0, 1.5], [1.5, 3.14159]]}')
    assert len(surf.param_maps) == 2 and surf.panels[-1][1] == np.pi
    with pytest.raises(cli.SpecError):
        cli.load_surface('{"kind": "cube"}')

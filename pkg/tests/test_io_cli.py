import json
import math

import numpy as np
import pytest

from freelyap import io as fio
from freelyap.cli import main
from freelyap.errors import DomainError
from freelyap.spectral_measures import atomic_measure, mp_measure, point_mass


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, mu in {"mp1": mp_measure(1.0), "mp2": mp_measure(2.0), "mp05": mp_measure(0.5),
                     "delta1": point_mass(1.0), "zero": point_mass(0.0)}.items():
        paths[name] = tmp_path / f"{name}.json"
        fio.save_measure(mu, paths[name])
    return paths


def test_measure_roundtrip(tmp_path):
    for mu in (mp_measure(2.0), mp_measure(0.5), atomic_measure({1.0: 0.5, 3.0: 0.5})):
        fio.save_measure(mu, tmp_path / "m.json")
        back = fio.load_measure(tmp_path / "m.json")
        assert back.atoms == mu.atoms and back.label == mu.label
        for k in (1, 2):
            assert abs(np.dot(back.quadrature()[1], back.quadrature()[0] ** k)
                       - np.dot(mu.quadrature()[1], mu.quadrature()[0] ** k)) < 1e-12


def test_measure_json_errors(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(DomainError):
        fio.load_measure(p)
    with pytest.raises(DomainError):
        fio.measure_from_dict({"atoms": [{"x": 1.0}]})
    with pytest.raises(DomainError):
        fio.measure_from_dict({"atoms": [{"x": 1.0, "mass": 0.5}]})
    with pytest.raises(DomainError):
        fio.measure_from_dict({"schema_version": 2, "atoms": [{"x": 1.0, "mass": 1.0}]})


def test_hash_and_json_nonfinite():
    assert fio.content_hash("abc") == fio.content_hash(b"abc")
    assert len(fio.measure_hash(mp_measure(2.0))) == 16
    assert fio.measure_hash(mp_measure(2.0)) != fio.measure_hash(mp_measure(3.0))
    assert json.loads(fio.dumps({"a": -math.inf, "b": np.float64(1.5)})) == {"a": None, "b": 1.5}


def test_csv_is_plain():
    text = fio.csv_text(["x", "y"], [[0.5, 1e-20], [-math.inf, 2]])
    assert text == "x,y\n0.5,-inf\n1e-20,2\n"


def test_cli_measure(tmp_path, capsys):
    out = tmp_path / "mp2.json"
    assert main(["measure", "--mp", "2", "-o", str(out)]) == 0
    d = json.loads(out.read_text())
    assert d["schema_version"] == 1 and d["atoms"] == []
    (seg,) = d["segments"]
    assert (seg["a"], seg["b"]) == (pytest.approx(0.17157, abs=1e-5), pytest.approx(5.82843, abs=1e-5))
    assert len(seg["values"]) == 257
    out = tmp_path / "mp05.json"
    assert main(["measure", "--mp", "0.5", "-o", str(out)]) == 0
    assert json.loads(out.read_text())["atoms"] == [{"x": 0.0, "mass": 0.5}]
    assert main(["measure", "--mp", "-1"]) == 2
    assert "positive" in capsys.readouterr().err
    assert main(["measure", "--atoms", "1:0.3,2:0.4,5:0.3"]) == 0
    assert main(["measure", "--atoms", "1:0.3"]) == 2
    assert main(["measure", "--bogus"]) == 2


def test_cli_lyapunov(files, tmp_path):
    out = tmp_path / "run"
    assert main(["lyapunov", "-i", str(files["mp1"]), "-o", str(out)]) == 0
    header, data = fio.read_csv(out / "profile.csv")
    assert header == ["t", "F", "f"]
    inner = data[1:-1]
    assert np.max(np.abs(inner[:, 2] - 0.5 * np.log(1 - inner[:, 0]))) < 1e-8
    assert main(["lyapunov", "-i", str(files["delta1"]), "-o", str(out)]) == 0
    _, data = fio.read_csv(out / "profile.csv")
    assert np.max(np.abs(data[:, 2])) < 1e-12
    assert main(["lyapunov", "-i", str(files["mp2"]), "--dist", "-o", str(out)]) == 0
    _, dist = fio.read_csv(out / "distribution.csv")
    ref = np.clip(np.exp(2 * dist[:, 0]) - 1, 0, 1)
    assert np.max(np.abs(dist[:, 1] - ref)) < 1e-8


def test_cli_lyapunov_json_and_svg(files, tmp_path):
    out = tmp_path / "run"
    assert main(["lyapunov", "-i", str(files["mp2"]), "--dist", "--format", "json", "-o", str(out)]) == 0
    env = json.loads((out / "profile.json").read_text())
    assert env["meta"]["source_measure_hash"] == fio.measure_hash(fio.load_measure(files["mp2"]))
    assert set(env["profile"]) >= {"t", "F", "f", "distribution"}
    assert main(["lyapunov", "-i", str(files["mp2"]), "--format", "svg", "-o", str(out)]) == 0
    first = (out / "profile.svg").read_bytes()
    assert first.startswith(b"<?xml")
    assert main(["lyapunov", "-i", str(files["mp2"]), "--format", "svg", "-o", str(out)]) == 0
    assert (out / "profile.svg").read_bytes() == first


def test_cli_bad_mass(tmp_path):
    d = fio.measure_to_dict(atomic_measure({1.0: 0.5, 2.0: 0.5}))
    d["atoms"][0]["mass"] = 0.4
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(d))
    assert main(["lyapunov", "-i", str(p), "-o", str(tmp_path)]) == 2
    assert main(["lyapunov", "-i", str(tmp_path / "missing.json"), "-o", str(tmp_path)]) == 2


def test_cli_det(files, tmp_path, capsys):
    assert main(["det", "-i", str(files["mp2"]), "--method", "both", "-o", str(tmp_path)]) == 0
    res = json.loads((tmp_path / "det.json").read_text())["results"]
    assert [r["det"] for r in res] == [pytest.approx(1.21306, abs=1e-5)] * 2
    assert main(["det", "-i", str(files["zero"]), "-o", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "det.json").read_text())["results"][0]["det"] == 1.0
    assert main(["det", "-i", str(files["mp1"]), "--method", "s_integral", "-o", str(tmp_path)]) == 2
    assert "invertible" in capsys.readouterr().err


def test_cli_newman(files, tmp_path):
    assert main(["newman", "-i", str(files["mp1"]), "-o", str(tmp_path)]) == 0
    header, data = fio.read_csv(tmp_path / "newman.csv")
    assert header == ["x", "H", "F_log_x", "abs_diff"]
    assert np.max(data[:, 3]) < 1e-6
    assert main(["newman", "-i", str(files["mp1"]), "--xmin", "0.6", "--xmax", "0.6",
                 "--points", "1", "-o", str(tmp_path)]) == 0
    _, data = fio.read_csv(tmp_path / "newman.csv")
    assert data[0, 1] == pytest.approx(0.36, abs=1e-12)
    assert main(["newman", "-i", str(files["delta1"]), "-o", str(tmp_path)]) == 0
    _, data = fio.read_csv(tmp_path / "newman.csv")
    assert np.all(data[data[:, 0] < 1, 1] == 0) and np.all(data[data[:, 0] >= 1, 1] == 1)


def test_cli_transform(files, tmp_path, capsys):
    assert main(["transform", "-i", str(files["mp1"]), "--kind", "cauchy", "--at", "-1",
                 "-o", str(tmp_path)]) == 0
    _, data = fio.read_csv(tmp_path / "transform.csv")
    assert data[0, 1] == pytest.approx(-(math.sqrt(5) - 1) / 2, abs=1e-12)
    assert main(["transform", "-i", str(files["mp1"]), "--kind", "psi_inverse", "--at", "0.5",
                 "-o", str(tmp_path)]) == 2


def _write_config(path, **kw):
    base = {"N": 32, "steps_n": 20, "trials": 2, "seed": 3, "singular_law": {"mp": {"lambda": 1.0}}}
    base.update(kw)
    path.write_text(json.dumps(base))
    return path


def test_cli_mc_manifest_reproducible(tmp_path):
    cfg = _write_config(tmp_path / "c.json", t_list=[0.5], compress_t=[0.5])
    a, b = tmp_path / "a", tmp_path / "b"
    # a loose gate so the tiny run passes
    assert main(["mc", "-c", str(cfg), "-o", str(a), "--tol", "1"]) == 0
    assert main(["mc", "-c", str(cfg), "-o", str(b), "--tol", "1"]) == 0
    ma = json.loads((a / "mc.manifest.json").read_text())
    mb = json.loads((b / "mc.manifest.json").read_text())
    assert ma["outputs"] == mb["outputs"]
    assert {o["path"] for o in ma["outputs"]} == {"mc_report.json", "mc_exponents.csv"}
    man = fio.RunManifest(ma["command_line"], ma["config_hash"],
                          outputs=[(o["path"], o["hash"]) for o in ma["outputs"]])
    assert man.verify(a)
    header, _ = fio.read_csv(a / "mc_exponents.csv")
    assert header == ["index", "k_over_N", "empirical", "analytic", "abs_error"]


def test_cli_mc_isometry(tmp_path):
    law = {"measure": fio.measure_to_dict(point_mass(1.0))}
    cfg = _write_config(tmp_path / "iso.json", singular_law=law, trials=1)
    assert main(["mc", "-c", str(cfg), "-o", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "mc_report.json").read_text())["report"]
    assert max(abs(v) for v in rep["empirical_exponents"]) <= 1e-12


def test_cli_mc_errors(tmp_path):
    cfg = _write_config(tmp_path / "c.json", N=1)
    assert main(["mc", "-c", str(cfg), "-o", str(tmp_path)]) == 2
    (tmp_path / "bad.json").write_text("[1, 2")
    assert main(["mc", "-c", str(tmp_path / "bad.json"), "-o", str(tmp_path)]) == 2
    # an impossible gate: exit 3 with the report still written
    cfg = _write_config(tmp_path / "g.json")
    out = tmp_path / "gate"
    assert main(["mc", "-c", str(cfg), "-o", str(out), "--tol", "0"]) == 3
    assert (out / "mc_report.json").exists()


def test_cli_verify_subset(tmp_path, capsys):
    assert main(["verify", "--only", "AC4", "AC5", "-o", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "AC4" in out and "PASS" in out
    assert main(["verify", "--only", "AC99"]) == 2

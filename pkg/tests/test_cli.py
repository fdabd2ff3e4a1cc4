import json
import math

import numpy as np
import pytest

from qerasure import cli, experiments, states
from qerasure.sampling import SeededStream, random_density

from conftest import PLUS


def write_state(path, state):
    path.write_text(json.dumps(cli.state_to_json(state)))
    return str(path)


def write_density(path, mat):
    mat = np.asarray(mat, dtype=complex)
    path.write_text(json.dumps({"dim": len(mat), "mat": [[[z.real, z.imag] for z in row] for row in mat]}))
    return str(path)


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize(
    "name,expect",
    [
        ("bell", {"V": 0, "C_AB": 1, "D_AB": 1, "C_full": 1}),
        ("ghz", {"V": 0, "C_AB": 0, "D_AB": 1, "C_full": 1, "D_full": 1}),
        ("plus", {"V": 1, "P": 0, "C_AB": 1, "C_full": 1}),
    ],
)
def test_bound(tmp_path, capsys, name, expect):
    state = {"bell": states.bell_ab(), "ghz": states.ghz(), "plus": states.product_state(PLUS, [1, 0])}[name]
    code, out, _ = run(capsys, "bound", write_state(tmp_path / "s.json", state))
    assert code == 0
    rep = json.loads(out)
    for k, v in expect.items():
        assert rep[k] == pytest.approx(v, abs=1e-12), k
    assert rep["route_used"] == "subfidelity"


def test_bound_malformed(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert run(capsys, "bound", str(p))[0] == 2
    p.write_text(json.dumps({"dims": [2, 2], "amps": []}))
    assert run(capsys, "bound", str(p))[0] == 2
    p.write_text(json.dumps({"dims": [2, 2, 1], "amps": [[1, 0]]}))
    assert run(capsys, "bound", str(p))[0] == 2
    assert run(capsys, "bound", str(tmp_path / "missing.json"))[0] == 2


def test_bound_norm_handling(tmp_path, capsys, caplog):
    amps = [[1.0, 0], [0, 0], [0, 0], [0, 0]]
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"dims": [2, 2, 1], "amps": [[1.01, 0]] + amps[1:]}))
    code, _, err = run(capsys, "bound", str(p))
    assert code == 3 and "unit norm" in err
    p.write_text(json.dumps({"dims": [2, 2, 1], "amps": [[1.00005, 0]] + amps[1:]}))
    code, out, _ = run(capsys, "bound", str(p))
    assert code == 0
    assert "renormalized" in caplog.text
    assert json.loads(out)["P"] == pytest.approx(1)


def test_subfidelity(tmp_path, capsys):
    a = write_density(tmp_path / "a.json", np.eye(2) / 2)
    code, out, _ = run(capsys, "subfidelity", a, a)
    assert code == 0
    rep = json.loads(out)
    assert rep["E"] == pytest.approx(1) and rep["F"] == pytest.approx(1)
    x = write_density(tmp_path / "x.json", [[1, 0], [0, 0]])
    y = write_density(tmp_path / "y.json", [[0.5, 0.5], [0.5, 0.5]])
    rep = json.loads(run(capsys, "subfidelity", x, y)[1])
    assert rep["E"] == pytest.approx(0.5) and rep["F_squared"] == pytest.approx(0.5)
    z = write_density(tmp_path / "z.json", np.eye(3) / 3)
    assert run(capsys, "subfidelity", x, z)[0] == 3
    n = write_density(tmp_path / "n.json", [[1.5, 0], [0, -0.5]])
    assert run(capsys, "subfidelity", x, n)[0] == 3
    h = write_density(tmp_path / "h.json", [[0.5, 0], [0, 0.25]])
    assert run(capsys, "subfidelity", x, h)[0] == 3


def test_subfidelity_random_pairs(tmp_path, capsys):
    for i in range(5):
        x = write_density(tmp_path / "x.json", random_density(4, SeededStream(1, i), rank=1 + i % 4))
        y = write_density(tmp_path / "y.json", random_density(4, SeededStream(2, i), rank=1))
        code, out, _ = run(capsys, "subfidelity", x, y)
        assert code == 0
        rep = json.loads(out)
        assert rep["E"] <= rep["F_squared"] + 1e-9


def test_sweep_byte_deterministic(tmp_path, capsys):
    argv = ("--quiet", "sweep", "--dc-list", "1,2", "--samples", "300", "--seed", "4")
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv, "--threads", "2")
    assert a == b
    rows = experiments.read_sweep_csv(a)
    assert [r["dC"] for r in rows] == [1, 2]
    # full precision: floats survive the text roundtrip
    first = a.splitlines()[1].split(",")
    assert float(first[2]) == rows[0]["mean_C"] and len(first[2]) > 10


def test_sweep_json_and_file(tmp_path, capsys):
    out = tmp_path / "sw.json"
    code, stdout, _ = run(capsys, "sweep", "--dc-list", "3", "--samples", "200", "--out", "json", "-o", str(out), "--quiet")
    assert code == 0 and stdout == ""
    data = json.loads(out.read_text())
    assert data["points"][0]["dC"] == 3


def test_sweep_bad_args(capsys):
    assert run(capsys, "sweep", "--dc-list", "2,1", "--samples", "200")[0] == 2
    assert run(capsys, "sweep", "--dc-list", "a", "--samples", "200")[0] == 2
    assert run(capsys, "sweep", "--dc-list", "1", "--samples", "10")[0] == 2
    assert run(capsys, "nonsense")[0] == 2


def test_seed_env_fallback(capsys, monkeypatch):
    argv = ("sweep", "--dc-list", "2", "--samples", "200", "--quiet")
    monkeypatch.setenv("ERASURE_SEED", "17")
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv, "--seed", "17")
    _, c, _ = run(capsys, *argv, "--seed", "18")
    assert a == b != c
    monkeypatch.setenv("ERASURE_SEED", "x")
    assert run(capsys, *argv)[0] == 2


def synthetic_csv(dcs, c=1.944):
    pts = []
    for dc in dcs:
        v = experiments.avg_visibility_analytic(2 * dc)
        pts.append(experiments.PointRecord(dc, 2 * dc, c * v, 1e-3, 0.0, 1.0, 1000, v))
    cfg = experiments.SweepConfig(tuple(dcs), 1000)
    return experiments.SweepResult(cfg, tuple(pts)).to_csv()


def test_fit(tmp_path, capsys):
    p = tmp_path / "sw.csv"
    p.write_text(synthetic_csv([10, 20, 40]))
    code, out, _ = run(capsys, "fit", str(p), "--affine")
    assert code == 0
    rep = json.loads(out)
    assert rep["c_hat"] == pytest.approx(1.944, rel=1e-12)
    assert rep["k_range"] == [10, 40]
    assert rep["intercept"] == pytest.approx(0, abs=1e-9)


def test_fit_errors(tmp_path, capsys):
    p = tmp_path / "sw.csv"
    p.write_text(synthetic_csv([10, 20]))
    assert run(capsys, "fit", str(p))[0] == 5
    p.write_text("dC,mean_C\n1,zzz\n")
    assert run(capsys, "fit", str(p))[0] == 2


def test_fit_stdin(capsys, monkeypatch):
    import io

    monkeypatch.setattr("sys.stdin", io.StringIO(synthetic_csv([10, 30, 50], c=2.0)))
    code, out, _ = run(capsys, "fit", "-")
    assert code == 0 and json.loads(out)["c_hat"] == pytest.approx(2.0)


def test_verify_builtin(capsys):
    code, out, _ = run(capsys, "verify", "--corpus", "builtin")
    rep = json.loads(out)
    assert code == 0 and rep["failures"] == []
    assert rep["max_route_delta"] < 1e-9
    assert rep["checks_run"] > 0


def test_verify_random_small(capsys):
    code, out, _ = run(capsys, "verify", "--corpus", "random", "--n", "40", "--seed", "3", "--attain-n", "5")
    rep = json.loads(out)
    assert code == 0, rep["failures"]
    assert rep["max_route_delta"] < 1e-9 and rep["max_route_delta_dim3"] < 1e-8
    assert rep["max_attainment_gap"] < 1e-4


def test_module_entry():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "qerasure", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "verify" in res.stdout

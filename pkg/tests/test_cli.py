from __future__ import annotations

import csv
import json

import numpy as np
import pytest

from netforms.cli import main, worker_count
from netforms.errors import InputError
from netforms.io import dumps, load_form_matrix, load_scenario

CYCLE = {
    "vertices": [{"id": "v1"}, {"id": "v2"}, {"id": "v3"}],
    "edges": [
        {"id": "e1", "from": "v2", "to": "v1"},
        {"id": "e2", "from": "v3", "to": "v2"},
        {"id": "e3", "from": "v1", "to": "v3"},
    ],
}
KITE = {
    "vertices": [{"id": f"v{k}"} for k in range(1, 5)],
    "edges": [
        {"id": "e1", "from": "v2", "to": "v1"},
        {"id": "e2", "from": "v1", "to": "v2"},
        {"id": "e3", "from": "v1", "to": "v3"},
        {"id": "e4", "from": "v3", "to": "v4"},
        {"id": "e5", "from": "v2", "to": "v4"},
    ],
}
PATH3 = {
    "vertices": [{"id": f"v{k}"} for k in range(1, 5)],
    "edges": [{"id": f"e{k}", "from": f"v{k}", "to": f"v{k + 1}"} for k in range(1, 4)],
}
DIRICHLET_EDGE = {
    "vertices": [{"id": "a", "infinite": True}, {"id": "b", "infinite": True}],
    "edges": [{"id": "e", "from": "a", "to": "b"}],
}


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze(tmp_path, capsys):
    code, out, _ = _run(capsys, "analyze", _write(tmp_path / "f.json", KITE))
    rep = json.loads(out)
    assert code == 0
    assert rep["classification"]["eulerian"] is False and rep["classification"]["bipartite"] is False
    assert rep["incidence"]["signed"][0] == [1, -1, -1, 0, 0]
    assert rep["degrees"]["v1"] == {"in": 1, "out": 2, "degree": 3, "infinite": False}
    code, out, _ = _run(capsys, "analyze", _write(tmp_path / "c.json", CYCLE))
    assert json.loads(out)["classification"]["eulerian"] is True


def test_analyze_dangling_edge(tmp_path, capsys):
    bad = {"vertices": [{"id": "a"}], "edges": [{"id": "broken", "from": "a", "to": "zz"}]}
    code, out, err = _run(capsys, "analyze", _write(tmp_path / "b.json", bad))
    assert code == 2 and "broken" in err and out == ""


def test_analyze_unreadable(tmp_path, capsys):
    assert _run(capsys, "analyze", str(tmp_path / "missing.json"))[0] == 2
    (tmp_path / "junk.json").write_text("{not json")
    assert _run(capsys, "analyze", str(tmp_path / "junk.json"))[0] == 2


def test_admissible(tmp_path, capsys):
    avg = _write(tmp_path / "avg.json", {"kind": "averaging"})
    code, out, _ = _run(capsys, "admissible", _write(tmp_path / "c.json", CYCLE), avg, "--oracle-samples", "20")
    rep = json.loads(out)
    assert code == 0 and rep["admissible"] and rep["oracle"]["agrees"]
    code, out, _ = _run(capsys, "admissible", _write(tmp_path / "p.json", PATH3), avg)
    rep = json.loads(out)
    assert code == 1 and rep["witness"]["vertex"] in {"v1", "v2", "v3", "v4"}
    wrong = _write(tmp_path / "w.json", {"kind": "matrix", "rows": [[1, 0], [0, 1]]})
    assert _run(capsys, "admissible", str(tmp_path / "c.json"), wrong)[0] == 2


def _scenario(tmp_path, name, spec):
    _write(tmp_path / "edge.json", DIRICHLET_EDGE)
    _write(tmp_path / "cyc.json", CYCLE)
    return _write(tmp_path / name, spec)


def test_simulate_decay(tmp_path, capsys):
    sc = _scenario(tmp_path, "decay.json", {
        "scenario": "network_heat", "graph": "edge.json", "mesh": {"n": 128}, "lumped": False,
        "stepper": {"scheme": "crank_nicolson", "dt": 1e-4, "T": 0.1},
        "initial": {"kind": "sine", "mode": 1},
        "probes": [{"name": "decay_rate", "expected": float(np.pi**2)}],
    })
    out_csv = tmp_path / "t.csv"
    summary = tmp_path / "s.json"
    code, out, _ = _run(capsys, "simulate", sc, "--out", str(out_csv), "--summary", str(summary))
    rep = json.loads(summary.read_text())
    assert code == 0 and out == ""
    assert rep["probes"]["decay_rate"]["relative_error"] < 0.01
    assert rep["steps"] == 1000
    rows = list(csv.reader(out_csv.open()))
    assert rows[0][:2] == ["t", "dof_0"] and len(rows) == 1002
    assert len(rows[0]) == 1 + rep["state_size"]


def test_simulate_invariance_and_mass(tmp_path, capsys):
    sc = _scenario(tmp_path, "inv.json", {
        "scenario": "network_heat", "graph": "cyc.json", "mesh": {"n": 32},
        "stepper": {"scheme": "crank_nicolson", "dt": 1e-3, "T": 0.05},
        "initial": {"kind": "cosine", "mode": 2},
        "probes": [{"name": "invariance", "subspace": {"kind": "averaging"}}, "mass"],
    })
    code, out, _ = _run(capsys, "simulate", sc)
    rep = json.loads(out)
    assert code == 0
    assert rep["probes"]["invariance"]["status"] == "pass" and rep["probes"]["mass"]["status"] == "pass"


def test_simulate_dynamic_and_wave(tmp_path, capsys):
    sc = _scenario(tmp_path, "dyn.json", {
        "scenario": "dynamic_bc", "mesh": {"n": 32},
        "stepper": {"scheme": "backward_euler", "dt": 1e-3, "T": 0.2},
        "initial": {"u": {"kind": "cosine", "mode": 1}, "w": [0.5, -0.5]},
        "probes": ["linf", "domination"],
    })
    code, out, _ = _run(capsys, "simulate", sc)
    rep = json.loads(out)
    assert code == 0 and rep["probes"]["domination"]["status"] == "pass"
    assert rep["probes"]["linf"]["search"]["found"] is True
    sc = _scenario(tmp_path, "wave.json", {
        "scenario": "damped_wave", "alpha": [1, 0], "mesh": {"n": 32},
        "stepper": {"scheme": "crank_nicolson", "dt": 1e-3, "T": 0.1},
        "initial": {"u": {"kind": "cosine", "mode": 2}}, "probes": ["energy", "even_symmetry"],
    })
    code, out, _ = _run(capsys, "simulate", sc)
    rep = json.loads(out)
    assert code == 0 and rep["probes"]["energy"]["status"] == "pass"


def test_simulate_input_errors(tmp_path, capsys):
    base = {"scenario": "network_heat", "graph": "cyc.json", "mesh": {"n": 8},
            "stepper": {"scheme": "backward_euler", "dt": 0, "T": 0.1}}
    assert _run(capsys, "simulate", _scenario(tmp_path, "a.json", base))[0] == 2
    base["stepper"]["dt"] = 0.01
    base["probes"] = ["nonsense"]
    assert _run(capsys, "simulate", _scenario(tmp_path, "b.json", base))[0] == 2
    assert _run(capsys, "simulate", _scenario(tmp_path, "c.json", {"scenario": "other"}))[0] == 2


def test_simulate_is_deterministic(tmp_path, capsys):
    sc = _scenario(tmp_path, "d.json", {
        "scenario": "dynamic_bc", "mesh": {"n": 16}, "seed": 4,
        "stepper": {"scheme": "backward_euler", "dt": 1e-3, "T": 0.05},
        "initial": {"u": {"kind": "cosine", "mode": 1}}, "probes": ["linf"],
    })
    first = _run(capsys, "simulate", sc, "--out", str(tmp_path / "1.csv"))
    second = _run(capsys, "simulate", sc, "--out", str(tmp_path / "2.csv"))
    assert first == second
    assert (tmp_path / "1.csv").read_bytes() == (tmp_path / "2.csv").read_bytes()


def test_irreducible(tmp_path, capsys):
    code, out, _ = _run(capsys, "irreducible", _write(tmp_path / "c.json", CYCLE))
    assert code == 0 and json.loads(out)["irreducible"] is True
    two = {
        "vertices": [{"id": "a"}, {"id": "b"}, {"id": "c", "infinite": True}, {"id": "d"}, {"id": "e"}],
        "edges": [
            {"id": "x1", "from": "a", "to": "b"}, {"id": "x2", "from": "b", "to": "c"},
            {"id": "x3", "from": "c", "to": "a"}, {"id": "y1", "from": "c", "to": "d"},
            {"id": "y2", "from": "d", "to": "e"}, {"id": "y3", "from": "e", "to": "c"},
        ],
    }
    code, out, _ = _run(capsys, "irreducible", _write(tmp_path / "t.json", two))
    rep = json.loads(out)
    assert code == 1 and len(rep["spans"]) == 2


def test_verify_combinatorial(capsys, monkeypatch):
    monkeypatch.setenv("NETFORMS_THREADS", "1")
    code, out, err = _run(capsys, "verify", "--suite", "combinatorial")
    rep = json.loads(out)
    assert [c["id"] for c in rep["criteria"]] == [1, 2, 4, 5]
    assert code == (0 if rep["passed"] else 1)
    assert len(err.strip().splitlines()) == 4
    monkeypatch.setenv("NETFORMS_THREADS", "4")
    assert _run(capsys, "verify", "--suite", "combinatorial")[1] == out


def test_verify_bad_arguments(capsys, monkeypatch):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--suite", "everything"])
    assert exc.value.code == 2
    monkeypatch.setenv("NETFORMS_THREADS", "zero")
    assert _run(capsys, "verify", "--suite", "combinatorial")[0] == 2


def test_worker_count(monkeypatch):
    monkeypatch.delenv("NETFORMS_THREADS", raising=False)
    assert worker_count() >= 1
    monkeypatch.setenv("NETFORMS_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("NETFORMS_THREADS", "-1")
    with pytest.raises(InputError):
        worker_count()


def test_dumps_handles_numpy_and_specials():
    s = dumps({"b": np.float64(np.inf), "a": np.array([1, 2]), "c": 1 + 2j, "d": np.bool_(True)})
    assert json.loads(s) == {"a": [1, 2], "b": "inf", "c": [1.0, 2.0], "d": True}


def test_loaders(tmp_path):
    fm = load_form_matrix(_write(tmp_path / "fm.json", {"dims": [1, 1], "rows": [[1, 0], [0, 1]]}))
    assert fm.dims == [1, 1]
    with pytest.raises(InputError):
        load_form_matrix(_write(tmp_path / "bad.json", {"rows": [[1]]}))
    _write(tmp_path / "cyc.json", CYCLE)
    sf = load_scenario(_write(tmp_path / "s.json", {
        "scenario": "network_heat", "graph": "cyc.json", "mesh": {"n": 4},
        "initial": {"kind": "vertex_hat", "vertex": "v2"},
    }))
    assert sf.scenario.initial_state().max() == 1.0 and sf.probes == []
    with pytest.raises(InputError):
        load_scenario(_write(tmp_path / "s2.json", {
            "scenario": "network_heat", "graph": "cyc.json", "initial": {"kind": "vertex_hat", "vertex": "nope"},
        }))

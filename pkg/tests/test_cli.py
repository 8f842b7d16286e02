import csv
import io
import json
import math

import pytest

from netinvest.cli import from_jsonable, jsonable, main, parse_grid, ParseFailure


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(p)


EDGE = {"op": "edge", "id": "e1"}
TWO = {"op": "parallel", "children": [{"op": "edge", "id": "a"},
                                      {"op": "series", "children": [{"op": "edge", "id": "b"}, {"op": "edge", "id": "c"}]}]}


def inst(tmp_path, graph=EDGE, n=2, res=None, name="inst.json"):
    res = res or {"type": "homogeneous", "R": 2, "d": 1}
    return write(tmp_path, name, {"graph": graph, "providers": n, "reservation": res})


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_wardrop_command(tmp_path, capsys):
    i = inst(tmp_path)
    b = write(tmp_path, "b.json", {"mode": "edge", "investments": {"0": {"e1": 0.25}, "1": {"e1": 0.25}}})
    code, out, _ = run(capsys, ["wardrop", i, b])
    rep = json.loads(out)
    assert code == 0 and rep["demand"] == 1.0 and rep["per_user_cost"] == 2.0


def test_wardrop_zero_and_scalar_mode(tmp_path, capsys):
    i = inst(tmp_path)
    b = write(tmp_path, "b.json", {"mode": "edge", "investments": {}})
    code, out, _ = run(capsys, ["wardrop", i, b])
    assert code == 0 and json.loads(out)["demand"] == 0.0 and json.loads(out)["sigma"] == "inf"
    s = write(tmp_path, "s.json", {"mode": "scalar", "investments": [0.25, 0.25]})
    code, out, _ = run(capsys, ["wardrop", i, s])
    assert json.loads(out)["demand"] == 1.0


@pytest.mark.parametrize("payload, code", [
    ({"mode": "edge", "investments": {"0": {"zz": 1.0}}}, 3),
    ({"mode": "edge", "investments": {"5": {"e1": 1.0}}}, 3),
    ({"mode": "scalar", "investments": [1.0]}, 3),
    ({"mode": "weird", "investments": {}}, 2),
    ({"investments": {"0": {"e1": "x"}}}, 2),
    ({"nothing": 1}, 2),
])
def test_wardrop_input_errors(tmp_path, capsys, payload, code):
    i = inst(tmp_path)
    b = write(tmp_path, "b.json", payload)
    assert run(capsys, ["wardrop", i, b])[0] == code


def test_parse_errors(tmp_path, capsys):
    assert run(capsys, ["spne", write(tmp_path, "x.json", "{not json")])[0] == 2
    assert run(capsys, ["spne", str(tmp_path / "missing.json")])[0] == 2
    bad_graph = inst(tmp_path, graph={"op": "series", "children": [EDGE]})
    code, _, err = run(capsys, ["spne", bad_graph])
    assert code == 2 and "2 children" in err
    assert run(capsys, ["spne", inst(tmp_path, n=0)])[0] == 2
    assert run(capsys, ["spne", inst(tmp_path, res={"type": "x"})])[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["spne"])
    assert exc.value.code == 2


def test_spne_command(tmp_path, capsys):
    code, out, _ = run(capsys, ["spne", inst(tmp_path)])
    rep = json.loads(out)
    assert code == 0 and rep["total"] == 0.5 and rep["bounds"] == [0.1875, 0.3125]
    code, out, _ = run(capsys, ["spne", inst(tmp_path, n=1, res={"type": "powerlaw", "alpha": 1})])
    assert json.loads(out)["exists"] is False
    code, out, _ = run(capsys, ["spne", inst(tmp_path, n=4)])
    rep = json.loads(out)
    assert rep["kind"] == "unique-point" and len(set(rep["investments"])) == 1


def test_spne_refuses_piecewise(tmp_path, capsys):
    i = inst(tmp_path, res={"type": "piecewise", "points": [[0, 1], [1, 0]]})
    assert run(capsys, ["spne", i])[0] == 3


def test_poa_command(tmp_path, capsys):
    code, out, _ = run(capsys, ["poa", inst(tmp_path, n=4)])
    rep = json.loads(out)
    assert code == 0 and rep["ppoa"] == pytest.approx(2.1213203, abs=1e-6)
    code, out, _ = run(capsys, ["poa", inst(tmp_path, n=3, res={"type": "powerlaw", "alpha": 0.5})])
    rep = json.loads(out)
    assert rep["poa"] is None and rep["ppoa"] == "inf"


def test_sweep_monotone_poa(tmp_path, capsys):
    i = inst(tmp_path, res={"type": "powerlaw", "alpha": 3})
    code, out, _ = run(capsys, ["sweep", i, "--grid", "n=2:10"])
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 9
    poa = [float(r["poa"]) for r in rows]
    assert poa == sorted(poa) and poa[0] == pytest.approx(1.0)


def test_sweep_grid_product_and_errors(tmp_path, capsys):
    i = inst(tmp_path)
    code, out, _ = run(capsys, ["sweep", i, "--grid", "n=2,3", "--grid", "R=1.5:2.5:0.5"])
    assert code == 0 and len(list(csv.DictReader(io.StringIO(out)))) == 6
    assert run(capsys, ["sweep", i, "--grid", "n=5:2"])[0] == 2
    assert run(capsys, ["sweep", i, "--grid", "alpha=2"])[0] == 2
    assert run(capsys, ["sweep", i])[0] == 2
    assert run(capsys, ["sweep", i, "--grid", "n=1.5"])[0] == 2


def test_sweep_is_deterministic_and_threaded(tmp_path, capsys, monkeypatch):
    i = inst(tmp_path, res={"type": "powerlaw", "alpha": 2})
    _, serial, _ = run(capsys, ["sweep", i, "--grid", "n=1:6", "--grid", "k=1,2"])
    monkeypatch.setenv("NIG_THREADS", "2")
    _, threaded, _ = run(capsys, ["sweep", i, "--grid", "n=1:6", "--grid", "k=1,2"])
    assert serial == threaded


def test_parse_grid():
    assert parse_grid("n=2:4") == ("n", [2, 3, 4])
    assert parse_grid("alpha=1.5,2,3") == ("alpha", [1.5, 2.0, 3.0])
    with pytest.raises(ParseFailure):
        parse_grid("z=1")
    with pytest.raises(ParseFailure):
        parse_grid("n=")


def test_verify_command(tmp_path, capsys):
    out_file = tmp_path / "report.json"
    code, _, _ = run(capsys, ["verify", inst(tmp_path, graph=TWO), "--trials", "20", "--out", str(out_file)])
    records = json.loads(out_file.read_text())
    assert code == 0
    assert {r["kind"] for r in records} == {"equilibrium", "theorem", "wardrop"}
    assert all(r["ok"] for r in records)


def test_verify_rejects_bad_flags(tmp_path, capsys):
    assert run(capsys, ["verify", inst(tmp_path), "--eps", "0"])[0] == 2
    assert run(capsys, ["verify", inst(tmp_path), "--trials", "0"])[0] == 2


def test_verify_exit_one_on_failure(tmp_path, capsys, monkeypatch):
    import netinvest.cli as cli
    from netinvest.verify import TrialRecord

    def broken(*args, **kwargs):
        return TrialRecord(0, "x", "equilibrium", 0, "m", 0.0, 1.0, 0, 0, True, False, "forced")

    monkeypatch.setattr(cli, "equilibrium_trial", broken)
    assert run(capsys, ["verify", inst(tmp_path), "--trials", "2"])[0] == 1


def test_infinity_round_trip():
    data = {"a": math.inf, "b": -math.inf, "c": 1.25, "d": None, "e": (1.0, math.inf)}
    text = json.dumps(jsonable(data), allow_nan=False)
    back = json.loads(text)
    assert back["a"] == "inf" and from_jsonable(back["a"]) == math.inf
    assert from_jsonable(back["b"]) == -math.inf
    assert back["c"] == 1.25 and back["d"] is None
    assert [from_jsonable(x) for x in back["e"]] == [1.0, math.inf]


def test_cli_output_deterministic(tmp_path, capsys):
    i = inst(tmp_path, graph=TWO)
    first = run(capsys, ["verify", i, "--trials", "5", "--seed", "3"])[1]
    second = run(capsys, ["verify", i, "--trials", "5", "--seed", "3"])[1]
    assert first == second

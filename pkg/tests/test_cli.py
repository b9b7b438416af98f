import csv
import io
import json
import math

import pytest

from cliffpert.circuit import Circuit, circuit_to_dict, clifford, rotation
from cliffpert.cli import main
from cliffpert.noise import NoiseSpec


@pytest.fixture
def one_rotation(tmp_path):
    path = tmp_path / "rx.json"
    path.write_text(json.dumps(circuit_to_dict(Circuit(1, [rotation("X", 0.3)]))))
    return path


@pytest.fixture
def small_circuit(tmp_path):
    c = Circuit(3, [clifford("h", 0), rotation("XZY", 1.9), clifford("cx", 0, 2), rotation("ZZI", -0.4)])
    path = tmp_path / "c.json"
    path.write_text(json.dumps(circuit_to_dict(c)))
    return path


def read_csv(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_expval_single_rotation(one_rotation, capsys):
    assert main(["expval", "--circuit", str(one_rotation), "--observable", "Z", "--threads", "1"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["expval"] == pytest.approx(math.cos(0.3))
    assert out["per_order"] == pytest.approx([math.cos(0.3), 0.0])
    assert set(out) == {"expval", "per_order", "cumulative", "terms_per_order", "cumulative_terms", "total_terms"}


def test_expval_csv_and_order(small_circuit, capsys):
    assert main(["expval", "--circuit", str(small_circuit), "--observable", "ZZZ", "--order", "1", "--csv"]) == 0
    rows = read_csv(capsys.readouterr().out)
    assert list(rows[0]) == ["K", "per_order", "cumulative", "terms_per_order", "cumulative_terms"]
    assert [r["K"] for r in rows] == ["0", "1"]


def test_expval_matches_oracle_command(small_circuit, capsys):
    main(["expval", "--circuit", str(small_circuit), "--observable", "XIZ"])
    engine = json.loads(capsys.readouterr().out)["expval"]
    main(["oracle", "--circuit", str(small_circuit), "--observable", "XIZ"])
    out = json.loads(capsys.readouterr().out)
    assert out["method"] == "statevector"
    assert engine == pytest.approx(out["expval"], abs=1e-12)


def test_expval_with_noise(small_circuit, tmp_path, capsys):
    noise = tmp_path / "noise.json"
    noise.write_text(json.dumps([NoiseSpec("amplitude_damping", 1, 0, lam=0.3).to_dict()]))
    assert main(["expval", "--circuit", str(small_circuit), "--observable", "ZZI", "--noise", str(noise)]) == 0
    assert "expval" in json.loads(capsys.readouterr().out)


def test_compile_writes_program(small_circuit, tmp_path, capsys):
    out = tmp_path / "prog.json"
    assert main(["compile", "--circuit", str(small_circuit), "--observable", "ZZZ", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert {"n", "gates", "observable", "sign"} <= set(data)
    assert all(abs(g["theta"]) <= math.pi / 4 + 1e-12 for g in data["gates"])


def test_byte_identical_output(small_circuit, capsys):
    args = ["expval", "--circuit", str(small_circuit), "--observable", "ZIZ", "--threads", "1"]
    main(args)
    first = capsys.readouterr().out
    main(args[:-1] + ["3"])
    assert capsys.readouterr().out == first


def test_qaoa_small(capsys):
    assert main(["qaoa", "--n", "12", "--D", "3", "--seed", "4", "--gamma-grid", "0.0:0.6:3", "--threads", "1"]) == 0
    text = capsys.readouterr().out
    assert text.startswith("# seed=4")
    rows = read_csv(text)
    assert list(rows[0]) == ["gamma", "C_K1", "C_Kfull", "seconds"]
    assert len(rows) == 3
    assert float(rows[0]["C_Kfull"]) == 0.0


def test_qaoa_orders(capsys):
    assert main(["qaoa-orders", "--n", "15", "--D", "1:2", "--runs", "3"]) == 0
    rows = read_csv(capsys.readouterr().out)
    assert list(rows[0]) == ["D", "max_order", "count"]
    assert {r["max_order"] for r in rows} == {"1"}
    assert sum(int(r["count"]) for r in rows) == 6


def test_layers(capsys):
    argv = ["layers", "--n", "10", "--p", "2", "--runs", "2", "--dtheta-grid", "0.1",
            "--order-grid", "0:3", "--threads", "1"]
    assert main(argv) == 0
    text = capsys.readouterr().out
    assert text.startswith("# seed=0")
    rows = read_csv(text)
    assert list(rows[0]) == ["seed", "dtheta", "K", "value", "reference", "abs_error",
                             "terms_at_order", "cumulative_terms", "reference_terms"]
    assert len(rows) == 8


def test_orderbound(capsys):
    assert main(["orderbound", "--theta", "0.2", "--delta-list", "0.01,0.05", "--n-range", "10:50:20"]) == 0
    rows = read_csv(capsys.readouterr().out)
    assert list(rows[0]) == ["N", "K_min_delta=0.01", "M_cum_delta=0.01", "K_min_delta=0.05", "M_cum_delta=0.05"]
    k01 = [int(r["K_min_delta=0.01"]) for r in rows]
    k05 = [int(r["K_min_delta=0.05"]) for r in rows]
    assert k01 == sorted(k01) and all(a >= b for a, b in zip(k01, k05))


def error_payload(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_missing_file(capsys):
    assert main(["expval", "--circuit", "/nonexistent/c.json", "--observable", "Z"]) == 2
    err = error_payload(capsys)
    assert err["error"] == "file_not_found"


def test_schema_error_names_field(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 2, "gates": [{"kind": "cx", "qubits": [0, 7]}]}))
    assert main(["expval", "--circuit", str(bad), "--observable", "ZZ"]) == 2
    err = error_payload(capsys)
    assert err["error"] == "schema" and err["field"] == "gates[0]"


def test_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    assert main(["oracle", "--circuit", str(bad), "--observable", "Z"]) == 2
    assert "line 1" in error_payload(capsys)["message"]


def test_unknown_flag(capsys):
    with pytest.raises(SystemExit) as info:
        main(["orderbound", "--bogus"])
    assert info.value.code == 2
    assert error_payload(capsys)["error"] == "usage"


def test_resource_limit_reported(small_circuit, capsys):
    assert main(["expval", "--circuit", str(small_circuit), "--observable", "ZZZ", "--max-terms", "1"]) == 2
    err = error_payload(capsys)
    assert err["error"] == "resource_limit"

import csv
import io
import json

import pytest
from sklearn.base import clone

from qccd_shuttle import cli
from qccd_shuttle.arch_graph import GridSpec, build_grid_graph
from qccd_shuttle.circuit import builtin, compile_circuit, full_register_access
from qccd_shuttle.estimator import NativeCompiler, ShuttleScheduler
from qccd_shuttle.exceptions import ScheduleFormatError, ValidationError
from qccd_shuttle.placement import random_placement
from qccd_shuttle.schedule_io import ScheduleDocument, document_to_dict, dumps, loads, read_schedule
from qccd_shuttle.scheduler import SchedulerConfig, run_schedule
from qccd_shuttle.verifier_oracle import verify_schedule

SPEC = GridSpec(3, 3, 1, 1)
G = build_grid_graph(SPEC)


def make_doc(seed=1, family="qft", n=4):
    circuit, _ = compile_circuit(builtin(family, n))
    p = random_placement(G, 6, seed)
    cfg = SchedulerConfig()
    return ScheduleDocument(SPEC, circuit, p, run_schedule(G, circuit, p, cfg), cfg, seed)


# -- schedule files ---------------------------------------------------------------
def test_document_round_trip():
    doc = make_doc()
    back = loads(dumps(doc))
    assert back.architecture == doc.architecture
    assert back.circuit.digest() == doc.circuit.digest()
    assert back.initial == doc.initial
    assert back.seed == 1 and back.config == doc.config
    assert [s.moves for s in back.schedule.steps] == [s.moves for s in doc.schedule.steps]
    assert dumps(back) == dumps(doc)
    assert verify_schedule(G, back.circuit, back.initial, back.schedule, back.config).ok


def test_tampered_hash_and_bad_json():
    data = document_to_dict(make_doc())
    data["header"]["circuit_hash"] = "0" * 16
    with pytest.raises(ScheduleFormatError, match="circuit_hash"):
        loads(json.dumps(data))
    with pytest.raises(ScheduleFormatError, match="JSON"):
        loads("{not json")
    data = document_to_dict(make_doc())
    data["steps"][0]["moves"] = [{"chain": "x", "from": 0, "to": 1}]
    with pytest.raises(ScheduleFormatError):
        loads(json.dumps(data))
    with pytest.raises(ScheduleFormatError):
        read_schedule("/nonexistent/schedule.json")


# -- estimator --------------------------------------------------------------------
def test_estimator_params_and_clone():
    est = ShuttleScheduler(arch=SPEC, occupancy=0.5, seed=3, duration_2q=2)
    params = est.get_params()
    assert params["seed"] == 3 and params["duration_2q"] == 2
    twin = clone(est).set_params(seed=4)
    assert twin.seed == 4 and est.seed == 3
    assert not hasattr(twin, "graph_")


def test_estimator_pipeline_matches_direct_calls():
    raw = [builtin("ghz", 4), builtin("qft", 3)]
    native = NativeCompiler().fit_transform(raw)
    est = ShuttleScheduler(arch=SPEC.to_dict(), seed=2).fit()
    schedules = est.predict(native)
    for c, s, p in zip(native, schedules, est.placements_):
        assert s.T_hat == run_schedule(G, c, random_placement(G, 6, 2)).T_hat
        assert verify_schedule(G, c, p, s, est.config_).ok
    assert est.score(native) == -sum(s.T_hat for s in schedules) / 2


def test_estimator_errors():
    with pytest.raises(ValidationError):
        ShuttleScheduler(arch=SPEC).predict([full_register_access(2)])
    est = ShuttleScheduler(arch=SPEC, occupancy=0.25).fit()
    with pytest.raises(ValidationError, match="fewer than"):
        est.predict([full_register_access(6)])
    with pytest.raises(ValidationError):
        est.predict(["not a circuit"])
    with pytest.raises(ValidationError):
        ShuttleScheduler(arch=SPEC, duration_1q=0).fit()


# -- command line -----------------------------------------------------------------
def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_schedule_then_verify(tmp_path, capsys):
    path = tmp_path / "s.json"
    code, out, _ = run(["schedule", "--arch", "3,3,1,1", "--circuit", "builtin:qft:4", "--seed", "1", "--out", str(path)], capsys)
    assert code == cli.EXIT_OK and out.startswith("T_hat=")
    code, out, _ = run(["verify", str(path)], capsys)
    assert code == cli.EXIT_OK and out.startswith("OK")
    data = json.loads(path.read_text())
    data["steps"][0]["moves"].append({"chain": 0, "from": 0, "to": 13})
    path.write_text(json.dumps(data))
    code, out, _ = run(["verify", str(path), "--json"], capsys)
    assert code == cli.EXIT_VIOLATIONS and json.loads(out)["ok"] is False


def test_exit_codes(tmp_path, capsys):
    qasm = tmp_path / "bad.qasm"
    qasm.write_text("OPENQASM 2.0;\nqreg q[2];\nfoo q[0];\n")
    arch = tmp_path / "arch.json"
    arch.write_text(json.dumps({"m": 3, "n": 3, "v": 1, "h": 1}))
    base = ["schedule", "--arch", str(arch)]
    assert run(base + ["--circuit", str(qasm)], capsys)[0] == cli.EXIT_PARSE
    assert run(base + ["--circuit", "builtin:qft"], capsys)[0] == cli.EXIT_PARSE
    assert run(["verify", str(tmp_path / "missing.json")], capsys)[0] == cli.EXIT_PARSE
    assert run(base + ["--circuit", "builtin:qft:8"], capsys)[0] == cli.EXIT_VALIDATION
    assert run(["schedule", "--arch", "3,3,0,1", "--circuit", "builtin:ghz:2"], capsys)[0] == cli.EXIT_VALIDATION
    assert run(base + ["--circuit", "builtin:qft:4", "--max-steps-guard", "2"], capsys)[0] == cli.EXIT_LIVELOCK
    assert run(base + ["--circuit", "builtin:ghz:4", "--occupancy", "1.0"], capsys)[0] == cli.EXIT_SATURATION
    code, _, err = run(["oracle", "--arch", "3,3,1,1", "--budget", "20"], capsys)
    assert code == cli.EXIT_BUDGET and '"states"' in err


def test_oracle_command_writes_verifiable_witness(tmp_path, capsys):
    out, wit = tmp_path / "o.json", tmp_path / "w.json"
    code, text, _ = run(["oracle", "--arch", "2,2,1,5", "--seed", "3", "--out", str(out), "--witness", str(wit)], capsys)
    assert code == cli.EXIT_OK and text.startswith("T_min=9")
    assert json.loads(out.read_text())["T_min"] == 9
    assert run(["verify", str(wit)], capsys)[0] == cli.EXIT_OK


def test_bench_csv_is_reproducible(tmp_path, capsys):
    archs = tmp_path / "archs.json"
    archs.write_text(json.dumps([[3, 3, 1, 1], {"m": 2, "n": 2, "v": 1, "h": 5}]))
    argv = ["bench", "--archs", str(archs), "--families", "fra,ghz", "--seeds", "0,1", "--oracle", "--no-timing"]
    outputs = []
    for k in range(3):
        path = tmp_path / f"b{k}.csv"
        assert run(argv + ["--out", str(path)], capsys)[0] == cli.EXIT_OK
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]
    rows = list(csv.DictReader(io.StringIO(outputs[0].decode())))
    assert [(r["type"], r["family"]) for r in rows] == [
        ("lattice", "fra"), ("lattice", "ghz"), ("racetrack", "fra"), ("racetrack", "ghz")
    ]
    assert rows[0]["t_cpu_mean"] == "" and rows[0]["T_min_per_seed"] == "10;9"
    assert rows[1]["T_min_per_seed"] == ""
    assert run(["bench", "--archs", "small", "--families", "nope"], capsys)[0] == cli.EXIT_VALIDATION

import itertools
import json
import random

import pytest

from ftre.architecture import primitive_time_ps, resolve_architecture
from ftre.circuit import Circuit, GateOp, OpDag
from ftre.errors import ValidationError
from ftre.layout import generate_layout
from ftre.pipeline import estimate
from ftre.report import (
    breakdowns,
    build_report,
    circuit_critical_path,
    critical_path,
    emit_report,
    op_durations_ps,
    primitive_dag,
    serial_time,
    validate_report,
)

DSM = resolve_architecture("preset:DSM")


def test_chain_and_parallel_chains():
    assert critical_path(OpDag.from_edges([3, 4, 5], [(0, 1), (1, 2)]))[0] == 12
    dag = OpDag.from_edges([4, 6, 3, 4], [(0, 1), (2, 3)])
    length, path = critical_path(dag)
    assert (length, path) == (10, [0, 1])


def _all_paths(n, edges, durations):
    succ = {i: [b for a, b in edges if a == i] for i in range(n)}
    has_pred = {b for _, b in edges}
    best = 0

    def walk(v, acc):
        nonlocal best
        acc += durations[v]
        best = max(best, acc)
        for s in succ[v]:
            walk(s, acc)

    for v in range(n):
        if v not in has_pred:
            walk(v, 0)
    return best


def test_random_dags_match_enumeration():
    rng = random.Random(4)
    for _ in range(200):
        n = rng.randint(1, 10)
        edges = [(a, b) for a, b in itertools.combinations(range(n), 2) if rng.random() < 0.3]
        durations = [rng.randint(0, 20) for _ in range(n)]
        length, path = critical_path(OpDag.from_edges(durations, edges))
        assert length == _all_paths(n, edges, durations)
        assert sum(durations[v] for v in path) == length
        assert all((a, b) in set(edges) for a, b in zip(path, path[1:]))


def test_circuit_path_agrees_with_dag():
    rng = random.Random(8)
    for _ in range(30):
        ops = []
        for _ in range(rng.randint(1, 25)):
            if rng.random() < 0.3:
                ops.append(GateOp("CNOT", tuple(rng.sample(range(4), 2))))
            else:
                ops.append(GateOp(rng.choice(["H", "S", "SE", "CultT"]), (rng.randrange(4),)))
        c = Circuit.build(4, ops, level="primitive")
        durations = op_durations_ps(c, DSM)
        assert circuit_critical_path(c, durations)[0] == critical_path(primitive_dag(c, DSM))[0]


def test_serial_time():
    empty = Circuit.build(1, [], level="primitive")
    assert serial_time(empty, DSM) == 0
    one = Circuit.build(1, [GateOp("SE", (0,))], level="primitive")
    assert serial_time(one, DSM) == critical_path(primitive_dag(one, DSM))[0] / 1e6
    two = Circuit.build(2, [GateOp("SE", (0,)), GateOp("SE", (1,))], level="primitive")
    assert serial_time(two, DSM) >= critical_path(primitive_dag(two, DSM))[0] / 1e6


def test_breakdown_of_serial_se():
    c = Circuit.build(1, [GateOp("SE", (0,))] * 3, level="primitive")
    length, path = circuit_critical_path(c, op_durations_ps(c, DSM))
    bd = breakdowns(c, path, DSM)
    t_se = primitive_time_ps(DSM, "SE")
    assert bd.by_primitive == {"SE": (3, 3 * t_se)}
    assert sum(bd.by_physical.values()) == length


def _report():
    c = Circuit.build(2, [GateOp("T", (0,)), GateOp("CNOT", (0, 1)), GateOp("H", (1,))],
                      level="clifford_t")
    from ftre.compiler import compile_to_primitives

    lay = generate_layout("dense", 2, 2)
    prog = compile_to_primitives(c, DSM, lay)
    return build_report(prog.circuit, DSM, lay, None, {"qubits": 2})


def test_report_validates_and_conserves():
    r = _report()
    obj = json.loads(emit_report(r)["report.json"])
    validate_report(obj)
    assert sum(v["ps"] for v in obj["by_primitive"].values()) == obj["critical_path_ps"]
    assert obj["physical_qubits"] == obj["d"] ** 2 * obj["logical_qubits"]


def test_broken_report_is_rejected():
    obj = json.loads(emit_report(_report())["report.json"])
    bad = dict(obj, physical_qubits=obj["physical_qubits"] + 1)
    with pytest.raises(ValidationError):
        validate_report(bad)
    with pytest.raises(ValidationError):
        validate_report({k: v for k, v in obj.items() if k != "fingerprint"})


def test_emit_is_deterministic(tmp_path):
    a, b = emit_report(_report()), emit_report(_report())
    assert a == b
    emit_report(_report(), tmp_path)
    assert (tmp_path / "report.json").read_text() == a["report.json"]
    rows = a["breakdown_primitive.csv"].splitlines()
    assert rows[0] == "kind,count,us,cumulative_us"
    us = [float(r.split(",")[2]) for r in rows[1:]]
    assert us == sorted(us, reverse=True)


def test_extra_factory_costs_one_patch():
    c = Circuit.build(2, [GateOp("Rz", (0,), angle=0.3), GateOp("CNOT", (0, 1))], level="clifford_rz")
    from dataclasses import replace

    reports = []
    for f in (3, 4):
        arch = replace(DSM, layout=replace(DSM.layout, t_factories=f))
        reports.append(estimate(c, arch, 0.01).report)
    a, b = reports
    assert b.logical_qubits == a.logical_qubits + 1
    assert b.physical_qubits - a.physical_qubits == a.d ** 2

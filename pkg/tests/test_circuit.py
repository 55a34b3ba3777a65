import itertools
import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from ftre.circuit import CLIFFORDS, Circuit, GateOp, build_dag, gate_counts
from ftre.errors import ConfigurationError, ValidationError


def test_empty_dag():
    dag = build_dag(Circuit.build(0, []), [])
    assert dag.n == 0 and not dag.edges


def test_single_qubit_chain():
    c = Circuit.build(1, [GateOp("H", (0,)), GateOp("S", (0,)), GateOp("H", (0,))])
    dag = build_dag(c, [1, 2, 3])
    assert set(dag.edges) == {(0, 1), (1, 2)}


def test_disjoint_ops_have_no_edges():
    c = Circuit.build(2, [GateOp("H", (0,)), GateOp("H", (1,))])
    assert not build_dag(c, {"H": 1.0}).edges


def test_unknown_duration_is_config_error():
    c = Circuit.build(1, [GateOp("T", (0,))])
    with pytest.raises(ConfigurationError):
        build_dag(c, {"H": 1.0})


def test_measure_controls_add_edge():
    ops = [GateOp("Measure", (0,)), GateOp("X", (1,), ctrl=0)]
    dag = build_dag(Circuit.build(2, ops), [1, 1])
    assert (0, 1) in dag.edges


def _random_circuit(rng, n_qubits, n_ops):
    ops = []
    for _ in range(n_ops):
        kind = rng.choice(["H", "S", "T", "CNOT", "Rz", "X"])
        if kind == "CNOT":
            ops.append(GateOp(kind, tuple(rng.sample(range(n_qubits), 2))))
        elif kind == "Rz":
            ops.append(GateOp(kind, (rng.randrange(n_qubits),), angle=rng.uniform(-3, 3)))
        else:
            ops.append(GateOp(kind, (rng.randrange(n_qubits),)))
    return Circuit.build(n_qubits, ops)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_dag_matches_brute_force(seed):
    rng = random.Random(seed)
    c = _random_circuit(rng, 4, rng.randrange(12))
    dag = build_dag(c, [1] * len(c))
    reach = set()
    for i, j in itertools.combinations(range(len(c)), 2):
        if set(c.ops[i].qubits) & set(c.ops[j].qubits):
            reach.add((i, j))
    # dag edges are the transitive reduction along qubit lines; closure must match pairwise conflicts
    closure = set(dag.edges)
    changed = True
    while changed:
        extra = {(a, d) for a, b in closure for c2, d in closure if b == c2} - closure
        closure |= extra
        changed = bool(extra)
    assert reach <= closure
    assert all(i < j for i, j in dag.edges)


def test_gate_counts_basic():
    c = Circuit.build(1, [GateOp("H", (0,)), GateOp("T", (0,)), GateOp("Rz", (0,), angle=0.3)])
    g = gate_counts(c)
    assert (g.k, g.l, g.t) == (1, 1, 1)
    e = gate_counts(Circuit.build(0, []))
    assert (e.k, e.l, e.t, e.total) == (0, 0, 0, 0)


def test_gate_counts_random_tally():
    rng = random.Random(3)
    c = _random_circuit(rng, 5, 100)
    tally = Counter()
    for op in c.ops:
        tally[op.kind] += 1
    g = gate_counts(c)
    assert g.by_kind == dict(tally)
    assert g.l == sum(v for k, v in tally.items() if k in CLIFFORDS)
    assert g.k == tally["Rz"] and g.t == tally["T"]


def test_op_validation():
    with pytest.raises(ValidationError):
        GateOp("H", (0,), angle=0.1)
    with pytest.raises(ValidationError):
        GateOp("CNOT", (0, 0))
    with pytest.raises(ValidationError):
        Circuit.build(1, [GateOp("CultT", (0,))])
    with pytest.raises(ValidationError):
        Circuit.build(1, [GateOp("X", (0,), ctrl=0)])

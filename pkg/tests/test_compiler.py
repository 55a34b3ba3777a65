import pytest

from ftre.architecture import OpTimer, primitive_time, resolve_architecture
from ftre.circuit import Circuit, GateOp
from ftre.compiler import (
    amove_sites,
    asap_schedule,
    compile_to_primitives,
    idling_pass,
    intent_multiset,
    lower_clifford,
    movement_pass,
    post_op_correction_pass,
)
from ftre.errors import ConfigurationError
from ftre.layout import DATA, generate_layout
from ftre.report import circuit_critical_path, op_durations_ps


def arch(name, **kw):
    return resolve_architecture(f"preset:{name}").with_kwargs(**kw)


def c2(n, ops):
    return Circuit.build(n, ops, level="clifford_t")


def kinds(circuit):
    return [op.kind for op in circuit.ops]


def bare(name):
    return arch(name, post_op_correction=False, idling_se=False)


def test_movement_clifford_mapping():
    prog = lower_clifford(c2(2, [GateOp("CNOT", (0, 1)), GateOp("H", (0,)), GateOp("S", (1,))]),
                          arch("DSM"), generate_layout("dense", 2, 1))
    assert kinds(prog.circuit) == ["CNOT", "H", "S"]


def test_pauli_is_virtual():
    a = arch("DSM")
    prog = lower_clifford(c2(1, [GateOp("X", (0,))]), a, generate_layout("dense", 1, 1))
    assert kinds(prog.circuit) == ["X"]
    assert primitive_time(a, "X") == 0


def test_lattice_s_is_teleported():
    lay = generate_layout("sandwich", 2, 1, 1)
    out = lower_clifford(c2(2, [GateOp("S", (0,))]), arch("DSNM"), lay).circuit
    assert "CultS" in kinds(out) and "Merge" in kinds(out)
    assert out.ops[-1].kind == "Z" and out.ops[-1].ctrl is not None


def test_movement_t_teleport_structure():
    out = lower_clifford(c2(1, [GateOp("T", (0,))]), arch("DSM"), generate_layout("dense", 1, 1)).circuit
    assert sorted(kinds(out)) == sorted(["CultT", "CNOT", "Measure", "S"])
    s = out.ops[-1]
    assert s.kind == "S" and out.ops[s.ctrl].kind == "Measure"


def test_lattice_t_has_controlled_merge():
    out = lower_clifford(c2(1, [GateOp("T", (0,))]), arch("DSNM"),
                         generate_layout("sandwich", 1, 1, 1)).circuit
    assert any(op.kind == "Merge" and op.ctrl is not None for op in out.ops)
    assert {"CultT", "CultS"} <= set(kinds(out))


def test_single_factory_recultivates():
    out = lower_clifford(c2(1, [GateOp("T", (0,)), GateOp("T", (0,))]), arch("DSM"),
                         generate_layout("dense", 1, 1)).circuit
    seq = kinds(out)
    assert seq.count("CultT") == 2
    first_measure = seq.index("Measure")
    second_cnot = len(seq) - 1 - seq[::-1].index("CNOT")
    assert "CultT" in seq[first_measure:second_cnot]


def test_zero_factories_is_config_error():
    with pytest.raises(ConfigurationError):
        lower_clifford(c2(1, [GateOp("T", (0,))]), arch("DSM"), generate_layout("dense", 1, 0))


def test_intents_are_preserved():
    ops = [GateOp("H", (0,)), GateOp("T", (0,)), GateOp("CNOT", (0, 1)), GateOp("Tdg", (1,))]
    prog = compile_to_primitives(c2(2, ops), arch("MZO"), generate_layout("dense", 2, 2))
    assert intent_multiset(prog.circuit) == {"CNOT": 1, "H": 1, "T": 1, "Tdg": 1}


def test_post_op_correction_counts():
    lay = generate_layout("dense", 2, 1)
    prim = lower_clifford(c2(2, [GateOp("H", (0,)), GateOp("S", (1,)), GateOp("CNOT", (0, 1))]),
                          arch("DSM"), lay).circuit
    off = arch("DSM", post_op_correction=False)
    assert post_op_correction_pass(prim, off) == prim
    added = post_op_correction_pass(prim, arch("DSM", syndrome_rounds_mode="1"))
    assert kinds(added).count("SE") == 3
    a_d = arch("DSM", syndrome_rounds_mode="d")
    se_d = [op for op in post_op_correction_pass(prim, a_d).ops if op.kind == "SE"][0]
    ratio = primitive_time(a_d, "SE", rounds=se_d.rounds) / primitive_time(a_d, "SE", rounds=1)
    assert ratio == pytest.approx(a_d.d)


def test_movement_dsm_adjacent_amove():
    a = arch("DSM")
    lay = generate_layout("dense", 2, 1)
    cells = lay.cells(DATA)
    prim = lower_clifford(c2(2, [GateOp("CNOT", (0, 1))]), a, lay).circuit
    out = movement_pass(prim, a, lay)
    assert kinds(out) == ["AMove", "CNOT"]
    assert out.ops[0].sites == amove_sites(a, cells[0], cells[1]) == 0
    assert primitive_time(a, "AMove", sites=0) == a.speeds.a_move.time_ps(0) / 1e6


def test_movement_ssm_cnot_zone_round_trip():
    a = arch("SSM")
    lay = generate_layout("dense", 2, 1)
    prim = lower_clifford(c2(2, [GateOp("CNOT", (0, 1))]), a, lay).circuit
    assert kinds(movement_pass(prim, a, lay)) == ["ZMove", "CNOT", "ZMove"]


def test_movement_mzo_readout():
    a = arch("MZO")
    lay = generate_layout("dense", 1, 1)
    prim = lower_clifford(c2(1, [GateOp("Measure", (0,))]), a, lay).circuit
    assert kinds(movement_pass(prim, a, lay)) == ["ZMove", "Measure"]


def test_movement_pass_rejects_lattice():
    lay = generate_layout("sandwich", 1, 1, 1)
    prim = lower_clifford(c2(1, [GateOp("H", (0,))]), arch("DSNM"), lay).circuit
    with pytest.raises(ConfigurationError):
        movement_pass(prim, arch("DSNM"), lay)


def _makespan(circuit, a):
    return max(asap_schedule(circuit, OpTimer(a).duration)[1], default=0)


def test_idling_fully_packed_is_unchanged():
    a = arch("DSM")
    prim = Circuit.build(2, [GateOp("SE", (0, 1))], level="primitive")
    assert idling_pass(prim, a) == prim


def test_idle_qubit_gains_se():
    a = arch("DSM")
    prim = Circuit.build(2, [GateOp("SE", (0,), rounds=5), GateOp("H", (1,))], level="primitive")
    out = idling_pass(prim, a)
    assert any(op.kind == "SE" and op.qubits == (1,) for op in out.ops)
    assert _makespan(out, a) == _makespan(prim, a)


@pytest.mark.parametrize("name", ["SSM", "MZO-fold", "DSM", "DSNM", "SSOQ"])
def test_idling_preserves_critical_path(name):
    a = arch(name)
    lay_spec = a.layout
    ops = [GateOp("H", (0,)), GateOp("T", (1,)), GateOp("CNOT", (0, 2)), GateOp("T", (2,)),
           GateOp("S", (1,)), GateOp("CNOT", (1, 2)), GateOp("Measure", (0,))]
    lay = generate_layout(lay_spec.strategy, 3, 2, 2 if a.is_lattice else 0)
    prog = compile_to_primitives(c2(3, ops), a.with_kwargs(idling_se=False), lay)
    with_idle = idling_pass(prog.circuit, a, lay.n_data)
    before = circuit_critical_path(prog.circuit, op_durations_ps(prog.circuit, a))[0]
    after = circuit_critical_path(with_idle, op_durations_ps(with_idle, a))[0]
    assert before == after
    assert len(with_idle.ops) >= len(prog.circuit.ops)


def test_disjoint_routes_do_not_block():
    lay = generate_layout("embedded", 4, 2, 2)
    a = bare("DSNM")
    prog = lower_clifford(c2(4, [GateOp("CNOT", (0, 1)), GateOp("CNOT", (2, 3))]), a, lay)
    r1, r2 = prog.reservations
    if set(r1.path) & set(r2.path):
        pytest.skip("layout routes overlap")
    first, second = prog.circuit.ops[r1.interval[0]], prog.circuit.ops[r2.interval[0]]
    assert not set(first.qubits) & set(second.qubits)


def test_shared_route_serializes():
    lay = generate_layout("embedded", 4, 2, 2)
    a = bare("DSNM")
    prog = lower_clifford(c2(4, [GateOp("CNOT", (0, 1)), GateOp("CNOT", (0, 1))]), a, lay)
    r1, r2 = prog.reservations
    assert len(r1.path) == 1  # neighbouring data patches share one ancilla cell
    starts, ends = asap_schedule(prog.circuit, OpTimer(a).duration)
    assert starts[r2.interval[0]] >= ends[r1.interval[0]]


@pytest.mark.parametrize("name,n_t", [("DSM", 1), ("DSM", 3), ("SSM-fold", 2), ("DSNM", 2)])
def test_factory_discipline_and_alphabet(name, n_t):
    import random

    a = arch(name)
    rng = random.Random(6)
    ops = []
    for _ in range(40):
        q = rng.randrange(3)
        kind = rng.choice(["T", "Tdg", "H", "S", "CNOT"])
        ops.append(GateOp(kind, (q, (q + 1) % 3)) if kind == "CNOT" else GateOp(kind, (q,)))
    lay = generate_layout(a.layout.strategy, 3, n_t, n_t if a.is_lattice else 0)
    out = compile_to_primitives(c2(3, ops), a, lay).circuit
    assert {op.kind for op in out.ops} <= a.primitive_kinds | {"X", "Y", "Z", "I"}
    factories = {i for i, cell in enumerate(lay.qubit_cells())
                 if cell in set(lay.t_factories) | set(lay.s_factories)}
    for f in factories:
        state = "fresh"  # fresh: never cultivated, ready: cultivated once since last use
        for op in out.ops:
            if f not in op.qubits:
                continue
            if op.kind in ("CultT", "CultS"):
                assert state != "ready"
                state = "ready"
            elif op.kind in ("CNOT", "Merge"):
                assert state == "ready"
                state = "used"

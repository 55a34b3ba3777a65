import math
import random

import numpy as np
import pytest
from scipy.stats import unitary_group

from ftre.circuit import CLIFFORD_RZ_ALPHABET, Circuit, GateOp, gate_counts
from ftre.errors import UnsupportedGateError, ValidationError
from ftre.stage1 import (
    circuit_unitary,
    decompose_multiqubit,
    equal_up_to_phase,
    euler_zyz,
    gate_matrix,
    kak_decompose,
    merge_eject,
    to_clifford_rz,
)
from ftre.workloads import trotter_workload

_TOFFOLI = np.eye(8, dtype=complex)
_TOFFOLI[[6, 7]] = _TOFFOLI[[7, 6]]


def test_toffoli_network():
    out = decompose_multiqubit(Circuit.build(3, [GateOp("Toffoli", (0, 1, 2))]))
    kinds = [op.kind for op in out.ops]
    assert kinds.count("CNOT") == 6
    assert kinds.count("T") + kinds.count("Tdg") == 7
    assert kinds.count("H") == 2
    assert equal_up_to_phase(circuit_unitary(out), _TOFFOLI) < 1e-12


def test_swap_is_three_cnots():
    out = decompose_multiqubit(Circuit.build(2, [GateOp("SWAP", (0, 1))]))
    assert out.ops == (GateOp("CNOT", (0, 1)), GateOp("CNOT", (1, 0)), GateOp("CNOT", (0, 1)))


def test_small_gates_are_fixpoint():
    c = Circuit.build(2, [GateOp("H", (0,)), GateOp("CZ", (0, 1))])
    assert decompose_multiqubit(c).ops == c.ops


def test_kak_identity_and_cnot():
    assert kak_decompose(np.eye(4)).cnot_count == 0
    cnot = gate_matrix(GateOp("CNOT", (0, 1)))
    dec = kak_decompose(cnot)
    assert dec.cnot_count == 1
    assert equal_up_to_phase(circuit_unitary(Circuit.build(2, dec.ops)), cnot) < 1e-9


def test_kak_haar():
    for u in unitary_group.rvs(4, size=100, random_state=11):
        dec = kak_decompose(u)
        assert dec.cnot_count <= 3
        assert equal_up_to_phase(circuit_unitary(Circuit.build(2, dec.ops)), u) <= 1e-9


def test_non_unitary_rejected():
    with pytest.raises(ValidationError):
        kak_decompose(np.ones((4, 4)))
    with pytest.raises(ValidationError):
        euler_zyz(np.array([[1, 1], [0, 1]]))


def test_zyz_examples():
    e = euler_zyz(np.eye(2))
    assert abs(e.alpha) < 1e-12 and abs(e.beta) < 1e-12 and abs(e.gamma) < 1e-12
    h = gate_matrix(GateOp("H", (0,)))
    e = euler_zyz(h)
    assert e.beta == pytest.approx(math.pi / 2)
    assert np.max(np.abs(e.matrix() - h)) < 1e-12
    for u in unitary_group.rvs(2, size=50, random_state=4):
        assert np.max(np.abs(euler_zyz(u).matrix() - u)) <= 1e-12


def test_merge_eject_inverse_pairs():
    c = Circuit.build(1, [GateOp("Rz", (0,), angle=0.2), GateOp("Rz", (0,), angle=-0.2)])
    assert merge_eject(c).ops == ()
    c = Circuit.build(2, [GateOp("CNOT", (0, 1)), GateOp("CNOT", (0, 1))])
    assert merge_eject(c).ops == ()


def test_merge_eject_random_two_qubit():
    rng = random.Random(5)
    for _ in range(30):
        ops = []
        for _ in range(20):
            kind = rng.choice(["H", "S", "T", "Rz", "CNOT", "X"])
            if kind == "CNOT":
                ops.append(GateOp(kind, tuple(rng.sample(range(2), 2))))
            elif kind == "Rz":
                ops.append(GateOp(kind, (rng.randrange(2),), angle=rng.uniform(-3, 3)))
            else:
                ops.append(GateOp(kind, (rng.randrange(2),)))
        c = Circuit.build(2, ops)
        m = merge_eject(c)
        assert len(m.ops) <= len(c.ops)
        assert equal_up_to_phase(circuit_unitary(m), circuit_unitary(c)) <= 1e-9


def test_rx_basis_change():
    out = to_clifford_rz(Circuit.build(1, [GateOp("Rx", (0,), angle=0.3)]))
    assert [op.kind for op in out.ops] == ["H", "Rz", "H"]
    assert out.ops[1].angle == pytest.approx(0.3)
    assert out.level == "clifford_rz"


def test_pure_clifford_has_no_rz():
    c = Circuit.build(2, [GateOp("H", (0,)), GateOp("CNOT", (0, 1)), GateOp("S", (1,))])
    assert gate_counts(to_clifford_rz(c)).k == 0


def test_output_alphabet_and_unitary():
    c = Circuit.build(3, [GateOp("Toffoli", (0, 1, 2)), GateOp("Ry", (1,), angle=0.7),
                          GateOp("T", (2,)), GateOp("SWAP", (0, 2))])
    out = to_clifford_rz(c)
    assert {op.kind for op in out.ops} <= CLIFFORD_RZ_ALPHABET
    assert equal_up_to_phase(circuit_unitary(out), circuit_unitary(c)) <= 1e-9


def test_workload_subcircuits_preserved():
    # extract ops touching only a random 3-qubit window and compare matrices
    big = trotter_workload()
    rng = random.Random(9)
    for _ in range(5):
        qs = rng.sample(range(big.n_qubits), 3)
        index = {q: i for i, q in enumerate(qs)}
        ops = [GateOp(op.kind, tuple(index[q] for q in op.qubits), op.angle)
               for op in big.ops if set(op.qubits) <= set(qs)]
        sub = Circuit.build(3, ops)
        assert equal_up_to_phase(circuit_unitary(to_clifford_rz(sub)), circuit_unitary(sub)) <= 1e-9


def test_merge_eject_rejects_wide_gates():
    with pytest.raises(UnsupportedGateError):
        merge_eject(Circuit.build(3, [GateOp("Toffoli", (0, 1, 2))]))

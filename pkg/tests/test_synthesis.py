import math

import pytest

from ftre.circuit import Circuit, GateOp, gate_counts
from ftre.errors import DomainError
from ftre.synthesis import SynthModel, expand_rz, synthesis_counts

NAT = SynthModel()


def test_counts_examples():
    assert synthesis_counts(NAT, 1.0) == (0, 0)
    assert synthesis_counts(NAT, 2.4e-5) == (54, 86)
    assert synthesis_counts(NAT, math.exp(-1)) == (5, 8)


def test_decimal_log_base():
    dec = SynthModel(log_base="decimal")
    assert synthesis_counts(dec, 1e-3) == (15, 24)


@pytest.mark.parametrize("eps", [0.0, -1e-3, 1.5])
def test_domain(eps):
    with pytest.raises(DomainError):
        synthesis_counts(NAT, eps)


def _c1(ops, n=2):
    return Circuit.build(n, ops, level="clifford_rz")


def test_no_rz_unchanged():
    c = _c1([GateOp("H", (0,)), GateOp("CNOT", (0, 1))])
    out = expand_rz(c, NAT, 1e-3)
    assert out.ops == c.ops and out.level == "clifford_t"


def test_single_rz_expansion():
    out = expand_rz(_c1([GateOp("Rz", (1,), angle=0.4)]), NAT, math.exp(-1))
    g = gate_counts(out)
    assert len(out.ops) == 13 and g.t == 5 and g.l == 8
    assert all(op.qubits == (1,) for op in out.ops)


def test_tally_over_many_rotations():
    ops = [GateOp("Rz", (i % 2,), angle=0.1 * i) for i in range(1, 12)] + [GateOp("H", (0,))]
    n_t, n_c = synthesis_counts(NAT, 1e-4)
    g = gate_counts(expand_rz(_c1(ops), NAT, 1e-4))
    assert g.t == 11 * n_t and g.l == 11 * n_c + 1 and g.k == 0


def test_controls_are_reindexed():
    ops = [GateOp("Rz", (0,), angle=0.3), GateOp("Measure", (1,)), GateOp("X", (0,), ctrl=1)]
    out = expand_rz(_c1(ops), NAT, math.exp(-1))
    assert out.ops[out.ops[-1].ctrl].kind == "Measure"

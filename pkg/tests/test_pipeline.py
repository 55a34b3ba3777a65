import pytest

from ftre.architecture import resolve_architecture
from ftre.circuit import Circuit, GateOp, gate_counts
from ftre.errors import ConfigurationError, ValidationError
from ftre.pipeline import estimate, solve_budget, stage1
from ftre.synthesis import synthesis_counts
from ftre.workloads import trotter_workload

DSM = resolve_architecture("preset:DSM")


def _small():
    ops = [GateOp("H", (0,)), GateOp("Rz", (1,), angle=0.4), GateOp("CNOT", (0, 1)),
           GateOp("Rx", (0,), angle=1.1)]
    return Circuit.build(2, ops)


def test_budget_sets_distance_and_repetitions():
    res = estimate(_small(), DSM, 0.01)
    assert res.report.d == res.budget.d == res.arch.d
    assert res.arch.rep_t == res.budget.rep
    n_t, _ = synthesis_counts(DSM.synthesis, res.budget.eps_rz)
    assert gate_counts(res.c2).t == 2 * n_t


def test_distance_override():
    res = estimate(_small(), DSM, 0.01, d_override=15)
    assert res.report.d == 15 and res.report.budget["d_override"] == 15


def test_grid_mode_is_feasible():
    res = estimate(_small(), DSM, 0.01, budget_mode="grid")
    assert res.budget.fidelity >= 0.99 and res.budget.method == "grid"


def test_unknown_budget_mode():
    with pytest.raises(ConfigurationError):
        solve_budget(DSM, 1, 1, 0.01, "magic")


def test_stage1_rejects_primitive_input():
    with pytest.raises(ValidationError):
        stage1(Circuit.build(1, [GateOp("SE", (0,))], level="primitive"))


def test_workload_shape_and_determinism():
    a, b = trotter_workload(), trotter_workload()
    assert a == b and a.n_qubits == 60
    c1 = stage1(a)
    assert gate_counts(c1).k == gate_counts(a).k > 200
    assert trotter_workload(seed=8) != a

"""End-to-end estimate: ingest, stage 1, error budget, Rz synthesis, stage 2, report."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .architecture import Architecture
from .budget import BudgetSolution, GridResult, sensitivity_grid, solve_halving
from .circuit import Circuit, gate_counts
from .compiler import CompiledProgram, compile_to_primitives
from .errors import ConfigurationError, ValidationError
from .report import ResourceReport, build_report
from .stage1 import to_clifford_rz
from .synthesis import SynthModel, expand_rz

BUDGET_MODES = ("halving", "grid")


@dataclass(frozen=True)
class EstimateResult:
    report: ResourceReport
    budget: BudgetSolution
    arch: Architecture
    c1: Circuit
    c2: Circuit
    program: CompiledProgram


def stage1(circuit: Circuit) -> Circuit:
    """Clifford+Rz form of an input circuit (already-lowered circuits pass through)."""
    if circuit.level == "clifford_rz":
        return circuit
    if circuit.level != "input":
        raise ValidationError(f"estimates start from an input or clifford_rz circuit, not {circuit.level}")
    return to_clifford_rz(circuit)


def grid_for(arch: Architecture, k: int, l: int, target_error: float) -> GridResult:
    from .budget import log_grid

    b = arch.budget
    return sensitivity_grid(
        k, l, target_error, arch.noise, b.cultivation, arch.synthesis,
        d_values=b.d_values,
        eps_rz_values=log_grid(b.eps_rz_min, b.eps_rz_max, b.points_per_decade),
        folded=arch.folded_cultivation,
    )


def solve_budget(arch: Architecture, k: int, l: int, target_error: float,
                 mode: str = "halving") -> BudgetSolution:
    if mode == "halving":
        return solve_halving(k, l, target_error, arch.noise, arch.budget.cultivation, arch.synthesis,
                             folded=arch.folded_cultivation, d_max=arch.budget.d_max)
    if mode == "grid":
        return grid_for(arch, k, l, target_error).best
    raise ConfigurationError(f"budget mode must be one of {', '.join(BUDGET_MODES)}")


@lru_cache(maxsize=16)
def _synthesize(c1: Circuit, model: SynthModel, eps_rz: float) -> Circuit:
    return expand_rz(c1, model, eps_rz)


def estimate(circuit: Circuit, arch: Architecture, target_error: float, budget_mode: str = "halving",
             d_override: int | None = None) -> EstimateResult:
    """Run the whole pipeline; ``target_error`` is 1 - target fidelity.

    The budget fixes d and the cultivation repetitions unless the
    architecture config pins them (``d_override`` / ``kwargs.rep_t``).
    """
    c1 = stage1(circuit)
    counts = gate_counts(c1)
    solution = solve_budget(arch, counts.k, counts.l, target_error, budget_mode)
    c2 = _synthesize(c1, arch.synthesis, solution.eps_rz)
    run_arch = arch.with_kwargs(
        d=d_override if d_override is not None else solution.d,
        rep_t=arch.rep_t if arch.rep_t is not None else solution.rep,
    )
    program = compile_to_primitives(c2, run_arch)
    c2_counts = gate_counts(c2)
    info = {
        "qubits": circuit.n_qubits,
        "input_ops": len(circuit.ops),
        "k": counts.k,
        "l": counts.l,
        "t_gates": c2_counts.t,
        "clifford_t_ops": len(c2.ops),
        "primitive_ops": len(program.circuit.ops),
        "target_error": target_error,
    }
    budget = solution.as_dict()
    if d_override is not None:
        budget["d_override"] = d_override
    report = build_report(program.circuit, run_arch, program.layout, budget, info)
    return EstimateResult(report, solution, run_arch, c1, c2, program)

"""Fault-tolerant quantum resource estimation.

Circuits are lowered in two stages (Clifford+Rz, then Clifford+T, then
architecture primitives), an error budget fixes the code distance and
synthesis precision, and the primitive circuit's critical path is the
runtime estimate.
"""

from .architecture import Architecture, load_architecture, preset_names, primitive_time, resolve_architecture
from .budget import NoiseModel, circuit_fidelity, ler, min_distance, sensitivity_grid, solve_halving
from .circuit import Circuit, GateOp, OpDag, build_dag
from .errors import FtreError
from .ingest import emit_native, emit_qasm, load_circuit, parse_native, parse_qasm
from .layout import LayoutGrid, generate_layout
from .pipeline import estimate
from .report import ResourceReport, critical_path

__version__ = "0.1.0"

__all__ = [
    "Architecture", "Circuit", "FtreError", "GateOp", "LayoutGrid", "NoiseModel", "OpDag",
    "ResourceReport", "build_dag", "circuit_fidelity", "critical_path", "emit_native", "emit_qasm",
    "estimate", "generate_layout", "ler", "load_architecture", "load_circuit", "min_distance",
    "parse_native", "parse_qasm", "preset_names", "primitive_time", "resolve_architecture",
    "sensitivity_grid", "solve_halving",
]

"""Rz synthesis by count model (Clifford+Rz to Clifford+T).

Each Rz becomes a placeholder Clifford+T string whose T and Clifford counts
follow a linear fit in ``|log eps|``. Only counts and single-qubit seriality
matter downstream, so the placeholder never needs to approximate the angle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .circuit import Circuit, GateOp
from .errors import ConfigurationError, DomainError, ValidationError

# guards ceil() against float noise such as 5 * |ln(e^-1)| = 5.000000000000001
_CEIL_SLACK = 1e-9


@dataclass(frozen=True)
class SynthModel:
    a_t: float = 5.0
    a_c: float = 8.0
    log_base: str = "natural"

    def __post_init__(self):
        if not (self.a_t > 0 and self.a_c > 0):
            raise ConfigurationError("synthesis coefficients a_t and a_c must be positive")
        if self.log_base not in ("natural", "decimal"):
            raise ConfigurationError(f"log_base must be 'natural' or 'decimal', not {self.log_base!r}")

    def abs_log(self, eps: float) -> float:
        """``|log eps|`` in the configured base."""
        return abs(math.log(eps) if self.log_base == "natural" else math.log10(eps))


def _ceil(x: float) -> int:
    return max(0, math.ceil(x - _CEIL_SLACK))


def synthesis_counts(model: SynthModel, eps_rz: float) -> tuple[int, int]:
    """(T gates, Clifford gates) added per Rz at per-rotation error ``eps_rz``."""
    if not (isinstance(eps_rz, (int, float)) and 0 < eps_rz <= 1):
        raise DomainError(f"eps_rz must lie in (0, 1], got {eps_rz!r}")
    lg = model.abs_log(eps_rz)
    return _ceil(model.a_t * lg), _ceil(model.a_c * lg)


_CLIFFORD_CYCLE = ("H", "S")

# An exact synthesizer can replace this: (rz op, eps) -> replacement ops.
Synthesizer = Callable[[GateOp, float], list[GateOp]]


def placeholder_sequence(n_t: int, n_c: int, qubit: int) -> list[GateOp]:
    """Interleave Cliffords (cycling H, S) with T gates, then append the remainder."""
    out = []
    ci = 0
    for i in range(max(n_t, n_c)):
        if i < n_c:
            out.append(GateOp(_CLIFFORD_CYCLE[ci % 2], (qubit,)))
            ci += 1
        if i < n_t:
            out.append(GateOp("T", (qubit,)))
    return out


def count_model_synthesizer(model: SynthModel) -> Synthesizer:
    def synth(op: GateOp, eps: float) -> list[GateOp]:
        n_t, n_c = synthesis_counts(model, eps)
        return placeholder_sequence(n_t, n_c, op.qubits[0])

    return synth


def expand_rz(circuit: Circuit, model: SynthModel, eps_rz: float,
              synthesizer: Synthesizer | None = None) -> Circuit:
    """Replace every Rz with its synthesized sequence; the result is tagged ``clifford_t``."""
    if circuit.level != "clifford_rz":
        raise ValidationError(f"expand_rz expects a clifford_rz circuit, got {circuit.level}")
    synthesis_counts(model, eps_rz)
    synth = synthesizer or count_model_synthesizer(model)
    ops: list[GateOp] = []
    new_index: dict[int, int] = {}
    for i, op in enumerate(circuit.ops):
        if op.kind == "Rz":
            if op.ctrl is not None:
                raise ValidationError("classically controlled Rz cannot be synthesized")
            ops.extend(synth(op, eps_rz))
        else:
            new_index[i] = len(ops)
            if op.ctrl is not None:
                op = GateOp(op.kind, op.qubits, op.angle, new_index[op.ctrl], op.matrix,
                            op.rounds, op.sites, op.intent)
            ops.append(op)
    return circuit.with_ops(ops, level="clifford_t")

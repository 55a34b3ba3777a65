"""Synthetic benchmark circuits for the cultivation and factory scaling checks.

The studied application circuits are not public, so these generators give
seeded stand-ins for one Trotter step of a 60-qubit lattice model.
"""

from __future__ import annotations

import math
import random

from .circuit import Circuit, GateOp


def trotter_workload(n_qubits: int = 60, layers: int = 7, clifford_layers: int = 2,
                     seed: int = 7) -> Circuit:
    """Input-level Trotter step: brickwork ZZ rotation layers between random Clifford layers.

    Each layer applies ``clifford_layers`` rounds of random H/S on every qubit
    plus CNOTs on a random perfect matching, then ``CNOT Rz CNOT`` on
    alternating neighbour pairs. Rotations inside a layer are disjoint, so
    they can run in parallel when enough factories exist.
    """
    if n_qubits < 2:
        raise ValueError("need at least two qubits")
    rng = random.Random(seed)
    ops: list[GateOp] = []
    for layer in range(layers):
        for _ in range(clifford_layers):
            ops += [GateOp(rng.choice(("H", "S")), (q,)) for q in range(n_qubits)]
            perm = list(range(n_qubits))
            rng.shuffle(perm)
            ops += [GateOp("CNOT", (perm[i], perm[i + 1])) for i in range(0, n_qubits - 1, 2)]
        for a in range(layer % 2, n_qubits - 1, 2):
            theta = rng.uniform(0.1, math.pi - 0.1)
            ops += [GateOp("CNOT", (a, a + 1)), GateOp("Rz", (a + 1,), angle=theta),
                    GateOp("CNOT", (a, a + 1))]
    return Circuit.build(n_qubits, ops)

"""Circuit intermediate representation and its dependency DAG.

One representation serves every abstraction level; ``Circuit.level`` says
which alphabet the ops are drawn from.
"""

from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .errors import ConfigurationError, ValidationError

LEVELS = ("input", "clifford_rz", "clifford_t", "primitive")

# kind -> number of qubits; None means "one or more" (primitive ops may span patches)
ARITY: dict[str, int | None] = {
    "I": 1, "X": 1, "Y": 1, "Z": 1,
    "H": 1, "S": 1, "Sdg": 1, "T": 1, "Tdg": 1,
    "Rz": 1, "Rx": 1, "Ry": 1,
    "CNOT": 2, "CZ": 2, "SWAP": 2,
    "Toffoli": 3,
    "U1Q": 1, "U2Q": 2,
    "Measure": 1, "Reset": 1,
    "SE": None, "Merge": None, "Split": None,
    "CultT": None, "CultS": None, "ZMove": None, "AMove": None,
}

ROTATIONS = frozenset({"Rz", "Rx", "Ry"})
MATRIX_KINDS = frozenset({"U1Q", "U2Q"})
PAULIS = frozenset({"I", "X", "Y", "Z"})
CLIFFORDS = frozenset({"I", "X", "Y", "Z", "H", "S", "Sdg", "CNOT", "CZ", "SWAP"})
NON_CLIFFORD_T = frozenset({"T", "Tdg"})
PRIMITIVE_ONLY = frozenset({"SE", "Merge", "Split", "CultT", "CultS", "ZMove", "AMove"})

CLIFFORD_RZ_ALPHABET = frozenset(
    {"H", "S", "Sdg", "X", "Y", "Z", "CNOT", "Rz", "Measure", "Reset"}
)
CLIFFORD_T_ALPHABET = (CLIFFORD_RZ_ALPHABET - {"Rz"}) | NON_CLIFFORD_T


@dataclass(frozen=True)
class QubitId:
    index: int
    label: str | None = None


@dataclass(frozen=True)
class GateOp:
    """A single gate application.

    ``ctrl`` names the op index of the measurement whose outcome conditions
    this op. ``matrix`` is a row-major tuple of complex entries and only
    appears on ``U1Q``/``U2Q``. ``rounds`` (syndrome rounds carried by an SE
    op), ``sites`` (A-Move travel distance) and ``intent`` (the logical gate
    a primitive op stands for) are only meaningful at primitive level.
    """

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None
    ctrl: int | None = None
    matrix: tuple[complex, ...] | None = None
    rounds: int = 1
    sites: float | None = None
    intent: str | None = None

    def __post_init__(self):
        if self.kind not in ARITY:
            raise ValidationError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        arity = ARITY[self.kind]
        n = len(self.qubits)
        if arity is None:
            if n < 1:
                raise ValidationError(f"{self.kind} needs at least one qubit")
        elif n != arity:
            raise ValidationError(f"{self.kind} acts on {arity} qubit(s), got {n}")
        if len(set(self.qubits)) != n:
            raise ValidationError(f"{self.kind} has repeated qubit operands {self.qubits}")
        if (self.angle is not None) != (self.kind in ROTATIONS):
            raise ValidationError(f"angle must be given iff kind is a rotation ({self.kind})")
        if self.angle is not None:
            object.__setattr__(self, "angle", float(self.angle))
        if (self.matrix is not None) != (self.kind in MATRIX_KINDS):
            raise ValidationError(f"matrix must be given iff kind is U1Q/U2Q ({self.kind})")
        if self.matrix is not None:
            dim = 2 ** n
            m = tuple(complex(x) for x in self.matrix)
            if len(m) != dim * dim:
                raise ValidationError(f"{self.kind} matrix needs {dim * dim} entries")
            object.__setattr__(self, "matrix", m)
        if self.rounds < 1:
            raise ValidationError("rounds must be positive")


@dataclass(frozen=True)
class Circuit:
    qubits: tuple[QubitId, ...]
    ops: tuple[GateOp, ...]
    level: str = "input"

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        object.__setattr__(self, "ops", tuple(self.ops))
        if self.level not in LEVELS:
            raise ValidationError(f"unknown level {self.level!r}")
        indices = [q.index for q in self.qubits]
        if len(set(indices)) != len(indices):
            raise ValidationError("qubit indices must be unique")
        declared = set(indices)
        for pos, op in enumerate(self.ops):
            missing = [q for q in op.qubits if q not in declared]
            if missing:
                raise ValidationError(f"op {pos} ({op.kind}) uses undeclared qubits {missing}")
            if op.kind in PRIMITIVE_ONLY and self.level != "primitive":
                raise ValidationError(f"primitive op {op.kind} in a {self.level} circuit")
            if op.ctrl is not None:
                if not 0 <= op.ctrl < pos or self.ops[op.ctrl].kind != "Measure":
                    raise ValidationError(
                        f"op {pos} is controlled by record {op.ctrl}, which is not an earlier Measure"
                    )

    @classmethod
    def build(cls, n_qubits: int, ops: Iterable[GateOp], level: str = "input") -> "Circuit":
        return cls(tuple(QubitId(i) for i in range(n_qubits)), tuple(ops), level)

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    def with_ops(self, ops: Iterable[GateOp], level: str | None = None) -> "Circuit":
        return Circuit(self.qubits, tuple(ops), level or self.level)

    def __len__(self) -> int:
        return len(self.ops)


@dataclass(frozen=True)
class OpDag:
    """Precedence graph over op indices with per-node durations (µs)."""

    n: int
    edges: tuple[tuple[int, int], ...]
    durations: tuple[float, ...]
    preds: tuple[tuple[int, ...], ...] = field(repr=False, compare=False, default=())
    succs: tuple[tuple[int, ...], ...] = field(repr=False, compare=False, default=())

    def __post_init__(self):
        if len(self.durations) != self.n:
            raise ValidationError("one duration per node required")
        if any(d < 0 for d in self.durations):
            raise ValidationError("durations must be nonnegative")
        preds: list[list[int]] = [[] for _ in range(self.n)]
        succs: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValidationError(f"edge ({u}, {v}) out of range")
            preds[v].append(u)
            succs[u].append(v)
        object.__setattr__(self, "preds", tuple(tuple(sorted(p)) for p in preds))
        object.__setattr__(self, "succs", tuple(tuple(sorted(s)) for s in succs))

    @classmethod
    def from_edges(cls, durations: Sequence[float], edges: Iterable[tuple[int, int]]) -> "OpDag":
        return cls(len(durations), tuple(sorted(set(edges))), tuple(float(d) for d in durations))

    def topological_order(self) -> list[int]:
        """Kahn's algorithm, always releasing the smallest ready index first.

        Raises ValidationError when the graph has a cycle.
        """
        indeg = [len(p) for p in self.preds]
        ready = [v for v in range(self.n) if indeg[v] == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            v = heapq.heappop(ready)
            order.append(v)
            for w in self.succs[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    heapq.heappush(ready, w)
        if len(order) != self.n:
            raise ValidationError("dependency graph contains a cycle")
        return order


Durations = Mapping[str, float] | Callable[[GateOp], float] | Sequence[float]


def _resolve_durations(circuit: Circuit, durations: Durations) -> list[float]:
    if callable(durations):
        return [float(durations(op)) for op in circuit.ops]
    if isinstance(durations, Mapping):
        out = []
        for op in circuit.ops:
            if op.kind not in durations:
                raise ConfigurationError(f"no duration configured for op kind {op.kind!r}")
            out.append(float(durations[op.kind]))
        return out
    out = [float(d) for d in durations]
    if len(out) != len(circuit.ops):
        raise ConfigurationError("duration list length does not match op count")
    return out


def build_dag(circuit: Circuit, durations: Durations) -> OpDag:
    """Dependency DAG: consecutive ops on each qubit plus measurement→controlled-op edges.

    Ancilla patches and factories are qubits of primitive circuits, so resource
    conflicts are ordinary per-qubit edges.
    """
    times = _resolve_durations(circuit, durations)
    last: dict[int, int] = {}
    edges = set()
    for i, op in enumerate(circuit.ops):
        for q in op.qubits:
            if q in last:
                edges.add((last[q], i))
            last[q] = i
        if op.ctrl is not None:
            edges.add((op.ctrl, i))
    return OpDag.from_edges(times, edges)


@dataclass(frozen=True)
class GateCounts:
    by_kind: dict[str, int]
    k: int  # Rz rotations
    l: int  # Clifford gates
    t: int  # T / Tdg
    measure: int
    reset: int

    @property
    def total(self) -> int:
        return sum(self.by_kind.values())


def gate_counts(circuit: Circuit) -> GateCounts:
    by_kind = Counter(op.kind for op in circuit.ops)
    return GateCounts(
        by_kind=dict(sorted(by_kind.items())),
        k=by_kind.get("Rz", 0),
        l=sum(n for kind, n in by_kind.items() if kind in CLIFFORDS),
        t=sum(n for kind, n in by_kind.items() if kind in NON_CLIFFORD_T),
        measure=by_kind.get("Measure", 0),
        reset=by_kind.get("Reset", 0),
    )

"""Stage 2: read-and-replace lowering from Clifford+T to architecture primitives.

Every non-empty layout cell is a qubit of the primitive circuit. Data qubit
``q`` keeps index ``q``; factories and ancillas follow in row-major order.
Ancilla cells used by a Merge are operands of that Merge, so overlapping
routes serialize through ordinary per-qubit dependencies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .architecture import Architecture, OpTimer, primitive_time_ps
from .circuit import CLIFFORD_T_ALPHABET, PAULIS, Circuit, GateOp, QubitId
from .errors import CompilationError, ConfigurationError, ValidationError
from .layout import (DATA, S_FACTORY, T_FACTORY, Cell, LayoutGrid, ancilla_path,
                     generate_layout, manhattan, nearest_available_factory)

TRANSVERSAL = frozenset({"H", "S", "CNOT"})


@dataclass
class FactoryState:
    cell: Cell
    kind: str  # "t" or "s"
    qubit: int
    status: str = "ready"  # "ready" or "used"
    cultivated: bool = False
    last_cultivation_op: int | None = None


@dataclass(frozen=True)
class RouteReservation:
    path: tuple[Cell, ...]
    interval: tuple[int, int]


@dataclass(frozen=True)
class CompiledProgram:
    circuit: Circuit
    layout: LayoutGrid
    reservations: tuple[RouteReservation, ...] = field(default=())


def asap_order(circuit: Circuit) -> list[int]:
    """Op indices sorted by (ASAP level, index)."""
    level_of_qubit: dict[int, int] = {}
    levels = []
    for op in circuit.ops:
        lv = max((level_of_qubit.get(q, -1) for q in op.qubits), default=-1)
        if op.ctrl is not None:
            lv = max(lv, levels[op.ctrl])
        lv += 1
        levels.append(lv)
        for q in op.qubits:
            level_of_qubit[q] = lv
    return sorted(range(len(circuit.ops)), key=lambda i: (levels[i], i))


class _Lowering:
    def __init__(self, arch: Architecture, layout: LayoutGrid):
        self.arch = arch
        self.layout = layout
        cells = layout.qubit_cells()
        self.cell_of = cells
        self.qubit_of = {c: i for i, c in enumerate(cells)}
        self.ops: list[GateOp] = []
        self.reservations: list[RouteReservation] = []
        self.factories: dict[str, dict[Cell, FactoryState]] = {"t": {}, "s": {}}
        for role, kind in ((T_FACTORY, "t"), (S_FACTORY, "s")):
            for cell in layout.cells(role):
                self.factories[kind][cell] = FactoryState(cell, kind, self.qubit_of[cell])
        self._paths: dict[tuple[Cell, Cell], list[Cell]] = {}

    def emit(self, op: GateOp) -> int:
        self.ops.append(op)
        return len(self.ops) - 1

    def qubit_labels(self) -> tuple[QubitId, ...]:
        out = []
        for i, cell in enumerate(self.cell_of):
            role = self.layout.role(cell)
            tag = f"q{i}" if role == DATA else f"{role}{cell[0]}_{cell[1]}"
            out.append(QubitId(i, tag))
        return tuple(out)

    # ------------------------------------------------------------ factories

    def acquire(self, kind: str, target: int) -> FactoryState:
        """Pick the nearest ready factory, batch re-cultivating all of them if none is ready."""
        pool = self.factories[kind]
        if not pool:
            raise ConfigurationError(f"layout has no {kind.upper()} factory for teleportation")
        origin = self.cell_of[target]
        busy = [c for c, f in pool.items() if f.status == "used"]
        cell = nearest_available_factory(self.layout, origin, kind, busy)
        cult = "CultT" if kind == "t" else "CultS"
        if cell is None:
            qubits = tuple(sorted(f.qubit for f in pool.values()))
            idx = self.emit(GateOp(cult, qubits))
            for f in pool.values():
                f.status, f.cultivated, f.last_cultivation_op = "ready", True, idx
            cell = nearest_available_factory(self.layout, origin, kind, ())
        f = pool[cell]
        if not f.cultivated:
            f.last_cultivation_op = self.emit(GateOp(cult, (f.qubit,)))
            f.cultivated = True
        f.status, f.cultivated = "used", False
        return f

    # ------------------------------------------------------------ routing

    def route(self, a: int, b: int, intent: str | None, ctrl: int | None = None) -> int:
        key = (self.cell_of[a], self.cell_of[b])
        path = self._paths.get(key)
        if path is None:
            path = ancilla_path(self.layout, *key)
            self._paths[key] = path
        qubits = (a, *(self.qubit_of[c] for c in path), b)
        start = self.emit(GateOp("Merge", qubits, ctrl=ctrl, intent=intent))
        end = self.emit(GateOp("Split", qubits))
        self.reservations.append(RouteReservation(tuple(path), (start, end)))
        return start

    # ------------------------------------------------------------ lowering

    def lower(self, op: GateOp, ctrl: int | None) -> int | None:
        """Emit the primitives for one Clifford+T op; returns the index of a Measure, if any."""
        kind = op.kind
        q = op.qubits
        if kind in PAULIS:
            self.emit(GateOp(kind, q, ctrl=ctrl, intent=kind))
        elif kind in ("Measure", "Reset"):
            idx = self.emit(GateOp(kind, q, ctrl=ctrl, intent=kind))
            return idx if kind == "Measure" else None
        elif kind == "H":
            self.emit(GateOp("H", q, ctrl=ctrl, intent=kind))
        elif kind == "CNOT":
            if self.arch.is_lattice:
                self.route(q[0], q[1], kind, ctrl)
            else:
                self.emit(GateOp("CNOT", q, ctrl=ctrl, intent=kind))
        elif kind in ("S", "Sdg"):
            if self.arch.is_lattice:
                self.teleport_s(q[0], kind, ctrl)
            else:
                self.emit(GateOp("S", q, ctrl=ctrl, intent=kind))
        elif kind in ("T", "Tdg"):
            self.teleport_t(q[0], kind, ctrl)
        else:
            raise CompilationError(f"{kind} is outside the Clifford+T alphabet")
        return None

    def teleport_s(self, target: int, intent: str, ctrl: int | None) -> None:
        fs = self.acquire("s", target)
        self.route(fs.qubit, target, intent, ctrl)
        m = self.emit(GateOp("Measure", (fs.qubit,)))
        self.emit(GateOp("Z", (target,), ctrl=m))

    def teleport_t(self, target: int, intent: str, ctrl: int | None) -> None:
        if self.arch.has_transversal_s:
            ft = self.acquire("t", target)
            self.emit(GateOp("CNOT", (ft.qubit, target), ctrl=ctrl, intent=intent))
            m = self.emit(GateOp("Measure", (ft.qubit,)))
            self.emit(GateOp("S", (target,), ctrl=m))
            return
        fs = self.acquire("s", target)
        ft = self.acquire("t", target)
        self.route(ft.qubit, target, intent, ctrl)
        m1 = self.emit(GateOp("Measure", (ft.qubit,)))
        self.route(fs.qubit, target, None, m1)
        m2 = self.emit(GateOp("Measure", (fs.qubit,)))
        self.emit(GateOp("Z", (target,), ctrl=m2))


def _check_input(circuit: Circuit) -> None:
    if circuit.level != "clifford_t":
        raise ValidationError(f"stage 2 expects a clifford_t circuit, got {circuit.level}")
    for op in circuit.ops:
        if op.kind not in CLIFFORD_T_ALPHABET:
            raise CompilationError(f"{op.kind} is outside the Clifford+T alphabet")


def lower_clifford(circuit: Circuit, arch: Architecture, layout: LayoutGrid) -> CompiledProgram:
    """Replace every Clifford+T op with primitives (teleporting T, and S on lattice archs)."""
    _check_input(circuit)
    if layout.n_data != circuit.n_qubits:
        raise ConfigurationError(f"layout holds {layout.n_data} data qubits, circuit has {circuit.n_qubits}")
    lw = _Lowering(arch, layout)
    measure_at: dict[int, int] = {}
    for i in asap_order(circuit):
        op = circuit.ops[i]
        ctrl = measure_at[op.ctrl] if op.ctrl is not None else None
        m = lw.lower(op, ctrl)
        if m is not None:
            measure_at[i] = m
    prim = Circuit(lw.qubit_labels(), tuple(lw.ops), "primitive")
    return CompiledProgram(prim, layout, tuple(lw.reservations))


def _splice(circuit: Circuit, around: Callable[[int, GateOp], tuple[list[GateOp], list[GateOp]]],
            tail: list[GateOp] = ()) -> Circuit:
    """Insert ops before/after each op, keeping classical-control links intact."""
    out: list[GateOp] = []
    new_index: dict[int, int] = {}
    for i, op in enumerate(circuit.ops):
        pre, post = around(i, op)
        out.extend(pre)
        if op.ctrl is not None:
            op = GateOp(op.kind, op.qubits, op.angle, new_index[op.ctrl], op.matrix,
                        op.rounds, op.sites, op.intent)
        new_index[i] = len(out)
        out.append(op)
        out.extend(post)
    out.extend(tail)
    return circuit.with_ops(out)


def _require_primitive(circuit: Circuit) -> None:
    if circuit.level != "primitive":
        raise ValidationError(f"expected a primitive circuit, got {circuit.level}")


def post_op_correction_pass(circuit: Circuit, arch: Architecture) -> Circuit:
    """An SE of ``arch.syndrome_rounds`` rounds after every transversal gate."""
    _require_primitive(circuit)
    if not arch.post_op_correction or arch.is_lattice:
        return circuit
    rounds = arch.syndrome_rounds

    def around(i, op):
        if op.kind in TRANSVERSAL:
            return [], [GateOp("SE", op.qubits, rounds=rounds)]
        return [], []

    return _splice(circuit, around)


def amove_sites(arch: Architecture, a: Cell, b: Cell) -> float:
    """Array sites an A-Move travels between two patches: two d-wide gaps per patch step."""
    return float(2 * arch.d * max(manhattan(a, b) - 1, 0))


def movement_pass(circuit: Circuit, arch: Architecture, layout: LayoutGrid) -> Circuit:
    """Explicit Z-/A-Moves around entangling and readout steps, per the movement capabilities."""
    _require_primitive(circuit)
    if arch.is_lattice:
        raise ConfigurationError("movement pass applies to movement architectures only")
    caps = arch.capabilities
    cells = layout.qubit_cells()

    def around(i, op):
        if op.kind == "CNOT":
            if caps.in_place_entangle:
                sites = amove_sites(arch, cells[op.qubits[0]], cells[op.qubits[1]])
                return [GateOp("AMove", op.qubits, sites=sites)], []
            return [GateOp("ZMove", op.qubits)], [GateOp("ZMove", op.qubits)]
        if op.kind == "Measure" and not caps.in_place_readout:
            return [GateOp("ZMove", op.qubits)], []
        return [], []

    return _splice(circuit, around)


def asap_schedule(circuit: Circuit, duration: Callable[[GateOp], int]) -> tuple[list[int], list[int]]:
    """Start and end times (integer ps) under as-soon-as-possible scheduling."""
    free: dict[int, int] = {}
    starts, ends = [], []
    for op in circuit.ops:
        s = max((free.get(q, 0) for q in op.qubits), default=0)
        if op.ctrl is not None:
            s = max(s, ends[op.ctrl])
        e = s + duration(op)
        starts.append(s)
        ends.append(e)
        for q in op.qubits:
            free[q] = e
    return starts, ends


def idling_pass(circuit: Circuit, arch: Architecture, n_data: int | None = None,
                timer: OpTimer | None = None) -> Circuit:
    """Fill idle windows of data qubits with SE rounds without stretching the critical path.

    Each gap gets one SE op holding as many whole rounds as fit, thinned by
    ``se_frequency``.
    """
    _require_primitive(circuit)
    if not arch.idling_se:
        return circuit
    timer = timer or OpTimer(arch)
    n_data = circuit.n_qubits if n_data is None else n_data
    starts, ends = asap_schedule(circuit, timer.duration)
    makespan = max(ends, default=0)
    t_round = primitive_time_ps(arch, "SE", rounds=1)
    if t_round == 0 or makespan == 0:
        return circuit

    def se_for(gap: int, q: int) -> list[GateOp]:
        rounds = (gap // t_round) // arch.se_frequency
        return [GateOp("SE", (q,), rounds=rounds)] if rounds > 0 else []

    pre: dict[int, list[GateOp]] = {}
    post: dict[int, list[GateOp]] = {}
    last: dict[int, int] = {}
    for i, op in enumerate(circuit.ops):
        for q in op.qubits:
            if q >= n_data:
                continue
            prev_end = ends[last[q]] if q in last else 0
            ins = se_for(starts[i] - prev_end, q)
            if ins:
                (post.setdefault(last[q], []) if q in last else pre.setdefault(i, [])).extend(ins)
            last[q] = i
    tail = []
    for q in range(n_data):
        if q in last:
            post.setdefault(last[q], []).extend(se_for(makespan - ends[last[q]], q))
        else:
            tail.extend(se_for(makespan, q))
    out = _splice(circuit, lambda i, op: (pre.get(i, []), post.get(i, [])), tail)
    after = max(asap_schedule(out, timer.duration)[1], default=0)
    if after != makespan:
        raise CompilationError(f"idling pass changed the critical path ({makespan} -> {after} ps)")
    return out


def compile_to_primitives(circuit: Circuit, arch: Architecture,
                          layout: LayoutGrid | None = None) -> CompiledProgram:
    """Lower, then post-op SE and movement (movement archs), then idling SE.

    Idling runs last so that its windows are measured on the final schedule.
    """
    if layout is None:
        spec = arch.layout
        layout = generate_layout(spec.strategy, circuit.n_qubits, spec.t_factories, spec.s_factories)
    prog = lower_clifford(circuit, arch, layout)
    prim = prog.circuit
    if not arch.is_lattice:
        prim = post_op_correction_pass(prim, arch)
        prim = movement_pass(prim, arch, layout)
    prim = idling_pass(prim, arch, layout.n_data)
    return CompiledProgram(prim, layout, prog.reservations)


def intent_multiset(circuit: Circuit) -> dict[str, int]:
    out: dict[str, int] = {}
    for op in circuit.ops:
        if op.intent is not None:
            out[op.intent] = out.get(op.intent, 0) + 1
    return dict(sorted(out.items()))

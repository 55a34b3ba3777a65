"""Lowering of arbitrary input circuits to Clifford + Rz.

Four passes: multi-qubit expansion, two-qubit KAK synthesis, single-qubit
ZYZ synthesis, and merge/eject cleanup. Global phase is discarded.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .circuit import CLIFFORD_RZ_ALPHABET, Circuit, GateOp
from .errors import UnsupportedGateError, ValidationError

SNAP_TOL = 1e-12
UNITARY_TOL = 1e-10

_SQ2 = 1 / math.sqrt(2)
_FIXED_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "S": np.diag([1, 1j]).astype(complex),
    "Sdg": np.diag([1, -1j]).astype(complex),
    "T": np.diag([1, cmath.exp(1j * math.pi / 4)]),
    "Tdg": np.diag([1, cmath.exp(-1j * math.pi / 4)]),
}
_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
_CZ = np.diag([1, 1, 1, -1]).astype(complex)
_SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
_TOFFOLI = np.eye(8, dtype=complex)
_TOFFOLI[6:, 6:] = [[0, 1], [1, 0]]

# Magic basis: conjugation maps SO(4) onto SU(2) x SU(2).
_MAGIC = np.array(
    [[1, 1j, 0, 0], [0, 0, 1j, 1], [0, 0, 1j, -1], [1, -1j, 0, 0]], dtype=complex
) * _SQ2
_MAGIC_DAG = _MAGIC.conj().T
# Diagonals of XX, YY, ZZ in the magic basis.
_XX_DIAG = np.array([1, -1, 1, -1])
_YY_DIAG = np.array([-1, 1, 1, -1])
_ZZ_DIAG = np.array([1, 1, -1, -1])


def rz_matrix(theta: float) -> np.ndarray:
    return np.diag([cmath.exp(-0.5j * theta), cmath.exp(0.5j * theta)])


def ry_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rx_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def gate_matrix(op: GateOp) -> np.ndarray:
    """Dense unitary of a unitary gate; qubit ``op.qubits[0]`` is most significant."""
    kind = op.kind
    if kind in _FIXED_1Q:
        return _FIXED_1Q[kind]
    if kind == "Rz":
        return rz_matrix(op.angle)
    if kind == "Ry":
        return ry_matrix(op.angle)
    if kind == "Rx":
        return rx_matrix(op.angle)
    if kind in ("U1Q", "U2Q"):
        dim = 2 ** len(op.qubits)
        return np.array(op.matrix, dtype=complex).reshape(dim, dim)
    if kind == "CNOT":
        return _CNOT
    if kind == "CZ":
        return _CZ
    if kind == "SWAP":
        return _SWAP
    if kind == "Toffoli":
        return _TOFFOLI
    raise UnsupportedGateError(f"{kind} has no unitary matrix")


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense matrix of a small unitary circuit (qubit 0 most significant)."""
    n = circuit.n_qubits
    pos = {q.index: i for i, q in enumerate(circuit.qubits)}
    dim = 2 ** n
    state = np.eye(dim, dtype=complex).reshape([2] * n + [dim])
    for op in circuit.ops:
        if op.ctrl is not None:
            raise UnsupportedGateError("classically controlled ops have no fixed unitary")
        m = gate_matrix(op)
        k = len(op.qubits)
        axes = [pos[q] for q in op.qubits]
        m = m.reshape([2] * (2 * k))
        state = np.tensordot(m, state, axes=(list(range(k, 2 * k)), axes))
        state = np.moveaxis(state, list(range(k)), axes)
    return state.reshape(dim, dim)


def equal_up_to_phase(a: np.ndarray, b: np.ndarray) -> float:
    """Max-norm distance between ``a`` and ``b`` after optimal global phase."""
    overlap = np.vdot(b, a)
    phase = overlap / abs(overlap) if abs(overlap) > 1e-300 else 1.0
    return float(np.max(np.abs(a - phase * b)))


def _check_unitary(u: np.ndarray, dim: int) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (dim, dim):
        raise ValidationError(f"expected a {dim}x{dim} matrix, got shape {u.shape}")
    err = np.max(np.abs(u @ u.conj().T - np.eye(dim)))
    if not err <= UNITARY_TOL:
        raise ValidationError(f"matrix is not unitary (deviation {err:.3g})")
    return u


def _wrap(theta: float) -> float:
    """Map an angle into (-pi, pi]."""
    return theta - 2 * math.pi * math.ceil((theta - math.pi) / (2 * math.pi))


# --------------------------------------------------------------------------- ZYZ


@dataclass(frozen=True)
class EulerZYZ:
    alpha: float
    beta: float
    gamma: float
    phase: float

    def matrix(self) -> np.ndarray:
        return (
            cmath.exp(1j * self.phase)
            * rz_matrix(self.alpha)
            @ ry_matrix(self.beta)
            @ rz_matrix(self.gamma)
        )


def euler_zyz(u) -> EulerZYZ:
    """Angles with ``u = e^{i phase} Rz(alpha) Ry(beta) Rz(gamma)`` and beta in [0, pi]."""
    u = _check_unitary(u, 2)
    v = u / cmath.sqrt(np.linalg.det(u))
    c, s = abs(v[1, 1]), abs(v[1, 0])
    beta = 2 * math.atan2(s, c)
    tiny = 1e-13
    if s <= tiny:
        alpha, gamma = 2 * cmath.phase(v[1, 1]), 0.0
    elif c <= tiny:
        alpha, gamma = 2 * cmath.phase(v[1, 0]), 0.0
    else:
        total = 2 * cmath.phase(v[1, 1])
        diff = 2 * cmath.phase(v[1, 0])
        alpha, gamma = (total + diff) / 2, (total - diff) / 2
    alpha, gamma = _wrap(alpha), _wrap(gamma)
    rebuilt = rz_matrix(alpha) @ ry_matrix(beta) @ rz_matrix(gamma)
    idx = np.unravel_index(np.argmax(np.abs(rebuilt)), rebuilt.shape)
    phase = cmath.phase(u[idx] / rebuilt[idx])
    return EulerZYZ(alpha, beta, gamma, phase)


def _snap_rz(theta: float, qubit: int) -> list[GateOp]:
    theta = _wrap(theta)
    if abs(theta) < SNAP_TOL:
        return []
    for target, kind in ((math.pi / 2, "S"), (-math.pi / 2, "Sdg"), (math.pi, "Z")):
        if abs(theta - target) < SNAP_TOL:
            return [GateOp(kind, (qubit,))]
    if abs(theta + math.pi) < SNAP_TOL:
        return [GateOp("Z", (qubit,))]
    return [GateOp("Rz", (qubit,), angle=theta)]


def single_qubit_to_clifford_rz(u, qubit: int) -> list[GateOp]:
    """Clifford+Rz sequence (at most five gates) equal to ``u`` up to phase."""
    e = euler_zyz(u)
    if abs(e.beta) < SNAP_TOL:
        return _snap_rz(e.alpha + e.gamma, qubit)
    if abs(e.beta - math.pi) < SNAP_TOL:
        # Rz(a) Ry(pi) Rz(g) = Rz(a - g) Ry(pi), and Ry(pi) is Y up to phase
        return [GateOp("Y", (qubit,))] + _snap_rz(e.alpha - e.gamma, qubit)
    # Ry(b) = S H Rz(b) H Sdg, and S / Sdg fold into the outer rotations
    return (
        _snap_rz(e.gamma - math.pi / 2, qubit)
        + [GateOp("H", (qubit,))]
        + _snap_rz(e.beta, qubit)
        + [GateOp("H", (qubit,))]
        + _snap_rz(e.alpha + math.pi / 2, qubit)
    )


# --------------------------------------------------------------------------- KAK


@dataclass(frozen=True)
class TwoQubitDecomposition:
    """``ops`` act on local qubits 0 and 1; their product times ``e^{i phase}`` is the input."""

    ops: tuple[GateOp, ...]
    phase: float
    coordinates: tuple[float, float, float]

    @property
    def cnot_count(self) -> int:
        return sum(op.kind == "CNOT" for op in self.ops)


def _to_su4(u: np.ndarray) -> tuple[np.ndarray, float]:
    det = np.linalg.det(u)
    phase = cmath.phase(det) / 4
    return u * cmath.exp(-1j * phase), phase


def _real_diagonalizer(m: np.ndarray, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Real orthogonal P (det +1) with P^T m P diagonal, for complex symmetric unitary m.

    The real and imaginary parts commute, so a generic real combination of
    them shares the eigenbasis. Degenerate combinations are retried with a
    fresh deterministic mixing angle.
    """
    re, im = m.real, m.imag
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(64):
        t = rng.uniform(0, 2 * math.pi)
        _, p = np.linalg.eigh(math.cos(t) * re + math.sin(t) * im)
        d = p.T @ m @ p
        off = np.max(np.abs(d - np.diag(np.diag(d))))
        if best is None or off < best[0]:
            best = (off, p, np.diag(d).copy())
        if off < 1e-12:
            break
    _, p, diag = best
    if np.linalg.det(p) < 0:
        p = p.copy()
        p[:, -1] *= -1
    return p, diag


def _canonical_coordinates(u_su4: np.ndarray, seed: int = 0) -> np.ndarray:
    um = _MAGIC_DAG @ u_su4 @ _MAGIC
    _, diag = _real_diagonalizer(um.T @ um, seed)
    theta = np.angle(diag) / 2
    # det of the outer orthogonal factor is exp(-i sum theta); force it to +1
    if abs(_wrap(theta.sum())) > math.pi / 2:
        theta[0] += math.pi
    return np.array([theta @ _XX_DIAG, theta @ _YY_DIAG, theta @ _ZZ_DIAG]) / 4


def _dist_mod(x: float, period: float) -> float:
    r = x % period
    return min(r, period - r)


def _kron_factor(m: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Nearest A (x) B to m by rank-one SVD of the realigned matrix; returns residual."""
    r = m.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    uu, s, vh = np.linalg.svd(r)
    a = math.sqrt(s[0]) * uu[:, 0].reshape(2, 2)
    b = math.sqrt(s[0]) * vh[0, :].reshape(2, 2)
    return a, b, float(np.max(np.abs(np.kron(a, b) - m)))


def _u1(m: np.ndarray, q: int) -> GateOp:
    return GateOp("U1Q", (q,), matrix=tuple(np.asarray(m, dtype=complex).ravel()))


def _skeleton(count: int, coords: np.ndarray) -> list[GateOp]:
    a, b, c = coords
    if count == 0:
        return []
    if count == 1:
        return [GateOp("CNOT", (0, 1))]
    if count == 2:
        # CNOT (Rx(-2p) x Rz(-2q)) CNOT = exp(i(p XX + q ZZ)); drop the coordinate nearest 0
        zero = int(np.argmin([_dist_mod(x, math.pi / 2) for x in coords]))
        p, q = [x for i, x in enumerate(coords) if i != zero]
        return [
            GateOp("CNOT", (0, 1)),
            _u1(rx_matrix(-2 * p), 0),
            _u1(rz_matrix(-2 * q), 1),
            GateOp("CNOT", (0, 1)),
        ]
    h = math.pi / 2
    return [
        GateOp("CNOT", (1, 0)),
        _u1(rz_matrix(2 * a + h), 0),
        _u1(ry_matrix(2 * b + h), 1),
        GateOp("CNOT", (0, 1)),
        _u1(ry_matrix(2 * c + h), 1),
        GateOp("CNOT", (1, 0)),
    ]


def _minimal_cnot_count(coords: np.ndarray, tol: float) -> int:
    zeros = [_dist_mod(x, math.pi / 2) < tol for x in coords]
    if all(zeros):
        return 0
    if sum(zeros) == 2:
        other = coords[zeros.index(False)]
        if abs(_dist_mod(other, math.pi / 2) - math.pi / 4) < tol:
            return 1
    if any(zeros):
        return 2
    return 3


def _match_locals(u_su4: np.ndarray, w_su4: np.ndarray, seed: int):
    """Find A, B, C, D with u = (A x B) w (C x D) up to phase, or None."""
    um = _MAGIC_DAG @ u_su4 @ _MAGIC
    wm = _MAGIC_DAG @ w_su4 @ _MAGIC
    p, du = _real_diagonalizer(um @ um.T, seed)
    for sign in (1, -1, 1j, -1j):
        wms = wm * cmath.sqrt(sign)
        q, dw = _real_diagonalizer(wms @ wms.T, seed)
        order, used = [], set()
        for x in du:
            cand = [j for j in range(4) if j not in used]
            j = min(cand, key=lambda j: abs(dw[j] - x))
            if abs(dw[j] - x) > 1e-6:
                break
            order.append(j)
            used.add(j)
        else:
            qq = q[:, order]
            if np.linalg.det(qq) < 0:
                qq[:, -1] *= -1
            g = p @ qq.T
            h = wms.conj().T @ g.T @ um
            ab = _MAGIC @ g @ _MAGIC_DAG
            cd = _MAGIC @ h @ _MAGIC_DAG
            a, b, r1 = _kron_factor(ab)
            c, d, r2 = _kron_factor(cd)
            if max(r1, r2) < 1e-9:
                return a, b, c, d
    return None


def kak_decompose(u) -> TwoQubitDecomposition:
    """Express a two-qubit unitary with at most three CNOTs and U1Q gates.

    The canonical (Weyl) coordinates select a CNOT skeleton of minimal size;
    local factors are then recovered in the magic basis by matching the
    spectra of ``M M^T`` for the target and the skeleton. Near-degenerate
    spectra are retried under deterministic perturbation seeds, escalating
    the skeleton when a lower CNOT count cannot meet 1e-9.
    """
    u = _check_unitary(u, 4)
    u_su4, _ = _to_su4(u)
    last_error = None
    for seed in range(4):
        coords = _canonical_coordinates(u_su4, seed)
        start = _minimal_cnot_count(coords, 1e-9)
        for count in range(start, 4):
            skel = _skeleton(count, coords)
            w = circuit_unitary(Circuit.build(2, skel)) if skel else np.eye(4, dtype=complex)
            w_su4, _ = _to_su4(w)
            found = _match_locals(u_su4, w_su4, seed)
            if found is None:
                continue
            a, b, c, d = found
            if count == 0:
                ops = [_u1(a @ c, 0), _u1(b @ d, 1)]
            else:
                ops = [_u1(c, 0), _u1(d, 1), *skel, _u1(a, 0), _u1(b, 1)]
            rebuilt = circuit_unitary(Circuit.build(2, ops))
            err = equal_up_to_phase(u, rebuilt)
            last_error = err
            if err <= 1e-10:
                overlap = np.vdot(rebuilt, u)
                return TwoQubitDecomposition(
                    tuple(ops), cmath.phase(overlap), tuple(float(x) for x in coords)
                )
    raise ValidationError(f"KAK decomposition failed to converge (last error {last_error})")


# --------------------------------------------------------------------------- passes

_TOFFOLI_NETWORK = (
    ("H", (2,)), ("CNOT", (1, 2)), ("Tdg", (2,)), ("CNOT", (0, 2)), ("T", (2,)),
    ("CNOT", (1, 2)), ("Tdg", (2,)), ("CNOT", (0, 2)), ("T", (1,)), ("T", (2,)),
    ("H", (2,)), ("CNOT", (0, 1)), ("T", (0,)), ("Tdg", (1,)), ("CNOT", (0, 1)),
)


def _remap_ctrl(ops: list[GateOp], origin: list[int | None]) -> list[GateOp]:
    """Rewrite ``ctrl`` references after ops were inserted, moved or removed.

    ``origin[i]`` is the source index of output op ``i`` when it is the
    unchanged carry-over of a source op (measurements always are).
    """
    where = {src: i for i, src in enumerate(origin) if src is not None}
    out = []
    for op in ops:
        if op.ctrl is not None:
            op = GateOp(op.kind, op.qubits, op.angle, where[op.ctrl], op.matrix)
        out.append(op)
    return out


def _expand(circuit: Circuit, rewrite) -> list[GateOp]:
    ops, origin = [], []
    for i, op in enumerate(circuit.ops):
        repl = rewrite(op)
        if repl is None:
            ops.append(op)
            origin.append(i)
        else:
            ops.extend(repl)
            origin.extend([None] * len(repl))
    return _remap_ctrl(ops, origin)


def _no_ctrl(op: GateOp, kinds) -> None:
    if op.ctrl is not None and op.kind in kinds:
        raise UnsupportedGateError(f"classically controlled {op.kind} is not supported")


def decompose_multiqubit(circuit: Circuit) -> Circuit:
    """Expand Toffoli (6 CNOT network) and SWAP (3 CNOTs); nothing wider than 2 qubits remains."""

    def rewrite(op):
        if op.kind == "Toffoli":
            _no_ctrl(op, {"Toffoli"})
            return [GateOp(k, tuple(op.qubits[i] for i in qs)) for k, qs in _TOFFOLI_NETWORK]
        if op.kind == "SWAP":
            _no_ctrl(op, {"SWAP"})
            a, b = op.qubits
            return [GateOp("CNOT", (a, b)), GateOp("CNOT", (b, a)), GateOp("CNOT", (a, b))]
        if len(op.qubits) > 2 and op.kind not in ("Toffoli",):
            raise UnsupportedGateError(f"no decomposition for {len(op.qubits)}-qubit {op.kind}")
        return None

    return circuit.with_ops(_expand(circuit, rewrite))


_ALPHABET_1Q = frozenset({"H", "S", "Sdg", "X", "Y", "Z", "Rz"})
_UNITARY_1Q = frozenset({"I", "X", "Y", "Z", "H", "S", "Sdg", "T", "Tdg", "Rz", "Rx", "Ry", "U1Q"})


_T_ANGLES = {"T": math.pi / 4, "Tdg": -math.pi / 4}


def _direct_1q(op: GateOp) -> list[GateOp]:
    q = op.qubits[0]
    if op.kind == "Rz":
        return _snap_rz(op.angle, q)
    if op.kind in _T_ANGLES:
        return [GateOp("Rz", (q,), angle=_T_ANGLES[op.kind])]
    if op.kind == "I":
        return []
    if op.kind in _ALPHABET_1Q:
        return [op]
    return single_qubit_to_clifford_rz(gate_matrix(op), q)


def _fuse_run(run: list[GateOp]) -> list[GateOp]:
    """Shorter of the gate-by-gate translation and a fresh ZYZ synthesis of the run."""
    direct = [g for op in run for g in _direct_1q(op)]
    m = np.eye(2, dtype=complex)
    for op in run:
        m = gate_matrix(op) @ m
    candidate = single_qubit_to_clifford_rz(m, run[0].qubits[0])
    return candidate if len(candidate) < len(direct) else direct


def _fuse_pass(ops: list[GateOp]) -> tuple[list[GateOp], list[int | None]]:
    out: list[GateOp] = []
    origin: list[int | None] = []
    runs: dict[int, list[tuple[int, GateOp]]] = {}

    def flush(q):
        run = runs.pop(q, None)
        if not run:
            return
        fused = _fuse_run([op for _, op in run])
        if fused == [op for _, op in run]:
            out.extend(op for _, op in run)
            origin.extend(i for i, _ in run)
        else:
            out.extend(fused)
            origin.extend([None] * len(fused))

    for i, op in enumerate(ops):
        if op.kind in _UNITARY_1Q and op.ctrl is None:
            runs.setdefault(op.qubits[0], []).append((i, op))
            continue
        for q in op.qubits:
            flush(q)
        out.append(op)
        origin.append(i)
    for q in sorted(runs):
        flush(q)
    return out, origin


def _cancel_cnot_pass(ops: list[GateOp]) -> tuple[list[GateOp], list[int | None]]:
    alive = [True] * len(ops)
    stacks: dict[int, list[int]] = {}
    for i, op in enumerate(ops):
        if op.kind == "CNOT" and op.ctrl is None:
            a, b = op.qubits
            sa, sb = stacks.get(a, []), stacks.get(b, [])
            if sa and sb and sa[-1] == sb[-1]:
                j = sa[-1]
                prev = ops[j]
                if prev.kind == "CNOT" and prev.ctrl is None and prev.qubits == op.qubits:
                    alive[i] = alive[j] = False
                    sa.pop()
                    sb.pop()
                    continue
        for q in op.qubits:
            stacks.setdefault(q, []).append(i)
    keep = [i for i in range(len(ops)) if alive[i]]
    return [ops[i] for i in keep], keep


def merge_eject(circuit: Circuit) -> Circuit:
    """Fuse single-qubit runs, cancel adjacent CNOT pairs and snap Clifford angles.

    Runs to a fixpoint, so a second application is the identity.
    """
    ops = list(circuit.ops)
    if any(len(op.qubits) > 2 for op in ops):
        raise UnsupportedGateError("merge_eject expects one- and two-qubit gates only")
    while True:
        fused, origin = _fuse_pass(ops)
        fused = _remap_ctrl(fused, origin)
        cancelled, keep = _cancel_cnot_pass(fused)
        cancelled = _remap_ctrl(cancelled, keep)
        if cancelled == ops:
            break
        ops = cancelled
    return circuit.with_ops(ops)


def _lower_gate(op: GateOp) -> list[GateOp] | None:
    q = op.qubits
    kind = op.kind
    if op.ctrl is not None and kind not in ("X", "Y", "Z", "H", "S", "Sdg", "CNOT"):
        raise UnsupportedGateError(f"classically controlled {kind} is not supported")
    if kind == "U2Q":
        dec = kak_decompose(gate_matrix(op))
        out = []
        for g in dec.ops:
            mapped = tuple(q[i] for i in g.qubits)
            if g.kind == "U1Q":
                out.extend(single_qubit_to_clifford_rz(gate_matrix(g), mapped[0]))
            else:
                out.append(GateOp(g.kind, mapped))
        return out
    if kind == "CZ":
        a, b = q
        return [GateOp("H", (b,)), GateOp("CNOT", (a, b)), GateOp("H", (b,))]
    if kind == "Rx":
        return [GateOp("H", q), GateOp("Rz", q, angle=op.angle), GateOp("H", q)]
    if kind == "Ry":
        return [
            GateOp("Sdg", q), GateOp("H", q), GateOp("Rz", q, angle=op.angle),
            GateOp("H", q), GateOp("S", q),
        ]
    if kind == "T":
        return [GateOp("Rz", q, angle=math.pi / 4)]
    if kind == "Tdg":
        return [GateOp("Rz", q, angle=-math.pi / 4)]
    if kind == "U1Q":
        return single_qubit_to_clifford_rz(gate_matrix(op), q[0])
    if kind == "I":
        return []
    return None


def to_clifford_rz(circuit: Circuit) -> Circuit:
    if circuit.level != "input":
        raise ValidationError(f"stage-1 compilation expects an input circuit, got {circuit.level}")
    c = decompose_multiqubit(circuit)
    c = c.with_ops(_expand(c, _lower_gate))
    c = merge_eject(c)
    bad = sorted({op.kind for op in c.ops} - CLIFFORD_RZ_ALPHABET)
    if bad:
        raise UnsupportedGateError(f"stage-1 output contains non Clifford+Rz ops: {bad}")
    return c.with_ops(c.ops, level="clifford_rz")

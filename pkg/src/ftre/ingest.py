"""Circuit readers and writers: a QASM-2 subset and the native JSON format."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass

from .circuit import ARITY, LEVELS, MATRIX_KINDS, ROTATIONS, Circuit, GateOp, QubitId
from .errors import CircuitParseError, FtreError, UnsupportedGateError


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    column: int
    message: str
    severity: str = "error"
    path: str | None = None

    def __str__(self) -> str:
        where = f"{self.path}: " if self.path else ""
        return f"{self.line}:{self.column}: {self.severity}: {where}{self.message}"


def _text(source) -> str:
    if isinstance(source, (bytes, bytearray)):
        try:
            return bytes(source).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CircuitParseError([ParseDiagnostic(1, 1, f"input is not UTF-8 ({exc.reason})")])
    return source


# --------------------------------------------------------------------------- QASM

_QASM_GATES = {
    "id": "I", "i": "I", "x": "X", "y": "Y", "z": "Z", "h": "H",
    "s": "S", "sdg": "Sdg", "t": "T", "tdg": "Tdg",
    "rz": "Rz", "rx": "Rx", "ry": "Ry",
    "cx": "CNOT", "CX": "CNOT", "cz": "CZ", "swap": "SWAP", "ccx": "Toffoli",
}
_QASM_NAMES = {
    "I": "id", "X": "x", "Y": "y", "Z": "z", "H": "h", "S": "s", "Sdg": "sdg",
    "T": "t", "Tdg": "tdg", "Rz": "rz", "Rx": "rx", "Ry": "ry",
    "CNOT": "cx", "CZ": "cz", "SWAP": "swap", "Toffoli": "ccx",
}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/()]))"
)


class _ExprError(Exception):
    def __init__(self, message: str, offset: int):
        super().__init__(message)
        self.offset = offset


class _AngleParser:
    """Recursive descent over + - * / unary minus, parentheses, floats and ``pi``."""

    def __init__(self, text: str):
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise _ExprError(f"unexpected character {text[pos]!r} in expression", pos)
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.i = 0
        self.end = len(text)

    def _peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, self.end)

    def parse(self) -> float:
        if not self.tokens:
            raise _ExprError("empty expression", 0)
        value = self._sum()
        kind, tok, off = self._peek()
        if kind is not None:
            raise _ExprError(f"unexpected {tok!r} in expression", off)
        if not math.isfinite(value):
            raise _ExprError("expression is not finite", 0)
        return value

    def _sum(self) -> float:
        value = self._product()
        while self._peek()[1] in ("+", "-"):
            op = self.tokens[self.i][1]
            self.i += 1
            rhs = self._product()
            value = value + rhs if op == "+" else value - rhs
        return value

    def _product(self) -> float:
        value = self._unary()
        while self._peek()[1] in ("*", "/"):
            _, op, off = self.tokens[self.i]
            self.i += 1
            rhs = self._unary()
            if op == "*":
                value *= rhs
            elif rhs == 0:
                raise _ExprError("division by zero", off)
            else:
                value /= rhs
        return value

    def _unary(self) -> float:
        if self._peek()[1] in ("+", "-"):
            op = self.tokens[self.i][1]
            self.i += 1
            v = self._unary()
            return -v if op == "-" else v
        return self._atom()

    def _atom(self) -> float:
        kind, tok, off = self._peek()
        if kind is None:
            raise _ExprError("expression ends unexpectedly", off)
        self.i += 1
        if kind == "num":
            return float(tok)
        if kind == "name":
            if tok == "pi":
                return math.pi
            raise _ExprError(f"unknown identifier {tok!r}", off)
        if tok == "(":
            value = self._sum()
            if self._peek()[1] != ")":
                raise _ExprError("missing ')'", self._peek()[2])
            self.i += 1
            return value
        raise _ExprError(f"unexpected {tok!r}", off)


def parse_angle(text: str) -> float:
    try:
        return _AngleParser(text).parse()
    except _ExprError as exc:
        raise ValueError(str(exc)) from None


_STMT_REG = re.compile(r"(qreg|creg)\s+([A-Za-z_]\w*)\s*\[\s*(\d+)\s*\]$")
_STMT_GATE = re.compile(r"([A-Za-z_]\w*)\s*(?:\((.*)\))?\s+(.+)$", re.S)
_ARG = re.compile(r"([A-Za-z_]\w*)\s*\[\s*(\d+)\s*\]$")
_MEASURE = re.compile(r"measure\s+(.+?)\s*->\s*(.+)$")
_IF = re.compile(r"if\s*\(\s*([A-Za-z_]\w*)\s*(?:\[\s*(\d+)\s*\])?\s*==\s*(\d+)\s*\)\s*(.+)$", re.S)


def _statements(src: str):
    """Yield (text, line, column) for each ';'-terminated statement, skipping // comments."""
    buf, start = [], None
    for lineno, raw in enumerate(src.splitlines(), 1):
        line = raw.split("//", 1)[0]
        col = 0
        while col < len(line):
            ch = line[col]
            if start is None:
                if ch.isspace():
                    col += 1
                    continue
                start = (lineno, col + 1)
            if ch == ";":
                yield "".join(buf).strip(), start[0], start[1]
                buf, start = [], None
            else:
                buf.append(ch)
            col += 1
        if start is not None:
            buf.append(" ")
    if start is not None and "".join(buf).strip():
        yield None, start[0], start[1]


class _QasmReader:
    def __init__(self):
        self.qregs: dict[str, tuple[int, int]] = {}
        self.cregs: dict[str, tuple[int, int]] = {}
        self.labels: list[str] = []
        self.n_clbits = 0
        self.ops: list[GateOp] = []
        self.last_write: dict[int, int] = {}
        self.diags: list[ParseDiagnostic] = []
        self.seen_header = False

    def error(self, line, col, msg):
        self.diags.append(ParseDiagnostic(line, col, msg))

    def bit(self, text, regs, what):
        m = _ARG.match(text.strip())
        if not m:
            if text.strip() in regs and regs[text.strip()][1] == 1:
                return regs[text.strip()][0]
            raise ValueError(f"expected an indexed {what} like name[0], got {text.strip()!r}")
        name, idx = m.group(1), int(m.group(2))
        if name not in regs:
            raise ValueError(f"undeclared {what} register {name!r}")
        base, size = regs[name]
        if idx >= size:
            raise ValueError(f"index {idx} out of range for {name}[{size}]")
        return base + idx

    def statement(self, text, line, col):
        if text is None:
            self.error(line, col, "statement is missing its terminating ';'")
            return
        if not text:
            return
        head = text.split(None, 1)[0]
        if head == "OPENQASM":
            version = text[len(head):].strip()
            if version not in ("2.0", "2"):
                self.error(line, col, f"unsupported OPENQASM version {version!r}")
            self.seen_header = True
            return
        if head == "include":
            if text[len(head):].strip() != '"qelib1.inc"':
                self.error(line, col, "only the standard qelib1.inc include is accepted")
            return
        if head in ("gate", "opaque"):
            self.error(line, col, "gate definitions are not supported")
            return
        if head == "barrier":
            return
        m = _STMT_REG.match(text)
        if m:
            kind, name, size = m.group(1), m.group(2), int(m.group(3))
            regs = self.qregs if kind == "qreg" else self.cregs
            if name in self.qregs or name in self.cregs:
                self.error(line, col, f"register {name!r} declared twice")
                return
            if kind == "qreg":
                regs[name] = (len(self.labels), size)
                self.labels.extend(f"{name}[{i}]" for i in range(size))
            else:
                regs[name] = (self.n_clbits, size)
                self.n_clbits += size
            return
        ctrl = None
        m = _IF.match(text)
        if m:
            name, idx, value, text = m.group(1), m.group(2), int(m.group(3)), m.group(4).strip()
            try:
                cbit = self.bit(f"{name}[{idx}]" if idx is not None else name, self.cregs, "classical bit")
            except ValueError as exc:
                self.error(line, col, str(exc))
                return
            if value != 1:
                self.error(line, col, "only conditions of the form (bit == 1) are supported")
                return
            if cbit not in self.last_write:
                self.error(line, col, "condition refers to a bit that no measurement has written")
                return
            ctrl = self.last_write[cbit]
            if text.split(None, 1)[0] in ("measure", "reset", "if"):
                self.error(line, col, "only single gates may be classically conditioned")
                return
        m = _MEASURE.match(text)
        if m:
            try:
                q = self.bit(m.group(1), self.qregs, "qubit")
                c = self.bit(m.group(2), self.cregs, "classical bit")
            except ValueError as exc:
                self.error(line, col, str(exc))
                return
            self.last_write[c] = len(self.ops)
            self.ops.append(GateOp("Measure", (q,)))
            return
        m = _STMT_GATE.match(text)
        if not m:
            self.error(line, col, f"cannot parse statement {text!r}")
            return
        name, params, args = m.group(1), m.group(2), m.group(3)
        if name == "reset":
            kind = "Reset"
        elif name in _QASM_GATES:
            kind = _QASM_GATES[name]
        else:
            self.error(line, col, f"unsupported gate {name!r}")
            return
        angle = None
        if kind in ROTATIONS:
            if params is None:
                self.error(line, col, f"{name} needs an angle argument")
                return
            try:
                angle = parse_angle(params)
            except ValueError as exc:
                self.error(line, col + text.index("(") + 1, f"malformed angle expression: {exc}")
                return
        elif params is not None:
            self.error(line, col, f"{name} takes no parameters")
            return
        try:
            qubits = tuple(self.bit(a, self.qregs, "qubit") for a in args.split(","))
            op = GateOp(kind, qubits, angle=angle, ctrl=ctrl)
        except (ValueError, FtreError) as exc:
            self.error(line, col, str(exc))
            return
        self.ops.append(op)


def parse_qasm(source) -> Circuit:
    """Parse the supported OpenQASM 2.0 subset into an ``input`` level circuit.

    Raises CircuitParseError carrying every diagnostic found.
    """
    src = _text(source)
    reader = _QasmReader()
    for text, line, col in _statements(src):
        try:
            reader.statement(text, line, col)
        except RecursionError:
            reader.error(line, col, "expression nested too deeply")
    if reader.diags:
        raise CircuitParseError(reader.diags)
    qubits = tuple(QubitId(i, label) for i, label in enumerate(reader.labels))
    try:
        return Circuit(qubits, tuple(reader.ops), "input")
    except FtreError as exc:
        raise CircuitParseError([ParseDiagnostic(0, 0, str(exc))]) from None


def emit_qasm(circuit: Circuit) -> str:
    """Write an input or Clifford-level circuit as OpenQASM 2.0 over register ``q``."""
    pos = {q.index: i for i, q in enumerate(circuit.qubits)}
    measures = [i for i, op in enumerate(circuit.ops) if op.kind == "Measure"]
    bit_of = {op_index: b for b, op_index in enumerate(measures)}
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{circuit.n_qubits}];"]
    if measures:
        lines.append(f"creg c[{len(measures)}];")
    for i, op in enumerate(circuit.ops):
        args = ",".join(f"q[{pos[q]}]" for q in op.qubits)
        if op.kind == "Measure":
            stmt = f"measure {args} -> c[{bit_of[i]}]"
        elif op.kind == "Reset":
            stmt = f"reset {args}"
        elif op.kind in _QASM_NAMES:
            name = _QASM_NAMES[op.kind]
            if op.angle is not None:
                name += f"({op.angle!r})"
            stmt = f"{name} {args}"
        else:
            raise UnsupportedGateError(f"{op.kind} has no OpenQASM 2.0 form")
        if op.ctrl is not None:
            stmt = f"if(c[{bit_of[op.ctrl]}]==1) {stmt}"
        lines.append(stmt + ";")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------- native JSON

_OP_KEYS = {"kind", "qubits", "angle", "ctrl", "matrix", "rounds", "sites", "intent"}
_DOC_KEYS = {"qubits", "level", "ops", "labels"}


def _schema_error(path, msg):
    return CircuitParseError([ParseDiagnostic(0, 0, msg, path=path)])


def _is_int(x):
    return isinstance(x, int) and not isinstance(x, bool)


def _is_num(x):
    return (isinstance(x, (int, float)) and not isinstance(x, bool)) and math.isfinite(x)


def _op_from_json(i, raw, n_qubits):
    path = f"ops[{i}]"
    if not isinstance(raw, dict):
        raise _schema_error(path, "op must be an object")
    extra = set(raw) - _OP_KEYS
    if extra:
        raise _schema_error(f"{path}.{sorted(extra)[0]}", "unknown field")
    kind = raw.get("kind")
    if not isinstance(kind, str) or kind not in ARITY:
        raise _schema_error(f"{path}.kind", f"unknown gate kind {kind!r}")
    qubits = raw.get("qubits")
    if not isinstance(qubits, list) or not all(_is_int(q) for q in qubits):
        raise _schema_error(f"{path}.qubits", "must be a list of integers")
    for j, q in enumerate(qubits):
        if not 0 <= q < n_qubits:
            raise _schema_error(f"{path}.qubits[{j}]", f"qubit {q} not declared")
    angle = raw.get("angle")
    if ("angle" in raw) != (kind in ROTATIONS):
        raise _schema_error(f"{path}.angle", f"angle is required iff kind is a rotation ({kind})")
    if angle is not None and not _is_num(angle):
        raise _schema_error(f"{path}.angle", "must be a finite number")
    ctrl = raw.get("ctrl")
    if ctrl is not None and not _is_int(ctrl):
        raise _schema_error(f"{path}.ctrl", "must be an op index")
    matrix = raw.get("matrix")
    if ("matrix" in raw) != (kind in MATRIX_KINDS):
        raise _schema_error(f"{path}.matrix", f"matrix is required iff kind is U1Q/U2Q ({kind})")
    if matrix is not None:
        if not isinstance(matrix, list) or not all(
            isinstance(e, list) and len(e) == 2 and all(_is_num(x) for x in e) for e in matrix
        ):
            raise _schema_error(f"{path}.matrix", "must be a list of [re, im] pairs")
        matrix = tuple(complex(re_, im) for re_, im in matrix)
    rounds = raw.get("rounds", 1)
    if not _is_int(rounds) or rounds < 1:
        raise _schema_error(f"{path}.rounds", "must be a positive integer")
    sites = raw.get("sites")
    if sites is not None and (not _is_num(sites) or sites < 0):
        raise _schema_error(f"{path}.sites", "must be a nonnegative number")
    intent = raw.get("intent")
    if intent is not None and not isinstance(intent, str):
        raise _schema_error(f"{path}.intent", "must be a string")
    try:
        return GateOp(kind, tuple(qubits), angle, ctrl, matrix, rounds, sites, intent)
    except FtreError as exc:
        raise _schema_error(path, str(exc)) from None


def parse_native(source) -> Circuit:
    """Parse a native JSON circuit document; schema errors name the offending path."""
    src = _text(source)
    try:
        doc = json.loads(src)
    except json.JSONDecodeError as exc:
        raise CircuitParseError([ParseDiagnostic(exc.lineno, exc.colno, exc.msg)]) from None
    except (RecursionError, ValueError) as exc:
        raise CircuitParseError([ParseDiagnostic(0, 0, f"unreadable JSON ({exc})")]) from None
    if not isinstance(doc, dict):
        raise _schema_error("$", "document must be an object")
    extra = set(doc) - _DOC_KEYS
    if extra:
        raise _schema_error(sorted(extra)[0], "unknown field")
    n = doc.get("qubits")
    if not _is_int(n) or n < 0:
        raise _schema_error("qubits", "must be a nonnegative integer")
    level = doc.get("level", "input")
    if level not in LEVELS:
        raise _schema_error("level", f"must be one of {', '.join(LEVELS)}")
    ops = doc.get("ops")
    if not isinstance(ops, list):
        raise _schema_error("ops", "must be a list")
    labels = doc.get("labels")
    if labels is not None:
        if not isinstance(labels, list) or len(labels) != n or not all(
            x is None or isinstance(x, str) for x in labels
        ):
            raise _schema_error("labels", "must list one string or null per qubit")
    else:
        labels = [None] * n
    parsed = [_op_from_json(i, raw, n) for i, raw in enumerate(ops)]
    try:
        return Circuit(tuple(QubitId(i, labels[i]) for i in range(n)), tuple(parsed), level)
    except FtreError as exc:
        raise _schema_error("ops", str(exc)) from None


def _num(x: float) -> str:
    if isinstance(x, int):
        return str(x)
    return format(x, ".17g")


def _op_to_json(op: GateOp) -> str:
    fields = {"kind": json.dumps(op.kind), "qubits": json.dumps(list(op.qubits), separators=(",", ":"))}
    if op.angle is not None:
        fields["angle"] = _num(op.angle)
    if op.ctrl is not None:
        fields["ctrl"] = str(op.ctrl)
    if op.matrix is not None:
        fields["matrix"] = "[" + ",".join(f"[{_num(z.real)},{_num(z.imag)}]" for z in op.matrix) + "]"
    if op.rounds != 1:
        fields["rounds"] = str(op.rounds)
    if op.sites is not None:
        fields["sites"] = _num(op.sites)
    if op.intent is not None:
        fields["intent"] = json.dumps(op.intent)
    return "{" + ",".join(f'"{k}":{fields[k]}' for k in sorted(fields)) + "}"


def emit_native(circuit: Circuit) -> str:
    """Canonical native JSON: sorted keys, 17 significant digits, one op per array element."""
    pos = {q.index: i for i, q in enumerate(circuit.qubits)}
    if any(q.index != i for i, q in enumerate(circuit.qubits)):
        circuit = circuit.__class__(
            tuple(QubitId(i, q.label) for i, q in enumerate(circuit.qubits)),
            tuple(
                GateOp(op.kind, tuple(pos[q] for q in op.qubits), op.angle, op.ctrl,
                       op.matrix, op.rounds, op.sites, op.intent)
                for op in circuit.ops
            ),
            circuit.level,
        )
    fields = {
        "level": json.dumps(circuit.level),
        "ops": "[" + ",".join(_op_to_json(op) for op in circuit.ops) + "]",
        "qubits": str(circuit.n_qubits),
    }
    if any(q.label is not None for q in circuit.qubits):
        fields["labels"] = json.dumps([q.label for q in circuit.qubits], separators=(",", ":"))
    return "{" + ",".join(f'"{k}":{fields[k]}' for k in sorted(fields)) + "}"


def load_circuit(path) -> Circuit:
    """Read a circuit file, choosing the parser from the extension (.qasm or .json)."""
    from pathlib import Path

    p = Path(path)
    data = p.read_bytes()
    if p.suffix.lower() == ".json":
        return parse_native(data)
    return parse_qasm(data)

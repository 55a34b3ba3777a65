"""Resource estimates from a primitive circuit: critical path, serial time, breakdowns, reports."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Sequence

from .architecture import PS_PER_US, Architecture, OpTimer, architecture_to_config
from .circuit import Circuit, OpDag, build_dag
from .errors import FtreError, ValidationError
from .layout import LayoutGrid

SCHEMA = "ftre-report/1"
CULTIVATION_KINDS = ("CultT", "CultS")


def critical_path(dag: OpDag) -> tuple[float, list[int]]:
    """Longest duration-weighted path, by relaxation in topological order.

    Ties go to the smaller op index, both between predecessors and between
    end nodes. Works on int or float durations.
    """
    order = dag.topological_order()
    dist = [0] * dag.n
    back: list[int | None] = [None] * dag.n
    for v in order:
        best_p, best = None, 0
        for p in dag.preds[v]:
            if best_p is None or dist[p] > best:
                best_p, best = p, dist[p]
        back[v] = best_p
        dist[v] = best + dag.durations[v]
    if dag.n == 0:
        return 0, []
    end = max(range(dag.n), key=lambda v: (dist[v], -v))
    path = [end]
    while back[path[-1]] is not None:
        path.append(back[path[-1]])
    return dist[end], path[::-1]


def circuit_critical_path(circuit: Circuit, durations: Sequence[int]) -> tuple[int, list[int]]:
    """critical_path over build_dag(circuit) without materializing the graph.

    Program order is a topological order, and each op's predecessors are the
    previous op on each of its qubits plus its controlling measurement.
    """
    last: dict[int, int] = {}
    dist: list[int] = []
    back: list[int | None] = []
    for i, op in enumerate(circuit.ops):
        preds = {last[q] for q in op.qubits if q in last}
        if op.ctrl is not None:
            preds.add(op.ctrl)
        best_p, best = None, 0
        for p in sorted(preds):
            if best_p is None or dist[p] > best:
                best_p, best = p, dist[p]
        dist.append(best + durations[i])
        back.append(best_p)
        for q in op.qubits:
            last[q] = i
    if not dist:
        return 0, []
    end = max(range(len(dist)), key=lambda v: (dist[v], -v))
    path = [end]
    while back[path[-1]] is not None:
        path.append(back[path[-1]])
    return dist[end], path[::-1]


def op_durations_ps(circuit: Circuit, arch: Architecture, timer: OpTimer | None = None) -> list[int]:
    timer = timer or OpTimer(arch)
    return [timer.duration(op) for op in circuit.ops]


def primitive_dag(circuit: Circuit, arch: Architecture, timer: OpTimer | None = None) -> OpDag:
    """Dependency DAG with integer-picosecond durations."""
    durations = op_durations_ps(circuit, arch, timer)
    float_dag = build_dag(circuit, [0.0] * len(durations))
    return OpDag(float_dag.n, float_dag.edges, tuple(durations))


def serial_time(circuit: Circuit, duration: Callable | Sequence | Architecture) -> float:
    """Sum of all op durations in µs (an Architecture, a per-op callable in µs, or a list in µs)."""
    if isinstance(duration, Architecture):
        return sum(op_durations_ps(circuit, duration)) / PS_PER_US
    if callable(duration):
        return float(sum(duration(op) for op in circuit.ops))
    return float(sum(duration))


@dataclass(frozen=True)
class Breakdown:
    by_primitive: dict[str, tuple[int, int]]  # kind -> (ops on critical path, ps)
    by_physical: dict[str, int]  # class -> ps, Movement merges Z- and A-Moves


def breakdowns(circuit: Circuit, path: Sequence[int], arch: Architecture,
               timer: OpTimer | None = None) -> Breakdown:
    """Split the critical path by primitive kind and by physical operation class."""
    timer = timer or OpTimer(arch)
    by_kind: dict[str, list[int]] = {}
    phys = {"1Q": 0, "2Q": 0, "Measure": 0, "Reset": 0, "Movement": 0, "other": 0}
    for i in path:
        op = circuit.ops[i]
        classes = timer.classes(op)
        entry = by_kind.setdefault(op.kind, [0, 0])
        entry[0] += 1
        entry[1] += sum(classes.values())
        for cls, ps in classes.items():
            phys["Movement" if cls in ("ZMove", "AMove") else cls] += ps
    return Breakdown({k: (v[0], v[1]) for k, v in sorted(by_kind.items())}, phys)


def _us(ps: int) -> float:
    return ps / PS_PER_US


@dataclass(frozen=True)
class ResourceReport:
    logical_qubits: int
    physical_qubits: int
    d: int
    critical_path_ps: int
    serial_ps: int
    breakdown: Breakdown
    budget: dict | None
    architecture: dict
    layout: dict
    circuit: dict = field(default_factory=dict)
    primitive_counts: dict = field(default_factory=dict)

    @property
    def critical_path_us(self) -> float:
        return _us(self.critical_path_ps)

    @property
    def serial_us(self) -> float:
        return _us(self.serial_ps)

    @property
    def cultivation_fraction(self) -> float:
        if self.critical_path_ps == 0:
            return 0.0
        cult = sum(self.breakdown.by_primitive.get(k, (0, 0))[1] for k in CULTIVATION_KINDS)
        return cult / self.critical_path_ps

    @property
    def fingerprint(self) -> str:
        return config_fingerprint(self.architecture, self.layout)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "fingerprint": self.fingerprint,
            "architecture": self.architecture,
            "layout": self.layout,
            "circuit": self.circuit,
            "budget": self.budget,
            "d": self.d,
            "logical_qubits": self.logical_qubits,
            "physical_qubits": self.physical_qubits,
            "critical_path_us": self.critical_path_us,
            "critical_path_ps": self.critical_path_ps,
            "serial_us": self.serial_us,
            "serial_ps": self.serial_ps,
            "cultivation_fraction": self.cultivation_fraction,
            "by_primitive": {k: {"count": c, "us": _us(ps), "ps": ps}
                             for k, (c, ps) in self.breakdown.by_primitive.items()},
            "by_physical": {k: {"us": _us(ps), "ps": ps} for k, ps in self.breakdown.by_physical.items()},
            "primitive_counts": self.primitive_counts,
        }


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def config_fingerprint(architecture: dict, layout: dict) -> str:
    blob = json.dumps({"architecture": architecture, "layout": layout}, sort_keys=True,
                      separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def build_report(circuit: Circuit, arch: Architecture, layout: LayoutGrid, budget: dict | None = None,
                 circuit_info: dict | None = None) -> ResourceReport:
    """Compute every figure of merit for a compiled primitive circuit."""
    if circuit.level != "primitive":
        raise ValidationError(f"reports need a primitive circuit, got {circuit.level}")
    timer = OpTimer(arch)
    durations = op_durations_ps(circuit, arch, timer)
    length, path = circuit_critical_path(circuit, durations)
    bd = breakdowns(circuit, path, arch, timer)
    counts: dict[str, int] = {}
    for op in circuit.ops:
        counts[op.kind] = counts.get(op.kind, 0) + 1
    logical = layout.n_logical
    return ResourceReport(
        logical_qubits=logical,
        physical_qubits=arch.d ** 2 * logical,
        d=arch.d,
        critical_path_ps=int(length),
        serial_ps=sum(durations),
        breakdown=bd,
        budget=budget,
        architecture=architecture_to_config(arch),
        layout=layout.to_dict(),
        circuit=dict(circuit_info or {}),
        primitive_counts=dict(sorted(counts.items())),
    )


def report_schema() -> dict:
    text = resources.files("ftre").joinpath("data/report.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate_report(obj: dict) -> None:
    """Raise ValidationError unless ``obj`` matches the report schema and its own invariants."""
    import jsonschema

    try:
        jsonschema.validate(obj, report_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValidationError(f"report invalid at {where}: {exc.message}") from None
    if sum(v["ps"] for v in obj["by_primitive"].values()) != obj["critical_path_ps"]:
        raise ValidationError("by_primitive does not sum to the critical path")
    if sum(v["ps"] for v in obj["by_physical"].values()) != obj["critical_path_ps"]:
        raise ValidationError("by_physical does not sum to the critical path")
    if obj["serial_ps"] < obj["critical_path_ps"]:
        raise ValidationError("serial time is below the critical path")
    if obj["physical_qubits"] != obj["d"] ** 2 * obj["logical_qubits"]:
        raise ValidationError("physical qubits must equal d^2 times logical qubits")


def breakdown_primitive_csv(report: ResourceReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kind", "count", "us", "cumulative_us"])
    total = 0
    rows = sorted(report.breakdown.by_primitive.items(), key=lambda kv: (-kv[1][1], kv[0]))
    for kind, (count, ps) in rows:
        total += ps
        w.writerow([kind, count, repr(_us(ps)), repr(_us(total))])
    return buf.getvalue()


def breakdown_physical_csv(report: ResourceReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["class", "us"])
    for cls, ps in report.breakdown.by_physical.items():
        w.writerow([cls, repr(_us(ps))])
    return buf.getvalue()


def emit_report(report: ResourceReport, out_dir: str | Path | None = None) -> dict[str, str]:
    """Render report.json and the breakdown CSVs; write them to ``out_dir`` when given."""
    files = {
        "report.json": canonical_json(report.to_dict()),
        "breakdown_primitive.csv": breakdown_primitive_csv(report),
        "breakdown_physical.csv": breakdown_physical_csv(report),
    }
    if out_dir is not None:
        write_files(out_dir, files)
    return files


def write_files(out_dir: str | Path, files: dict[str, str]) -> None:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, text in sorted(files.items()):
            (out / name).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise FtreError(f"cannot write output to {out}: {exc}") from exc

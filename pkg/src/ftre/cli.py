"""Command-line driver: ``ftre estimate | sweep | sensitivity | layout``."""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

from .architecture import Architecture, preset_names, resolve_architecture
from .budget import log_grid
from .circuit import gate_counts
from .errors import ConfigurationError, FtreError, InfeasibleBudgetError
from .ingest import emit_native, load_circuit
from .layout import generate_layout
from .pipeline import BUDGET_MODES, grid_for, stage1
from .report import canonical_json, emit_report, write_files

SWEEP_COLUMNS = (
    "label", "arch", "speeds", "folded", "decoding", "t_factories", "s_factories", "d",
    "logical_qubits", "physical_qubits", "critical_path_us", "serial_us", "cultivation_fraction",
    "error",
)


def _arch_ref(ref: str, speeds: str | None) -> str:
    if speeds is None:
        return ref
    if not ref.startswith("preset:"):
        raise ConfigurationError("--speeds only applies to preset architectures")
    return ref.partition("@")[0] + "@" + speeds


def apply_overrides(arch: Architecture, *, folded: str | None = None, decoding: str | None = None,
                    factories_t: int | None = None, factories_s: int | None = None,
                    layout: str | None = None, d: int | None = None) -> Architecture:
    """CLI flags take precedence over the config file and preset defaults."""
    lay = arch.layout
    if layout is not None:
        lay = replace(lay, strategy=layout)
    if factories_t is not None:
        lay = replace(lay, t_factories=factories_t)
    if factories_s is not None:
        lay = replace(lay, s_factories=factories_s)
    changes: dict = {"layout": lay}
    if folded is not None:
        changes["folded_cultivation"] = folded == "on"
    if decoding is not None:
        changes["syndrome_rounds_mode"] = "1" if decoding == "correlated" else "d"
    if d is not None:
        changes["d"] = d
    return replace(arch, **changes)


def _load_arch(args, ref=None, speeds=None, **extra) -> Architecture:
    arch = resolve_architecture(_arch_ref(ref or args.arch, speeds if speeds else args.speeds))
    opts = dict(folded=args.folded, decoding=args.decoding, factories_t=args.factories_t,
                factories_s=args.factories_s, layout=args.layout, d=args.d)
    opts.update(extra)
    return apply_overrides(arch, **opts)


def _target_error(value: float) -> float:
    if not 0 < value < 1:
        raise ConfigurationError("--error must lie in (0, 1)")
    return value


def cmd_estimate(args) -> int:
    from .pipeline import estimate

    circuit = load_circuit(args.circuit)
    arch = _load_arch(args)
    result = estimate(circuit, arch, _target_error(args.error), args.budget, d_override=args.d)
    files = emit_report(result.report)
    if args.emit_intermediate:
        files["c1.json"] = emit_native(result.c1)
        files["c2.json"] = emit_native(result.c2)
        files["primitive.json"] = emit_native(result.program.circuit)
    write_files(args.out, files)
    r = result.report
    print(f"architecture      {result.arch.name}")
    print(f"code distance     {r.d}")
    print(f"logical qubits    {r.logical_qubits}")
    print(f"physical qubits   {r.physical_qubits}")
    print(f"critical path     {r.critical_path_us:.6g} us ({r.critical_path_us / 86400e6:.4g} days)")
    print(f"serial time       {r.serial_us:.6g} us")
    print(f"cultivation share {r.cultivation_fraction:.3f}")
    print(f"fingerprint       {r.fingerprint}")
    return 0


def _split(text: str, name: str) -> list[str]:
    items = [x.strip() for x in text.split(",") if x.strip()]
    if not items:
        raise ConfigurationError(f"sweep axis {name} is empty")
    return items


def _sweep_point(task: dict) -> dict:
    """One sweep row; failures become an error entry instead of aborting the sweep."""
    from .pipeline import estimate

    row = {k: "" for k in SWEEP_COLUMNS}
    row.update(arch=task["arch"], speeds=task["speeds"], t_factories=task["t"], label=task["arch"])
    base = task["arch"].removeprefix("preset:").partition("@")[0]
    try:
        arch = resolve_architecture(_arch_ref(task["arch"], task["speeds"] or None))
        # empty axes keep the preset's own setting
        folded = task["folded"] or ("F" if arch.folded_cultivation else "U")
        decoding = task["decoding"] or ("C" if arch.syndrome_rounds_mode == "1" else "S")
        # movement architectures teleport with transversal S and need no S factories
        s = task["s"] if task["s"] is not None else (task["t"] if arch.is_lattice else 0)
        row.update(folded=folded, decoding=decoding, s_factories=s,
                   label=f"{base.removesuffix('-fold')}-{folded}{decoding}")
        arch = apply_overrides(
            arch, folded="on" if folded == "F" else "off",
            decoding="correlated" if decoding == "C" else "standard",
            factories_t=task["t"], factories_s=s, layout=task["layout"], d=task["d"])
        r = estimate(task["circuit"], arch, task["error"], task["budget"], task["d"]).report
        row.update(d=r.d, logical_qubits=r.logical_qubits, physical_qubits=r.physical_qubits,
                   critical_path_us=repr(r.critical_path_us), serial_us=repr(r.serial_us),
                   cultivation_fraction=repr(r.cultivation_fraction))
    except FtreError as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def sweep_rows(circuit, *, archs, speeds, folded, decoding, factories, s_factories=None,
               error=0.01, budget="halving", layout=None, d=None, jobs=1) -> list[dict]:
    """Evaluate the Cartesian product of the sweep axes; rows sorted deterministically."""
    c1 = stage1(circuit)
    tasks = []
    for a, sp, f, dec, t in itertools.product(archs, speeds, folded, decoding, factories):
        if f not in ("", "U", "F") or dec not in ("", "C", "S"):
            raise ConfigurationError("folded axis takes U/F and decoding axis takes C/S")
        tasks.append(dict(circuit=c1, arch=a, speeds=sp, folded=f, decoding=dec, t=t, s=s_factories,
                          error=error, budget=budget, layout=layout, d=d))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(t) for t in tasks]
    rows.sort(key=lambda r: (r["arch"], r["speeds"], r["folded"], r["decoding"], r["t_factories"]))
    return rows


def rows_to_csv(rows: list[dict], columns=SWEEP_COLUMNS) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _preset_ref(name: str) -> str:
    if name.startswith("preset:") or name.endswith(".json"):
        return name
    if name.partition("@")[0] in {n.partition("@")[0] for n in preset_names()}:
        return "preset:" + name
    raise ConfigurationError(f"unknown architecture {name!r}")


def cmd_sweep(args) -> int:
    circuit = load_circuit(args.circuit)
    try:
        factories = [int(x) for x in _split(args.factories, "factories")]
    except ValueError:
        raise ConfigurationError("--factories takes comma-separated integers") from None
    archs = [_preset_ref(a) for a in _split(args.arch, "arch")]
    speeds = _split(args.speeds, "speeds") if args.speeds else [""]
    for s in speeds:
        if s not in ("", "current", "proposed"):
            raise ConfigurationError("speeds axis takes current/proposed")
    rows = sweep_rows(circuit, archs=archs, speeds=speeds,
                      folded=_split(args.folded_axis, "folded") if args.folded_axis is not None else [""],
                      decoding=(_split(args.decoding_axis, "decoding")
                                if args.decoding_axis is not None else [""]),
                      factories=factories, s_factories=args.factories_s,
                      error=_target_error(args.error), budget=args.budget, layout=args.layout,
                      d=args.d, jobs=args.jobs)
    text = rows_to_csv(rows)
    write_files(args.out, {"sweep.csv": text})
    sys.stdout.write(text)
    return 0


def cmd_sensitivity(args) -> int:
    arch = _load_arch(args)
    if args.circuit:
        c1 = stage1(load_circuit(args.circuit))
        counts = gate_counts(c1)
        k, l = counts.k, counts.l
    elif args.k is not None and args.l is not None:
        k, l = args.k, args.l
    else:
        raise ConfigurationError("sensitivity needs --circuit or both --k and --l")
    b = arch.budget
    d_lo, d_hi = args.d_range if args.d_range else (min(b.d_values), max(b.d_values))
    b = replace(b, d_values=tuple(d for d in range(d_lo, d_hi + 1) if d >= 3 and d % 2),
                eps_rz_min=args.eps_rz_min or b.eps_rz_min, eps_rz_max=args.eps_rz_max or b.eps_rz_max)
    if not b.d_values:
        raise ConfigurationError("--d-range contains no odd distance >= 3")
    log_grid(b.eps_rz_min, b.eps_rz_max, b.points_per_decade)
    result = grid_for(replace(arch, budget=b), k, l, _target_error(args.error))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["d", "eps_rz", "eps_m", "fidelity", "rep", "feasible"])
    for p in result.surface:
        w.writerow([p.d, repr(p.eps_rz), repr(p.eps_m), repr(p.fidelity), repr(p.rep), int(p.feasible)])
    cbuf = io.StringIO()
    cw = csv.writer(cbuf, lineterminator="\n")
    cw.writerow(["d", "eps_rz", "eps_m_max"])
    for c in result.contour_max:
        cw.writerow([c.d, repr(c.eps_rz), repr(c.eps_m)])
    best = result.best.as_dict()
    write_files(args.out, {"sensitivity.csv": buf.getvalue(), "contour.csv": cbuf.getvalue(),
                           "best.json": canonical_json(best)})
    print(json.dumps(best, sort_keys=True))
    return 0


def cmd_layout(args) -> int:
    grid = generate_layout(args.strategy, args.data, args.factories_t, args.factories_s)
    text = grid.to_text()
    write_files(args.out, {"layout.txt": text, "layout.json": canonical_json(grid.to_dict())})
    sys.stdout.write(text)
    return 0


def _common(p: argparse.ArgumentParser, arch_required=True) -> None:
    p.add_argument("--arch", required=arch_required, default="preset:DSM@current",
                   help="preset:NAME[@current|@proposed] or a JSON config path")
    p.add_argument("--error", type=float, default=0.01, help="target error, 1 - fidelity")
    p.add_argument("--budget", choices=BUDGET_MODES, default="halving")
    p.add_argument("--factories-t", type=int)
    p.add_argument("--factories-s", type=int)
    p.add_argument("--layout", choices=("dense", "column", "embedded", "sandwich"))
    p.add_argument("--d", type=int, help="override the code distance")
    p.add_argument("--decoding", choices=("correlated", "standard"))
    p.add_argument("--out", default=".", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ftre", description="Fault-tolerant resource estimator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate time and qubits for one circuit")
    p.add_argument("--circuit", required=True)
    _common(p)
    p.add_argument("--folded", choices=("on", "off"))
    p.add_argument("--speeds", choices=("current", "proposed"))
    p.add_argument("--emit-intermediate", action="store_true")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("sweep", help="Cartesian sweep over factories, presets, folding, decoding, speeds")
    p.add_argument("--circuit", required=True)
    p.add_argument("--arch", required=True, help="comma-separated presets, e.g. DSM,MZO")
    p.add_argument("--factories", default="10", help="comma-separated T factory counts")
    p.add_argument("--factories-s", type=int,
                   help="S factories per point (default: same as T on lattice archs, 0 on movement)")
    p.add_argument("--folded", dest="folded_axis", help="subset of U,F (default: the preset's own)")
    p.add_argument("--decoding", dest="decoding_axis", help="subset of C,S (default: the preset's own)")
    p.add_argument("--speeds", default="", help="subset of current,proposed")
    p.add_argument("--error", type=float, default=0.01)
    p.add_argument("--budget", choices=BUDGET_MODES, default="halving")
    p.add_argument("--layout", choices=("dense", "column", "embedded", "sandwich"))
    p.add_argument("--d", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("sensitivity", help="fidelity surface over (d, eps_rz, eps_m)")
    p.add_argument("--circuit")
    p.add_argument("--k", type=int, help="Rz count, instead of --circuit")
    p.add_argument("--l", type=int, help="Clifford count, instead of --circuit")
    _common(p, arch_required=False)
    p.add_argument("--folded", choices=("on", "off"))
    p.add_argument("--speeds", choices=("current", "proposed"))
    p.add_argument("--d-range", type=int, nargs=2, metavar=("MIN", "MAX"))
    p.add_argument("--eps-rz-min", type=float)
    p.add_argument("--eps-rz-max", type=float)
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("layout", help="render a generated layout")
    p.add_argument("--strategy", required=True, choices=("dense", "column", "embedded", "sandwich"))
    p.add_argument("--data", type=int, required=True, help="number of data qubits")
    p.add_argument("--factories-t", type=int, default=0)
    p.add_argument("--factories-s", type=int, default=0)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_layout)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.best is not None:
            print("best infeasible point: " + json.dumps(exc.best.as_dict(), sort_keys=True),
                  file=sys.stderr)
        return exc.exit_code
    except FtreError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for diag in getattr(exc, "diagnostics", ()) or ():
            print(f"  {diag}", file=sys.stderr)
        return exc.exit_code
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

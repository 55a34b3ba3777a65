import csv
import io
import json

import pytest

from ftre.cli import main
from ftre.report import validate_report

QASM = ('OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[3];\nh q[0];\ncx q[0],q[1];\nt q[1];\n'
        "rz(pi/7) q[2];\nccx q[0],q[1],q[2];\n")


@pytest.fixture
def circuit(tmp_path):
    p = tmp_path / "c.qasm"
    p.write_text(QASM)
    return str(p)


def _rows(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


def test_estimate_writes_report(circuit, tmp_path, capsys):
    out = tmp_path / "est"
    code = main(["estimate", "--circuit", circuit, "--arch", "preset:DSM-fold@current",
                 "--error", "0.01", "--out", str(out), "--emit-intermediate"])
    assert code == 0
    names = {p.name for p in out.iterdir()}
    assert {"report.json", "breakdown_primitive.csv", "breakdown_physical.csv"} <= names
    assert {"c1.json", "c2.json", "primitive.json"} <= names
    validate_report(json.loads((out / "report.json").read_text()))
    assert "critical path" in capsys.readouterr().out


def test_infeasible_exit_code(circuit, tmp_path, capsys):
    code = main(["estimate", "--circuit", circuit, "--arch", "preset:DSM", "--error", "1e-30",
                 "--out", str(tmp_path)])
    assert code == 2
    assert "best infeasible point" in capsys.readouterr().err


def test_error_exit_codes(circuit, tmp_path):
    assert main(["estimate", "--circuit", str(tmp_path / "missing.qasm"), "--arch", "preset:DSM",
                 "--out", str(tmp_path)]) == 1
    assert main(["estimate", "--circuit", circuit, "--arch", "preset:NOPE",
                 "--out", str(tmp_path)]) == 3
    bad = tmp_path / "bad.qasm"
    bad.write_text("qreg q[1];\nfoo q[0];\n")
    assert main(["estimate", "--circuit", str(bad), "--arch", "preset:DSM", "--out", str(tmp_path)]) == 4


def test_factory_sweep(circuit, tmp_path):
    out = tmp_path / "sw"
    assert main(["sweep", "--circuit", circuit, "--arch", "DSM", "--factories", "1,5,10",
                 "--out", str(out)]) == 0
    rows = _rows(out / "sweep.csv")
    assert [int(r["t_factories"]) for r in rows] == [1, 5, 10]
    times = [float(r["critical_path_us"]) for r in rows]
    assert times == sorted(times, reverse=True)


def test_folding_decoding_grid(circuit, tmp_path):
    out = tmp_path / "sw"
    assert main(["sweep", "--circuit", circuit, "--arch", "DSM", "--folded", "U,F",
                 "--decoding", "C,S", "--out", str(out)]) == 0
    assert sorted(r["label"] for r in _rows(out / "sweep.csv")) == ["DSM-FC", "DSM-FS", "DSM-UC", "DSM-US"]


def test_empty_axis_is_config_error(circuit, tmp_path):
    assert main(["sweep", "--circuit", circuit, "--arch", "DSM", "--factories", "",
                 "--out", str(tmp_path)]) == 3
    assert main(["sweep", "--circuit", circuit, "--arch", "DSM", "--folded", ",",
                 "--out", str(tmp_path)]) == 3


def test_every_table_preset_is_addressable(circuit, tmp_path):
    names = "SSM,SSM-fold,MZO,MZO-fold,DSM,DSM-fold,DSNM,SSOQ"
    out = tmp_path / "sw"
    assert main(["sweep", "--circuit", circuit, "--arch", names, "--factories", "2",
                 "--speeds", "current,proposed", "--out", str(out)]) == 0
    rows = _rows(out / "sweep.csv")
    assert len(rows) == 16 and not any(r["error"] for r in rows)


def test_sensitivity(tmp_path):
    out = tmp_path / "sens"
    assert main(["sensitivity", "--k", "209", "--l", "10000", "--error", "0.01", "--out", str(out)]) == 0
    files = {p.name for p in out.iterdir()}
    assert any(f.endswith(".csv") for f in files)


def test_layout_renders(tmp_path, capsys):
    assert main(["layout", "--strategy", "dense", "--data", "20", "--factories-t", "5",
                 "--out", str(tmp_path)]) == 0
    grid = capsys.readouterr().out.strip().splitlines()
    assert len(grid) == 5 and all(len(r) == 5 for r in grid)
    assert main(["layout", "--strategy", "sandwich", "--data", "5", "--factories-t", "2",
                 "--factories-s", "2", "--out", str(tmp_path)]) == 0
    rows = capsys.readouterr().out.strip().splitlines()
    assert sum(1 for r in rows if set(r) == {"A"}) == 2
    assert main(["layout", "--strategy", "column", "--data", "4", "--out", str(tmp_path)]) == 0
    rows = capsys.readouterr().out.strip().splitlines()
    assert all(r.count("T") == 2 and r.count("S") == 2 for r in rows if "D" in r)
    assert (tmp_path / "layout.json").exists()

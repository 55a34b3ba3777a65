from __future__ import annotations

import functools

import pytest

from ftre.architecture import resolve_architecture
from ftre.pipeline import estimate, stage1
from ftre.workloads import trotter_workload

# acceptance outcomes, criterion number -> (passed, detail); printed in the terminal summary
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@functools.lru_cache(maxsize=None)
def workload_c1():
    return stage1(trotter_workload())


@functools.lru_cache(maxsize=None)
def workload_estimate(preset: str, factories: int = 10, decoding: str | None = None):
    """Cached 99%-target estimate of the synthetic workload on a preset."""
    from dataclasses import replace

    arch = resolve_architecture("preset:" + preset)
    arch = replace(arch, layout=replace(arch.layout, t_factories=factories,
                                        s_factories=factories if arch.is_lattice else 0))
    if decoding is not None:
        arch = replace(arch, syndrome_rounds_mode="1" if decoding == "correlated" else "d")
    return estimate(workload_c1(), arch, 0.01)


@pytest.fixture
def c1_workload():
    return workload_c1()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")

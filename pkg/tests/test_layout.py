import random
from collections import deque

import pytest

from ftre.errors import LayoutError, RoutingError
from ftre.layout import (
    ANCILLA,
    DATA,
    LayoutGrid,
    ancilla_path,
    generate_layout,
    manhattan,
    nearest_available_factory,
)


def test_dense_packing():
    lay = generate_layout("dense", 20, 5)
    assert (lay.width, lay.height) == (5, 5)
    assert lay.n_logical == 25 and len(lay.t_factories) == 5


def test_column_pairs_factories():
    lay = generate_layout("column", 4, 0)
    assert len(lay.t_factories) + len(lay.s_factories) == 8
    assert len(lay.t_factories) == len(lay.s_factories) == 4


def _ancilla_connected(lay):
    anc = set(lay.cells(ANCILLA))
    if not anc:
        return False
    start = min(anc)
    seen, queue = {start}, deque([start])
    while queue:
        cur = queue.popleft()
        for n in lay.neighbors(cur):
            if n in anc and n not in seen:
                seen.add(n)
                queue.append(n)
    return seen == anc


@pytest.mark.parametrize("n_data,n_t,n_s", [(1, 1, 1), (5, 3, 2), (12, 7, 7), (30, 1, 4)])
def test_sandwich_adjacency(n_data, n_t, n_s):
    lay = generate_layout("sandwich", n_data, n_t, n_s)
    lay.validate()
    for cell in lay.cells(DATA):
        assert any(lay.role(n) == ANCILLA for n in lay.neighbors(cell))
    assert _ancilla_connected(lay)
    rows = lay.to_text().splitlines()
    assert sum(1 for r in rows if set(r) == {ANCILLA}) >= 2


def test_embedded_valid():
    lay = generate_layout("embedded", 7, 3, 3)
    lay.validate()
    assert lay.n_data == 7 and len(lay.t_factories) == 3 and len(lay.s_factories) == 3


@pytest.mark.parametrize("args", [("sandwich", 4, 0, 1), ("embedded", 4, 0, 1), ("dense", 0, 1),
                                  ("spiral", 3, 1)])
def test_impossible_layouts(args):
    with pytest.raises(LayoutError):
        generate_layout(*args)


def test_layout_dict_round_trip():
    lay = generate_layout("sandwich", 6, 2, 2)
    assert LayoutGrid.from_dict(lay.to_dict()) == lay


def test_single_factory_and_ties():
    lay = generate_layout("dense", 3, 1)
    only = lay.t_factories[0]
    assert nearest_available_factory(lay, (0, 0), "t") == only
    assert nearest_available_factory(lay, (0, 0), "t", busy=[only]) is None
    grid = generate_layout("dense", 1, 2)
    # both factories are one step from the data cell; the smaller (row, col) wins
    origin = grid.cells(DATA)[0]
    tied = sorted(c for c in grid.t_factories if manhattan(c, origin) == 1)
    if len(tied) == 2:
        assert nearest_available_factory(grid, origin, "t") == tied[0]


def test_nearest_matches_exhaustive_scan():
    rng = random.Random(2)
    for _ in range(50):
        try:
            lay = generate_layout(rng.choice(["dense", "sandwich", "embedded"]), rng.randint(1, 20),
                                  rng.randint(1, 12), rng.randint(1, 5))
        except LayoutError:  # embedded rings cap the factory count
            continue
        cells = lay.t_factories
        busy = set(rng.sample(cells, rng.randrange(len(cells) + 1)))
        origin = (rng.randrange(lay.height), rng.randrange(lay.width))
        free = [c for c in cells if c not in busy]
        want = min(free, key=lambda c: (manhattan(origin, c), c)) if free else None
        assert nearest_available_factory(lay, origin, "t", busy) == want


def test_ancilla_path_adjacent():
    lay = generate_layout("sandwich", 4, 1, 1)
    a, b = lay.cells(DATA)[0], lay.cells(DATA)[1]
    path = ancilla_path(lay, a, b)
    assert len(path) >= 1 and all(lay.role(c) == ANCILLA for c in path)
    for x, y in zip(path, path[1:]):
        assert manhattan(x, y) == 1


def test_ancilla_path_requires_ancilla():
    lay = generate_layout("dense", 4, 1)
    with pytest.raises(RoutingError):
        ancilla_path(lay, (0, 0), (0, 1))

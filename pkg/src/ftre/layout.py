"""Logical patch layouts: where data, factory and ancilla patches sit on the grid."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .errors import LayoutError, RoutingError

DATA, T_FACTORY, S_FACTORY, ANCILLA, EMPTY = "D", "T", "S", "A", "."
ROLES = (DATA, T_FACTORY, S_FACTORY, ANCILLA, EMPTY)
MOVEMENT_STRATEGIES = frozenset({"dense"})
LATTICE_STRATEGIES = frozenset({"column", "embedded", "sandwich"})
COLUMN_WIDTH = 7

Cell = tuple[int, int]


def manhattan(a: Cell, b: Cell) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


@dataclass(frozen=True)
class LayoutGrid:
    """Roles per cell; ``data[q]`` is the cell of circuit qubit ``q``."""

    width: int
    height: int
    roles: tuple[tuple[str, ...], ...]
    data: tuple[Cell, ...]
    strategy: str

    def __post_init__(self):
        if len(self.roles) != self.height or any(len(r) != self.width for r in self.roles):
            raise LayoutError("role grid does not match width/height")
        for row in self.roles:
            for role in row:
                if role not in ROLES:
                    raise LayoutError(f"unknown cell role {role!r}")
        seen = set()
        for q, cell in enumerate(self.data):
            if cell in seen or self.role(cell) != DATA:
                raise LayoutError(f"qubit {q} is not on its own data cell")
            seen.add(cell)
        n_data_cells = sum(row.count(DATA) for row in self.roles)
        if n_data_cells != len(self.data):
            raise LayoutError("every data cell must hold exactly one circuit qubit")

    def role(self, cell: Cell) -> str:
        return self.roles[cell[0]][cell[1]]

    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.height and 0 <= cell[1] < self.width

    def cells(self, role: str) -> list[Cell]:
        return [(r, c) for r in range(self.height) for c in range(self.width) if self.roles[r][c] == role]

    def neighbors(self, cell: Cell) -> list[Cell]:
        r, c = cell
        out = [(r - 1, c), (r, c - 1), (r, c + 1), (r + 1, c)]
        return [x for x in out if self.in_bounds(x)]

    @property
    def n_data(self) -> int:
        return len(self.data)

    @property
    def t_factories(self) -> list[Cell]:
        return self.cells(T_FACTORY)

    @property
    def s_factories(self) -> list[Cell]:
        return self.cells(S_FACTORY)

    @property
    def n_logical(self) -> int:
        """Every non-empty cell is a logical patch."""
        return sum(1 for row in self.roles for role in row if role != EMPTY)

    @property
    def is_lattice(self) -> bool:
        return self.strategy in LATTICE_STRATEGIES

    def qubit_cells(self) -> list[Cell]:
        """Cell of each primitive-circuit qubit: data qubits first, then the rest row-major."""
        data = set(self.data)
        rest = [(r, c) for r in range(self.height) for c in range(self.width)
                if self.roles[r][c] != EMPTY and (r, c) not in data]
        return list(self.data) + rest

    def to_text(self) -> str:
        return "\n".join("".join(row) for row in self.roles) + "\n"

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "width": self.width,
            "height": self.height,
            "rows": ["".join(row) for row in self.roles],
            "data": [list(c) for c in self.data],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "LayoutGrid":
        rows = tuple(tuple(r) for r in obj["rows"])
        return cls(obj["width"], obj["height"], rows, tuple(tuple(c) for c in obj["data"]),
                   obj["strategy"])

    def validate(self) -> None:
        """Check the role invariants for this strategy (raises LayoutError)."""
        if not self.is_lattice:
            if self.cells(ANCILLA):
                raise LayoutError("movement layouts contain no ancilla patches")
            return
        ancilla = set(self.cells(ANCILLA))
        if not ancilla:
            raise LayoutError("lattice layout has no ancilla patches")
        # every data and factory patch touches an ancilla, and the ancilla region is connected
        for cell in list(self.data) + self.t_factories + self.s_factories:
            if not any(n in ancilla for n in self.neighbors(cell)):
                raise LayoutError(f"patch at {cell} has no neighbouring ancilla")
        start = min(ancilla)
        seen = {start}
        todo = [start]
        while todo:
            cur = todo.pop()
            for n in self.neighbors(cur):
                if n in ancilla and n not in seen:
                    seen.add(n)
                    todo.append(n)
        if seen != ancilla:
            raise LayoutError("ancilla patches do not form one connected region")


def _grid(height: int, width: int) -> list[list[str]]:
    return [[EMPTY] * width for _ in range(height)]


def _freeze(strategy: str, grid: list[list[str]], data: list[Cell]) -> LayoutGrid:
    layout = LayoutGrid(len(grid[0]) if grid else 0, len(grid), tuple(tuple(r) for r in grid),
                        tuple(data), strategy)
    layout.validate()
    return layout


def _spread(n: int, width: int) -> list[int]:
    """``n`` evenly spaced, distinct positions in ``range(width)``."""
    return [math.floor((i + 0.5) * width / n) for i in range(n)]


def _interleave(n_t: int, n_s: int) -> list[str]:
    out = []
    for i in range(max(n_t, n_s)):
        if i < n_t:
            out.append(T_FACTORY)
        if i < n_s:
            out.append(S_FACTORY)
    return out


def _dense(n_data: int, n_t: int, n_s: int) -> LayoutGrid:
    total = n_data + n_t + n_s
    width = math.ceil(math.sqrt(total))
    height = math.ceil(total / width)
    grid = _grid(height, width)
    roles = [DATA] * n_data + [T_FACTORY] * n_t + [S_FACTORY] * n_s
    data = []
    for i, role in enumerate(roles):
        r, c = divmod(i, width)
        grid[r][c] = role
        if role == DATA:
            data.append((r, c))
    return _freeze("dense", grid, data)


def _column(n_data: int) -> LayoutGrid:
    n_rows = math.ceil(n_data / 2)
    grid = _grid(2 * n_rows, COLUMN_WIDTH)
    data = []
    for i in range(n_rows):
        r = 2 * i
        grid[r + 1] = [ANCILLA] * COLUMN_WIDTH
        pair = min(2, n_data - 2 * i)
        grid[r][0:4] = [S_FACTORY, T_FACTORY, DATA, ANCILLA]
        data.append((r, 2))
        if pair == 2:
            grid[r][4:7] = [DATA, T_FACTORY, S_FACTORY]
            data.append((r, 4))
        else:
            grid[r][4] = ANCILLA
    return _freeze("column", grid, data)


def _ring(m: int) -> list[Cell]:
    """Clockwise cells of the border of an (m+2)x(m+2) square, corners excluded."""
    top = [(0, c) for c in range(1, m + 1)]
    right = [(r, m + 1) for r in range(1, m + 1)]
    bottom = [(m + 1, c) for c in range(m, 0, -1)]
    left = [(r, 0) for r in range(m, 0, -1)]
    return top + right + bottom + left


def _embedded(n_data: int, n_t: int, n_s: int) -> LayoutGrid:
    k = math.ceil(math.sqrt(n_data))
    m = 2 * k + 1
    ring = _ring(m)
    n_f = n_t + n_s
    if n_f > len(ring):
        raise LayoutError(f"embedded layout fits at most {len(ring)} factories around {n_data} qubits")
    grid = _grid(m + 2, m + 2)
    for r in range(1, m + 1):
        for c in range(1, m + 1):
            grid[r][c] = ANCILLA
    data = []
    for q in range(n_data):
        i, j = divmod(q, k)
        cell = (2 * i + 2, 2 * j + 2)
        grid[cell[0]][cell[1]] = DATA
        data.append(cell)
    kinds = _interleave(n_t, n_s)
    for pos, kind in zip(_spread(n_f, len(ring)) if n_f else [], kinds):
        r, c = ring[pos]
        grid[r][c] = kind
    return _freeze("embedded", grid, data)


def _sandwich(n_data: int, n_t: int, n_s: int) -> LayoutGrid:
    t_top, s_top = math.ceil(n_t / 2), math.ceil(n_s / 2)
    top = _interleave(t_top, s_top)
    bottom = _interleave(n_t - t_top, n_s - s_top)
    width = max(n_data + 1, len(top), len(bottom))
    grid = _grid(5, width)
    grid[1] = [ANCILLA] * width
    grid[3] = [ANCILLA] * width
    grid[2] = [DATA] * n_data + [ANCILLA] * (width - n_data)
    for row, kinds in ((0, top), (4, bottom)):
        for pos, kind in zip(_spread(len(kinds), width) if kinds else [], kinds):
            grid[row][pos] = kind
    if not bottom:
        grid.pop()
    data = [(2, q) for q in range(n_data)]
    return _freeze("sandwich", grid, data)


def generate_layout(strategy: str, n_data: int, n_t_factories: int, n_s_factories: int = 0) -> LayoutGrid:
    """Deterministic layout for ``n_data`` circuit qubits plus the requested factories.

    ``column`` ignores the factory counts: every data qubit gets one T and one
    S factory beside it.
    """
    if n_data < 1:
        raise LayoutError("a layout needs at least one data qubit")
    if n_t_factories < 0 or n_s_factories < 0:
        raise LayoutError("factory counts must be nonnegative")
    if strategy in LATTICE_STRATEGIES and strategy != "column" and n_t_factories < 1:
        raise LayoutError(f"{strategy} layout needs at least one T factory")
    if strategy == "dense":
        return _dense(n_data, n_t_factories, n_s_factories)
    if strategy == "column":
        return _column(n_data)
    if strategy == "embedded":
        return _embedded(n_data, n_t_factories, n_s_factories)
    if strategy == "sandwich":
        return _sandwich(n_data, n_t_factories, n_s_factories)
    raise LayoutError(f"unknown layout strategy {strategy!r}")


def nearest_available_factory(layout: LayoutGrid, origin: Cell, kind: str,
                              busy: Iterable[Cell] = ()) -> Cell | None:
    """Closest free factory of ``kind`` ('t' or 's') by Manhattan distance, ties by (row, col).

    Returns None when every factory of that kind is busy.
    """
    role = {"t": T_FACTORY, "s": S_FACTORY}.get(kind)
    if role is None:
        raise ValueError(f"factory kind must be 't' or 's', got {kind!r}")
    busy = set(busy)
    best = None
    for cell in layout.cells(role):
        if cell in busy:
            continue
        key = (manhattan(origin, cell), cell)
        if best is None or key < best:
            best = key
    return None if best is None else best[1]


def ancilla_path(layout: LayoutGrid, a: Cell, b: Cell) -> list[Cell]:
    """Shortest run of ancilla cells joining patch ``a`` to patch ``b`` (at least one cell).

    Breadth-first search expanding neighbours in (row, col) order, so ties
    resolve toward the lexicographically smaller successor.
    """
    start = sorted(n for n in layout.neighbors(a) if layout.role(n) == ANCILLA)
    goals = {n for n in layout.neighbors(b) if layout.role(n) == ANCILLA}
    if not start or not goals:
        raise RoutingError(f"no ancilla next to {a if not start else b}")
    prev: dict[Cell, Cell | None] = {s: None for s in start}
    queue = deque(start)
    while queue:
        cur = queue.popleft()
        if cur in goals:
            path = [cur]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return path[::-1]
        for n in sorted(layout.neighbors(cur)):
            if n not in prev and layout.role(n) == ANCILLA:
                prev[n] = cur
                queue.append(n)
    raise RoutingError(f"no ancilla path between {a} and {b}")

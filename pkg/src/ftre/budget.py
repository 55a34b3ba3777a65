"""Error model, circuit fidelity and the parameter-selection solvers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import ConfigurationError, DomainError, InfeasibleBudgetError, UnattainableFidelityError
from .synthesis import SynthModel

DEFAULT_D_MAX = 51
# relative slack when comparing a requested eps_m against an anchor
_ANCHOR_RTOL = 1e-12


@dataclass(frozen=True)
class NoiseModel:
    p: float = 0.001
    p_th: float = 0.0057
    prefactor: float = 0.03

    def __post_init__(self):
        if not (0 < self.p < 1 and 0 < self.p_th < 1):
            raise ConfigurationError("noise model needs 0 < p < 1 and 0 < p_th < 1")
        if not self.prefactor > 0:
            raise ConfigurationError("LER prefactor must be positive")


def _check_distance(d) -> int:
    if isinstance(d, bool) or not isinstance(d, int) or d < 3 or d % 2 == 0:
        raise DomainError(f"code distance must be an odd integer >= 3, got {d!r}")
    return d


def ler(noise: NoiseModel, d: int) -> float:
    """Logical error rate per code operation: prefactor * (p/p_th)^((d+1)/2)."""
    _check_distance(d)
    return noise.prefactor * (noise.p / noise.p_th) ** ((d + 1) // 2)


def min_distance(noise: NoiseModel, target_ler: float) -> int:
    """Smallest odd d with ler(d) < target_ler."""
    if not 0 < target_ler < noise.prefactor:
        raise DomainError(f"target LER must lie in (0, {noise.prefactor}), got {target_ler!r}")
    if noise.p >= noise.p_th:
        raise DomainError("p >= p_th: the logical error rate does not fall with distance")
    ratio = math.log(target_ler / noise.prefactor) / math.log(noise.p / noise.p_th)
    half = max(2, math.floor(ratio) + 1)  # (d+1)/2 strictly greater than ratio
    d = 2 * half - 1
    # settle float edge cases with the defining inequality
    while d > 3 and ler(noise, d - 2) < target_ler:
        d -= 2
    while not ler(noise, d) < target_ler:
        d += 2
    return d


@dataclass(frozen=True)
class CultivationTable:
    anchors: tuple[tuple[float, float], ...] = ((1e-6, 5.0), (6.1e-7, 40.0), (1e-9, 100.0))
    folded_divisor: float = 10.0

    def __post_init__(self):
        anchors = tuple(sorted(((float(e), float(r)) for e, r in self.anchors), reverse=True))
        if not anchors:
            raise ConfigurationError("cultivation table needs at least one anchor")
        for e, r in anchors:
            if not (0 < e < 1) or r <= 0:
                raise ConfigurationError(f"bad cultivation anchor ({e}, {r})")
        reps = [r for _, r in anchors]
        if any(b < a for a, b in zip(reps, reps[1:])):
            raise ConfigurationError("repetitions must not decrease as eps_m decreases")
        if len({e for e, _ in anchors}) != len(anchors):
            raise ConfigurationError("duplicate eps_m anchors")
        if not self.folded_divisor > 0:
            raise ConfigurationError("folded_divisor must be positive")
        object.__setattr__(self, "anchors", anchors)

    @property
    def eps_values(self) -> tuple[float, ...]:
        return tuple(e for e, _ in self.anchors)


def cultivation_rep(cult: CultivationTable, eps_m: float, folded: bool = False) -> float:
    """Repetition parameter of the weakest anchor that still meets ``eps_m``."""
    if not 0 < eps_m < 1:
        raise DomainError(f"eps_m must lie in (0, 1), got {eps_m!r}")
    for e, rep in cult.anchors:
        if e <= eps_m * (1 + _ANCHOR_RTOL):
            return rep / cult.folded_divisor if folded else rep
    raise UnattainableFidelityError(
        f"eps_m={eps_m:g} is below the strongest cultivation anchor {cult.anchors[-1][0]:g}"
    )


def _log_abs(model: SynthModel, eps_rz: float, k: int) -> float:
    if k == 0 or eps_rz <= 0:
        return 0.0
    return model.abs_log(eps_rz)


def log_fidelity(eps_rz: float, eps_m: float, eps_l: float, k: int, l: int,
                 model: SynthModel, teleport_cliffords_per_t: float = 0.0) -> float:
    lg = _log_abs(model, eps_rz, k)
    n_t = model.a_t * k * lg
    n_c = l + model.a_c * lg + teleport_cliffords_per_t * n_t
    return k * math.log1p(-eps_rz) + n_t * math.log1p(-eps_m) + n_c * math.log1p(-eps_l)


def circuit_fidelity(eps_rz: float, eps_m: float, eps_l: float, k: int, l: int,
                     model: SynthModel | None = None, teleport_cliffords_per_t: float = 0.0) -> float:
    """F = (1-eps_rz)^k (1-eps_m)^(a_T k |log eps_rz|) (1-eps_l)^(l + a_C |log eps_rz|).

    With k = 0 no rotation is synthesized and the ``|log eps_rz|`` terms vanish.
    ``teleport_cliffords_per_t`` adds correction Cliffords per T gate.
    """
    model = model or SynthModel()
    for name, v in (("eps_rz", eps_rz), ("eps_m", eps_m), ("eps_l", eps_l)):
        if not 0 <= v < 1:
            raise DomainError(f"{name} must lie in [0, 1), got {v!r}")
    if k < 0 or l < 0:
        raise DomainError("gate counts must be nonnegative")
    return math.exp(log_fidelity(eps_rz, eps_m, eps_l, k, l, model, teleport_cliffords_per_t))


@dataclass(frozen=True)
class BudgetSolution:
    d: int
    eps_rz: float
    eps_m: float
    eps_l: float
    rep: float
    fidelity: float
    folded: bool = False
    method: str = "halving"

    def as_dict(self) -> dict:
        return {
            "d": self.d, "eps_rz": self.eps_rz, "eps_m": self.eps_m, "eps_l": self.eps_l,
            "rep": self.rep, "fidelity": self.fidelity, "folded": self.folded, "method": self.method,
        }


def _check_target(target_error: float) -> None:
    if not 0 < target_error < 1:
        raise DomainError(f"target error must lie in (0, 1), got {target_error!r}")


def halving_eps_rz(k: int, target_error: float) -> float:
    """Per-rotation error spending half the budget: 1 - (1 - t/2)^(1/k)."""
    if k == 0:
        return 0.0
    return -math.expm1(math.log1p(-target_error / 2) / k)


def solve_halving(k: int, l: int, target_error: float, noise: NoiseModel | None = None,
                  cult: CultivationTable | None = None, model: SynthModel | None = None, *,
                  folded: bool = False, d_max: int = DEFAULT_D_MAX,
                  teleport_cliffords_per_t: float = 0.0) -> BudgetSolution:
    """Split the budget: half to synthesis, a quarter test for magic, then the smallest distance."""
    noise, cult, model = noise or NoiseModel(), cult or CultivationTable(), model or SynthModel()
    _check_target(target_error)
    if k < 0 or l < 0:
        raise DomainError("gate counts must be nonnegative")
    eps_rz = halving_eps_rz(k, target_error)
    n_t = model.a_t * k * _log_abs(model, eps_rz, k)
    eps_m = cult.anchors[-1][0]
    for e, _ in cult.anchors:
        if n_t * math.log1p(-e) >= math.log1p(-target_error / 4):
            eps_m = e
            break
    rep = cultivation_rep(cult, eps_m, folded)
    floor = math.log1p(-target_error)
    best = None
    for d in range(3, d_max + 1, 2):
        eps_l = ler(noise, d)
        lf = log_fidelity(eps_rz, eps_m, eps_l, k, l, model, teleport_cliffords_per_t)
        best = BudgetSolution(d, eps_rz, eps_m, eps_l, rep, math.exp(lf), folded, "halving")
        if lf >= floor:
            assert best.fidelity >= 1 - target_error - 1e-15
            return best
    raise InfeasibleBudgetError(
        f"no odd distance <= {d_max} reaches target error {target_error:g}", best=best
    )


@dataclass(frozen=True)
class GridPoint:
    d: int
    eps_rz: float
    eps_m: float
    fidelity: float
    rep: float
    feasible: bool

    @property
    def cost(self) -> tuple[float, int, float]:
        return (self.rep, self.d, abs(math.log(self.eps_rz)) if self.eps_rz > 0 else 0.0)


@dataclass(frozen=True)
class ContourPoint:
    """Largest eps_m meeting the target at distance d, maximized over the eps_rz grid."""

    d: int
    eps_rz: float
    eps_m: float


@dataclass(frozen=True)
class GridResult:
    best: BudgetSolution
    surface: tuple[GridPoint, ...]
    contour_max: tuple[ContourPoint, ...] = field(default=())


def log_grid(lo: float, hi: float, points_per_decade: int) -> list[float]:
    if not (0 < lo <= hi <= 1) or points_per_decade < 1:
        raise ConfigurationError("eps_rz grid needs 0 < min <= max <= 1 and points_per_decade >= 1")
    a, b = math.log10(lo), math.log10(hi)
    n = max(0, round((b - a) * points_per_decade))
    return [10 ** (a + (b - a) * i / n) if n else lo for i in range(n + 1)]


def default_eps_rz_grid() -> list[float]:
    return log_grid(1e-9, 1e-2, 10)


def _eps_m_ceiling(k, l, target_error, eps_rz, eps_l, model, teleport) -> float | None:
    lg = _log_abs(model, eps_rz, k)
    n_t = model.a_t * k * lg
    rest = k * math.log1p(-eps_rz) + (l + model.a_c * lg + teleport * n_t) * math.log1p(-eps_l)
    slack = math.log1p(-target_error) - rest
    if slack > 0:
        return None
    if n_t == 0:
        return 1.0 if slack == 0 else None
    return -math.expm1(slack / n_t)


def sensitivity_grid(k: int, l: int, target_error: float, noise: NoiseModel | None = None,
                     cult: CultivationTable | None = None, model: SynthModel | None = None, *,
                     d_values: Sequence[int] | None = None,
                     eps_rz_values: Sequence[float] | None = None,
                     eps_m_values: Sequence[float] | None = None,
                     folded: bool = False, teleport_cliffords_per_t: float = 0.0) -> GridResult:
    """Evaluate F over (d, eps_rz, eps_m) and pick the cheapest feasible point.

    Cost is lexicographic: cultivation repetitions, then distance, then
    ``|log eps_rz|``. Raises InfeasibleBudgetError carrying the highest
    fidelity point when nothing on the grid meets the target.
    """
    noise, cult, model = noise or NoiseModel(), cult or CultivationTable(), model or SynthModel()
    _check_target(target_error)
    d_values = list(d_values) if d_values is not None else list(range(3, DEFAULT_D_MAX + 1, 2))
    eps_rz_values = list(eps_rz_values) if eps_rz_values is not None else default_eps_rz_grid()
    eps_m_values = list(eps_m_values) if eps_m_values is not None else list(cult.eps_values)
    if not (d_values and eps_rz_values and eps_m_values):
        raise ConfigurationError("sensitivity grid axes must be nonempty")
    for d in d_values:
        _check_distance(d)
    floor = math.log1p(-target_error)
    surface = []
    contour = []
    for d in sorted(set(d_values)):
        eps_l = ler(noise, d)
        best_c = None
        for eps_rz in sorted(set(eps_rz_values)):
            if not 0 < eps_rz < 1:
                raise DomainError(f"grid eps_rz must lie in (0, 1), got {eps_rz!r}")
            for eps_m in sorted(set(eps_m_values), reverse=True):
                lf = log_fidelity(eps_rz, eps_m, eps_l, k, l, model, teleport_cliffords_per_t)
                rep = cultivation_rep(cult, eps_m, folded)
                surface.append(GridPoint(d, eps_rz, eps_m, math.exp(lf), rep, lf >= floor))
            ceiling = _eps_m_ceiling(k, l, target_error, eps_rz, eps_l, model, teleport_cliffords_per_t)
            if ceiling is not None and (best_c is None or ceiling > best_c.eps_m):
                best_c = ContourPoint(d, eps_rz, ceiling)
        if best_c is not None:
            contour.append(best_c)
    feasible = [p for p in surface if p.feasible]
    if not feasible:
        top = max(surface, key=lambda p: (p.fidelity, -p.d))
        raise InfeasibleBudgetError(
            f"no grid point reaches target error {target_error:g} (best fidelity {top.fidelity:.6g})",
            best=_solution(top, noise, folded),
        )
    chosen = min(feasible, key=lambda p: (p.cost, p.eps_m))
    return GridResult(_solution(chosen, noise, folded), tuple(surface), tuple(contour))


def _solution(p: GridPoint, noise: NoiseModel, folded: bool) -> BudgetSolution:
    return BudgetSolution(p.d, p.eps_rz, p.eps_m, ler(noise, p.d), p.rep, p.fidelity, folded, "grid")


@dataclass(frozen=True)
class FormulaEstimate:
    physical_qubits: int
    total_time_s: float

    @property
    def total_time_days(self) -> float:
        return self.total_time_s / 86400


def _exact(x) -> Fraction:
    return Fraction(x) if isinstance(x, int) else Fraction(repr(float(x)))


def formula_estimate(n_logical: int, depth: float, cycles_per_moment: int, cycle_time_s: float,
                     trials: int, d: int) -> FormulaEstimate:
    """Back-of-envelope estimate: d^2 qubits per logical qubit, depth x cycles x cycle time x trials."""
    _check_distance(d)
    for name, v in (("n_logical", n_logical), ("depth", depth), ("cycles_per_moment", cycles_per_moment),
                    ("cycle_time_s", cycle_time_s), ("trials", trials)):
        if not v > 0:
            raise DomainError(f"{name} must be positive")
    total = _exact(depth) * _exact(cycles_per_moment) * _exact(cycle_time_s) * _exact(trials)
    return FormulaEstimate(d * d * int(n_logical), float(total))

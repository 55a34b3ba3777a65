"""Architectures: primitive sets, gate-speed tables, primitive recipes and keyword arguments.

Times are kept internally as integer picoseconds so breakdowns add up
exactly; microsecond values are derived only for reporting.
"""

from __future__ import annotations

import copy
import json
import math
import os
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .budget import CultivationTable, NoiseModel
from .circuit import PAULIS, GateOp
from .errors import ConfigurationError, UnsupportedGateError
from .synthesis import SynthModel

PS_PER_US = 1_000_000
PHYSICAL_CLASSES = ("1Q", "2Q", "Measure", "Reset", "ZMove", "AMove")
REPORT_CLASSES = ("1Q", "2Q", "Measure", "Reset", "Movement", "other")
SPEED_VARIANTS = ("current", "proposed")
BASE_PRESETS = ("SSM", "MZO", "DSM", "DSNM", "SSOQ")
LAYOUT_STRATEGIES = ("dense", "column", "embedded", "sandwich")

_SPEED_KEYS = {"1q": "1Q", "2q": "2Q", "meas": "Measure", "reset": "Reset", "zmove": "ZMove"}
_ZERO_COST = frozenset(PAULIS | {"Split"})


def us_to_ps(x: float) -> int:
    return int(round(float(x) * PS_PER_US))


def ps_to_us(ps: int) -> float:
    return ps / PS_PER_US


def round_us(ps: int) -> int:
    """Nearest integer microsecond, halves rounded up."""
    return (ps + PS_PER_US // 2) // PS_PER_US


def a_move_time(l_sites: float, clamp: tuple[float, float] | None = (20.0, 500.0)) -> float:
    """Alley-move time in µs for a trip of ``l_sites`` array sites: 2 sqrt(12 l / 5500e-6)."""
    if l_sites < 0:
        raise ConfigurationError("site distance must be nonnegative")
    t = 2 * math.sqrt(12 * l_sites / 5500e-6)
    if clamp is not None:
        lo, hi = clamp
        t = min(max(t, lo), hi)
    return t


@dataclass(frozen=True)
class AMoveModel:
    mode: str = "fixed"  # "fixed" or "formula"
    fixed_us: float = 22.0
    min_us: float = 20.0
    max_us: float = 500.0
    clamp: bool = True

    def time_ps(self, sites: float | None) -> int:
        if self.mode == "fixed":
            return us_to_ps(self.fixed_us)
        clamp = (self.min_us, self.max_us) if self.clamp else None
        return us_to_ps(a_move_time(sites or 0.0, clamp))


@dataclass(frozen=True)
class GateSpeedTable:
    """Physical operation times in µs; ``t_zmove`` is None where zone moves do not exist."""

    t_1q: float
    t_2q: float
    t_meas: float
    t_reset: float
    t_zmove: float | None = None
    a_move: AMoveModel | None = None

    def __post_init__(self):
        for name in ("t_1q", "t_2q", "t_meas", "t_reset", "t_zmove"):
            v = getattr(self, name)
            if v is not None and not (isinstance(v, (int, float)) and v >= 0 and math.isfinite(v)):
                raise ConfigurationError(f"speeds.{name} must be a nonnegative number")

    def class_ps(self, cls: str) -> int:
        value = {"1Q": self.t_1q, "2Q": self.t_2q, "Measure": self.t_meas,
                 "Reset": self.t_reset, "ZMove": self.t_zmove}.get(cls)
        if value is None:
            raise ConfigurationError(f"no speed configured for physical class {cls}")
        return us_to_ps(value)


@dataclass(frozen=True)
class PrimitiveRecipe:
    """Time of one primitive as counts of physical ops (``SE`` means one SE round)."""

    kind: str
    counts: Mapping[str, float] = field(default_factory=dict)
    d_counts: Mapping[str, float] = field(default_factory=dict)
    residual_us: float = 0.0
    rep_scaling: bool = False

    def __post_init__(self):
        allowed = set(PHYSICAL_CLASSES) - {"AMove"} | {"SE"}
        for where, counts in (("counts", self.counts), ("d_counts", self.d_counts)):
            for cls, n in counts.items():
                if cls not in allowed:
                    raise ConfigurationError(f"recipes.{self.kind}.{where}: unknown class {cls!r}")
                if not (isinstance(n, (int, float)) and n >= 0):
                    raise ConfigurationError(f"recipes.{self.kind}.{where}.{cls} must be >= 0")
        if not self.residual_us >= 0:
            raise ConfigurationError(f"recipes.{self.kind}.residual_us must be >= 0")
        if self.rep_scaling and self.kind.split("@")[0] not in ("CultT", "CultS"):
            raise ConfigurationError(f"recipes.{self.kind}: rep_scaling only applies to cultivation")
        if self.kind == "SE" and ("SE" in self.counts or "SE" in self.d_counts):
            raise ConfigurationError("recipes.SE cannot reference itself")


@dataclass(frozen=True)
class Capabilities:
    movement: bool
    in_place_entangle: bool
    in_place_readout: bool


@dataclass(frozen=True)
class LayoutSpec:
    strategy: str
    t_factories: int
    s_factories: int

    def __post_init__(self):
        if self.strategy not in LAYOUT_STRATEGIES:
            raise ConfigurationError(f"layout.strategy must be one of {', '.join(LAYOUT_STRATEGIES)}")
        if self.t_factories < 0 or self.s_factories < 0:
            raise ConfigurationError("factory counts must be nonnegative")


@dataclass(frozen=True)
class BudgetConfig:
    d_values: tuple[int, ...] = tuple(range(3, 52, 2))
    eps_rz_min: float = 1e-9
    eps_rz_max: float = 1e-2
    points_per_decade: int = 10
    cultivation: CultivationTable = field(default_factory=CultivationTable)

    @property
    def d_max(self) -> int:
        return max(self.d_values)


@dataclass(frozen=True)
class Architecture:
    name: str
    primitive_set: str
    speeds: GateSpeedTable
    recipes: Mapping[str, PrimitiveRecipe]
    capabilities: Capabilities
    d: int = 11
    syndrome_rounds_mode: str = "1"  # "1" (correlated decoding) or "d" (standard)
    folded_cultivation: bool = False
    post_op_correction: bool = True
    idling_se: bool = True
    se_frequency: int = 1
    rep_t: float | None = None
    rep_s: float = 1.0
    assume_random_corrections: float | None = None
    layout: LayoutSpec = field(default_factory=lambda: LayoutSpec("dense", 10, 0))
    synthesis: SynthModel = field(default_factory=SynthModel)
    noise: NoiseModel = field(default_factory=NoiseModel)
    budget: BudgetConfig = field(default_factory=BudgetConfig)
    speed_variant: str | None = None

    def __post_init__(self):
        if self.primitive_set not in ("movement", "lattice"):
            raise ConfigurationError("primitive_set must be 'movement' or 'lattice'")
        if self.d < 3 or self.d % 2 == 0:
            raise ConfigurationError(f"kwargs.d must be an odd integer >= 3, got {self.d}")
        if self.syndrome_rounds_mode not in ("1", "d"):
            raise ConfigurationError("kwargs.syndrome_rounds must be 1 or 'd'")
        if self.se_frequency < 1:
            raise ConfigurationError("kwargs.se_frequency must be >= 1")
        if self.rep_t is not None and not self.rep_t > 0:
            raise ConfigurationError("kwargs.rep_t must be positive")
        if not self.rep_s > 0:
            raise ConfigurationError("kwargs.rep_s must be positive")
        acr = self.assume_random_corrections
        if acr is not None and not 0 <= acr <= 1:
            raise ConfigurationError("kwargs.assume_random_corrections must lie in [0, 1]")
        caps = self.capabilities
        if self.is_lattice:
            if caps.movement:
                raise ConfigurationError("lattice architectures cannot declare qubit movement")
            if self.folded_cultivation:
                raise ConfigurationError("folded cultivation needs qubit movement")
            if self.syndrome_rounds_mode == "1":
                raise ConfigurationError("correlated decoding needs transversal gates (movement)")
            if self.layout.strategy == "dense":
                raise ConfigurationError("lattice architectures need an ancilla layout, not 'dense'")
            if self.layout.t_factories < 1 or self.layout.s_factories < 1:
                raise ConfigurationError("lattice architectures need T and S factories")
        else:
            if not caps.movement:
                raise ConfigurationError("movement primitive set requires capabilities.movement")
            if self.layout.strategy != "dense":
                raise ConfigurationError("movement architectures use the 'dense' layout")
            if self.layout.t_factories < 1:
                raise ConfigurationError("at least one T factory is required")
            if not caps.in_place_entangle and not caps.in_place_readout and self.speeds.t_zmove is None:
                raise ConfigurationError("zone architectures need speeds.zmove")
        if "AMove" in self.primitive_kinds and self.speeds.a_move is None:
            raise ConfigurationError("in-place entanglement needs speeds.amove")
        if "ZMove" in self.primitive_kinds and self.speeds.t_zmove is None:
            raise ConfigurationError("zone moves need speeds.zmove")
        for kind in sorted(self.primitive_kinds - _ZERO_COST - {"AMove"}):
            if kind not in self.recipes:
                raise ConfigurationError(f"recipes.{kind} is missing for primitive set {self.primitive_set}")
        extra = {k.split("@")[0] for k in self.recipes} - self.primitive_kinds
        if extra:
            raise ConfigurationError(f"recipes.{sorted(extra)[0]} is not in the {self.primitive_set} set")
        for r in self.recipes.values():
            for cls in list(r.counts) + list(r.d_counts):
                if cls == "ZMove" and self.speeds.t_zmove is None:
                    raise ConfigurationError(f"recipes.{r.kind} uses ZMove but speeds.zmove is unset")

    @property
    def is_lattice(self) -> bool:
        return self.primitive_set == "lattice"

    @property
    def primitive_kinds(self) -> frozenset[str]:
        base = {"SE", "H", "Measure", "Reset", "CultT", "CultS"} | PAULIS
        if self.is_lattice:
            return frozenset(base | {"Merge", "Split"})
        base |= {"S", "CNOT"}
        if not self.capabilities.in_place_readout:
            base.add("ZMove")
        if self.capabilities.in_place_entangle:
            base.add("AMove")
        return frozenset(base)

    @property
    def syndrome_rounds(self) -> int:
        return 1 if self.syndrome_rounds_mode == "1" else self.d

    @property
    def decoding(self) -> str:
        return "correlated" if self.syndrome_rounds_mode == "1" else "standard"

    @property
    def has_transversal_s(self) -> bool:
        return not self.is_lattice

    @property
    def effective_rep_t(self) -> float:
        if self.rep_t is not None:
            return self.rep_t
        return 10.0 if self.folded_cultivation else 100.0

    def recipe(self, kind: str) -> PrimitiveRecipe:
        if self.folded_cultivation and f"{kind}@folded" in self.recipes:
            return self.recipes[f"{kind}@folded"]
        try:
            return self.recipes[kind]
        except KeyError:
            raise UnsupportedGateError(f"{kind} is not a primitive of {self.name}") from None

    def with_kwargs(self, **changes) -> "Architecture":
        return replace(self, **changes)

    def fingerprint_dict(self) -> dict:
        return architecture_to_config(self)


# --------------------------------------------------------------------------- timing


def _recipe_classes_ps(arch: Architecture, recipe: PrimitiveRecipe, d: int) -> dict[str, int]:
    out = dict.fromkeys(PHYSICAL_CLASSES + ("other",), 0)

    def add(counts, mult):
        for cls, n in counts.items():
            if cls == "SE":
                sub = _recipe_classes_ps(arch, arch.recipe("SE"), d)
                for c, v in sub.items():
                    out[c] += round(v * n * mult)
            else:
                out[cls] += round(arch.speeds.class_ps(cls) * n * mult)

    add(recipe.counts, 1)
    add(recipe.d_counts, d)
    out["other"] += us_to_ps(recipe.residual_us)
    return out


def op_classes_ps(arch: Architecture, kind: str, *, d: int | None = None, rounds: int = 1,
                  sites: float | None = None, rep: float | None = None) -> dict[str, int]:
    """Physical-class split (integer ps) of one primitive op."""
    d = arch.d if d is None else d
    if kind not in arch.primitive_kinds:
        raise UnsupportedGateError(f"{kind} is not a primitive of {arch.name}")
    zero = dict.fromkeys(PHYSICAL_CLASSES + ("other",), 0)
    if kind in _ZERO_COST:
        return zero
    if kind == "AMove":
        zero["AMove"] = arch.speeds.a_move.time_ps(sites)
        return zero
    recipe = arch.recipe(kind)
    out = _recipe_classes_ps(arch, recipe, d)
    mult = 1.0
    if kind == "SE":
        mult = rounds
    elif recipe.rep_scaling:
        mult = rep if rep is not None else (arch.effective_rep_t if kind == "CultT" else arch.rep_s)
    if mult != 1:
        out = {c: round(v * mult) for c, v in out.items()}
    return out


def primitive_time_ps(arch: Architecture, kind: str, d: int | None = None, **kw) -> int:
    return sum(op_classes_ps(arch, kind, d=d, **kw).values())


def primitive_time(arch: Architecture, kind: str, d: int | None = None, **kw) -> float:
    """Duration in µs of one ``kind`` primitive at distance ``d`` (default: the architecture's)."""
    return ps_to_us(primitive_time_ps(arch, kind, d, **kw))


def op_duration_ps(arch: Architecture, op: GateOp) -> int:
    return primitive_time_ps(arch, op.kind, rounds=op.rounds, sites=op.sites)


# --------------------------------------------------------------------------- config loading


def _presets() -> dict:
    text = resources.files("ftre").joinpath("data/presets.json").read_text(encoding="utf-8")
    return json.loads(text)


def preset_names() -> list[str]:
    """Every addressable preset, e.g. ``DSM-fold@current``."""
    data = _presets()["architectures"]
    names = []
    for base in BASE_PRESETS:
        variants = [base]
        if data[base]["primitive_set"] == "movement":
            variants.append(f"{base}-fold")
        for v in variants:
            names.extend(f"{v}@{s}" for s in SPEED_VARIANTS)
    return names


def preset_config(name: str) -> dict:
    """Full architecture config for a preset name like ``DSM-fold@proposed``."""
    base, _, speed = name.partition("@")
    speed = speed or "current"
    folded = base.endswith("-fold")
    base = base[: -len("-fold")] if folded else base
    data = _presets()
    if base not in data["architectures"] or speed not in SPEED_VARIANTS:
        raise ConfigurationError(f"unknown preset {name!r}; known: {', '.join(preset_names())}")
    entry = data["architectures"][base]
    kind = entry["primitive_set"]
    if folded and kind != "movement":
        raise ConfigurationError(f"preset {base} has no folded cultivation variant")
    recipes = copy.deepcopy(data["common_recipes"][kind])
    recipes.update(copy.deepcopy(entry["recipes"]))
    recipes.update(copy.deepcopy(entry.get("speed_overrides", {}).get(speed, {})))
    lattice = kind == "lattice"
    if entry["capabilities"].get("in_place_readout"):
        recipes.pop("ZMove", None)
    return {
        "name": f"{base}{'-fold' if folded else ''}@{speed}",
        "primitive_set": kind,
        "speeds": copy.deepcopy(data["speeds"][entry["speeds"]][speed]),
        "capabilities": dict(entry["capabilities"]),
        "recipes": recipes,
        "kwargs": {
            "d": 11,
            "syndrome_rounds": entry["syndrome_rounds"],
            "folded": folded,
            "post_op_correction": True,
            "idling_se": True,
            "se_frequency": 1,
        },
        "layout": {
            "strategy": "sandwich" if lattice else "dense",
            "t_factories": 10,
            "s_factories": 10 if lattice else 0,
        },
    }


def _get(cfg: Mapping, key: str, path: str, types, default=None, required=False):
    if key not in cfg:
        if required:
            raise ConfigurationError(f"{path}{key} is required")
        return default
    v = cfg[key]
    if types is not None and (not isinstance(v, types) or isinstance(v, bool) and bool not in (
            types if isinstance(types, tuple) else (types,))):
        raise ConfigurationError(f"{path}{key} has the wrong type")
    return v


_NUM = (int, float)


def _parse_speeds(raw: Mapping) -> GateSpeedTable:
    if not isinstance(raw, Mapping):
        raise ConfigurationError("speeds must be an object")
    unknown = set(raw) - set(_SPEED_KEYS) - {"amove"}
    if unknown:
        raise ConfigurationError(f"speeds.{sorted(unknown)[0]} is not a known speed")
    vals = {}
    for key in ("1q", "2q", "meas", "reset"):
        vals[key] = _get(raw, key, "speeds.", _NUM, required=True)
    zmove = _get(raw, "zmove", "speeds.", _NUM)
    amove = raw.get("amove")
    model = None
    if isinstance(amove, bool):
        raise ConfigurationError("speeds.amove has the wrong type")
    if isinstance(amove, _NUM):
        model = AMoveModel("fixed", float(amove))
    elif isinstance(amove, Mapping):
        mode = amove.get("mode", "fixed")
        if mode not in ("fixed", "formula"):
            raise ConfigurationError("speeds.amove.mode must be 'fixed' or 'formula'")
        model = AMoveModel(
            mode,
            float(_get(amove, "fixed_us", "speeds.amove.", _NUM, 22.0)),
            float(_get(amove, "min", "speeds.amove.", _NUM, 20.0)),
            float(_get(amove, "max", "speeds.amove.", _NUM, 500.0)),
            bool(_get(amove, "clamp", "speeds.amove.", bool, True)),
        )
    elif amove is not None:
        raise ConfigurationError("speeds.amove must be a number or an object")
    return GateSpeedTable(vals["1q"], vals["2q"], vals["meas"], vals["reset"], zmove, model)


def _parse_recipes(raw: Mapping) -> dict[str, PrimitiveRecipe]:
    if not isinstance(raw, Mapping):
        raise ConfigurationError("recipes must be an object")
    out = {}
    for kind, r in raw.items():
        path = f"recipes.{kind}."
        if not isinstance(r, Mapping):
            raise ConfigurationError(f"recipes.{kind} must be an object")
        unknown = set(r) - {"counts", "d_counts", "residual_us", "rep_scaling"}
        if unknown:
            raise ConfigurationError(f"{path}{sorted(unknown)[0]} is not a recipe field")
        counts = _get(r, "counts", path, Mapping, {})
        d_counts = _get(r, "d_counts", path, Mapping, {})
        residual = _get(r, "residual_us", path, _NUM, 0.0)
        rep_scaling = _get(r, "rep_scaling", path, bool, False)
        out[kind] = PrimitiveRecipe(kind, dict(counts), dict(d_counts), float(residual), rep_scaling)
    return out


def _parse_rounds(v) -> str:
    if v in (1, "1"):
        return "1"
    if v == "d":
        return "d"
    raise ConfigurationError("kwargs.syndrome_rounds must be 1 or 'd'")


def load_architecture(config: str | Mapping[str, Any]) -> Architecture:
    """Build an Architecture from a JSON config (text or already-parsed mapping)."""
    if isinstance(config, (str, bytes)):
        try:
            cfg = json.loads(config)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"architecture config is not valid JSON: {exc}") from None
    else:
        cfg = config
    if not isinstance(cfg, Mapping):
        raise ConfigurationError("architecture config must be an object")
    known = {"name", "primitive_set", "speeds", "capabilities", "recipes", "kwargs", "layout",
             "synthesis", "noise", "budget"}
    unknown = set(cfg) - known
    if unknown:
        raise ConfigurationError(f"{sorted(unknown)[0]} is not a known config section")
    name = _get(cfg, "name", "", str, "custom")
    pset = _get(cfg, "primitive_set", "", str, required=True)
    speeds = _parse_speeds(_get(cfg, "speeds", "", Mapping, required=True))
    caps_raw = _get(cfg, "capabilities", "", Mapping, None)
    if caps_raw is None:
        caps_raw = {"movement": pset == "movement", "in_place_entangle": True, "in_place_readout": True}
    caps = Capabilities(**{k: bool(_get(caps_raw, k, "capabilities.", bool, required=True))
                           for k in ("movement", "in_place_entangle", "in_place_readout")})
    recipes = _parse_recipes(_get(cfg, "recipes", "", Mapping, required=True))
    kw = _get(cfg, "kwargs", "", Mapping, {})
    unknown = set(kw) - {"d", "syndrome_rounds", "folded", "post_op_correction", "idling_se",
                         "se_frequency", "rep_t", "rep_s", "assume_random_corrections"}
    if unknown:
        raise ConfigurationError(f"kwargs.{sorted(unknown)[0]} is not a known keyword argument")
    lay = _get(cfg, "layout", "", Mapping, {})
    lattice = pset == "lattice"
    n_t = _get(lay, "t_factories", "layout.", int, 10)
    layout = LayoutSpec(
        _get(lay, "strategy", "layout.", str, "sandwich" if lattice else "dense"),
        n_t,
        _get(lay, "s_factories", "layout.", int, n_t if lattice else 0),
    )
    syn = _get(cfg, "synthesis", "", Mapping, {})
    synthesis = SynthModel(
        float(_get(syn, "a_t", "synthesis.", _NUM, 5.0)),
        float(_get(syn, "a_c", "synthesis.", _NUM, 8.0)),
        _get(syn, "log_base", "synthesis.", str, "natural"),
    )
    nz = _get(cfg, "noise", "", Mapping, {})
    noise = NoiseModel(
        float(_get(nz, "p", "noise.", _NUM, 0.001)),
        float(_get(nz, "p_th", "noise.", _NUM, 0.0057)),
        float(_get(nz, "prefactor", "noise.", _NUM, 0.03)),
    )
    bd = _get(cfg, "budget", "", Mapping, {})
    d_range = _get(bd, "d_range", "budget.", list, [3, 51])
    if len(d_range) != 2 or not all(isinstance(x, int) for x in d_range):
        raise ConfigurationError("budget.d_range must be [min, max]")
    d_values = tuple(d for d in range(d_range[0], d_range[1] + 1) if d >= 3 and d % 2 == 1)
    if not d_values:
        raise ConfigurationError("budget.d_range contains no odd distance >= 3")
    grid = _get(bd, "eps_rz_grid", "budget.", Mapping, {})
    anchors = _get(bd, "anchors", "budget.", list, None)
    cult = CultivationTable(
        tuple(tuple(a) for a in anchors) if anchors is not None else CultivationTable().anchors,
        float(_get(bd, "folded_divisor", "budget.", _NUM, 10.0)),
    )
    budget = BudgetConfig(
        d_values,
        float(_get(grid, "min", "budget.eps_rz_grid.", _NUM, 1e-9)),
        float(_get(grid, "max", "budget.eps_rz_grid.", _NUM, 1e-2)),
        int(_get(grid, "points_per_decade", "budget.eps_rz_grid.", int, 10)),
        cult,
    )
    rep_t = _get(kw, "rep_t", "kwargs.", _NUM, None)
    acr = _get(kw, "assume_random_corrections", "kwargs.", _NUM, None)
    speed_variant = name.partition("@")[2] or None
    return Architecture(
        name=name,
        primitive_set=pset,
        speeds=speeds,
        recipes=recipes,
        capabilities=caps,
        d=_get(kw, "d", "kwargs.", int, 11),
        syndrome_rounds_mode=_parse_rounds(kw.get("syndrome_rounds", "d" if lattice else 1)),
        folded_cultivation=_get(kw, "folded", "kwargs.", bool, False),
        post_op_correction=_get(kw, "post_op_correction", "kwargs.", bool, True),
        idling_se=_get(kw, "idling_se", "kwargs.", bool, True),
        se_frequency=_get(kw, "se_frequency", "kwargs.", int, 1),
        rep_t=float(rep_t) if rep_t is not None else None,
        rep_s=float(_get(kw, "rep_s", "kwargs.", _NUM, 1.0)),
        assume_random_corrections=float(acr) if acr is not None else None,
        layout=layout,
        synthesis=synthesis,
        noise=noise,
        budget=budget,
        speed_variant=speed_variant if speed_variant in SPEED_VARIANTS else None,
    )


def architecture_to_config(arch: Architecture) -> dict:
    """Inverse of load_architecture, used for echoing and fingerprinting."""
    sp = arch.speeds
    speeds: dict[str, Any] = {"1q": sp.t_1q, "2q": sp.t_2q, "meas": sp.t_meas, "reset": sp.t_reset}
    if sp.t_zmove is not None:
        speeds["zmove"] = sp.t_zmove
    if sp.a_move is not None:
        am = sp.a_move
        speeds["amove"] = am.fixed_us if am.mode == "fixed" else {
            "mode": am.mode, "min": am.min_us, "max": am.max_us, "clamp": am.clamp}
    recipes = {}
    for kind in sorted(arch.recipes):
        r = arch.recipes[kind]
        entry: dict[str, Any] = {}
        if r.counts:
            entry["counts"] = dict(sorted(r.counts.items()))
        if r.d_counts:
            entry["d_counts"] = dict(sorted(r.d_counts.items()))
        if r.residual_us:
            entry["residual_us"] = r.residual_us
        if r.rep_scaling:
            entry["rep_scaling"] = True
        recipes[kind] = entry
    kwargs: dict[str, Any] = {
        "d": arch.d,
        "syndrome_rounds": 1 if arch.syndrome_rounds_mode == "1" else "d",
        "folded": arch.folded_cultivation,
        "post_op_correction": arch.post_op_correction,
        "idling_se": arch.idling_se,
        "se_frequency": arch.se_frequency,
        "rep_s": arch.rep_s,
    }
    if arch.rep_t is not None:
        kwargs["rep_t"] = arch.rep_t
    if arch.assume_random_corrections is not None:
        kwargs["assume_random_corrections"] = arch.assume_random_corrections
    b = arch.budget
    return {
        "name": arch.name,
        "primitive_set": arch.primitive_set,
        "speeds": speeds,
        "capabilities": {
            "movement": arch.capabilities.movement,
            "in_place_entangle": arch.capabilities.in_place_entangle,
            "in_place_readout": arch.capabilities.in_place_readout,
        },
        "recipes": recipes,
        "kwargs": kwargs,
        "layout": {"strategy": arch.layout.strategy, "t_factories": arch.layout.t_factories,
                   "s_factories": arch.layout.s_factories},
        "synthesis": {"a_t": arch.synthesis.a_t, "a_c": arch.synthesis.a_c,
                      "log_base": arch.synthesis.log_base},
        "noise": {"p": arch.noise.p, "p_th": arch.noise.p_th, "prefactor": arch.noise.prefactor},
        "budget": {
            "d_range": [min(b.d_values), max(b.d_values)],
            "eps_rz_grid": {"min": b.eps_rz_min, "max": b.eps_rz_max,
                            "points_per_decade": b.points_per_decade},
            "anchors": [list(a) for a in b.cultivation.anchors],
            "folded_divisor": b.cultivation.folded_divisor,
        },
    }


def resolve_architecture(ref: str) -> Architecture:
    """Load ``preset:NAME[@speed]`` or a JSON config path.

    Preset names are looked up first in ``$FTRE_CONFIG_DIR`` (as ``NAME@speed.json``
    or ``NAME.json``), then among the shipped presets.
    """
    if ref.startswith("preset:"):
        name = ref[len("preset:"):]
        if "@" not in name:
            name += "@current"
        cfg_dir = os.environ.get("FTRE_CONFIG_DIR")
        if cfg_dir:
            for candidate in (f"{name}.json", f"{name.partition('@')[0]}.json"):
                p = Path(cfg_dir) / candidate
                if p.is_file():
                    return load_architecture(p.read_text(encoding="utf-8"))
        return load_architecture(preset_config(name))
    p = Path(ref)
    if not p.is_file():
        raise ConfigurationError(f"architecture config {ref!r} not found")
    return load_architecture(p.read_text(encoding="utf-8"))


class OpTimer:
    """Cached per-op class split and duration (ps) for one architecture.

    When ``assume_random_corrections`` is set, classically controlled ops are
    charged that fraction of their duration.
    """

    def __init__(self, arch: Architecture):
        self.arch = arch
        self._cache: dict[tuple, dict[str, int]] = {}

    def classes(self, op: GateOp) -> dict[str, int]:
        scale = self.arch.assume_random_corrections if op.ctrl is not None else None
        key = (op.kind, op.rounds, op.sites, scale)
        hit = self._cache.get(key)
        if hit is None:
            hit = op_classes_ps(self.arch, op.kind, rounds=op.rounds, sites=op.sites)
            if scale is not None:
                hit = {c: round(v * scale) for c, v in hit.items()}
            self._cache[key] = hit
        return hit

    def duration(self, op: GateOp) -> int:
        return sum(self.classes(op).values())


def teleport_s_time(arch: Architecture) -> float:
    """µs of a teleported S on a movement architecture: CNOT + one move + Measure."""
    if arch.is_lattice:
        raise ConfigurationError("teleported S via transversal CNOT needs a movement architecture")
    move = "AMove" if arch.capabilities.in_place_entangle else "ZMove"
    return primitive_time(arch, "CNOT") + primitive_time(arch, move) + primitive_time(arch, "Measure")

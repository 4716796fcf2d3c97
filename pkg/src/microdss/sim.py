"""Miniature earthquake-fire city: buildings that ignite, burn and spread, and
fire brigades that walk toward targets and douse adjacent fires.

Coordinates are ``(x, y)`` with ``x`` the column and ``y`` the row; north is
``y - 1``. One call to :func:`step_world` is one cycle (one simulated second).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

from microdss.fsf import FSF, Coord, Selector, SelectorType, chebyshev, make_fsf
from microdss.rng import SplitMix64

EMPTY, ROAD, BUILDING = ".", "R", "B"

# scan order for greedy movement ties
DIRECTIONS = ((0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1))


class ScenarioError(ValueError):
    pass


class UnknownBrigade(KeyError):
    pass


class Phase(str, enum.Enum):
    INTACT = "Intact"
    IGNITED = "Ignited"
    BURNING = "Burning"
    BURNED_OUT = "BurnedOut"
    EXTINGUISHED = "Extinguished"

    @property
    def on_fire(self) -> bool:
        return self in (Phase.IGNITED, Phase.BURNING)


FIERINESS = {Phase.IGNITED: 1, Phase.BURNING: 2}


@dataclass
class FireParams:
    spread_p: float = 0.15
    ignite_age: int = 2
    burn_age: int = 5
    view_radius: int = 5
    heat_ignited: int = 3
    heat_burning: int = 5

    _KEYS = {
        "spreadP": "spread_p",
        "igniteAge": "ignite_age",
        "burnAge": "burn_age",
        "viewRadius": "view_radius",
        "heatIgnited": "heat_ignited",
        "heatBurning": "heat_burning",
    }

    @classmethod
    def from_overrides(cls, overrides: dict) -> "FireParams":
        params = cls()
        for key, value in overrides.items():
            if key not in cls._KEYS:
                raise ScenarioError(f"unknown override {key!r}")
            name = cls._KEYS[key]
            kind = type(getattr(params, name))
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ScenarioError(f"override {key} must be a number")
            if kind is int and value != int(value):
                raise ScenarioError(f"override {key} must be an integer")
            setattr(params, name, kind(value))
        if not 0.0 <= params.spread_p <= 1.0:
            raise ScenarioError("spreadP must lie in [0, 1]")
        if min(params.ignite_age, params.burn_age, params.view_radius) < 0:
            raise ScenarioError("ages and view radius must be >= 0")
        if min(params.heat_ignited, params.heat_burning) < 1:
            raise ScenarioError("heat values must be >= 1")
        return params


@dataclass
class BuildingFireState:
    phase: Phase = Phase.INTACT
    phase_age: int = 0
    heat: int = 0


@dataclass
class Brigade:
    id: int
    position: Coord
    target: Coord | None = None


@dataclass(frozen=True)
class Action:
    brigade_id: int
    kind: str  # "dispatch" | "hold"
    target: Coord | None = None

    def __post_init__(self):
        if self.kind not in ("dispatch", "hold"):
            raise ValueError(f"unknown action kind {self.kind!r}")
        if self.kind == "dispatch" and self.target is None:
            raise ValueError("dispatch needs a target")

    def to_record(self) -> dict:
        return {
            "brigade": self.brigade_id,
            "kind": self.kind,
            "target": None if self.target is None else [self.target.x, self.target.y],
        }


@dataclass
class Scenario:
    width: int
    height: int
    rows: tuple[str, ...]
    ignitions: tuple[tuple[int, int, int], ...] = ()   # (x, y, cycle)
    brigades: tuple[tuple[int, int, int], ...] = ()    # (id, x, y)
    params: FireParams = field(default_factory=FireParams)


def _int_field(obj: dict, key: str, where: str, minimum: int | None = 0) -> int:
    if key not in obj:
        raise ScenarioError(f"{where}: missing {key!r}")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ScenarioError(f"{where}: {key!r} must be an integer")
    if minimum is not None and v < minimum:
        raise ScenarioError(f"{where}: {key!r} must be >= {minimum}")
    return v


def parse_scenario(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")
    width = _int_field(doc, "width", "scenario", 1)
    height = _int_field(doc, "height", "scenario", 1)
    rows = doc.get("rows")
    if not isinstance(rows, list) or len(rows) != height:
        raise ScenarioError(f"rows must be a list of {height} strings")
    for y, row in enumerate(rows):
        if not isinstance(row, str) or len(row) != width:
            raise ScenarioError(f"row {y} must be a string of length {width}")
        bad = set(row) - {EMPTY, ROAD, BUILDING}
        if bad:
            raise ScenarioError(f"row {y} has unknown cell codes {sorted(bad)}")

    def in_bounds(x, y):
        return 0 <= x < width and 0 <= y < height

    ignitions = []
    for i, ig in enumerate(doc.get("ignitions", [])):
        where = f"ignitions[{i}]"
        if not isinstance(ig, dict):
            raise ScenarioError(f"{where} must be an object")
        x, y = _int_field(ig, "x", where), _int_field(ig, "y", where)
        cycle = _int_field(ig, "cycle", where)
        if not in_bounds(x, y) or rows[y][x] != BUILDING:
            raise ScenarioError(f"{where} is not on a building")
        ignitions.append((x, y, cycle))

    brigades = []
    seen = set()
    for i, b in enumerate(doc.get("brigades", [])):
        where = f"brigades[{i}]"
        if not isinstance(b, dict):
            raise ScenarioError(f"{where} must be an object")
        bid = _int_field(b, "id", where)
        x, y = _int_field(b, "x", where), _int_field(b, "y", where)
        if bid in seen:
            raise ScenarioError(f"{where}: duplicate brigade id {bid}")
        seen.add(bid)
        if not in_bounds(x, y) or rows[y][x] == BUILDING:
            raise ScenarioError(f"{where} must stand on a non-building cell inside the grid")
        brigades.append((bid, x, y))

    overrides = doc.get("overrides", {})
    if not isinstance(overrides, dict):
        raise ScenarioError("overrides must be an object")
    return Scenario(width, height, tuple(rows), tuple(ignitions), tuple(brigades),
                    FireParams.from_overrides(overrides))


def load_scenario(path) -> Scenario:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from None
    return parse_scenario(doc)


class World:
    def __init__(self, scenario: Scenario, seed: int = 0):
        self.width = scenario.width
        self.height = scenario.height
        self.cells = scenario.rows
        self.params = scenario.params
        self.rng = SplitMix64(seed)
        self.cycle = 0
        # row-major, so dict iteration order is row-major too
        self.buildings: dict[Coord, BuildingFireState] = {}
        self.building_index: dict[Coord, int] = {}
        for y, row in enumerate(self.cells):
            for x, c in enumerate(row):
                if c == BUILDING:
                    pos = Coord(x, y)
                    self.building_index[pos] = len(self.buildings)
                    self.buildings[pos] = BuildingFireState()
        self.brigades = [Brigade(bid, Coord(x, y)) for bid, x, y in sorted(scenario.brigades)]
        self._schedule: dict[int, list[Coord]] = {}
        for x, y, c in scenario.ignitions:
            self._schedule.setdefault(c, []).append(Coord(x, y))
        self._apply_scheduled_ignitions()

    @classmethod
    def from_file(cls, path, seed: int = 0) -> "World":
        return cls(load_scenario(path), seed)

    def in_bounds(self, pos) -> bool:
        return 0 <= pos[0] < self.width and 0 <= pos[1] < self.height

    def is_building(self, pos) -> bool:
        return self.cells[pos[1]][pos[0]] == BUILDING

    def neighbours(self, pos: Coord) -> list[Coord]:
        """Building cells within Chebyshev 1 of ``pos``, row-major."""
        out = []
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                p = Coord(pos.x + dx, pos.y + dy)
                if (dx or dy) and self.in_bounds(p) and self.is_building(p):
                    out.append(p)
        return out

    def brigade(self, brigade_id: int) -> Brigade:
        for b in self.brigades:
            if b.id == brigade_id:
                return b
        raise UnknownBrigade(brigade_id)

    def ignite(self, pos: Coord) -> bool:
        state = self.buildings[pos]
        if state.phase is not Phase.INTACT:
            return False
        state.phase, state.phase_age, state.heat = Phase.IGNITED, 0, self.params.heat_ignited
        return True

    def _apply_scheduled_ignitions(self) -> None:
        for pos in self._schedule.get(self.cycle, ()):
            self.ignite(pos)


def _move(world: World, brigade: Brigade) -> None:
    if brigade.target is None or brigade.position == brigade.target:
        return
    best, best_d = None, chebyshev(brigade.position, brigade.target)
    for dx, dy in DIRECTIONS:
        p = Coord(brigade.position.x + dx, brigade.position.y + dy)
        if not world.in_bounds(p) or world.is_building(p):
            continue
        d = chebyshev(p, brigade.target)
        if d < best_d:
            best, best_d = p, d
    if best is not None:
        brigade.position = best


def step_world(world: World, actions=()) -> World:
    """Advance ``world`` by one cycle in place and return it."""
    p = world.params
    # (1) actions
    for action in actions:
        brigade = world.brigade(action.brigade_id)
        if action.kind == "hold":
            brigade.target = None
        else:
            if not world.in_bounds(action.target):
                raise ValueError(f"target {action.target} outside the grid")
            brigade.target = Coord(*action.target)
    # (2) movement
    for brigade in world.brigades:
        _move(world, brigade)
    # (3) extinguishing: lowest (y, x) burning neighbour per brigade
    for brigade in world.brigades:
        for pos in sorted(world.neighbours(brigade.position), key=lambda q: (q.y, q.x)):
            state = world.buildings[pos]
            if state.phase.on_fire:
                state.heat -= 1
                if state.heat <= 0:
                    state.phase, state.phase_age, state.heat = Phase.EXTINGUISHED, 0, 0
                break
    # (4) progression, then ageing of everything still on fire
    for state in world.buildings.values():
        if state.phase is Phase.IGNITED and state.phase_age >= p.ignite_age:
            state.phase, state.phase_age, state.heat = Phase.BURNING, 0, p.heat_burning
        elif state.phase is Phase.BURNING and state.phase_age >= p.burn_age:
            state.phase, state.phase_age = Phase.BURNED_OUT, 0
        if state.phase.on_fire:
            state.phase_age += 1
    # (5) spread: one draw per (burning source, intact neighbour) pair
    to_ignite = []
    for pos, state in world.buildings.items():
        if state.phase is not Phase.BURNING:
            continue
        for q in world.neighbours(pos):
            if world.buildings[q].phase is Phase.INTACT and world.rng.random() < p.spread_p:
                to_ignite.append(q)
    for q in to_ignite:
        world.ignite(q)
    # (6)
    world.cycle += 1
    world._apply_scheduled_ignitions()
    return world


def perceive(world: World) -> list[FSF]:
    """FSFs visible to the brigades this cycle: fires in view, then brigade selves."""
    radius = world.params.view_radius
    out = []
    if world.brigades:
        for pos, state in world.buildings.items():
            if not state.phase.on_fire:
                continue
            if not any(chebyshev(pos, b.position) <= radius for b in world.brigades):
                continue
            in_danger = burning = 0
            for q in world.neighbours(pos):
                phase = world.buildings[q].phase
                if phase is Phase.INTACT:
                    in_danger += 1
                elif phase.on_fire:
                    burning += 1
            out.append(make_fsf(
                Selector(SelectorType.FIRE, world.building_index[pos]),
                (("fieriness", FIERINESS[state.phase]),
                 ("inDangerNeighbours", in_danger),
                 ("burningNeighbours", burning)),
                pos, world.cycle,
            ))
    for b in world.brigades:
        out.append(make_fsf(Selector(SelectorType.FIRE_BRIGADE, b.id), (), b.position, world.cycle))
    return out


def burned_metrics(world: World) -> dict[str, int]:
    counts = {phase: 0 for phase in Phase}
    fieriness = 0
    for state in world.buildings.values():
        counts[state.phase] += 1
        fieriness += FIERINESS.get(state.phase, 0)
    return {
        "intact": counts[Phase.INTACT],
        "ignited": counts[Phase.IGNITED],
        "burning": counts[Phase.BURNING],
        "burnedOut": counts[Phase.BURNED_OUT],
        "extinguished": counts[Phase.EXTINGUISHED],
        "fierinessTotal": fieriness,
    }

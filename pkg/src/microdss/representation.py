"""Representation layer: one factual agent per fact stream, plus the link graph.

Per cycle the pipeline is fixed: ingest every FSF, rebuild links, update
indicators for all agents, step every automaton in ascending id order, then
take a snapshot. :meth:`RepresentationLayer.run_cycle` does all of it.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from microdss.config import AutomatonConfig, IndicatorConfig, KernelConfig
from microdss.fsf import (
    DEFAULT_POLARITY,
    FSF,
    Coord,
    PolarityTable,
    ProximityConfig,
    Selector,
    SelectorType,
    proximity,
)


class StaleObservation(Exception):
    """An FSF older than the temporal horizon; dropped, never fatal."""


class AutomatonState(str, enum.Enum):
    S1 = "S1-Emergent"
    S2 = "S2-Developing"
    S3 = "S3-Strong"
    S4 = "S4-Declining"


RETIRED = "retired"

LEGAL_TRANSITIONS = {
    (AutomatonState.S1, AutomatonState.S2),
    (AutomatonState.S2, AutomatonState.S3),
    (AutomatonState.S3, AutomatonState.S4),
    (AutomatonState.S4, AutomatonState.S3),
    (AutomatonState.S4, RETIRED),
}


def clamp(x: float, lo: float, hi: float) -> float:
    return max(lo, min(hi, x))


@dataclass
class FactualAgent:
    agent_id: int
    selector: Selector
    latest: FSF
    born_cycle: int
    history: deque = field(default_factory=lambda: deque(maxlen=32))
    state: AutomatonState = AutomatonState.S1
    i1: float = 0.0
    i2: float = 0.0
    last_fsf_cycle: int = -1
    below_since: int | None = None


@dataclass(frozen=True, order=True)
class Link:
    a: int
    b: int
    value: float
    kind: str  # "alliance" | "opposition"


@dataclass(frozen=True)
class AgentView:
    id: int
    selector: Selector
    state: AutomatonState
    i1: float
    i2: float
    born: int
    location: Coord


@dataclass(frozen=True)
class RepresentationSnapshot:
    cycle: int
    agents: tuple[AgentView, ...] = ()
    links: tuple[Link, ...] = ()
    retired: tuple[int, ...] = ()

    def agent(self, agent_id: int) -> AgentView | None:
        for a in self.agents:
            if a.id == agent_id:
                return a
        return None

    def by_id(self) -> dict[int, AgentView]:
        return {a.id: a for a in self.agents}

    def to_record(self) -> dict:
        return {
            "kind": "snapshot",
            "cycle": self.cycle,
            "agents": [
                {
                    "id": a.id,
                    "selector": str(a.selector),
                    "state": a.state.value,
                    "i1": round6(a.i1),
                    "i2": round6(a.i2),
                    "born": a.born,
                }
                for a in self.agents
            ],
            "links": [
                {"a": l.a, "b": l.b, "value": round6(l.value), "kind": l.kind}
                for l in self.links
            ],
            "retired": list(self.retired),
        }


def round6(x: float) -> float:
    # + 0.0 folds -0.0 so exported numbers are stable
    return round(x, 6) + 0.0


def rebuild_links(agents: Iterable[FactualAgent], table: PolarityTable = DEFAULT_POLARITY,
                  cfg: ProximityConfig = ProximityConfig()) -> list[Link]:
    ordered = sorted(agents, key=lambda a: a.agent_id)
    links = []
    for i, a in enumerate(ordered):
        for b in ordered[i + 1:]:
            value = proximity(a.latest, b.latest, table, cfg)
            if value > cfg.link_threshold:
                links.append(Link(a.agent_id, b.agent_id, value, "alliance"))
            elif value < -cfg.link_threshold:
                links.append(Link(a.agent_id, b.agent_id, value, "opposition"))
    return links


def fresh_intensity(agent: FactualAgent, incident: list[Link], cfg: IndicatorConfig) -> float:
    fsf = agent.latest
    kind = agent.selector.type
    if kind is SelectorType.FIRE:
        raw = (fsf.int_value("fieriness")
               + 0.2 * fsf.int_value("burningNeighbours")
               + 0.1 * fsf.int_value("inDangerNeighbours")) / 3
        return clamp(raw, 0.0, 1.0)
    if kind is SelectorType.FIRE_BRIGADE:
        oppositions = sum(1 for l in incident if l.kind == "opposition")
        return clamp(cfg.brigade_base + cfg.brigade_per_opposition * oppositions, 0.0, 1.0)
    # buildings and roads carry no intensity of their own
    return 0.0


def update_indicators(agent: FactualAgent, incident: list[Link], cycle: int,
                      cfg: IndicatorConfig = IndicatorConfig()) -> tuple[float, float]:
    if agent.last_fsf_cycle == cycle:
        agent.i1 = fresh_intensity(agent, incident, cfg)
    else:
        agent.i1 = clamp(agent.i1 - cfg.decay, -1.0, 1.0)
    agent.i2 = clamp(sum(l.value for l in incident), -1.0, 1.0)
    return agent.i1, agent.i2


def step_automaton(agent: FactualAgent, cycle: int, cfg: AutomatonConfig = AutomatonConfig()):
    """Apply at most one transition. Returns the new state or ``RETIRED``."""
    s = agent.state
    strong = agent.i1 >= cfg.strong_i1 and abs(agent.i2) >= cfg.strong_i2

    def sustained_below(threshold: float) -> bool:
        if agent.i1 >= threshold:
            agent.below_since = None
            return False
        if agent.below_since is None:
            agent.below_since = cycle
        return cycle - agent.below_since + 1 >= cfg.consecutive

    new = s
    if s is AutomatonState.S1:
        if agent.i1 >= cfg.emerge_i1:
            new = AutomatonState.S2
    elif s is AutomatonState.S2:
        if strong:
            new = AutomatonState.S3
    elif s is AutomatonState.S3:
        if sustained_below(cfg.decline_i1):
            new = AutomatonState.S4
    elif s is AutomatonState.S4:
        if strong:
            new = AutomatonState.S3
        elif sustained_below(cfg.retire_i1):
            new = RETIRED
    if new is not s:
        agent.below_since = None
        if new is not RETIRED:
            agent.state = new
    return new


class RepresentationLayer:
    """Owns the live factual agents of one kernel instance."""

    def __init__(self, cfg: KernelConfig = KernelConfig(), table: PolarityTable = DEFAULT_POLARITY):
        self.cfg = cfg
        self.table = table
        self.agents: dict[int, FactualAgent] = {}
        self._by_selector: dict[Selector, int] = {}
        self._next_id = 0
        self.links: list[Link] = []
        self.stale_dropped = 0
        self._retired_now: list[int] = []

    def ingest(self, fsf: FSF, cycle: int) -> int:
        if fsf.time > cycle:
            raise ValueError(f"FSF time {fsf.time} is ahead of cycle {cycle}")
        if fsf.time < cycle - self.cfg.proximity.t_max:
            self.stale_dropped += 1
            raise StaleObservation(f"{fsf.selector} time {fsf.time} at cycle {cycle}")
        agent_id = self._by_selector.get(fsf.selector)
        if agent_id is None:
            agent_id = self._next_id
            self._next_id += 1
            agent = FactualAgent(agent_id, fsf.selector, fsf, born_cycle=cycle,
                                 history=deque(maxlen=self.cfg.history_cap))
            self.agents[agent_id] = agent
            self._by_selector[fsf.selector] = agent_id
        else:
            agent = self.agents[agent_id]
            agent.latest = fsf
        agent.history.append(fsf)
        agent.last_fsf_cycle = cycle
        return agent_id

    def run_cycle(self, fsfs: Iterable[FSF], cycle: int) -> RepresentationSnapshot:
        for fsf in fsfs:
            try:
                self.ingest(fsf, cycle)
            except StaleObservation:
                pass
        self.links = rebuild_links(self.agents.values(), self.table, self.cfg.proximity)
        incident: dict[int, list[Link]] = {i: [] for i in self.agents}
        for link in self.links:
            incident[link.a].append(link)
            incident[link.b].append(link)
        for agent_id in sorted(self.agents):
            update_indicators(self.agents[agent_id], incident[agent_id], cycle, self.cfg.indicators)
        self._retired_now = []
        for agent_id in sorted(self.agents):
            agent = self.agents[agent_id]
            if step_automaton(agent, cycle, self.cfg.automaton) == RETIRED:
                self._retire(agent)
        if self._retired_now:
            gone = set(self._retired_now)
            self.links = [l for l in self.links if l.a not in gone and l.b not in gone]
        return self.snapshot(cycle)

    def _retire(self, agent: FactualAgent) -> None:
        del self.agents[agent.agent_id]
        # a later FSF for this selector opens a new fact stream under a new id
        del self._by_selector[agent.selector]
        self._retired_now.append(agent.agent_id)

    def snapshot(self, cycle: int) -> RepresentationSnapshot:
        views = tuple(
            AgentView(a.agent_id, a.selector, a.state, a.i1, a.i2, a.born_cycle, a.latest.location)
            for a in sorted(self.agents.values(), key=lambda a: a.agent_id)
        )
        return RepresentationSnapshot(
            cycle, views, tuple(sorted(self.links, key=lambda l: (l.a, l.b))), tuple(sorted(self._retired_now)),
        )

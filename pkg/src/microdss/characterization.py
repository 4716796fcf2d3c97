"""Characterization layer: Active/Passive/Stable groups and salient facts."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from microdss.fsf import SelectorType
from microdss.representation import RepresentationSnapshot


class SnapshotGap(ValueError):
    pass


class GroupKind(str, enum.Enum):
    ACTIVE = "Active"
    PASSIVE = "Passive"
    STABLE = "Stable"


class FactTag(str, enum.Enum):
    # declaration order is the emission order
    NEW_INCIDENT = "NEW_INCIDENT"
    ENGAGEMENT = "ENGAGEMENT"
    FIRE_EXTINGUISHING = "FIRE_EXTINGUISHING"
    BRIGADE_IN_DIFFICULTY = "BRIGADE_IN_DIFFICULTY"
    ISOLATED_OR_SILENT = "ISOLATED_OR_SILENT"


_TAG_ORDER = {tag: i for i, tag in enumerate(FactTag)}


@dataclass(frozen=True)
class SalientFact:
    tag: FactTag
    agents: tuple[int, ...]
    evidence: str

    def __post_init__(self):
        if not self.agents:
            raise ValueError("a salient fact needs at least one agent")


@dataclass(frozen=True)
class CharacterizationReport:
    cycle: int
    groups: dict[GroupKind, tuple[int, ...]]
    facts: tuple[SalientFact, ...]

    def to_record(self) -> dict:
        return {
            "kind": "characterization",
            "cycle": self.cycle,
            "active": list(self.groups[GroupKind.ACTIVE]),
            "passive": list(self.groups[GroupKind.PASSIVE]),
            "stable": list(self.groups[GroupKind.STABLE]),
            "facts": [
                {"tag": f.tag.value, "agents": list(f.agents), "evidence": f.evidence}
                for f in self.facts
            ],
        }


def classify(prev: RepresentationSnapshot, cur: RepresentationSnapshot,
             eps: float = 1e-6) -> dict[GroupKind, tuple[int, ...]]:
    if prev.cycle + 1 != cur.cycle:
        raise SnapshotGap(f"snapshots {prev.cycle} and {cur.cycle} are not consecutive")
    before = prev.by_id()
    groups: dict[GroupKind, list[int]] = {k: [] for k in GroupKind}
    for agent in cur.agents:
        old = before.get(agent.id)
        if old is None:
            groups[GroupKind.ACTIVE].append(agent.id)
            continue
        d1, d2 = agent.i1 - old.i1, agent.i2 - old.i2
        if d1 > eps or d2 > eps:
            kind = GroupKind.ACTIVE
        elif abs(d1) <= eps and abs(d2) <= eps:
            kind = GroupKind.STABLE
        else:
            kind = GroupKind.PASSIVE
        groups[kind].append(agent.id)
    return {k: tuple(sorted(v)) for k, v in groups.items()}


def interpret(groups: dict[GroupKind, tuple[int, ...]], cur: RepresentationSnapshot) -> list[SalientFact]:
    views = cur.by_id()
    active = set(groups[GroupKind.ACTIVE])
    facts: list[SalientFact] = []

    for i in groups[GroupKind.ACTIVE]:
        a = views[i]
        if a.born == cur.cycle:
            facts.append(SalientFact(FactTag.NEW_INCIDENT, (i,), f"{a.selector} first perceived"))

    fire_brigade = {SelectorType.FIRE, SelectorType.FIRE_BRIGADE}
    for link in cur.links:
        if link.kind != "opposition" or link.a not in active or link.b not in active:
            continue
        a, b = views[link.a], views[link.b]
        if {a.selector.type, b.selector.type} == fire_brigade:
            facts.append(SalientFact(
                FactTag.ENGAGEMENT, (link.a, link.b),
                f"{a.selector} opposes {b.selector} ({link.value:+.3f})",
            ))

    linked = {l.a for l in cur.links} | {l.b for l in cur.links}
    for i in groups[GroupKind.PASSIVE]:
        a = views[i]
        if a.selector.type is SelectorType.FIRE:
            facts.append(SalientFact(FactTag.FIRE_EXTINGUISHING, (i,), f"{a.selector} indicators falling"))
        elif a.selector.type is SelectorType.FIRE_BRIGADE:
            facts.append(SalientFact(FactTag.BRIGADE_IN_DIFFICULTY, (i,), f"{a.selector} indicators falling"))
    for i in groups[GroupKind.STABLE]:
        a = views[i]
        why = "silent" if i in linked else "isolated"
        facts.append(SalientFact(FactTag.ISOLATED_OR_SILENT, (i,), f"{a.selector} unchanged ({why})"))

    facts.sort(key=lambda f: (_TAG_ORDER[f.tag], min(f.agents), f.agents))
    return facts


def characterize(prev: RepresentationSnapshot, cur: RepresentationSnapshot,
                 eps: float = 1e-6) -> CharacterizationReport:
    groups = classify(prev, cur, eps)
    return CharacterizationReport(cur.cycle, groups, tuple(interpret(groups, cur)))

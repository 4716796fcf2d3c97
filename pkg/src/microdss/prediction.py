"""Prediction layer: case-based evaluation of the current situation.

A cycle's situation is summarized as a 12-feature signature. Past situations
live in a :class:`CaseBase` together with their consequences, an action
template and a learned weight. Retrieval ranks cases by
``similarity * weight``; the best case's template is expanded into brigade
actions; weights are nudged by how the fire load evolved afterwards.
"""

from __future__ import annotations

import enum
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from microdss.characterization import CharacterizationReport, GroupKind
from microdss.fsf import Coord, SelectorType, chebyshev
from microdss.representation import AutomatonState, RepresentationSnapshot, clamp
from microdss.sim import Action

SIGNATURE_LENGTH = 12
CASEBASE_VERSION = 1

FEATURE_NAMES = (
    "active", "passive", "stable", "fires", "brigades",
    "fire_i1", "fire_i2", "brigade_i1", "brigade_i2",
    "oppositions", "alliances", "strong",
)


class CaseBaseError(ValueError):
    pass


class Template(str, enum.Enum):
    ATTACK_STRONGEST = "ATTACK_STRONGEST"
    ATTACK_NEAREST = "ATTACK_NEAREST"
    REGROUP = "REGROUP"
    HOLD = "HOLD"


Signature = tuple  # 12 floats in [0, 1]


def compute_signature(snapshot: RepresentationSnapshot, report: CharacterizationReport) -> Signature:
    live = len(snapshot.agents)
    fires = [a for a in snapshot.agents if a.selector.type is SelectorType.FIRE]
    brigades = [a for a in snapshot.agents if a.selector.type is SelectorType.FIRE_BRIGADE]

    def share(n: int, total: int) -> float:
        return n / (1 + total)

    def mean_mapped(values) -> float:
        values = list(values)
        if not values:
            return 0.5
        return (sum(values) / len(values) + 1) / 2

    n_links = len(snapshot.links)
    opp = sum(1 for l in snapshot.links if l.kind == "opposition")
    return (
        share(len(report.groups[GroupKind.ACTIVE]), live),
        share(len(report.groups[GroupKind.PASSIVE]), live),
        share(len(report.groups[GroupKind.STABLE]), live),
        share(len(fires), live),
        share(len(brigades), live),
        mean_mapped(a.i1 for a in fires),
        mean_mapped(a.i2 for a in fires),
        mean_mapped(a.i1 for a in brigades),
        mean_mapped(a.i2 for a in brigades),
        share(opp, n_links),
        share(n_links - opp, n_links),
        share(sum(1 for a in snapshot.agents if a.state is AutomatonState.S3), live),
    )


def similarity(a, b) -> float:
    if len(a) != SIGNATURE_LENGTH or len(b) != SIGNATURE_LENGTH:
        raise ValueError(f"signatures must have {SIGNATURE_LENGTH} features")
    return 1.0 - sum(abs(x - y) for x, y in zip(a, b)) / SIGNATURE_LENGTH


@dataclass
class Case:
    case_id: int
    signature: Signature
    consequences: list[str]
    template: Template
    weight: float = 0.5

    def to_json(self) -> dict:
        return {
            "id": self.case_id,
            "signature": list(self.signature),
            "consequences": list(self.consequences),
            "template": self.template.value,
            "weight": self.weight,
        }


@dataclass
class CaseBase:
    cases: list[Case] = field(default_factory=list)
    next_id: int = 0

    def add(self, signature, consequences, template: Template, weight: float = 0.5) -> Case:
        sig = tuple(float(x) for x in signature)
        if len(sig) != SIGNATURE_LENGTH:
            raise CaseBaseError(f"signature must have {SIGNATURE_LENGTH} features")
        case = Case(self.next_id, sig, list(consequences), Template(template), clamp(weight, 0.0, 1.0))
        self.cases.append(case)
        self.next_id += 1
        return case

    def get(self, case_id: int) -> Case:
        for c in self.cases:
            if c.case_id == case_id:
                return c
        raise KeyError(case_id)

    def to_json(self) -> dict:
        return {"version": CASEBASE_VERSION, "nextId": self.next_id,
                "cases": [c.to_json() for c in self.cases]}

    @classmethod
    def from_json(cls, doc) -> "CaseBase":
        if not isinstance(doc, dict):
            raise CaseBaseError("case base must be a JSON object")
        if doc.get("version") != CASEBASE_VERSION:
            raise CaseBaseError(f"unsupported case base version {doc.get('version')!r}")
        try:
            cases = []
            for c in doc["cases"]:
                sig = tuple(float(x) for x in c["signature"])
                if len(sig) != SIGNATURE_LENGTH:
                    raise CaseBaseError(f"case {c['id']}: signature length {len(sig)}")
                weight = float(c["weight"])
                if not 0.0 <= weight <= 1.0:
                    raise CaseBaseError(f"case {c['id']}: weight {weight} outside [0, 1]")
                cases.append(Case(int(c["id"]), sig, [str(s) for s in c["consequences"]],
                                  Template(c["template"]), weight))
            next_id = int(doc["nextId"])
        except CaseBaseError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise CaseBaseError(f"malformed case base: {exc!r}") from None
        ids = [c.case_id for c in cases]
        if len(set(ids)) != len(ids):
            raise CaseBaseError("duplicate case ids")
        if ids and next_id <= max(ids):
            raise CaseBaseError("nextId must exceed every case id")
        return cls(cases, next_id)

    @classmethod
    def load(cls, path) -> "CaseBase":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CaseBaseError(f"cannot read case base {path}: {exc}") from None
        return cls.from_json(doc)

    def save(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                json.dump(self.to_json(), fh, indent=2)
                fh.write("\n")
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


def retrieve(base: CaseBase, sig, k: int = 3) -> list[tuple[Case, float]]:
    """Top-``k`` cases by similarity * weight; ties go to the lower case id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    scored = [(c, similarity(sig, c.signature)) for c in base.cases]
    scored.sort(key=lambda cs: (-(cs[1] * cs[0].weight), cs[0].case_id))
    return scored[:k]


@dataclass(frozen=True)
class Recommendation:
    template: Template | None
    actions: tuple[Action, ...] = ()
    support: tuple[tuple[int, float, float], ...] = ()   # (case id, similarity, weight)
    confidence: float = 0.0

    def to_record(self, cycle: int) -> dict:
        return {
            "kind": "recommendation",
            "cycle": cycle,
            "recommendation": {
                "template": None if self.template is None else self.template.value,
                "actions": [a.to_record() for a in self.actions],
                "confidence": round(self.confidence, 6) + 0.0,
                "support": [
                    {"case": cid, "similarity": round(s, 6) + 0.0, "weight": round(w, 6) + 0.0}
                    for cid, s, w in self.support
                ],
            },
        }


EMPTY_RECOMMENDATION = Recommendation(None)


def expand_template(template: Template, snapshot: RepresentationSnapshot) -> tuple[Action, ...]:
    fires = [a for a in snapshot.agents if a.selector.type is SelectorType.FIRE]
    brigades = [a for a in snapshot.agents if a.selector.type is SelectorType.FIRE_BRIGADE]
    if template is Template.HOLD or not brigades:
        return ()
    if template is Template.REGROUP:
        cx = sum(b.location.x for b in brigades) // len(brigades)
        cy = sum(b.location.y for b in brigades) // len(brigades)
        return tuple(Action(b.selector.id, "dispatch", Coord(cx, cy)) for b in brigades)
    if not fires:
        return ()
    if template is Template.ATTACK_STRONGEST:
        target = min(fires, key=lambda f: (-f.i1, f.id))
        return tuple(Action(b.selector.id, "dispatch", target.location) for b in brigades)
    actions = []
    for b in brigades:
        nearest = min(fires, key=lambda f: (chebyshev(f.location, b.location), f.id))
        actions.append(Action(b.selector.id, "dispatch", nearest.location))
    return tuple(actions)


def recommend(ranked: list[tuple[Case, float]], snapshot: RepresentationSnapshot) -> Recommendation:
    if not ranked:
        return Recommendation(Template.HOLD)
    top = ranked[0][0]
    support = tuple((c.case_id, s, c.weight) for c, s in ranked)
    confidence = max(s * w for _, s, w in support)
    return Recommendation(top.template, expand_template(top.template, snapshot), support, confidence)


def outcome_score(before: float, after: float) -> float:
    """0.5 for no change in fire load, above 0.5 for a reduction, below for growth."""
    return clamp(0.5 + (before - after) / (2 * max(1, before)), 0.0, 1.0)


def update_weight(case: Case, score: float, alpha: float = 0.1) -> float:
    case.weight = clamp(case.weight + alpha * (score - 0.5), 0.0, 1.0)
    return case.weight

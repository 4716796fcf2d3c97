"""Closed-loop runs (simulator + kernel), log replay, and the seeded case base.

Each cycle: perceive -> represent -> characterize -> (policy) decide -> step
the world. Three JSON Lines records are written per cycle to ``events.jsonl``:
snapshot, characterization and recommendation, in that order.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable

from microdss.characterization import CharacterizationReport, characterize
from microdss.config import KernelConfig
from microdss.fsf import FSF, DEFAULT_POLARITY, FSFError, PolarityTable, SelectorType, chebyshev, parse_line, serialize_fsf
from microdss.prediction import (
    EMPTY_RECOMMENDATION,
    CaseBase,
    Recommendation,
    Template,
    compute_signature,
    outcome_score,
    recommend,
    retrieve,
    update_weight,
)
from microdss.representation import RepresentationLayer, RepresentationSnapshot
from microdss.sim import Action, World, burned_metrics, load_scenario, perceive, step_world

POLICIES = ("none", "baseline", "dss")
EVENTS_FILE = "events.jsonl"
FSF_LOG_FILE = "fsf.log"
SUMMARY_FILE = "summary.json"


class FSFLogError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def scenario_path(name: str) -> Path:
    """Path of a bundled scenario, e.g. ``scenario_path("cluster.json")``."""
    return Path(str(resources.files("microdss") / "scenarios" / name))


def bundled_scenarios() -> list[str]:
    return sorted(p.name for p in (resources.files("microdss") / "scenarios").iterdir()
                  if p.name.endswith(".json"))


class Kernel:
    """Representation and characterization layers driven one cycle at a time."""

    def __init__(self, cfg: KernelConfig = KernelConfig(), table: PolarityTable = DEFAULT_POLARITY):
        self.cfg = cfg
        self.layer = RepresentationLayer(cfg, table)
        self.prev: RepresentationSnapshot | None = None

    def step(self, fsfs, cycle: int) -> tuple[RepresentationSnapshot, CharacterizationReport]:
        if self.prev is None:
            self.prev = RepresentationSnapshot(cycle - 1)
        snap = self.layer.run_cycle(fsfs, cycle)
        report = characterize(self.prev, snap, self.cfg.eps)
        self.prev = snap
        return snap, report


@dataclass
class CycleResult:
    cycle: int
    fsfs: list[FSF]
    snapshot: RepresentationSnapshot
    report: CharacterizationReport
    recommendation: Recommendation
    actions: list[Action]
    metrics: dict[str, int]

    def records(self) -> list[dict]:
        return [self.snapshot.to_record(), self.report.to_record(),
                self.recommendation.to_record(self.cycle)]


def baseline_actions(world: World, fsfs: list[FSF]) -> list[Action]:
    """Send each brigade to its nearest currently perceived fire, else hold."""
    fires = [f for f in fsfs if f.selector.type is SelectorType.FIRE]
    actions = []
    for b in world.brigades:
        if not fires:
            actions.append(Action(b.id, "hold"))
            continue
        nearest = min(fires, key=lambda f: (chebyshev(f.location, b.position), f.selector.id))
        actions.append(Action(b.id, "dispatch", nearest.location))
    return actions


@dataclass
class _Decision:
    cycle: int
    fieriness: int
    case_ids: tuple[int, ...]


class ClosedLoop:
    """A simulator world and a kernel coupled through a decision policy."""

    def __init__(self, world: World, policy: str = "none", cfg: KernelConfig = KernelConfig(),
                 casebase: CaseBase | None = None):
        if policy not in POLICIES:
            raise ValueError(f"policy must be one of {POLICIES}")
        if policy == "dss" and casebase is None:
            raise ValueError("policy 'dss' needs a case base")
        self.world = world
        self.policy = policy
        self.cfg = cfg
        self.casebase = casebase
        self.kernel = Kernel(cfg)
        self.pending: list[_Decision] = []
        self.recommendations_issued = 0
        self.cases_updated = 0

    def _learn(self, metrics: dict[str, int]) -> None:
        horizon = self.cfg.prediction.horizon
        due = [d for d in self.pending if d.cycle + horizon <= self.world.cycle]
        self.pending = [d for d in self.pending if d.cycle + horizon > self.world.cycle]
        for d in due:
            score = outcome_score(d.fieriness, metrics["fierinessTotal"])
            for cid in d.case_ids:
                update_weight(self.casebase.get(cid), score, self.cfg.prediction.alpha)
                self.cases_updated += 1

    def step(self) -> CycleResult:
        world = self.world
        cycle = world.cycle
        metrics = burned_metrics(world)
        if self.policy == "dss":
            self._learn(metrics)
        fsfs = perceive(world)
        snap, report = self.kernel.step(fsfs, cycle)
        rec = EMPTY_RECOMMENDATION
        if self.policy == "none":
            actions = [Action(b.id, "hold") for b in world.brigades]
        elif self.policy == "baseline":
            actions = baseline_actions(world, fsfs)
        else:
            sig = compute_signature(snap, report)
            rec = recommend(retrieve(self.casebase, sig, self.cfg.prediction.k), snap)
            actions = list(rec.actions)
            self.recommendations_issued += 1
            if rec.support:
                self.pending.append(_Decision(cycle, metrics["fierinessTotal"],
                                              tuple(cid for cid, _, _ in rec.support)))
        result = CycleResult(cycle, fsfs, snap, report, rec, actions, metrics)
        step_world(world, actions)
        return result

    def finish(self) -> dict[str, int]:
        metrics = burned_metrics(self.world)
        if self.policy == "dss":
            self._learn(metrics)
        return metrics


@dataclass
class RunConfig:
    scenario_path: Path
    out_dir: Path
    seed: int = 1
    cycles: int = 30
    policy: str = "none"
    casebase_path: Path | None = None
    kernel: KernelConfig = field(default_factory=KernelConfig)

    def __post_init__(self):
        if self.cycles < 1:
            raise ValueError("cycles must be >= 1")
        if self.policy not in POLICIES:
            raise ValueError(f"policy must be one of {POLICIES}")
        if self.policy == "dss" and self.casebase_path is None:
            raise ValueError("policy 'dss' requires a case base path")


@dataclass
class RunReport:
    final_metrics: dict[str, int] | None
    per_cycle_log_path: str
    recommendations_issued: int = 0
    cases_updated: int = 0

    def to_json(self) -> dict:
        return {
            "finalMetrics": self.final_metrics,
            "perCycleLogPath": self.per_cycle_log_path,
            "recommendationsIssued": self.recommendations_issued,
            "casesUpdated": self.cases_updated,
        }


def _dump(record: dict) -> str:
    return json.dumps(record, separators=(",", ":")) + "\n"


def _write_summary(out_dir: Path, report: RunReport) -> None:
    (out_dir / SUMMARY_FILE).write_text(json.dumps(report.to_json(), indent=2) + "\n")


def run_scenario(config: RunConfig, observer: Callable[[CycleResult, World], None] | None = None) -> RunReport:
    """Run the closed loop for ``config.cycles`` cycles and write its outputs.

    Raises :class:`~microdss.sim.ScenarioError` for a bad scenario and
    :class:`~microdss.prediction.CaseBaseError` for a bad case base.
    ``observer`` sees every cycle's result and the world before it is stepped.
    """
    world = World(load_scenario(config.scenario_path), config.seed)
    casebase = None
    if config.policy == "dss":
        path = Path(config.casebase_path)
        if path.exists():
            casebase = CaseBase.load(path)
        else:
            casebase = default_casebase()
            casebase.save(path)
    loop = ClosedLoop(world, config.policy, config.kernel, casebase)

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    events_path = out_dir / EVENTS_FILE
    with open(events_path, "w") as events, open(out_dir / FSF_LOG_FILE, "w") as fsf_log:
        for _ in range(config.cycles):
            result = loop.step()
            if observer is not None:
                observer(result, world)
            fsf_log.writelines(serialize_fsf(f) + "\n" for f in result.fsfs)
            events.writelines(_dump(r) for r in result.records())
    final = loop.finish()
    if casebase is not None:
        casebase.save(config.casebase_path)
    report = RunReport(final, str(events_path), loop.recommendations_issued, loop.cases_updated)
    _write_summary(out_dir, report)
    return report


def read_fsf_log(path) -> list[FSF]:
    """Read a log of one FSF per line (textual or JSON); blank lines are skipped."""
    out = []
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                out.append(parse_line(line))
            except FSFError as exc:
                raise FSFLogError(line_no, str(exc)) from None
    return out


def replay_log(log_path, out_dir, cfg: KernelConfig = KernelConfig()) -> RunReport:
    """Drive the kernel alone from a captured FSF log, one cycle per time value."""
    fsfs = read_fsf_log(log_path)
    by_time: dict[int, list[FSF]] = defaultdict(list)
    for f in fsfs:
        by_time[f.time].append(f)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    events_path = out_dir / EVENTS_FILE
    kernel = Kernel(cfg)
    with open(events_path, "w") as events:
        if by_time:
            for cycle in range(min(by_time), max(by_time) + 1):
                snap, report = kernel.step(by_time.get(cycle, []), cycle)
                for record in (snap.to_record(), report.to_record(), EMPTY_RECOMMENDATION.to_record(cycle)):
                    events.write(_dump(record))
    report = RunReport(None, str(events_path))
    _write_summary(out_dir, report)
    return report


# Seeded case base: one case per reference scenario, signature captured at
# cycle 5 of a policy-none run with seed 1.
DEFAULT_CASES = (
    ("cluster.json", Template.ATTACK_STRONGEST,
     ["fire cluster spreading to neighbouring buildings", "concentrated attack contains the cluster"]),
    ("scattered.json", Template.ATTACK_NEAREST,
     ["several small fires far apart", "each brigade should take the closest fire"]),
    ("dispersed.json", Template.REGROUP,
     ["brigades weakened and out of contact", "regroup before engaging"]),
    ("quiet.json", Template.HOLD,
     ["no incident reported", "no intervention needed"]),
)
DEFAULT_CAPTURE_CYCLE = 5


def capture_signature(scenario: str | Path, cycle: int = DEFAULT_CAPTURE_CYCLE, seed: int = 1,
                      cfg: KernelConfig = KernelConfig()):
    path = Path(scenario)
    if not path.exists():
        path = scenario_path(str(scenario))
    loop = ClosedLoop(World(load_scenario(path), seed), "none", cfg)
    while True:
        result = loop.step()
        if result.cycle == cycle:
            return compute_signature(result.snapshot, result.report)


def default_casebase() -> CaseBase:
    base = CaseBase()
    for name, template, consequences in DEFAULT_CASES:
        base.add(capture_signature(name), consequences, template, 0.5)
    return base

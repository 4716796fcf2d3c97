"""Agent-based decision support kernel for crisis situations, closed in a loop
with a small deterministic fire-disaster simulator."""

from microdss.characterization import (
    CharacterizationReport,
    FactTag,
    GroupKind,
    SalientFact,
    characterize,
    classify,
    interpret,
)
from microdss.config import KernelConfig, apply_overrides
from microdss.driver import ClosedLoop, Kernel, RunConfig, RunReport, replay_log, run_scenario, scenario_path
from microdss.fsf import (
    FSF,
    Coord,
    PolarityTable,
    ProximityConfig,
    Selector,
    SelectorType,
    parse_fsf,
    proximity,
    semantic_polarity,
    serialize_fsf,
)
from microdss.prediction import (
    Case,
    CaseBase,
    Recommendation,
    Template,
    compute_signature,
    outcome_score,
    recommend,
    retrieve,
    similarity,
    update_weight,
)
from microdss.representation import AutomatonState, RepresentationLayer, RepresentationSnapshot
from microdss.sim import Action, World, burned_metrics, perceive, step_world

__version__ = "0.1.0"

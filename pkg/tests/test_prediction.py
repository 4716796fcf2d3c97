import json
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from microdss.characterization import CharacterizationReport, GroupKind
from microdss.driver import DEFAULT_CASES, capture_signature, default_casebase
from microdss.fsf import Coord, Selector, SelectorType
from microdss.prediction import (
    CaseBase,
    CaseBaseError,
    Template,
    compute_signature,
    outcome_score,
    recommend,
    retrieve,
    similarity,
    update_weight,
)
from microdss.representation import AgentView, AutomatonState, Link, RepresentationSnapshot
from microdss.sim import Action

F, B = SelectorType.FIRE, SelectorType.FIRE_BRIGADE


def view(i, kind, i1=0.0, i2=0.0, loc=(0, 0), state=AutomatonState.S2, sel_id=None):
    return AgentView(i, Selector(kind, i if sel_id is None else sel_id), state, i1, i2, 0, Coord(*loc))


def report(cycle=0, active=(), passive=(), stable=()):
    return CharacterizationReport(cycle, {GroupKind.ACTIVE: tuple(active), GroupKind.PASSIVE: tuple(passive),
                                          GroupKind.STABLE: tuple(stable)}, ())


def brute_force_ranking(base, sig, k):
    """Independent ranking: vectorized scores, lexsort on (id, -score)."""
    if not base.cases:
        return []
    sigs = np.array([c.signature for c in base.cases])
    weights = np.array([c.weight for c in base.cases])
    ids = np.array([c.case_id for c in base.cases])
    sims = 1.0 - np.abs(sigs - np.asarray(sig)).sum(axis=1) / 12.0
    order = np.lexsort((ids, -(sims * weights)))
    return [int(ids[i]) for i in order[:k]]


def random_base(rng, n):
    base = CaseBase()
    for _ in range(n):
        base.add([rng.random() for _ in range(12)], ["x"], rng.choice(list(Template)), rng.random())
    return base


class TestSignature:
    def test_empty(self):
        sig = compute_signature(RepresentationSnapshot(0), report())
        assert sig == (0, 0, 0, 0, 0, 0.5, 0.5, 0.5, 0.5, 0, 0, 0)

    def test_single_strong_fire(self):
        snap = RepresentationSnapshot(3, (view(0, F, 0.5, -0.8, state=AutomatonState.S3),))
        sig = compute_signature(snap, report(3, active=(0,)))
        expected = (0.5, 0, 0, 0.5, 0, 0.75, 0.1, 0.5, 0.5, 0, 0, 0.5)
        assert sig == pytest.approx(expected, abs=1e-12)

    def test_links_and_brigades(self):
        snap = RepresentationSnapshot(3, (view(0, F, 1.0, -1.0), view(1, B, 0.5, 0.4), view(2, B, 0.5, 0.4)),
                                      (Link(0, 1, -0.5, "opposition"), Link(0, 2, -0.5, "opposition"),
                                       Link(1, 2, 0.9, "alliance")))
        sig = compute_signature(snap, report(3, stable=(0, 1, 2)))
        assert sig[2] == pytest.approx(3 / 4)
        assert sig[4] == pytest.approx(2 / 4)
        assert sig[5] == pytest.approx(1.0) and sig[6] == pytest.approx(0.0)
        assert sig[8] == pytest.approx(0.7)
        assert sig[9] == pytest.approx(2 / 4) and sig[10] == pytest.approx(1 / 4)


class TestSimilarity:
    def test_examples(self):
        assert similarity([0.3] * 12, [0.3] * 12) == 1.0
        assert similarity([0.0] * 12, [1.0] * 12) == 0.0
        assert similarity([0.5] * 12, [0.0] * 12) == pytest.approx(0.5)

    def test_length_checked(self):
        with pytest.raises(ValueError):
            similarity([0.0] * 11, [0.0] * 12)

    @settings(max_examples=200)
    @given(*(st.lists(st.floats(0, 1), min_size=12, max_size=12) for _ in range(3)))
    def test_properties(self, a, b, c):
        assert similarity(a, b) == pytest.approx(similarity(b, a), abs=1e-15)
        assert 0.0 <= similarity(a, b) <= 1.0
        l1 = sum(abs(x - y) for x, y in zip(a, b)) / 12
        assert abs(similarity(a, c) - similarity(b, c)) <= l1 + 1e-12
        if l1 > 1e-15:
            assert similarity(a, b) < 1.0


class TestRetrieve:
    def test_single_case(self):
        base = CaseBase()
        base.add([1.0] * 12, [], Template.HOLD, 0.1)
        ((case, sim),) = retrieve(base, [0.0] * 12, k=3)
        assert case.case_id == 0 and sim == 0.0

    def test_empty_base(self):
        assert retrieve(CaseBase(), [0.0] * 12) == []

    def test_exact_match_ranks_first(self):
        rng = random.Random(7)
        base = random_base(rng, 100)
        target = base.cases[42]
        target.weight = 1.0
        ranked = retrieve(base, target.signature, k=3)
        assert ranked[0][0] is target
        assert brute_force_ranking(base, target.signature, 3)[0] == 42

    def test_tie_goes_to_lower_id(self):
        base = CaseBase()
        base.add([0.2] * 12, [], Template.HOLD, 0.5)
        base.add([0.2] * 12, [], Template.REGROUP, 0.5)
        assert [c.case_id for c, _ in retrieve(base, [0.0] * 12, k=2)] == [0, 1]

    def test_matches_brute_force(self):
        rng = random.Random(11)
        base = random_base(rng, 60)
        for _ in range(50):
            sig = [rng.random() for _ in range(12)]
            got = [c.case_id for c, _ in retrieve(base, sig, k=5)]
            assert got == brute_force_ranking(base, sig, 5)


class TestRecommend:
    def snapshot(self):
        return RepresentationSnapshot(9, (
            view(0, F, 0.3, loc=(2, 2)),
            view(1, F, 0.6, loc=(10, 10)),
            view(2, B, 0.5, loc=(3, 3), sel_id=0),
            view(3, B, 0.5, loc=(12, 12), sel_id=1),
        ))

    def ranked(self, template):
        base = CaseBase()
        base.add([0.0] * 12, ["c"], template, 0.8)
        return retrieve(base, [0.0] * 12)

    def test_attack_strongest(self):
        rec = recommend(self.ranked(Template.ATTACK_STRONGEST), self.snapshot())
        assert rec.actions == (Action(0, "dispatch", Coord(10, 10)), Action(1, "dispatch", Coord(10, 10)))
        assert rec.confidence == pytest.approx(0.8)
        assert rec.support == ((0, 1.0, 0.8),)

    def test_attack_nearest(self):
        rec = recommend(self.ranked(Template.ATTACK_NEAREST), self.snapshot())
        assert rec.actions == (Action(0, "dispatch", Coord(2, 2)), Action(1, "dispatch", Coord(10, 10)))

    def test_regroup(self):
        rec = recommend(self.ranked(Template.REGROUP), self.snapshot())
        assert {a.target for a in rec.actions} == {Coord(7, 7)}

    def test_hold(self):
        assert recommend(self.ranked(Template.HOLD), self.snapshot()).actions == ()

    def test_no_fires_degenerates_to_hold(self):
        snap = RepresentationSnapshot(1, (view(2, B, 0.5, loc=(3, 3)),))
        assert recommend(self.ranked(Template.ATTACK_NEAREST), snap).actions == ()
        assert recommend(self.ranked(Template.ATTACK_STRONGEST), snap).actions == ()

    def test_empty_base_holds(self):
        rec = recommend([], self.snapshot())
        assert rec.template is Template.HOLD and rec.actions == () and rec.confidence == 0.0

    def test_confidence_is_best_product(self):
        base = CaseBase()
        base.add([0.0] * 12, [], Template.HOLD, 0.2)
        base.add([0.5] * 12, [], Template.REGROUP, 1.0)
        rec = recommend(retrieve(base, [0.0] * 12), self.snapshot())
        assert rec.template is Template.REGROUP
        assert rec.confidence == pytest.approx(0.5)


class TestLearning:
    @pytest.mark.parametrize("before, after, score", [(10, 0, 1.0), (10, 10, 0.5), (0, 5, 0.0), (4, 6, 0.25)])
    def test_outcome_score(self, before, after, score):
        assert outcome_score(before, after) == pytest.approx(score)

    @pytest.mark.parametrize("weight, score, expected", [(0.5, 1.0, 0.55), (0.5, 0.5, 0.5), (0.0, 0.0, 0.0),
                                                         (1.0, 1.0, 1.0)])
    def test_update_weight(self, weight, score, expected):
        base = CaseBase()
        case = base.add([0.0] * 12, [], Template.HOLD, weight)
        assert update_weight(case, score) == pytest.approx(expected, abs=1e-12)


class TestCaseBaseFile:
    def test_round_trip(self, tmp_path):
        base = random_base(random.Random(3), 5)
        path = tmp_path / "cb.json"
        base.save(path)
        loaded = CaseBase.load(path)
        assert loaded == base
        assert not list(tmp_path.glob("*.tmp"))

    @pytest.mark.parametrize("mutate", [
        lambda d: d.update(version=2),
        lambda d: d["cases"][0].update(signature=[0.0] * 11),
        lambda d: d["cases"][0].update(template="PANIC"),
        lambda d: d["cases"][0].update(weight=1.5),
        lambda d: d.update(nextId=0),
        lambda d: d.pop("cases"),
    ])
    def test_rejects_bad_documents(self, mutate):
        doc = random_base(random.Random(3), 2).to_json()
        mutate(doc)
        with pytest.raises(CaseBaseError):
            CaseBase.from_json(json.loads(json.dumps(doc)))


def test_default_casebase_is_captured_not_invented():
    base = default_casebase()
    assert [c.template for c in base.cases] == [t for _, t, _ in DEFAULT_CASES]
    assert all(c.weight == 0.5 for c in base.cases)
    for case, (scenario, _, _) in zip(base.cases, DEFAULT_CASES):
        assert case.signature == capture_signature(scenario)
        assert all(0.0 <= x <= 1.0 for x in case.signature)
    # four distinct situations
    assert len({c.signature for c in base.cases}) == 4

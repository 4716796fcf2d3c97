import itertools
import re
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from microdss.fsf import (
    FSF,
    Coord,
    DuplicateQualifier,
    MalformedSyntax,
    MissingRequiredQualifier,
    PolarityTable,
    ProximityConfig,
    Selector,
    SelectorType,
    UnknownSelectorType,
    fsf_from_json,
    fsf_to_json,
    make_fsf,
    parse_fsf,
    parse_line,
    proximity,
    semantic_polarity,
    serialize_fsf,
)

PAPER_FSF = "(fire#14, fieriness, 1, inDangerNeighbours, 3, burningNeighbours, 2, localisation, 20|25, time, 7)"
CORPUS = Path(__file__).parent / "data" / "fsf_corpus.txt"

F, B = SelectorType.FIRE, SelectorType.FIRE_BRIGADE


def canonical(text: str) -> str:
    """Whitespace normalization written independently of the serializer."""
    s = text.strip()
    s = re.sub(r"\(\s+", "(", s)
    s = re.sub(r"\s+\)", ")", s)
    return re.sub(r"\s*,\s*", ", ", s)


def test_paper_example_fields():
    f = parse_fsf(PAPER_FSF)
    assert f.selector == Selector(F, 14)
    assert f.get("fieriness") == 1
    assert f.get("inDangerNeighbours") == 3
    assert f.get("burningNeighbours") == 2
    assert f.location == Coord(20, 25)
    assert f.time == 7
    assert serialize_fsf(f) == PAPER_FSF


def test_minimal_fsf():
    f = parse_fsf("(fireBrigade#0, localisation, 0|0, time, 0)")
    assert f.extra_pairs == ()
    assert serialize_fsf(f) == "(fireBrigade#0, localisation, 0|0, time, 0)"


@pytest.mark.parametrize("text, error", [
    ("(fire#2, fieriness, 1, time, 3)", MissingRequiredQualifier),
    ("(fire#2, fieriness, 1, localisation, 1|1)", MissingRequiredQualifier),
    ("(fire#2, fieriness, 1, localisation, 1|1, time, 3", MalformedSyntax),
    ("fire#2, localisation, 1|1, time, 3)", MalformedSyntax),
    ("(fire#2, fieriness, localisation, 1|1, time, 3)", MalformedSyntax),
    ("(fire#2, (x), localisation, 1|1, time, 3)", MalformedSyntax),
    ("(fire#2, localisation, 1|1, time, -1)", MalformedSyntax),
    ("(fire#2, localisation, 7, time, 1)", MalformedSyntax),
    ("(fire#2, localisation, 1|1|1, time, 1)", MalformedSyntax),
    ("(fire#2, , localisation, 1|1, time, 1)", MalformedSyntax),
    ("(fire, localisation, 1|1, time, 1)", MalformedSyntax),
    ("(fire#-2, localisation, 1|1, time, 1)", MalformedSyntax),
    ("(civilian#2, localisation, 1|1, time, 3)", UnknownSelectorType),
    ("(fire#2, time, 1, localisation, 1|1, time, 3)", DuplicateQualifier),
    ("()", MalformedSyntax),
])
def test_parse_errors(text, error):
    with pytest.raises(error):
        parse_fsf(text)


def test_missing_localisation_names_qualifier():
    with pytest.raises(MissingRequiredQualifier) as info:
        parse_fsf("(fire#2, fieriness, 1, time, 3)")
    assert info.value.qualifier == "localisation"


def test_value_typing():
    f = parse_fsf("(building#1, a, -4, b, 2|-3, c, collapsed, localisation, 0|0, time, 1)")
    assert f.get("a") == -4 and isinstance(f.get("a"), int)
    assert f.get("b") == Coord(2, -3)
    assert f.get("c") == "collapsed"


def test_corpus_round_trip():
    lines = [l for l in CORPUS.read_text().splitlines() if l.strip()]
    assert len(lines) >= 50
    assert PAPER_FSF in lines
    for line in lines:
        f = parse_fsf(line)
        assert serialize_fsf(f) == canonical(line)
        assert parse_fsf(serialize_fsf(f)) == f


def test_json_form_round_trip():
    f = parse_fsf(PAPER_FSF)
    doc = fsf_to_json(f)
    assert doc["selector"] == {"type": "fire", "id": 14}
    assert doc["location"] == {"x": 20, "y": 25}
    assert fsf_from_json(doc) == f
    import json
    assert parse_line(json.dumps(doc)) == f
    assert parse_line(PAPER_FSF) == f


def test_json_form_rejects_inconsistent_time():
    doc = fsf_to_json(parse_fsf(PAPER_FSF))
    doc["time"] = 8
    with pytest.raises(MalformedSyntax):
        fsf_from_json(doc)


idents = st.from_regex(r"[a-z][A-Za-z0-9]{0,8}", fullmatch=True).filter(
    lambda s: s not in ("time", "localisation"))
values = st.one_of(
    st.integers(-10**6, 10**6),
    st.builds(Coord, st.integers(-500, 500), st.integers(-500, 500)),
    st.from_regex(r"[a-z_][a-z_]{0,6}", fullmatch=True),
)


@st.composite
def fsfs(draw):
    extra = draw(st.lists(st.tuples(idents, values), max_size=5, unique_by=lambda p: p[0]))
    loc = draw(st.tuples(st.integers(-100, 100), st.integers(-100, 100)))
    t = draw(st.integers(0, 10**5))
    sel = Selector(draw(st.sampled_from(list(SelectorType))), draw(st.integers(0, 10**6)))
    pairs = list(extra) + [("localisation", Coord(*loc)), ("time", t)]
    order = draw(st.permutations(range(len(pairs))))
    return FSF(sel, tuple(pairs[i] for i in order))


@settings(max_examples=300)
@given(fsfs())
def test_parse_inverts_serialize(f):
    assert parse_fsf(serialize_fsf(f)) == f
    assert fsf_from_json(fsf_to_json(f)) == f


# -- polarity and proximity ---------------------------------------------------

def test_polarity_table():
    assert semantic_polarity(F, B) == -1
    assert semantic_polarity(B, F) == -1
    assert semantic_polarity(F, F) == 1
    assert semantic_polarity(B, B) == 1
    assert semantic_polarity(SelectorType.BUILDING, SelectorType.ROAD) == 0


def test_polarity_table_symmetric_for_all_pairs():
    table = PolarityTable.default()
    for a, b in itertools.product(SelectorType, repeat=2):
        assert table(a, b) == table(b, a)


def test_polarity_table_rejects_asymmetric_entries():
    with pytest.raises(ValueError):
        PolarityTable({(F, B): -1, (B, F): 1})


def fact(kind, x, y, t, ident=0):
    return make_fsf(Selector(kind, ident), (), (x, y), t)


def test_proximity_examples():
    assert proximity(fact(F, 3, 3, 4), fact(F, 3, 3, 4, 1)) == 1.0
    assert proximity(fact(F, 20, 25, 7), fact(B, 22, 25, 7)) == pytest.approx(-0.8, abs=1e-9)
    assert proximity(fact(F, 0, 0, 0), fact(B, 10, 0, 0)) == 0.0
    assert proximity(fact(F, 0, 0, 0), fact(B, 0, 0, 5)) == 0.0
    assert proximity(fact(SelectorType.BUILDING, 0, 0, 0), fact(SelectorType.ROAD, 0, 0, 0)) == 0.0


def test_proximity_config_validation():
    with pytest.raises(ValueError):
        ProximityConfig(d_max=0)
    with pytest.raises(ValueError):
        ProximityConfig(link_threshold=1.0)

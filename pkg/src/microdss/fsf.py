"""Factual Semantic Features: data model, textual grammar, and proximity.

An FSF is one observation of a fact, written as::

    (fire#14, fieriness, 1, inDangerNeighbours, 3, burningNeighbours, 2, localisation, 20|25, time, 7)

i.e. ``'(' selector (',' qualifier ',' value)+ ')'``. Every FSF must carry
exactly one ``time`` and one ``localisation`` qualifier.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Union

TIME = "time"
LOCALISATION = "localisation"

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_INT = re.compile(r"-?[0-9]+\Z")
_COORD = re.compile(r"(-?[0-9]+)\|(-?[0-9]+)\Z")
_SELECTOR = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)#([0-9]+)\Z")


class FSFError(ValueError):
    """Base class for FSF parse/validation failures."""


class MalformedSyntax(FSFError):
    pass


class UnknownSelectorType(FSFError):
    pass


class MissingRequiredQualifier(FSFError):
    def __init__(self, qualifier: str):
        super().__init__(f"missing required qualifier {qualifier!r}")
        self.qualifier = qualifier


class DuplicateQualifier(FSFError):
    def __init__(self, qualifier: str):
        super().__init__(f"duplicate qualifier {qualifier!r}")
        self.qualifier = qualifier


class SelectorType(str, enum.Enum):
    FIRE = "fire"
    FIRE_BRIGADE = "fireBrigade"
    BUILDING = "building"
    ROAD = "road"

    @classmethod
    def from_name(cls, name: str) -> "SelectorType":
        try:
            return cls(name)
        except ValueError:
            raise UnknownSelectorType(f"unknown selector type {name!r}") from None


class Coord(NamedTuple):
    x: int
    y: int

    def __str__(self) -> str:
        return f"{self.x}|{self.y}"


Value = Union[int, Coord, str]


@dataclass(frozen=True, order=True)
class Selector:
    type: SelectorType
    id: int

    def __post_init__(self):
        if self.id < 0:
            raise ValueError(f"selector id must be >= 0, got {self.id}")

    def __str__(self) -> str:
        return f"{self.type.value}#{self.id}"

    @classmethod
    def parse(cls, text: str) -> "Selector":
        m = _SELECTOR.match(text)
        if m is None:
            raise MalformedSyntax(f"bad selector {text!r}")
        return cls(SelectorType.from_name(m.group(1)), int(m.group(2)))


@dataclass(frozen=True)
class FSF:
    """One factual semantic feature.

    ``pairs`` keeps every qualifier in its original order, including ``time``
    and ``localisation``; :attr:`time` and :attr:`location` are views on them.
    """

    selector: Selector
    pairs: tuple[tuple[str, Value], ...]
    time: int = field(init=False, compare=False)
    location: Coord = field(init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((q, v) for q, v in self.pairs))
        seen: set[str] = set()
        for q, v in self.pairs:
            if not _IDENT.match(q):
                raise MalformedSyntax(f"bad qualifier name {q!r}")
            if q in seen:
                raise DuplicateQualifier(q)
            seen.add(q)
            if isinstance(v, bool) or not isinstance(v, (int, Coord, str)):
                raise MalformedSyntax(f"bad value for {q!r}: {v!r}")
        for required in (LOCALISATION, TIME):
            if required not in seen:
                raise MissingRequiredQualifier(required)
        values = dict(self.pairs)
        t, loc = values[TIME], values[LOCALISATION]
        if isinstance(t, Coord) or not isinstance(t, int) or t < 0:
            raise MalformedSyntax(f"time must be a nonnegative integer, got {t!r}")
        if not isinstance(loc, Coord):
            raise MalformedSyntax(f"localisation must be a coordinate, got {loc!r}")
        object.__setattr__(self, "time", t)
        object.__setattr__(self, "location", loc)

    def get(self, qualifier: str, default: Value | None = None) -> Value | None:
        for q, v in self.pairs:
            if q == qualifier:
                return v
        return default

    def int_value(self, qualifier: str) -> int:
        """Integer value of ``qualifier``, 0 when absent or non-integer."""
        v = self.get(qualifier)
        return v if isinstance(v, int) and not isinstance(v, Coord) else 0

    @property
    def extra_pairs(self) -> tuple[tuple[str, Value], ...]:
        return tuple(p for p in self.pairs if p[0] not in (TIME, LOCALISATION))

    def __str__(self) -> str:
        return serialize_fsf(self)


def make_fsf(selector: Selector, pairs, location: tuple[int, int], time: int) -> FSF:
    """Build an FSF from extra qualifier pairs plus location and time (appended last)."""
    return FSF(selector, (*pairs, (LOCALISATION, Coord(*location)), (TIME, time)))


def _parse_value(token: str) -> Value:
    m = _COORD.match(token)
    if m:
        return Coord(int(m.group(1)), int(m.group(2)))
    if "|" in token:
        raise MalformedSyntax(f"bad coordinate {token!r}")
    if _INT.match(token):
        return int(token)
    if not token or any(c in token for c in "(),#") or any(c.isspace() for c in token):
        raise MalformedSyntax(f"bad value {token!r}")
    return token


def _tokens(body: str) -> Iterator[str]:
    for raw in body.split(","):
        tok = raw.strip()
        if not tok:
            raise MalformedSyntax("empty field")
        yield tok


def parse_fsf(text: str) -> FSF:
    """Parse one textual FSF. Whitespace around fields is ignored."""
    if "\n" in text.strip("\r\n"):
        raise MalformedSyntax("FSF must fit on one line")
    s = text.strip()
    if not (s.startswith("(") and s.endswith(")")):
        raise MalformedSyntax("FSF must be enclosed in parentheses")
    body = s[1:-1]
    if "(" in body or ")" in body:
        raise MalformedSyntax("unbalanced parentheses")
    fields = list(_tokens(body))
    selector = Selector.parse(fields[0])
    rest = fields[1:]
    if not rest or len(rest) % 2:
        raise MalformedSyntax(f"expected qualifier/value pairs, got {len(rest)} fields")
    pairs = []
    for q, v in zip(rest[::2], rest[1::2]):
        if not _IDENT.match(q):
            raise MalformedSyntax(f"bad qualifier name {q!r}")
        pairs.append((q, _parse_value(v)))
    return FSF(selector, tuple(pairs))


def serialize_fsf(fsf: FSF) -> str:
    parts = [str(fsf.selector)]
    for q, v in fsf.pairs:
        parts.append(q)
        parts.append(str(v))
    return "(" + ", ".join(parts) + ")"


# -- JSON Lines form ---------------------------------------------------------

def _value_to_json(v: Value):
    if isinstance(v, Coord):
        return {"x": v.x, "y": v.y}
    return v


def _value_from_json(v) -> Value:
    if isinstance(v, dict):
        try:
            return Coord(int(v["x"]), int(v["y"]))
        except (KeyError, TypeError, ValueError):
            raise MalformedSyntax(f"bad coordinate object {v!r}") from None
    if isinstance(v, bool) or not isinstance(v, (int, str)):
        raise MalformedSyntax(f"bad value {v!r}")
    if isinstance(v, str):
        return _parse_value(v)
    return v


def fsf_to_json(fsf: FSF) -> dict:
    return {
        "selector": {"type": fsf.selector.type.value, "id": fsf.selector.id},
        "pairs": [[q, _value_to_json(v)] for q, v in fsf.pairs],
        "time": fsf.time,
        "location": {"x": fsf.location.x, "y": fsf.location.y},
    }


def fsf_from_json(obj) -> FSF:
    if isinstance(obj, str):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise MalformedSyntax(f"invalid JSON: {exc}") from None
    try:
        sel = obj["selector"]
        if not isinstance(sel["id"], int) or isinstance(sel["id"], bool) or sel["id"] < 0:
            raise MalformedSyntax(f"bad selector id {sel['id']!r}")
        selector = Selector(SelectorType.from_name(sel["type"]), sel["id"])
        pairs = []
        for item in obj["pairs"]:
            if isinstance(item, dict):
                q, v = item["qualifier"], item["value"]
            else:
                q, v = item
            if not isinstance(q, str):
                raise MalformedSyntax(f"bad qualifier {q!r}")
            pairs.append((q, _value_from_json(v)))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FSFError):
            raise
        raise MalformedSyntax(f"bad FSF object: {exc}") from None
    fsf = FSF(selector, tuple(pairs))
    if "time" in obj and obj["time"] != fsf.time:
        raise MalformedSyntax("top-level time disagrees with time qualifier")
    if "location" in obj and _value_from_json(obj["location"]) != fsf.location:
        raise MalformedSyntax("top-level location disagrees with localisation qualifier")
    return fsf


def parse_line(line: str) -> FSF:
    """Parse one log line in either textual or JSON form."""
    s = line.strip()
    if s.startswith("{"):
        return fsf_from_json(s)
    return parse_fsf(s)


# -- semantic polarity and proximity ------------------------------------------

class PolarityTable:
    """Symmetric (type, type) -> {-1, 0, +1} lookup; absent pairs are neutral."""

    def __init__(self, entries: dict[tuple[SelectorType, SelectorType], int] | None = None):
        self._entries: dict[frozenset, int] = {}
        for (a, b), p in (entries or {}).items():
            if p not in (-1, 0, 1):
                raise ValueError(f"polarity must be -1, 0 or +1, got {p}")
            key = frozenset((a, b))
            if key in self._entries and self._entries[key] != p:
                raise ValueError(f"asymmetric entries for {a}/{b}")
            self._entries[key] = p

    def __call__(self, a: SelectorType, b: SelectorType) -> int:
        return self._entries.get(frozenset((a, b)), 0)

    @classmethod
    def default(cls) -> "PolarityTable":
        F, B = SelectorType.FIRE, SelectorType.FIRE_BRIGADE
        return cls({(F, B): -1, (F, F): 1, (B, B): 1})


DEFAULT_POLARITY = PolarityTable.default()


def semantic_polarity(a: SelectorType, b: SelectorType, table: PolarityTable = DEFAULT_POLARITY) -> int:
    return table(a, b)


@dataclass(frozen=True)
class ProximityConfig:
    d_max: float = 10.0
    t_max: float = 5.0
    link_threshold: float = 0.1

    def __post_init__(self):
        if not self.d_max > 0 or not self.t_max > 0:
            raise ValueError("d_max and t_max must be positive")
        if not 0 <= self.link_threshold < 1:
            raise ValueError("link_threshold must lie in [0, 1)")


def chebyshev(a: tuple[int, int], b: tuple[int, int]) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def proximity(a: FSF, b: FSF, table: PolarityTable = DEFAULT_POLARITY,
              cfg: ProximityConfig = ProximityConfig()) -> float:
    """Signed closeness of two facts in [-1, 1].

    polarity * spatial ramp * temporal ramp, each ramp falling linearly from 1
    to 0 at its horizon.
    """
    pol = table(a.selector.type, b.selector.type)
    if pol == 0:
        return 0.0
    spatial = max(0.0, 1.0 - chebyshev(a.location, b.location) / cfg.d_max)
    temporal = max(0.0, 1.0 - abs(a.time - b.time) / cfg.t_max)
    return pol * spatial * temporal

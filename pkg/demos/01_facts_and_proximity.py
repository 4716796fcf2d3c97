"""Parse a few factual semantic features and look at how they relate.

A fire and a brigade two cells apart at the same time are strongly opposed;
two fires nearby reinforce each other; a road is neutral to everything.
"""

from microdss.fsf import DEFAULT_POLARITY, ProximityConfig, parse_fsf, proximity, serialize_fsf

lines = [
    "(fire#14, fieriness, 1, inDangerNeighbours, 3, burningNeighbours, 2, localisation, 20|25, time, 7)",
    "(fireBrigade#1, water, 80, localisation, 22|25, time, 7)",
    "(fire#15, fieriness, 2, localisation, 24|27, time, 6)",
    "(road#3, localisation, 21|25, time, 7)",
]
facts = [parse_fsf(line) for line in lines]
for f in facts:
    print(serialize_fsf(f))

cfg = ProximityConfig()
print()
for i, a in enumerate(facts):
    for b in facts[i + 1:]:
        p = proximity(a, b, DEFAULT_POLARITY, cfg)
        print(f"{a.selector} ~ {b.selector}: {p:+.3f}")

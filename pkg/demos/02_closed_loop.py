"""Run the cluster scenario under each policy and compare the damage.

Uses the in-memory loop rather than the file-writing driver so the whole
trajectory can be inspected.
"""

from microdss.driver import ClosedLoop, default_casebase, scenario_path
from microdss.sim import World, burned_metrics, load_scenario

CYCLES = 30

for policy in ("none", "baseline", "dss"):
    world = World(load_scenario(scenario_path("cluster.json")), seed=1)
    loop = ClosedLoop(world, policy, casebase=default_casebase() if policy == "dss" else None)
    engaged_at = None
    for _ in range(CYCLES):
        result = loop.step()
        if engaged_at is None and any(f.tag.value == "ENGAGEMENT" for f in result.report.facts):
            engaged_at = result.cycle
    loop.finish()
    print(f"{policy:9s} {burned_metrics(loop.world)}  first engagement at cycle {engaged_at}")

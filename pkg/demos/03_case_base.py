"""Retrieve from the seeded case base and watch a weight move after feedback."""

from microdss.driver import capture_signature, default_casebase
from microdss.prediction import outcome_score, retrieve, update_weight

base = default_casebase()
query = capture_signature("scattered.json", cycle=8)
for case, sim in retrieve(base, query, k=4):
    print(f"case {case.case_id} {case.template.value:17s} sim={sim:.3f} weight={case.weight:.2f}")

best = retrieve(base, query, k=1)[0][0]
score = outcome_score(6, 2)  # burning before, burning after
print(f"\noutcome {score:.2f}: weight {best.weight:.3f} -> {update_weight(best, score):.3f}")

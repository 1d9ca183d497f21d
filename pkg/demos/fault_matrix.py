"""
Which oracle sees which fault
=============================

Every registered fault comes with a small scenario. We run both oracles on
it: checkified execution and direct containment of concrete traces. Faults
in the run-time check library are only visible to the first one.
"""

from checkify import faults
from checkify.scenarios import SCENARIOS, detected

print(f"{'fault':26} {'class':5} {'anatest':8} {'containment':11} expected")
for fid, sc in sorted(SCENARIOS.items()):
    f = faults.get(fid)
    a = detected(sc, "anatest")
    c = detected(sc, "containment")
    print(f"{fid:26} {f.cls:5} {'yes' if a else 'no':8} {'yes' if c else 'no':11} {f.expected_detection}")

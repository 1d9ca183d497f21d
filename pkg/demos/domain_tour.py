"""
The same program under every abstract domain
============================================

Each domain produces different annotations for prepend. All of them should
survive a thousand random executions.
"""

from checkify.analyzer import analyze, annotate
from checkify.checkification import CheckifyConfig, anatest
from checkify.scenarios import load
from checkify.writer import print_program

program = load("prepend.mlp")

for domain in ["modes", "sharing", "shfr", "share_clique", "depthk"]:
    print(f"%% ---- {domain}")
    print(print_program(annotate(analyze(program, domain))))
    print("%", anatest(program, CheckifyConfig(domain=domain, max_cases=1000, seed=0)))
    print()

# collapsing versions hides what each call site was promised
program = load("two_callers.mlp")
graph = analyze(program, "modes")
print(print_program(annotate(graph, materialize_versions=False)))
print(print_program(annotate(graph, materialize_versions=True)))

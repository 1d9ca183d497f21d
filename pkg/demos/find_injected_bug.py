"""
Catching a broken analyzer with its own output
==============================================

We analyze list prepend with a modes domain that forgets aliasing, print
the annotated program, and then run the annotations as checks on random
inputs until one of them fails.
"""

from checkify import faults
from checkify.analyzer import analyze, annotate
from checkify.checkification import CheckifyConfig, anatest
from checkify.scenarios import corpus_text, load
from checkify.writer import print_program

print(corpus_text("prepend.mlp"))

program = load("prepend.mlp")

# the healthy analyzer first
print(print_program(annotate(analyze(program, "modes"))))

# now with the aliasing bug: note the claim about Ys after the recursive call
with faults.injected("modes_aliasing_blind"):
    print(print_program(annotate(analyze(program, "modes"))))
    verdict = anatest(program, CheckifyConfig(domain="modes", seed=7), file="prepend.mlp")

print(verdict)
print("failing input:", verdict.input)
print("shrunk to:    ", verdict.shrunk_input)

"""One small program per seeded fault, chosen so the fault shows up quickly.

A scenario names the program, the domain and the generator seed.  Detection
either runs the full checkification pipeline (``anatest``) or traces generated
inputs against the analysis directly (``containment``).
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from . import faults
from .analyzer import analyze
from .checkification import (AnalysisFailed, CheckifyConfig, Error, anatest, containment_check,
                             goal_specs, input_stream)
from .domains.base import DomainError
from .reader import parse_program


def corpus_text(name):
    """Source of a bundled corpus program, e.g. ``"bench/qsort.mlp"``."""
    return resources.files("checkify").joinpath("corpus", name).read_text()


def corpus_names(subdir="bench"):
    d = resources.files("checkify").joinpath("corpus", subdir)
    return sorted(f"{subdir}/{p.name}" for p in d.iterdir() if p.name.endswith(".mlp"))


def load(name):
    return parse_program(corpus_text(name), file=name)


@dataclass(frozen=True)
class Scenario:
    fault: str
    program: str
    domain: str
    seed: int = 1
    max_cases: int = 200

    def config(self, **kw):
        opts = dict(domain=self.domain, seed=self.seed, max_cases=self.max_cases)
        opts.update(kw)
        return CheckifyConfig(**opts)


SCENARIOS = {s.fault: s for s in (
    Scenario("modes_aliasing_blind", "prepend.mlp", "modes"),
    Scenario("length_missing_nondet", "faults/length_free.mlp", "modes"),
    Scenario("neq_builtin_wrong", "faults/neq.mlp", "modes"),
    Scenario("spurious_ground_vars", "faults/fresh_output.mlp", "sharing"),
    Scenario("fixpoint_cut_deadcode", "faults/max.mlp", "modes"),
    Scenario("linear_as_disjoint", "faults/shared_linear.mlp", "shfr"),
    Scenario("mshare_order_sensitive", "faults/alias_order.mlp", "sharing"),
    Scenario("clique_rt_missing", "faults/wide.mlp", "share_clique"),
    Scenario("mshare_ignores_clique", "faults/wide.mlp", "share_clique"),
    Scenario("instance_rt_missing", "faults/wrap.mlp", "depthk"),
    Scenario("depthk_glb_not_greatest", "faults/two_views.mlp", "depthk"),
    Scenario("trust_exp_int", "faults/power.mlp", "modes"),
)}


def run_anatest(sc, inject=True, **config):
    """Verdict of the pipeline on the scenario, with its fault enabled if ``inject``."""
    program = load(sc.program)
    ids = (sc.fault,) if inject else ()
    with faults.injected(*ids):
        return anatest(program, sc.config(**config), file=sc.program)


def run_containment(sc, inject=True, n_inputs=None):
    """Violations found by tracing generated inputs against the analysis."""
    program = load(sc.program)
    cfg = sc.config()
    ids = (sc.fault,) if inject else ()
    with faults.injected(*ids):
        try:
            graph = analyze(program, cfg.domain, k=cfg.k)
        except DomainError:
            return []
        specs = goal_specs(program, cfg.universe)
        stream = input_stream(specs, cfg)
        goals = []
        for _, goal in stream:
            goals.append(goal)
            if len(goals) >= (n_inputs or sc.max_cases):
                break
        return containment_check(program, graph, goals, cfg.budget, cfg.materialize_versions)


def detected(sc, method, inject=True):
    if method == "anatest":
        return isinstance(run_anatest(sc, inject), (Error, AnalysisFailed))
    return bool(run_containment(sc, inject))

"""Registry of seeded, switchable bugs.

Each fault reproduces a known class of analyzer or run-time-check defect.
Pipeline code asks :func:`active` at the exact site where the defect lives;
with no fault enabled every site takes the correct path.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass


class UnknownFault(KeyError):
    pass


@dataclass(frozen=True)
class Fault:
    id: str
    cls: str  # I domain, II fixpoint, III semantic mismatch, IV run-time check, V trust/library
    description: str
    expected_detection: str  # anatest | containment | both


REGISTRY = {f.id: f for f in (
    Fault("modes_aliasing_blind", "I",
          "modes unification ignores aliasing: binding a variable does not update "
          "the variables sharing with it",
          "both"),
    Fault("length_missing_nondet", "I",
          "length/2 library row for (?,?) calls is missing, so free-list calls become unreachable",
          "both"),
    Fault("neq_builtin_wrong", "I",
          "\\=/2 transfer function marks both arguments ground",
          "both"),
    Fault("spurious_ground_vars", "I",
          "property translation lists a fresh variable inside ground/1",
          "anatest"),
    Fault("fixpoint_cut_deadcode", "II",
          "clauses after a clause containing a cut are treated as dead code",
          "both"),
    Fault("linear_as_disjoint", "III",
          "run-time linear/1 also demands pairwise disjointness of the terms",
          "anatest"),
    Fault("mshare_order_sensitive", "IV",
          "run-time mshare/1 compares sharing groups as ordered lists",
          "anatest"),
    Fault("clique_rt_missing", "IV",
          "clique/1 has no run-time implementation",
          "anatest"),
    Fault("mshare_ignores_clique", "IV",
          "run-time mshare/1 ignores clique/1 conjuncts of the same check",
          "anatest"),
    Fault("instance_rt_missing", "IV",
          "instance/2 has no run-time implementation",
          "anatest"),
    Fault("depthk_glb_not_greatest", "I",
          "depth-k glb fills wildcard leaves with [] instead of keeping the other pattern",
          "both"),
    Fault("trust_exp_int", "V",
          "library trust for is/2 claims ** returns an integer",
          "anatest"),
)}

# Faults that touch the same site and cannot be combined meaningfully.
INCOMPATIBLE = {frozenset({"mshare_order_sensitive", "mshare_ignores_clique"})}

_active: frozenset = frozenset()


def get(fid):
    try:
        return REGISTRY[fid]
    except KeyError:
        raise UnknownFault(fid) from None


def active(fid):
    return fid in _active


def enabled():
    return _active


def _check_compatible(ids):
    for pair in INCOMPATIBLE:
        if pair <= ids:
            raise ValueError(f"faults {sorted(pair)} cannot be enabled together")


def enable(fid):
    global _active
    get(fid)
    new = _active | {fid}
    _check_compatible(new)
    _active = new
    return _active


def disable(fid):
    global _active
    get(fid)
    _active = _active - {fid}
    return _active


def reset():
    global _active
    _active = frozenset()


@contextmanager
def injected(*ids):
    """Enable ``ids`` for the duration of the block, restoring the previous set after."""
    global _active
    for fid in ids:
        get(fid)
    saved = _active
    new = saved | set(ids)
    _check_compatible(new)
    _active = frozenset(new)
    try:
        yield
    finally:
        _active = saved


def table():
    """Rows ``(id, class, expected_detection, description)`` in registry order."""
    return [(f.id, f.cls, f.expected_detection, f.description) for f in REGISTRY.values()]

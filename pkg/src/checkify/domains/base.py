"""Interface shared by the abstract domains."""

from __future__ import annotations

from ..terms import Struct, Var, mgu, resolve, term_vars


class DomainError(Exception):
    pass


class Domain:
    """Abstract domain over abstract substitutions (asubs) on program variables.

    Asubs are immutable and hashable; ``vars(a)`` gives their variable tuple.
    Variables added with :meth:`extend` are fresh: free and independent of
    everything else.  Subclasses implement the lattice, abstract unification
    of a solved binding ``x = t`` and the translation to runnable properties.
    """

    name = "base"

    # lattice -------------------------------------------------------------------
    def bottom(self, vars):
        raise NotImplementedError

    def is_bottom(self, a):
        raise NotImplementedError

    def top(self, vars):
        raise NotImplementedError

    def leq(self, a, b):
        raise NotImplementedError

    def lub(self, a, b):
        raise NotImplementedError

    def glb(self, a, b):
        raise NotImplementedError

    def widen(self, old, new):
        return self.lub(old, new)

    def eq(self, a, b):
        return self.leq(a, b) and self.leq(b, a)

    # variables ----------------------------------------------------------------
    def vars(self, a):
        raise NotImplementedError

    def extend(self, a, vars):
        raise NotImplementedError

    def extend_unknown(self, a, vars):
        """Add variables bound to unknown terms built from fresh run-time variables."""
        raise NotImplementedError

    def project(self, a, vars):
        raise NotImplementedError

    def rename(self, a, mapping):
        raise NotImplementedError

    def combine(self, a, b):
        """Conjunction of asubs over disjoint variable sets with independent bindings."""
        raise NotImplementedError

    # transfer -------------------------------------------------------------------
    def amgu(self, a, x, t):
        """Abstract unification of the solved equation ``x = t`` (x not in t)."""
        raise NotImplementedError

    def unify(self, a, t1, t2):
        if self.is_bottom(a):
            return a
        sol = mgu(t1, t2)
        if sol is None:
            return self.bottom(self.vars(a))
        for x in list(sol):
            t = resolve(x, sol)
            if t == x:
                continue
            a = self.amgu(a, x, t)
            if self.is_bottom(a):
                return a
        return a

    def split(self, a):
        return [a]

    def builtin(self, a, key, args):
        """Domain-specific builtin transfer; NotImplemented falls back to the library."""
        return NotImplemented

    def subterm(self, a, t, s):
        """Constrain fresh variable ``s`` (already in ``a``) to be a subterm of ``t``."""
        raise NotImplementedError

    # properties -----------------------------------------------------------------
    def from_properties(self, vars, props):
        """Most precise asub over ``vars`` implied by ``props`` (unknown ones ignored)."""
        raise NotImplementedError

    def entails(self, a, props):
        """True when every concretization of ``a`` satisfies ``props``."""
        if self.is_bottom(a):
            return True
        if not all(self.expresses(p) for p in props):
            return False
        return self.leq(a, self.from_properties(self.vars(a), props))

    def restrict(self, a, props):
        """Meet of ``a`` with what ``props`` say about its variables."""
        return self.glb(a, self.from_properties(self.vars(a), props))

    def expresses(self, p):
        """Whether property ``p`` can be decided from an asub of this domain."""
        return False

    def to_properties(self, a):
        raise NotImplementedError

    def gamma_member(self, binding, a):
        raise NotImplementedError

    def alpha(self, binding, vars):
        """Abstraction of a single concrete binding ``{var: term}`` over ``vars``."""
        raise NotImplementedError

    def key(self, a):
        """Hashable canonical form; asubs are already canonical by default."""
        return a


def prop_arg_var(p):
    """The single variable a unary property talks about, or None."""
    if isinstance(p, Struct) and len(p.args) >= 1 and isinstance(p.args[-1], Var):
        return p.args[-1]
    return None


def vars_of(t):
    return term_vars(t)

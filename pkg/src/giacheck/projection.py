"""Projection of g-choreographies onto participants and τ-stripping.

Removability of τ-transitions
-----------------------------
A τ-step ``v -τ-> w`` is removable when collapsing ``v`` and ``w`` neither
changes the language of the automaton nor the choices offered at ``v``.  The
rule used here, evaluated on the quotient built so far and iterated to a
fixpoint:

R1. ``v`` has no other outgoing transition.  Collapsing is always safe.

R2. ``w`` has no other incoming transition, ``w`` is not a sink, and the
    first communication actions reachable from ``v`` through τ-steps are all
    outputs or all inputs.  A choice among outputs only is the participant's
    own decision, and a choice among inputs only is decided by whoever sends,
    so the τ carries no information.  The in-degree guard keeps the language
    unchanged: nothing but ``v`` can reach ``w``, so giving ``v`` the moves of
    ``w`` adds no words.  A sink ``w`` is excluded because merging would turn
    the end of a run into a state that can still move.

Anything else is kept.  In particular a τ running parallel to a
communication towards the same state (the "this branch does not concern me"
edge) has a target with two incoming edges and stays.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Hashable

from .actions import TAU, inp, out
from .gchor import Branch, Empty, GChor, Interaction, Par, Seq
from .gia import (
    Gia,
    Transition,
    complete_words,
    interleave,
    state_key,
    tag,
    transition_key,
    union,
)


@dataclass(frozen=True)
class ProjectionTriple:
    automaton: Gia
    initial: Hashable
    connecting: Hashable


def _edge(a: str, label) -> ProjectionTriple:
    g = Gia.build("v0", {a}, [("v0", label, "ve")])
    return ProjectionTriple(g, "v0", "ve")


def project(g: GChor, a: str) -> ProjectionTriple:
    """Projection of ``g`` on participant ``a``."""
    if isinstance(g, Empty):
        return _edge(a, TAU)
    if isinstance(g, Interaction):
        if g.sender == a:
            return _edge(a, out(g.sender, g.receiver, g.message))
        if g.receiver == a:
            return _edge(a, inp(g.sender, g.receiver, g.message))
        return _edge(a, TAU)
    if isinstance(g, (Seq, Branch)):
        (left, right), initial, connecting = glued_parts(g, a)
        return ProjectionTriple(union(left, right), initial, connecting)
    if isinstance(g, Par):
        s1, s2 = strip_projection(project(g.left, a)), strip_projection(project(g.right, a))
        i1, i2 = tag(s1.automaton, 1), tag(s2.automaton, 2)
        both = interleave(i1, i2)
        if len(both.states) == 1:
            # neither thread concerns ``a``: keep initial and connecting
            # states apart, like the projection of 0
            return _edge(a, TAU)
        return ProjectionTriple(both, both.initial, ((s1.connecting, 1), (s2.connecting, 2)))
    raise TypeError(f"not a choreography: {g!r}")


def glued_parts(g: Seq | Branch, a: str):
    """Tagged projections of both operands with their glue points identified.

    A sequence identifies the first connecting state with the second initial
    state; a choice identifies the two initial states and the two connecting
    states.  When an operand's initial and connecting states coincide the
    identifications chain, so they are resolved as a union of classes.
    """
    p1, p2 = project(g.left, a), project(g.right, a)
    i1, v0, ve = tag(p1.automaton, 1), (p1.initial, 1), (p1.connecting, 1)
    i2, u0, ue = tag(p2.automaton, 2), (p2.initial, 2), (p2.connecting, 2)
    if isinstance(g, Seq):
        glue = [(ve, (ve, u0))]
    else:
        glue = [(v0, (v0, u0)), (ue, (ve, ue))]
    parent: dict = {}

    def find(x):
        while parent.get(x, x) != x:
            x = parent[x]
        return x

    for _, (x, y) in glue:
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[ry] = rx
    names: dict = {}
    for name, (x, _) in glue:
        names.setdefault(find(x), name)

    def rename(s):
        return names.get(find(s), s)

    def apply(i: Gia) -> Gia:
        return Gia(
            frozenset(rename(s) for s in i.states),
            rename(i.initial),
            i.group,
            frozenset(Transition(rename(t.source), t.label, rename(t.target)) for t in i.transitions),
        )

    return (apply(i1), apply(i2)), rename(v0), rename(ue)


class _Quotient:
    """Union-find over states with the induced quotient transition relation."""

    def __init__(self, g: Gia):
        self.g = g
        self.parent = {s: s for s in g.states}

    def find(self, s):
        while self.parent[s] != s:
            self.parent[s] = self.parent[self.parent[s]]
            s = self.parent[s]
        return s

    def merge(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the smaller representative for determinism
            if state_key(rb) < state_key(ra):
                ra, rb = rb, ra
            self.parent[rb] = ra

    def edges(self):
        """Quotient transitions without self-loops, sorted."""
        seen = set()
        for t in self.g.transitions:
            q = Transition(self.find(t.source), t.label, self.find(t.target))
            if q.source != q.target:
                seen.add(q)
        return sorted(seen, key=transition_key)


def _first_actions(src, outs) -> set:
    """Communication labels on the first non-τ step from ``src`` via τ-steps."""
    found, seen, stack = set(), {src}, [src]
    while stack:
        s = stack.pop()
        for t in outs.get(s, ()):
            if t.label is TAU:
                if t.target not in seen:
                    seen.add(t.target)
                    stack.append(t.target)
            else:
                found.add(t.label)
    return found


def _same_polarity(labels) -> bool:
    return bool(labels) and (all(x.is_output for x in labels) or all(x.is_input for x in labels))


@lru_cache(maxsize=4096)
def _classes(g: Gia) -> dict:
    q = _Quotient(g)
    changed = True
    while changed:
        changed = False
        edges = q.edges()
        outs, ins = {}, {}
        for t in edges:
            outs.setdefault(t.source, []).append(t)
            ins.setdefault(t.target, []).append(t)
        for t in edges:
            if t.label is not TAU:
                continue
            if len(outs[t.source]) == 1:
                q.merge(t.source, t.target)
                changed = True
                break
            if (
                len(ins[t.target]) == 1
                and outs.get(t.target)
                and _same_polarity(_first_actions(t.source, outs))
            ):
                q.merge(t.source, t.target)
                changed = True
                break
    return {s: q.find(s) for s in g.states}


def removable_tau(g: Gia, t: Transition) -> bool:
    """Whether the τ-transition ``t`` collapses under the removability rule."""
    if t.label is not TAU:
        raise ValueError(f"transition {t} is not a τ-transition")
    if t not in g.transitions:
        raise ValueError(f"transition {t} does not belong to the automaton")
    rep = _classes(g)
    return rep[t.source] == rep[t.target]


def tau_classes(g: Gia) -> list[frozenset]:
    """Partition of the states into τ-equivalence classes, deterministically ordered."""
    rep = _classes(g)
    groups: dict = {}
    for s, r in rep.items():
        groups.setdefault(r, set()).add(s)
    classes = [frozenset(c) for c in groups.values()]
    return sorted(classes, key=state_key)


def strip_tau(g: Gia) -> Gia:
    """Quotient of ``g`` by its τ-classes; states are frozensets of original states."""
    classes = tau_classes(g)
    cls = {s: c for c in classes for s in c}
    transitions = set()
    for t in g.transitions:
        a, b = cls[t.source], cls[t.target]
        if a == b and t.label is TAU:
            continue
        transitions.add(Transition(a, t.label, b))
    return Gia(frozenset(classes), cls[g.initial], g.group, frozenset(transitions))


def class_of(g: Gia, s) -> frozenset:
    for c in tau_classes(g):
        if s in c:
            return c
    raise KeyError(s)


def strip_projection(p: ProjectionTriple) -> ProjectionTriple:
    stripped = strip_tau(p.automaton)
    return ProjectionTriple(stripped, stripped.initial, class_of(p.automaton, p.connecting))


def language_equivalent(g1: Gia, g2: Gia) -> bool:
    """Same complete words (initial to a sink, τ erased)."""
    return complete_words(g1) == complete_words(g2)


def stripped_projection(g: GChor, a: str) -> Gia:
    return strip_tau(project(g, a).automaton)

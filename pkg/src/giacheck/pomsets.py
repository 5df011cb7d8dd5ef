"""Pomset semantics of g-choreographies and the well-formedness oracle.

A choreography is well-formed exactly when :func:`semantics` returns a
:class:`Defined` result: every parallel composition is well-forked and every
choice is well-branched.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Union

import networkx as nx
from networkx.algorithms.isomorphism import DiGraphMatcher

from .actions import ActionLabel, inp, out
from .gchor import Branch, Empty, GChor, Interaction, Par, Seq, participants, render_gchor


@dataclass(frozen=True)
class Pomset:
    """A labelled partial order on events ``0 .. n-1``.

    ``order`` holds the strict order as a transitively closed set of pairs.
    Equality of the dataclass is structural; use :func:`pomset_isomorphic`
    for equality of pomsets.
    """

    labels: tuple[ActionLabel, ...]
    order: frozenset[tuple[int, int]]

    @classmethod
    def build(cls, labels: Iterable[ActionLabel], edges: Iterable[tuple[int, int]]) -> "Pomset":
        labels = tuple(labels)
        return cls(labels, _closure(len(labels), edges))

    @property
    def events(self) -> range:
        return range(len(self.labels))

    def __len__(self):
        return len(self.labels)

    def leq(self, e: int, f: int) -> bool:
        return e == f or (e, f) in self.order

    def covering_edges(self) -> list[tuple[int, int]]:
        """Hasse diagram of the order."""
        return sorted(
            (e, f)
            for (e, f) in self.order
            if not any((e, g) in self.order and (g, f) in self.order for g in self.events)
        )

    def label_set(self) -> frozenset[ActionLabel]:
        return frozenset(self.labels)

    def __str__(self):
        parts = [f"{e}:{lab}" for e, lab in enumerate(self.labels)]
        edges = [f"{e}<{f}" for e, f in self.covering_edges()]
        return "[" + ", ".join(parts) + (" | " + ", ".join(edges) if edges else "") + "]"


def _closure(n: int, edges: Iterable[tuple[int, int]]) -> frozenset[tuple[int, int]]:
    succ = [set() for _ in range(n)]
    for e, f in edges:
        if e != f:
            succ[e].add(f)
    closed = set()
    for e in range(n):
        stack = list(succ[e])
        seen = set()
        while stack:
            f = stack.pop()
            if f in seen:
                continue
            seen.add(f)
            stack.extend(succ[f])
        if e in seen:
            raise ValueError("order relation has a cycle")
        closed.update((e, f) for f in seen)
    return frozenset(closed)


EMPTY_POMSET = Pomset((), frozenset())


def interaction_pomset(a: str, m: str, b: str) -> Pomset:
    if a == b:
        raise ValueError(f"interaction {a}->{b}:{m} needs distinct participants")
    return Pomset.build((out(a, b, m), inp(a, b, m)), [(0, 1)])


def seq_pomset(r: Pomset, r2: Pomset) -> Pomset:
    """Sequential composition: same-subject events of ``r`` precede those of ``r2``."""
    n = len(r)
    labels = r.labels + r2.labels
    edges = set(r.order)
    edges.update((e + n, f + n) for e, f in r2.order)
    for e, le in enumerate(r.labels):
        for f, lf in enumerate(r2.labels):
            if le.subject == lf.subject:
                edges.add((e, f + n))
    return Pomset.build(labels, edges)


def par_pomset(r: Pomset, r2: Pomset) -> Pomset:
    n = len(r)
    edges = set(r.order) | {(e + n, f + n) for e, f in r2.order}
    return Pomset(r.labels + r2.labels, frozenset(edges))


def well_forked(r: Pomset, r2: Pomset) -> bool:
    """No input label occurs in both pomsets."""
    return not any(x.is_input for x in r.label_set() & r2.label_set())


def project_pomset(r: Pomset, a: str) -> Pomset:
    """Restriction of ``r`` to the events whose subject is ``a``."""
    keep = [e for e in r.events if r.labels[e].subject == a]
    index = {e: i for i, e in enumerate(keep)}
    order = frozenset((index[e], index[f]) for e, f in r.order if e in index and f in index)
    return Pomset(tuple(r.labels[e] for e in keep), order)


def min_events(r: Pomset) -> frozenset[int]:
    later = {f for _, f in r.order}
    return frozenset(e for e in r.events if e not in later)


def _to_graph(r: Pomset) -> nx.DiGraph:
    g = nx.DiGraph()
    for e, lab in enumerate(r.labels):
        g.add_node(e, label=lab)
    g.add_edges_from(r.order)
    return g


def _invariant(r: Pomset) -> tuple:
    ups = [0] * len(r)
    downs = [0] * len(r)
    for e, f in r.order:
        downs[e] += 1
        ups[f] += 1
    return tuple(sorted((lab.sender, lab.receiver, lab.polarity, lab.message, ups[e], downs[e])
                        for e, lab in enumerate(r.labels)))


def pomset_isomorphic(r: Pomset, r2: Pomset) -> bool:
    """Label- and order-preserving bijection between the events of ``r`` and ``r2``."""
    if len(r) != len(r2) or len(r.order) != len(r2.order) or _invariant(r) != _invariant(r2):
        return False
    matcher = DiGraphMatcher(_to_graph(r), _to_graph(r2), node_match=lambda x, y: x["label"] == y["label"])
    return matcher.is_isomorphic()


def dedup_pomsets(pomsets: Iterable[Pomset]) -> tuple[Pomset, ...]:
    """Keep one representative per isomorphism class, first occurrence wins."""
    buckets: dict[tuple, list[Pomset]] = {}
    kept = []
    for r in pomsets:
        bucket = buckets.setdefault(_invariant(r), [])
        if any(pomset_isomorphic(r, q) for q in bucket):
            continue
        bucket.append(r)
        kept.append(r)
    return tuple(kept)


class Violation(str, enum.Enum):
    NOT_WELL_FORKED = "not-well-forked"
    NOT_WELL_BRANCHED = "not-well-branched"


@dataclass(frozen=True)
class Defined:
    pomsets: tuple[Pomset, ...]


@dataclass(frozen=True)
class Bottom:
    """Undefined semantics; ``path`` locates the failing subterm (``L``/``R`` steps)."""

    violation: Violation
    path: str
    subterm: GChor
    detail: str = ""

    def __str__(self):
        where = self.path or "<root>"
        msg = f"{self.violation.value} at {where}: {render_gchor(self.subterm)}"
        return f"{msg} ({self.detail})" if self.detail else msg


SemanticsResult = Union[Defined, Bottom]


class Role(str, enum.Enum):
    ACTIVE = "active"
    PASSIVE = "passive"
    NEITHER = "neither"


def first_labels(pomsets: Iterable[Pomset], a: str) -> frozenset[ActionLabel]:
    """Labels of the minimal events of each ``r`` projected on ``a``, united."""
    labels = set()
    for r in pomsets:
        ra = project_pomset(r, a)
        labels.update(ra.labels[e] for e in min_events(ra))
    return frozenset(labels)


def _role(l1: frozenset[ActionLabel], l2: frozenset[ActionLabel]) -> Role:
    if not l1 or not l2 or l1 & l2:
        return Role.NEITHER
    both = l1 | l2
    if all(x.is_output for x in both):
        return Role.ACTIVE
    if all(x.is_input for x in both):
        return Role.PASSIVE
    return Role.NEITHER


def _defined_or_raise(g: GChor) -> tuple[Pomset, ...]:
    res = semantics(g)
    if isinstance(res, Bottom):
        raise UndefinedSemantics(res)
    return res.pomsets


class UndefinedSemantics(ValueError):
    def __init__(self, bottom: Bottom):
        super().__init__(str(bottom))
        self.bottom = bottom


def div(g1: GChor, g2: GChor, a: str) -> tuple[frozenset[ActionLabel], frozenset[ActionLabel]]:
    """First actions of ``a`` in each branch of ``g1 + g2``.

    Raises :class:`UndefinedSemantics` if either branch has no semantics.
    """
    return first_labels(_defined_or_raise(g1), a), first_labels(_defined_or_raise(g2), a)


def classify_participant(g1: GChor, g2: GChor, a: str) -> Role:
    return _role(*div(g1, g2, a))


def _branch_roles(p1, p2, names) -> dict[str, Role]:
    return {a: _role(first_labels(p1, a), first_labels(p2, a)) for a in sorted(names)}


def _well_branched_roles(roles: dict[str, Role]) -> bool:
    active = [a for a, r in roles.items() if r is Role.ACTIVE]
    return len(active) <= 1 and all(r is not Role.NEITHER for r in roles.values())


def well_branched(g1: GChor, g2: GChor) -> bool:
    roles = _branch_roles(_defined_or_raise(g1), _defined_or_raise(g2), participants(Branch(g1, g2)))
    return _well_branched_roles(roles)


def semantics(g: GChor, path: str = "") -> SemanticsResult:
    """Family of pomsets of ``g`` up to isomorphism, or the innermost violation."""
    if isinstance(g, Empty):
        return Defined((EMPTY_POMSET,))
    if isinstance(g, Interaction):
        return Defined((interaction_pomset(g.sender, g.message, g.receiver),))
    left = semantics(g.left, path + "L")
    if isinstance(left, Bottom):
        return left
    right = semantics(g.right, path + "R")
    if isinstance(right, Bottom):
        return right
    if isinstance(g, Seq):
        return Defined(dedup_pomsets(seq_pomset(r, r2) for r, r2 in product(left.pomsets, right.pomsets)))
    if isinstance(g, Par):
        for r, r2 in product(left.pomsets, right.pomsets):
            if not well_forked(r, r2):
                shared = sorted(str(x) for x in r.label_set() & r2.label_set() if x.is_input)
                return Bottom(Violation.NOT_WELL_FORKED, path, g, "shared inputs " + ", ".join(shared))
        return Defined(dedup_pomsets(par_pomset(r, r2) for r, r2 in product(left.pomsets, right.pomsets)))
    if isinstance(g, Branch):
        roles = _branch_roles(left.pomsets, right.pomsets, participants(g))
        if not _well_branched_roles(roles):
            detail = ", ".join(f"{a}={r.value}" for a, r in roles.items())
            return Bottom(Violation.NOT_WELL_BRANCHED, path, g, detail)
        return Defined(dedup_pomsets(left.pomsets + right.pomsets))
    raise TypeError(f"not a choreography: {g!r}")


def is_well_formed(g: GChor) -> bool:
    return isinstance(semantics(g), Defined)

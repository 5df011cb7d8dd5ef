"""Error states of ⊗-products and the GIA-based well-formedness verdict.

The verdict follows the pipeline: project on every participant, strip
removable τ-steps, take the ⊗-product and look for three kinds of witness:

* unmatched shared outputs, checked between every participant and the
  product of all the others;
* same-label diamonds in the product of every parallel subterm;
* confused choices in the product of every branching subterm.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from .actions import IN, INTERNAL, OUT, TAU, ActionLabel, dual, label_key
from .gchor import Branch, GChor, Par, depth, participants, render_gchor, subterms_with_paths
from .gia import (
    Gia,
    Transition,
    crosses,
    product_all,
    relabel,
    show_state,
    state_key,
    tensor,
    transition_key,
)
from .pomsets import Bottom, semantics
from .projection import glued_parts, project, strip_tau, tau_classes

__all__ = [
    "dual",
    "channel_word",
    "ro",
    "prefixes",
    "ErrorWitness",
    "unmatched_shared_output",
    "error_states",
    "system_error_states",
    "parallel_error_states",
    "branching_error_states",
    "Verdict",
    "check_well_formed",
    "verdict_to_json",
]

UNMATCHED = "unmatched-output"
PARALLEL = "parallel"
BRANCHING = "branching"


# -- words --------------------------------------------------------------------


def _labels(trail) -> list:
    return [t.label if isinstance(t, Transition) else t for t in trail]


def channel_word(trail: Iterable, a: str, b: str) -> tuple:
    """Labels of ``trail`` with subject ``a`` and object ``b``, in order.

    ``trail`` may hold transitions or bare labels; τ never contributes.
    """
    return tuple(x for x in _labels(trail) if x is not TAU and x.subject == a and x.object == b)


def ro(w: tuple) -> tuple:
    """Drop the last letter if it is an output."""
    if w and w[-1].is_output:
        return w[:-1]
    return w


def prefixes(w: tuple) -> frozenset:
    return frozenset(w[:i] for i in range(len(w) + 1))


def _dual_word(w: tuple) -> tuple:
    return tuple(dual(x) for x in w)


# -- witnesses ----------------------------------------------------------------


@dataclass(frozen=True)
class ErrorWitness:
    """An offending product state (or pair) with the path that reaches it.

    ``trail`` is a path of product transitions from the initial state to
    ``states[0]``.  ``subterm`` locates the composition for parallel and
    branching witnesses (``L``/``R`` path, empty for the root).
    """

    kind: str
    states: tuple
    label: ActionLabel | None
    trail: tuple[Transition, ...]
    subterm: str = ""
    detail: str = ""

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "states": [show_state(s) for s in self.states],
            "label": None if self.label is None else str(self.label),
            "trail": [str(t.label) for t in self.trail],
            "subterm": self.subterm,
            "detail": self.detail,
        }

    def sort_key(self) -> tuple:
        return (
            self.kind,
            self.subterm,
            tuple(state_key(s) for s in self.states),
            label_key(self.label) if self.label is not None else ("",),
            self.detail,
        )


def shortest_trails(g: Gia) -> dict:
    """A BFS path from the initial state to every reachable state."""
    trails = {g.initial: ()}
    queue = deque([g.initial])
    while queue:
        s = queue.popleft()
        for t in g.out_edges[s]:
            if t.target not in trails:
                trails[t.target] = trails[s] + (t,)
                queue.append(t.target)
    return trails


# -- unmatched shared outputs -------------------------------------------------


class _Unmatched:
    """Decides unmatched shared outputs of ``g1`` towards ``g2``.

    Trails ``t`` on the sending side are taken maximal (to a sink): a shorter
    trail would pretend the sender stops early and flag every later exchange
    as missing.  Only per-channel words of a trail matter, so both sides are
    summarised by memoised sets of channel words instead of enumerating
    paths.
    """

    def __init__(self, g1: Gia, g2: Gia):
        self.g1, self.g2 = g1, g2
        self._tail: dict = {}
        self._pre: dict = {}

    def outputs(self, v) -> list[Transition]:
        return [t for t in self.g1.out_edges[v] if t.label is not TAU and t.label.is_output and t.label.receiver in self.g2.group]

    def _channels(self, a: str) -> tuple[str, ...]:
        return tuple(sorted(self.g1.group - {a}))

    def tails(self, x, a: str, b: str) -> frozenset:
        """Channel-word tuples ``#(t, C, b)`` for maximal trails ``t`` from ``x``."""
        key = (x, a, b)
        if key in self._tail:
            return self._tail[key]
        chans = self._channels(a)
        edges = self.g1.out_edges[x]
        if not edges:
            result = frozenset({((),) * len(chans)})
        else:
            acc = set()
            for t in edges:
                sub = self.tails(t.target, a, b)
                lab = t.label
                if lab is not TAU and lab.object == b and lab.subject in chans:
                    k = chans.index(lab.subject)
                    sub = {w[:k] + ((lab,) + w[k],) + w[k + 1:] for w in sub}
                acc |= sub
            result = frozenset(acc)
        self._tail[key] = result
        return result

    def receptions(self, w, label: ActionLabel) -> frozenset:
        """Summaries of trails from ``w`` ending at the first ``label`` input.

        A summary is ``(same_channel, words)``: whether the receiver first
        takes another message from the sender, and the receiver's word with
        each other member of the sending group.
        """
        key = (w, label)
        if key in self._pre:
            return self._pre[key]
        a, b = label.sender, label.receiver
        chans = self._channels(a)
        want = label.with_polarity(IN)
        acc = set()
        for t in self.g2.out_edges[w]:
            lab = t.label
            if lab == want:
                acc.add((False, ((),) * len(chans)))
                continue
            sub = self.receptions(t.target, label)
            if not sub or lab is TAU or lab.subject != b or not crosses(lab, self.g1.group):
                acc |= sub
            elif lab.object == a:
                # an earlier input from the sender occupies the very channel
                # the output needs; an output back to the sender uses the
                # opposite channel and cannot hold it up
                if lab.is_input:
                    acc |= {(True, words) for _, words in sub}
                else:
                    acc |= sub
            else:
                k = chans.index(lab.object)
                acc |= {(blocked, words[:k] + ((lab,) + words[k],) + words[k + 1:]) for blocked, words in sub}
        result = frozenset(acc)
        self._pre[key] = result
        return result

    def check(self, v, w, t: Transition) -> str | None:
        """Reason why output ``t`` at ``v`` is unmatched by ``w``, or ``None``."""
        label = t.label
        summaries = self.receptions(w, label)
        if not summaries:
            return f"no trail from the partner receives {label.with_polarity(IN)}"
        chans = self._channels(label.sender)
        for tail in sorted(self.tails(t.target, label.sender, label.receiver), key=_words_key):
            expected = [prefixes(_dual_word(word)) for word in tail]

            def blocked(summary):
                same_channel, words = summary
                if same_channel:
                    return True
                return any(word and ro(word) not in expected[k] for k, word in enumerate(words))

            if all(blocked(s) for s in summaries):
                culprits = sorted({chans[k] for s in summaries for k, word in enumerate(s[1]) if word})
                if any(s[0] for s in summaries):
                    culprits = [label.sender] + culprits
                return f"{label.with_polarity(IN)} is always preceded by a blocking exchange with {','.join(culprits)}"
        return None


def _words_key(words) -> tuple:
    return tuple(tuple(label_key(x) for x in w) for w in words)


def unmatched_shared_output(g1: Gia, g2: Gia, v, v2) -> ErrorWitness | None:
    """Witness that ``v`` has an unmatched shared output by ``v2``, if any.

    The witness trail is empty; :func:`error_states` fills in product paths.
    """
    if v not in g1.states or v2 not in g2.states:
        raise ValueError("states must belong to their automata")
    if g1.group & g2.group:
        raise ValueError("automata are not composable")
    checker = _Unmatched(g1, g2)
    for t in checker.outputs(v):
        reason = checker.check(v, v2, t)
        if reason is not None:
            return ErrorWitness(UNMATCHED, ((v, v2),), t.label, (), detail=reason)
    return None


def _pair_witnesses(checker: _Unmatched, v, w) -> list[tuple[ActionLabel, str]]:
    found = []
    seen = set()
    for t in checker.outputs(v):
        if t.label in seen:
            continue
        reason = checker.check(v, w, t)
        if reason is not None:
            seen.add(t.label)
            found.append((t.label, reason))
    return found


def error_states(g1: Gia, g2: Gia) -> list[ErrorWitness]:
    """Error states of ``g1 ⊗ g2`` over its reachable pairs."""
    prod = tensor(g1, g2)
    trails = shortest_trails(prod)
    forward, backward = _Unmatched(g1, g2), _Unmatched(g2, g1)
    witnesses = []
    for s in prod.sorted_states:
        v, w = s
        for label, reason in _pair_witnesses(forward, v, w):
            witnesses.append(ErrorWitness(UNMATCHED, (s,), label, trails[s], detail=reason))
        for label, reason in _pair_witnesses(backward, w, v):
            witnesses.append(ErrorWitness(UNMATCHED, (s,), label, trails[s], detail=reason))
    return sorted(witnesses, key=ErrorWitness.sort_key)


def system_error_states(factors: Sequence[Gia], product: Gia | None = None, first_only: bool = False) -> list[ErrorWitness]:
    """Error states of an n-ary product, each factor against the product of the rest.

    With ``first_only`` the scan stops at the first error state.
    """
    factors = list(factors)
    product = product_all(factors) if product is None else product
    if len(factors) < 2:
        return []
    trails = shortest_trails(product)
    checkers = []
    for i, g in enumerate(factors):
        rest = product_all(factors[:i] + factors[i + 1:])
        checkers.append((_Unmatched(g, rest), _Unmatched(rest, g)))
    witnesses = {}
    for s in product.sorted_states:
        for i, (out_of, into) in enumerate(checkers):
            v = s[i]
            w = s[:i] + s[i + 1:]
            for label, reason in _pair_witnesses(out_of, v, w) + _pair_witnesses(into, w, v):
                witnesses.setdefault((s, label), ErrorWitness(UNMATCHED, (s,), label, trails[s], detail=reason))
        if first_only and witnesses:
            break
    return sorted(witnesses.values(), key=ErrorWitness.sort_key)


# -- per-composition checks ---------------------------------------------------


def _state_name(p: str, i: int) -> str:
    return f"{p}_{i}" if p[-1:].isdigit() else f"{p}{i}"


def named_stripped_projection(g: GChor, p: str) -> Gia:
    stripped = strip_tau(project(g, p).automaton)
    named, _ = relabel(stripped, prefix="")
    return _rename(named, lambda s: _state_name(p, int(s)))


def _rename(g: Gia, f) -> Gia:
    return Gia(
        frozenset(f(s) for s in g.states),
        f(g.initial),
        g.group,
        frozenset(Transition(f(t.source), t.label, f(t.target)) for t in g.transitions),
    )


def system_product(g: GChor) -> tuple[list[str], list[Gia], Gia | None]:
    """Participants, their named stripped projections and the ⊗-product."""
    names = sorted(participants(g))
    factors = [named_stripped_projection(g, p) for p in names]
    return names, factors, (product_all(factors) if factors else None)


def parallel_error_states(g: GChor, path: str = "", first_only: bool = False) -> list[ErrorWitness]:
    """Same-label diamonds in the product of the stripped projections of ``g``."""
    if not isinstance(g, Par):
        raise TypeError("parallel error states are defined for parallel compositions")
    _, _, prod = system_product(g)
    if prod is None:
        return []
    trails = shortest_trails(prod)
    found = []
    for v in prod.sorted_states:
        by_label: dict = {}
        for t in prod.out_edges[v]:
            if t.label is not TAU:
                by_label.setdefault(t.label, []).append(t.target)
        for label in sorted(by_label, key=label_key):
            mids = by_label[label]
            hit = None
            for u, u2 in combinations(mids, 2):
                ends = {t.target for t in prod.out_edges[u] if t.label == label}
                ends &= {t.target for t in prod.out_edges[u2] if t.label == label}
                if ends:
                    hit = (u, u2, min(ends, key=state_key))
                    break
            if hit:
                detail = "diamond through " + ", ".join(show_state(x) for x in hit)
                found.append(ErrorWitness(PARALLEL, (v,), label, trails[v], path, detail))
                if first_only:
                    return found
    return found


def branch_origins(g: Branch, p: str) -> tuple[Gia, dict]:
    """Stripped projection of a choice on ``p`` with the alternatives behind each transition.

    The map sends every transition to the subset of ``{1, 2}`` of the
    alternatives (left, right) it stems from.
    """
    (left, right), initial, _ = glued_parts(g, p)
    whole = Gia(left.states | right.states, initial, left.group, left.transitions | right.transitions)
    stripped = strip_tau(whole)
    cls = {s: c for c in tau_classes(whole) for s in c}
    origins: dict = {}
    for side, part in ((1, left), (2, right)):
        for t in part.transitions:
            q = Transition(cls[t.source], t.label, cls[t.target])
            if q in stripped.transitions:
                origins.setdefault(q, set()).add(side)
    _, names = relabel(stripped, prefix="")

    def rename(s):
        return _state_name(p, int(names[s]))

    return _rename(stripped, rename), {
        Transition(rename(t.source), t.label, rename(t.target)): frozenset(o) for t, o in origins.items()
    }


def _step_origins(prod: Gia, factors: list[Gia], origins: list[dict], t: Transition) -> frozenset:
    """Alternatives that can take the product step ``t``.

    A fused step needs the sender's and the receiver's move to stem from the
    same alternative.
    """

    def moved(i, label):
        a, b = t.source[i], t.target[i]
        return frozenset().union(*[origins[i][u] for u in factors[i].out_edges[a] if u.target == b and u.label == label])

    changed = [i for i in range(len(factors)) if t.source[i] != t.target[i]]
    if t.label is TAU or not t.label.is_internal or len(changed) == 1:
        return moved(changed[0], t.label)
    snd = next(i for i in changed if t.label.sender in factors[i].group)
    rcv = next(i for i in changed if i != snd)
    return moved(snd, t.label.with_polarity(OUT)) & moved(rcv, t.label.with_polarity(IN))


def _alternatives(prod: Gia, factors: list[Gia], origins: list[dict]) -> dict:
    """For each product state, the alternatives consistent with some path to it."""
    reach = {prod.initial: frozenset({1, 2})}
    for s in prod.topological_order():
        if s not in reach:
            continue
        for t in prod.out_edges[s]:
            opts = _step_origins(prod, factors, origins, t)
            reach[t.target] = reach.get(t.target, frozenset()) | (reach[s] & opts)
    return reach


def _path_facts(prod: Gia) -> tuple[dict, dict]:
    """Per state: whether only τ-words lead to it, and sobj of the words that do."""
    tau_only = {prod.initial: True}
    sobj: dict = {prod.initial: frozenset()}
    for s in prod.topological_order():
        if s not in sobj:
            continue
        for t in prod.out_edges[s]:
            silent = t.label is TAU
            tau_only[t.target] = tau_only.get(t.target, True) and tau_only[s] and silent
            extra = frozenset() if silent else t.label.sobj
            sobj[t.target] = sobj.get(t.target, frozenset()) | sobj[s] | extra
    return tau_only, sobj


def branching_error_states(g: GChor, path: str = "", first_only: bool = False) -> list[ErrorWitness]:
    """Confused choices in the product of the stripped projections of ``g``.

    (1) the whole product is a single transition;
    (2) a state reached by τ-steps only offers two distinct transitions with
        different senders or with the same label;
    (3) the same fused action, with an endpoint that has not acted yet, is
        offered in two states that lie in different alternatives.
    """
    if not isinstance(g, Branch):
        raise TypeError("branching error states are defined for branching compositions")
    names = sorted(participants(g))
    if not names:
        return []
    built = [branch_origins(g, p) for p in names]
    factors = [b[0] for b in built]
    origins = [b[1] for b in built]
    prod = product_all(factors)
    trails = shortest_trails(prod)
    found = []
    if len(prod.transitions) == 1:
        (only,) = prod.transitions
        found.append(ErrorWitness(BRANCHING, (prod.initial,), only.label, (), path, "condition 1: single transition"))
        if first_only:
            return found
    tau_only, sobj = _path_facts(prod)
    for v in prod.sorted_states:
        if not tau_only[v]:
            continue
        edges = [t for t in prod.out_edges[v] if t.label is not TAU]
        clash = next(
            ((t1, t2) for t1, t2 in combinations(edges, 2) if t1.label.sender != t2.label.sender or t1.label == t2.label),
            None,
        )
        if clash is None and len(prod.transitions) > 1:
            # both alternatives start with the same action and end in the
            # same state, so the two transitions coincide
            clash = next(((t, t) for t in edges if len(_step_origins(prod, factors, origins, t)) == 2), None)
        if clash is not None:
            t1, t2 = clash
            detail = f"condition 2: {t1.label} and {t2.label}"
            found.append(ErrorWitness(BRANCHING, (v,), t1.label, trails[v], path, detail))
            if first_only:
                return found
    alts = _alternatives(prod, factors, origins)
    offers: dict = {}
    for v in prod.sorted_states:
        for t in prod.out_edges[v]:
            if t.label is not TAU:
                offers.setdefault(t.label, []).append(v)
    for label in sorted(offers, key=label_key):
        states = sorted(set(offers[label]), key=state_key)
        for v, v2 in combinations(states, 2):
            a1, a2 = alts.get(v, frozenset()), alts.get(v2, frozenset())
            if not a1 or not a2 or a1 & a2:
                continue
            if tau_only[v] and tau_only[v2]:
                continue
            idle = [x for x in (label.sender, label.receiver) if x not in sobj[v] and x not in sobj[v2]]
            if idle:
                detail = f"condition 3: {','.join(idle)} has not acted before {label}"
                found.append(ErrorWitness(BRANCHING, (v, v2), label, trails[v], path, detail))
                if first_only:
                    return found
    return found


# -- buffered execution -------------------------------------------------------


@dataclass(frozen=True)
class BufferedResult:
    deadlock_free: bool
    orphan_free: bool
    traces_explored: int
    configurations: int
    inconclusive: bool = False
    stuck: tuple = ()

    def to_json(self) -> dict:
        return {
            "deadlock_free": self.deadlock_free,
            "orphan_free": self.orphan_free,
            "traces_explored": self.traces_explored,
            "configurations": self.configurations,
            "inconclusive": self.inconclusive,
        }


DEFAULT_STATE_CAP = 200_000


def explore_buffered_system(g: GChor, state_cap: int = DEFAULT_STATE_CAP) -> BufferedResult:
    """Exhaustive run of the stripped projections over one-slot channels.

    A configuration is a tuple of local states plus one slot per ordered
    pair of participants.  Terminal configurations are those without moves;
    each one is a maximal run's end and counts as one explored trace.
    """
    names, factors, _ = system_product(g)
    if not names:
        return BufferedResult(True, True, 1, 1)
    index = {p: i for i, p in enumerate(names)}
    n = len(names)
    init = (tuple(f.initial for f in factors), (None,) * (n * n))
    seen = {init}
    stack = [init]
    terminals = 0
    deadlock_free = orphan_free = True
    stuck = []
    while stack:
        if len(seen) > state_cap:
            return BufferedResult(deadlock_free, orphan_free, terminals, len(seen), True, tuple(stuck))
        locals_, slots = stack.pop()
        moves = []
        for i, f in enumerate(factors):
            for t in f.out_edges[locals_[i]]:
                lab = t.label
                nxt_slots = slots
                if lab is TAU:
                    pass
                elif lab.is_output:
                    k = index[lab.sender] * n + index[lab.receiver]
                    if slots[k] is not None:
                        continue
                    nxt_slots = slots[:k] + (lab.message,) + slots[k + 1:]
                elif lab.is_input:
                    k = index[lab.sender] * n + index[lab.receiver]
                    if slots[k] != lab.message:
                        continue
                    nxt_slots = slots[:k] + (None,) + slots[k + 1:]
                else:
                    raise ValueError(f"projection carries internal label {lab}")
                moves.append((locals_[:i] + (t.target,) + locals_[i + 1:], nxt_slots))
        if not moves:
            terminals += 1
            done = all(not factors[i].out_edges[s] for i, s in enumerate(locals_))
            empty = all(x is None for x in slots)
            # a message left in a slot means its receiver never took it, so
            # the run did not complete either
            if not (done and empty):
                deadlock_free = False
            if not empty:
                orphan_free = False
            if not (done and empty) and len(stuck) < 5 and locals_ not in stuck:
                stuck.append(locals_)
            continue
        for cfg in moves:
            if cfg not in seen:
                seen.add(cfg)
                stack.append(cfg)
    return BufferedResult(deadlock_free, orphan_free, terminals, len(seen), False, tuple(stuck))


# -- verdict ------------------------------------------------------------------


@dataclass
class Verdict:
    well_formed: bool
    oracle_well_formed: bool
    witnesses: list[ErrorWitness]
    per_subterm: dict[str, dict] = field(default_factory=dict)
    oracle_detail: str = ""
    buffered: BufferedResult | None = None
    complete: bool = True

    def to_json(self) -> dict:
        doc = {
            "well_formed": self.well_formed,
            "oracle_well_formed": self.oracle_well_formed,
            "oracle_detail": self.oracle_detail,
            "witnesses": [w.to_json() for w in self.witnesses],
            "per_subterm": self.per_subterm,
            "complete": self.complete,
            "buffered": None if self.buffered is None else self.buffered.to_json(),
        }
        return doc


def check_well_formed(
    g: GChor,
    buffered: bool = False,
    state_cap: int = DEFAULT_STATE_CAP,
    exhaustive: bool = True,
) -> Verdict:
    """GIA verdict for ``g`` alongside the pomset oracle.

    With ``exhaustive=False`` checking stops at the first witness; the
    compositions are then visited smallest first, since a faulty inner
    composition is much cheaper to expose than the whole product.
    """
    first_only = not exhaustive
    compositions = [(path, sub) for path, sub in subterms_with_paths(g) if isinstance(sub, (Par, Branch))]
    if first_only:
        compositions.sort(key=lambda item: (depth(item[1]), item[0]))
    witnesses: list[ErrorWitness] = []
    per_subterm = {}
    for path, sub in compositions:
        if isinstance(sub, Par):
            found, kind = parallel_error_states(sub, path, first_only), PARALLEL
        else:
            found, kind = branching_error_states(sub, path, first_only), BRANCHING
        witnesses.extend(found)
        per_subterm[path or "<root>"] = {"kind": kind, "term": render_gchor(sub), "ok": not found, "witnesses": len(found)}
        if first_only and found:
            break
    if not (first_only and witnesses):
        _, factors, prod = system_product(g)
        if prod is not None:
            witnesses = system_error_states(factors, prod, first_only) + witnesses
    sem = semantics(g)
    return Verdict(
        well_formed=not witnesses,
        oracle_well_formed=not isinstance(sem, Bottom),
        witnesses=witnesses,
        per_subterm=dict(sorted(per_subterm.items())),
        oracle_detail=str(sem) if isinstance(sem, Bottom) else "defined",
        buffered=explore_buffered_system(g, state_cap) if buffered else None,
        complete=exhaustive,
    )


def verdict_to_json(v: Verdict) -> str:
    return json.dumps(v.to_json(), indent=2, sort_keys=True, ensure_ascii=False)

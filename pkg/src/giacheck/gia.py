"""Group interface automata (GIA).

A GIA is owned by a group of participants.  A label ``AB!m`` is an output of
the group when ``A`` is in the group and ``B`` is not, ``AB?m`` an input when
only ``B`` is in the group, and ``AB!?m`` an internal action when both are.
``τ`` steps carry no communication.

States are opaque hashable values.  Products pair states in tuples and
:func:`tag` pairs them with a natural number, so the origin of a state can be
read off its identifier.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Hashable, Iterable, NamedTuple, Sequence

import networkx as nx
from networkx.algorithms.isomorphism import DiGraphMatcher

from .actions import IN, INTERNAL, OUT, TAU, ActionLabel, Label, label_key

State = Hashable


class Transition(NamedTuple):
    source: State
    label: Label
    target: State

    def __str__(self):
        return f"{show_state(self.source)} --{self.label}--> {show_state(self.target)}"


class InvalidGia(ValueError):
    pass


@lru_cache(maxsize=1 << 18)
def state_key(s: State) -> tuple:
    """Deterministic sort key for state identifiers (independent of hash seeds)."""
    if isinstance(s, bool):
        return (0, int(s))
    if isinstance(s, int):
        return (0, s)
    if isinstance(s, str):
        return (1, s)
    if isinstance(s, tuple):
        return (2, tuple(state_key(x) for x in s))
    if isinstance(s, frozenset):
        return (3, tuple(sorted(state_key(x) for x in s)))
    return (4, repr(s))


def show_state(s: State) -> str:
    if isinstance(s, tuple):
        return "(" + ",".join(show_state(x) for x in s) + ")"
    if isinstance(s, frozenset):
        return "{" + ",".join(show_state(x) for x in sorted(s, key=state_key)) + "}"
    return str(s)


def transition_key(t: Transition) -> tuple:
    return (state_key(t.source), label_key(t.label), state_key(t.target))


def label_class_error(label: Label, group: frozenset[str]) -> str | None:
    """Why ``label`` is not an interface of a GIA with ``group``, or ``None``."""
    if label is TAU:
        return None
    a_in, b_in = label.sender in group, label.receiver in group
    if label.polarity == OUT and not (a_in and not b_in):
        return f"output {label} needs sender in the group and receiver outside it"
    if label.polarity == IN and not (b_in and not a_in):
        return f"input {label} needs receiver in the group and sender outside it"
    if label.polarity == INTERNAL and not (a_in and b_in):
        return f"internal {label} needs both endpoints in the group"
    return None


@dataclass(frozen=True)
class Gia:
    states: frozenset
    initial: State
    group: frozenset[str]
    transitions: frozenset[Transition]

    def __post_init__(self):
        if not self.group:
            raise InvalidGia("a GIA needs a nonempty group")
        for t in self.transitions:
            err = label_class_error(t.label, self.group)
            if err is not None:
                raise InvalidGia(f"transition {t}: {err}")

    @classmethod
    def build(cls, initial: State, group: Iterable[str], transitions: Iterable[tuple], states: Iterable[State] = ()) -> "Gia":
        ts = frozenset(Transition(*t) for t in transitions)
        all_states = {initial, *states}
        for t in ts:
            all_states.add(t.source)
            all_states.add(t.target)
        return cls(frozenset(all_states), initial, frozenset(group), ts)

    @cached_property
    def out_edges(self) -> dict[State, tuple[Transition, ...]]:
        table = defaultdict(list)
        for t in self.transitions:
            table[t.source].append(t)
        return defaultdict(tuple, {s: tuple(sorted(ts, key=transition_key)) for s, ts in table.items()})

    @cached_property
    def successors(self) -> dict[State, list[Transition]]:
        """Outgoing transitions, unsorted; cheaper than :attr:`out_edges` for bulk work."""
        table = defaultdict(list)
        for t in self.transitions:
            table[t.source].append(t)
        return table

    @cached_property
    def in_edges(self) -> dict[State, tuple[Transition, ...]]:
        table = defaultdict(list)
        for t in self.transitions:
            table[t.target].append(t)
        return defaultdict(tuple, {s: tuple(sorted(ts, key=transition_key)) for s, ts in table.items()})

    @cached_property
    def sorted_states(self) -> tuple:
        return tuple(sorted(self.states, key=state_key))

    @cached_property
    def inputs(self) -> frozenset[ActionLabel]:
        return frozenset(t.label for t in self.transitions if t.label is not TAU and t.label.is_input)

    @cached_property
    def outputs(self) -> frozenset[ActionLabel]:
        return frozenset(t.label for t in self.transitions if t.label is not TAU and t.label.is_output)

    @cached_property
    def internals(self) -> frozenset[ActionLabel]:
        return frozenset(t.label for t in self.transitions if t.label is not TAU and t.label.is_internal)

    def sinks(self) -> list[State]:
        return [s for s in self.sorted_states if not self.out_edges[s]]

    def reachable(self, start: State | None = None) -> list[State]:
        """States reachable from ``start`` (default: the initial state), BFS order."""
        start = self.initial if start is None else start
        seen = {start}
        order = [start]
        queue = deque([start])
        while queue:
            s = queue.popleft()
            for t in self.successors.get(s, ()):
                if t.target not in seen:
                    seen.add(t.target)
                    order.append(t.target)
                    queue.append(t.target)
        return order

    def topological_order(self) -> list[State]:
        """States in topological order; raises :class:`InvalidGia` on a cycle."""
        indeg = {s: 0 for s in self.states}
        for t in self.transitions:
            indeg[t.target] += 1
        ready = [s for s in self.sorted_states if indeg[s] == 0]
        order = []
        while ready:
            s = ready.pop()
            order.append(s)
            for t in self.out_edges[s]:
                indeg[t.target] -= 1
                if indeg[t.target] == 0:
                    ready.append(t.target)
        if len(order) != len(self.states):
            raise InvalidGia("transition graph has a cycle")
        return order

    def __str__(self):
        lines = [f"GIA group={{{','.join(sorted(self.group))}}} initial={show_state(self.initial)}"]
        lines += [f"  {t}" for t in sorted(self.transitions, key=transition_key)]
        return "\n".join(lines)


def validate_gia(g: Gia) -> list[str]:
    """Diagnostics for ``g``; an empty list means the automaton is valid."""
    problems = []
    if g.initial not in g.states:
        problems.append(f"initial state {show_state(g.initial)} is not a state")
    for t in sorted(g.transitions, key=transition_key):
        if t.source not in g.states or t.target not in g.states:
            problems.append(f"transition {t} mentions an unknown state")
        err = label_class_error(t.label, g.group)
        if err is not None:
            problems.append(f"transition {t}: {err}")
    graph = nx.DiGraph()
    graph.add_edges_from((t.source, t.target) for t in g.transitions)
    graph.add_edges_from((t.source, t.target) for t in g.transitions if t.source == t.target)
    if not nx.is_directed_acyclic_graph(graph):
        cycle = nx.find_cycle(graph)
        problems.append("transition graph has a cycle through " + ", ".join(show_state(s) for s, _ in cycle))
    return problems


def shared_interfaces(g1: Gia, g2: Gia) -> tuple[frozenset, frozenset, frozenset]:
    """Shared inputs, shared outputs and the internal labels they fuse into."""
    si = {x for x in g1.inputs if x.with_polarity(OUT) in g2.outputs}
    si |= {x for x in g2.inputs if x.with_polarity(OUT) in g1.outputs}
    so = {x for x in g1.outputs if x.with_polarity(IN) in g2.inputs}
    so |= {x for x in g2.outputs if x.with_polarity(IN) in g1.inputs}
    sh = {x.with_polarity(INTERNAL) for x in so}
    return frozenset(si), frozenset(so), frozenset(sh)


def composable(g1: Gia, g2: Gia) -> bool:
    return not (g1.group & g2.group)


def crosses(label: Label, group: frozenset[str]) -> bool:
    """True when ``label`` is a communication with a member of ``group``."""
    if label is TAU or label.is_internal:
        return False
    partner = label.receiver if label.is_output else label.sender
    return partner in group


def product_all(automata: Sequence[Gia]) -> Gia:
    """⊗-product of pairwise composable automata, restricted to reachable states.

    States are flat tuples with one component per factor, in the given order.
    A step either moves one factor on a label that does not talk to any other
    factor, or moves a sender and a receiver together on a fused ``AB!?m``.
    """
    automata = list(automata)
    groups = [g.group for g in automata]
    for i in range(len(automata)):
        for j in range(i + 1, len(automata)):
            if groups[i] & groups[j]:
                raise InvalidGia(f"factors {i} and {j} are not composable")
    owner = {}
    for i, grp in enumerate(groups):
        for p in grp:
            owner[p] = i
    union = frozenset().union(*groups)
    init = tuple(g.initial for g in automata)
    transitions = set()
    seen = {init}
    queue = deque([init])
    while queue:
        s = queue.popleft()
        steps = []
        for i, g in enumerate(automata):
            for t in g.successors.get(s[i], ()):
                lab = t.label
                if not crosses(lab, union):
                    nxt = s[:i] + (t.target,) + s[i + 1:]
                    steps.append((lab, nxt))
                elif lab.is_output:
                    j = owner[lab.receiver]
                    want = lab.with_polarity(IN)
                    for u in automata[j].successors.get(s[j], ()):
                        if u.label == want:
                            nxt = list(s)
                            nxt[i] = t.target
                            nxt[j] = u.target
                            steps.append((lab.with_polarity(INTERNAL), tuple(nxt)))
        for lab, nxt in steps:
            transitions.add(Transition(s, lab, nxt))
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return Gia(frozenset(seen), init, union, frozenset(transitions))


def tensor(g1: Gia, g2: Gia) -> Gia:
    """Binary ⊗-product; states are pairs ``(s1, s2)``."""
    if not composable(g1, g2):
        raise InvalidGia("groups overlap: " + ",".join(sorted(g1.group & g2.group)))
    return product_all([g1, g2])


def flatten_state(s: State, arity: int) -> tuple:
    """Turn a left-nested pair state of a fold of ``arity`` factors into a flat tuple."""
    parts = []
    for _ in range(arity - 1):
        s, last = s
        parts.append(last)
    parts.append(s)
    return tuple(reversed(parts))


def interleave(g1: Gia, g2: Gia) -> Gia:
    """Free interleaving: every step moves exactly one side, nothing fuses."""
    init = (g1.initial, g2.initial)
    seen = {init}
    queue = deque([init])
    transitions = set()
    while queue:
        s = queue.popleft()
        a, b = s
        steps = [(t.label, (t.target, b)) for t in g1.out_edges[a]]
        steps += [(t.label, (a, t.target)) for t in g2.out_edges[b]]
        for lab, nxt in steps:
            transitions.add(Transition(s, lab, nxt))
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return Gia(frozenset(seen), init, g1.group | g2.group, frozenset(transitions))


def substitute(g: Gia, old: State, new: State) -> Gia:
    """Replace state ``old`` by ``new``; if ``new`` is already a state the two merge."""
    if old not in g.states:
        raise KeyError(f"state {show_state(old)} not in automaton")
    if old == new:
        return g

    def sub(s):
        return new if s == old else s

    return Gia(
        frozenset(sub(s) for s in g.states),
        sub(g.initial),
        g.group,
        frozenset(Transition(sub(t.source), t.label, sub(t.target)) for t in g.transitions),
    )


def tag(g: Gia, n: int) -> Gia:
    """Pair every state with ``n``."""
    return Gia(
        frozenset((s, n) for s in g.states),
        (g.initial, n),
        g.group,
        frozenset(Transition((t.source, n), t.label, (t.target, n)) for t in g.transitions),
    )


def union(g1: Gia, g2: Gia) -> Gia:
    """Componentwise union keeping the initial state of ``g1``."""
    return Gia(g1.states | g2.states, g1.initial, g1.group | g2.group, g1.transitions | g2.transitions)


Word = tuple  # of ActionLabel; () is the empty word τ


def language(g: Gia, frm: State, to: State) -> frozenset[Word]:
    """Words (τ erased) along the paths from ``frm`` to ``to``.

    Contains the empty word when ``frm == to``.
    """
    memo: dict[State, frozenset[Word]] = {}

    def words(s):
        if s in memo:
            return memo[s]
        acc = {()} if s == to else set()
        for t in g.out_edges[s]:
            tail = words(t.target)
            if t.label is TAU:
                acc |= tail
            else:
                acc |= {(t.label,) + w for w in tail}
        memo[s] = frozenset(acc)
        return memo[s]

    return words(frm)


def complete_words(g: Gia) -> frozenset[Word]:
    """Words from the initial state to any sink."""
    result = set()
    for s in g.sinks():
        result |= language(g, g.initial, s)
    return frozenset(result)


def restrict_reachable(g: Gia) -> Gia:
    keep = set(g.reachable())
    return Gia(frozenset(keep), g.initial, g.group, frozenset(t for t in g.transitions if t.source in keep))


def _as_graph(g: Gia) -> nx.DiGraph:
    graph = nx.DiGraph()
    for s in g.reachable():
        graph.add_node(s, initial=(s == g.initial))
    edges = defaultdict(set)
    for t in g.transitions:
        if t.source in graph:
            edges[(t.source, t.target)].add(t.label)
    for (a, b), labels in edges.items():
        graph.add_edge(a, b, labels=frozenset(labels))
    return graph


def _refine(graphs: Sequence[nx.DiGraph]) -> list[dict] | None:
    """Joint colour refinement of labelled graphs.

    Colours are comparable across the graphs because one palette is shared.
    Returns ``None`` as soon as the colour histograms differ, which already
    rules out an isomorphism.
    """
    outs, ins = [], []
    for g in graphs:
        outs.append({v: [(tuple(sorted(map(label_key, d["labels"]))), w) for _, w, d in g.out_edges(v, data=True)] for v in g})
        ins.append({v: [(tuple(sorted(map(label_key, d["labels"]))), u) for u, _, d in g.in_edges(v, data=True)] for v in g})
    palette: dict = {}
    colors = [{v: palette.setdefault(d["initial"], len(palette)) for v, d in g.nodes(data=True)} for g in graphs]
    while True:
        palette = {}
        fresh = []
        for col, out, inn in zip(colors, outs, ins):
            fresh.append({
                v: palette.setdefault(
                    (col[v], tuple(sorted((k, col[w]) for k, w in out[v])), tuple(sorted((k, col[u]) for k, u in inn[v]))),
                    len(palette),
                )
                for v in col
            })
        hist = [sorted(c.values()) for c in fresh]
        if any(h != hist[0] for h in hist):
            return None
        stable = all(len(set(n.values())) == len(set(o.values())) for n, o in zip(fresh, colors))
        colors = fresh
        if stable:
            return colors


def _edge_table(g: nx.DiGraph) -> dict:
    return {(a, b): d["labels"] for a, b, d in g.edges(data=True)}


def is_isomorphism(g1: Gia, g2: Gia, f) -> bool:
    """Whether ``f`` maps the reachable part of ``g1`` isomorphically onto that of ``g2``."""
    if g1.group != g2.group:
        return False
    r1, r2 = g1.reachable(), set(g2.reachable())
    if len(r1) != len(r2):
        return False
    try:
        image = {v: f(v) for v in r1}
    except (KeyError, TypeError, ValueError, IndexError):
        return False
    if image[g1.initial] != g2.initial or set(image.values()) != r2:
        return False
    t1 = {Transition(image[t.source], t.label, image[t.target]) for t in g1.transitions if t.source in image}
    t2 = {t for t in g2.transitions if t.source in r2}
    return t1 == t2


def gia_isomorphic(g1: Gia, g2: Gia) -> bool:
    """Isomorphism of the reachable parts, preserving initial state, group and labels."""
    if g1.group != g2.group:
        return False
    a, b = _as_graph(g1), _as_graph(g2)
    if a.number_of_nodes() != b.number_of_nodes() or a.number_of_edges() != b.number_of_edges():
        return False
    colors = _refine([a, b])
    if colors is None:
        return False
    ca, cb = colors
    if len(set(ca.values())) == len(ca):
        # discrete colouring: the only candidate bijection is forced
        back = {c: v for v, c in cb.items()}
        ea, eb = _edge_table(a), _edge_table(b)
        return all(eb.get((back[ca[x]], back[ca[y]])) == labels for (x, y), labels in ea.items())
    nx.set_node_attributes(a, ca, "color")
    nx.set_node_attributes(b, cb, "color")
    matcher = DiGraphMatcher(
        a,
        b,
        node_match=lambda x, y: x["color"] == y["color"],
        edge_match=lambda x, y: x["labels"] == y["labels"],
    )
    return matcher.is_isomorphic()


def relabel(g: Gia, prefix: str = "s") -> tuple[Gia, dict[State, str]]:
    """Rename reachable states ``prefix0, prefix1, ...`` in deterministic BFS order."""
    names: dict[State, str] = {}
    queue = deque([g.initial])
    names[g.initial] = f"{prefix}0"
    while queue:
        s = queue.popleft()
        for t in g.out_edges[s]:
            if t.target not in names:
                names[t.target] = f"{prefix}{len(names)}"
                queue.append(t.target)
    for s in g.sorted_states:
        if s not in names:
            names[s] = f"{prefix}{len(names)}"
    renamed = Gia(
        frozenset(names.values()),
        names[g.initial],
        g.group,
        frozenset(Transition(names[t.source], t.label, names[t.target]) for t in g.transitions),
    )
    return renamed, names

"""Graphviz DOT rendering of terms, pomsets and automata.

Output is plain text built by hand; ordering is fixed (states by
:func:`state_key`, edges by source, label, target) so that repeated exports
of the same input are byte-identical.
"""

from __future__ import annotations

from .actions import TAU
from .gchor import Branch, Empty, GChor, Interaction, Par, Seq
from .gia import Gia, show_state, state_key, transition_key
from .pomsets import Pomset


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def quote(text: str) -> str:
    return '"' + _escape(text) + '"'


def _label_text(label) -> str:
    return "τ" if label is TAU else str(label)


def gia_to_dot(g: Gia, name: str = "gia") -> str:
    """States as circles (initial doubled), τ drawn as "τ", interfaces in a legend note."""
    ids = {s: f"s{i}" for i, s in enumerate(g.sorted_states)}
    lines = [f"digraph {quote(name)} {{", "  rankdir=LR;", "  node [shape=circle];"]
    for s in g.sorted_states:
        shape = ", shape=doublecircle" if s == g.initial else ""
        lines.append(f"  {ids[s]} [label={quote(show_state(s))}{shape}];")
    for t in sorted(g.transitions, key=transition_key):
        style = ", style=dashed" if t.label is TAU else ""
        lines.append(f"  {ids[t.source]} -> {ids[t.target]} [label={quote(_label_text(t.label))}{style}];")
    legend = [
        "group: " + ", ".join(sorted(g.group)),
        "inputs: " + ", ".join(sorted(map(str, g.inputs))),
        "outputs: " + ", ".join(sorted(map(str, g.outputs))),
        "internal: " + ", ".join(sorted(map(str, g.internals))),
    ]
    text = "\\l".join(_escape(line) for line in legend) + "\\l"
    lines.append(f'  legend [shape=note, label="{text}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def pomset_to_dot(r: Pomset, name: str = "pomset") -> str:
    """Events labelled by their action; arrows are covering pairs of the order."""
    lines = [f"digraph {quote(name)} {{", "  node [shape=box];"]
    for e in r.events:
        lines.append(f"  e{e} [label={quote(str(r.labels[e]))}];")
    for e, f in r.covering_edges():
        lines.append(f"  e{e} -> e{f};")
    lines.append("}")
    return "\n".join(lines) + "\n"


_OPS = {Seq: ";", Par: "|", Branch: "+"}


def gchor_to_dot(g: GChor, name: str = "gchor") -> str:
    """Syntax tree of the term; nodes are numbered in pre-order."""
    lines = [f"digraph {quote(name)} {{", "  node [shape=plaintext];"]
    counter = 0

    def walk(t: GChor) -> str:
        nonlocal counter
        node = f"n{counter}"
        counter += 1
        if isinstance(t, Empty):
            lines.append(f"  {node} [label=\"0\"];")
        elif isinstance(t, Interaction):
            lines.append(f"  {node} [label={quote(f'{t.sender}->{t.receiver}:{t.message}')}];")
        else:
            lines.append(f"  {node} [label={quote(_OPS[type(t)])}, shape=circle];")
            left, right = walk(t.left), walk(t.right)
            lines.append(f"  {node} -> {left};")
            lines.append(f"  {node} -> {right};")
        return node

    walk(g)
    lines.append("}")
    return "\n".join(lines) + "\n"


__all__ = ["gia_to_dot", "pomset_to_dot", "gchor_to_dot", "quote", "state_key"]

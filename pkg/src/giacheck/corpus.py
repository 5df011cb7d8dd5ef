"""Seeded random choreographies and the cross-validation properties run on them."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

from .analysis import DEFAULT_STATE_CAP, check_well_formed, explore_buffered_system
from .pomsets import is_well_formed
from .gchor import Branch, Empty, GChor, Interaction, Par, Seq, depth, participants, render_gchor
from .gia import Gia, gia_isomorphic, is_isomorphism, tensor
from .projection import language_equivalent, project, strip_tau

PARTICIPANT_NAMES = "ABCD"
MESSAGE_NAMES = "mnk"


@dataclass(frozen=True)
class CorpusConfig:
    seed: int = 1
    count: int = 200
    max_depth: int = 4
    max_participants: int = 4
    max_messages: int = 3
    state_cap: int = DEFAULT_STATE_CAP


def random_gchor(rng: random.Random, max_depth: int = 4, max_participants: int = 4, max_messages: int = 3) -> GChor:
    """A random term of depth at most ``max_depth``.

    Operators are picked uniformly; a small share of choices duplicate one
    side (``g + g``), which the oracle must reject.
    """
    names = PARTICIPANT_NAMES[:max_participants]
    msgs = MESSAGE_NAMES[:max_messages]

    def leaf():
        if rng.random() < 0.06:
            return Empty()
        a, b = rng.sample(names, 2)
        return Interaction(a, rng.choice(msgs), b)

    def gen(d):
        if d == 0 or rng.random() < 0.3:
            return leaf()
        op = rng.choice((Seq, Par, Branch))
        left = gen(d - 1)
        if op is Branch and rng.random() < 0.05:
            return Branch(left, left)
        return op(left, gen(d - 1))

    return gen(max_depth)


def generate_corpus(config: CorpusConfig) -> list[GChor]:
    rng = random.Random(config.seed)
    return [
        random_gchor(rng, config.max_depth, config.max_participants, config.max_messages)
        for _ in range(config.count)
    ]


# -- properties ---------------------------------------------------------------


def prop_agreement(g: GChor, state_cap: int = DEFAULT_STATE_CAP) -> str | None:
    v = check_well_formed(g, exhaustive=False)
    if v.well_formed != v.oracle_well_formed:
        return f"GIA says {v.well_formed}, semantics says {v.oracle_well_formed} ({v.oracle_detail})"
    return None


def prop_language(g: GChor, state_cap: int = DEFAULT_STATE_CAP) -> str | None:
    for p in sorted(participants(g)):
        raw = project(g, p).automaton
        if not language_equivalent(raw, strip_tau(raw)):
            return f"stripping changes the language of the projection on {p}"
    return None


def _commutes(a: Gia, b: Gia) -> bool:
    ab, ba = tensor(a, b), tensor(b, a)
    return is_isomorphism(ab, ba, lambda s: (s[1], s[0])) or gia_isomorphic(ab, ba)


def _associates(a: Gia, b: Gia, c: Gia) -> bool:
    left, right = tensor(tensor(a, b), c), tensor(a, tensor(b, c))
    witness = lambda s: (s[0][0], (s[0][1], s[1]))  # noqa: E731
    return is_isomorphism(left, right, witness) or gia_isomorphic(left, right)


def sampled_triple(g: GChor) -> tuple[str, str, str] | None:
    """Three participants of ``g`` picked by an RNG seeded with the term's text."""
    names = sorted(participants(g))
    if len(names) < 3:
        return None
    return tuple(random.Random(render_gchor(g)).sample(names, 3))


def prop_algebra(g: GChor, state_cap: int = DEFAULT_STATE_CAP) -> str | None:
    """⊗ commutes and associates on a sampled triple of stripped projections.

    The natural bijection (swapping or re-nesting pair states) is tried first
    as an explicit isomorphism; the general search only runs if it fails.
    """
    triple = sampled_triple(g)
    if triple is None:
        return None
    a, b, c = (strip_tau(project(g, p).automaton) for p in triple)
    if not _commutes(a, b):
        return "⊗ does not commute on " + "".join(triple[:2])
    if not _associates(a, b, c):
        return "⊗ does not associate on " + "".join(triple)
    return None


def prop_execution(g: GChor, state_cap: int = DEFAULT_STATE_CAP) -> str | None:
    if not check_well_formed(g, exhaustive=False).well_formed:
        return None
    run = explore_buffered_system(g, state_cap)
    if run.inconclusive:
        return None
    if not (run.deadlock_free and run.orphan_free):
        return f"well-formed but the buffered run gets stuck (deadlock_free={run.deadlock_free}, orphan_free={run.orphan_free})"
    return None


PROPERTIES: dict[str, Callable[[GChor, int], str | None]] = {
    "agreement": prop_agreement,
    "language": prop_language,
    "algebra": prop_algebra,
    "execution": prop_execution,
}


def algebra_triples(g: GChor) -> int:
    return int(sampled_triple(g) is not None)


# -- shrinking ----------------------------------------------------------------


def _candidates(g: GChor):
    if isinstance(g, (Seq, Par, Branch)):
        yield g.left
        yield g.right
        for left in _candidates(g.left):
            yield type(g)(left, g.right)
        for right in _candidates(g.right):
            yield type(g)(g.left, right)
    elif isinstance(g, Interaction):
        yield Empty()


def shrink(g: GChor, fails: Callable[[GChor], bool]) -> GChor:
    """Greedy shrink: keep taking the first smaller term that still fails."""
    improved = True
    while improved:
        improved = False
        for cand in _candidates(g):
            if fails(cand):
                g = cand
                improved = True
                break
    return g


# -- driver -------------------------------------------------------------------


@dataclass
class CorpusReport:
    config: CorpusConfig
    counts: dict[str, list[int]] = field(default_factory=dict)
    failures: list[tuple[int, str, str, str, str]] = field(default_factory=list)
    well_formed: int = 0
    algebra_checks: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures

    def render(self) -> str:
        c = self.config
        lines = [
            f"corpus seed={c.seed} count={c.count} max_depth={c.max_depth} "
            f"max_participants={c.max_participants} max_messages={c.max_messages}",
            f"well-formed instances: {self.well_formed}/{c.count}",
            f"algebra triples checked: {self.algebra_checks}",
        ]
        for name in PROPERTIES:
            passed, failed = self.counts.get(name, [0, 0])
            lines.append(f"{name}: {passed} passed, {failed} failed")
        for index, name, term, reason, small in self.failures:
            lines.append(f"FAIL #{index} {name}: {reason}")
            lines.append(f"  term:     {term}")
            lines.append(f"  shrunk:   {small}")
        lines.append("result: " + ("PASS" if self.ok else "FAIL"))
        return "\n".join(lines) + "\n"


def run_corpus(config: CorpusConfig, properties: dict | None = None) -> CorpusReport:
    properties = PROPERTIES if properties is None else properties
    report = CorpusReport(config, counts={name: [0, 0] for name in properties})
    for index, g in enumerate(generate_corpus(config)):
        if is_well_formed(g):
            report.well_formed += 1
        report.algebra_checks += algebra_triples(g)
        for name, prop in properties.items():
            reason = prop(g, config.state_cap)
            if reason is None:
                report.counts[name][0] += 1
                continue
            report.counts[name][1] += 1
            small = shrink(g, lambda h: prop(h, config.state_cap) is not None)
            report.failures.append((index, name, render_gchor(g), reason, render_gchor(small)))
    return report


__all__ = [
    "CorpusConfig",
    "CorpusReport",
    "random_gchor",
    "generate_corpus",
    "run_corpus",
    "shrink",
    "PROPERTIES",
    "depth",
]

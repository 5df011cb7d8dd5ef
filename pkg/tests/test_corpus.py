import random

from giacheck.corpus import (
    PROPERTIES,
    CorpusConfig,
    generate_corpus,
    random_gchor,
    run_corpus,
    sampled_triple,
    shrink,
)
from giacheck.analysis import check_well_formed
from giacheck.gchor import Branch, Interaction, Par, depth, parse_gchor, participants, render_gchor
from giacheck.pomsets import is_well_formed


def test_generation_is_seeded_and_bounded():
    config = CorpusConfig(seed=4, count=60, max_depth=3, max_participants=3, max_messages=2)
    corpus = generate_corpus(config)
    assert corpus == generate_corpus(config)
    assert corpus != generate_corpus(CorpusConfig(seed=5, count=60, max_depth=3, max_participants=3, max_messages=2))
    for g in corpus:
        assert depth(g) <= 3
        assert participants(g) <= set("ABC")
        assert all(x.message in "mn" for x in _interactions(g))


def _interactions(g):
    if isinstance(g, Interaction):
        yield g
    elif hasattr(g, "left"):
        yield from _interactions(g.left)
        yield from _interactions(g.right)


def test_duplicated_choices_are_ill_formed_both_ways():
    rng = random.Random(0)
    seen = 0
    for _ in range(400):
        g = random_gchor(rng)
        if isinstance(g, Branch) and g.left == g.right and participants(g):
            seen += 1
            assert not is_well_formed(g)
            assert not check_well_formed(g).well_formed
    assert seen > 0


def test_sampled_triple_is_deterministic():
    g = parse_gchor("A->B:m ; B->C:n ; C->D:k")
    assert sampled_triple(g) == sampled_triple(g)
    assert len(set(sampled_triple(g))) == 3
    assert sampled_triple(parse_gchor("A->B:m")) is None


def test_shrink_finds_small_reproducer():
    g = parse_gchor("C->D:k ; (A->B:m | A->B:m) + B->C:n")
    small = shrink(g, lambda h: "A->B:m | A->B:m" in render_gchor(h))
    assert small == Par(Interaction("A", "m", "B"), Interaction("A", "m", "B"))


def test_failures_are_reported_with_reproducer():
    def never_par(g, cap):
        return "contains a parallel composition" if "|" in render_gchor(g) else None

    report = run_corpus(CorpusConfig(seed=2, count=30, max_depth=3), {"no-par": never_par})
    assert not report.ok
    text = report.render()
    assert "FAIL #" in text and text.endswith("result: FAIL\n")
    for _, _, term, _, small in report.failures:
        assert "|" in small and len(small) <= len(term)
        assert parse_gchor(small).__class__ is Par or "|" in small


def test_properties_pass_on_a_small_corpus():
    report = run_corpus(CorpusConfig(seed=3, count=40, max_depth=3))
    assert report.ok, report.render()
    assert set(report.counts) == set(PROPERTIES)

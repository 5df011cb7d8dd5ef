"""Acceptance criteria 1 to 7, one test each.

Every test prints a single ``criterion N: PASS|FAIL`` line (shown even when
output capture is on) so that ``pytest tests/test_acceptance.py -s`` or a
plain ``pytest -v`` run reads as a checklist.
"""

import time
from contextlib import contextmanager

import pytest

from giacheck.actions import TAU, parse_label
from giacheck.analysis import (
    branching_error_states,
    check_well_formed,
    error_states,
    explore_buffered_system,
    parallel_error_states,
    system_error_states,
    system_product,
)
from giacheck.cli import main
from giacheck.corpus import CorpusConfig, generate_corpus, run_corpus
from giacheck.gia import Transition
from giacheck.projection import language_equivalent, project, removable_tau, stripped_projection

from figures import (
    BUYER,
    ERR_A,
    ERR_AB,
    ERR_B,
    ERR_B2,
    ERR_C,
    G,
    G0,
    G1,
    G2,
    G3,
    G_PRIME,
    ONLINE_SHOPPING,
    PRIME_D,
    PRIME_E,
    PRIME_F,
    REMOVE_A,
    REMOVE_C,
    remove_b,
)

L = parse_label
CORPUS = CorpusConfig(seed=1, count=500, max_depth=4, max_participants=4, max_messages=3)


@pytest.fixture
def criterion(capsys):
    @contextmanager
    def run(number, title):
        ok = False
        try:
            yield
            ok = True
        finally:
            with capsys.disabled():
                print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {title}")

    return run


@pytest.fixture(scope="module")
def corpus_run():
    start = time.perf_counter()
    report = run_corpus(CORPUS)
    return report, time.perf_counter() - start


def _details(witnesses):
    return {w.detail.split(":")[0] for w in witnesses}


def test_criterion_1_figure_fixtures(criterion):
    with criterion(1, "figure fixtures, exact, under 1 s"):
        start = time.perf_counter()

        v = check_well_formed(G, buffered=False)
        assert v.well_formed and v.witnesses == []
        _, factors, prod = system_product(G)
        assert len(prod.states) == 4
        assert sorted(str(t.label) for t in prod.transitions) == ["AB!?m", "AB!?n", "BC!?x", "BC!?y"]
        assert system_error_states(factors, prod) == []
        assert branching_error_states(G) == []

        assert not check_well_formed(G_PRIME, buffered=False).well_formed
        raw = {w.states[0] for w in system_error_states([PRIME_D, PRIME_E, PRIME_F])}
        assert ("v0", "u1", "w1") in raw

        assert {w.states[0] for w in error_states(ERR_A, ERR_B)} == {("v1", "u1")}
        assert {w.states[0] for w in error_states(ERR_A, ERR_B2)} == {("v0", "u0'")}
        assert {w.states[0] for w in error_states(ERR_AB, ERR_C)} == {("v1", "u1")}

        _, _, prod0 = system_product(G0)
        assert [w.states[0] for w in parallel_error_states(G0)] == [prod0.initial]

        assert _details(branching_error_states(G1)) == {"condition 1"}
        assert _details(branching_error_states(G2)) == {"condition 2"}
        assert _details(branching_error_states(G3)) == {"condition 2", "condition 3"}
        for g in (G0, G1, G2, G3):
            assert not check_well_formed(g, buffered=False).well_formed

        assert check_well_formed(ONLINE_SHOPPING, buffered=False).well_formed
        assert language_equivalent(project(ONLINE_SHOPPING, "B").automaton, BUYER)
        assert language_equivalent(stripped_projection(ONLINE_SHOPPING, "B"), BUYER)

        assert time.perf_counter() - start < 1.0


def test_criterion_2_removability(criterion):
    def tau(src, dst):
        return Transition(src, TAU, dst)

    with criterion(2, "six τ-removability verdicts"):
        verdicts = [
            removable_tau(REMOVE_A, tau("v", "vt")),
            removable_tau(REMOVE_A, tau("v", "vt2")),
            not removable_tau(REMOVE_C, tau("v", "vt")),
            removable_tau(remove_b("AB!m", "AC!n"), tau("v", "vt")),
            removable_tau(remove_b("BA?m", "CA?n"), tau("v", "vt")),
            not removable_tau(PRIME_E, tau("u0", "u1")),
        ]
        assert verdicts == [True] * 6


def test_criterion_3_agreement(criterion, corpus_run):
    report, elapsed = corpus_run
    with criterion(3, f"GIA verdict equals pomset oracle on {CORPUS.count} terms ({elapsed:.1f} s)"):
        assert report.config.count >= 500
        assert report.counts["agreement"] == [CORPUS.count, 0], report.render()
        assert elapsed < 60.0


def test_criterion_4_language_equivalence(criterion, corpus_run):
    report, _ = corpus_run
    with criterion(4, "projections and their stripped forms are language-equivalent"):
        assert report.counts["language"] == [CORPUS.count, 0], report.render()


def test_criterion_5_algebra(criterion, corpus_run):
    report, _ = corpus_run
    with criterion(5, f"⊗ commutes and associates on {report.algebra_checks} sampled triples"):
        assert report.algebra_checks >= 100
        assert report.counts["algebra"] == [CORPUS.count, 0], report.render()


def test_criterion_6_execution_soundness(criterion, corpus_run):
    report, _ = corpus_run
    with criterion(6, f"{report.well_formed} well-formed terms run without deadlock or orphans"):
        assert report.counts["execution"] == [CORPUS.count, 0], report.render()
        # the corpus property tolerates a capped run; here every run must finish
        checked = 0
        for g in generate_corpus(CORPUS):
            if check_well_formed(g, buffered=False, exhaustive=False).well_formed:
                run = explore_buffered_system(g, CORPUS.state_cap)
                assert not run.inconclusive
                assert run.deadlock_free and run.orphan_free
                checked += 1
        assert checked == report.well_formed > 0


def test_criterion_7_determinism(criterion, capsys):
    with criterion(7, "two corpus runs with seed 1, count 200 are byte-identical"):
        outputs = []
        for _ in range(2):
            status = main(["corpus", "--seed=1", "--count=200"])
            outputs.append((status, capsys.readouterr().out.encode()))
        assert outputs[0] == outputs[1]
        assert outputs[0][0] == 0

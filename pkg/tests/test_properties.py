"""Property tests over random choreographies."""

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from giacheck.analysis import check_well_formed, error_states, named_stripped_projection, system_product
from giacheck.gchor import Branch, Empty, Par, Seq, parse_gchor, participants, render_gchor, subterms_with_paths
from giacheck.gia import gia_isomorphic, tensor, validate_gia
from giacheck.pomsets import Bottom, pomset_isomorphic, semantics
from giacheck.projection import language_equivalent, project, strip_tau

from strategies import gchors

SETTINGS = settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def same_family(a, b) -> bool:
    if isinstance(a, Bottom) or isinstance(b, Bottom):
        return isinstance(a, Bottom) and isinstance(b, Bottom)
    return len(a.pomsets) == len(b.pomsets) and all(
        any(pomset_isomorphic(r, q) for q in b.pomsets) for r in a.pomsets
    )


@SETTINGS
@given(gchors(12))
def test_render_parse_round_trip(g):
    assert parse_gchor(render_gchor(g)) == g


@SETTINGS
@given(gchors(6), gchors(6))
def test_participants_of_compositions(g1, g2):
    for op in (Seq, Par, Branch):
        assert participants(op(g1, g2)) == participants(g1) | participants(g2)


@SETTINGS
@given(gchors(5), gchors(5))
def test_par_commutes_semantically(g1, g2):
    assert same_family(semantics(Par(g1, g2)), semantics(Par(g2, g1)))


@SETTINGS
@given(gchors(6))
def test_empty_prefix_is_neutral(g):
    assert same_family(semantics(Seq(Empty(), g)), semantics(g))


@SETTINGS
@given(gchors(6))
def test_duplicated_choice_is_ill_formed(g):
    if participants(g):
        assert isinstance(semantics(Branch(g, g)), Bottom)
        assert not check_well_formed(Branch(g, g), exhaustive=False).well_formed


@SETTINGS
@given(gchors(8))
def test_projection_is_valid_and_language_preserved_by_stripping(g):
    for p in sorted(participants(g)):
        raw = project(g, p).automaton
        assert validate_gia(raw) == []
        assert raw.group == {p}
        stripped = strip_tau(raw)
        assert language_equivalent(raw, stripped)
        assert gia_isomorphic(strip_tau(stripped), stripped)


@SETTINGS
@given(gchors(7), st.data())
def test_tensor_commutes_and_associates(g, data):
    names = sorted(participants(g))
    if len(names) < 3:
        return
    a, b, c = (strip_tau(project(g, p).automaton) for p in data.draw(st.permutations(names))[:3])
    ab = tensor(a, b)
    assert validate_gia(ab) == []
    assert gia_isomorphic(ab, tensor(b, a))
    assert gia_isomorphic(tensor(ab, c), tensor(a, tensor(b, c)))


@SETTINGS
@given(gchors(7), st.data())
def test_error_states_symmetric(g, data):
    names = sorted(participants(g))
    if len(names) < 2:
        return
    p, q = data.draw(st.permutations(names))[:2]
    g1, g2 = named_stripped_projection(g, p), named_stripped_projection(g, q)
    forward = {(w.states[0], w.label) for w in error_states(g1, g2)}
    backward = {((w.states[0][1], w.states[0][0]), w.label) for w in error_states(g2, g1)}
    assert forward == backward


@SETTINGS
@given(gchors(7))
def test_witness_trails_replay(g):
    v = check_well_formed(g)
    paths = dict(subterms_with_paths(g))
    for w in v.witnesses:
        _, _, prod = system_product(g if w.kind == "unmatched-output" else paths[w.subterm])
        s = prod.initial
        for t in w.trail:
            assert t in prod.transitions and t.source == s
            s = t.target
        assert s == w.states[0]


@SETTINGS
@given(gchors(7))
def test_verdict_agrees_with_semantics(g):
    v = check_well_formed(g)
    assert v.well_formed == v.oracle_well_formed
    assert v.well_formed == (not v.witnesses)

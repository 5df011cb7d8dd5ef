from giacheck.analysis import named_stripped_projection, system_product
from giacheck.dot import gchor_to_dot, gia_to_dot, pomset_to_dot, quote
from giacheck.pomsets import semantics

from figures import G, PRIME_E, ONLINE_SHOPPING


def test_quote_escapes():
    assert quote('a"b\\c') == '"a\\"b\\\\c"'


def test_gia_dot_shows_tau_and_legend():
    text = gia_to_dot(PRIME_E, "E")
    assert text.startswith('digraph "E" {')
    assert 'label="τ", style=dashed' in text
    assert 'label="DE?m"' in text
    assert "group: E\\linputs: DE?m\\l" in text
    assert text.endswith("}\n")


def test_gia_dot_ordering_is_stable():
    prod = system_product(G)[2]
    text = gia_to_dot(prod)
    assert text == gia_to_dot(prod)
    edges = [line for line in text.splitlines() if "->" in line]
    assert [e.split("label=")[1] for e in edges] == ['"AB!?m"];', '"AB!?n"];', '"BC!?x"];', '"BC!?y"];']


def test_projection_dot_names_states_by_participant():
    text = gia_to_dot(named_stripped_projection(ONLINE_SHOPPING, "H"))
    assert 'label="H0", shape=doublecircle' in text


def test_pomset_dot():
    r = semantics(G).pomsets[0]
    text = pomset_to_dot(r)
    assert text.count(" -> ") == len(r.covering_edges())
    assert 'e0 [label="AB!m"];' in text


def test_gchor_dot():
    text = gchor_to_dot(G)
    assert 'n0 [label="+", shape=circle];' in text
    assert text.count(" -> ") == 6

"""Automata and choreographies drawn in the paper's figures, transcribed by hand.

State names follow the drawings so that assertions can quote them.
"""

from giacheck.actions import TAU, parse_label
from giacheck.gchor import parse_gchor
from giacheck.gia import Gia


def gia(initial, group, edges):
    """Build a GIA from ``(source, label, target)`` triples; ``"t"`` stands for τ."""
    return Gia.build(initial, set(group), [(a, TAU if lab == "t" else parse_label(lab), b) for a, lab, b in edges])


# online shopping: buyer, seller, shipper
ONLINE_SHOPPING = parse_gchor(
    """
    B->S:request ;
    ( S->B:offer ; B->S:pay ; S->H:deliveryInfo ; H->B:delivery
    + S->B:notinStock ; S->H:noInfo )
    """
)

# buyer automaton from the introduction
BUYER = gia(
    "v0",
    "B",
    [
        ("v0", "BS!request", "v1"),
        ("v1", "SB?offer", "v2"),
        ("v2", "BS!pay", "v3"),
        ("v3", "t", "v4"),
        ("v4", "HB?delivery", "v5"),
        ("v1", "SB?notinStock", "v6"),
        ("v6", "t", "v5"),
    ],
)

# three composable automata and their products
PRODUCT_A = gia("v0", "A", [("v0", "AC!m", "v1")])
PRODUCT_B = gia("u0", "B", [("u0", "BC!n", "u1")])
PRODUCT_C = gia("w0", "C", [("w0", "AC?m", "w1"), ("w1", "BC?n", "w2")])

# error states, top row
ERR_A = gia("v0", "A", [("v0", "AB!m", "v1"), ("v1", "AB!n", "v2")])
ERR_B = gia("u0", "B", [("u0", "AB?m", "u1"), ("u0", "AB?n", "u1")])
ERR_B2 = gia("u0'", "B", [("u0'", "AB?n", "u1'"), ("u1'", "AB?m", "u2'")])
# error states, bottom row
ERR_AB = gia("v0", "AB", [("v0", "AC!m", "v1"), ("v1", "BC!y", "v2"), ("v2", "t", "v3"), ("v2", "AC!x", "v3")])
ERR_C = gia("u0", "C", [("u0", "AC?m", "u1"), ("u1", "AC?x", "u2"), ("u2", "BC?y", "u3")])

# spurious error states: G and its raw projections
G = parse_gchor("A->B:m ; B->C:x + A->B:n ; B->C:y")
SPURIOUS_A = gia("v0", "A", [("v0", "AB!m", "v1"), ("v0", "AB!n", "v2"), ("v1", "t", "v3"), ("v2", "t", "v3")])
SPURIOUS_B = gia("u0", "B", [("u0", "AB?m", "u1"), ("u0", "AB?n", "u2"), ("u1", "BC!x", "u3"), ("u2", "BC!y", "u3")])
SPURIOUS_C = gia("w0", "C", [("w0", "t", "w1"), ("w0", "t", "w2"), ("w1", "BC?x", "w3"), ("w2", "BC?y", "w3")])

# G' and its projections
G_PRIME = parse_gchor("D->E:m + D->F:n")
PRIME_D = gia("v0", "D", [("v0", "DE!m", "v1"), ("v0", "DF!n", "v1")])
PRIME_E = gia("u0", "E", [("u0", "DE?m", "u1"), ("u0", "t", "u1")])
PRIME_F = gia("w0", "F", [("w0", "t", "w1"), ("w0", "DF?n", "w1")])

# removability of τ-transitions; alpha is an output of A
REMOVE_A = gia("v", "A", [("v", "t", "vt"), ("v", "t", "vt2"), ("vt", "AB!m", "vend"), ("vt2", "AB!m", "vend")])


def remove_b(alpha: str, beta: str) -> Gia:
    return gia("v", "A", [("v", "t", "vt"), ("v", beta, "vb"), ("vt", alpha, "vend"), ("vb", "t", "vend")])


REMOVE_C = gia("v", "A", [("v", "t", "vt"), ("v", "AB!m", "vt")])

# non well-formed examples
G0 = parse_gchor("A->B:m | A->B:m")
G1 = parse_gchor("A->B:m + A->B:m")
G2 = parse_gchor("C->D:m + D->C:n")
G3 = parse_gchor("(A->B:m ; C->B:n) + (A->B:m ; C->B:n)")

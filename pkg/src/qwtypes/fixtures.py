"""Signatures used throughout the tests, the acceptance suite and the docs."""

from .signature import AllImagePreserving, Symmetric, signature

# unordered binary trees
SIG_UT2 = signature({"leaf": 0, "node": 2}, families=[Symmetric("node")])

# the same quotient written as one explicit swap equation
SIG_UT2_EXPLICIT = signature(
    {"leaf": 0, "node": 2},
    explicit=[{"vars": 2, "left": {"constructor": "node", "map": [0, 1]}, "right": {"constructor": "node", "map": [1, 0]}}],
)

# hereditarily finite sets with at most two elements per level
SIG_HF2 = signature({"empty": 0, "pair": 2}, families=[AllImagePreserving()])

# at most three elements per level
SIG_HF3 = signature({"empty": 0, "triple": 3}, families=[AllImagePreserving()])

# plain W-type: ordered binary trees
SIG_ORD2 = signature({"leaf": 0, "node": 2})

# explicit equations across two constructors: b is commutative and b(x, y) = t(x, y, y)
SIG_MIX = signature(
    {"z": 0, "b": 2, "t": 3},
    explicit=[
        {"vars": 2, "left": {"constructor": "b", "map": [0, 1]}, "right": {"constructor": "b", "map": [1, 0]}},
        {"vars": 2, "left": {"constructor": "b", "map": [0, 1]}, "right": {"constructor": "t", "map": [0, 1, 1]}},
    ],
)

FIXTURES = {
    "SIG-UT2": SIG_UT2,
    "SIG-UT2-EXPLICIT": SIG_UT2_EXPLICIT,
    "SIG-HF2": SIG_HF2,
    "SIG-HF3": SIG_HF3,
    "SIG-ORD2": SIG_ORD2,
    "SIG-MIX": SIG_MIX,
}

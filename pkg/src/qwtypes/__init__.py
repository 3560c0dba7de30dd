"""Image-preserving QW-types at finitary scale.

Build the quotient stages of a polynomial signature subject to
image-preserving equations, decide equality, compute rank invariants and
fold into finite algebras.
"""

__version__ = "0.1.0"

from .algebra import (
    FiniteAlgebra,
    check_rules,
    check_satisfies,
    count_homomorphisms,
    fold,
    is_homomorphism,
    ordered_to_unordered,
    random_satisfying_algebra,
    stage_algebra,
)
from .canonical import canon_extensional, canon_multiset, crosscheck
from .errors import *  # noqa: F401,F403
from .hered import EMPTY, OVERFLOW, HfSet, approx_fold, check_ip_algebra, hf_build, hf_enumerate, hf_fold, hf_rank
from .ordinal_tools import aleph, cantor_pair, cantor_unpair, f_surjection, omega_tuple_code, omega_tuple_decode, order_type
from .signature import (
    AllImagePreserving,
    Equation,
    Polynomial,
    RuleSet,
    Signature,
    Symmetric,
    expand_family,
    load_signature,
    signature,
    validate_equation,
    validate_polynomial,
)
from .stages import Caps, StageFamily, build_stages
from .terms import Term, enumerate_terms, parse_term, term_rank, tower

"""The ten acceptance criteria, one test each, with their runtime budgets.

Each test prints a single PASS/FAIL line (shown even under capture).
"""

import itertools
import math
import random
import time
from contextlib import contextmanager

import pytest

from qwtypes.algebra import count_homomorphisms, fold, is_homomorphism, ordered_to_unordered, random_satisfying_algebras
from qwtypes.canonical import canon_extensional, canonical_form
from qwtypes.errors import NotImagePreserving
from qwtypes.fixtures import FIXTURES, SIG_HF2, SIG_ORD2, SIG_UT2
from qwtypes.hered import OVERFLOW, approx_fold, hf_enumerate
from qwtypes.ordinal_tools import (
    SurjectionTables,
    aleph,
    cantor_pair,
    cantor_unpair,
    omega_tuple_code,
    omega_tuple_decode,
    order_type,
)
from qwtypes.signature import AllImagePreserving, Symmetric, expand_family, validate_equation, validate_polynomial
from qwtypes.stages import build_stages, check_equation_respect
from qwtypes.terms import enumerate_terms, tower

from oracles import all_map_pairs_equal_image, classes_by_relation, raw_terms, same_extension, same_multiset


@pytest.fixture
def criterion(capsys):
    @contextmanager
    def run(number, title, budget=None):
        start = time.perf_counter()
        status, note = "FAIL", ""
        try:
            yield
            elapsed = time.perf_counter() - start
            note = f" ({elapsed:.2f}s" + (f", budget {budget}s)" if budget else ")")
            if budget is not None:
                assert elapsed < budget, f"took {elapsed:.2f}s, budget {budget}s"
            status = "PASS"
        finally:
            with capsys.disabled():
                print(f"\ncriterion {number:>2} {status}: {title}{note}")

    return run


def _raw(t, poly):
    return (poly.name(t.ctor), *[_raw(c, poly) for c in t.children])


def test_c01_partition_oracle(criterion):
    with criterion(1, "stage sizes [0,1,2,4,11] and partition = oracle partition on rank <= 3", budget=5):
        for sig, related in ((SIG_UT2, lambda s, t: same_multiset(s, t, {"node"})), (SIG_HF2, same_extension)):
            poly = sig.poly
            sf = build_stages(poly, sig.rules, 4)
            assert sf.stage_sizes == [0, 1, 2, 4, 11]
            terms = enumerate_terms(poly, 3)
            canon = canonical_form(sig.rules, poly)
            raw = [_raw(t, poly) for t in terms]
            oracle = classes_by_relation(raw, related)
            oracle_id = {r: i for i, cls in enumerate(oracle) for r in cls}
            by_stage, by_canon, by_oracle = {}, {}, {}
            for t, r in zip(terms, raw):
                by_stage.setdefault(sf.canonicalize(t), set()).add(r)
                by_canon.setdefault(canon(t), set()).add(r)
                by_oracle.setdefault(oracle_id[r], set()).add(r)
            parts = [sorted(map(sorted, d.values())) for d in (by_stage, by_canon, by_oracle)]
            assert parts[0] == parts[1] == parts[2]
            assert len(by_stage) == 11


@pytest.fixture(scope="module")
def q4():
    return {name: build_stages(sig.poly, sig.rules, 4) for name, sig in FIXTURES.items()}


def test_c02_tc_ranks(criterion):
    with criterion(2, "{rank(y) : y in TC(x)} = rank(x) for every x in Q(4) of every fixture", budget=1):
        for sig in FIXTURES.values():
            sf = build_stages(sig.poly, sig.rules, 4)
            for x in sf.ids(4):
                assert {sf.rank(y) for y in sf.transitive_closure(x)} == set(range(sf.rank(x)))


def test_c03_union_of_r_n(criterion, q4):
    with criterion(3, "union of R_n(x), 1 <= n <= 4, = rank(x) for every x in Q(4)"):
        for sf in q4.values():
            for x in sf.ids(4):
                got = set().union(*(sf.r_n(x, n) for n in range(1, 5)))
                assert got == set(range(sf.rank(x)))


def test_c04_surjection_image(criterion, q4):
    with criterion(4, "image(F_{x,n}) = R_n(x) + {0} for x in Q(4), 1 <= n <= 4, kappa = aleph"):
        for sf in q4.values():
            tables = SurjectionTables(sf)
            assert tables.kappa == aleph(sf.poly)
            for x in sf.ids(4):
                for n in range(1, 5):
                    table = tables.table(x, n)
                    assert len(table) == tables.kappa**n
                    assert set(table.values()) == set(sf.r_n(x, n)) | {0}


def test_c05_equation_respect(criterion, q4):
    with criterion(5, "every equation instance over Q(3) lands in one class of Q(4)"):
        checked = 0
        for name, sf in q4.items():
            eqs = list(sf.rules.explicit)
            # the family rules are checked too, through their literal expansions
            for a in sorted(sf.rules.symmetric_ctors):
                eqs += expand_family(sf.poly, Symmetric(a))
            if sf.rules.all_image_preserving:
                eqs += expand_family(sf.poly, AllImagePreserving(), 64)
            assert check_equation_respect(sf, eqs, 4) == [], name
            checked += len(eqs)
        assert checked > 0


def test_c06_universal_property(criterion):
    with criterion(6, ">= 100 random satisfying algebras per fixture: fold is a homomorphism, unique at rank 2", budget=30):
        for name, sig in FIXTURES.items():
            sf = build_stages(sig.poly, sig.rules, 4)
            count = 0
            for alg in random_satisfying_algebras(sig.poly, sig.rules, 100, max_carrier=3, seed=2024):
                assert alg.carrier <= 3
                h = fold(sf, alg)
                assert is_homomorphism(h, sf, alg), name
                assert count_homomorphisms(sf, alg, 2) == 1, name
                count += 1
            assert count == 100


def test_c07_sets_and_stages(criterion):
    with criterion(7, "11 small sets of rank <= 3 biject with HF2 classes; approx_fold restricts monotonically"):
        poly = SIG_HF2.poly
        values = hf_enumerate(poly, 3)
        assert len(values) == 11
        sf = build_stages(poly, SIG_HF2.rules, 4)
        to_set = {x: canon_extensional(sf.representative_term(x), poly) for x in sf.ids(4)}
        assert set(to_set.values()) == set(values)
        assert len(set(to_set.values())) == len(to_set)
        for x, s in to_set.items():
            assert s.rank == sf.rank(x)
            assert set(s.elements) == {to_set[y] for y in sf.image(x)}
            for t in sf.member_terms(x):
                assert canon_extensional(t, poly) is s
        previous = {}
        changed = 0
        for alpha in range(6):
            cur = approx_fold(sf, alpha)
            for x, v in previous.items():
                if v is not OVERFLOW and cur[x] is not v:
                    changed += 1
            for x, v in cur.items():
                assert v is (to_set[x] if sf.rank(x) < alpha else OVERFLOW)
            previous = cur
        assert changed == 0


def test_c08_ordered_to_unordered(criterion):
    with criterion(8, "ordered terms of rank <= 4 keep their rank and cover the unordered classes; rank(t_beta) = beta"):
        poly = SIG_ORD2.poly
        assert poly == SIG_UT2.poly
        sf = build_stages(poly, SIG_UT2.rules, 5)
        terms = enumerate_terms(poly, 4)
        assert len(terms) == len(raw_terms({"leaf": 0, "node": 2}, 3)) ** 2 + 1
        hit = set()
        for t in terms:
            report = ordered_to_unordered(sf, t)
            assert report.preserved
            hit.add(report.class_id)
        assert hit == set(sf.ids(5))
        for beta in range(9):
            t = tower(poly, "node", beta)
            assert t.rank == beta
            if beta <= 4:
                assert sf.rank(sf.canonicalize(t)) == beta
        assert sf.depth == 5


def test_c09_validator(criterion):
    with criterion(9, "validator rejects unequal images; expansions on arities <= 3 validate with oracle counts"):
        tree = validate_polynomial({"leaf": 0, "node": 2})
        bad = {"vars": 2, "left": {"constructor": "node", "map": [0, 0]}, "right": {"constructor": "node", "map": [0, 1]}}
        with pytest.raises(NotImagePreserving):
            validate_equation(tree, bad)
        for arity in range(4):
            poly = validate_polynomial({"leaf": 0, "node": arity})
            eqs = expand_family(poly, Symmetric("node"))
            assert len(eqs) == math.factorial(arity)
            assert all(validate_equation(poly, e) == e for e in eqs)
        # every set of distinct arities <= 3 small enough for the brute-force count
        swept = 0
        for size in range(1, 5):
            for arities in itertools.combinations(range(4), size):
                s_size = sum(2**k for k in arities)
                if s_size > 9:
                    continue
                poly = validate_polynomial({f"c{k}": k for k in arities})
                eqs = expand_family(poly, AllImagePreserving(), 10**6)
                assert len(eqs) == all_map_pairs_equal_image(list(arities), s_size)
                assert all(validate_equation(poly, e) == e for e in eqs)
                swept += 1
        assert swept == 9


def test_c10_ordinal_tools(criterion):
    with criterion(10, "Cantor pairing and tuple codes round-trip; order_type is strictly increasing"):
        for m in range(256):
            for n in range(256):
                assert cantor_unpair(cantor_pair(m, n)) == (m, n)
        codes = set()
        for length in range(1, 4):
            for xs in itertools.product(range(8), repeat=length):
                code = omega_tuple_code(xs)
                assert omega_tuple_decode(code) == list(xs)
                codes.add(code)
        assert len(codes) == 8 + 8**2 + 8**3
        rng = random.Random(10)
        for _ in range(1000):
            s = {rng.randrange(10_000) for _ in range(rng.randrange(0, 50))}
            beta, theta = order_type(s)
            assert beta == len(s) and set(theta) == s
            assert all(a < b for a, b in zip(theta, theta[1:]))

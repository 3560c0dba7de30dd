"""Finite algebras for a polynomial and the fold out of a stage family.

An algebra on the carrier {0, ..., m-1} stores, per constructor of arity n,
an integer array of shape (m,) * n; a nullary operation is a 0-d array.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .errors import CapExceeded, NotSatisfying, SignatureError, UnsupportedRuleSet
from .signature import Equation, Polynomial, RuleSet
from .stages import StageFamily, UnionFind
from .terms import Term

DEFAULT_CHECK_CAP = 1_000_000


@dataclass(frozen=True, eq=False)
class FiniteAlgebra:
    poly: Polynomial
    carrier: int
    tables: tuple

    def __post_init__(self):
        if len(self.tables) != len(self.poly):
            raise SignatureError("one table per constructor is required")
        fixed = []
        for a, table in zip(self.poly, self.tables):
            table = np.asarray(table, dtype=np.int64)
            shape = (self.carrier,) * self.poly.arity(a)
            if table.shape != shape:
                raise SignatureError(
                    f"table for {self.poly.name(a)!r} has shape {table.shape}, expected {shape}"
                )
            if table.size and (table.min() < 0 or table.max() >= self.carrier):
                raise SignatureError(f"table for {self.poly.name(a)!r} leaves the carrier")
            table.setflags(write=False)
            fixed.append(table)
        object.__setattr__(self, "tables", tuple(fixed))

    def apply(self, a: int, args) -> int:
        return int(self.tables[a][tuple(args)])

    def evaluate(self, t: Term) -> int:
        memo = {}

        def go(s):
            v = memo.get(s)
            if v is None:
                v = memo[s] = self.apply(s.ctor, [go(c) for c in s.children])
            return v

        return go(t)

    @classmethod
    def from_functions(cls, poly: Polynomial, carrier: int, ops: dict) -> "FiniteAlgebra":
        """Tabulate Python callables, keyed by constructor name."""
        tables = []
        for a in poly:
            fn = ops[poly.name(a)]
            n = poly.arity(a)
            table = np.zeros((carrier,) * n, dtype=np.int64)
            for args in itertools.product(range(carrier), repeat=n):
                table[args] = fn(*args)
            tables.append(table)
        return cls(poly, carrier, tuple(tables))

    @classmethod
    def from_json(cls, poly: Polynomial, obj) -> "FiniteAlgebra":
        if not isinstance(obj, dict) or set(obj) != {"carrier", "ops"}:
            raise SignatureError("algebra file needs exactly the keys 'carrier' and 'ops'")
        carrier, ops = obj["carrier"], obj["ops"]
        if isinstance(carrier, bool) or not isinstance(carrier, int) or carrier < 0:
            raise SignatureError("carrier must be a natural number")
        unknown = set(ops) - set(poly.names)
        if unknown:
            raise SignatureError(f"operations for unknown constructors {sorted(unknown)}")
        missing = [n for n in poly.names if n not in ops]
        if missing:
            raise SignatureError(f"no operation given for {missing}")
        return cls(poly, carrier, tuple(ops[n] for n in poly.names))

    def to_json(self) -> dict:
        return {"carrier": self.carrier, "ops": {self.poly.name(a): self.tables[a].tolist() for a in self.poly}}


def load_algebra(path, poly: Polynomial) -> FiniteAlgebra:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SignatureError(f"{path}: invalid JSON ({exc})") from None
    return FiniteAlgebra.from_json(poly, obj)


@dataclass(frozen=True)
class Satisfaction:
    ok: bool
    witness: object = None

    def __bool__(self):
        return self.ok


def check_satisfies(alg: FiniteAlgebra, eqs, cap: int = DEFAULT_CHECK_CAP) -> Satisfaction:
    """Check t(a_e, h.l_e) = t(b_e, h.r_e) for every equation and every h : V_e -> X.

    On failure the witness is ``(equation, h)`` with ``h`` a tuple of values.
    """
    m = alg.carrier
    for e in eqs:
        if m**e.var_count > cap:
            raise CapExceeded(f"{m}^{e.var_count} assignments exceed cap {cap}")
        for h in itertools.product(range(m), repeat=e.var_count):
            left = alg.apply(e.left_ctor, [h[v] for v in e.left_map])
            right = alg.apply(e.right_ctor, [h[v] for v in e.right_map])
            if left != right:
                return Satisfaction(False, (e, h))
    return Satisfaction(True)


def equal_image_violation(alg: FiniteAlgebra):
    """First ((a, f), (c, g)) with image(f) = image(g) but t(a, f) != t(c, g)."""
    seen = {}
    for a in alg.poly:
        for f in itertools.product(range(alg.carrier), repeat=alg.poly.arity(a)):
            key = frozenset(f)
            value = alg.apply(a, f)
            prior = seen.setdefault(key, (value, (a, f)))
            if prior[0] != value:
                return prior[1], (a, f)
    return None


def symmetric_violation(alg: FiniteAlgebra, a: int):
    for f in itertools.product(range(alg.carrier), repeat=alg.poly.arity(a)):
        g = tuple(sorted(f))
        if alg.apply(a, f) != alg.apply(a, g):
            return (a, f), (a, g)
    return None


def check_rules(alg: FiniteAlgebra, rules: RuleSet, cap: int = DEFAULT_CHECK_CAP) -> Satisfaction:
    """Satisfaction of a whole rule set, families included (closed-form checks)."""
    result = check_satisfies(alg, rules.explicit, cap)
    if not result:
        return result
    for a in sorted(rules.symmetric_ctors):
        w = symmetric_violation(alg, a)
        if w:
            return Satisfaction(False, w)
    if rules.all_image_preserving:
        w = equal_image_violation(alg)
        if w:
            return Satisfaction(False, w)
    return Satisfaction(True)


def describe_witness(poly: Polynomial, witness) -> str:
    if witness is None:
        return ""
    first, second = witness
    if isinstance(first, Equation):
        return f"equation {first.describe(poly)} fails at h = {list(second)}"
    (a, f), (c, g) = witness
    return f"{poly.name(a)}{tuple(f)} and {poly.name(c)}{tuple(g)} must agree but differ"


def fold(sf: StageFamily, alg: FiniteAlgebra, check: bool = True) -> dict[int, int]:
    """The unique homomorphism from the truncation into ``alg``, by rank recursion."""
    if check:
        sat = check_rules(alg, sf.rules)
        if not sat:
            raise NotSatisfying(
                "algebra does not satisfy the equations: " + describe_witness(sf.poly, sat.witness),
                sat.witness,
            )
    h = {}
    for x in sf.ids():
        first = None
        for a, children in sf.members[x]:
            value = alg.apply(a, [h[c] for c in children])
            if first is None:
                first = (value, (a, children))
            elif value != first[0]:
                raise NotSatisfying(
                    f"merged pair {first[1]} / {(a, children)} of class {x} folds to {first[0]} and {value}",
                    (first[1], (a, children)),
                )
        h[x] = first[0]
    return h


def is_homomorphism(h, sf: StageFamily, alg: FiniteAlgebra) -> bool:
    """h(class of (a, f)) = t(a, h.f) for every pair with children in Q(depth-1)."""
    try:
        for (a, children), cid in sf.nodes.items():
            if h[cid] != alg.apply(a, [h[c] for c in children]):
                return False
    except (KeyError, IndexError):
        return False
    return True


def count_homomorphisms(sf: StageFamily, alg: FiniteAlgebra, rank_bound: int, cap: int = DEFAULT_CHECK_CAP) -> int:
    """Brute-force count of maps {classes of rank <= rank_bound} -> X obeying the
    homomorphism equation at every pair whose class has rank <= rank_bound."""
    sf.extend(rank_bound + 1)
    n = sf.stage_sizes[rank_bound + 1]
    m = alg.carrier
    if m**n > cap:
        raise CapExceeded(f"{m}^{n} candidate maps exceed cap {cap}")
    if n == 0:
        return 1
    funcs = np.indices((m,) * n, dtype=np.int64).reshape(n, -1)
    ok = np.ones(funcs.shape[1], dtype=bool)
    for (a, children), cid in sf.nodes.items():
        if sf.rank(cid) > rank_bound:
            continue
        rhs = alg.tables[a][tuple(funcs[c] for c in children)]
        ok &= funcs[cid] == rhs
    return int(ok.sum())


def _cell_partition(poly: Polynomial, rules: RuleSet, m: int, cap: int):
    """Union-find over table cells (a, f) linking cells the rules force equal."""
    cells = [(a, f) for a in poly for f in itertools.product(range(m), repeat=poly.arity(a))]
    if len(cells) > cap:
        raise CapExceeded(f"{len(cells)} table cells exceed cap {cap}")
    index = {c: i for i, c in enumerate(cells)}
    uf = UnionFind(len(cells))
    for e in rules.explicit:
        variables = sorted(e.image)
        if m ** len(variables) > cap:
            raise CapExceeded(f"{m}^{len(variables)} assignments exceed cap {cap}")
        for values in itertools.product(range(m), repeat=len(variables)):
            g = dict(zip(variables, values))
            uf.union(
                index[(e.left_ctor, tuple(g[v] for v in e.left_map))],
                index[(e.right_ctor, tuple(g[v] for v in e.right_map))],
            )
    for a, f in cells:
        if a in rules.symmetric_ctors:
            uf.union(index[(a, f)], index[(a, tuple(sorted(f)))])
    if rules.all_image_preserving:
        first = {}
        for i, (_, f) in enumerate(cells):
            uf.union(i, first.setdefault(frozenset(f), i))
    return cells, uf


def random_algebra(poly: Polynomial, carrier: int, rng: np.random.Generator) -> FiniteAlgebra:
    tables = tuple(rng.integers(0, carrier, size=(carrier,) * poly.arity(a)) for a in poly)
    return FiniteAlgebra(poly, carrier, tables)


def random_satisfying_algebra(
    poly: Polynomial, rules: RuleSet, carrier: int, rng: np.random.Generator, cap: int = DEFAULT_CHECK_CAP
) -> FiniteAlgebra:
    """Uniform sample among the algebras on ``carrier`` satisfying ``rules``.

    Those are exactly the tables constant on the forced-equal cell classes, so
    drawing one value per class gives the same distribution as rejection
    sampling uniform tables, without the rejections.
    """
    cells, uf = _cell_partition(poly, rules, carrier, cap)
    roots = sorted({uf.find(i) for i in range(len(cells))})
    draw = dict(zip(roots, rng.integers(0, carrier, size=len(roots)).tolist()))
    tables = [np.zeros((carrier,) * poly.arity(a), dtype=np.int64) for a in poly]
    for i, (a, f) in enumerate(cells):
        tables[a][f] = draw[uf.find(i)]
    return FiniteAlgebra(poly, carrier, tuple(tables))


def random_satisfying_algebras(poly: Polynomial, rules: RuleSet, count: int, max_carrier: int = 3, seed: int = 0):
    """``count`` seeded samples with carriers drawn from 1..max_carrier, each
    confirmed by :func:`check_rules` before it is yielded."""
    rng = np.random.default_rng(seed)
    produced = 0
    while produced < count:
        m = int(rng.integers(1, max_carrier + 1))
        alg = random_satisfying_algebra(poly, rules, m, rng)
        if check_rules(alg, rules):
            produced += 1
            yield alg


def stage_algebra(sf: StageFamily, cap: int = DEFAULT_CHECK_CAP) -> FiniteAlgebra:
    """Q(depth) + 1 as an algebra: pairs that fit in the truncation go to their
    class, everything else to the extra element ``len(Q(depth))``."""
    overflow = sf.stage_sizes[sf.depth]
    m = overflow + 1
    tables = []
    for a in sf.poly:
        n = sf.poly.arity(a)
        if m**n > cap:
            raise CapExceeded(f"stage algebra table of size {m}^{n} exceeds cap {cap}")
        table = np.full((m,) * n, overflow, dtype=np.int64)
        for f in itertools.product(range(m), repeat=n):
            cid = sf.nodes.get((a, f))
            if cid is not None:
                table[f] = cid
        tables.append(table)
    return FiniteAlgebra(sf.poly, m, tuple(tables))


@dataclass(frozen=True)
class RankReport:
    class_id: int
    term_rank: int
    class_rank: int

    @property
    def preserved(self) -> bool:
        return self.term_rank == self.class_rank


def ordered_to_unordered(sf: StageFamily, t: Term) -> RankReport:
    """Send an ordered term to its class in a stage family with symmetric
    constructors, reporting both ranks."""
    if not sf.rules.symmetric_ctors:
        raise UnsupportedRuleSet("ordered_to_unordered needs a rule set with symmetric constructors")
    cid = sf.canonicalize(t)
    return RankReport(cid, t.rank, sf.rank(cid))

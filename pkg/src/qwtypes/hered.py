"""Hereditarily small sets relative to the arities of a polynomial.

A set is small when some arity set surjects onto it: the empty set needs a
nullary constructor, and a set with k > 0 elements needs a constructor of
arity >= k.  Values are interned, so ``==`` is identity.
"""

from __future__ import annotations

import itertools
import re
import threading
import weakref
from math import comb

import numpy as np

from .algebra import FiniteAlgebra, check_satisfies, equal_image_violation, fold
from .errors import ArityMismatch, CapExceeded, NoConstructorFits, NotSatisfying, ParseError, UnsupportedRuleSet
from .signature import AllImagePreserving, Polynomial, expand_family
from .stages import StageFamily


class HfSet:
    __slots__ = ("elements", "rank", "_hash", "_order", "__weakref__")

    _table = weakref.WeakValueDictionary()
    _lock = threading.Lock()

    def __new__(cls, elements=()):
        elements = tuple(sorted(set(elements), key=lambda e: e.order_key))
        with cls._lock:
            x = cls._table.get(elements)
            if x is None:
                x = object.__new__(cls)
                x.elements = elements
                x.rank = 1 + max(e.rank for e in elements) if elements else 0
                x._hash = hash(("hf", elements))
                x._order = None
                cls._table[elements] = x
        return x

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    def __reduce__(self):
        return HfSet, (self.elements,)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, item):
        return item in self.elements

    @property
    def order_key(self):
        if self._order is None:
            self._order = (self.rank, len(self.elements), tuple(e.order_key for e in self.elements))
        return self._order

    def __lt__(self, other):
        return self.order_key < other.order_key

    def render(self, ascii: bool = False) -> str:
        if not self.elements:
            return "0" if ascii else "∅"
        return "{" + ",".join(e.render(ascii) for e in self.elements) + "}"

    def __repr__(self):
        return f"HfSet({self.render()})"

    def __str__(self):
        return self.render()


EMPTY = HfSet()


class _Overflow:
    """The extra point of a truncated set algebra."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = object.__new__(cls)
        return cls._instance

    def __repr__(self):
        return "OVERFLOW"


OVERFLOW = _Overflow()


def parse_hf(text: str) -> HfSet:
    """Read ``∅``, ``{}``, ``0`` or brace notation such as ``{∅,{∅}}``."""
    tokens = re.findall(r"∅|0|\{|\}|,|\S", text)
    pos = 0

    def parse():
        nonlocal pos
        if pos >= len(tokens):
            raise ParseError("unexpected end of set")
        tok = tokens[pos]
        pos += 1
        if tok in ("∅", "0"):
            return EMPTY
        if tok != "{":
            raise ParseError(f"unexpected {tok!r} in set")
        elems = []
        if pos < len(tokens) and tokens[pos] == "}":
            pos += 1
            return EMPTY
        while True:
            elems.append(parse())
            if pos >= len(tokens):
                raise ParseError("unclosed '{'")
            tok = tokens[pos]
            pos += 1
            if tok == "}":
                return HfSet(elems)
            if tok != ",":
                raise ParseError(f"expected ',' or '}}', got {tok!r}")

    x = parse()
    if pos != len(tokens):
        raise ParseError(f"trailing input {''.join(tokens[pos:])!r}")
    return x


def von_neumann(n: int) -> HfSet:
    x = EMPTY
    for _ in range(n):
        x = HfSet(x.elements + (x,))
    return x


def _allowed_sizes(poly: Polynomial) -> list[int]:
    sizes = set()
    for k in poly.arities:
        if k == 0:
            sizes.add(0)
        else:
            sizes.update(range(1, k + 1))
    return sorted(sizes)


def is_small(poly: Polynomial, x: HfSet) -> bool:
    k = len(x.elements)
    return any(n == 0 if k == 0 else n >= k for n in poly.arities)


def is_hereditarily_small(poly: Polynomial, x: HfSet) -> bool:
    return is_small(poly, x) and all(is_hereditarily_small(poly, e) for e in x.elements)


def hf_build(poly: Polynomial, a, children) -> HfSet:
    """s(a, f): the set of the children."""
    a = poly.index(a)
    children = tuple(children)
    if len(children) != poly.arity(a):
        raise ArityMismatch(f"{poly.name(a)!r} takes {poly.arity(a)} children, got {len(children)}")
    return HfSet(children)


def hf_rank(x: HfSet) -> int:
    return x.rank


def hf_enumerate(poly: Polynomial, max_rank: int, cap: int = 1_000_000) -> list[HfSet]:
    """All hereditarily small sets of rank <= max_rank, by rank then canonical order."""
    sizes = _allowed_sizes(poly)
    if 0 not in sizes:
        return []
    out = [EMPTY]
    old = 0
    for _ in range(max_rank):
        total = len(out)
        layer = []
        for k in sizes:
            if k == 0:
                continue
            if comb(total, k) - comb(old, k) + len(out) + len(layer) > cap:
                raise CapExceeded(f"hereditarily small sets of this rank exceed cap {cap}")
            for combo in itertools.combinations(range(total), k):
                if combo[-1] >= old:
                    layer.append(HfSet(out[i] for i in combo))
        if not layer:
            break
        layer.sort(key=lambda x: x.order_key)
        old = total
        out.extend(layer)
    return out


def check_ip_algebra(poly: Polynomial, alg: FiniteAlgebra) -> bool:
    """Does ``alg`` satisfy every image-preserving equation over sum_a P(B_a)?

    Decided by the equal-image criterion: t(a, f) = t(c, g) whenever f and g
    have the same image.
    """
    return equal_image_violation(alg) is None


def check_ip_algebra_literal(poly: Polynomial, alg: FiniteAlgebra, cap: int = 64) -> bool:
    """The same question by brute force over every expanded equation and every
    h : S -> X.  Only feasible for tiny signatures and carriers."""
    eqs = expand_family(poly, AllImagePreserving(), cap)
    return bool(check_satisfies(alg, eqs))


def _surjection_ctor(poly: Polynomial, k: int):
    fits = [a for a in poly if (poly.arity(a) == 0 if k == 0 else poly.arity(a) >= k)]
    if not fits:
        return None
    return min(fits, key=lambda a: (poly.arity(a), a))


def hf_fold(poly: Polynomial, alg: FiniteAlgebra, x: HfSet, choose=None, check: bool = True):
    """The unique homomorphism H -> alg at ``x``.

    ``choose(k)`` picks the constructor used for a k-element set; by default
    the one of least arity that surjects onto k elements.
    """
    if check:
        w = equal_image_violation(alg)
        if w is not None:
            raise NotSatisfying(f"algebra breaks an image-preserving equation at {w}", w)
    choose = choose or (lambda k: _surjection_ctor(poly, k))
    memo = {}

    def go(y):
        v = memo.get(y)
        if v is not None:
            return v
        k = len(y.elements)
        a = choose(k)
        if a is None:
            raise NoConstructorFits(f"no constructor surjects onto {k} elements ({y})")
        n = poly.arity(a)
        vals = [go(e) for e in y.elements]
        # canonical surjection B_a -> elements: pad with the last element
        args = [vals[min(b, k - 1)] for b in range(n)]
        v = memo[y] = alg.apply(a, args)
        return v

    return go(x)


def truncated_set_algebra(poly: Polynomial, alpha: int, cap: int = 1_000_000):
    """(H cap V_alpha) + 1 as a finite algebra; returns (algebra, carrier values).

    The last carrier element stands for OVERFLOW.
    """
    values = hf_enumerate(poly, alpha - 1, cap) if alpha > 0 else []
    pos = {v: i for i, v in enumerate(values)}
    overflow = len(values)
    m = overflow + 1
    tables = []
    for a in poly:
        n = poly.arity(a)
        if m**n > cap:
            raise CapExceeded(f"truncated algebra table {m}^{n} exceeds cap {cap}")
        table = np.full((m,) * n, overflow, dtype=np.int64)
        for f in itertools.product(range(overflow), repeat=n):
            table[f] = pos.get(HfSet(values[i] for i in f), overflow)
        tables.append(table)
    return FiniteAlgebra(poly, m, tuple(tables)), values + [OVERFLOW]


def approx_fold(sf: StageFamily, alpha_bound: int) -> dict:
    """Fold the stage family into (H cap V_alpha) + 1.

    Classes of rank < alpha_bound receive their set value; the rest OVERFLOW.
    """
    if not sf.rules.all_image_preserving:
        raise UnsupportedRuleSet("approx_fold needs the all-image-preserving family")
    alg, values = truncated_set_algebra(sf.poly, alpha_bound)
    return {x: values[v] for x, v in fold(sf, alg).items()}

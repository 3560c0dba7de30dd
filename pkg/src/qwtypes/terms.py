"""Raw constructor trees over a polynomial, hash-consed.

Every ``Term`` is interned: two terms with the same constructor and the same
(interned) children are the same object, so equality is identity and a tower
of height ``b`` costs ``b + 1`` nodes rather than ``2**b``.
"""

from __future__ import annotations

import itertools
import re
import threading
import weakref

from .errors import ArityMismatch, CapExceeded, NoNullaryConstructor, ParseError, UnknownConstructor
from .signature import Polynomial

DEFAULT_ENUMERATION_CAP = 1_000_000


class Term:
    __slots__ = ("ctor", "children", "rank", "_hash", "_order", "__weakref__")

    _table = weakref.WeakValueDictionary()
    _lock = threading.Lock()

    def __new__(cls, ctor: int, children=()):
        children = tuple(children)
        key = (ctor, children)
        with cls._lock:
            t = cls._table.get(key)
            if t is None:
                t = object.__new__(cls)
                t.ctor = ctor
                t.children = children
                t.rank = 1 + max(c.rank for c in children) if children else 0
                t._hash = hash(key)
                t._order = None
                cls._table[key] = t
        return t

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    def __reduce__(self):
        return Term, (self.ctor, self.children)

    @property
    def order_key(self):
        """Total order used for canonical forms: rank, constructor, children."""
        if self._order is None:
            self._order = (self.rank, self.ctor, tuple(c.order_key for c in self.children))
        return self._order

    def __lt__(self, other):
        return self.order_key < other.order_key

    def subterms(self):
        seen, stack = {}, [self]
        while stack:
            t = stack.pop()
            if t not in seen:
                seen[t] = None
                stack.extend(t.children)
        return list(seen)

    def render(self, poly: Polynomial) -> str:
        if not self.children:
            return f"({poly.name(self.ctor)})"
        return f"({poly.name(self.ctor)} {' '.join(c.render(poly) for c in self.children)})"

    def __repr__(self):
        if not self.children:
            return f"Term({self.ctor})"
        return f"Term({self.ctor}, {list(self.children)!r})"


_TOKEN = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")


def _tokenize(text):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected input at offset {pos}: {text[pos:pos + 10]!r}")
        out.append(m.group(1) or m.group(2) or m.group(3))
        pos = m.end()
    return out


def parse_term(text: str, poly: Polynomial) -> Term:
    """Parse ``(name child ...)``; a bare name is accepted for nullary constructors."""
    tokens = _tokenize(text)
    if not tokens:
        raise ParseError("empty term")
    pos = 0

    def lookup(name):
        try:
            return poly.index(name)
        except UnknownConstructor:
            raise UnknownConstructor(f"unknown constructor {name!r}") from None

    def parse():
        nonlocal pos
        if pos >= len(tokens):
            raise ParseError("unexpected end of input")
        tok = tokens[pos]
        pos += 1
        if tok == ")":
            raise ParseError("unexpected ')'")
        if tok != "(":
            a = lookup(tok)
            if poly.arity(a) != 0:
                raise ArityMismatch(f"{tok!r} has arity {poly.arity(a)} and needs parentheses")
            return Term(a)
        if pos >= len(tokens) or tokens[pos] in "()":
            raise ParseError("expected constructor name after '('")
        name = tokens[pos]
        pos += 1
        a = lookup(name)
        children = []
        while True:
            if pos >= len(tokens):
                raise ParseError(f"unclosed '(' for {name!r}")
            if tokens[pos] == ")":
                pos += 1
                break
            children.append(parse())
        if len(children) != poly.arity(a):
            raise ArityMismatch(f"{name!r} expects {poly.arity(a)} children, got {len(children)}")
        return Term(a, children)

    t = parse()
    if pos != len(tokens):
        raise ParseError(f"trailing input after term: {' '.join(tokens[pos:])!r}")
    return t


def term_rank(t: Term) -> int:
    return t.rank


def _count_new(n_all, n_old, arity):
    return n_all**arity - n_old**arity


def enumerate_terms(poly: Polynomial, max_rank: int, cap: int = DEFAULT_ENUMERATION_CAP) -> list[Term]:
    """All terms of rank <= max_rank, each once, ordered by rank, constructor,
    then lexicographically on the positions of the children in this list."""
    out = [Term(a) for a in poly if poly.arity(a) == 0]
    old = 0
    for _ in range(max_rank):
        total = len(out)
        if total == old:
            break
        pending = sum(_count_new(total, old, poly.arity(a)) for a in poly if poly.arity(a) > 0)
        if len(out) + pending > cap:
            raise CapExceeded(f"term enumeration would exceed {cap} terms")
        layer = []
        for a in poly:
            k = poly.arity(a)
            if k == 0:
                continue
            for idx in itertools.product(range(total), repeat=k):
                if max(idx) >= old:
                    layer.append(Term(a, (out[i] for i in idx)))
        old = total
        out.extend(layer)
    return out


def tower(poly: Polynomial, node_ctor, beta: int) -> Term:
    """t_0 is the first nullary constructor; t_{b+1} applies ``node_ctor`` to copies of t_b."""
    a = poly.index(node_ctor)
    if poly.arity(a) < 1:
        raise ArityMismatch(f"{poly.name(a)!r} must have positive arity")
    if not poly.nullary:
        raise NoNullaryConstructor("tower needs a nullary constructor for t_0")
    t = Term(poly.nullary[0])
    for _ in range(beta):
        t = Term(a, (t,) * poly.arity(a))
    return t

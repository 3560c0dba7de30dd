"""Polynomial signatures and image-preserving equations.

A polynomial is an ordered list of constructors, each with a finite arity
``n`` standing for the arity set ``{0, ..., n-1}``.  An equation relates two
single-constructor applications over a variable set ``{0, ..., k-1}``:

    left_ctor(v[left_map[0]], ...)  =  right_ctor(v[right_map[0]], ...)

and is admissible exactly when both maps hit the same set of variables.
"""

from __future__ import annotations

import itertools
import json
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

from .errors import (
    ArityMismatch,
    BadVariableIndex,
    CapExceeded,
    DuplicateName,
    EmptySignature,
    NotImagePreserving,
    SignatureError,
    UnknownConstructor,
)

_NAME_RE = re.compile(r"[^\s(){},@]+")

DEFAULT_FAMILY_CAP = 40320  # 8!


@dataclass(frozen=True)
class Polynomial:
    names: tuple[str, ...]
    arities: tuple[int, ...]

    def __len__(self):
        return len(self.names)

    def __iter__(self):
        return iter(range(len(self.names)))

    def arity(self, a: int) -> int:
        return self.arities[a]

    def name(self, a: int) -> str:
        return self.names[a]

    def index(self, ctor: Union[int, str]) -> int:
        """Resolve a constructor given by name or index."""
        if isinstance(ctor, str):
            try:
                return self.names.index(ctor)
            except ValueError:
                raise UnknownConstructor(f"unknown constructor {ctor!r}") from None
        if isinstance(ctor, bool) or not isinstance(ctor, int) or not 0 <= ctor < len(self.names):
            raise UnknownConstructor(f"no constructor with index {ctor!r}")
        return ctor

    @property
    def nullary(self) -> tuple[int, ...]:
        return tuple(a for a in self if self.arities[a] == 0)

    @property
    def max_arity(self) -> int:
        return max(self.arities)

    def to_json(self) -> list:
        return [{"name": n, "arity": k} for n, k in zip(self.names, self.arities)]


@dataclass(frozen=True)
class Equation:
    var_count: int
    left_ctor: int
    right_ctor: int
    left_map: tuple[int, ...]
    right_map: tuple[int, ...]

    @property
    def image(self) -> frozenset:
        return frozenset(self.left_map)

    def describe(self, poly: Polynomial) -> str:
        def side(a, m):
            args = " ".join(f"v{i}" for i in m)
            return f"({poly.name(a)}{' ' + args if args else ''})"

        return f"{side(self.left_ctor, self.left_map)} = {side(self.right_ctor, self.right_map)}"

    def to_json(self, poly: Polynomial) -> dict:
        return {
            "vars": self.var_count,
            "left": {"constructor": poly.name(self.left_ctor), "map": list(self.left_map)},
            "right": {"constructor": poly.name(self.right_ctor), "map": list(self.right_map)},
        }


@dataclass(frozen=True)
class Symmetric:
    """All permutations of one constructor's arguments."""

    ctor: int


@dataclass(frozen=True)
class AllImagePreserving:
    """Every image-preserving equation over the variable set sum_a P(B_a)."""


Family = Union[Symmetric, AllImagePreserving]


@dataclass(frozen=True)
class RuleSet:
    explicit: tuple[Equation, ...] = ()
    families: tuple[Family, ...] = ()

    @property
    def symmetric_ctors(self) -> frozenset:
        return frozenset(f.ctor for f in self.families if isinstance(f, Symmetric))

    @property
    def all_image_preserving(self) -> bool:
        return any(isinstance(f, AllImagePreserving) for f in self.families)

    @property
    def is_empty(self) -> bool:
        return not self.explicit and not self.families

    def to_json(self, poly: Polynomial) -> dict:
        fams = []
        for f in self.families:
            if isinstance(f, Symmetric):
                fams.append({"kind": "symmetric", "constructor": poly.name(f.ctor)})
            else:
                fams.append({"kind": "all-image-preserving"})
        return {"explicit": [e.to_json(poly) for e in self.explicit], "families": fams}


@dataclass(frozen=True)
class Signature:
    """A polynomial together with its rule set, as read from a signature file."""

    poly: Polynomial
    rules: RuleSet = field(default_factory=RuleSet)

    def to_json(self) -> dict:
        return {"constructors": self.poly.to_json(), "equations": self.rules.to_json(self.poly)}


def _natural(value, what) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise SignatureError(f"{what} must be a natural number, got {value!r}")
    return value


def validate_polynomial(constructors) -> Polynomial:
    """Build a Polynomial from ``{name: arity}``, ``[(name, arity)]`` or
    ``[{"name": ..., "arity": ...}]``.  Indices follow declaration order."""
    if isinstance(constructors, Polynomial):
        constructors = list(zip(constructors.names, constructors.arities))
    if isinstance(constructors, Mapping):
        pairs = list(constructors.items())
    else:
        pairs = []
        for item in constructors:
            if isinstance(item, Mapping):
                extra = set(item) - {"name", "arity"}
                if extra:
                    raise SignatureError(f"unknown constructor keys {sorted(extra)}")
                if "name" not in item or "arity" not in item:
                    raise SignatureError("constructor entries need 'name' and 'arity'")
                pairs.append((item["name"], item["arity"]))
            else:
                name, arity = item
                pairs.append((name, arity))
    if not pairs:
        raise EmptySignature("a polynomial needs at least one constructor")
    names, arities, seen = [], [], set()
    for name, arity in pairs:
        if not isinstance(name, str) or not _NAME_RE.fullmatch(name):
            raise SignatureError(f"bad constructor name {name!r}")
        if name in seen:
            raise DuplicateName(f"constructor {name!r} declared twice")
        seen.add(name)
        names.append(name)
        arities.append(_natural(arity, f"arity of {name!r}"))
    return Polynomial(tuple(names), tuple(arities))


def _check_equation(poly, var_count, left_ctor, left_map, right_ctor, right_map) -> Equation:
    var_count = _natural(var_count, "variable count")
    a, b = poly.index(left_ctor), poly.index(right_ctor)
    left_map = tuple(_natural(v, "variable index") for v in left_map)
    right_map = tuple(_natural(v, "variable index") for v in right_map)
    for ctor, m, side in ((a, left_map, "left"), (b, right_map, "right")):
        if len(m) != poly.arity(ctor):
            raise ArityMismatch(
                f"{side} map has length {len(m)} but {poly.name(ctor)!r} has arity {poly.arity(ctor)}"
            )
        bad = [v for v in m if v >= var_count]
        if bad:
            raise BadVariableIndex(f"{side} map uses variable {bad[0]} but only {var_count} variables exist")
    if set(left_map) != set(right_map):
        raise NotImagePreserving(
            f"images differ: {sorted(set(left_map))} vs {sorted(set(right_map))}"
        )
    return Equation(var_count, a, b, left_map, right_map)


def validate_equation(poly: Polynomial, eq) -> Equation:
    """Validate an equation given as an Equation or in signature-file form.

    The only admissibility criterion is equality of the two variable images.
    """
    if isinstance(eq, Equation):
        return _check_equation(poly, eq.var_count, eq.left_ctor, eq.left_map, eq.right_ctor, eq.right_map)
    if not isinstance(eq, Mapping):
        raise SignatureError(f"cannot read equation from {eq!r}")
    extra = set(eq) - {"vars", "left", "right"}
    if extra:
        raise SignatureError(f"unknown equation keys {sorted(extra)}")
    try:
        left, right = eq["left"], eq["right"]
        sides = []
        for side in (left, right):
            extra = set(side) - {"constructor", "map"}
            if extra:
                raise SignatureError(f"unknown equation-side keys {sorted(extra)}")
            sides.append((side["constructor"], side["map"]))
        var_count = eq["vars"]
    except (KeyError, TypeError) as exc:
        raise SignatureError(f"malformed equation {eq!r}") from exc
    (lc, lm), (rc, rm) = sides
    return _check_equation(poly, var_count, lc, lm, rc, rm)


def image_preserving_variables(poly: Polynomial) -> list[tuple[int, frozenset]]:
    """The variable set sum_a P(B_a), listed per constructor by bitmask order."""
    out = []
    for a in poly:
        n = poly.arity(a)
        for mask in range(1 << n):
            out.append((a, frozenset(i for i in range(n) if mask >> i & 1)))
    return out


def expand_family(poly: Polynomial, family: Family, cap: int = DEFAULT_FAMILY_CAP) -> list[Equation]:
    """List the equations a symbolic family stands for.

    Only used for cross-checks: the stage engine applies families through
    closed-form criteria.
    """
    if isinstance(family, Symmetric):
        a = poly.index(family.ctor)
        n = poly.arity(a)
        if math.factorial(n) > cap:
            raise CapExceeded(f"{n}! permutations exceed cap {cap}")
        ident = tuple(range(n))
        return [Equation(n, a, a, ident, tuple(p)) for p in itertools.permutations(range(n))]
    if isinstance(family, AllImagePreserving):
        size = sum(1 << k for k in poly.arities)
        if size > cap:
            raise CapExceeded(f"|S| = {size} exceeds cap {cap}")
        by_image: dict[frozenset, list[tuple[int, tuple]]] = {}
        for a in poly:
            for m in itertools.product(range(size), repeat=poly.arity(a)):
                by_image.setdefault(frozenset(m), []).append((a, m))
        eqs = []
        for sides in by_image.values():
            for (a, l), (b, r) in itertools.product(sides, repeat=2):
                eqs.append(Equation(size, a, b, l, r))
        eqs.sort(key=lambda e: (e.left_ctor, e.left_map, e.right_ctor, e.right_map))
        return eqs
    raise SignatureError(f"unknown family {family!r}")


def _parse_family(poly, obj) -> Family:
    if not isinstance(obj, Mapping) or "kind" not in obj:
        raise SignatureError(f"malformed family {obj!r}")
    kind = obj["kind"]
    if kind == "symmetric":
        if set(obj) != {"kind", "constructor"}:
            raise SignatureError(f"symmetric family takes exactly 'constructor': {obj!r}")
        return Symmetric(poly.index(obj["constructor"]))
    if kind == "all-image-preserving":
        if set(obj) != {"kind"}:
            raise SignatureError(f"unknown keys in family {obj!r}")
        return AllImagePreserving()
    raise SignatureError(f"unknown family kind {kind!r}")


def make_rules(poly: Polynomial, explicit: Iterable = (), families: Iterable[Family] = ()) -> RuleSet:
    eqs = tuple(validate_equation(poly, e) for e in explicit)
    fams = []
    for f in families:
        if isinstance(f, Symmetric):
            f = Symmetric(poly.index(f.ctor))
        elif not isinstance(f, AllImagePreserving):
            f = _parse_family(poly, f)
        if f not in fams:
            fams.append(f)
    return RuleSet(eqs, tuple(fams))


def parse_signature(obj: Mapping) -> Signature:
    if not isinstance(obj, Mapping):
        raise SignatureError("signature must be a JSON object")
    extra = set(obj) - {"constructors", "equations"}
    if extra:
        raise SignatureError(f"unknown signature keys {sorted(extra)}")
    if "constructors" not in obj:
        raise SignatureError("signature needs 'constructors'")
    poly = validate_polynomial(obj["constructors"])
    eqs = obj.get("equations") or {}
    if not isinstance(eqs, Mapping):
        raise SignatureError("'equations' must be an object")
    extra = set(eqs) - {"explicit", "families"}
    if extra:
        raise SignatureError(f"unknown equations keys {sorted(extra)}")
    explicit = []
    for i, e in enumerate(eqs.get("explicit", [])):
        try:
            explicit.append(validate_equation(poly, e))
        except SignatureError as exc:
            raise type(exc)(f"explicit equation #{i} {json.dumps(e)}: {exc}") from None
    families = [_parse_family(poly, f) for f in eqs.get("families", [])]
    return Signature(poly, make_rules(poly, explicit, families))


def load_signature(path) -> Signature:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SignatureError(f"{path}: invalid JSON ({exc})") from None
    return parse_signature(obj)


def signature(constructors, explicit: Sequence = (), families: Sequence = ()) -> Signature:
    """Programmatic shorthand: ``signature({"leaf": 0, "node": 2}, families=[Symmetric("node")])``."""
    poly = validate_polynomial(constructors)
    return Signature(poly, make_rules(poly, explicit, families))

"""Order types, the aleph function, pairing codes and the surjections F_{x,n}.

Everything here lives at the finite / omega level: ordinals are naturals and
the empty set, when it appears as a value, is the natural 0.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable

from .signature import Polynomial
from .stages import StageFamily


@dataclass(frozen=True)
class FiniteOrdinalSet:
    values: tuple[int, ...]

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("values must be strictly increasing")
        if any(v < 0 for v in self.values):
            raise ValueError("values must be naturals")

    @classmethod
    def of(cls, values: Iterable[int]) -> "FiniteOrdinalSet":
        return cls(tuple(sorted(set(values))))


def order_type(s) -> tuple[int, tuple[int, ...]]:
    """Return (beta, theta) with theta the order isomorphism {0..beta-1} -> s."""
    if not isinstance(s, FiniteOrdinalSet):
        s = FiniteOrdinalSet.of(s)
    return len(s.values), s.values


def aleph(poly: Polynomial) -> int:
    """Least natural that no arity set surjects onto: 1 + max arity."""
    return 1 + poly.max_arity


def cantor_pair(m: int, n: int) -> int:
    return (m + n) * (m + n + 1) // 2 + n


def cantor_unpair(p: int) -> tuple[int, int]:
    w = (math.isqrt(8 * p + 1) - 1) // 2
    n = p - w * (w + 1) // 2
    return w - n, n


def omega_tuple_code(xs) -> int:
    xs = list(xs)
    if not xs:
        raise ValueError("tuple code needs a nonempty sequence")
    acc = xs[0]
    for x in xs[1:]:
        acc = cantor_pair(acc, x)
    return cantor_pair(len(xs) - 1, acc)


def omega_tuple_decode(p: int) -> list[int]:
    extra, acc = cantor_unpair(p)
    out = []
    for _ in range(extra):
        acc, x = cantor_unpair(acc)
        out.append(x)
    out.append(acc)
    out.reverse()
    return out


def _order_type_surjection(values, kappa) -> tuple[int, ...]:
    """kappa -> values + {0}: theta below the order type, 0 from there on."""
    beta, theta = order_type(values)
    if beta >= kappa:
        raise ValueError(f"order type {beta} is not below kappa = {kappa}")
    return theta + (0,) * (kappa - beta)


class SurjectionTables:
    """Memoised F_{x,n} tables for one stage family.

    A table for (x, n) is a dict from n-tuples over range(kappa) to naturals.
    """

    def __init__(self, sf: StageFamily, kappa: int | None = None):
        self.sf = sf
        self.kappa = aleph(sf.poly) if kappa is None else kappa
        self._tables: dict[tuple[int, int], dict] = {}

    def table(self, x: int, n: int, children=None) -> dict:
        """F_{x,n}; ``children`` overrides the child classes of x (any member
        node of x may be passed to check representative independence)."""
        if n < 1:
            raise ValueError("n must be at least 1")
        key = (x, n)
        cached = children is None
        if cached and key in self._tables:
            return self._tables[key]
        sf, kappa = self.sf, self.kappa
        if cached:
            children = sf.classes[x].children
        if n == 1:
            row = _order_type_surjection({sf.rank(c) for c in children}, kappa)
            out = {(alpha,): row[alpha] for alpha in range(kappa)}
        else:
            subs = [self.table(c, n - 1) for c in children]
            out = {}
            for prefix in itertools.product(range(kappa), repeat=n - 1):
                row = _order_type_surjection({sub[prefix] for sub in subs}, kappa)
                for alpha in range(kappa):
                    out[prefix + (alpha,)] = row[alpha]
        if cached:
            self._tables[key] = out
        return out


def f_surjection(sf: StageFamily, x: int, n: int) -> dict:
    return SurjectionTables(sf).table(x, n)


def table_csv(table: dict, n: int) -> str:
    lines = [",".join([f"beta{i + 1}" for i in range(n)] + ["value"])]
    for args in sorted(table):
        lines.append(",".join(str(v) for v in (*args, table[args])))
    return "\n".join(lines) + "\n"

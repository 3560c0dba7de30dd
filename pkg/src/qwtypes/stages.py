"""Quotient stages Q(0), Q(1), ..., Q(n) of an image-preserving QW-type.

Stage k consists of the pairs (a, f) with f : B_a -> Q(k-1), quotiented by
the equivalence generated by the rules.  Both sides of every rule have the
same child image, so a pair whose children all live in Q(k-2) is only ever
identified with pairs of the same kind, which were already settled at stage
k-1.  Each stage therefore only has to saturate the *new* pairs (those with a
child first added at stage k-1) and close them with union-find once.

A pair is stored as a node ``(ctor, child_ids)``; every node ever generated
maps to its ClassId, and ids are dense in order of (stage, constructor,
lexicographic child tuple) of each class's first node.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass

from .errors import CapExceeded
from .signature import Equation, Polynomial, RuleSet
from .terms import Term

Node = tuple  # (ctor, tuple of ClassId)


@dataclass(frozen=True)
class Caps:
    max_classes: int = 100_000
    max_assignments: int = 10_000_000
    max_enumeration: int = 1_000_000


@dataclass(frozen=True)
class ClassInfo:
    first_stage: int
    ctor: int
    children: tuple
    image: frozenset
    rank: int

    @property
    def representative(self) -> Node:
        return (self.ctor, self.children)


class UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, i, j):
        i, j = self.find(i), self.find(j)
        if i != j:
            # keep the smaller index as root so the first node represents its class
            if j < i:
                i, j = j, i
            self.parent[j] = i


def _stage_nodes(poly, k, all_count, old_count, caps):
    if k == 1:
        return [(a, ()) for a in poly if poly.arity(a) == 0]
    budget = sum(all_count ** poly.arity(a) - old_count ** poly.arity(a) for a in poly if poly.arity(a))
    if budget > caps.max_assignments:
        raise CapExceeded(f"stage {k} would generate {budget} pairs (cap {caps.max_assignments})")
    nodes = []
    for a in poly:
        n = poly.arity(a)
        if n == 0:
            continue
        for children in itertools.product(range(all_count), repeat=n):
            if max(children) >= old_count:
                nodes.append((a, children))
    return nodes


def _identify(rules: RuleSet, nodes, index, uf, k, all_count, old_count, caps):
    """Union every pair of nodes that one rule instance relates."""
    for e in rules.explicit:
        variables = sorted(e.image)
        if not variables:
            if k == 1:
                uf.union(index[(e.left_ctor, ())], index[(e.right_ctor, ())])
            continue
        if all_count ** len(variables) > caps.max_assignments:
            raise CapExceeded(
                f"equation needs {all_count}^{len(variables)} assignments at stage {k} (cap {caps.max_assignments})"
            )
        for values in itertools.product(range(all_count), repeat=len(variables)):
            if max(values) < old_count:
                continue
            g = dict(zip(variables, values))
            left = (e.left_ctor, tuple(g[v] for v in e.left_map))
            right = (e.right_ctor, tuple(g[v] for v in e.right_map))
            uf.union(index[left], index[right])

    sym = rules.symmetric_ctors
    if sym:
        first = {}
        for i, (a, children) in enumerate(nodes):
            if a in sym:
                uf.union(i, first.setdefault((a, tuple(sorted(children))), i))

    if rules.all_image_preserving:
        first = {}
        for i, (_, children) in enumerate(nodes):
            uf.union(i, first.setdefault(frozenset(children), i))


class StageFamily:
    """Truncation Q(0..depth) of the QW-type; grow it with :meth:`extend`."""

    def __init__(self, poly: Polynomial, rules: RuleSet, caps: Caps | None = None):
        self.poly = poly
        self.rules = rules
        self.caps = caps or Caps()
        self.depth = 0
        self.stage_sizes = [0]
        self.classes: list[ClassInfo] = []
        self.nodes: dict[Node, int] = {}
        self.members: list[list[Node]] = []
        self._canon: dict[Term, int] = {}
        self._rep_terms: dict[int, Term] = {}
        self._lock = threading.RLock()

    def __len__(self):
        return len(self.classes)

    def extend(self, n: int) -> "StageFamily":
        with self._lock:
            while self.depth < n:
                self._build_stage(self.depth + 1)
        return self

    def _build_stage(self, k):
        all_count = self.stage_sizes[k - 1]
        old_count = self.stage_sizes[k - 2] if k >= 2 else 0
        nodes = _stage_nodes(self.poly, k, all_count, old_count, self.caps)
        index = {node: i for i, node in enumerate(nodes)}
        uf = UnionFind(len(nodes))
        _identify(self.rules, nodes, index, uf, k, all_count, old_count, self.caps)

        new_ids = {}
        for i in range(len(nodes)):
            root = uf.find(i)
            if root not in new_ids:
                new_ids[root] = len(self.classes) + len(new_ids)
        if len(self.classes) + len(new_ids) > self.caps.max_classes:
            raise CapExceeded(f"stage {k} would hold {len(self.classes) + len(new_ids)} classes (cap {self.caps.max_classes})")

        for root, cid in new_ids.items():
            ctor, children = nodes[root]
            rank = 1 + max(self.classes[c].rank for c in children) if children else 0
            if rank != k - 1:
                raise RuntimeError(f"class of {nodes[root]} has rank {rank} at stage {k}")
            self.classes.append(ClassInfo(k, ctor, children, frozenset(children), rank))
            self.members.append([])
        for i, node in enumerate(nodes):
            cid = new_ids[uf.find(i)]
            if frozenset(node[1]) != self.classes[cid].image:
                raise RuntimeError(f"image invariant violated: {node} in class {cid}")
            self.nodes[node] = cid
            self.members[cid].append(node)
        self.stage_sizes.append(len(self.classes))
        self.depth = k

    # queries

    def ids(self, stage: int | None = None) -> range:
        """ClassIds of Q(stage); defaults to the whole truncation."""
        return range(self.stage_sizes[self.depth if stage is None else stage])

    def canonicalize(self, t: Term) -> int:
        """ClassId of ``t``, extending the truncation if ``t`` is too deep."""
        cid = self._canon.get(t)
        if cid is not None:
            return cid
        if t.rank >= self.depth:
            self.extend(t.rank + 1)
        node = (t.ctor, tuple(self.canonicalize(c) for c in t.children))
        cid = self.nodes[node]
        self._canon[t] = cid
        return cid

    def decide_eq(self, t1: Term, t2: Term) -> bool:
        if t1.rank != t2.rank:
            return False
        return self.canonicalize(t1) == self.canonicalize(t2)

    def image(self, x: int) -> frozenset:
        return self.classes[x].image

    def rank(self, x: int) -> int:
        return self.classes[x].rank

    def union_of(self, xs) -> frozenset:
        out = set()
        for x in xs:
            out |= self.classes[x].image
        return frozenset(out)

    def transitive_closure(self, x: int) -> frozenset:
        seen = set()
        layer = self.classes[x].image
        while layer:
            seen |= layer
            layer = self.union_of(layer) - seen
        return frozenset(seen)

    def union_power(self, x: int, n: int) -> frozenset:
        """The n-fold union of {x}."""
        layer = frozenset([x])
        for _ in range(n):
            layer = self.union_of(layer)
        return layer

    def r_n(self, x: int, n: int) -> frozenset:
        """Ranks of the classes exactly n image steps below x."""
        if n < 1:
            raise ValueError("n must be at least 1")
        return frozenset(self.classes[z].rank for z in self.union_power(x, n))

    def representative_term(self, x: int) -> Term:
        t = self._rep_terms.get(x)
        if t is None:
            info = self.classes[x]
            t = Term(info.ctor, [self.representative_term(c) for c in info.children])
            self._rep_terms[x] = t
        return t

    def member_terms(self, x: int):
        """One raw term per member node of x (children by representative)."""
        return [Term(a, [self.representative_term(c) for c in ch]) for a, ch in self.members[x]]

    def label(self, x: int) -> str:
        return self.representative_term(x).render(self.poly)

    def to_dot(self) -> str:
        lines = ["digraph stages {"]
        for x, info in enumerate(self.classes):
            lines.append(f'  {x} [label="{x}:{info.rank}"];')
        for x, info in enumerate(self.classes):
            for y in sorted(info.image):
                lines.append(f"  {x} -> {y};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "stage_sizes": list(self.stage_sizes),
            "classes": [
                {
                    "id": x,
                    "first_stage": info.first_stage,
                    "rank": info.rank,
                    "representative": self.label(x),
                    "image": sorted(info.image),
                    "members": len(self.members[x]),
                }
                for x, info in enumerate(self.classes)
            ],
        }


def build_stages(poly: Polynomial, rules: RuleSet, n: int, caps: Caps | None = None) -> StageFamily:
    if n < 0:
        raise ValueError("depth must be non-negative")
    return StageFamily(poly, rules, caps).extend(n)


def replay_stage(sf: StageFamily, k: int) -> tuple[list, list[int]]:
    """Re-saturate all of X_k from scratch, ignoring what earlier stages settled.

    Returns the nodes over Q(k-1) and, for each, a group label.
    Used to audit that the incremental build neither merges classes that were
    distinct at stage k-1 nor misses an identification.
    """
    all_count = sf.stage_sizes[k - 1]
    nodes = _stage_nodes(sf.poly, k, all_count, 0, sf.caps)
    if k >= 2:
        nodes = [(a, ()) for a in sf.poly if sf.poly.arity(a) == 0] + nodes
    index = {node: i for i, node in enumerate(nodes)}
    uf = UnionFind(len(nodes))
    _identify(sf.rules, nodes, index, uf, 1, all_count, 0, sf.caps)
    return nodes, [uf.find(i) for i in range(len(nodes))]


def audit(sf: StageFamily) -> list[str]:
    """Compare every stage against a from-scratch replay; [] means consistent."""
    problems = []
    for k in range(1, sf.depth + 1):
        nodes, groups = replay_stage(sf, k)
        pairing = {}
        for node, g in zip(nodes, groups):
            cid = sf.nodes.get(node)
            if cid is None:
                problems.append(f"stage {k}: node {node} missing from the family")
                continue
            if pairing.setdefault(g, cid) != cid:
                problems.append(f"stage {k}: node {node} replays with class {pairing[g]} but is in {cid}")
        if len(set(pairing.values())) != len(pairing):
            problems.append(f"stage {k}: replay splits a class the family keeps whole")
    return problems


def check_equation_respect(sf: StageFamily, eqs, stage: int | None = None) -> list[tuple]:
    """For each equation and each assignment g : V_e -> Q(stage-1), the two
    induced terms must canonicalize to the same class.  Returns violations.

    Variables outside the equation's image do not occur in either side, so
    only the image variables are enumerated.
    """
    stage = sf.depth if stage is None else stage
    pool = sf.ids(stage - 1)
    reps = [sf.representative_term(x) for x in pool]
    violations = []
    for e in eqs:
        variables = sorted(e.image)
        if len(pool) ** len(variables) > sf.caps.max_assignments:
            raise CapExceeded("equation-respect sweep exceeds the assignment cap")
        for values in itertools.product(pool, repeat=len(variables)):
            g = dict(zip(variables, values))
            left = Term(e.left_ctor, [reps[g[v]] for v in e.left_map])
            right = Term(e.right_ctor, [reps[g[v]] for v in e.right_map])
            if sf.canonicalize(left) != sf.canonicalize(right):
                violations.append((e, g))
    return violations

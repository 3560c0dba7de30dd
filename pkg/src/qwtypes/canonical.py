"""Closed-form normal forms for the two flagship equation families.

Symmetric constructors: sort the children (unordered trees).
All image-preserving equations: forget the constructor and collapse the
children to a set (hereditarily small sets).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import UnsupportedRuleSet
from .hered import HfSet
from .signature import Polynomial, RuleSet
from .stages import Caps, StageFamily, build_stages
from .terms import Term, enumerate_terms

# A canonical tree is a Term whose symmetric-constructor children are sorted
# by Term.order_key (rank, constructor, children).
CanonicalTree = Term


def canon_multiset(t: Term, poly: Polynomial, sym_ctors) -> CanonicalTree:
    sym_ctors = frozenset(sym_ctors)
    memo = {}

    def go(s):
        out = memo.get(s)
        if out is None:
            children = [go(c) for c in s.children]
            if s.ctor in sym_ctors:
                children.sort(key=lambda c: c.order_key)
            out = memo[s] = Term(s.ctor, children)
        return out

    return go(t)


def canon_extensional(t: Term, poly: Polynomial) -> HfSet:
    memo = {}

    def go(s):
        out = memo.get(s)
        if out is None:
            out = memo[s] = HfSet(go(c) for c in s.children)
        return out

    return go(t)


def canonical_form(rules: RuleSet, poly: Polynomial):
    """The normal-form function for ``rules``, or UnsupportedRuleSet."""
    if rules.explicit:
        raise UnsupportedRuleSet("explicit equations have no closed-form canonical form; use the stage engine")
    if rules.all_image_preserving:
        return lambda t: canon_extensional(t, poly)
    sym = rules.symmetric_ctors
    return lambda t: canon_multiset(t, poly, sym)


@dataclass
class CrosscheckReport:
    agree: bool
    terms: int
    classes: int
    counts_stages: list[int]
    counts_canonical: list[int]
    mismatches: list[tuple[Term, Term]]

    def lines(self, poly: Polynomial) -> list[str]:
        out = [
            f"partitions {'agree' if self.agree else 'DIFFER'} on {self.terms} terms",
            "stage classes (cumulative): " + " ".join(map(str, self.counts_stages)),
            "canonical forms (cumulative): " + " ".join(map(str, self.counts_canonical)),
        ]
        for s, t in self.mismatches[:10]:
            out.append(f"  mismatch: {s.render(poly)} vs {t.render(poly)}")
        return out


def crosscheck(poly: Polynomial, rules: RuleSet, max_stage: int, caps: Caps | None = None) -> CrosscheckReport:
    """Compare the stage partition with the canonical-form partition on every
    term of rank < max_stage."""
    caps = caps or Caps()
    canon = canonical_form(rules, poly)
    sf = build_stages(poly, rules, max_stage, caps)
    terms = enumerate_terms(poly, max_stage - 1, caps.max_enumeration) if max_stage > 0 else []
    by_class: dict[int, object] = {}
    by_form: dict[object, int] = {}
    first_term: dict[int, Term] = {}
    mismatches = []
    for t in terms:
        cid = sf.canonicalize(t)
        form = canon(t)
        first_term.setdefault(cid, t)
        if by_class.setdefault(cid, form) != form:
            mismatches.append((first_term[cid], t))
        if by_form.setdefault(form, cid) != cid:
            mismatches.append((first_term[by_form[form]], t))
    counts_stages = [sum(1 for x in by_class if sf.rank(x) < k) for k in range(1, max_stage + 1)]
    counts_canonical = [sum(1 for f in by_form if f.rank < k) for k in range(1, max_stage + 1)]
    agree = not mismatches and len(by_class) == sf.stage_sizes[max_stage] if max_stage else True
    return CrosscheckReport(agree, len(terms), len(by_class), counts_stages, counts_canonical, mismatches)

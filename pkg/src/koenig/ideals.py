"""Degree-2 binomials, monomial-order witnesses, certificates and search.

A certificate for "the ideal is of Koenig type" consists of height-many
generators, one marked monomial per generator, and a weight-vector witness
that strictly prefers every marked monomial over its partner.  Realizability
of a marking is a strict linear feasibility problem solved exactly over the
rationals by Fourier-Motzkin elimination.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional

from .errors import EqualMonomials, UnitMonomial


@dataclass(frozen=True)
class Monomial:
    """Sparse monomial: sorted (variable, exponent) pairs, no zero exponents."""

    exps: tuple[tuple[str, int], ...]

    @staticmethod
    def of(*variables: str) -> "Monomial":
        counts: dict[str, int] = {}
        for v in variables:
            counts[v] = counts.get(v, 0) + 1
        return Monomial(tuple(sorted(counts.items())))

    @staticmethod
    def from_dict(d: dict) -> "Monomial":
        return Monomial(tuple(sorted((v, e) for v, e in d.items() if e)))

    def exponent(self, v: str) -> int:
        for var, e in self.exps:
            if var == v:
                return e
        return 0

    def degree(self) -> int:
        return sum(e for _, e in self.exps)

    def is_unit(self) -> bool:
        return not self.exps

    def variables(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.exps)

    def mul(self, other: "Monomial") -> "Monomial":
        d = dict(self.exps)
        for v, e in other.exps:
            d[v] = d.get(v, 0) + e
        return Monomial(tuple(sorted(d.items())))

    def divides(self, other: "Monomial") -> bool:
        o = dict(other.exps)
        return all(o.get(v, 0) >= e for v, e in self.exps)

    def div(self, other: "Monomial") -> "Monomial":
        """Exact quotient self / other."""
        d = dict(self.exps)
        for v, e in other.exps:
            d[v] = d.get(v, 0) - e
            if d[v] < 0:
                raise ValueError(f"{other} does not divide {self}")
        return Monomial(tuple(sorted((v, e) for v, e in d.items() if e)))

    def quotient_floor(self, other: "Monomial") -> "Monomial":
        """Componentwise max(self - other, 0); the colon-ideal generator."""
        d = dict(self.exps)
        for v, e in other.exps:
            d[v] = max(d.get(v, 0) - e, 0)
        return Monomial(tuple(sorted((v, e) for v, e in d.items() if e)))

    def lcm(self, other: "Monomial") -> "Monomial":
        d = dict(self.exps)
        for v, e in other.exps:
            d[v] = max(d.get(v, 0), e)
        return Monomial(tuple(sorted(d.items())))

    def gcd(self, other: "Monomial") -> "Monomial":
        o = dict(other.exps)
        d = {v: min(e, o[v]) for v, e in self.exps if v in o}
        return Monomial(tuple(sorted((v, e) for v, e in d.items() if e)))

    def coprime(self, other: "Monomial") -> bool:
        mine = {v for v, _ in self.exps}
        return all(v not in mine for v, _ in other.exps)

    def __str__(self) -> str:
        if not self.exps:
            return "1"
        return "*".join(v if e == 1 else f"{v}^{e}" for v, e in self.exps)


@dataclass(frozen=True)
class Binomial:
    """Difference of two distinct monomials; `tag` records its origin."""

    first: Monomial
    second: Monomial
    tag: str

    def monomials(self) -> tuple[Monomial, Monomial]:
        return (self.first, self.second)

    def marked(self, marking: str) -> tuple[Monomial, Monomial]:
        """(marked, other) for marking in {"first", "second"}."""
        if marking == "first":
            return self.first, self.second
        if marking == "second":
            return self.second, self.first
        raise ValueError(f"bad marking {marking!r}")


class MonomialOrderWitness:
    """Weight vector plus a variable permutation used as lex tie-break.

    Variables earlier in `tiebreak` are larger.  Variables missing from the
    weight table weigh zero; variables missing from the tie-break are
    appended after it in sorted order, so any pair of distinct monomials is
    strictly ordered.
    """

    __slots__ = ("weights", "tiebreak", "flavor")

    def __init__(self, weights: dict[str, Fraction], tiebreak: tuple[str, ...],
                 flavor: str = "weight"):
        self.weights = {v: Fraction(w) for v, w in weights.items()}
        self.tiebreak = tuple(tiebreak)
        self.flavor = flavor

    def weight_of(self, m: Monomial) -> Fraction:
        zero = Fraction(0)
        return sum((self.weights.get(v, zero) * e for v, e in m.exps), zero)

    def __repr__(self):
        return f"MonomialOrderWitness(flavor={self.flavor!r}, nvars={len(self.weights)})"


def compare(witness: MonomialOrderWitness, m1: Monomial, m2: Monomial) -> int:
    """+1 if m1 > m2 under the witness order, -1 if m1 < m2."""
    if m1 == m2:
        raise EqualMonomials(str(m1))
    w1, w2 = witness.weight_of(m1), witness.weight_of(m2)
    if w1 != w2:
        return 1 if w1 > w2 else -1
    known = set(witness.tiebreak)
    extra = sorted((set(m1.variables()) | set(m2.variables())) - known)
    for v in (*witness.tiebreak, *extra):
        e1, e2 = m1.exponent(v), m2.exponent(v)
        if e1 != e2:
            return 1 if e1 > e2 else -1
    raise EqualMonomials(str(m1))


def is_monomial_regular_sequence(monomials) -> bool:
    """Monomials form a regular sequence iff pairwise coprime (all non-unit)."""
    ms = list(monomials)
    for m in ms:
        if m.is_unit():
            raise UnitMonomial(str(m))
    for i in range(len(ms)):
        for j in range(i + 1, len(ms)):
            if not ms[i].coprime(ms[j]):
                return False
    return True


# -- strict linear feasibility over exact rationals -------------------------

def _normalize_rows(rows) -> Optional[list[dict[str, int]]]:
    """gcd-normalize and dedupe; None means an all-zero strict row appeared."""
    seen = set()
    out = []
    for r in rows:
        items = {v: c for v, c in r.items() if c}
        if not items:
            return None  # 0 > 0
        g = 0
        for c in items.values():
            g = gcd(g, abs(c))
        if g > 1:
            items = {v: c // g for v, c in items.items()}
        key = tuple(sorted(items.items()))
        if key not in seen:
            seen.add(key)
            out.append(items)
    return out


def solve_strict_inequalities(rows) -> Optional[dict[str, Fraction]]:
    """Find w with sum(c_v * w_v) > 0 for every row, or None if infeasible.

    rows: iterables of {var: int coefficient}.  Fourier-Motzkin; positive
    combinations of strict inequalities stay strict, so infeasibility is
    exactly the derivation of the empty strict row.
    """
    work = _normalize_rows(rows)
    if work is None:
        return None
    stages: list[tuple[str, list[dict[str, int]]]] = []
    while True:
        vs = sorted({v for r in work for v in r})
        if not vs:
            break
        x = min(vs, key=lambda v: (
            sum(1 for r in work if r.get(v, 0) > 0)
            * sum(1 for r in work if r.get(v, 0) < 0), v))
        stages.append((x, work))
        pos = [r for r in work if r.get(x, 0) > 0]
        neg = [r for r in work if r.get(x, 0) < 0]
        new = [r for r in work if r.get(x, 0) == 0]
        for p in pos:
            cp = p[x]
            for q in neg:
                cq = q[x]
                comb: dict[str, int] = {}
                for v, c in p.items():
                    comb[v] = comb.get(v, 0) + c * (-cq)
                for v, c in q.items():
                    comb[v] = comb.get(v, 0) + c * cp
                comb.pop(x, None)
                new.append(comb)
        work = _normalize_rows(new)
        if work is None:
            return None
    assign: dict[str, Fraction] = {}
    for x, rows_at in reversed(stages):
        lo = hi = None
        for r in rows_at:
            c = r.get(x, 0)
            if not c:
                continue
            rest = sum((Fraction(cv) * assign.get(v, Fraction(0))
                        for v, cv in r.items() if v != x), Fraction(0))
            bound = -rest / c
            if c > 0:
                lo = bound if lo is None else max(lo, bound)
            else:
                hi = bound if hi is None else min(hi, bound)
        if lo is None and hi is None:
            assign[x] = Fraction(0)
        elif hi is None:
            assign[x] = lo + 1
        elif lo is None:
            assign[x] = hi - 1
        else:
            assign[x] = (lo + hi) / 2
    return assign


def marking_realizable(binomials, marking) -> Optional[MonomialOrderWitness]:
    """Witness making each marked monomial the strictly larger one, if any.

    All monomials in play are homogeneous of one degree, so weights may be
    shifted by a common constant; the returned witness has non-negative
    weights and therefore extends to a genuine monomial order via its
    tie-break.
    """
    binomials = list(binomials)
    marking = list(marking)
    if len(binomials) != len(marking):
        raise ValueError("marking length mismatch")
    rows = []
    allvars: set[str] = set()
    for b, mk in zip(binomials, marking):
        win, lose = b.marked(mk)
        allvars.update(win.variables())
        allvars.update(lose.variables())
        row: dict[str, int] = {}
        for v, e in win.exps:
            row[v] = row.get(v, 0) + e
        for v, e in lose.exps:
            row[v] = row.get(v, 0) - e
        rows.append(row)
    sol = solve_strict_inequalities(rows)
    if sol is None:
        return None
    shift = -min((w for w in sol.values()), default=Fraction(0))
    if shift < 0:
        shift = Fraction(0)
    weights = {v: sol.get(v, Fraction(0)) + shift for v in sorted(allvars)}
    return MonomialOrderWitness(weights, tuple(sorted(allvars)), flavor="weight")


# -- certificates ------------------------------------------------------------

@dataclass(frozen=True)
class KoenigCertificate:
    generator_ids: tuple[int, ...]
    marking: tuple[str, ...]
    witness: MonomialOrderWitness
    claimed_height: int

    def __len__(self) -> int:
        return len(self.generator_ids)


@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    reason: str = "ok"

    def __bool__(self) -> bool:
        return self.ok


def empty_certificate() -> KoenigCertificate:
    return KoenigCertificate((), (), MonomialOrderWitness({}, ()), 0)


def verify_certificate(gens, cert: KoenigCertificate, expected_height: int) -> VerifyResult:
    """Check a certificate against a generator list; never raises on bad data."""
    gens = list(gens)
    if cert.claimed_height != expected_height or len(cert.generator_ids) != expected_height:
        return VerifyResult(False, "height-mismatch")
    if len(cert.marking) != len(cert.generator_ids):
        return VerifyResult(False, "marking-shape")
    if any(mk not in ("first", "second") for mk in cert.marking):
        return VerifyResult(False, "marking-shape")
    if any(not (0 <= g < len(gens)) for g in cert.generator_ids):
        return VerifyResult(False, "bad-generator-index")
    if len(set(cert.generator_ids)) != len(cert.generator_ids):
        return VerifyResult(False, "duplicate-generator")
    marked = []
    for g, mk in zip(cert.generator_ids, cert.marking):
        win, lose = gens[g].marked(mk)
        marked.append((win, lose))
    try:
        if not is_monomial_regular_sequence(w for w, _ in marked):
            return VerifyResult(False, "marked-monomials-not-coprime")
    except UnitMonomial:
        return VerifyResult(False, "unit-monomial")
    for win, lose in marked:
        try:
            if compare(cert.witness, win, lose) != 1:
                return VerifyResult(False, "witness-does-not-realize-marking")
        except EqualMonomials:
            return VerifyResult(False, "degenerate-binomial")
    return VerifyResult(True)


def search_certificate(gens, h: int,
                       forbidden_vars=frozenset()) -> Optional[KoenigCertificate]:
    """First certificate of size h in deterministic order, or None.

    Backtracks over (generator, marking) choices with indices strictly
    increasing; a choice is admissible only while all marked monomials stay
    pairwise coprime (and avoid `forbidden_vars`), which prunes hard before
    the final exact realizability check.
    """
    gens = list(gens)
    forbidden = frozenset(forbidden_vars)
    if h < 0:
        return None
    if h == 0:
        return empty_certificate()
    options = []
    allowed: set[str] = set()
    for b in gens:
        opts = []
        for mk in ("first", "second"):
            win, _ = b.marked(mk)
            vs = frozenset(win.variables())
            if not (vs & forbidden):
                opts.append((mk, vs))
                allowed |= vs
        options.append(tuple(opts))
    if 2 * h > len(allowed):
        return None

    chosen: list[tuple[int, str]] = []
    used: set[str] = set()

    def backtrack(start: int) -> Optional[KoenigCertificate]:
        if len(chosen) == h:
            ids = tuple(i for i, _ in chosen)
            marking = tuple(mk for _, mk in chosen)
            witness = marking_realizable([gens[i] for i in ids], marking)
            if witness is None:
                return None
            return KoenigCertificate(ids, marking, witness, h)
        need = h - len(chosen)
        for i in range(start, len(gens) - need + 1):
            for mk, vs in options[i]:
                if used & vs:
                    continue
                chosen.append((i, mk))
                used.update(vs)
                found = backtrack(i + 1)
                if found is not None:
                    return found
                chosen.pop()
                used.difference_update(vs)
        return None

    return backtrack(0)


# -- JSON round-trip ---------------------------------------------------------

def certificate_to_json(cert: KoenigCertificate, gens) -> dict:
    gens = list(gens)
    return {
        "generators": [gens[i].tag for i in cert.generator_ids],
        "marking": list(cert.marking),
        "weights": {v: str(w) for v, w in sorted(cert.witness.weights.items())},
        "tiebreak": list(cert.witness.tiebreak),
        "height": cert.claimed_height,
    }


def certificate_from_json(data: dict, gens) -> KoenigCertificate:
    gens = list(gens)
    by_tag = {b.tag: i for i, b in enumerate(gens)}
    try:
        ids = tuple(by_tag[t] for t in data["generators"])
    except KeyError as e:
        raise ValueError(f"certificate references unknown generator tag {e}") from None
    witness = MonomialOrderWitness(
        {v: Fraction(w) for v, w in data["weights"].items()},
        tuple(data["tiebreak"]),
    )
    return KoenigCertificate(ids, tuple(data["marking"]), witness, int(data["height"]))

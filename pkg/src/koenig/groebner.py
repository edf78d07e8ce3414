"""Brute-force Groebner oracle over exact rationals.

Buchberger with the product criterion and a hard reduction-step budget;
reduced bases are normalized monic and sorted by leading monomial, so runs
are deterministic.  Heights come from the initial ideal: the dimension of a
monomial quotient is the largest set of variables containing no generator's
support (supports suffice, the radical has the same dimension).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .errors import BudgetExceeded
from .ideals import Binomial, Monomial, MonomialOrderWitness, compare

DEFAULT_BUDGET = 50_000


class Polynomial:
    """Sparse polynomial: monomial -> nonzero rational coefficient."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[dict[Monomial, Fraction]] = None):
        self.terms = {m: c for m, c in (terms or {}).items() if c}

    @staticmethod
    def from_binomial(b: Binomial) -> "Polynomial":
        if b.first == b.second:
            return Polynomial()
        return Polynomial({b.first: Fraction(1), b.second: Fraction(-1)})

    @staticmethod
    def monomial(m: Monomial, c: Fraction = Fraction(1)) -> "Polynomial":
        return Polynomial({m: Fraction(c)})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "Polynomial") -> "Polynomial":
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, Fraction(0)) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Polynomial(out)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + other.scale(Fraction(-1))

    def scale(self, c: Fraction) -> "Polynomial":
        if not c:
            return Polynomial()
        return Polynomial({m: cc * c for m, cc in self.terms.items()})

    def term_mul(self, m: Monomial, c: Fraction = Fraction(1)) -> "Polynomial":
        if not c:
            return Polynomial()
        return Polynomial({mm.mul(m): cc * c for mm, cc in self.terms.items()})

    def leading(self, witness: MonomialOrderWitness) -> tuple[Monomial, Fraction]:
        it = iter(self.terms)
        best = next(it)
        for m in it:
            if compare(witness, m, best) > 0:
                best = m
        return best, self.terms[best]

    def monic(self, witness: MonomialOrderWitness) -> "Polynomial":
        _, c = self.leading(witness)
        return self.scale(1 / c)

    def canonical(self) -> tuple:
        return tuple(sorted((m.exps, c) for m, c in self.terms.items()))

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.terms == other.terms

    def __hash__(self):
        return hash(self.canonical())

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{c}*{Monomial(e)}" for e, c in self.canonical())


def _monomial_key(m: Monomial, witness: MonomialOrderWitness):
    """Sort key ascending in the witness order (weight, then lex on tiebreak)."""
    known = set(witness.tiebreak)
    extra = tuple(sorted(set(m.variables()) - known))
    return (witness.weight_of(m),
            tuple(m.exponent(v) for v in witness.tiebreak),
            tuple((v, m.exponent(v)) for v in extra))


class _StepCounter:
    __slots__ = ("steps", "budget")

    def __init__(self, budget: int):
        self.steps = 0
        self.budget = budget

    def tick(self):
        self.steps += 1
        if self.steps > self.budget:
            raise BudgetExceeded(f"oracle budget of {self.budget} reduction steps exceeded")


class _Reducer:
    """Active basis with a per-variable index over leading monomials."""

    def __init__(self, witness: MonomialOrderWitness):
        self.witness = witness
        self.polys: list[Polynomial] = []
        self.leads: list[tuple[Monomial, Fraction]] = []
        self.active: list[bool] = []
        self.by_var: dict[str, list[int]] = {}

    def add(self, p: Polynomial) -> int:
        i = len(self.polys)
        lead = p.leading(self.witness)
        self.polys.append(p)
        self.leads.append(lead)
        self.active.append(True)
        for v in lead[0].variables():
            self.by_var.setdefault(v, []).append(i)
        return i

    def retire(self, i: int):
        self.active[i] = False

    def find_divisor(self, m: Monomial, skip: int = -1) -> int:
        seen = set()
        for v in m.variables():
            for i in self.by_var.get(v, ()):
                if i == skip or i in seen or not self.active[i]:
                    continue
                seen.add(i)
                if self.leads[i][0].divides(m):
                    return i
        return -1

    def normal_form(self, p: Polynomial, counter: _StepCounter,
                    skip: int = -1) -> Polynomial:
        remainder: dict[Monomial, Fraction] = {}
        work = Polynomial(dict(p.terms))
        while not work.is_zero():
            lm, lc = work.leading(self.witness)
            i = self.find_divisor(lm, skip=skip)
            if i < 0:
                remainder[lm] = lc
                del work.terms[lm]
                continue
            counter.tick()
            gl, gc = self.leads[i]
            work = work - self.polys[i].term_mul(lm.div(gl), lc / gc)
        return Polynomial(remainder)


def buchberger(gens, witness: MonomialOrderWitness,
               budget: int = DEFAULT_BUDGET,
               return_steps: bool = False):
    """Reduced Groebner basis, monic, sorted by leading monomial.

    Accepts Binomial or Polynomial generators.  Raises BudgetExceeded once
    more than `budget` single division steps have been spent.
    """
    counter = _StepCounter(budget)
    polys = []
    seen = set()
    for g in gens:
        p = g if isinstance(g, Polynomial) else Polynomial.from_binomial(g)
        if p.is_zero():
            continue
        p = p.monic(witness)
        key = p.canonical()
        if key not in seen:
            seen.add(key)
            polys.append(p)

    red = _Reducer(witness)
    for p in polys:
        red.add(p)

    def pair_key(i: int, j: int):
        lcm = red.leads[i][0].lcm(red.leads[j][0])
        return (lcm.degree(), _monomial_key(lcm, witness), i, j)

    pairs = []
    for j in range(len(polys)):
        for i in range(j):
            if not red.leads[i][0].coprime(red.leads[j][0]):
                pairs.append((i, j))
    pairs.sort(key=lambda ij: pair_key(*ij))

    while pairs:
        i, j = pairs.pop(0)
        if not red.active[i] or not red.active[j]:
            continue
        li, _ = red.leads[i]
        lj, _ = red.leads[j]
        lcm = li.lcm(lj)
        s = (red.polys[i].term_mul(lcm.div(li))
             - red.polys[j].term_mul(lcm.div(lj)))
        if s.is_zero():
            continue
        r = red.normal_form(s, counter)
        if r.is_zero():
            continue
        k = red.add(r.monic(witness))
        fresh = []
        for t in range(k):
            if red.active[t] and not red.leads[t][0].coprime(red.leads[k][0]):
                fresh.append((t, k))
        pairs.extend(fresh)
        pairs.sort(key=lambda ij: pair_key(*ij))

    # minimalize: drop elements whose lead is divisible by another lead
    for i in range(len(red.polys)):
        if not red.active[i]:
            continue
        if red.find_divisor(red.leads[i][0], skip=i) >= 0:
            red.retire(i)
    # tail-reduce survivors against each other
    changed = True
    while changed:
        changed = False
        for i in range(len(red.polys)):
            if not red.active[i]:
                continue
            r = red.normal_form(red.polys[i], counter, skip=i)
            r = r.monic(witness)
            if r.terms != red.polys[i].terms:
                red.polys[i] = r
                changed = True
    basis = [red.polys[i] for i in range(len(red.polys)) if red.active[i]]
    basis.sort(key=lambda p: _monomial_key(p.leading(witness)[0], witness))
    if return_steps:
        return basis, counter.steps
    return basis


# -- monomial ideals ----------------------------------------------------------

class MonomialIdeal:
    """Antichain of monomial generators under divisibility."""

    __slots__ = ("minimal_generators",)

    def __init__(self, monomials):
        ms = sorted(set(monomials), key=lambda m: (m.degree(), m.exps))
        keep: list[Monomial] = []
        for m in ms:
            if not any(g.divides(m) for g in keep):
                keep.append(m)
        self.minimal_generators = tuple(keep)

    def contains(self, m: Monomial) -> bool:
        return any(g.divides(m) for g in self.minimal_generators)


def dimension_of_monomial_quotient(ideal, variables) -> int:
    """Krull dimension of S/I for a monomial ideal I.

    Largest cardinality of a variable subset containing no generator's
    support; exhaustive branch and bound on the support hypergraph.
    """
    if not isinstance(ideal, MonomialIdeal):
        ideal = MonomialIdeal(ideal)
    supports = sorted({frozenset(g.variables()) for g in ideal.minimal_generators},
                      key=lambda s: (len(s), sorted(s)))
    if any(not s for s in supports):
        raise ValueError("monomial ideal contains a unit")
    allvars = frozenset(variables)
    best = 0
    seen: set[frozenset] = set()

    def branch(allowed: frozenset):
        nonlocal best
        if len(allowed) <= best or allowed in seen:
            return
        seen.add(allowed)
        hit = next((s for s in supports if s <= allowed), None)
        if hit is None:
            best = len(allowed)
            return
        for v in sorted(hit):
            branch(allowed - {v})

    branch(allvars)
    return best


def ideal_height(gens, witness: MonomialOrderWitness, variables,
                 budget: int = DEFAULT_BUDGET) -> int:
    """Height via the initial ideal of a Groebner basis."""
    variables = list(variables)
    gb = buchberger(gens, witness, budget=budget)
    if not gb:
        return 0
    leads = MonomialIdeal(p.leading(witness)[0] for p in gb)
    return len(variables) - dimension_of_monomial_quotient(leads, variables)


def revlex_witness(variables_desc, flavor: str = "revlex") -> MonomialOrderWitness:
    """Weights reproducing reverse-lex on the degree-2 monomials in play.

    With variables v_0 > v_1 > ... weighted 4^(n+1) - 4^(i+1), weight gaps
    dominate geometrically, so on any pair of distinct degree-2 monomials
    the comparison equals revlex: the monomial avoiding the smallest
    differing variable wins.
    """
    vs = list(variables_desc)
    n = len(vs)
    top = Fraction(4) ** (n + 1)
    weights = {v: top - Fraction(4) ** (i + 1) for i, v in enumerate(vs)}
    return MonomialOrderWitness(weights, tuple(vs), flavor=flavor)


def rank_revlex_witness(lat) -> MonomialOrderWitness:
    """Reverse-lex with variables sorted by rank (higher rank is larger)."""
    order = sorted(range(lat.n), key=lambda i: (-lat.rank(i), lat.masks[i]))
    return revlex_witness([lat.var(i) for i in order])


# -- identities and zero-divisor oracle ---------------------------------------

def grid_var(x: int, y: int) -> str:
    return f"({x},{y})"


def _interval_minor(a: tuple[int, int], b: tuple[int, int]) -> Polynomial:
    (i, j), (k, l) = a, b
    return Polynomial({
        Monomial.of(grid_var(i, j), grid_var(k, l)): Fraction(1),
        Monomial.of(grid_var(k, j), grid_var(i, l)): Fraction(-1),
    })


def check_split_syzygy(i_triple, j_pair, transpose: bool = False) -> bool:
    """Exact check of the three-term splitting relation among 2-minors.

    For corner columns i1 < i2 < i3 and rows j1 < j2 the inner minors of
    [(i1,j1),(i3,j2)], [(i1,j1),(i2,j2)], [(i2,j1),(i3,j2)] satisfy a syzygy
    with the three top-row variables as coefficients; `transpose` checks the
    mirrored identity with the roles of rows and columns exchanged.
    """
    i1, i2, i3 = i_triple
    j1, j2 = j_pair
    if not (i1 < i2 < i3 and j1 < j2):
        raise ValueError("need i1 < i2 < i3 and j1 < j2")

    def pt(x, y):
        return (y, x) if transpose else (x, y)

    f_cb = _interval_minor(pt(i2, j1), pt(i3, j2))
    f_ab = _interval_minor(pt(i1, j1), pt(i3, j2))
    f_ad = _interval_minor(pt(i1, j1), pt(i2, j2))
    total = (f_cb.term_mul(Monomial.of(grid_var(*pt(i1, j2))))
             - f_ab.term_mul(Monomial.of(grid_var(*pt(i2, j2))))
             + f_ad.term_mul(Monomial.of(grid_var(*pt(i3, j2)))))
    return total.is_zero()


def is_zerodivisor_after(ms, m: Monomial) -> bool:
    """Is m a zero divisor modulo the monomial ideal (ms)?

    The colon ideal (ms) : m is generated by the quotients u / gcd-with-m
    over generators u, so m is a zero divisor exactly when one of those
    quotients escapes (ms); the witness search space is therefore finite
    with degree bounded by the generators.
    """
    ideal = MonomialIdeal(ms)
    if not ideal.minimal_generators:
        return False
    for u in ideal.minimal_generators:
        t = u.quotient_floor(m)
        if not ideal.contains(t):
            return True
    return False

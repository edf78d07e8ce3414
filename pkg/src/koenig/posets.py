"""Finite posets: transitive closure, order ideals, ordinal sums, enumeration.

Elements are opaque string labels; internally every element gets an index
0..n-1 and relations are kept as bitmasks over those indices.  Order ideals
are bitmasks as well (bit i set iff element i belongs to the ideal), listed
canonically by (popcount, numeric value).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product

from .errors import CycleDetected, SizeLimit

IDEAL_ENUM_CAP = 20
POSET_ENUM_CAP = 6


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class Poset:
    """Finite strict partial order.

    elements: labels in declaration order.
    below[i]: bitmask of indices strictly below element i (transitively closed).
    """

    elements: tuple[str, ...]
    below: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.elements)

    def index(self, label: str) -> int:
        return self.elements.index(label)

    def less(self, i: int, j: int) -> bool:
        return bool(self.below[j] >> i & 1)

    @property
    def above(self) -> tuple[int, ...]:
        up = [0] * self.n
        for j, mask in enumerate(self.below):
            for i in _bits(mask):
                up[i] |= 1 << j
        return tuple(up)

    def covers(self) -> list[tuple[int, int]]:
        """(i, j) pairs with j covering i."""
        up = self.above
        out = []
        for j, mask in enumerate(self.below):
            for i in _bits(mask):
                if not (up[i] & mask):
                    out.append((i, j))
        return out

    def dual(self) -> "Poset":
        return Poset(self.elements, self.above)

    def to_json(self) -> dict:
        return {
            "elements": list(self.elements),
            "covers": [[self.elements[i], self.elements[j]] for i, j in self.covers()],
        }


def close_transitively(elements, covers) -> Poset:
    """Build a poset from a cover list, rejecting cycles.

    covers: iterable of (small, large) label pairs.
    """
    elements = tuple(elements)
    index = {e: i for i, e in enumerate(elements)}
    if len(index) != len(elements):
        raise ValueError("duplicate element labels")
    below = [0] * len(elements)
    for a, b in covers:
        if a not in index or b not in index:
            raise ValueError(f"cover ({a!r}, {b!r}) references undeclared element")
        below[index[b]] |= 1 << index[a]
    changed = True
    while changed:
        changed = False
        for j in range(len(elements)):
            acc = below[j]
            for i in _bits(below[j]):
                acc |= below[i]
            if acc != below[j]:
                below[j] = acc
                changed = True
    for i in range(len(elements)):
        if below[i] >> i & 1:
            raise CycleDetected(f"cover list induces a cycle through {elements[i]!r}")
    return Poset(elements, tuple(below))


def poset_from_json(data: dict) -> Poset:
    return close_transitively(data["elements"], [tuple(c) for c in data["covers"]])


def chain_poset(n: int, prefix: str = "c") -> Poset:
    return close_transitively(
        [f"{prefix}{i}" for i in range(n)],
        [(f"{prefix}{i}", f"{prefix}{i + 1}") for i in range(n - 1)],
    )


def antichain_poset(n: int, prefix: str = "a") -> Poset:
    return close_transitively([f"{prefix}{i}" for i in range(n)], [])


def order_ideals(p: Poset) -> list[int]:
    """All downward-closed subsets of p, as bitmasks, sorted (size, value)."""
    n = p.n
    if n > IDEAL_ENUM_CAP:
        raise SizeLimit(f"order ideal enumeration capped at {IDEAL_ENUM_CAP} elements")
    below = p.below
    out = []
    for s in range(1 << n):
        ok = True
        m = s
        while m:
            low = m & -m
            if below[low.bit_length() - 1] & ~s:
                ok = False
                break
            m ^= low
        if ok:
            out.append(s)
    out.sort(key=lambda s: (s.bit_count(), s))
    return out


def ideal_members(p: Poset, mask: int) -> tuple[str, ...]:
    return tuple(p.elements[i] for i in _bits(mask))


def _fresh_labels(taken: set[str], labels) -> list[str]:
    out = []
    for lab in labels:
        new = lab
        while new in taken:
            new = new + "'"
        taken.add(new)
        out.append(new)
    return out


def ordinal_sum(p1: Poset, p2: Poset, with_middle: bool = False,
                middle_label: str = "m") -> Poset:
    """Stack p1 below p2; optionally insert a fresh element between them.

    Labels colliding between the two summands (or with the middle element)
    are decorated with primes.
    """
    taken: set[str] = set()
    labels1 = _fresh_labels(taken, p1.elements)
    mid = _fresh_labels(taken, [middle_label]) if with_middle else []
    labels2 = _fresh_labels(taken, p2.elements)
    n1 = p1.n
    nm = len(mid)
    full1 = (1 << n1) - 1
    below = list(p1.below)
    if with_middle:
        below.append(full1)
    base2 = full1 | (((1 << nm) - 1) << n1)
    for j in range(p2.n):
        below.append(base2 | (p2.below[j] << (n1 + nm)))
    return Poset(tuple(labels1 + mid + labels2), tuple(below))


def _canonical_key(n: int, below: list[int]) -> tuple:
    """Minimal relation encoding over label permutations (iso-class key).

    Permutations are restricted to classes of an isomorphism-invariant
    vertex fingerprint, which keeps the search tiny for all but the most
    symmetric posets.
    """
    pairs = [(i, j) for j in range(n) for i in _bits(below[j])]
    if not pairs:
        return (n,)
    up = [0] * n
    for i, j in pairs:
        up[i] |= 1 << j
    fp = [(below[i].bit_count(), up[i].bit_count()) for i in range(n)]
    groups: dict[tuple, list[int]] = {}
    for i in range(n):
        groups.setdefault(fp[i], []).append(i)
    keys = sorted(groups)
    # each fingerprint class owns a canonical block of target positions
    targets = []
    offset = 0
    for k in keys:
        size = len(groups[k])
        targets.append(range(offset, offset + size))
        offset += size
    best = None
    for perm_parts in product(*(permutations(t) for t in targets)):
        sigma = [0] * n
        for key, part in zip(keys, perm_parts):
            for src, dst in zip(groups[key], part):
                sigma[src] = dst
        enc = tuple(sorted((sigma[i], sigma[j]) for i, j in pairs))
        if best is None or enc < best:
            best = enc
    return (n, tuple(sorted(fp)), best)


def enumerate_posets(n: int, cap: int = POSET_ENUM_CAP) -> list[Poset]:
    """All posets on n elements up to isomorphism, deterministic order.

    Generates every transitively closed relation compatible with the natural
    linear order (every poset has one such labeling), then keeps one
    representative per canonical form.
    """
    if n > cap:
        raise SizeLimit(f"poset enumeration capped at {cap} elements")
    if n == 0:
        return [Poset((), ())]
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    labels = tuple(f"p{i}" for i in range(n))
    seen: dict[tuple, tuple[int, ...]] = {}
    for bits in range(1 << len(pairs)):
        below = [0] * n
        for k, (i, j) in enumerate(pairs):
            if bits >> k & 1:
                below[j] |= 1 << i
        ok = True
        for j in range(n):
            m = below[j]
            for i in _bits(m):
                if below[i] & ~m:
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            continue
        key = _canonical_key(n, below)
        if key not in seen:
            seen[key] = tuple(below)
    return [Poset(labels, seen[k]) for k in sorted(seen)]

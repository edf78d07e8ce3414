"""Polyomino geometry, inner 2-minors, trees, and the Koenig classifier.

Cells are unit squares addressed by their lower-left corner.  Variables of
the polyomino ideal are the vertices of the cells, named "(x,y)".  The
certificate-preserving cell attachment works in a canonical frame (base
cell at the origin, new cell to its right, marked diagonally) and reaches
the mirrored variants through the eight symmetries of the grid; every
constructed certificate is re-verified, which is the ground truth for the
mirrored cases.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import (
    EmptyInput,
    NotConnected,
    NotSimple,
    NotTree,
    PreconditionViolated,
    SizeLimit,
)
from .groebner import DEFAULT_BUDGET, check_split_syzygy, grid_var, ideal_height, revlex_witness
from .ideals import (
    Binomial,
    KoenigCertificate,
    Monomial,
    marking_realizable,
    search_certificate,
    verify_certificate,
)

POLYOMINO_ENUM_CAP = 7

Cell = tuple[int, int]
Point = tuple[int, int]
Interval = tuple[Point, Point]


@dataclass(frozen=True)
class Polyomino:
    """Edge-connected cell collection, translated to the origin, sorted."""

    cells: tuple[Cell, ...]

    def __len__(self) -> int:
        return len(self.cells)

    def cellset(self) -> frozenset:
        return frozenset(self.cells)

    def to_json(self) -> dict:
        return {"cells": [list(c) for c in self.cells]}


def _neighbors(c: Cell):
    x, y = c
    return ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1))


def _connected(cells: frozenset) -> bool:
    start = next(iter(cells))
    seen = {start}
    stack = [start]
    while stack:
        c = stack.pop()
        for nb in _neighbors(c):
            if nb in cells and nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == len(cells)


def _normalize(cells) -> tuple[Cell, ...]:
    cs = sorted(set((int(x), int(y)) for x, y in cells))
    dx = min(x for x, _ in cs)
    dy = min(y for _, y in cs)
    return tuple((x - dx, y - dy) for x, y in cs)


def polyomino(cells) -> Polyomino:
    cells = list(cells)
    if not cells:
        raise EmptyInput("polyomino needs at least one cell")
    norm = _normalize(cells)
    if not _connected(frozenset(norm)):
        raise NotConnected("cells are not edge-connected")
    return Polyomino(norm)


def parse_polyomino(source) -> Polyomino:
    """Accepts an ASCII grid (rows top to bottom, '#'=cell), a JSON-style
    {"cells": [[x,y],...]} mapping, or an iterable of (x, y) pairs."""
    if isinstance(source, dict):
        return polyomino([tuple(c) for c in source.get("cells", [])])
    if isinstance(source, str):
        rows = [r for r in source.splitlines() if r.strip()]
        if not rows:
            raise EmptyInput("empty grid")
        cells = []
        height = len(rows)
        for r, row in enumerate(rows):
            for c, ch in enumerate(row):
                if ch == "#":
                    cells.append((c, height - 1 - r))
                elif ch not in ". ":
                    raise ValueError(f"unexpected character {ch!r} in grid")
        return polyomino(cells)
    return polyomino(source)


# -- geometry -----------------------------------------------------------------

def cell_vertices(c: Cell) -> tuple[Point, Point, Point, Point]:
    x, y = c
    return ((x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1))


def vertex_set(p: Polyomino) -> tuple[Point, ...]:
    vs: set[Point] = set()
    for c in p.cells:
        vs.update(cell_vertices(c))
    return tuple(sorted(vs))


def vertices_and_edges(p: Polyomino):
    """(vertices, edges, interior vertices); interior = vertex of 4 cells."""
    count: dict[Point, int] = {}
    edges: set[frozenset] = set()
    for c in p.cells:
        a, d, cc, b = cell_vertices(c)
        for v in (a, d, cc, b):
            count[v] = count.get(v, 0) + 1
        edges.update({frozenset((a, d)), frozenset((a, cc)),
                      frozenset((d, b)), frozenset((cc, b))})
    vertices = tuple(sorted(count))
    interior = frozenset(v for v, k in count.items() if k == 4)
    return vertices, tuple(sorted(tuple(sorted(e)) for e in edges)), interior


def free_vertices(p: Polyomino) -> frozenset:
    count: dict[Point, int] = {}
    for c in p.cells:
        for v in cell_vertices(c):
            count[v] = count.get(v, 0) + 1
    return frozenset(v for v, k in count.items() if k == 1)


def leaves(p: Polyomino) -> tuple[Cell, ...]:
    free = free_vertices(p)
    return tuple(c for c in p.cells
                 if sum(1 for v in cell_vertices(c) if v in free) >= 2)


def inner_intervals(p: Polyomino) -> list[Interval]:
    """Proper intervals all of whose cells lie in the polyomino."""
    cells = p.cellset()
    maxx = max(x for x, _ in p.cells)
    maxy = max(y for _, y in p.cells)
    out = []
    for x1, y1 in p.cells:
        for x2 in range(x1 + 1, maxx + 2):
            if (x2 - 1, y1) not in cells:
                break
            for y2 in range(y1 + 1, maxy + 2):
                if not all((x, y2 - 1) in cells for x in range(x1, x2)):
                    break
                out.append(((x1, y1), (x2, y2)))
    return sorted(out)


def interval_minor(iv: Interval) -> Binomial:
    (x1, y1), (x2, y2) = iv
    return Binomial(
        Monomial.of(grid_var(x1, y1), grid_var(x2, y2)),
        Monomial.of(grid_var(x2, y1), grid_var(x1, y2)),
        tag=f"f[({x1},{y1}),({x2},{y2})]",
    )


def inner_minors(p: Polyomino) -> list[Binomial]:
    return [interval_minor(iv) for iv in inner_intervals(p)]


@dataclass(frozen=True)
class EdgeIntervalProfile:
    horizontal: tuple[Interval, ...]
    vertical: tuple[Interval, ...]

    @property
    def h(self) -> int:
        return len(self.horizontal)

    @property
    def v(self) -> int:
        return len(self.vertical)


def _runs(edges_by_line: dict[int, set[int]]):
    out = []
    for line in sorted(edges_by_line):
        xs = sorted(edges_by_line[line])
        start = prev = xs[0]
        for x in xs[1:]:
            if x != prev + 1:
                out.append((line, start, prev + 1))
                start = x
            prev = x
        out.append((line, start, prev + 1))
    return out


def edge_interval_profile(p: Polyomino) -> EdgeIntervalProfile:
    horiz: dict[int, set[int]] = {}
    vert: dict[int, set[int]] = {}
    for x, y in p.cells:
        horiz.setdefault(y, set()).add(x)
        horiz.setdefault(y + 1, set()).add(x)
        vert.setdefault(x, set()).add(y)
        vert.setdefault(x + 1, set()).add(y)
    hruns = tuple(((a, y), (b, y)) for y, a, b in _runs(horiz))
    vruns = tuple(((x, a), (x, b)) for x, a, b in _runs(vert))
    return EdgeIntervalProfile(tuple(sorted(hruns)), tuple(sorted(vruns)))


def is_simple(p: Polyomino) -> bool:
    """Hole-free: every non-cell of the padded bounding box reaches the rim."""
    cells = p.cellset()
    xs = [x for x, _ in p.cells]
    ys = [y for _, y in p.cells]
    x0, x1 = min(xs) - 1, max(xs) + 1
    y0, y1 = min(ys) - 1, max(ys) + 1
    start = (x0, y0)
    seen = {start}
    stack = [start]
    while stack:
        c = stack.pop()
        for nb in _neighbors(c):
            if (x0 <= nb[0] <= x1 and y0 <= nb[1] <= y1
                    and nb not in cells and nb not in seen):
                seen.add(nb)
                stack.append(nb)
    total = (x1 - x0 + 1) * (y1 - y0 + 1)
    return len(seen) == total - len(cells)


def height_simple(p: Polyomino) -> int:
    """|V(P)| - (h(P) + v(P) - 1); only valid for simple polyominoes."""
    if not is_simple(p):
        raise NotSimple("height formula requires a hole-free polyomino")
    prof = edge_interval_profile(p)
    return len(vertex_set(p)) - (prof.h + prof.v - 1)


def is_tree(p: Polyomino) -> bool:
    """Simple, has a leaf, and no 2x2 inner interval."""
    if not is_simple(p):
        return False
    if not leaves(p):
        return False
    cells = p.cellset()
    for x, y in p.cells:
        if {(x + 1, y), (x, y + 1), (x + 1, y + 1)} <= cells:
            return False
    return True


def enumerate_polyominoes(n: int, cap: int = POLYOMINO_ENUM_CAP) -> list[Polyomino]:
    """All fixed polyominoes with n cells, up to translation."""
    if n > cap:
        raise SizeLimit(f"polyomino enumeration capped at {cap} cells")
    if n <= 0:
        return []
    current = {((0, 0),)}
    for _ in range(n - 1):
        grown = set()
        for cells in current:
            cs = set(cells)
            for c in cells:
                for nb in _neighbors(c):
                    if nb not in cs:
                        grown.add(_normalize(cs | {nb}))
        current = grown
    return [Polyomino(c) for c in sorted(current)]


def check_all_split_syzygies(p: Polyomino) -> bool:
    """The splitting identity on every splittable inner interval of p."""
    for (x1, y1), (x2, y2) in inner_intervals(p):
        for xm in range(x1 + 1, x2):
            if not check_split_syzygy((x1, xm, x2), (y1, y2)):
                return False
        for ym in range(y1 + 1, y2):
            if not check_split_syzygy((y1, ym, y2), (x1, x2), transpose=True):
                return False
    return True


# -- certificate-preserving cell attachment -----------------------------------

_SYMS = (
    lambda x, y: (x, y),
    lambda x, y: (-y, x),
    lambda x, y: (-x, -y),
    lambda x, y: (y, -x),
    lambda x, y: (-x, y),
    lambda x, y: (x, -y),
    lambda x, y: (y, x),
    lambda x, y: (-y, -x),
)


def _map_cell(sym, c: Cell) -> Cell:
    pts = [sym(*v) for v in cell_vertices(c)]
    return (min(x for x, _ in pts), min(y for _, y in pts))


def _map_interval(mapper, iv: Interval) -> Interval:
    a, b = mapper(iv[0]), mapper(iv[1])
    return ((min(a[0], b[0]), min(a[1], b[1])), (max(a[0], b[0]), max(a[1], b[1])))


def _pair_marking(iv: Interval, pair: frozenset) -> str:
    (x1, y1), (x2, y2) = iv
    if pair == frozenset(((x1, y1), (x2, y2))):
        return "first"
    if pair == frozenset(((x2, y1), (x1, y2))):
        return "second"
    raise ValueError("pair is not a corner pair of the interval")


@dataclass(frozen=True)
class _AttachTemplate:
    base_iv: Interval
    base_marking: str
    shared: frozenset
    far: frozenset
    wide_iv: Interval
    wide_marking: str
    cell_iv: Interval
    cell_marking: str


def _attach_templates(base: Cell, new: Cell, run: int):
    """Instantiations of the canonical attachment for this base/new pair.

    Canonical frame: base run [(1-run,0),(1,1)] marked diagonally, new cell
    at (1,0); each grid symmetry carrying the canonical offset onto the
    actual one contributes one variant (the reflection swaps the marking
    orientation)."""
    off = (new[0] - base[0], new[1] - base[1])
    out = []
    for sym in _SYMS:
        c0 = _map_cell(sym, (0, 0))
        c1 = _map_cell(sym, (1, 0))
        if (c1[0] - c0[0], c1[1] - c0[1]) != off:
            continue
        tx, ty = base[0] - c0[0], base[1] - c0[1]

        def mapper(pt, sym=sym, tx=tx, ty=ty):
            q = sym(*pt)
            return (q[0] + tx, q[1] + ty)

        base_iv = _map_interval(mapper, ((1 - run, 0), (1, 1)))
        wide_iv = _map_interval(mapper, ((1 - run, 0), (2, 1)))
        cell_iv = _map_interval(mapper, ((1, 0), (2, 1)))
        base_pair = frozenset((mapper((1 - run, 0)), mapper((1, 1))))
        wide_pair = frozenset((mapper((1 - run, 0)), mapper((2, 1))))
        cell_pair = frozenset((mapper((1, 1)), mapper((2, 0))))
        out.append(_AttachTemplate(
            base_iv=base_iv,
            base_marking=_pair_marking(base_iv, base_pair),
            shared=frozenset((mapper((1, 0)), mapper((1, 1)))),
            far=frozenset((mapper((2, 0)), mapper((2, 1)))),
            wide_iv=wide_iv,
            wide_marking=_pair_marking(wide_iv, wide_pair),
            cell_iv=cell_iv,
            cell_marking=_pair_marking(cell_iv, cell_pair),
        ))
    return out


def _marked_pair(iv: Interval, marking: str) -> frozenset:
    (x1, y1), (x2, y2) = iv
    if marking == "first":
        return frozenset(((x1, y1), (x2, y2)))
    return frozenset(((x2, y1), (x1, y2)))


def _entries_feasible(entries: dict[Interval, str]) -> bool:
    pairs = [_marked_pair(iv, mk) for iv, mk in entries.items()]
    used: set[Point] = set()
    for pr in pairs:
        if used & pr:
            return False
        used |= pr
    bins = [interval_minor(iv) for iv in entries]
    return marking_realizable(bins, list(entries.values())) is not None


def _entries_to_certificate(p: Polyomino, entries: dict[Interval, str]):
    ivs = inner_intervals(p)
    index = {iv: i for i, iv in enumerate(ivs)}
    items = sorted((index[iv], mk) for iv, mk in entries.items())
    ids = tuple(i for i, _ in items)
    marking = tuple(mk for _, mk in items)
    gens = inner_minors(p)
    witness = marking_realizable([gens[i] for i in ids], marking)
    if witness is None:
        return None
    return KoenigCertificate(ids, marking, witness, len(ids))


def extend_polyomino_certificate(p: Polyomino, cert: KoenigCertificate, cell):
    """Add `cell`, replacing the base cell's minor in the certificate by the
    minors of the doubled interval and of the new cell.

    The base cell is the certificate-bearing neighbor of `cell`; its minor
    must be in the certificate, the shared edge's vertices must be boundary
    vertices, and the two far vertices of the new cell must be fresh.
    Returns (extended polyomino, extended certificate)."""
    cell = (int(cell[0]), int(cell[1]))
    cells = p.cellset()
    if cell in cells:
        raise PreconditionViolated("cell already belongs to the polyomino")
    gens = inner_minors(p)
    ivs = inner_intervals(p)
    if not verify_certificate(gens, cert, cert.claimed_height):
        raise PreconditionViolated("certificate does not verify against the polyomino")
    entries = {ivs[g]: mk for g, mk in zip(cert.generator_ids, cert.marking)}
    _, _, interior = vertices_and_edges(p)
    vset = set(vertex_set(p))
    problems = []
    for base in sorted(nb for nb in _neighbors(cell) if nb in cells):
        cell_iv = ((base[0], base[1]), (base[0] + 1, base[1] + 1))
        for tpl in _attach_templates(base, cell, run=1):
            if entries.get(cell_iv) != tpl.base_marking:
                problems.append(f"base {base}: cell minor not in certificate "
                                f"with marking {tpl.base_marking!r}")
                continue
            if any(v in interior for v in tpl.shared):
                problems.append(f"base {base}: shared edge vertex is interior")
                continue
            if any(v in vset for v in tpl.far):
                problems.append(f"base {base}: far vertices not fresh")
                continue
            new_entries = dict(entries)
            del new_entries[cell_iv]
            new_entries[tpl.wide_iv] = tpl.wide_marking
            new_entries[tpl.cell_iv] = tpl.cell_marking
            bigger = polyomino(p.cells + (cell,))
            out = _entries_to_certificate(bigger, new_entries)
            if out is None:
                raise RuntimeError("internal error: attachment marking not realizable")
            check = verify_certificate(inner_minors(bigger), out, cert.claimed_height + 1)
            if not check:
                raise RuntimeError(f"internal error: attached certificate invalid ({check.reason})")
            return bigger, out
    if not problems:
        problems.append("new cell has no neighbor in the polyomino")
    raise PreconditionViolated("; ".join(dict.fromkeys(problems)))


def _peel_order(p: Polyomino) -> Optional[list[Cell]]:
    """Leaf-removal order down to a single cell; None if peeling gets stuck."""
    cells = set(p.cells)
    order = []
    while len(cells) > 1:
        sub = Polyomino(tuple(sorted(cells)))
        ls = leaves(sub)
        if not ls:
            return None
        cell = min(ls)
        cells.remove(cell)
        order.append(cell)
    return order


def _replay(p: Polyomino, order: list[Cell], node_cap: int = 20000):
    """Rebuild the tree cell by cell, extending the certificate each step.

    At every attachment all runs flush against the shared edge are base
    candidates; choices backtrack, and the whole replay gives up once the
    node budget is spent (caller falls back to exhaustive search)."""
    start = [c for c in p.cells if c not in set(order)]
    if len(start) != 1:
        return None
    additions = list(reversed(order))
    nodes = 0

    def step(cells: frozenset, entries: dict[Interval, str], k: int):
        nonlocal nodes
        if k == len(additions):
            return entries
        nodes += 1
        if nodes > node_cap:
            return None
        new = additions[k]
        bases = [nb for nb in _neighbors(new) if nb in cells]
        if len(bases) != 1:
            return None
        base = bases[0]
        off = (new[0] - base[0], new[1] - base[1])
        axis_len = 1
        bx, by = base
        while (bx - off[0] * axis_len, by - off[1] * axis_len) in cells:
            axis_len += 1
        for run in range(1, axis_len + 1):
            for tpl in _attach_templates(base, new, run):
                if entries.get(tpl.base_iv) != tpl.base_marking:
                    continue
                nxt = dict(entries)
                del nxt[tpl.base_iv]
                nxt[tpl.wide_iv] = tpl.wide_marking
                nxt[tpl.cell_iv] = tpl.cell_marking
                if not _entries_feasible(nxt):
                    continue
                got = step(cells | {new}, nxt, k + 1)
                if got is not None:
                    return got
        return None

    cell0 = start[0]
    iv0 = (cell0, (cell0[0] + 1, cell0[1] + 1))
    for mk in ("first", "second"):
        got = step(frozenset(start), {iv0: mk}, 0)
        if got is not None:
            return got
    return None


def tree_certificate(p: Polyomino) -> KoenigCertificate:
    """Certificate of size |P| for a tree polyomino."""
    if not is_tree(p):
        raise NotTree("polyomino is not a tree")
    order = _peel_order(p)
    entries = _replay(p, order) if order is not None else None
    if entries is not None:
        cert = _entries_to_certificate(p, entries)
        if cert is not None and verify_certificate(inner_minors(p), cert, len(p)):
            return cert
    cert = search_certificate(inner_minors(p), len(p))
    if cert is None:
        raise RuntimeError("internal error: no certificate found for a tree")
    return cert


# -- classification -----------------------------------------------------------

MINIMALITY_NOTE = ("inner 2-minors are taken as the minimal generating system; "
                   "minimality is unstated for polyomino ideals")
CONDITIONAL_BOUND_NOTE = ("height <= |cells| bound is conditional on every vertex "
                          "variable being a non-zero divisor")


@dataclass(frozen=True)
class PolyominoClassification:
    verdict: str            # KOENIG | NOT_KOENIG | UNKNOWN
    height: Optional[int]
    height_source: str      # formula | oracle
    certificate: Optional[KoenigCertificate]
    bound_leq_cells: Optional[bool]
    notes: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "height": self.height,
            "height_source": self.height_source,
            "bound_leq_cells": self.bound_leq_cells,
            "notes": list(self.notes),
        }


def oracle_witness(p: Polyomino):
    return revlex_witness([grid_var(*v) for v in reversed(vertex_set(p))])


def classify_koenig_polyomino(p: Polyomino,
                              budget: int = DEFAULT_BUDGET) -> PolyominoClassification:
    """Tree shortcut, then formula-guided search, then oracle-guided search."""
    if is_tree(p):
        cert = tree_certificate(p)
        return PolyominoClassification(
            "KOENIG", len(p), "formula", cert, True,
            ("tree: certificate built by leaf replay",))
    minors = inner_minors(p)
    variables = [grid_var(*v) for v in vertex_set(p)]
    if is_simple(p):
        h = height_simple(p)
        cert = search_certificate(minors, h)
        if cert is not None:
            return PolyominoClassification(
                "KOENIG", h, "formula", cert, h <= len(p), (MINIMALITY_NOTE,))
        return PolyominoClassification(
            "NOT_KOENIG", h, "formula", None, h <= len(p),
            ("exhaustive search over inner 2-minors found no certificate",
             MINIMALITY_NOTE))
    h = ideal_height(minors, oracle_witness(p), variables, budget=budget)
    cert = search_certificate(minors, h)
    if cert is not None:
        return PolyominoClassification(
            "KOENIG", h, "oracle", cert, h <= len(p),
            (MINIMALITY_NOTE, CONDITIONAL_BOUND_NOTE))
    return PolyominoClassification(
        "UNKNOWN", h, "oracle", None, h <= len(p),
        ("exhaustive search over inner 2-minors found no certificate",
         MINIMALITY_NOTE, CONDITIONAL_BOUND_NOTE))

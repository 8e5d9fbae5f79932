"""Patch partial isometries e(P, t1, t2) and their symbolic algebra."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np
from scipy.spatial import cKDTree

from .errors import InputError
from .field import FieldElement, parse_rational
from .geometry import Contact, compare_real, norm2
from .symmetry import attach_group
from .system import Tile, TilingSystem, _dist_exceeds, canonical_order, tile_sort_key
from .tower import PerronData, TowerElement


class PatchGenerator:
    """e(P, t1, t2), stored with t1's puncture at the origin."""

    __slots__ = ("tiles", "t1", "t2", "_hash")

    def __init__(self, tiles: Iterable[Tile], t1: Tile, t2: Tile):
        tiles = frozenset(tiles)
        if t1 not in tiles or t2 not in tiles:
            raise InputError("marked tiles must belong to the patch")
        if not t1.x.is_zero():
            v = -t1.x
            tiles = frozenset(t.translate(v) for t in tiles)
            t1, t2 = t1.translate(v), t2.translate(v)
        self.tiles = tiles
        self.t1 = t1
        self.t2 = t2
        self._hash = None

    def __eq__(self, other) -> bool:
        return isinstance(other, PatchGenerator) and self.t1 == other.t1 and self.t2 == other.t2 and self.tiles == other.tiles

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.tiles, self.t1, self.t2))
        return self._hash

    def __len__(self) -> int:
        return len(self.tiles)

    def adjoint(self) -> "PatchGenerator":
        return PatchGenerator(self.tiles, self.t2, self.t1)

    @property
    def star(self) -> "PatchGenerator":
        return self.adjoint()

    def is_diagonal(self) -> bool:
        return self.t1 == self.t2

    def ordered(self) -> list[Tile]:
        return canonical_order(self.tiles)

    def sort_key(self):
        return (
            self.t1.proto,
            self.t2.proto,
            tile_sort_key(self.t2)[1:],
            len(self.tiles),
            tuple(tile_sort_key(t) for t in self.ordered()),
        )

    def act(self, sys: TilingSystem, g: int) -> "PatchGenerator":
        G = attach_group(sys)
        return PatchGenerator((G.act_tile(g, t) for t in self.tiles), G.act_tile(g, self.t1), G.act_tile(g, self.t2))

    def __repr__(self) -> str:
        d = self.t2.x.approx()
        return f"e({len(self.tiles)} tiles, {self.t1.proto}->{self.t2.proto} @ ({d.real:.3f},{d.imag:.3f}))"


def two_tile(t1: Tile, t2: Tile) -> PatchGenerator:
    return PatchGenerator((t1, t2), t1, t2)


def adjoint(g: PatchGenerator) -> PatchGenerator:
    return g.adjoint()


def union_if_patch(sys: TilingSystem, A: frozenset, B: frozenset) -> frozenset | None:
    """A | B when the two patches agree where they overlap, else None."""
    extra = [t for t in B if t not in A]
    if not extra:
        return A
    base = [t for t in A if t not in B]
    if base:
        pts = np.array([[t.x.approx().real, t.x.approx().imag] for t in base])
        tree = cKDTree(pts)
        rad = 2 * sys.reach()
        for u in extra:
            z = u.x.approx()
            for j in tree.query_ball_point([z.real, z.imag], rad):
                if sys.contact(u, base[j]) is Contact.OVERLAP:
                    return None
    return A | B


def multiply(a: PatchGenerator, b: PatchGenerator, sys: TilingSystem) -> PatchGenerator | None:
    """e(P,t1,t2) e(P',t1',t2') = e(P u P', t1, t2') after aligning t1' with t2; None is zero."""
    if a.t2.proto != b.t1.proto:
        return None
    shift = a.t2.x
    moved = frozenset(t.translate(shift) for t in b.tiles)
    u = union_if_patch(sys, a.tiles, moved)
    if u is None:
        return None
    return PatchGenerator(u, a.t1, b.t2.translate(shift))


class AlgebraExpression:
    """Finite rational combination of patch generators."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[PatchGenerator, object] | None = None):
        self.terms = {}
        for g, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                self.terms[g] = self.terms.get(g, 0) + c
        self.terms = {g: c for g, c in self.terms.items() if c}

    @classmethod
    def of(cls, g: PatchGenerator | None, c=1) -> "AlgebraExpression":
        return cls({} if g is None else {g: c})

    def __add__(self, other: "AlgebraExpression") -> "AlgebraExpression":
        out = dict(self.terms)
        for g, c in other.terms.items():
            out[g] = out.get(g, 0) + c
        return AlgebraExpression(out)

    def __sub__(self, other: "AlgebraExpression") -> "AlgebraExpression":
        return self + other.scale(-1)

    def scale(self, c) -> "AlgebraExpression":
        return AlgebraExpression({g: v * c for g, v in self.terms.items()})

    def times(self, other: "AlgebraExpression", sys: TilingSystem) -> "AlgebraExpression":
        out: dict = {}
        for g, c in self.terms.items():
            for h, d in other.terms.items():
                p = multiply(g, h, sys)
                if p is not None:
                    out[p] = out.get(p, 0) + c * d
        return AlgebraExpression(out)

    def adjoint(self) -> "AlgebraExpression":
        return AlgebraExpression({g.adjoint(): c for g, c in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return isinstance(other, AlgebraExpression) and self.terms == other.terms

    def __repr__(self) -> str:
        return "AlgebraExpression(" + " + ".join(f"{c}*{g!r}" for g, c in self.terms.items()) + ")"


# ---------------------------------------------------------------------------
# the generating set E2


@dataclass
class E2Inventory:
    generators: list[PatchGenerator]
    stabilized: bool
    depth: int
    counts: list[int]


def _edge_pairs(sys: TilingSystem, tiles) -> set:
    out = set()
    for (i, j), c in sys.contact_graph(tiles).items():
        if c is Contact.EDGE:
            a, b = tiles[i], tiles[j]
            for s, t in ((a, b), (b, a)):
                d = t.x - s.x
                out.add((s.proto, t.proto, d.num, d.den))
    return out


def enumerate_E2(sys: TilingSystem, depth: int) -> E2Inventory:
    """Ordered edge-adjacent two-tile patches found in supertiles omega^depth(p)."""
    if depth < 1:
        raise InputError("depth must be at least 1")
    cache = getattr(sys, "_e2_cache", None)
    if cache is None:
        cache = sys._e2_cache = {}
    counts = []
    sets = []
    for k in (depth - 1, depth):
        if k < 1:
            sets.append(None)
            continue
        if k not in cache:
            acc = set()
            for p in sys.ids:
                acc |= _edge_pairs(sys, sys.supertile(p, k))
            cache[k] = acc
        sets.append(cache[k])
    final = sets[1]
    counts = [len(s) for s in sets if s is not None]
    stabilized = sets[0] is not None and sets[0] == final
    zero = sys.field.zero()
    gens = []
    for p, q, num, den in final:
        gens.append(two_tile(Tile(p, zero), Tile(q, FieldElement(sys.field, num, den))))
    gens.sort(key=PatchGenerator.sort_key)
    return E2Inventory(gens, stabilized, depth, counts)


def e2_closed_under_group(sys: TilingSystem, inv: E2Inventory) -> bool:
    G = attach_group(sys)
    s = set(inv.generators)
    return all(g.act(sys, h.index) in s for g in inv.generators for h in G)


# ---------------------------------------------------------------------------
# ball decomposition


@dataclass
class Decomposition:
    parts: list[PatchGenerator]
    stabilized: bool
    depth: int


def _occurrences(sys: TilingSystem, gen: PatchGenerator, depth: int, r: Fraction):
    """(p, tiles, tree, index) for every placement of gen's patch in omega^depth(p) with t1 at least r from the boundary."""
    rel = [t for t in gen.tiles]
    for p in sys.ids:
        tiles = sys.supertile(p, depth)
        tset = set(tiles)
        region = sys.support(p, depth)
        for i, t in enumerate(tiles):
            if t.proto != gen.t1.proto:
                continue
            if any(Tile(u.proto, u.x + t.x) not in tset for u in rel):
                continue
            if r is not None and not _dist_exceeds(t.x, region, r):
                continue
            yield p, tiles, i


def decompose(gen: PatchGenerator, sys: TilingSystem, r, depth: int) -> Decomposition:
    """Split e(P,t1,t2) over the ball patches Y = {T(B_r(0)) : T in U(P,t1)}."""
    r = parse_rational(r)
    r2 = sys.field.rational(r * r)
    for t in gen.tiles:
        for v in sys.shape(t.proto).vertices:
            if compare_real(norm2(v + t.x), r2) >= 0:
                raise InputError("supp(P) must lie inside the open ball B_r(0)")
    found = []
    for k in (depth - 1, depth):
        classes = set()
        if k >= 1:
            trees = {}
            for p, tiles, i in _occurrences(sys, gen, k, r):
                if p not in trees:
                    pts = np.array([[u.x.approx().real, u.x.approx().imag] for u in tiles])
                    trees[p] = cKDTree(pts)
                x = tiles[i].x
                z = x.approx()
                ball = []
                for j in trees[p].query_ball_point([z.real, z.imag], float(r) + sys.reach() + 1e-9):
                    u = tiles[j]
                    if compare_real(sys.tile_distance_sq(x, u), r2) <= 0:
                        ball.append(Tile(u.proto, u.x - x))
                classes.add(frozenset(ball))
        found.append(classes)
    parts = [PatchGenerator(c, gen.t1, gen.t2) for c in found[1]]
    parts.sort(key=PatchGenerator.sort_key)
    return Decomposition(parts, depth > 1 and found[0] == found[1], depth)


def interior_trace(gen: PatchGenerator, sys: TilingSystem, level: int, r, perron: PerronData) -> FieldElement:
    """Level-n trace of the diagonal e(P,t1,t1), over occurrences at least r from the supertile boundary."""
    r = parse_rational(r)
    F = sys.field
    counts: dict[int, int] = {}
    for p, _, _ in _occurrences(sys, gen, level, r):
        counts[p] = counts.get(p, 0) + 1
    acc = F.zero()
    for p, c in counts.items():
        acc = acc + perron.vl(p) * c
    return acc * perron.scale(level)


# ---------------------------------------------------------------------------
# factorisation into E2 words


def edge_graph(sys: TilingSystem, tiles: list[Tile]) -> dict[Tile, list[Tile]]:
    adj: dict[Tile, list[Tile]] = {t: [] for t in tiles}
    for (i, j), c in sys.contact_graph(tiles).items():
        if c is Contact.EDGE:
            adj[tiles[i]].append(tiles[j])
            adj[tiles[j]].append(tiles[i])
    for t in adj:
        adj[t] = canonical_order(adj[t])
    return adj


def factor(gen: PatchGenerator, sys: TilingSystem) -> list[PatchGenerator]:
    """Word over E2 whose product is gen, from breadth-first paths out of t1.

    The word is the product of w w* over the leaves of the BFS tree (the leaf
    t2 is skipped because the final transporter covers it), followed by the
    transporter w along the tree path from t1 to t2.
    """
    tiles = canonical_order(gen.tiles)
    if len(tiles) < 2:
        raise InputError("a single-tile patch is not a product of two-tile generators")
    adj = edge_graph(sys, tiles)
    parent = {gen.t1: None}
    order = [gen.t1]
    queue = deque([gen.t1])
    while queue:
        s = queue.popleft()
        for t in adj[s]:
            if t not in parent:
                parent[t] = s
                order.append(t)
                queue.append(t)
    if len(parent) != len(tiles):
        raise InputError("patch is not connected through shared edges")
    children = {t: 0 for t in tiles}
    for t, s in parent.items():
        if s is not None:
            children[s] += 1

    def path(t: Tile) -> list[Tile]:
        out = [t]
        while parent[out[-1]] is not None:
            out.append(parent[out[-1]])
        return out[::-1]

    def letters(p: list[Tile]) -> list[PatchGenerator]:
        return [two_tile(a, b) for a, b in zip(p, p[1:])]

    word: list[PatchGenerator] = []
    for leaf in order:
        if leaf is gen.t1 or children[leaf] or leaf == gen.t2:
            continue
        w = letters(path(leaf))
        word.extend(w)
        word.extend(x.adjoint() for x in reversed(w))
    word.extend(letters(path(gen.t2)))
    return word


def evaluate_word(word: list[PatchGenerator], sys: TilingSystem) -> PatchGenerator | None:
    if not word:
        raise InputError("empty word")
    acc = word[0]
    for g in word[1:]:
        acc = multiply(acc, g, sys)
        if acc is None:
            return None
    return acc


# ---------------------------------------------------------------------------
# I-norm


def i_norm(x) -> Fraction:
    """max(sup row sum, sup column sum) of |coefficients|.

    Accepts a TowerElement, a mapping (row, col) -> coefficient over groupoid
    cells, or an AlgebraExpression with at most one term.
    """
    if isinstance(x, AlgebraExpression):
        if len(x.terms) > 1:
            raise InputError("refine the expression into a single tower level before taking its I-norm")
        return abs(next(iter(x.terms.values()))) if x.terms else Fraction(0)
    if isinstance(x, TowerElement):
        items = (((p, a), (p, b), c) for (p, a, b), c in x.coeffs.items())
    else:
        items = ((r, c, v) for (r, c), v in x.items())
    rows: dict = {}
    cols: dict = {}
    for r, c, v in items:
        v = abs(Fraction(v))
        rows[r] = rows.get(r, 0) + v
        cols[c] = cols.get(c, 0) + v
    best = Fraction(0)
    for d in (rows, cols):
        if d:
            best = max(best, max(d.values()))
    return best


def random_connected_subpatch(sys: TilingSystem, tiles, size: int, rng, adj=None) -> list[Tile]:
    """Grow a random edge-connected sub-patch of the given size."""
    tiles = list(tiles)
    if adj is None:
        adj = edge_graph(sys, tiles)
    start = tiles[rng.randrange(len(tiles))]
    chosen = [start]
    seen = {start}
    frontier = list(adj[start])
    while len(chosen) < size and frontier:
        t = frontier.pop(rng.randrange(len(frontier)))
        if t in seen:
            continue
        seen.add(t)
        chosen.append(t)
        frontier.extend(u for u in adj[t] if u not in seen)
    return chosen

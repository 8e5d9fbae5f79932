"""Substitution tiling systems: loading, validation, expansion and enumeration.

Internally every prototile is recentred so that its puncture sits at the
origin.  A tile ``Tile(p, x)`` is then the recentred prototile translated by
``x``, so ``x`` is also the tile's puncture.  Supertiles ``omega^n(p)`` live on
``lambda^n`` times the recentred prototile.
"""

from __future__ import annotations

import functools
import hashlib
import json
from collections import OrderedDict
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import InputError, ResourceError
from .field import CyclotomicField, FieldElement, parse_rational
from .geometry import (
    Contact,
    Polygon,
    boundary_contact,
    compare_real,
    distance_less_than,
    orient,
    point_in_polygon,
    point_order,
    polygon_area,
    polygon_contact,
    segment_contact,
    segment_dist2,
)


class Tile(NamedTuple):
    proto: int
    x: FieldElement

    def translate(self, v: FieldElement) -> "Tile":
        return Tile(self.proto, self.x + v)


def tile_sort_key(t: Tile):
    z = t.x.approx()
    return (t.proto, z.real, z.imag)


def _tile_cmp(a: Tile, b: Tile) -> int:
    if a.proto != b.proto:
        return -1 if a.proto < b.proto else 1
    return point_order(a.x, b.x)


def canonical_order(tiles: Iterable[Tile]) -> list[Tile]:
    """Sort tiles by (prototile id, Re x, Im x) using exact comparisons."""
    tiles = list(tiles)
    tiles.sort(key=tile_sort_key)
    # floats order correctly unless two neighbours are within rounding of each other
    for a, b in zip(tiles, tiles[1:]):
        if a.proto == b.proto:
            za, zb = a.x.approx(), b.x.approx()
            err = 4 * (a.x.approx_error() + b.x.approx_error()) + 1e-12
            if abs(za.real - zb.real) <= err and abs(za.imag - zb.imag) <= err:
                tiles.sort(key=functools.cmp_to_key(_tile_cmp))
                break
            if abs(za.real - zb.real) <= err and _tile_cmp(a, b) > 0:
                tiles.sort(key=functools.cmp_to_key(_tile_cmp))
                break
    return tiles


class Patch:
    """A finite set of tiles with pairwise disjoint interiors."""

    __slots__ = ("tiles", "_order")

    def __init__(self, tiles: Iterable[Tile]):
        self.tiles = frozenset(tiles)
        self._order = None

    def __iter__(self):
        return iter(self.ordered())

    def __len__(self) -> int:
        return len(self.tiles)

    def __contains__(self, t) -> bool:
        return t in self.tiles

    def __eq__(self, other) -> bool:
        return isinstance(other, Patch) and self.tiles == other.tiles

    def __hash__(self) -> int:
        return hash(self.tiles)

    def ordered(self) -> list[Tile]:
        if self._order is None:
            self._order = canonical_order(self.tiles)
        return self._order

    def translate(self, v: FieldElement) -> "Patch":
        return Patch(t.translate(v) for t in self.tiles)

    def canonical(self, anchor: Tile | None = None) -> "Patch":
        """Translate so that the anchor (default: first in canonical order) sits at the origin."""
        if not self.tiles:
            return self
        a = anchor if anchor is not None else self.ordered()[0]
        return self.translate(-a.x)

    def __repr__(self) -> str:
        return f"Patch({len(self.tiles)} tiles)"


@dataclass(frozen=True)
class Prototile:
    id: int
    label: str
    polygon: Polygon  # as given in the definition file
    puncture: FieldElement  # as given in the definition file
    shape: Polygon  # recentred so that the puncture is at the origin


@dataclass(frozen=True)
class GroupSpec:
    rotation_order: int = 1
    reflection: bool = False
    reflection_axis_index: int = 0


@dataclass
class SupportReport:
    ok: bool
    problems: dict = field(default_factory=dict)

    def lines(self) -> list[str]:
        if self.ok:
            return ["support: ok"]
        out = []
        for p, probs in sorted(self.problems.items()):
            out.extend(f"support p={p}: {msg}" for msg in probs)
        return out


class TilingSystem:
    """An immutable substitution tiling system in the plane."""

    def __init__(
        self,
        field_: CyclotomicField,
        lam: FieldElement,
        prototiles: Sequence[Prototile],
        substitution: dict[int, Sequence[tuple[int, FieldElement]]],
        group: GroupSpec | None = None,
        source: bytes | None = None,
        name: str = "system",
    ):
        self.field = field_
        self.lam = lam
        self.prototiles = {p.id: p for p in prototiles}
        self.ids = tuple(sorted(self.prototiles))
        self.group_spec = group or GroupSpec()
        self.name = name
        self.source = source if source is not None else b""
        # substitution in file coordinates, then recentred
        self.raw_substitution = {p: tuple(v) for p, v in substitution.items()}
        omega = {}
        for p, items in substitution.items():
            cp = self.prototiles[p].puncture
            omega[p] = tuple(Tile(q, v + self.prototiles[q].puncture - lam * cp) for q, v in items)
        self.omega = omega
        self._contact_memo: dict = {}
        self._dist_memo: dict = {}
        self._super_cache: OrderedDict = OrderedDict()
        self._lam_pows = [field_.one()]
        self.cache = None
        self._reach = None

    # basic data ---------------------------------------------------------
    def __repr__(self) -> str:
        return f"TilingSystem({self.name!r}, {len(self.ids)} prototiles)"

    def with_group(self, spec: GroupSpec) -> "TilingSystem":
        """Same tiles and substitution, different symmetry group."""
        out = TilingSystem(
            self.field,
            self.lam,
            [self.prototiles[i] for i in self.ids],
            {p: list(v) for p, v in self.raw_substitution.items()},
            spec,
            self.source,
            self.name,
        )
        # geometry memos do not depend on the group
        out._contact_memo = self._contact_memo
        out._dist_memo = self._dist_memo
        out._super_cache = self._super_cache
        out.cache = self.cache
        return out

    @property
    def size(self) -> int:
        return len(self.ids)

    def lam_pow(self, n: int) -> FieldElement:
        while len(self._lam_pows) <= n:
            self._lam_pows.append(self._lam_pows[-1] * self.lam)
        return self._lam_pows[n]

    def shape(self, p: int) -> Polygon:
        return self.prototiles[p].shape

    def tile_polygon(self, t: Tile) -> Polygon:
        return self.prototiles[t.proto].shape.translate(t.x)

    def support(self, p: int, n: int = 0) -> Polygon:
        """supp(omega^n(p)) = lambda^n * p in recentred coordinates."""
        return self.shape(p).scale(self.lam_pow(n))

    def reach(self) -> float:
        """Upper bound on the distance from a puncture to any point of its tile."""
        if self._reach is None:
            self._reach = max(abs(v.approx()) for p in self.ids for v in self.shape(p).vertices) * (1 + 1e-9) + 1e-9
        return self._reach

    @functools.cached_property
    def hash(self) -> str:
        return hashlib.sha256(self.source).hexdigest()

    # adjacency ----------------------------------------------------------
    def contact(self, t1: Tile, t2: Tile) -> Contact:
        """Contact type of two tiles; memoised on relative position."""
        d = t2.x - t1.x
        key = (t1.proto, t2.proto, d.num, d.den)
        c = self._contact_memo.get(key)
        if c is None:
            if t1.proto == t2.proto and d.is_zero():
                c = Contact.OVERLAP
            else:
                c = polygon_contact(self.shape(t1.proto), self.shape(t2.proto).translate(d))
            self._contact_memo[key] = c
        return c

    def tile_distance_sq(self, x: FieldElement, t: Tile) -> FieldElement:
        """Exact squared distance from a point to a closed tile (0 if inside)."""
        d = x - t.x
        key = (t.proto, d.num, d.den)
        r = self._dist_memo.get(key)
        if r is None:
            shape = self.shape(t.proto)
            if point_in_polygon(d, shape.vertices, strict=False):
                r = self.field.zero()
            else:
                best = None
                for a, b in shape.edges():
                    s = segment_dist2(d, a, b)
                    if best is None or compare_real(s, best) < 0:
                        best = s
                r = best
            self._dist_memo[key] = r
        return r

    def neighbour_pairs(self, tiles: Sequence[Tile], pad: float = 0.0) -> list[tuple[int, int]]:
        """Index pairs of tiles whose punctures are close enough to possibly touch."""
        if len(tiles) < 2:
            return []
        pts = np.array([[t.x.approx().real, t.x.approx().imag] for t in tiles])
        tree = cKDTree(pts)
        pairs = tree.query_pairs(2 * self.reach() + pad, output_type="ndarray")
        if len(pairs) == 0:
            return []
        pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
        return [(int(i), int(j)) for i, j in pairs]

    def contact_graph(self, tiles: Sequence[Tile]) -> dict[tuple[int, int], Contact]:
        """All non-disjoint contacts among a list of tiles, keyed by index pair."""
        out = {}
        for i, j in self.neighbour_pairs(tiles):
            c = self.contact(tiles[i], tiles[j])
            if c is not Contact.DISJOINT:
                out[(i, j)] = c
        return out

    def is_patch(self, tiles: Iterable[Tile]) -> bool:
        tiles = list(set(tiles))
        if len(tiles) < 2:
            return True
        return all(self.contact(tiles[i], tiles[j]) is not Contact.OVERLAP for i, j in self.neighbour_pairs(tiles))

    # substitution -------------------------------------------------------
    def substitute_tiles(self, tiles: Iterable[Tile], k: int = 1) -> list[Tile]:
        cur = list(tiles)
        lam = self.lam
        omega = self.omega
        for _ in range(k):
            nxt = []
            for t in cur:
                lx = lam * t.x
                for s in omega[t.proto]:
                    nxt.append(Tile(s.proto, s.x + lx))
            cur = nxt
        return cur

    def supertile(self, p: int, n: int) -> tuple[Tile, ...]:
        """Tiles of omega^n(p) in a deterministic (expansion) order."""
        key = (p, n)
        hit = self._super_cache.get(key)
        if hit is not None:
            self._super_cache.move_to_end(key)
            return hit
        tiles = None
        if self.cache is not None:
            tiles = self.cache.load(self, p, n)
        if tiles is None:
            base = None
            for m in range(n - 1, 0, -1):
                if (p, m) in self._super_cache:
                    base = (m, self._super_cache[(p, m)])
                    break
            if base is None:
                tiles = tuple(self.substitute_tiles([Tile(p, self.field.zero())], n))
            else:
                tiles = tuple(self.substitute_tiles(base[1], n - base[0]))
            if self.cache is not None:
                self.cache.store(self, p, n, tiles)
        self._super_cache[key] = tiles
        while len(self._super_cache) > 24:
            self._super_cache.popitem(last=False)
        return tiles

    # serialisation -------------------------------------------------------
    def to_document(self) -> dict:
        def coeffs(z: FieldElement) -> list[str]:
            return z.to_strings()

        doc = {
            "name": self.name,
            "cyclotomic_order": self.field.n,
            "lambda": coeffs(self.lam),
            "prototiles": [
                {
                    "id": p.id,
                    "label": p.label,
                    "vertices": [coeffs(v) for v in p.polygon.vertices],
                    "puncture": coeffs(p.puncture),
                }
                for p in (self.prototiles[i] for i in self.ids)
            ],
            "substitution": {
                str(p): [{"id": q, "translation": coeffs(v)} for q, v in self.raw_substitution[p]] for p in self.ids
            },
            "group": {
                "rotation_order": self.group_spec.rotation_order,
                "reflection": self.group_spec.reflection,
                "reflection_axis_index": self.group_spec.reflection_axis_index,
            },
        }
        return doc


def dump_document(doc: dict) -> str:
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


# ---------------------------------------------------------------------------
# loading


def _centroid(poly: Polygon) -> FieldElement:
    vs = poly.vertices
    f = vs[0].field
    z = f.zeta(1)
    unit = z - z.conj()
    acc = f.zero()
    tot = f.zero()
    n = len(vs)
    for i in range(n):
        w = vs[i].conj() * vs[(i + 1) % n]
        c = (w - w.conj()) / unit
        acc = acc + (vs[i] + vs[(i + 1) % n]) * c
        tot = tot + c
    return acc / (tot * 3)


def load_system(document, source: bytes | None = None) -> TilingSystem:
    """Build a validated system from a parsed JSON document, a path or a JSON string."""
    if isinstance(document, (str, Path)) and not (isinstance(document, str) and document.lstrip().startswith("{")):
        path = Path(document)
        try:
            raw = path.read_bytes()
        except OSError as exc:
            raise InputError(f"cannot read system file {path}: {exc}") from exc
        return load_system(raw, source=raw)
    if isinstance(document, (bytes, str)):
        raw = document.encode() if isinstance(document, str) else document
        try:
            document = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise InputError(f"system file is not valid UTF-8 JSON: {exc}") from exc
        source = raw if source is None else source
    if source is None:
        source = json.dumps(document, sort_keys=True).encode()

    problems: list[str] = []
    if not isinstance(document, dict):
        raise InputError("system document must be a JSON object")
    for key in ("cyclotomic_order", "lambda", "prototiles", "substitution"):
        if key not in document:
            problems.append(f"missing field '{key}'")
    if problems:
        raise InputError("schema violation", problems)
    try:
        n = int(document["cyclotomic_order"])
        F = CyclotomicField(n)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad cyclotomic_order: {exc}") from exc

    def elem(val, where):
        if not isinstance(val, list):
            problems.append(f"{where}: expected coefficient list")
            return None
        try:
            return F.element(val)
        except (ValueError, ZeroDivisionError, TypeError) as exc:
            problems.append(f"{where}: {exc}")
            return None

    lam = elem(document["lambda"], "lambda")
    if lam is not None:
        if not lam.is_real():
            problems.append("lambda: not real")
        elif (lam - F.one()).sign() <= 0:
            problems.append("lambda: must exceed 1")

    protos = []
    seen = set()
    if not isinstance(document["prototiles"], list) or not document["prototiles"]:
        problems.append("prototiles: expected a nonempty list")
        raise InputError("schema violation", problems)
    for i, pd in enumerate(document["prototiles"]):
        where = f"prototiles[{i}]"
        if not isinstance(pd, dict) or "id" not in pd or "vertices" not in pd:
            problems.append(f"{where}: needs 'id' and 'vertices'")
            continue
        pid = pd["id"]
        if not isinstance(pid, int):
            problems.append(f"{where}: id must be an integer")
            continue
        if pid in seen:
            problems.append(f"{where}: duplicate id {pid}")
            continue
        seen.add(pid)
        verts = [elem(v, f"{where}.vertices[{j}]") for j, v in enumerate(pd["vertices"])]
        if any(v is None for v in verts):
            continue
        try:
            poly = Polygon(verts)
        except InputError as exc:
            problems.extend(f"{where} (id {pid}): {p}" for p in exc.problems)
            continue
        punc = pd.get("puncture")
        if punc is None:
            c = _centroid(poly)
        else:
            c = elem(punc, f"{where}.puncture")
            if c is None:
                continue
        if not point_in_polygon(c, poly.vertices, strict=True):
            problems.append(f"{where} (id {pid}): puncture is not in the interior of the polygon")
            continue
        shape = Polygon([v - c for v in poly.vertices], validate=False)
        protos.append(Prototile(pid, str(pd.get("label", pid)), poly, c, shape))

    ids = {p.id for p in protos}
    subst = {}
    sd = document["substitution"]
    if not isinstance(sd, dict):
        problems.append("substitution: expected an object keyed by prototile id")
        sd = {}
    for key, items in sd.items():
        try:
            pid = int(key)
        except ValueError:
            problems.append(f"substitution key {key!r} is not an integer id")
            continue
        if pid not in seen:
            problems.append(f"substitution[{key}]: unknown prototile")
            continue
        lst = []
        for j, it in enumerate(items or []):
            where = f"substitution[{key}][{j}]"
            if not isinstance(it, dict) or "id" not in it:
                problems.append(f"{where}: needs 'id'")
                continue
            if it["id"] not in seen:
                problems.append(f"{where}: unknown prototile {it['id']}")
                continue
            v = elem(it.get("translation", ["0"] * F.degree), f"{where}.translation")
            if v is not None:
                lst.append((it["id"], v))
        subst[pid] = lst
    for pid in sorted(seen):
        if pid not in subst:
            problems.append(f"substitution: prototile {pid} has no image")

    gd = document.get("group") or {}
    try:
        group = GroupSpec(
            int(gd.get("rotation_order", 1)),
            bool(gd.get("reflection", False)),
            int(gd.get("reflection_axis_index", 0)),
        )
    except (TypeError, ValueError) as exc:
        problems.append(f"group: {exc}")
        group = GroupSpec()
    if group.rotation_order < 1 or n % group.rotation_order:
        problems.append(f"group: rotation order {group.rotation_order} must divide the cyclotomic order {n}")

    if problems:
        raise InputError("invalid system definition", problems)
    assert ids == seen
    return TilingSystem(F, lam, protos, subst, group, source=source, name=str(document.get("name", "system")))


# ---------------------------------------------------------------------------
# validation of the substitution


def _inside_closed(tile: Polygon, region: Polygon) -> bool:
    for v in tile.vertices:
        if not point_in_polygon(v, region.vertices, strict=False):
            return False
    for a, b in tile.edges():
        mid = (a + b) * Fraction(1, 2)
        if not point_in_polygon(mid, region.vertices, strict=False):
            return False
        for c, d in region.edges():
            if segment_contact(a, b, c, d) is Contact.POINT:
                # a proper crossing has the endpoints strictly on both sides
                if orient(c, d, a) * orient(c, d, b) < 0 and orient(a, b, c) * orient(a, b, d) < 0:
                    return False
    return True


def check_support(sys: TilingSystem) -> SupportReport:
    """Verify supp(omega(p)) = lambda * p for every prototile, exactly."""
    problems: dict[int, list[str]] = {}
    lam2 = sys.lam * sys.lam
    for p in sys.ids:
        region = sys.support(p, 1)
        tiles = sys.omega[p]
        probs = []
        for t in tiles:
            if not _inside_closed(sys.tile_polygon(t), region):
                probs.append(f"tile {t.proto} at {t.x!r} leaves lambda*p")
        for i in range(len(tiles)):
            for j in range(i + 1, len(tiles)):
                if sys.contact(tiles[i], tiles[j]) is Contact.OVERLAP:
                    probs.append(f"tiles {tiles[i].proto} and {tiles[j].proto} overlap")
        total = sys.field.zero()
        for t in tiles:
            total = total + polygon_area(sys.shape(t.proto))
        want = lam2 * polygon_area(sys.shape(p))
        if total != want:
            probs.append(f"area deficit {(want - total).approx().real:.6g} (exact {want - total!r})")
        if probs:
            problems[p] = probs
    return SupportReport(not problems, problems)


def substitute(sys: TilingSystem, patch: Patch | Iterable[Tile], k: int = 1) -> Patch:
    """Apply omega k times to a patch."""
    if k < 0:
        raise InputError("substitution count must be nonnegative")
    tiles = patch.tiles if isinstance(patch, Patch) else list(patch)
    return Patch(sys.substitute_tiles(tiles, k))


@dataclass
class PunctureTable:
    level: int
    proto: int
    tiles: tuple[Tile, ...]

    @property
    def points(self) -> list[FieldElement]:
        return [t.x for t in self.tiles]

    def __len__(self) -> int:
        return len(self.tiles)


def punctures(sys: TilingSystem, n: int, p: int, ordered: bool = False) -> PunctureTable:
    if n < 0:
        raise InputError("level must be nonnegative")
    tiles = sys.supertile(p, n)
    if ordered:
        tiles = tuple(canonical_order(tiles))
    return PunctureTable(n, p, tiles)


def incidence_counts(sys: TilingSystem) -> list[list[int]]:
    index = {p: i for i, p in enumerate(sys.ids)}
    M = [[0] * len(sys.ids) for _ in sys.ids]
    for p in sys.ids:
        for t in sys.omega[p]:
            M[index[p]][index[t.proto]] += 1
    return M


@dataclass
class PrimitivityResult:
    primitive: bool
    exponent: int | None
    bound: int


def check_primitivity(obj) -> PrimitivityResult:
    """Least N with M^N > 0, searching up to the Wielandt bound."""
    M = incidence_counts(obj) if isinstance(obj, TilingSystem) else [list(r) for r in obj]
    n = len(M)
    bound = (n - 1) ** 2 + 1
    B = np.array(M, dtype=bool)
    P = B.copy()
    for N in range(1, bound + 1):
        if P.all():
            return PrimitivityResult(True, N, bound)
        P = (P.astype(np.int64) @ B.astype(np.int64)) > 0
    return PrimitivityResult(False, None, bound)


@dataclass
class SelfTile:
    proto: int
    level: int
    offset: FieldElement  # x with p + x in omega^n(p)
    tile: Tile  # t with t in omega^n(t)
    verified: bool


def find_self_tile(sys: TilingSystem, max_level: int = 8) -> SelfTile:
    """Find t = p + a with t in omega^n(t), choosing an occurrence strictly inside supp."""
    for n in range(1, max_level + 1):
        ln = sys.lam_pow(n)
        for p in sys.ids:
            region = sys.support(p, n)
            cands = [t for t in sys.supertile(p, n) if t.proto == p]
            for t in canonical_order(cands):
                if boundary_contact(sys.tile_polygon(t), region):
                    continue
                # the fixed point y0 of y -> lambda^-n y0 + x, and t = p - y0 + x
                x = t.x
                y0 = x / (1 - ln.inverse())
                a = x - y0
                seed = Tile(p, a)
                ok = seed in set(sys.substitute_tiles([seed], n))
                return SelfTile(p, n, x, seed, ok)
    raise ResourceError(f"no self-tile found up to level {max_level}")


def self_tile_nested(sys: TilingSystem, st: SelfTile) -> bool:
    """Check omega^n(t) is contained in omega^2n(t)."""
    once = set(sys.substitute_tiles([st.tile], st.level))
    twice = set(sys.substitute_tiles([st.tile], 2 * st.level))
    return once <= twice


# ---------------------------------------------------------------------------
# finite local complexity and border forcing


def _ball_patch(sys: TilingSystem, tiles, tree, idx: int, r2: FieldElement, rf: float):
    x = tiles[idx].x
    z = x.approx()
    out = []
    for j in tree.query_ball_point([z.real, z.imag], rf + sys.reach() + 1e-9):
        t = tiles[j]
        if compare_real(sys.tile_distance_sq(x, t), r2) <= 0:
            out.append((t.proto, t.x - x))
    return frozenset((q, d.num, d.den) for q, d in out), out


@dataclass
class PatchClasses:
    classes: dict  # key -> list of (proto, offset)
    stabilized: bool
    depth: int
    counts: list[int]


def enumerate_patches(sys: TilingSystem, r, m: int) -> PatchClasses:
    """Translation classes of T(B_r(x)) around punctures x inside supertiles of depth m.

    A class is a pointed patch: the tile whose puncture is the ball centre is
    placed at the origin.  Only balls at distance more than r from the
    supertile boundary are used, so each collected patch is complete.
    """
    r = parse_rational(r)
    if r <= 0 or m < 1:
        raise InputError("enumerate_patches needs r > 0 and m >= 1")
    r2 = sys.field.rational(r * r)
    rf = float(r)
    counts = []
    prev = None
    cur = {}
    for depth in range(max(1, m - 1), m + 1):
        cur = {}
        for p in sys.ids:
            tiles = sys.supertile(p, depth)
            region = sys.support(p, depth)
            pts = np.array([[t.x.approx().real, t.x.approx().imag] for t in tiles])
            tree = cKDTree(pts)
            for i, t in enumerate(tiles):
                if not _dist_exceeds(t.x, region, r):
                    continue
                key, items = _ball_patch(sys, tiles, tree, i, r2, rf)
                key = (t.proto, key)
                if key not in cur:
                    cur[key] = sorted(items, key=lambda it: (it[0], it[1].approx().real, it[1].approx().imag))
        counts.append(len(cur))
        if depth < m:
            prev = set(cur)
    stabilized = prev is not None and prev == set(cur)
    return PatchClasses(cur, stabilized, m, counts)


def _dist_exceeds(x, region: Polygon, r: Fraction) -> bool:
    """D(x) > r strictly (a tie is not enough for the closed ball to fit)."""
    return not distance_less_than(x, region, r) and not _dist_equals(x, region, r)


def _dist_equals(x, region: Polygon, r: Fraction) -> bool:
    r2 = x.field.rational(r * r)
    return any(compare_real(segment_dist2(x, a, b), r2) == 0 for a, b in region.edges())


@dataclass
class BorderForcing:
    forced: bool
    level: int
    depth: int
    collar_counts: dict  # p -> number of distinct collars
    occurrences: dict  # p -> number of interior occurrences examined


def _collar(sys: TilingSystem, tiles, tree, s: Tile, u: FieldElement, n: int, memo: dict):
    """Tiles meeting the closed support of the level-n supertile s placed at u."""
    cz = u.approx()
    rad = float(abs(sys.lam_pow(n).approx())) * sys.reach() + 2 * sys.reach() + 1e-9
    shape = sys.support(s.proto, n)
    out = []
    for j in tree.query_ball_point([cz.real, cz.imag], rad):
        t = tiles[j]
        d = t.x - u
        key = (s.proto, t.proto, d.num, d.den)
        c = memo.get(key)
        if c is None:
            c = memo[key] = polygon_contact(sys.shape(t.proto).translate(d), shape)
        if c is not Contact.DISJOINT:
            out.append(key[1:])
    return frozenset(out)


def check_border_forcing(sys: TilingSystem, n: int, K: int) -> BorderForcing:
    """Compare the collars of every interior occurrence of omega^n(p) in omega^k(q), n < k <= K."""
    if n < 0 or K < n + 1:
        raise InputError("border forcing needs n >= 0 and K >= n + 1")
    collars: dict[int, set] = {p: set() for p in sys.ids}
    occ: dict[int, int] = {p: 0 for p in sys.ids}
    ln = sys.lam_pow(n)
    memo: dict = {}
    for k in range(n + 1, K + 1):
        for q in sys.ids:
            tiles = sys.supertile(q, k)
            pts = np.array([[t.x.approx().real, t.x.approx().imag] for t in tiles])
            tree = cKDTree(pts)
            big = sys.support(q, k)
            for s in sys.supertile(q, k - n):
                u = ln * s.x
                region = sys.support(s.proto, n).translate(u)
                if boundary_contact(region, big):
                    continue
                occ[s.proto] += 1
                collars[s.proto].add(_collar(sys, tiles, tree, s, u, n, memo))
    missing = [p for p in sys.ids if occ[p] == 0]
    if missing:
        raise ResourceError(f"no interior occurrence of level-{n} supertiles {missing[:5]} within depth {K}")
    counts = {p: len(collars[p]) for p in sys.ids}
    return BorderForcing(all(c == 1 for c in counts.values()), n, K, counts, occ)

"""Layer peeling of supertiles and the Rokhlin family {a_g} built on it."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .algebra import PatchGenerator, enumerate_E2
from .errors import InputError, ResourceError, VerificationError
from .field import FieldElement, format_rational, parse_rational
from .geometry import Contact, boundary_contact, boundary_distance, diameter2, distance_less_than, rational_sqrt_upper
from .symmetry import attach_group, orbit_rep, require_free, standard_position
from .system import Tile, TilingSystem, check_primitivity
from .tower import PerronData, TowerElement, act_element, system_perron

MAX_LEVEL = 12


def _approx_points(tiles) -> np.ndarray:
    out = np.empty((len(tiles), 2))
    for i, t in enumerate(tiles):
        z = t.x.approx()
        out[i, 0] = z.real
        out[i, 1] = z.imag
    return out


def _float_boundary_dist(pts: np.ndarray, region) -> np.ndarray:
    best = np.full(len(pts), np.inf)
    for a, b in region.edges():
        a = a.approx()
        b = b.approx()
        ax, ay, bx, by = a.real, a.imag, b.real, b.imag
        dx, dy = bx - ax, by - ay
        L = dx * dx + dy * dy
        t = ((pts[:, 0] - ax) * dx + (pts[:, 1] - ay) * dy) / L
        t = np.clip(t, 0.0, 1.0)
        ex = pts[:, 0] - (ax + t * dx)
        ey = pts[:, 1] - (ay + t * dy)
        best = np.minimum(best, np.hypot(ex, ey))
    return best


def _count_closer(sys: TilingSystem, tiles, region, R: Fraction, pts=None) -> np.ndarray:
    """Boolean mask of D(x) < R, exact where the float value is within slack of R."""
    if pts is None:
        pts = _approx_points(tiles)
    fd = _float_boundary_dist(pts, region)
    Rf = float(R)
    slack = 1e-7 * (1 + Rf + float(np.max(np.abs(pts))) if len(pts) else 1)
    mask = fd < Rf
    for i in np.nonzero(np.abs(fd - Rf) <= slack)[0]:
        mask[i] = distance_less_than(tiles[i].x, region, R)
    return mask


# ---------------------------------------------------------------------------
# layers


@dataclass
class LayerTable:
    level: int
    proto: int
    tiles: tuple
    layer: list[int]
    near: np.ndarray  # tiles within reach of the boundary (certified superset of layer 0)
    edges: list[tuple[int, int]]  # edge-adjacent index pairs
    region: object = None
    _index: dict | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.tiles)

    @property
    def depth(self) -> int:
        return max(self.layer) if self.layer else -1

    def counts(self) -> list[int]:
        out = [0] * (self.depth + 1)
        for k in self.layer:
            out[k] += 1
        return out

    def index(self) -> dict:
        if self._index is None:
            self._index = {t: i for i, t in enumerate(self.tiles)}
        return self._index

    def layer_of(self, t: Tile) -> int:
        return self.layer[self.index()[t]]

    def distance(self, i: int, width=Fraction(1, 10**9)) -> tuple[Fraction, Fraction]:
        """Certified interval for D(x) of the i-th puncture."""
        return boundary_distance(self.tiles[i].x, self.region, width)

    def transport(self, sys: TilingSystem, g: int) -> "LayerTable":
        G = attach_group(sys)
        tiles = tuple(G.act_tile(g, t) for t in self.tiles)
        p = G.perm[g][self.proto]
        return LayerTable(self.level, p, tiles, list(self.layer), self.near, self.edges, sys.support(p, self.level))


def _touches_boundary(sys: TilingSystem, t: Tile, region) -> bool:
    return boundary_contact(sys.tile_polygon(t), region)


def _compute_layers(sys: TilingSystem, p: int, s: int) -> LayerTable:
    tiles = sys.supertile(p, s)
    region = sys.support(p, s)
    reach = Fraction(sys.reach()).limit_denominator(10**6) + Fraction(1, 10**6)
    near = _count_closer(sys, tiles, region, reach)
    graph = sys.contact_graph(tiles)
    adj: list[list[int]] = [[] for _ in tiles]
    edges = []
    for (i, j), c in graph.items():
        adj[i].append(j)
        adj[j].append(i)
        if c is Contact.EDGE:
            edges.append((i, j))
    layer = [-1] * len(tiles)
    queue = deque()
    for i in np.nonzero(near)[0]:
        i = int(i)
        if _touches_boundary(sys, tiles[i], region):
            layer[i] = 0
            queue.append(i)
    if not queue and tiles:
        raise VerificationError(f"no tile of omega^{s}({p}) touches the boundary", witness=(p, s))
    while queue:
        i = queue.popleft()
        for j in adj[i]:
            if layer[j] < 0:
                layer[j] = layer[i] + 1
                queue.append(j)
    if any(k < 0 for k in layer):
        raise VerificationError(f"omega^{s}({p}) is not connected by tile contacts", witness=(p, s))
    return LayerTable(s, p, tiles, layer, near, edges, region)


def layer_decomposition(sys: TilingSystem, s: int, p: int | None = None):
    """Layers rho^k(s, p) by breadth-first peeling from the boundary.

    Each tile's layer is its graph distance, in the touching graph, to the tiles
    that meet the boundary.  This equals iterated peeling: after removing layers
    0..k-1, a remaining tile meets the new boundary exactly when it touches a
    removed tile or the original boundary.
    With p given, returns that prototile's table; otherwise a dict over all p.
    """
    if s < 1:
        raise InputError("layer decomposition needs s >= 1")
    cache = getattr(sys, "_layer_cache", None)
    if cache is None:
        cache = sys._layer_cache = {}
    G = attach_group(sys)
    rep = orbit_rep(sys)

    def one(q: int) -> LayerTable:
        key = (q, s)
        if key not in cache:
            r, g = rep[q]
            if (r, s) not in cache:
                cache[(r, s)] = _compute_layers(sys, r, s)
            cache[key] = cache[(r, s)] if g == G.identity else cache[(r, s)].transport(sys, g)
        return cache[key]

    if p is not None:
        return one(p)
    return {q: one(q) for q in sys.ids}


@dataclass
class LayerCheck:
    partition_ok: bool
    adjacent_ok: bool
    cross_ok: bool
    pairs_checked: int
    cross_pairs: int
    violation: tuple | None = None


def _edge_pair_orbits(sys: TilingSystem, gens: Sequence[PatchGenerator]) -> list[PatchGenerator]:
    """One ordered generator per G-orbit of unordered edge pairs, with t1 in standard position."""
    G = attach_group(sys)
    reps = set(standard_position(sys))
    todo = set(gens)
    out = []
    for q in sorted(gens, key=PatchGenerator.sort_key):
        if q not in todo:
            continue
        orbit = set()
        for g in G:
            h = q.act(sys, g.index)
            orbit.add(h)
            orbit.add(h.adjoint())
        todo -= orbit
        pick = sorted((h for h in orbit if h.t1.proto in reps), key=PatchGenerator.sort_key)
        out.append(pick[0] if pick else q)
    return out


def cross_supertile_check(sys: TilingSystem, s: int, gens: Sequence[PatchGenerator]):
    """Every edge-adjacent tile pair straddling two adjacent level-s supertiles lies in layer 0 of both.

    Adjacent level-s supertiles are omega^s images of edge-adjacent tile
    pairs, so scanning the two-tile classes in gens covers every case.
    Returns (pairs checked, first violation or None).
    """
    reach = 2 * sys.reach()
    ls = sys.lam_pow(s)
    checked = 0
    for q in _edge_pair_orbits(sys, gens):
        A = layer_decomposition(sys, s, q.t1.proto)
        B = layer_decomposition(sys, s, q.t2.proto)
        shift = ls * q.t2.x
        ia = [int(i) for i in np.nonzero(A.near)[0]]
        ib = [int(i) for i in np.nonzero(B.near)[0]]
        if not ia or not ib:
            continue
        ta = [A.tiles[i] for i in ia]
        tb = [B.tiles[j].translate(shift) for j in ib]
        tree_a = cKDTree(_approx_points(ta))
        tree_b = cKDTree(_approx_points(tb))
        for a, lst in enumerate(tree_a.query_ball_tree(tree_b, reach)):
            for b in lst:
                if sys.contact(ta[a], tb[b]) is Contact.EDGE:
                    checked += 1
                    if A.layer[ia[a]] != 0 or B.layer[ib[b]] != 0:
                        return checked, (q, ta[a], tb[b])
    return checked, None


def check_layers(sys: TilingSystem, s: int, gens: Sequence[PatchGenerator] | None = None) -> LayerCheck:
    """Partition, adjacent-layer and cross-supertile properties at level s."""
    tables = layer_decomposition(sys, s)
    part = True
    adj = True
    pairs = 0
    violation = None
    for p, T in tables.items():
        if len(T.layer) != len(sys.supertile(p, s)) or set(T.tiles) != set(sys.supertile(p, s)):
            part = False
            violation = violation or ("partition", p)
        counts = T.counts()
        if any(c == 0 for c in counts):
            part = False
            violation = violation or ("gap", p)
        for i, j in T.edges:
            pairs += 1
            if abs(T.layer[i] - T.layer[j]) > 1:
                adj = False
                violation = violation or ("adjacent", p, T.tiles[i], T.tiles[j])
    if gens is None:
        gens = enumerate_E2(sys, _e2_depth(sys)).generators
    cross, bad = cross_supertile_check(sys, s, gens)
    if bad is not None:
        violation = violation or ("cross",) + bad
    return LayerCheck(part, adj, bad is None, pairs, cross, violation)


def _e2_depth(sys: TilingSystem, start: int = 2, limit: int = 8) -> int:
    for d in range(start, limit + 1):
        if enumerate_E2(sys, d).stabilized:
            return d
    return limit


# ---------------------------------------------------------------------------
# boundary statistics


@dataclass
class BoundaryFraction:
    level: int
    R: Fraction
    per_proto: dict  # p -> Fraction
    worst: Fraction


def boundary_fraction(sys: TilingSystem, s: int, R) -> BoundaryFraction:
    """#{x in Punc(s,p) : D(x) < R} / #Punc(s,p), per prototile and the maximum."""
    R = parse_rational(R)
    if R <= 0:
        raise InputError("R must be positive")
    rep = orbit_rep(sys)
    per_rep = {}
    out = {}
    for p in sys.ids:
        r = rep[p][0]
        if r not in per_rep:
            tiles = sys.supertile(r, s)
            mask = _count_closer(sys, tiles, sys.support(r, s), R)
            per_rep[r] = Fraction(int(mask.sum()), len(tiles))
        out[p] = per_rep[r]
    return BoundaryFraction(s, R, out, max(out.values()))


# ---------------------------------------------------------------------------
# the Rokhlin family


@dataclass
class RokhlinParameters:
    eps: Fraction
    N: int
    diameter2: FieldElement
    diameter_upper: Fraction
    R: Fraction
    s: int
    ramp: list[Fraction]
    fractions: list[tuple[int, Fraction]]  # (level, worst fraction) scanned

    def b(self, k: int) -> Fraction:
        return self.ramp[k] if k < len(self.ramp) else Fraction(1)


def choose_parameters(sys: TilingSystem, eps, max_level: int = MAX_LEVEL, s_min: int = 1) -> RokhlinParameters:
    eps = parse_rational(eps)
    if not 0 < eps < 1:
        raise InputError("epsilon must lie strictly between 0 and 1")
    N = math.floor(2 / eps) + 1
    d2 = None
    for p in sys.ids:
        v = diameter2(sys.shape(p))
        if d2 is None or (v - d2).sign() > 0:
            d2 = v
    dup = rational_sqrt_upper(d2)
    R = 2 * N * dup + 1
    ramp = [Fraction(j, N) for j in range(N + 1)]
    scanned = []
    for s in range(max(1, s_min), max_level + 1):
        bf = boundary_fraction(sys, s, R)
        scanned.append((s, bf.worst))
        if bf.worst < eps:
            return RokhlinParameters(eps, N, d2, dup, R, s, ramp, scanned)
    best = min(scanned, key=lambda t: t[1]) if scanned else None
    raise ResourceError(
        f"no level up to {max_level} brings the boundary fraction below {format_rational(eps)} at R = {format_rational(R)}",
        best=best,
    )


@dataclass
class Condition:
    name: str
    ok: bool
    value: str
    bound: str
    detail: str = ""


@dataclass
class RokhlinReport:
    eps: Fraction
    params: RokhlinParameters
    conditions: list[Condition]
    traces: dict  # group element name -> FieldElement
    deficit: FieldElement
    max_commutator: Fraction
    deviation: FieldElement

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.conditions)

    def lines(self) -> list[str]:
        P = self.params
        out = [
            f"epsilon {format_rational(self.eps)}: N = {P.N}, R = {format_rational(P.R)}, s = {P.s}",
            "ramp b = (" + ", ".join(format_rational(b) for b in P.ramp) + ")",
        ]
        for c in self.conditions:
            flag = "pass" if c.ok else "FAIL"
            out.append(f"[{flag}] {c.name}: {c.value} (bound {c.bound}){'; ' + c.detail if c.detail else ''}")
        return out

    def to_json(self) -> dict:
        P = self.params
        return {
            "epsilon": format_rational(self.eps),
            "N": P.N,
            "R": format_rational(P.R),
            "s": P.s,
            "diameter_squared": P.diameter2.to_strings(),
            "ramp": [format_rational(b) for b in P.ramp],
            "fractions": [[s, format_rational(f)] for s, f in P.fractions],
            "conditions": [
                {"name": c.name, "ok": c.ok, "value": c.value, "bound": c.bound, "detail": c.detail} for c in self.conditions
            ],
            "traces": {k: v.to_strings() for k, v in self.traces.items()},
            "trace_deficit": self.deficit.to_strings(),
            "max_commutator_inorm": format_rational(self.max_commutator),
            "deviation": self.deviation.to_strings(),
            "ok": self.ok,
        }


class RokhlinFamily:
    """a_e = sum_k b_k sum_{p in S_G, x in rho^k(s,p)} e^s_p(x,x) and a_g = g a_e."""

    def __init__(self, sys: TilingSystem, params: RokhlinParameters, perron: PerronData):
        self.sys = sys
        self.params = params
        self.perron = perron
        self.group = require_free(sys)
        self.reps = standard_position(sys)
        self.s = params.s
        self.tables = {p: layer_decomposition(sys, self.s, p) for p in self.reps}
        self._elements: dict[int, TowerElement] = {}

    @property
    def eps(self) -> Fraction:
        return self.params.eps

    def a_e(self) -> TowerElement:
        G = self.group
        if G.identity not in self._elements:
            coeffs = {}
            for p, T in self.tables.items():
                for t, k in zip(T.tiles, T.layer):
                    b = self.params.b(k)
                    if b:
                        coeffs[(p, t.x, t.x)] = b
            self._elements[G.identity] = TowerElement(self.s, coeffs)
        return self._elements[G.identity]

    def element(self, g: int) -> TowerElement:
        if g not in self._elements:
            self._elements[g] = act_element(self.sys, g, self.a_e())
        return self._elements[g]

    def support_protos(self, g: int) -> set[int]:
        return {self.group.perm[g][p] for p in self.reps}

    def layer_trace_sums(self) -> dict[int, tuple[Fraction, int]]:
        """p in S_G -> (sum_k b_k #rho^k, #Punc)."""
        out = {}
        for p, T in self.tables.items():
            counts = T.counts()
            out[p] = (sum((self.params.b(k) * c for k, c in enumerate(counts)), Fraction(0)), len(T))
        return out

    def trace_of(self, g: int) -> FieldElement:
        F = self.sys.field
        acc = F.zero()
        for p, (w, _) in self.layer_trace_sums().items():
            acc = acc + self.perron.vl(self.group.perm[g][p]) * w
        return acc * self.perron.scale(self.s)

    def trace_deficit(self) -> FieldElement:
        """tau(1 - sum_g a_g) = sum_p sum_k (1 - b_k) #rho^k(s,p) lambda^(-ds) v_L(p)."""
        F = self.sys.field
        acc = F.zero()
        for p, T in self.tables.items():
            counts = T.counts()
            w = sum(((1 - self.params.b(k)) * c for k, c in enumerate(counts)), Fraction(0))
            for g in self.group:
                acc = acc + self.perron.vl(self.group.perm[g.index][p]) * w
        return acc * self.perron.scale(self.s)

    def commutator_profile(self) -> dict[int, dict[tuple, Fraction]]:
        """p in S_G -> {ordered edge class: max |b_k - b_m| over its occurrences in omega^s(p)}."""
        out = {}
        for p, T in self.tables.items():
            d: dict[tuple, Fraction] = {}
            for i, j in T.edges:
                diff = abs(self.params.b(T.layer[i]) - self.params.b(T.layer[j]))
                a, b = T.tiles[i], T.tiles[j]
                for u, v in ((a, b), (b, a)):
                    x = v.x - u.x
                    key = (u.proto, v.proto, x.num, x.den)
                    if diff > d.get(key, -1):
                        d[key] = diff
            out[p] = d
        return out

    def commutator_cells(self, g: int, q: PatchGenerator) -> dict:
        """Nonzero groupoid cells of a_g q - q a_g restricted to level-s supertiles (explicit form)."""
        G = self.group
        gi = G.inverse[g]
        q0 = q.act(self.sys, gi)
        out = {}
        for p, T in self.tables.items():
            idx = T.index()
            gp = G.perm[g][p]
            lin = G[g]
            for i, t in enumerate(T.tiles):
                if t.proto != q0.t1.proto:
                    continue
                j = idx.get(Tile(q0.t2.proto, t.x + q0.t2.x))
                if j is None:
                    continue
                v = self.params.b(T.layer[i]) - self.params.b(T.layer[j])
                if v:
                    out[((gp, lin(t.x)), (gp, lin(T.tiles[j].x)))] = v
        return out


def _key_of(q: PatchGenerator) -> tuple:
    d = q.t2.x
    return (q.t1.proto, q.t2.proto, d.num, d.den)


def build_rokhlin_family(
    sys: TilingSystem,
    eps,
    max_level: int = MAX_LEVEL,
    perron: PerronData | None = None,
    full_equivariance: bool = True,
) -> tuple[RokhlinFamily, RokhlinReport]:
    """Construct {a_g} for epsilon and verify the four conditions exactly.

    With full_equivariance the check g a_h = a_(gh) runs on materialised
    elements for g in the generators and every h; otherwise only on
    h = identity and the generators.
    """
    eps = parse_rational(eps)
    G = require_free(sys)
    prim = check_primitivity(sys)
    if not prim.primitive:
        raise InputError("the substitution is not primitive")
    depth = _e2_depth(sys)
    inv = enumerate_E2(sys, depth)
    if not inv.stabilized:
        raise ResourceError(f"edge generators did not stabilise by depth {depth}", best=len(inv.generators))
    perron = perron or system_perron(sys)
    params = choose_parameters(sys, eps, max_level)
    fam = RokhlinFamily(sys, params, perron)
    F = sys.field
    conds = []

    # parameter constraints
    ramp = params.ramp
    ramp_ok = ramp[0] == 0 and ramp[-1] == 1 and all(0 < b - a < eps / 2 for a, b in zip(ramp, ramp[1:]))
    # the rational diameter bound must dominate the exact diameter
    R_ok = (F.rational(params.diameter_upper**2) - params.diameter2).sign() >= 0 and params.R > 2 * params.N * params.diameter_upper
    conds.append(Condition("ramp", ramp_ok, f"increments 1/{params.N}", f"< {format_rational(eps / 2)}"))
    conds.append(
        Condition(
            "radius",
            R_ok and params.N > 2 / eps,
            f"R = {format_rational(params.R)}",
            "> 2N*diam, N > 2/eps",
            f"diam^2 = {params.diameter2}",
        )
    )

    # condition 1: disjoint prototile supports
    supports = {g.index: fam.support_protos(g.index) for g in G}
    clash = None
    for g in G:
        for h in G:
            if g.index < h.index and supports[g.index] & supports[h.index]:
                clash = (g.name, h.name)
                break
        if clash:
            break
    ok1 = clash is None
    r_idx = G.by_name("r").index if any(g.name == "r" for g in G) else None
    f_idx = G.by_name("f").index if any(g.name == "f" for g in G) else None
    detail = ""
    if ok1 and r_idx is not None and f_idx is not None:
        prod = fam.element(r_idx) * fam.element(f_idx)
        ok1 = not prod.coeffs
        detail = "a_r a_f = 0 checked explicitly"
    conds.append(Condition("1 orthogonality", ok1, "disjoint supports" if clash is None else f"overlap {clash}", "a_g a_h = 0", detail))

    # condition 2: equivariance
    bad2 = None
    hs = list(G) if full_equivariance else [G[G.identity]] + [G[i] for i in G.generators()]
    for gi in G.generators():
        for h in hs:
            lhs = act_element(sys, gi, fam.element(h.index))
            if lhs != fam.element(G.mul(gi, h.index)):
                bad2 = (G[gi].name, h.name)
                break
        if bad2:
            break
    checked = len(G.generators()) * len(hs)
    conds.append(Condition("2 equivariance", bad2 is None, "g a_h = a_gh" if bad2 is None else f"fails at {bad2}", "exact", f"{checked} (g, h) pairs"))

    # condition 3: commutators with E2
    cross, bad = cross_supertile_check(sys, params.s, inv.generators)
    profile = fam.commutator_profile()
    worst = Fraction(0)
    witness = None
    for g in G:
        gi = G.inverse[g.index]
        for q in inv.generators:
            key = _key_of(q.act(sys, gi))
            val = max((d.get(key, Fraction(0)) for d in profile.values()), default=Fraction(0))
            if val > worst:
                worst, witness = val, (g.name, q)
    ok3 = bad is None and worst <= eps / 2
    if bad is not None:
        detail3 = f"cross-supertile pair outside layer 0: {bad}"
    elif not ok3:
        detail3 = f"attained at g = {witness[0]}, q = {witness[1]!r}"
    else:
        detail3 = f"{len(inv.generators)} generators x {len(G)} group elements; {cross} cross-supertile pairs all in layer 0"
    conds.append(Condition("3 commutators", ok3, f"max I-norm {format_rational(worst)}", f"<= {format_rational(eps / 2)}", detail3))

    # condition 4: trace deficit
    deficit = fam.trace_deficit()
    ok4 = (deficit - F.rational(eps)).sign() < 0
    conds.append(Condition("4 trace deficit", ok4, f"{deficit} ~ {deficit.approx().real:.6f}", f"< {format_rational(eps)}"))

    # tracial shadow of the weak Rokhlin property
    traces = {g.name: fam.trace_of(g.index) for g in G}
    t_e = traces[G[G.identity].name]
    equal = all(v == t_e for v in traces.values())
    total = F.zero()
    for v in traces.values():
        total = total + v
    consistent = total + deficit == F.one()
    dev = t_e - F.rational(Fraction(1, len(G)))
    dev_abs = dev if dev.sign() >= 0 else -dev
    ok5 = equal and consistent and (dev_abs - F.rational(eps / len(G))).sign() <= 0
    conds.append(
        Condition(
            "trace shadow",
            ok5,
            f"tau(a_e) ~ {t_e.approx().real:.6f}, |tau(a_e) - 1/{len(G)}| ~ {dev_abs.approx().real:.6f}",
            f"<= {format_rational(eps / len(G))}",
            f"tau(a_g) equal across g: {equal}; traces plus deficit sum to 1: {consistent}",
        )
    )
    report = RokhlinReport(eps, params, conds, traces, deficit, worst, dev_abs)
    return fam, report


def require(report: RokhlinReport) -> RokhlinReport:
    if not report.ok:
        bad = [c for c in report.conditions if not c.ok]
        raise VerificationError(f"condition {bad[0].name} failed: {bad[0].value}", witness=bad[0].detail)
    return report


# ---------------------------------------------------------------------------
# reports


@dataclass
class WeakRokhlinRow:
    eps: Fraction
    s: int
    trace_e: FieldElement
    deviation: FieldElement
    max_commutator: Fraction
    deficit: FieldElement
    ok: bool


def weak_rokhlin_report(sys: TilingSystem, eps_seq, max_level: int = MAX_LEVEL) -> list[WeakRokhlinRow]:
    eps_seq = [parse_rational(e) for e in eps_seq]
    if any(b >= a for a, b in zip(eps_seq, eps_seq[1:])):
        raise InputError("epsilon sequence must be strictly decreasing")
    perron = system_perron(sys)
    rows = []
    for e in eps_seq:
        fam, rep = build_rokhlin_family(sys, e, max_level, perron, full_equivariance=False)
        G = fam.group
        rows.append(WeakRokhlinRow(e, fam.s, rep.traces[G[G.identity].name], rep.deviation, rep.max_commutator, rep.deficit, rep.ok))
    return rows


@dataclass
class BrownReport:
    eps: Fraction
    s: int
    commutator_max: Fraction
    per_generator: dict  # generator index -> Fraction
    cutdown_level: int
    cutdown_cells: int
    cutdown_in_level: bool
    trace_a: FieldElement
    trace_ok: bool
    ok: bool
    note: str = "a is a positive contraction, not a projection"

    def lines(self) -> list[str]:
        return [
            f"epsilon {format_rational(self.eps)}, F = A_{self.s}",
            f"[{'pass' if self.commutator_max < self.eps else 'FAIL'}] (1) max I-norm of [a, f] over E2: {format_rational(self.commutator_max)} < {format_rational(self.eps)}",
            f"[{'pass' if self.cutdown_in_level else 'FAIL'}] (2) a f a lies in A_{self.cutdown_level} for every f in E2 ({self.cutdown_cells} cells, distance 0)",
            f"[{'pass' if self.trace_ok else 'FAIL'}] (3) tau(a) ~ {self.trace_a.approx().real:.6f} > {format_rational(1 - self.eps)}",
            f"note: {self.note}",
        ]

    def to_json(self) -> dict:
        return {
            "epsilon": format_rational(self.eps),
            "s": self.s,
            "commutator_max": format_rational(self.commutator_max),
            "cutdown_level": self.cutdown_level,
            "cutdown_cells": self.cutdown_cells,
            "cutdown_in_level": self.cutdown_in_level,
            "trace_a": self.trace_a.to_strings(),
            "trace_ok": self.trace_ok,
            "ok": self.ok,
            "note": self.note,
        }


def brown_check(sys: TilingSystem, eps, family: RokhlinFamily | None = None, max_level: int = MAX_LEVEL) -> BrownReport:
    """Conditions of the Brown criterion for a = sum_g a_g with F = A_s."""
    eps = parse_rational(eps)
    if family is None:
        family, _ = build_rokhlin_family(sys, eps, max_level, full_equivariance=False)
    G = family.group
    F = sys.field
    inv = enumerate_E2(sys, _e2_depth(sys))
    profile = family.commutator_profile()
    # a takes the value b_layer at every puncture, so [a, q] is read off the
    # profiles of all prototiles, i.e. of g^-1 q over S_G
    per_gen = {}
    for n, q in enumerate(inv.generators):
        best = Fraction(0)
        for g in G:
            key = _key_of(q.act(sys, G.inverse[g.index]))
            for d in profile.values():
                best = max(best, d.get(key, Fraction(0)))
        per_gen[n] = best
    cmax = max(per_gen.values(), default=Fraction(0))
    # a f a: both punctures carry positive weight, so both sit in layers >= 1 and
    # share a level-s supertile (cross-supertile pairs are layer 0)
    cross, bad = cross_supertile_check(sys, family.s, inv.generators)
    cells = 0
    for p, T in family.tables.items():
        for i, j in T.edges:
            if family.params.b(T.layer[i]) and family.params.b(T.layer[j]):
                cells += 2
    cells *= len(G)
    in_level = bad is None
    tau = F.one() - family.trace_deficit()
    trace_ok = (tau - F.rational(1 - eps)).sign() > 0
    ok = cmax < eps and in_level and trace_ok
    return BrownReport(eps, family.s, cmax, per_gen, family.s, cells, in_level, tau, trace_ok, ok)

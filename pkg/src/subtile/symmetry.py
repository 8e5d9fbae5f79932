"""Finite point-group symmetries acting on prototiles."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .errors import InputError, VerificationError
from .geometry import RigidMotion
from .system import GroupSpec, Tile, TilingSystem


@dataclass(frozen=True)
class GroupElement:
    """r^k f^e, stored with the motion it induces."""

    index: int
    name: str
    motion: RigidMotion

    def __call__(self, x):
        return self.motion.linear(x)


class SymmetryGroup:
    def __init__(self, elements: list[GroupElement]):
        self.elements = elements
        self._by_key = {(g.motion.rotation, g.motion.reflect): g.index for g in elements}
        n = len(elements)
        table = [[0] * n for _ in range(n)]
        for g in elements:
            for h in elements:
                m = g.motion.compose(h.motion)
                key = (m.rotation, m.reflect)
                if key not in self._by_key:
                    raise InputError("group spec does not close under composition")
                table[g.index][h.index] = self._by_key[key]
        self.table = table
        self.identity = self._by_key[(0, False)]
        self.inverse = [row.index(self.identity) for row in table]
        self._check_axioms()
        self.perm: dict[int, dict[int, int]] | None = None

    def _check_axioms(self) -> None:
        n = len(self.elements)
        t = self.table
        for a in range(n):
            if t[self.identity][a] != a or t[a][self.identity] != a:
                raise InputError("identity law fails in group table")
            for b in range(n):
                for c in range(n):
                    if t[t[a][b]][c] != t[a][t[b][c]]:
                        raise InputError("group table is not associative")

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i: int) -> GroupElement:
        return self.elements[i]

    def mul(self, g: int, h: int) -> int:
        return self.table[g][h]

    def by_name(self, name: str) -> GroupElement:
        for g in self.elements:
            if g.name == name:
                return g
        raise KeyError(name)

    def generators(self) -> list[int]:
        """Indices of r and f (whichever exist)."""
        gens = []
        for g in self.elements:
            if g.name in ("r", "f"):
                gens.append(g.index)
        return gens or [self.identity]

    def act(self, g: int, p: int) -> int:
        if self.perm is None:
            raise InputError("group action on prototiles not computed")
        return self.perm[g][p]

    def act_tile(self, g: int, t: Tile) -> Tile:
        return Tile(self.perm[g][t.proto], self.elements[g](t.x))


def _name(k: int, e: bool) -> str:
    rot = "" if k == 0 else ("r" if k == 1 else f"r^{k}")
    if not e:
        return rot or "e"
    return f"{rot} f".strip() if rot else "f"


def group_elements(spec: GroupSpec | dict, field) -> SymmetryGroup:
    """Enumerate r^k f^e from a group spec; f is x -> zeta^axis * conj(x)."""
    if isinstance(spec, dict):
        spec = GroupSpec(int(spec.get("rotation_order", 1)), bool(spec.get("reflection", False)), int(spec.get("reflection_axis_index", 0)))
    m = spec.rotation_order
    if m < 1 or field.n % m:
        raise InputError(f"rotation order {m} does not divide the cyclotomic order {field.n}")
    step = field.n // m
    elems = []
    for e in ((False, True) if spec.reflection else (False,)):
        for k in range(m):
            if e:
                motion = RigidMotion(field, k * step + spec.reflection_axis_index, True)
            else:
                motion = RigidMotion(field, k * step)
            elems.append(GroupElement(len(elems), _name(k, e), motion))
    return SymmetryGroup(elems)


def _shape_key(poly) -> frozenset:
    return frozenset((v.num, v.den) for v in poly.vertices)


def _compute_action(sys: TilingSystem, G: SymmetryGroup) -> dict[int, dict[int, int]]:
    index: dict[frozenset, list[int]] = {}
    for p in sys.ids:
        index.setdefault(_shape_key(sys.shape(p)), []).append(p)
    perm: dict[int, dict[int, int]] = {}
    ambiguous = []
    for g in G:
        row = {}
        for p in sys.ids:
            img = sys.shape(p).transform(g.motion)
            cands = [q for q in index.get(_shape_key(img), []) if sys.shape(q).same_as(img)]
            if not cands:
                raise VerificationError(
                    f"{g.name} maps prototile {p} onto no prototile; the group is not a symmetry group",
                    witness=(g.name, p),
                )
            if len(cands) > 1:
                ambiguous.append((g.index, p, cands))
            row[p] = cands[0]
        perm[g.index] = row
    if ambiguous:
        perm = _resolve_ambiguity(sys, G, perm, ambiguous)
    return perm


def _resolve_ambiguity(sys, G, perm, ambiguous):
    """Choose among geometrically identical candidates using omega(gp) = g omega(p)."""
    for gi, p, cands in ambiguous:
        g = G[gi]
        want = {(_shape_key(sys.shape(t.proto).transform(g.motion)), g(t.x)) for t in sys.omega[p]}
        good = [q for q in cands if {(_shape_key(sys.shape(t.proto)), t.x) for t in sys.omega[q]} == want]
        if len(good) != 1:
            raise InputError(f"action of {g.name} on prototile {p} is ambiguous among {cands}")
        perm[gi][p] = good[0]
    return perm


def attach_group(sys: TilingSystem) -> SymmetryGroup:
    """Build the system's group and its permutation action (cached on the system)."""
    G = getattr(sys, "_group", None)
    if G is None:
        G = group_elements(sys.group_spec, sys.field)
        G.perm = _compute_action(sys, G)
        sys._group = G
    return G


def act_on_prototile(sys: TilingSystem, g: int | str, p: int) -> int:
    G = attach_group(sys)
    gi = G.by_name(g).index if isinstance(g, str) else g
    return G.perm[gi][p]


@dataclass
class CommutationReport:
    ok: bool
    checked: int
    violation: tuple | None = None

    def lines(self) -> list[str]:
        if self.ok:
            return [f"commutation: ok ({self.checked} pairs)"]
        g, p = self.violation[:2]
        return [f"commutation: fails at g={g}, p={p}"]


def check_commutation(sys: TilingSystem) -> CommutationReport:
    """omega(g p) = g omega(p) for every g and p, as exact tile sets."""
    G = attach_group(sys)
    n = 0
    for g in G:
        for p in sys.ids:
            n += 1
            lhs = frozenset(sys.omega[G.perm[g.index][p]])
            rhs = frozenset(G.act_tile(g.index, t) for t in sys.omega[p])
            if lhs != rhs:
                return CommutationReport(False, n, (g.name, p, sorted(lhs, key=str), sorted(rhs, key=str)))
    return CommutationReport(True, n)


def check_freeness(sys: TilingSystem) -> bool:
    G = attach_group(sys)
    return all(G.perm[g.index][p] != p for g in G if g.index != G.identity for p in sys.ids)


def orbits(sys: TilingSystem) -> list[list[int]]:
    G = attach_group(sys)
    seen = set()
    out = []
    for p in sys.ids:
        if p in seen:
            continue
        orb = sorted({G.perm[g.index][p] for g in G})
        seen.update(orb)
        out.append(orb)
    return out


def standard_position(sys: TilingSystem) -> list[int]:
    """Least prototile id in each orbit."""
    if not check_freeness(sys):
        warnings.warn("group action on prototiles is not free", stacklevel=2)
    return [orb[0] for orb in orbits(sys)]


def orbit_rep(sys: TilingSystem) -> dict[int, tuple[int, int]]:
    """p -> (standard representative s, group index g) with g s = p."""
    G = attach_group(sys)
    reps = standard_position(sys) if check_freeness(sys) else [o[0] for o in orbits(sys)]
    out = {}
    for s in reps:
        for g in G:
            q = G.perm[g.index][s]
            out.setdefault(q, (s, g.index))
    return out


def require_free(sys: TilingSystem) -> SymmetryGroup:
    G = attach_group(sys)
    if not check_freeness(sys):
        raise InputError("this operation needs a free group action on prototiles")
    return G

"""Exact planar geometry over a cyclotomic field.

Points are :class:`FieldElement` values read through the complex embedding.
Every predicate here is exact: a floating-point filter with an error bound
answers the easy cases and exact field arithmetic settles the rest.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import InputError
from .field import CyclotomicField, FieldElement, _EPS

Point = FieldElement


class Contact(enum.Enum):
    DISJOINT = "disjoint"
    POINT = "point-touch"
    EDGE = "edge-adjacent"
    OVERLAP = "interior-overlap"

    def __str__(self) -> str:
        return self.value


# ---------------------------------------------------------------------------
# rigid motions


@dataclass(frozen=True)
class RigidMotion:
    """The map ``x -> zeta^rotation * (conj(x) if reflect else x) + translation``."""

    field: CyclotomicField
    rotation: int = 0
    reflect: bool = False
    translation: FieldElement | None = None

    def __post_init__(self):
        object.__setattr__(self, "rotation", self.rotation % self.field.n)
        if self.translation is None:
            object.__setattr__(self, "translation", self.field.zero())

    def __call__(self, x: Point) -> Point:
        return apply_motion(self, x)

    def linear(self, x: Point) -> Point:
        """Apply only the point-group part."""
        if not self.reflect and not self.rotation:
            return x
        return x.rotate(self.rotation, self.reflect)

    def compose(self, other: "RigidMotion") -> "RigidMotion":
        """``self o other``: apply ``other`` first."""
        k2 = -other.rotation if self.reflect else other.rotation
        return RigidMotion(
            self.field,
            self.rotation + k2,
            self.reflect != other.reflect,
            apply_motion(self, other.translation),
        )

    __matmul__ = compose

    def inverse(self) -> "RigidMotion":
        f = self.field
        if self.reflect:
            return RigidMotion(f, self.rotation, True, -(f.zeta(self.rotation) * self.translation.conj()))
        return RigidMotion(f, -self.rotation, False, -(f.zeta(-self.rotation) * self.translation))

    def point_part(self) -> "RigidMotion":
        return RigidMotion(self.field, self.rotation, self.reflect)

    def is_identity(self) -> bool:
        return self.rotation == 0 and not self.reflect and self.translation.is_zero()

    def key(self) -> tuple:
        return (self.rotation, self.reflect, self.translation.num, self.translation.den)

    def __repr__(self) -> str:
        parts = [f"r^{self.rotation}"]
        if self.reflect:
            parts.append("conj")
        if not self.translation.is_zero():
            parts.append(f"+{self.translation!r}")
        return "RigidMotion(" + " ".join(parts) + ")"


def apply_motion(m: RigidMotion, x: Point) -> Point:
    y = m.linear(x)
    if not m.translation.is_zero():
        y = y + m.translation
    return y


def translation(t: Point) -> RigidMotion:
    return RigidMotion(t.field, 0, False, t)


# ---------------------------------------------------------------------------
# predicates


def _fbound(*pts: Point) -> float:
    return max(p.approx_error() for p in pts)


def orient(a: Point, b: Point, c: Point) -> int:
    """Sign of the cross product (b - a) x (c - a)."""
    za, zb, zc = a.approx(), b.approx(), c.approx()
    ux, uy = zb.real - za.real, zb.imag - za.imag
    vx, vy = zc.real - za.real, zc.imag - za.imag
    cr = ux * vy - uy * vx
    d = 2 * _fbound(a, b, c)
    err = 2 * d * (abs(ux) + abs(uy) + abs(vx) + abs(vy)) + 2 * d * d + 4 * _EPS * (abs(ux * vy) + abs(uy * vx))
    if cr > err:
        return 1
    if cr < -err:
        return -1
    return ((b - a).conj() * (c - a)).im_sign()


def dot(u: Point, v: Point) -> FieldElement:
    """Real field element equal to the Euclidean dot product of u and v."""
    return (u.conj() * v).re()


def cross_sq(u: Point, v: Point) -> FieldElement:
    """Square of the cross product u x v, as a real field element."""
    w = u.conj() * v
    d = w - w.conj()
    return -(d * d) * Fraction(1, 4)


def norm2(u: Point) -> FieldElement:
    return u * u.conj()


def compare_real(a: FieldElement, b: FieldElement) -> int:
    """Exact sign of a - b for real elements, with a float shortcut."""
    fa, fb = a.approx().real, b.approx().real
    err = a.approx_error() + b.approx_error() + 4 * _EPS * (abs(fa) + abs(fb))
    if fa - fb > err:
        return 1
    if fb - fa > err:
        return -1
    return (a - b).re_sign()


def im_compare(a: Point, b: Point) -> int:
    """Sign of Im(a) - Im(b)."""
    fa, fb = a.approx().imag, b.approx().imag
    err = a.approx_error() + b.approx_error() + 4 * _EPS * (abs(fa) + abs(fb))
    if fa - fb > err:
        return 1
    if fb - fa > err:
        return -1
    return (a - b).im_sign()


def re_compare(a: Point, b: Point) -> int:
    fa, fb = a.approx().real, b.approx().real
    err = a.approx_error() + b.approx_error() + 4 * _EPS * (abs(fa) + abs(fb))
    if fa - fb > err:
        return 1
    if fb - fa > err:
        return -1
    return (a - b).re_sign()


def point_order(a: Point, b: Point) -> int:
    """Lexicographic (Re, Im) comparison of two points."""
    c = re_compare(a, b)
    return c if c else im_compare(a, b)


def on_segment(p: Point, a: Point, b: Point) -> bool:
    """True if p lies on the closed segment [a, b]."""
    if orient(a, b, p) != 0:
        return False
    d = b - a
    t = dot(d, p - a)
    return t.re_sign() >= 0 and compare_real(t, norm2(d)) <= 0


def segment_contact(a: Point, b: Point, c: Point, d: Point) -> Contact:
    """Contact type of closed segments [a,b] and [c,d]; OVERLAP is never returned."""
    o1 = orient(a, b, c)
    o2 = orient(a, b, d)
    if o1 == 0 and o2 == 0:
        u = b - a
        L = norm2(u)
        tc = dot(u, c - a)
        td = dot(u, d - a)
        if compare_real(tc, td) > 0:
            tc, td = td, tc
        zero = L.field.zero()
        lo = tc if compare_real(tc, zero) > 0 else zero
        hi = td if compare_real(td, L) < 0 else L
        s = compare_real(lo, hi)
        if s < 0:
            return Contact.EDGE
        return Contact.POINT if s == 0 else Contact.DISJOINT
    if o1 * o2 > 0:
        return Contact.DISJOINT
    o3 = orient(c, d, a)
    o4 = orient(c, d, b)
    if o3 * o4 > 0:
        return Contact.DISJOINT
    return Contact.POINT


def segment_dist2(x: Point, a: Point, b: Point) -> FieldElement:
    """Exact squared distance from x to the segment [a, b]."""
    d = b - a
    w = x - a
    t = dot(d, w)
    if t.re_sign() <= 0:
        return norm2(w)
    L = norm2(d)
    if compare_real(t, L) >= 0:
        return norm2(x - b)
    return cross_sq(d, w) / L


def segment_dist_less(x: Point, a: Point, b: Point, r2: FieldElement) -> bool:
    """Exact test dist(x, [a,b])^2 < r2 without field division."""
    d = b - a
    w = x - a
    t = dot(d, w)
    if t.re_sign() <= 0:
        return compare_real(norm2(w), r2) < 0
    L = norm2(d)
    if compare_real(t, L) >= 0:
        return compare_real(norm2(x - b), r2) < 0
    return compare_real(cross_sq(d, w), r2 * L) < 0


def _float_seg_dist(x: complex, a: complex, b: complex) -> float:
    d = b - a
    w = x - a
    L = d.real * d.real + d.imag * d.imag
    t = (d.real * w.real + d.imag * w.imag) / L
    if t <= 0:
        return abs(w)
    if t >= 1:
        return abs(x - b)
    return abs(d.real * w.imag - d.imag * w.real) / math.sqrt(L)


# ---------------------------------------------------------------------------
# polygons


class Polygon:
    """Simple counterclockwise polygon with exact vertices."""

    __slots__ = ("vertices", "_triangles", "_bbox")

    def __init__(self, vertices: Sequence[Point], validate: bool = True):
        self.vertices = tuple(vertices)
        self._triangles = None
        self._bbox = None
        if validate:
            problems = polygon_problems(self.vertices)
            if problems:
                raise InputError("invalid polygon", problems)

    @property
    def field(self) -> CyclotomicField:
        return self.vertices[0].field

    def __len__(self) -> int:
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    def edges(self):
        v = self.vertices
        n = len(v)
        return [(v[i], v[(i + 1) % n]) for i in range(n)]

    def translate(self, t: Point) -> "Polygon":
        out = Polygon([v + t for v in self.vertices], validate=False)
        if self._triangles is not None:
            out._triangles = [tuple(v + t for v in tri) for tri in self._triangles]
        return out

    def transform(self, m: RigidMotion) -> "Polygon":
        vs = [apply_motion(m, v) for v in self.vertices]
        if m.reflect:
            vs.reverse()
        return Polygon(vs, validate=False)

    def scale(self, s: FieldElement) -> "Polygon":
        return Polygon([v * s for v in self.vertices], validate=False)

    def area(self) -> FieldElement:
        return polygon_area(self)

    def triangles(self):
        if self._triangles is None:
            self._triangles = ear_clip(self.vertices)
        return self._triangles

    def bbox(self) -> tuple[float, float, float, float]:
        if self._bbox is None:
            zs = [v.approx() for v in self.vertices]
            e = max(v.approx_error() for v in self.vertices) + 1e-9
            self._bbox = (
                min(z.real for z in zs) - e,
                min(z.imag for z in zs) - e,
                max(z.real for z in zs) + e,
                max(z.imag for z in zs) + e,
            )
        return self._bbox

    def same_as(self, other: "Polygon") -> bool:
        """Vertexwise equality up to cyclic rotation of the vertex list."""
        a, b = self.vertices, other.vertices
        if len(a) != len(b):
            return False
        n = len(a)
        for s in range(n):
            if all(a[i] == b[(i + s) % n] for i in range(n)):
                return True
        return False

    def contains(self, p: Point, strict: bool = True) -> bool:
        return point_in_polygon(p, self.vertices, strict=strict)

    def __repr__(self) -> str:
        pts = ", ".join(f"({z.real:.4g},{z.imag:.4g})" for z in (v.approx() for v in self.vertices))
        return f"Polygon[{pts}]"


def signed_area2_units(vertices: Sequence[Point]) -> FieldElement:
    """Twice the signed area in units of sin(2*pi/n)."""
    f = vertices[0].field
    acc = f.zero()
    n = len(vertices)
    for i in range(n):
        w = vertices[i].conj() * vertices[(i + 1) % n]
        acc = acc + (w - w.conj())
    z = f.zeta(1)
    return acc / (z - z.conj())


def polygon_area(p: Polygon | Sequence[Point]) -> FieldElement:
    """Exact shoelace area.

    The value is returned in units of sin(2*pi/n), which keeps it inside the
    field; for n divisible by 4 this unit is 1.  Ratios of areas and linear
    identities among areas are unaffected by the unit.
    """
    verts = p.vertices if isinstance(p, Polygon) else tuple(p)
    if len(verts) < 3:
        raise InputError("polygon needs at least 3 vertices")
    a = signed_area2_units(verts) * Fraction(1, 2)
    if a.sign() <= 0:
        raise InputError("degenerate or clockwise polygon has no positive area")
    return a


def area_unit(field: CyclotomicField) -> float:
    return math.sin(2 * math.pi / field.n)


def polygon_problems(vertices: Sequence[Point]) -> list[str]:
    v = vertices
    n = len(v)
    if n < 3:
        return ["fewer than 3 vertices"]
    probs = []
    for i in range(n):
        if v[i] == v[(i + 1) % n]:
            probs.append(f"repeated consecutive vertex at index {i}")
    if probs:
        return probs
    s = signed_area2_units(v).sign()
    if s == 0:
        return ["zero signed area"]
    if s < 0:
        probs.append("vertices are clockwise")
    for i in range(n):
        a, b = v[i], v[(i + 1) % n]
        for j in range(i + 1, n):
            c, d = v[j], v[(j + 1) % n]
            adjacent = j == i + 1 or (i == 0 and j == n - 1)
            c_type = segment_contact(a, b, c, d)
            if adjacent:
                # adjacent edges may only share their common vertex
                if c_type is Contact.EDGE:
                    probs.append(f"edges {i} and {j} fold back on each other")
            elif c_type is not Contact.DISJOINT:
                probs.append(f"edges {i} and {j} intersect")
    return probs


def point_in_polygon(p: Point, vertices: Sequence[Point], strict: bool = True) -> bool:
    """Exact point-in-polygon test; boundary points count as inside unless strict."""
    n = len(vertices)
    wn = 0
    for i in range(n):
        a, b = vertices[i], vertices[(i + 1) % n]
        if on_segment(p, a, b):
            return not strict
        ya = im_compare(a, p)
        yb = im_compare(b, p)
        if ya <= 0:
            if yb > 0 and orient(a, b, p) > 0:
                wn += 1
        elif yb <= 0 and orient(a, b, p) < 0:
            wn -= 1
    return wn != 0


def ear_clip(vertices: Sequence[Point]) -> list[tuple[Point, Point, Point]]:
    """Triangulate a simple CCW polygon by ear clipping."""
    idx = list(range(len(vertices)))
    v = vertices
    tris = []
    guard = 0
    while len(idx) > 3:
        m = len(idx)
        for k in range(m):
            i0, i1, i2 = idx[k - 1], idx[k], idx[(k + 1) % m]
            a, b, c = v[i0], v[i1], v[i2]
            if orient(a, b, c) <= 0:
                continue
            ok = True
            for j in idx:
                if j in (i0, i1, i2):
                    continue
                q = v[j]
                if orient(a, b, q) >= 0 and orient(b, c, q) >= 0 and orient(c, a, q) >= 0:
                    ok = False
                    break
            if ok:
                tris.append((a, b, c))
                del idx[k]
                break
        guard += 1
        if guard > 10 * len(vertices):
            raise InputError("ear clipping failed; polygon is not simple")
    tris.append(tuple(v[i] for i in idx))
    return tris


def _triangles_overlap(t1, t2) -> bool:
    """True iff two CCW triangles have intersecting interiors."""
    for tri, other in ((t1, t2), (t2, t1)):
        for i in range(3):
            a, b = tri[i], tri[(i + 1) % 3]
            if all(orient(a, b, q) <= 0 for q in other):
                return False
    return True


def _bbox_apart(b1, b2) -> bool:
    return b1[2] < b2[0] or b2[2] < b1[0] or b1[3] < b2[1] or b2[3] < b1[1]


def polygon_contact(P: Polygon, Q: Polygon) -> Contact:
    """Classify how two closed polygons meet."""
    if _bbox_apart(P.bbox(), Q.bbox()):
        return Contact.DISJOINT
    for t1 in P.triangles():
        for t2 in Q.triangles():
            if _triangles_overlap(t1, t2):
                return Contact.OVERLAP
    best = Contact.DISJOINT
    for a, b in P.edges():
        for c, d in Q.edges():
            k = segment_contact(a, b, c, d)
            if k is Contact.EDGE:
                return Contact.EDGE
            if k is Contact.POINT:
                best = Contact.POINT
    return best


def boundary_contact(P: Polygon, region: Polygon) -> bool:
    """True if P, assumed inside region, meets the boundary of region."""
    for v in P.vertices:
        for a, b in region.edges():
            if on_segment(v, a, b):
                return True
    for w in region.vertices:
        for a, b in P.edges():
            if on_segment(w, a, b):
                return True
    return False


# ---------------------------------------------------------------------------
# distances


def dist2_to_boundary(x: Point, region: Polygon) -> FieldElement:
    """Exact squared distance from x to the boundary of region."""
    best = None
    for a, b in region.edges():
        d2 = segment_dist2(x, a, b)
        if best is None or compare_real(d2, best) < 0:
            best = d2
    return best


def _sqrt_interval(lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    from math import isqrt

    def lower(q: Fraction, scale: int) -> Fraction:
        if q <= 0:
            return Fraction(0)
        return Fraction(isqrt(q.numerator * scale * scale // q.denominator), scale)

    def upper(q: Fraction, scale: int) -> Fraction:
        s = lower(q, scale)
        while s * s < q:
            s += Fraction(1, scale)
        return s

    scale = 1 << 60
    return lower(lo, scale), upper(hi, scale)


def boundary_distance(x: Point, region: Polygon, width=Fraction(1, 10**12)) -> tuple[Fraction, Fraction]:
    """Certified rational interval containing the distance from x to the boundary."""
    d2 = dist2_to_boundary(x, region)
    lo, hi = d2.real_interval(Fraction(width) ** 2 / 4 if width else None)
    lo = max(lo, Fraction(0))
    return _sqrt_interval(lo, hi)


def distance_less_than(x: Point, region: Polygon, R: Fraction) -> bool:
    """Exact decision of D(x) < R; a tie counts as not less."""
    R = Fraction(R)
    zx = x.approx()
    err = x.approx_error() + max(v.approx_error() for v in region.vertices)
    slack = 4 * err + 1e-9 * (1 + float(R))
    for a, b in region.edges():
        fd = _float_seg_dist(zx, a.approx(), b.approx())
        if fd < float(R) - slack:
            return True
    r2 = x.field.rational(R * R)
    for a, b in region.edges():
        fd = _float_seg_dist(zx, a.approx(), b.approx())
        if fd > float(R) + slack:
            continue
        if segment_dist_less(x, a, b, r2):
            return True
    return False


def diameter2(p: Polygon) -> FieldElement:
    """Exact squared diameter (largest vertex-to-vertex distance)."""
    best = None
    vs = p.vertices
    for i in range(len(vs)):
        for j in range(i + 1, len(vs)):
            d = norm2(vs[i] - vs[j])
            if best is None or compare_real(d, best) > 0:
                best = d
    return best


def rational_sqrt_upper(x: FieldElement) -> Fraction:
    """A rational upper bound for sqrt(x), within 1e-9 relative."""
    lo, hi = x.real_interval(Fraction(1, 10**15))
    _, up = _sqrt_interval(lo, hi)
    # round up to a short denominator so downstream arithmetic stays small
    q = Fraction(math.ceil(up * 10**9), 10**9)
    return q

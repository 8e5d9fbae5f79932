"""Builders for the bundled tiling systems.

The JSON files under ``data/`` are generated from these builders (see
``python -m subtile.catalog``); a test keeps them in sync.

Penrose conventions (Robinson triangles, label units where the short side of
the small triangle is 1):

* tile 1 is the small triangle 0, 1, phi*z^2 and tile 21 the large triangle
  0, phi^2, phi*z, with z = exp(2 pi i / 10);
* tile 1+k = r^k 1, 11+k = r^k f 1, 21+k = r^k 21, 31+k = r^k f 21 where r is
  rotation by z and f is the mirror x -> -conj(x) across the imaginary axis;
* omega(1) = {8, 24} and omega(21) = {31, 25, 17}, the rest by symmetry.

Punctures sit at barycentric weights (1/5, 2/5, 2/5) so that they avoid the
mirror axis of each isosceles triangle.  That makes the recentred tiles of
congruent mirror-image prototiles differ, which keeps the geometric action of
the symmetry group on labels unambiguous.
"""

from __future__ import annotations

import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .field import CyclotomicField, FieldElement
from .geometry import Polygon, RigidMotion
from .system import TilingSystem, dump_document, load_system

DATA_DIR = Path(__file__).with_name("data")


def _match_translation(poly: Polygon, target: list[FieldElement]) -> FieldElement:
    tset = set(target)
    for t in target:
        v = t - poly.vertices[0]
        if {p + v for p in poly.vertices} == tset:
            return v
    raise ValueError("target polygon is not a translate of the prototile")


def _doc(name, F, lam, protos, subst, group) -> dict:
    """protos: list of (id, label, vertices, puncture); subst: {id: [(q, v)]}."""
    return {
        "name": name,
        "cyclotomic_order": F.n,
        "lambda": lam.to_strings(),
        "prototiles": [
            {"id": i, "label": lab, "vertices": [v.to_strings() for v in vs], "puncture": c.to_strings()}
            for i, lab, vs, c in protos
        ],
        "substitution": {str(p): [{"id": q, "translation": v.to_strings()} for q, v in items] for p, items in subst.items()},
        "group": group,
    }


def _weighted(vs, w):
    return vs[0] * w[0] + vs[1] * w[1] + vs[2] * w[2]


def penrose_document() -> dict:
    F = CyclotomicField(10)
    z = F.zeta(1)
    phi = F.golden_ratio
    zero, one = F.zero(), F.one()
    weights = (Fraction(1, 5), Fraction(2, 5), Fraction(2, 5))

    small = Polygon([zero, one, phi * z**2])
    large = Polygon([zero, phi * phi, phi * z])
    bases = {1: (small, 1, 11), 21: (large, 21, 31)}

    # group elements r^k f^e; f is x -> z^5 conj(x)
    def elem(k, e):
        return RigidMotion(F, k + (5 if e else 0), bool(e))

    def label(base, k, e):
        _, plain, mirrored = bases[base]
        return (mirrored if e else plain) + k % 10

    def compose(g, h):
        (k, e), (a, b) = g, h
        return ((k + (-a if e else a)) % 10, e ^ b)

    protos = []
    for base, (poly, _, _) in bases.items():
        punc = _weighted(poly.vertices, weights)
        for e in (0, 1):
            for k in range(10):
                m = elem(k, e)
                protos.append((label(base, k, e), f"{label(base, k, e)}", list(poly.transform(m).vertices), m(punc)))
    protos.sort(key=lambda p: p[0])
    by_id = {p[0]: Polygon(p[2], validate=False) for p in protos}

    # label -> (base, k, e)
    decode = {}
    for base in bases:
        for e in (0, 1):
            for k in range(10):
                decode[label(base, k, e)] = (base, k, e)

    # substitution images read from the figure, as (label, target triangle)
    A, B, C = zero, phi, phi * phi * z**2  # lambda * tile 1
    D = phi * phi
    P = phi * z
    B2, C2 = phi**3, phi * phi * z  # lambda * tile 21
    figure = {
        1: [(8, [A, B, z**2]), (24, [B, C, z**2])],
        21: [(31, [A, D, P]), (25, [D, B2, C2]), (17, [P, D, C2])],
    }
    base_images = {}
    for p, items in figure.items():
        base_images[p] = [(q, _match_translation(by_id[q], tgt)) for q, tgt in items]

    subst = {}
    for base, items in base_images.items():
        for e in (0, 1):
            for k in range(10):
                g = (k, e)
                m = elem(k, e)
                img = []
                for q, v in items:
                    qb, qk, qe = decode[q]
                    gk, ge = compose(g, (qk, qe))
                    img.append((label(qb, gk, ge), m(v)))
                subst[label(base, k, e)] = img
    subst = dict(sorted(subst.items()))
    group = {"rotation_order": 10, "reflection": True, "reflection_axis_index": 5}
    return _doc("penrose", F, phi, protos, subst, group)


def chair_document() -> dict:
    F = CyclotomicField(4)
    i = F.zeta(1)

    def pt(x, y):
        return F.rational(x) + i * F.rational(y)

    chair = Polygon([pt(0, 0), pt(2, 0), pt(2, 1), pt(1, 1), pt(1, 2), pt(0, 2)])
    punc = pt(Fraction(5, 6), Fraction(5, 6))
    protos = []
    for k in range(4):
        m = RigidMotion(F, k)
        protos.append((1 + k, f"chair{k}", list(chair.transform(m).vertices), m(punc)))
    by_id = {p[0]: Polygon(p[2], validate=False) for p in protos}
    targets = [
        (1, [pt(0, 0), pt(2, 0), pt(2, 1), pt(1, 1), pt(1, 2), pt(0, 2)]),
        (1, [pt(1, 1), pt(3, 1), pt(3, 2), pt(2, 2), pt(2, 3), pt(1, 3)]),
        (2, [pt(2, 0), pt(4, 0), pt(4, 2), pt(3, 2), pt(3, 1), pt(2, 1)]),
        (4, [pt(0, 2), pt(1, 2), pt(1, 3), pt(2, 3), pt(2, 4), pt(0, 4)]),
    ]
    base = [(q, _match_translation(by_id[q], tgt)) for q, tgt in targets]
    subst = {}
    for k in range(4):
        m = RigidMotion(F, k)
        subst[1 + k] = [(1 + (q - 1 + k) % 4, m(v)) for q, v in base]
    group = {"rotation_order": 4, "reflection": False, "reflection_axis_index": 0}
    return _doc("chair", F, F.rational(2), protos, subst, group)


def square_document(rotation_order: int = 4) -> dict:
    F = CyclotomicField(4)
    i = F.zeta(1)
    o, one = F.zero(), F.one()
    sq = [o, one, one + i, i]
    half = Fraction(1, 2)
    protos = [(1, "square", sq, (one + i) * half)]
    subst = {1: [(1, o), (1, one), (1, i), (1, one + i)]}
    group = {"rotation_order": rotation_order, "reflection": False, "reflection_axis_index": 0}
    return _doc("square", F, F.rational(2), protos, subst, group)


BUILDERS = {"penrose": penrose_document, "chair": chair_document, "square": square_document}


def bundled_path(name: str) -> Path:
    return DATA_DIR / f"{name}.json"


def bundled_bytes(name: str) -> bytes:
    return resources.files("subtile").joinpath("data", f"{name}.json").read_bytes()


def load_bundled(name: str) -> TilingSystem:
    raw = bundled_bytes(name)
    return load_system(raw, source=raw)


def write_bundled(directory: Path = DATA_DIR) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for name, build in BUILDERS.items():
        (directory / f"{name}.json").write_text(dump_document(build()), encoding="utf-8")


if __name__ == "__main__":
    write_bundled(Path(sys.argv[1]) if len(sys.argv) > 1 else DATA_DIR)

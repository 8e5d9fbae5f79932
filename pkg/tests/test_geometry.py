from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from shapely.geometry import Polygon as SPolygon

from subtile.errors import InputError
from subtile.field import CyclotomicField
from subtile.geometry import (
    Contact,
    Polygon,
    RigidMotion,
    diameter2,
    distance_less_than,
    polygon_contact,
    rational_sqrt_upper,
)

F4 = CyclotomicField(4)


def pt(x, y):
    return F4.element([Fraction(x), Fraction(y)])


def rect(x, y, w, h):
    return Polygon([pt(x, y), pt(x + w, y), pt(x + w, y + h), pt(x, y + h)])


def xy(v):
    # over Q(i) the coordinates are the coefficients; the complex embedding
    # leaves cos(pi/2) noise that tilts axis-parallel edges
    c = v.coefficients()
    return float(c[0]), float(c[1])


def shapely_contact(P, Q):
    a = SPolygon([xy(v) for v in P.vertices])
    b = SPolygon([xy(v) for v in Q.vertices])
    inter = a.intersection(b)
    if inter.is_empty:
        return Contact.DISJOINT
    if inter.area > 1e-12:
        return Contact.OVERLAP
    if inter.length > 1e-12:
        return Contact.EDGE
    return Contact.POINT


def test_contact_examples():
    A = rect(0, 0, 1, 1)
    assert polygon_contact(A, rect(1, 0, 1, 1)) is Contact.EDGE
    assert polygon_contact(A, rect(1, 1, 1, 1)) is Contact.POINT
    assert polygon_contact(A, rect(Fraction(1, 2), 0, 1, 1)) is Contact.OVERLAP
    assert polygon_contact(A, rect(2, 0, 1, 1)) is Contact.DISJOINT
    # a partial shared edge still counts as edge adjacency
    assert polygon_contact(A, rect(1, Fraction(1, 2), 1, 1)) is Contact.EDGE
    # a vertex landing in the middle of an edge is a point touch
    tri = Polygon([pt(1, Fraction(1, 2)), pt(2, 0), pt(2, 1)])
    assert polygon_contact(A, tri) is Contact.POINT
    assert str(Contact.EDGE) == "edge-adjacent"


def test_invalid_polygons_rejected():
    with pytest.raises(InputError):
        Polygon([pt(0, 0), pt(1, 1), pt(1, 0), pt(0, 1)])  # bow tie
    with pytest.raises(InputError):
        Polygon([pt(0, 0), pt(0, 1), pt(1, 0)])  # clockwise


rects = st.tuples(
    st.integers(-3, 3), st.integers(-3, 3), st.integers(1, 3), st.integers(1, 3)
).map(lambda t: rect(Fraction(t[0], 2), Fraction(t[1], 2), Fraction(t[2], 2), Fraction(t[3], 2)))


@settings(max_examples=200, deadline=None)
@given(rects, rects)
def test_contact_matches_shapely(P, Q):
    c = polygon_contact(P, Q)
    assert c is shapely_contact(P, Q)
    assert polygon_contact(Q, P) is c


motions = st.tuples(st.integers(0, 3), st.booleans(), st.integers(-4, 4), st.integers(-4, 4)).map(
    lambda t: RigidMotion(F4, t[0], t[1], pt(t[2], t[3]))
)


@settings(max_examples=100, deadline=None)
@given(rects, rects, motions)
def test_contact_is_invariant_under_motions(P, Q, m):
    assert polygon_contact(P.transform(m), Q.transform(m)) is polygon_contact(P, Q)


@settings(max_examples=100, deadline=None)
@given(rects, motions)
def test_area_and_diameter_invariant(P, m):
    Q = P.transform(m)
    assert Q.area() == P.area()
    assert diameter2(Q) == diameter2(P)


@settings(max_examples=50, deadline=None)
@given(motions, motions, st.integers(-5, 5), st.integers(-5, 5))
def test_motion_composition(m1, m2, x, y):
    z = pt(x, y)
    assert m1.compose(m2)(z) == m1(m2(z))
    assert m1.inverse()(m1(z)) == z


def test_distance_to_boundary_exact_tie():
    sq = rect(0, 0, 4, 4)
    centre = pt(2, 2)
    assert not distance_less_than(centre, sq, Fraction(2))  # tie is not less
    assert distance_less_than(centre, sq, Fraction(2) + Fraction(1, 10**40))
    assert distance_less_than(pt(1, 2), sq, Fraction(3, 2))


def test_penrose_diameter_is_phi_fourth(penrose, phi):
    # the long side of the large triangle has length phi^2
    d2 = max((diameter2(penrose.shape(p)) for p in penrose.prototiles), key=lambda v: v.approx().real)
    assert d2 == phi**4
    up = rational_sqrt_upper(d2)
    assert d2.field.rational(up * up) - d2 > d2.field.zero()
    assert float(up) - (2.618033988749895) < 1e-8

"""Independent reference computations used by the tests.

Nothing here goes through the package's exact geometry: matrices are powered
with plain integers, geometry uses shapely on floats, and layers are found by
literally peeling tiles off the union of the remaining ones.
"""

from __future__ import annotations

import math

import numpy as np
from shapely.geometry import Polygon as SPolygon
from shapely.ops import unary_union


def int_matrix_power(M, k):
    n = len(M)
    out = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(k):
        out = [[sum(out[i][m] * M[m][j] for m in range(n)) for j in range(n)] for i in range(n)]
    return out


def row_sums(M):
    return [sum(r) for r in M]


def type_counts(n):
    """(small, large) tile counts in a level-n supertile of a small triangle, by the recursion
    s_{k+1} = s_k + l_k, l_{k+1} = s_k + 2 l_k from M^G = ((1, 1), (1, 2))."""
    s, l = 1, 0
    small_start = [(s, l)]
    for _ in range(n):
        s, l = s + l, s + 2 * l
        small_start.append((s, l))
    return small_start


def boolean_primitivity_exponent(M, limit=100):
    n = len(M)
    B = [[int(v > 0) for v in r] for r in M]
    cur = [row[:] for row in B]
    for k in range(1, limit + 1):
        if all(all(v for v in r) for r in cur):
            return k
        cur = [[int(any(cur[i][m] and B[m][j] for m in range(n))) for j in range(n)] for i in range(n)]
    return None


def float_perron(M):
    """Dominant eigenvalue and left eigenvector (sum 1) with numpy."""
    A = np.array(M, dtype=float)
    w, V = np.linalg.eig(A.T)
    i = int(np.argmax(w.real))
    v = np.abs(V[:, i].real)
    return float(w[i].real), v / v.sum()


def shapely_poly(sys, tile):
    return SPolygon([(z.real, z.imag) for z in (v.approx() for v in sys.tile_polygon(tile).vertices)])


def shapely_region(sys, p, n):
    return SPolygon([(z.real, z.imag) for z in (v.approx() for v in sys.support(p, n).vertices)])


def peel_layers(sys, p, n, tol=1e-9):
    """Layers by iterated peeling: layer k = tiles touching the boundary of what is left."""
    tiles = list(sys.supertile(p, n))
    polys = [shapely_poly(sys, t) for t in tiles]
    layer = {}
    remaining = set(range(len(tiles)))
    k = 0
    while remaining:
        union = unary_union([polys[i] for i in remaining])
        bd = union.boundary
        hit = [i for i in remaining if polys[i].distance(bd) < tol]
        if not hit:
            raise AssertionError("peeling stalled")
        for i in hit:
            layer[tiles[i]] = k
        remaining -= set(hit)
        k += 1
    return layer


def float_boundary_fraction(sys, p, n, R):
    region = shapely_region(sys, p, n)
    bd = region.boundary
    tiles = sys.supertile(p, n)
    close = 0
    margin = math.inf
    from shapely.geometry import Point

    for t in tiles:
        z = t.x.approx()
        d = Point(z.real, z.imag).distance(bd)
        margin = min(margin, abs(d - R))
        close += d < R
    return close, len(tiles), margin


def shapely_edge_pairs(sys, depth, digits=6):
    """Ordered edge-adjacent pairs (p, q, rounded offset) by brute force over all tile pairs."""
    out = set()
    for p in sys.ids:
        tiles = sys.supertile(p, depth)
        polys = [shapely_poly(sys, t) for t in tiles]
        for i in range(len(tiles)):
            for j in range(len(tiles)):
                if i == j or polys[i].distance(polys[j]) > 1e-9:
                    continue
                inter = polys[i].intersection(polys[j])
                if inter.area < 1e-9 and inter.length > 1e-6:
                    d = tiles[j].x.approx() - tiles[i].x.approx()
                    out.add((tiles[i].proto, tiles[j].proto, round(d.real, digits) + 0.0, round(d.imag, digits) + 0.0))
    return out

"""The AF tower A_n: incidence matrices, Perron data, traces, inclusions, K0.

A_n is the direct sum over prototiles p of full matrix algebras indexed by
Punc(n,p).  Tower elements are sparse maps (p, x, y) -> rational coefficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from sympy import Matrix
from sympy.matrices.normalforms import hermite_normal_form

from .errors import InputError, ResourceError, VerificationError
from .field import CyclotomicField, FieldElement
from .geometry import polygon_area
from .symmetry import attach_group, orbit_rep, require_free, standard_position
from .system import TilingSystem, check_primitivity, incidence_counts

D = 2  # dimension of the tilings


@dataclass(frozen=True)
class IncidenceMatrix:
    labels: tuple[int, ...]
    entries: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.labels)

    def row(self, p: int) -> tuple[int, ...]:
        return self.entries[self.labels.index(p)]

    def __getitem__(self, ij) -> int:
        i, j = ij
        return self.entries[self.labels.index(i)][self.labels.index(j)]

    def as_lists(self) -> list[list[int]]:
        return [list(r) for r in self.entries]

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=object)

    def row_sums(self) -> list[int]:
        return [sum(r) for r in self.entries]

    def power(self, k: int) -> list[list[int]]:
        n = len(self.labels)
        P = [[int(i == j) for j in range(n)] for i in range(n)]
        A = self.as_lists()
        for _ in range(k):
            P = [[sum(P[i][m] * A[m][j] for m in range(n)) for j in range(n)] for i in range(n)]
        return P


def incidence_matrix(sys: TilingSystem) -> IncidenceMatrix:
    M = incidence_counts(sys)
    return IncidenceMatrix(sys.ids, tuple(tuple(r) for r in M))


def equivariant_incidence_matrix(sys: TilingSystem) -> IncidenceMatrix:
    """Entry (i, j): tiles of omega(s_i) lying in the G-orbit of s_j, for s in S_G."""
    require_free(sys)
    reps = standard_position(sys)
    rep_of = {p: s for p, (s, _) in orbit_rep(sys).items()}
    rows = []
    for s in reps:
        row = [0] * len(reps)
        for t in sys.omega[s]:
            row[reps.index(rep_of[t.proto])] += 1
        rows.append(tuple(row))
    return IncidenceMatrix(tuple(reps), tuple(rows))


def permutation_commutes(sys: TilingSystem) -> bool:
    """P_g M = M P_g for every group element, exactly."""
    G = attach_group(sys)
    M = incidence_counts(sys)
    idx = {p: i for i, p in enumerate(sys.ids)}
    for g in G:
        perm = G.perm[g.index]
        for p in sys.ids:
            for q in sys.ids:
                if M[idx[perm[p]]][idx[perm[q]]] != M[idx[p]][idx[q]]:
                    return False
    return True


# ---------------------------------------------------------------------------
# Perron-Frobenius data


@dataclass
class PerronData:
    labels: tuple[int, ...]
    eigenvalue: FieldElement | None
    eigen_interval: tuple[Fraction, Fraction]
    v_left: tuple  # FieldElements (exact) or floats (interval mode)
    v_right: tuple
    mode: str  # "exact" or "interval"

    def vl(self, p: int):
        return self.v_left[self.labels.index(p)]

    def scale(self, n: int) -> FieldElement:
        """lambda^(-d n) = eigenvalue^(-n)."""
        if self.eigenvalue is None:
            raise InputError("exact Perron data needed")
        return self.eigenvalue ** (-n)


def _solve_nullvector(A: list[list[FieldElement]], F: CyclotomicField) -> list[FieldElement]:
    """A nonzero vector v with A v = 0 (A square, corank >= 1), by Gaussian elimination."""
    n = len(A)
    A = [row[:] for row in A]
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, n) if not A[i][c].is_zero()), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = A[r][c].inverse()
        A[r] = [a * inv for a in A[r]]
        for i in range(n):
            if i != r and not A[i][c].is_zero():
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    if not free:
        raise VerificationError("matrix minus eigenvalue is nonsingular; value is not an eigenvalue")
    fcol = free[0]
    v = [F.zero()] * n
    v[fcol] = F.one()
    for i, c in enumerate(pivots):
        v[c] = -A[i][fcol]
    return v


def _power_iteration(M: np.ndarray, left: bool, iters: int = 20000, tol: float = 1e-14) -> np.ndarray:
    A = M.T if left else M
    v = np.ones(A.shape[0]) / A.shape[0]
    for _ in range(iters):
        w = A @ v
        w /= w.sum()
        # average with the previous iterate to damp periodic components
        w = 0.5 * (w + v)
        if np.max(np.abs(w - v)) <= tol * np.max(w):
            return w
        v = w
    raise ResourceError("power iteration did not converge")


def _collatz_wielandt(M: list[list[int]], v: np.ndarray) -> tuple[Fraction, Fraction]:
    vq = [Fraction(float(x)) for x in v]
    ratios = []
    for i, row in enumerate(M):
        s = sum(Fraction(a) * vq[j] for j, a in enumerate(row) if a)
        ratios.append(s / vq[i])
    return min(ratios), max(ratios)


def perron_data(
    M: IncidenceMatrix | Sequence[Sequence[int]],
    areas: Sequence[FieldElement] | None = None,
    eigenvalue: FieldElement | None = None,
) -> PerronData:
    """Perron eigen-data of a primitive nonnegative integer matrix.

    With ``areas`` (volumes of the prototiles) the residual M a = mu a is
    checked exactly, fixing mu.  Exact left/right eigenvectors are then solved
    over the field; otherwise only interval data is produced.
    """
    if isinstance(M, IncidenceMatrix):
        labels, rows = M.labels, [list(r) for r in M.entries]
    else:
        rows = [list(r) for r in M]
        labels = tuple(range(1, len(rows) + 1))
    n = len(rows)
    if not check_primitivity(rows).primitive:
        raise InputError("matrix is not primitive")
    arr = np.array(rows, dtype=float)
    vr_f = _power_iteration(arr, left=False)
    vl_f = _power_iteration(arr, left=True)
    lo, hi = _collatz_wielandt(rows, vr_f)
    lo2, hi2 = _collatz_wielandt([list(c) for c in zip(*rows)], vl_f)
    interval = (max(lo, lo2), min(hi, hi2))

    if areas is not None:
        F = areas[0].field
        mu = sum((areas[j] * rows[0][j] for j in range(n) if rows[0][j]), F.zero()) / areas[0]
        for i in range(n):
            lhs = sum((areas[j] * rows[i][j] for j in range(n) if rows[i][j]), F.zero())
            if lhs != mu * areas[i]:
                raise VerificationError(f"area vector is not an eigenvector (row {labels[i]})")
        if eigenvalue is not None and eigenvalue != mu:
            raise VerificationError("area eigenvalue differs from the supplied eigenvalue")
        eigenvalue = mu
    if eigenvalue is None:
        vl = tuple(float(x) for x in vl_f / vl_f.sum())
        return PerronData(tuple(labels), None, interval, vl, tuple(float(x) for x in vr_f), "interval")

    F = eigenvalue.field
    lo_e, hi_e = eigenvalue.real_interval(Fraction(1, 10**15))
    if hi_e < interval[0] - Fraction(1, 10**9) or lo_e > interval[1] + Fraction(1, 10**9):
        raise VerificationError("supplied eigenvalue is not the Perron root")
    # left eigenvector: (M^T - mu I) v = 0
    At = [[F.rational(rows[j][i]) - (eigenvalue if i == j else F.zero()) for j in range(n)] for i in range(n)]
    vl = _solve_nullvector(At, F)
    tot = sum(vl, F.zero())
    vl = [x / tot for x in vl]
    if areas is not None:
        vr = list(areas)
    else:
        A = [[F.rational(rows[i][j]) - (eigenvalue if i == j else F.zero()) for j in range(n)] for i in range(n)]
        vr = _solve_nullvector(A, F)
        s = sum(vr, F.zero())
        vr = [x / s for x in vr]
    for x in vl + vr:
        if x.sign() <= 0:
            raise VerificationError("Perron eigenvector is not strictly positive")
    # exact residuals
    for j in range(n):
        lhs = sum((vl[i] * rows[i][j] for i in range(n) if rows[i][j]), F.zero())
        if lhs != eigenvalue * vl[j]:
            raise VerificationError("left eigenvector residual is nonzero")
    return PerronData(tuple(labels), eigenvalue, interval, tuple(vl), tuple(vr), "exact")


def system_perron(sys: TilingSystem) -> PerronData:
    areas = [polygon_area(sys.shape(p)) for p in sys.ids]
    return perron_data(incidence_matrix(sys), areas, sys.lam ** D)


def equivariant_perron(sys: TilingSystem) -> PerronData:
    return perron_data(equivariant_incidence_matrix(sys), None, sys.lam ** D)


# ---------------------------------------------------------------------------
# tower elements


Key = tuple  # (p, x, y) with x, y FieldElements


class TowerElement:
    """Finite rational combination of matrix units e^n_p(x, y)."""

    __slots__ = ("level", "coeffs")

    def __init__(self, level: int, coeffs: dict | None = None):
        self.level = level
        self.coeffs = {k: v if type(v) is Fraction else Fraction(v) for k, v in (coeffs or {}).items() if v}

    @classmethod
    def unit(cls, level: int, p: int, x: FieldElement, y: FieldElement, c=1) -> "TowerElement":
        return cls(level, {(p, x, y): c})

    @classmethod
    def identity(cls, sys: TilingSystem, level: int, protos: Iterable[int] | None = None) -> "TowerElement":
        coeffs = {}
        for p in protos if protos is not None else sys.ids:
            for t in sys.supertile(p, level):
                coeffs[(p, t.x, t.x)] = 1
        return cls(level, coeffs)

    def _check(self, other: "TowerElement") -> None:
        if self.level != other.level:
            raise InputError(f"level mismatch: {self.level} vs {other.level}")

    def __add__(self, other: "TowerElement") -> "TowerElement":
        self._check(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return TowerElement(self.level, out)

    def __neg__(self) -> "TowerElement":
        return TowerElement(self.level, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other: "TowerElement") -> "TowerElement":
        return self + (-other)

    def scale(self, c) -> "TowerElement":
        return TowerElement(self.level, {k: v * c for k, v in self.coeffs.items()})

    def __mul__(self, other: "TowerElement") -> "TowerElement":
        if not isinstance(other, TowerElement):
            return self.scale(other)
        self._check(other)
        by_row: dict = {}
        for (p, x, y), v in other.coeffs.items():
            by_row.setdefault((p, x), []).append((y, v))
        out: dict = {}
        for (p, x, y), u in self.coeffs.items():
            for z, v in by_row.get((p, y), ()):
                k = (p, x, z)
                out[k] = out.get(k, 0) + u * v
        return TowerElement(self.level, out)

    __rmul__ = scale

    def adjoint(self) -> "TowerElement":
        return TowerElement(self.level, {(p, y, x): v for (p, x, y), v in self.coeffs.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, TowerElement) and self.level == other.level and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.level, frozenset(self.coeffs.items())))

    def is_diagonal(self) -> bool:
        return all(x == y for (_, x, y) in self.coeffs)

    def __repr__(self) -> str:
        return f"TowerElement(level={self.level}, {len(self.coeffs)} terms)"


def trace(elt: TowerElement, perron: PerronData, level: int | None = None) -> FieldElement:
    """tau(e^n_p(x,y)) = lambda^(-dn) v_L(p) if x = y, else 0."""
    if level is not None and level != elt.level:
        raise InputError(f"element lives at level {elt.level}, not {level}")
    if perron.eigenvalue is None:
        raise InputError("exact Perron data needed for exact traces")
    F = perron.eigenvalue.field
    per_p: dict[int, Fraction] = {}
    for (p, x, y), v in elt.coeffs.items():
        if x == y:
            per_p[p] = per_p.get(p, 0) + v
    acc = F.zero()
    for p, c in per_p.items():
        acc = acc + perron.vl(p) * c
    return acc * perron.scale(elt.level)


def occurrences_in_parents(sys: TilingSystem) -> dict[int, list[tuple[int, FieldElement]]]:
    """p -> [(p', v)] for each tile p + v of omega(p'), in raw recentred coordinates."""
    occ: dict[int, list] = {p: [] for p in sys.ids}
    for pp in sys.ids:
        for t in sys.omega[pp]:
            occ[t.proto].append((pp, t.x))
    return occ


def include_level(elt: TowerElement, sys: TilingSystem) -> TowerElement:
    """e^n_p(x,y) -> sum over p + v in omega(p') of e^(n+1)_p'(x + lambda^n v, y + lambda^n v)."""
    occ = getattr(sys, "_parent_occ", None)
    if occ is None:
        occ = sys._parent_occ = occurrences_in_parents(sys)
    ln = sys.lam_pow(elt.level)
    shifts = {p: [(pp, ln * v) for pp, v in lst] for p, lst in occ.items()}
    out: dict = {}
    for (p, x, y), c in elt.coeffs.items():
        for pp, s in shifts[p]:
            k = (pp, x + s, y + s)
            out[k] = out.get(k, 0) + c
    return TowerElement(elt.level + 1, out)


def partial_multiplicities(sys: TilingSystem, level: int) -> list[list[int]]:
    """Matrix of the inclusion A_level -> A_(level+1), rows indexed by the target summand."""
    idx = {p: i for i, p in enumerate(sys.ids)}
    n = len(sys.ids)
    out = [[0] * n for _ in range(n)]
    for q in sys.ids:
        x0 = sys.supertile(q, level)[0].x
        img = include_level(TowerElement.unit(level, q, x0, x0), sys)
        for (pp, x, y), c in img.coeffs.items():
            if x == y:
                out[idx[pp]][idx[q]] += int(c)
    return out


def random_basis_element(sys: TilingSystem, level: int, rng, protos=None) -> TowerElement:
    ps = list(protos or sys.ids)
    p = ps[rng.randrange(len(ps))]
    tiles = sys.supertile(p, level)
    x = tiles[rng.randrange(len(tiles))].x
    y = tiles[rng.randrange(len(tiles))].x
    return TowerElement.unit(level, p, x, y)


def act_element(sys: TilingSystem, g: int, elt: TowerElement) -> TowerElement:
    """alpha_g: e^n_p(x, y) -> e^n_{gp}(gx, gy)."""
    G = attach_group(sys)
    perm = G.perm[g]
    lin = G[g]
    return TowerElement(elt.level, {(perm[p], lin(x), lin(y)): c for (p, x, y), c in elt.coeffs.items()})


# ---------------------------------------------------------------------------
# crossed products by a free action


def crossed_summand_dims(sys: TilingSystem, n: int) -> list[tuple[int, int]]:
    G = require_free(sys)
    return [(s, len(G) * len(sys.supertile(s, n))) for s in standard_position(sys)]


def tower_dimension(sys: TilingSystem, n: int) -> int:
    return sum(len(sys.supertile(p, n)) ** 2 for p in sys.ids)


def crossed_trace(elt: TowerElement, g: int, perron_g: PerronData, sys: TilingSystem) -> FieldElement:
    """Normalised trace of a * delta_g on A_n x G, from the Perron data of M^G."""
    G = require_free(sys)
    F = sys.field
    if g != G.identity:
        return F.zero()
    rep = orbit_rep(sys)
    acc = F.zero()
    per_s: dict[int, Fraction] = {}
    for (p, x, y), v in elt.coeffs.items():
        if x == y:
            s = rep[p][0]
            per_s[s] = per_s.get(s, 0) + v
    for s, c in per_s.items():
        acc = acc + perron_g.vl(s) * c
    return acc * perron_g.scale(elt.level) / len(G)


# ---------------------------------------------------------------------------
# K0 trace image


@dataclass
class K0Image:
    basis: list[FieldElement]
    hnf: list[list[int]]  # columns of the canonical lattice basis (reversed power coordinates)
    denominator: int
    stabilization_level: int
    stabilized: bool
    levels: int
    ranks: list[int] = field(default_factory=list)

    def same_module(self, elements: Sequence[FieldElement]) -> bool:
        den = self.denominator
        for z in elements:
            den = den * z.den // math.gcd(den, z.den)
        return _hnf_of(elements, den) == _hnf_of(self.basis, den)


def _coords(z: FieldElement, den: int) -> list[int]:
    # reversed power-basis order puts the constant coordinate last, which makes the
    # HNF of the Penrose module come out as {1, phi - 1}
    return [int(c * den) for c in reversed(z.coefficients())]


def _hnf_of(elements: Sequence[FieldElement], den: int) -> list[list[int]]:
    cols = [_coords(z, den) for z in elements if not z.is_zero()]
    if not cols:
        return []
    A = Matrix(cols).T
    H = hermite_normal_form(A)
    return [list(map(int, H[:, j])) for j in range(H.shape[1])]


def k0_trace_image(M: IncidenceMatrix | Sequence[Sequence[int]], perron: PerronData, levels: int = 6) -> K0Image:
    """The Z-module generated by mu^(-n) v_L(i), n <= levels, in canonical lattice form."""
    if perron.eigenvalue is None:
        raise InputError("k0_trace_image needs exact Perron data")
    rows = M.as_lists() if isinstance(M, IncidenceMatrix) else [list(r) for r in M]
    if Matrix(rows).det() == 0:
        raise InputError("incidence matrix is singular over Q")
    gens_by_level = []
    for n in range(levels + 1):
        sc = perron.scale(n)
        gens_by_level.append([v * sc for v in perron.v_left])
    den = 1
    for lst in gens_by_level:
        for z in lst:
            den = den * z.den // math.gcd(den, z.den)
    hnfs = []
    acc: list[FieldElement] = []
    for lst in gens_by_level:
        acc.extend(lst)
        hnfs.append(_hnf_of(acc, den))
    final = hnfs[-1]
    stab = levels
    while stab > 0 and hnfs[stab - 1] == final:
        stab -= 1
    basis = []
    F = perron.eigenvalue.field
    for col in final:
        coeffs = [Fraction(c, den) for c in reversed(col)]
        basis.append(F.element(coeffs))
    return K0Image(basis, final, den, stab, stab < levels, levels, [len(h) for h in hnfs])

"""Exact membership tests for the period domain of a rank-4 transcendental
lattice and for its integral orthogonal group, including the component
("+") condition.

Points are row vectors xi = x + i y and a matrix g acts by xi -> xi g, so g is
an isometry when g A g^T = A.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import isqrt
from typing import Iterator, List, Optional, Sequence, Tuple

from .data import load
from .lattice import GramMatrix, determinant, matmul, signature, transpose

Vec = Tuple[Fraction, ...]


class InvalidReferenceError(ValueError):
    pass


def _vec(v) -> Vec:
    return tuple(Fraction(a) for a in v)


def form(A: GramMatrix, u: Sequence, v: Sequence) -> Fraction:
    n = A.n
    return sum(u[i] * A.rows[i][j] * v[j] for i in range(n) for j in range(n) if A.rows[i][j])


@dataclass(frozen=True)
class QuadraticSpace:
    A: GramMatrix

    def __post_init__(self):
        if self.A.n != 4:
            raise ValueError("expected a 4x4 Gram matrix")
        if determinant(self.A) == 0:
            raise ValueError("degenerate form")
        if signature(self.A) != (2, 2):
            raise ValueError("signature must be (2, 2)")

    @classmethod
    def of_family(cls, family) -> "QuadraticSpace":
        return cls(GramMatrix(load("lattices.json")[f"A{family}"]))


@dataclass(frozen=True)
class DomainPoint:
    x: Vec
    y: Vec

    def __post_init__(self):
        object.__setattr__(self, "x", _vec(self.x))
        object.__setattr__(self, "y", _vec(self.y))
        if not any(self.x) and not any(self.y):
            raise ValueError("the zero vector is not a projective point")

    def act(self, g) -> "DomainPoint":
        def img(v):
            return tuple(sum(v[i] * g[i][j] for i in range(4)) for j in range(4))
        return DomainPoint(img(self.x), img(self.y))

    def conjugate(self) -> "DomainPoint":
        return DomainPoint(self.x, tuple(-a for a in self.y))

    def scaled(self, a, b) -> "DomainPoint":
        """Representative (a + i b) * xi."""
        a, b = Fraction(a), Fraction(b)
        return DomainPoint(tuple(a * p - b * q for p, q in zip(self.x, self.y)),
                           tuple(b * p + a * q for p, q in zip(self.x, self.y)))


def _is_int_matrix(g) -> bool:
    return len(g) == 4 and all(len(r) == 4 for r in g) and all(
        isinstance(a, int) or (isinstance(a, Fraction) and a.denominator == 1) for r in g for a in r)


def in_PO(Q: QuadraticSpace, g) -> bool:
    if not _is_int_matrix(g):
        return False
    g = [[int(a) for a in r] for r in g]
    if abs(determinant(g)) != 1:
        return False
    return matmul(matmul(g, Q.A.rows), transpose(g)) == Q.A.rows


def domain_member(Q: QuadraticSpace, p: DomainPoint) -> bool:
    xx, yy, xy = form(Q.A, p.x, p.x), form(Q.A, p.y, p.y), form(Q.A, p.x, p.y)
    return xx == yy and xy == 0 and yy > 0


@dataclass(frozen=True)
class Reference:
    e: Vec
    f: Vec
    point: DomainPoint


def _pairing_det(Q: QuadraticSpace, p: DomainPoint, e, f) -> Fraction:
    return form(Q.A, p.x, e) * form(Q.A, p.y, f) - form(Q.A, p.y, e) * form(Q.A, p.x, f)


def _small_vectors(bound: int) -> Iterator[Tuple[int, ...]]:
    rng = sorted(range(-bound, bound + 1), key=lambda a: (abs(a), -a))
    vs = [v for v in product(rng, repeat=4) if any(v)]
    vs.sort(key=lambda v: (sum(map(abs, v)), [-a for a in v]))
    return iter(vs)


def _rational_sqrt(q: Fraction) -> Optional[Fraction]:
    a, b = isqrt(q.numerator), isqrt(q.denominator)
    return Fraction(a, b) if a * a == q.numerator and b * b == q.denominator else None


def find_reference(Q: QuadraticSpace, bound: int = 3) -> Reference:
    """First positive-definite pair (e, f) and first domain point in small-vector order.

    The point is x, r*y with x, y orthogonal positive vectors whose norm ratio
    is the square of a rational r.
    """
    vs = list(_small_vectors(bound))
    pos = [v for v in vs if form(Q.A, v, v) > 0]
    pair = None
    for e in pos:
        for f in pos:
            ee, ff, ef = form(Q.A, e, e), form(Q.A, f, f), form(Q.A, e, f)
            if ee * ff - ef * ef > 0:
                pair = (e, f)
                break
        if pair:
            break
    if pair is None:
        raise InvalidReferenceError("no positive-definite pair in the search box")
    point = None
    for x in pos:
        nx = form(Q.A, x, x)
        for y in pos:
            if form(Q.A, x, y) != 0:
                continue
            r = _rational_sqrt(Fraction(nx, form(Q.A, y, y)))
            if r is not None:
                p = DomainPoint(x, tuple(r * a for a in y))
                if _pairing_det(Q, p, *pair) > 0:
                    point = p
                    break
        if point:
            break
    if point is None:
        raise InvalidReferenceError("no domain point in the search box")
    return Reference(_vec(pair[0]), _vec(pair[1]), point)


def stored_reference(family) -> Reference:
    r = load("lattices.json")["monodromy_reference"][str(family)]
    return Reference(_vec(r["e"]), _vec(r["f"]), DomainPoint(r["x"], r["y"]))


def component_orientation(Q: QuadraticSpace, p: DomainPoint, ref: Reference) -> int:
    """+1 on the component of the reference point, -1 on the other one."""
    e, f = ref.e, ref.f
    ee, ff, ef = form(Q.A, e, e), form(Q.A, f, f), form(Q.A, e, f)
    assert ee > 0 and ee * ff - ef * ef > 0, "reference pair must span a positive plane"
    d = _pairing_det(Q, p, e, f)
    if d == 0:
        raise InvalidReferenceError("reference pair invalid for this point")
    base = _pairing_det(Q, ref.point, e, f)
    return 1 if (d > 0) == (base > 0) else -1


def in_PO_plus(Q: QuadraticSpace, g, ref: Reference) -> bool:
    p = ref.point
    return component_orientation(Q, p.act(g), ref) == component_orientation(Q, p, ref)


def epsilon(Q: QuadraticSpace, g, ref: Reference) -> int:
    return 1 if in_PO_plus(Q, g, ref) else -1


def search_PO(Q: QuadraticSpace, bound: int = 2, limit: Optional[int] = None) -> List[Tuple[Tuple[int, ...], ...]]:
    """All g in PO(A, Z) with entries in [-bound, bound], found row by row:
    row i must have norm A_ii and pair to earlier rows j as A_ij."""
    A = Q.A.rows
    vs = list(product(range(-bound, bound + 1), repeat=4))
    by_norm = {}
    for v in vs:
        by_norm.setdefault(form(Q.A, v, v), []).append(v)
    found = []

    def rec(rows):
        if limit is not None and len(found) >= limit:
            return
        i = len(rows)
        if i == 4:
            if abs(determinant([list(r) for r in rows])) == 1:
                found.append(tuple(rows))
            return
        for v in by_norm.get(A[i][i], []):
            if all(form(Q.A, rows[j], v) == A[j][i] for j in range(i)):
                rec(rows + [v])

    rec([])
    return found


def inverse(g) -> Tuple[Tuple[int, ...], ...]:
    """Integer inverse of a unimodular 4x4 matrix via the adjugate."""
    d = determinant([list(r) for r in g])
    if abs(d) != 1:
        raise ValueError("not unimodular")

    def minor(i, j):
        return [[g[a][b] for b in range(4) if b != j] for a in range(4) if a != i]

    return tuple(tuple((-1) ** (i + j) * determinant(minor(j, i)) * d for j in range(4)) for i in range(4))


def read_matrix(text: str) -> List[List[int]]:
    rows = [[int(t) for t in line.replace(",", " ").split()] for line in text.splitlines() if line.strip()]
    if len(rows) != 4 or any(len(r) != 4 for r in rows):
        raise ValueError("expected four rows of four integers")
    return rows

"""Facets, lattice points and the reflexive/terminal/Fano checks for 3-polytopes."""

from dataclasses import dataclass
from itertools import combinations, product
from math import gcd
from typing import List, Sequence, Tuple

Vec = Tuple[int, int, int]
Facet = Tuple[int, int, int, int]


class DegeneratePolytopeError(ValueError):
    pass


def _sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def det3(a, b, c) -> int:
    return _dot(a, _cross(b, c))


@dataclass(frozen=True)
class LatticePolytope3:
    vertices: Tuple[Vec, ...]

    def __post_init__(self):
        vs = tuple(tuple(int(c) for c in v) for v in self.vertices)
        if any(len(v) != 3 for v in vs):
            raise ValueError("vertices must be integer 3-vectors")
        if len(set(vs)) != len(vs):
            raise ValueError("vertices must be pairwise distinct")
        object.__setattr__(self, "vertices", vs)

    @classmethod
    def from_columns(cls, rows: Sequence[Sequence[int]]) -> "LatticePolytope3":
        """Build from a 3 x k matrix whose columns are the vertices."""
        return cls(tuple(zip(*rows)))

    def scaled(self, k: int) -> "LatticePolytope3":
        return LatticePolytope3(tuple(tuple(k * c for c in v) for v in self.vertices))


def facets(p: LatticePolytope3) -> List[Facet]:
    """Supporting half-spaces a*x + b*y + c*z <= d, primitive, sorted."""
    vs = p.vertices
    found = set()
    for i, j, k in combinations(range(len(vs)), 3):
        n = _cross(_sub(vs[j], vs[i]), _sub(vs[k], vs[i]))
        if n == (0, 0, 0):
            continue
        d = _dot(n, vs[i])
        sides = {(_dot(n, v) > d) - (_dot(n, v) < d) for v in vs}
        sides.discard(0)
        if len(sides) == 2:
            continue
        if sides == {1}:
            n, d = (-n[0], -n[1], -n[2]), -d
        g = gcd(gcd(n[0], n[1]), gcd(n[2], d))
        found.add((n[0] // g, n[1] // g, n[2] // g, d // g))
    facet_list = sorted(found)
    for f in facet_list:
        on = [v for v in vs if _dot(f[:3], v) == f[3]]
        if not _affinely_spans_plane(on):
            raise DegeneratePolytopeError("degenerate facet")
    if len(facet_list) < 4:
        raise DegeneratePolytopeError("vertex set does not span 3-space")
    return facet_list


def _affinely_spans_plane(points) -> bool:
    for a, b, c in combinations(points, 3):
        if _cross(_sub(b, a), _sub(c, a)) != (0, 0, 0):
            return True
    return False


def facet_vertices(p: LatticePolytope3, f: Facet) -> List[Vec]:
    return [v for v in p.vertices if _dot(f[:3], v) == f[3]]


def lattice_points(p: LatticePolytope3, fs=None):
    """(interior, boundary) lattice points, enumerated over the bounding box."""
    fs = fs if fs is not None else facets(p)
    lo = [min(v[i] for v in p.vertices) for i in range(3)]
    hi = [max(v[i] for v in p.vertices) for i in range(3)]
    interior, boundary = [], []
    for pt in product(*(range(lo[i], hi[i] + 1) for i in range(3))):
        vals = [_dot(f[:3], pt) - f[3] for f in fs]
        if any(v > 0 for v in vals):
            continue
        (boundary if any(v == 0 for v in vals) else interior).append(pt)
    return interior, boundary


def check_reflexive_terminal(p: LatticePolytope3) -> dict:
    fs = facets(p)
    interior, boundary = lattice_points(p, fs)
    return {
        "(i)": all(isinstance(c, int) for v in p.vertices for c in v),
        "(ii)": interior == [(0, 0, 0)],
        "(iii)": sorted(boundary) == sorted(p.vertices),
    }


def check_fano(p: LatticePolytope3) -> bool:
    for f in facets(p):
        vs = facet_vertices(p, f)
        if len(vs) != 3 or abs(det3(*vs)) != 1:
            return False
    return True

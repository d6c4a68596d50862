from itertools import product

import pytest

from k3lab.data import load
from k3lab.polytope import (
    DegeneratePolytopeError,
    LatticePolytope3,
    check_fano,
    check_reflexive_terminal,
    facet_vertices,
    facets,
    lattice_points,
)

NAMES = ["P1", "P2", "P3", "P4", "P5"]


def polytope(name):
    return LatticePolytope3.from_columns(load("polytopes.json")[name])


def in_hull_by_barycentric(p, pt):
    """Oracle without facets: pt lies in some tetrahedron spanned by 4 vertices,
    decided by Cramer's rule on the barycentric system."""
    from itertools import combinations
    from fractions import Fraction

    def det(a, b, c):
        return (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
                + a[2] * (b[0] * c[1] - b[1] * c[0]))

    for quad in combinations(p.vertices, 4):
        v0 = quad[0]
        cols = [tuple(v[i] - v0[i] for i in range(3)) for v in quad[1:]]
        d = det(*cols)
        if d == 0:
            continue
        r = tuple(pt[i] - v0[i] for i in range(3))
        lam = [Fraction(det(*[r if k == j else cols[k] for k in range(3)]), d) for j in range(3)]
        if all(x >= 0 for x in lam) and sum(lam) <= 1:
            return True
    return False


def test_unit_simplex_has_four_facets():
    p = LatticePolytope3(((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)))
    assert len(facets(p)) == 4


def test_planar_vertex_set_is_rejected():
    with pytest.raises(DegeneratePolytopeError):
        facets(LatticePolytope3(((0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0))))


@pytest.mark.parametrize("name", NAMES)
def test_facets_are_primitive_with_distance_one(name):
    p = polytope(name)
    for f in facets(p):
        assert f[3] == 1
        assert len(facet_vertices(p, f)) >= 3
        assert all(f[0] * v[0] + f[1] * v[1] + f[2] * v[2] <= f[3] for v in p.vertices)


@pytest.mark.parametrize("name", NAMES)
def test_lattice_points_agree_with_barycentric_oracle(name):
    p = polytope(name)
    interior, boundary = lattice_points(p)
    box = [range(min(v[i] for v in p.vertices), max(v[i] for v in p.vertices) + 1) for i in range(3)]
    oracle = {pt for pt in product(*box) if in_hull_by_barycentric(p, pt)}
    assert oracle == set(interior) | set(boundary)
    fs = facets(p)
    for pt in boundary:
        assert any(f[0] * pt[0] + f[1] * pt[1] + f[2] * pt[2] == f[3] for f in fs)


@pytest.mark.parametrize("name", NAMES)
def test_reflexive_dilation_property(name):
    """For a reflexive polytope the interior lattice points of 2P are exactly the lattice points of P."""
    p = polytope(name)
    inner2, _ = lattice_points(p.scaled(2))
    i1, b1 = lattice_points(p)
    assert sorted(inner2) == sorted(i1 + b1)


@pytest.mark.parametrize("name", NAMES)
def test_conditions_hold(name):
    assert check_reflexive_terminal(polytope(name)) == {"(i)": True, "(ii)": True, "(iii)": True}


def test_scaled_octahedron_has_extra_interior_points():
    p = LatticePolytope3(((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1),
                          (1, 1, 1), (-1, -1, -1))).scaled(2)
    assert check_reflexive_terminal(p)["(ii)"] is False


def test_fano_exactly_on_listed_polytopes():
    assert [n for n in NAMES if check_fano(polytope(n))] == ["P2", "P3", "P4", "P5"]

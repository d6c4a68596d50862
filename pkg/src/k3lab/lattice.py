"""Integer lattices: Gram matrices built from fibre and section data, determinants,
signatures, congruence checks and Smith normal forms."""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .fibration import FiberType

Matrix = Tuple[Tuple[int, ...], ...]


class SingularMatrixError(ValueError):
    pass


class InconsistentConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class GramMatrix:
    rows: Matrix

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in r) for r in self.rows)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("Gram matrix must be square")
        if any(rows[i][j] != rows[j][i] for i in range(n) for j in range(i)):
            raise ValueError("Gram matrix must be symmetric")
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij):
        return self.rows[ij[0]][ij[1]]

    def permuted(self, order: Sequence[int]) -> "GramMatrix":
        """Matrix of the basis (e[order[0]], e[order[1]], ...)."""
        return GramMatrix(tuple(tuple(self.rows[i][j] for j in order) for i in order))


def matmul(a, b):
    bt = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(r, c)) for c in bt) for r in a)


def transpose(a):
    return tuple(tuple(r) for r in zip(*a))


def direct_sum(*blocks) -> Matrix:
    n = sum(len(b) for b in blocks)
    out = [[0] * n for _ in range(n)]
    k = 0
    for b in blocks:
        rows = b.rows if isinstance(b, GramMatrix) else b
        for i, r in enumerate(rows):
            for j, v in enumerate(r):
                out[k + i][k + j] = v
        k += len(rows)
    return tuple(tuple(r) for r in out)


def determinant(g) -> int:
    """Fraction-free (Bareiss) elimination with row pivoting."""
    rows = g.rows if isinstance(g, GramMatrix) else g
    a = [list(r) for r in rows]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def signature(g) -> Tuple[int, int]:
    """(positive, negative) inertia by exact symmetric elimination over Q."""
    rows = g.rows if isinstance(g, GramMatrix) else g
    a = [[Fraction(x) for x in r] for r in rows]
    n = len(a)
    pos = neg = 0
    for k in range(n):
        if a[k][k] == 0:
            piv = next((i for i in range(k + 1, n) if a[i][i] != 0), None)
            if piv is not None:
                _swap_sym(a, k, piv)
            else:
                j = next((j for j in range(k + 1, n) if a[k][j] != 0), None)
                if j is None:
                    raise SingularMatrixError("singular matrix")
                # e_k <- e_k + e_j makes the diagonal 2*a_kj (a_jj = 0 here)
                for c in range(n):
                    a[k][c] += a[j][c]
                for r in range(n):
                    a[r][k] += a[r][j]
        p = a[k][k]
        if p > 0:
            pos += 1
        else:
            neg += 1
        for i in range(k + 1, n):
            f = a[i][k] / p
            if f:
                for j in range(k, n):
                    a[i][j] -= f * a[k][j]
        for i in range(k + 1, n):
            a[k][i] = Fraction(0)
            a[i][k] = Fraction(0)
    return pos, neg


def _swap_sym(a, i, j):
    a[i], a[j] = a[j], a[i]
    for r in a:
        r[i], r[j] = r[j], r[i]


def verify_congruence(M, U, N) -> bool:
    m = M.rows if isinstance(M, GramMatrix) else M
    nn = N.rows if isinstance(N, GramMatrix) else N
    if not (len(m) == len(U) == len(nn)) or any(len(r) != len(m) for r in U):
        raise ValueError("dimension mismatch")
    if abs(determinant(U)) != 1:
        return False
    return matmul(matmul(transpose(U), m), U) == tuple(tuple(r) for r in nn)


def smith_normal_form(rows) -> List[int]:
    """Diagonal of the Smith normal form (non-negative, divisibility chain)."""
    a = [list(r) for r in rows]
    m, n = len(a), len(a[0]) if a else 0
    diag = []
    t = 0
    while t < min(m, n):
        nz = [(abs(a[i][j]), i, j) for i in range(t, m) for j in range(t, n) if a[i][j]]
        if not nz:
            break
        _, pi, pj = min(nz)
        a[t], a[pi] = a[pi], a[t]
        for r in a:
            r[t], r[pj] = r[pj], r[t]
        done = False
        while not done:
            done = True
            p = a[t][t]
            for i in range(t + 1, m):
                q = a[i][t] // p
                if q:
                    a[i] = [x - q * y for x, y in zip(a[i], a[t])]
                if a[i][t]:
                    done = False
            for j in range(t + 1, n):
                q = a[t][j] // p
                if q:
                    for r in a:
                        r[j] -= q * r[t]
                if a[t][j]:
                    done = False
            if not done:
                nz = [(abs(a[i][j]), i, j) for i in range(t, m) for j in range(t, n)
                      if a[i][j] and (i == t or j == t)]
                _, pi, pj = min(nz)
                a[t], a[pi] = a[pi], a[t]
                for r in a:
                    r[t], r[pj] = r[pj], r[t]
                continue
            # divisibility: fold a non-multiple into the pivot row
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                        if a[i][j] % p), None)
            if bad:
                a[t] = [x + y for x, y in zip(a[t], a[bad[0]])]
                done = False
        diag.append(abs(a[t][t]))
        t += 1
    return diag


def discriminant_group(g) -> List[int]:
    """Elementary divisors of a nondegenerate Gram matrix, units dropped."""
    rows = g.rows if isinstance(g, GramMatrix) else g
    if determinant(rows) == 0:
        raise SingularMatrixError("singular matrix")
    return [d for d in smith_normal_form(rows) if d != 1]


# --------------------------------------------------------------------------
# fibre lattices


def fiber_block(t: FiberType) -> Matrix:
    """Gram block of the non-identity components of a singular fibre.

    I_n: chain of n-1 components.  I*_n: D_{n+4}(-1) with nodes 1..m-2 in a
    chain and the two far tips m-1, m attached to node m-2; node 1 is the
    near tip (the identity component meets node 2).
    """
    if t.kind == "I":
        k = t.n - 1
        return tuple(tuple(-2 if i == j else (1 if abs(i - j) == 1 else 0) for j in range(k))
                     for i in range(k))
    if t.kind == "I*":
        m = t.n + 4
        out = [[0] * m for _ in range(m)]
        for i in range(m):
            out[i][i] = -2
        for i in range(m - 3):
            out[i][i + 1] = out[i + 1][i] = 1
        for tip in (m - 2, m - 1):
            out[tip][m - 3] = out[m - 3][tip] = 1
        return tuple(tuple(r) for r in out)
    raise NotImplementedError(f"fibre type {t} has no block rule here")


@dataclass(frozen=True)
class Section:
    name: str
    meets: Tuple[int, ...]  # per fibre: 1-based component index, 0 = identity component
    dot_O: int = 0
    dots: Tuple[Tuple[str, int], ...] = ()

    def dot(self, other: "Section") -> int:
        return dict(self.dots).get(other.name, dict(other.dots).get(self.name, 0))


@dataclass(frozen=True)
class FiberLatticeSpec:
    fibers: Tuple[FiberType, ...]
    sections: Tuple[Section, ...] = ()

    def labels(self) -> List[str]:
        out = []
        for k, f in enumerate(self.fibers):
            out += [f"F{k}.{i + 1}" for i in range(len(fiber_block(f)))]
        return out + ["O", "F"] + [s.name for s in self.sections]


def build_gram(spec: FiberLatticeSpec) -> GramMatrix:
    """Basis order: fibre components, O, F, sections."""
    blocks = [fiber_block(f) for f in spec.fibers]
    offsets, k = [], 0
    for b in blocks:
        offsets.append(k)
        k += len(b)
    base = direct_sum(*blocks, ((-2, 1), (1, 0)))
    n = len(base) + len(spec.sections)
    g = [list(r) + [0] * len(spec.sections) for r in base] + [[0] * n for _ in spec.sections]
    iO, iF = k, k + 1
    for si, s in enumerate(spec.sections):
        r = k + 2 + si
        if len(s.meets) != len(spec.fibers):
            raise ValueError(f"section {s.name} needs one component per fibre")
        g[r][r] = -2
        g[r][iO] = g[iO][r] = s.dot_O
        g[r][iF] = g[iF][r] = 1
        for fi, c in enumerate(s.meets):
            if c == 0:
                continue
            if not 1 <= c <= len(blocks[fi]):
                raise ValueError(f"invalid component index {c} for fibre {spec.fibers[fi]}")
            col = offsets[fi] + c - 1
            g[r][col] = g[col][r] = 1
        for sj, t in enumerate(spec.sections[:si]):
            v = s.dot(t)
            g[r][k + 2 + sj] = g[k + 2 + sj][r] = v
    return GramMatrix(tuple(tuple(x) for x in g))


def shioda_tate_rank(ns_rank: int, fibers: Sequence[FiberType]) -> int:
    r = ns_rank - 2 - sum(f.components() - 1 for f in fibers)
    if r < 0:
        raise InconsistentConfigurationError("inconsistent configuration")
    return r


def interpolate(points: Sequence[Tuple[int, int]]) -> List[Fraction]:
    """Coefficients (low to high) of the interpolating polynomial, trailing zeros trimmed."""
    n = len(points)
    coeffs = [Fraction(0)] * n
    for i, (xi, yi) in enumerate(points):
        basis = [Fraction(1)]
        denom = Fraction(1)
        for j, (xj, _) in enumerate(points):
            if j == i:
                continue
            basis = [Fraction(0)] + basis
            for t in range(len(basis) - 1):
                basis[t] -= xj * basis[t + 1]
            denom *= xi - xj
        for t in range(len(basis)):
            coeffs[t] += yi * basis[t] / denom
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


def tilde_determinant_scan(make_spec, ks: Sequence[int] = range(-3, 4)):
    """Determinants of make_spec(k) over ks and their interpolating polynomial in k."""
    vals = [(k, determinant(build_gram(make_spec(k)))) for k in ks]
    return vals, interpolate(vals)


# --------------------------------------------------------------------------
# the concrete configurations

I9, I10, I11 = FiberType("I", 9), FiberType("I", 10), FiberType("I", 11)
Is1, Is2, Is3 = FiberType("I*", 1), FiberType("I*", 2), FiberType("I*", 3)

SPECS = {
    "T1": FiberLatticeSpec((I9, Is3)),
    "L1": FiberLatticeSpec((I9, Is3), (Section("P", (3, 6)),)),
    "T2": FiberLatticeSpec((I11, Is1)),
    "L2": FiberLatticeSpec((I11, Is1), (Section("P", (4, 4)),)),
    "T3": FiberLatticeSpec((I10, Is2)),
    "L3'": FiberLatticeSpec((I10, Is2), (Section("P", (2, 5)),)),
}

# contradiction lattices: a hypothetical section R added to L_j
_R_CASES = {
    "L1~(a1)": ("L1", (1, 7), 0),
    "L1~(a4)": ("L1", (4, 7), 0),
    "L1~(a7)": ("L1", (7, 7), 0),
    # 3R = P in the component groups puts R on a5 of the I11 fibre (P is on a4)
    "L2~": ("L2", (5, 5), 0),
    "L3'~(RP=0)": ("L3'", (4, 5), 0),
    "L3'~(RP=1)": ("L3'", (4, 5), 1),
}


def contradiction_spec(name: str) -> FiberLatticeSpec:
    base, meets, rp = _R_CASES[name]
    spec = SPECS[base]
    r = Section("R", meets, 0, (("P", rp),))
    return FiberLatticeSpec(spec.fibers, spec.sections + (r,))


def torsion_spec(k: int) -> FiberLatticeSpec:
    """T1 plus a hypothetical 3-torsion section S0 meeting a3 and the identity
    component at infinity, with (S0.O) = k."""
    return FiberLatticeSpec((I9, Is3), (Section("S0", (3, 0), k),))


def contradiction_names() -> List[str]:
    return list(_R_CASES)

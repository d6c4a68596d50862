"""Rank-4 Pfaffian systems for the basis (1, Tl, Tm, Tl^2) of a theta-operator ideal."""

from dataclasses import dataclass
from fractions import Fraction
import re
from typing import Dict, List, Optional, Sequence, Tuple

from .exactcore import (
    MultiPoly,
    RatFunc,
    exact_divide,
    parse_poly,
    parse_ratfunc,
    NOT_DIVISIBLE,
)
from .data import load
from .period import (
    PRINTED_FORMULAS,
    BiPowerSeries,
    ThetaOperator,
    family_laurent_series,
    find_annihilators,
    recurrence_operators,
    signed_operator,
)

RING = ("l", "m")
BASIS = ((0, 0), (1, 0), (0, 1), (2, 0))
Mono = Tuple[int, int]


class ClosureError(ValueError):
    pass


class NotExpandableError(ValueError):
    pass


def _poly(c) -> MultiPoly:
    return MultiPoly.const(c, RING)


L = MultiPoly.var("l", RING)
M = MultiPoly.var("m", RING)


def operator_rows(op: ThetaOperator) -> Dict[Mono, MultiPoly]:
    """Theta-monomial -> polynomial coefficient in (l, m)."""
    out: Dict[Mono, MultiPoly] = {}
    for (a, b, p, q), c in op.terms.items():
        out[(p, q)] = out.get((p, q), MultiPoly.zero(RING)) + MultiPoly.monomial((a, b), c, RING)
    return {k: v for k, v in out.items() if not v.is_zero()}


def _order(row: Dict[Mono, MultiPoly]) -> int:
    return max(p + q for p, q in row)


def _theta_left(row: Dict[Mono, MultiPoly], var: int) -> Dict[Mono, MultiPoly]:
    """theta_var applied on the left: theta (f D) = (theta f) D + f theta D."""
    name = RING[var]
    out: Dict[Mono, MultiPoly] = {}
    for (p, q), f in row.items():
        up = (p + 1, q) if var == 0 else (p, q + 1)
        out[up] = out.get(up, MultiPoly.zero(RING)) + f
        df = f.theta(name)
        if not df.is_zero():
            out[(p, q)] = out.get((p, q), MultiPoly.zero(RING)) + df
    return {k: v for k, v in out.items() if not v.is_zero()}


def macaulay_rows(gens: Sequence[ThetaOperator], order: int) -> List[Dict[Mono, MultiPoly]]:
    rows = []
    frontier = [operator_rows(g) for g in gens]
    seen = set()
    while frontier:
        nxt = []
        for r in frontier:
            if not r or _order(r) > order:
                continue
            key = frozenset((k, v) for k, v in r.items())
            if key in seen:
                continue
            seen.add(key)
            rows.append(r)
            nxt.append(_theta_left(r, 0))
            nxt.append(_theta_left(r, 1))
        frontier = nxt
    return rows


def _monomials(order: int) -> List[Mono]:
    return [(p, d - p) for d in range(order + 1) for p in range(d, -1, -1)]


def _pick_pivot(a, rows_left, col):
    best = None
    for i in rows_left:
        e = a[i][col]
        if not e.is_zero():
            if best is None or len(e) < len(a[best][col]):
                best = i
    return best


def reduce_to_basis(gens: Sequence[ThetaOperator], targets: Sequence[Mono],
                    basis: Sequence[Mono] = BASIS):
    """Express each target theta-monomial modulo the left ideal as a combination
    of the basis, over Q(l, m), by fraction-free Gauss-Jordan elimination.

    Returns (denominator, {target: [numerator per basis element]}).
    """
    top = max(max(p + q for p, q in targets), max(p + q for p, q in basis))
    order = max(top, max(_order(operator_rows(g)) for g in gens))
    rows = macaulay_rows(gens, order)
    cols = _monomials(order)
    nonbasis = [c for c in sorted(cols, key=lambda c: (-(c[0] + c[1]), -c[0])) if c not in basis]
    colorder = nonbasis + list(basis)
    zero = MultiPoly.zero(RING)
    a = [[r.get(c, zero) for c in colorder] for r in rows]
    nb = len(nonbasis)
    prev = _poly(1)
    pivots: Dict[int, int] = {}
    free_rows = list(range(len(a)))
    for ci in range(nb):
        pi = _pick_pivot(a, free_rows, ci)
        if pi is None:
            continue
        free_rows.remove(pi)
        p = a[pi][ci]
        for i in range(len(a)):
            if i == pi:
                continue
            f = a[i][ci]
            new = []
            for j in range(len(colorder)):
                v = a[i][j] * p - f * a[pi][j]
                q = exact_divide(v, prev)
                if q is NOT_DIVISIBLE:
                    raise ArithmeticError("fraction-free elimination lost exactness")
                new.append(q)
            a[i] = new
        prev = p
        pivots[ci] = pi
    for i in free_rows:
        # a relation among basis elements alone means the basis is not independent
        if all(a[i][j].is_zero() for j in range(nb)) and any(not e.is_zero() for e in a[i][nb:]):
            raise ClosureError("degenerate system: basis elements are dependent modulo the ideal")
    det = prev
    out = {}
    for t in targets:
        if t in basis:
            out[t] = [det if b == t else zero for b in basis]
            continue
        ci = colorder.index(t)
        if ci not in pivots:
            raise ClosureError("basis does not close; extend generator set")
        row = a[pivots[ci]]
        scale = row[ci]
        # scale * t + sum row_b * b == 0  =>  t = -sum row_b / scale * b
        out[t] = (scale, [-row[nb + k] for k in range(len(basis))])
    # bring everything to the common denominator det
    result = {}
    for t, v in out.items():
        if isinstance(v, tuple):
            scale, nums = v
            if scale == det:
                result[t] = nums
            else:
                q = exact_divide(det, scale)
                if q is NOT_DIVISIBLE:
                    raise ArithmeticError("pivot does not divide the determinant")
                result[t] = [n * q for n in nums]
        else:
            result[t] = v
    return det, result


@dataclass(frozen=True)
class ConnectionMatrixPair:
    """Logarithmic connection: Tl phi = (A/dA) phi, Tm phi = (B/dB) phi."""

    A: Tuple[Tuple[MultiPoly, ...], ...]
    dA: MultiPoly
    B: Tuple[Tuple[MultiPoly, ...], ...]
    dB: MultiPoly

    def entry(self, which: str, i: int, j: int) -> RatFunc:
        num, den = (self.A, self.dA) if which == "A" else (self.B, self.dB)
        return RatFunc(num[i][j], den)

    def perturbed(self, which: str, i: int, j: int, c=1) -> "ConnectionMatrixPair":
        num, den = (self.A, self.dA) if which == "A" else (self.B, self.dB)
        rows = [list(r) for r in num]
        rows[i][j] = rows[i][j] + den * c
        rows = tuple(tuple(r) for r in rows)
        if which == "A":
            return ConnectionMatrixPair(rows, self.dA, self.B, self.dB)
        return ConnectionMatrixPair(self.A, self.dA, rows, self.dB)


def _basis_image(var: int, b: Mono) -> Mono:
    return (b[0] + 1, b[1]) if var == 0 else (b[0], b[1] + 1)


def derive_pfaffian(gens: Sequence[ThetaOperator], basis: Sequence[Mono] = BASIS,
                    factors: Sequence[MultiPoly] = ()) -> ConnectionMatrixPair:
    """Connection matrices of the ideal generated by gens; factors are extra
    candidates (besides l and m) for cancelling the common denominator."""
    mats = []
    for var in (0, 1):
        targets = [_basis_image(var, b) for b in basis]
        det, red = reduce_to_basis(gens, targets, basis)
        rows = tuple(tuple(red[t]) for t in targets)
        rows, det = _cancel_common(rows, det, factors)
        mats.append((rows, det))
    (A, dA), (B, dB) = mats
    c = ConnectionMatrixPair(A, dA, B, dB)
    for var, (num, den) in enumerate(mats):
        for i, b in enumerate(basis):
            img = _basis_image(var, b)
            if img in basis:
                k = list(basis).index(img)
                want = [den if j == k else MultiPoly.zero(RING) for j in range(len(basis))]
                if list(num[i]) != want:
                    raise AssertionError("structural unit row violated")
    return c


def _cancel_common(rows, det, factors=()):
    """Divide the common denominator and every numerator by shared candidate factors,
    then normalise the denominator to a primitive polynomial."""
    changed = True
    while changed:
        changed = False
        for f in (L, M) + tuple(factors):
            q = exact_divide(det, f)
            if q is NOT_DIVISIBLE:
                continue
            nums = [exact_divide(e, f) for r in rows for e in r]
            if any(n is NOT_DIVISIBLE for n in nums):
                continue
            it = iter(nums)
            rows = tuple(tuple(next(it) for _ in r) for r in rows)
            det = q
            changed = True
    c = det.content()
    sign = -1 if det.leading_term()[1] < 0 else 1
    k = c * sign
    rows = tuple(tuple(e / k for e in r) for r in rows)
    return rows, det / k


# --------------------------------------------------------------------------
# checks


@dataclass(frozen=True)
class Violation:
    i: int
    j: int
    residual: str


def verify_integrability(c: ConnectionMatrixPair) -> Optional[Violation]:
    """None when Tm A + A B == Tl B + B A holds as a rational-function identity.

    Cleared of denominators the identity reads
    (Tm(A) dA - A Tm(dA)) dB^2 + A B dA dB == (Tl(B) dB - B Tl(dB)) dA^2 + B A dA dB.
    """
    A, B, dA, dB = c.A, c.B, c.dA, c.dB
    n = len(A)
    tdA, tdB = dA.theta("m"), dB.theta("l")
    dA2, dB2, dAB = dA * dA, dB * dB, dA * dB
    for i in range(n):
        for j in range(n):
            lhs = (A[i][j].theta("m") * dA - A[i][j] * tdA) * dB2
            rhs = (B[i][j].theta("l") * dB - B[i][j] * tdB) * dA2
            ab = MultiPoly.zero(RING)
            ba = MultiPoly.zero(RING)
            for k in range(n):
                ab = ab + A[i][k] * B[k][j]
                ba = ba + B[i][k] * A[k][j]
            diff = lhs + ab * dAB - rhs - ba * dAB
            if not diff.is_zero():
                return Violation(i, j, str(diff.leading_term()))
    return None


def basis_series(series: BiPowerSeries, basis: Sequence[Mono] = BASIS) -> List[BiPowerSeries]:
    return [BiPowerSeries(series.N, {(n, m): v * n ** p * m ** q for (n, m), v in series.coeffs.items()},
                          series.V) for p, q in basis]


def _poly_times_series(p: MultiPoly, s: BiPowerSeries) -> BiPowerSeries:
    out: Dict[Tuple[int, int], Fraction] = {}
    for (a, b), c in p.terms.items():
        for (n, m), v in s.coeffs.items():
            if n + a + m + b <= s.N:
                k = (n + a, m + b)
                out[k] = out.get(k, 0) + c * v
    return BiPowerSeries(s.N, out, s.V - p.total_degree())


@dataclass(frozen=True)
class SeriesFailure:
    which: str
    row: int
    n: int
    m: int
    residual: Fraction


def verify_on_series(c: ConnectionMatrixPair, series: BiPowerSeries, mode: str = "residual",
                     basis: Sequence[Mono] = BASIS) -> Optional[SeriesFailure]:
    """Check Tl phi = A phi and Tm phi = B phi on the truncated series.

    mode="residual" compares d*Tl(phi) with (numerator matrix)*phi, which needs
    no expansion of denominators; mode="expand" insists on expandable entries.
    """
    phi = basis_series(series, basis)
    for which, num, den, var in (("A", c.A, c.dA, 0), ("B", c.B, c.dB, 1)):
        if mode == "expand" and den.constant_term() == 0:
            raise NotExpandableError("entry not expandable at origin")
        for i in range(len(basis)):
            img = _basis_image(var, basis[i])
            lhs = BiPowerSeries(series.N, {(n, m): v * n ** img[0] * m ** img[1]
                                           for (n, m), v in series.coeffs.items()}, series.V)
            acc = _poly_times_series(den, lhs)
            for j in range(len(basis)):
                if not num[i][j].is_zero():
                    acc = acc - _poly_times_series(num[i][j], phi[j])
            V = min(acc.V, series.V - max(den.total_degree(),
                                          max((e.total_degree() for e in num[i] if not e.is_zero()),
                                              default=0)))
            bad = sorted(k for k, v in acc.coeffs.items() if v and k[0] + k[1] <= V)
            if bad:
                n, m = bad[0]
                return SeriesFailure(which, i, n, m, acc[(n, m)])
    return None


def strip_factor(p: MultiPoly, f: MultiPoly) -> Tuple[MultiPoly, int]:
    k = 0
    while True:
        q = exact_divide(p, f)
        if q is NOT_DIVISIBLE or f.is_constant():
            return p, k
        p, k = q, k + 1


@dataclass(frozen=True)
class LocusReport:
    factors: Tuple[Tuple[str, int], ...]  # (name, multiplicity) of recognised factors
    leftover: MultiPoly

    def names(self) -> List[str]:
        return [n for n, k in self.factors if k]


def singular_locus(c: ConnectionMatrixPair, candidates: Dict[str, MultiPoly]) -> LocusReport:
    """Split the denominators into the candidate factors; the rest is the leftover."""
    total: Dict[str, int] = {}
    left = _poly(1)
    for den in (c.dA, c.dB):
        rest = den
        for name, f in candidates.items():
            rest, k = strip_factor(rest, f)
            total[name] = max(total.get(name, 0), k)
        if not rest.is_constant():
            left = left * rest
    return LocusReport(tuple(sorted(total.items())), left)


ALT_BASES = (BASIS, ((0, 0), (1, 0), (0, 1), (1, 1)), ((0, 0), (1, 0), (0, 1), (0, 2)))


def essential_locus(gens: Sequence[ThetaOperator], candidates: Dict[str, MultiPoly],
                    bases: Sequence[Sequence[Mono]] = ALT_BASES) -> List[str]:
    """Singular divisors of the system: l and m (the connection is logarithmic there)
    plus the denominator factors that persist for every basis in bases.  A factor
    that disappears under a change of basis is an apparent singularity."""
    extra = [f for k, f in candidates.items() if k not in ("l", "m")]
    common = None
    for basis in bases:
        rep = singular_locus(derive_pfaffian(gens, basis, extra), candidates)
        names = set(rep.names())
        if not rep.leftover.is_constant():
            names.add(str(rep.leftover.primitive()))
        common = names if common is None else common & names
    return sorted(common | {"l", "m"})


# --------------------------------------------------------------------------
# printed matrices


_SYMBOL = re.compile(r"\b([ab]\d\d|[ts][123]|r[23])\b")


@dataclass(frozen=True)
class EntryComparison:
    which: str
    i: int
    j: int
    status: str  # match | mismatch | undefined-in-paper | unparseable
    note: str = ""


def printed_entry(text: str, defs: Dict[str, str], t: str, s: Optional[str], undefined: Sequence[str],
                  label_map: Dict[str, str]):
    """Expand symbols in a printed cell; returns (RatFunc or None, status note)."""
    used = set()

    def expand(expr: str, depth=0) -> str:
        def rep(mt):
            sym = mt.group(1)
            used.add(sym)
            if sym in undefined:
                return sym
            if sym[0] == "t":
                return f"({t})"
            if sym[0] == "s":
                return f"({s})"
            key = label_map.get(sym, sym)
            if key not in defs:
                used.add("undefined:" + sym)
                return sym
            return f"({expand(defs[key], depth + 1)})"
        return _SYMBOL.sub(rep, expr)

    body = expand(text)
    if any(u in used for u in undefined):
        return None, "undefined-in-paper"
    if any(u.startswith("undefined:") for u in used):
        return None, "undefined-in-paper"
    note = ""
    bal = body.count("(") - body.count(")")
    if bal > 0:
        body = body + ")" * bal
        note = f"{bal} closing parenthesis appended"
    try:
        return parse_ratfunc(body, RING), note
    except ValueError as exc:
        return None, f"unparseable: {exc}"


def compare_with_printed(c: ConnectionMatrixPair, fixture: dict) -> Tuple[str, List[EntryComparison]]:
    """Entrywise comparison in the logarithmic convention and in the d-lambda
    convention (A_printed = A/l, B_printed = B/m); the better one is reported."""
    defs = fixture["defs"]
    undefined = fixture.get("undefined_symbols", [])
    label_map = fixture.get("label_map", {})
    t, s = fixture.get("t"), fixture.get("s")
    results = {}
    for conv in ("logarithmic", "dlambda"):
        rows = []
        for which, mat in (("A", fixture["A"]), ("B", fixture["B"])):
            for i in range(4):
                for j in range(4):
                    val, note = printed_entry(mat[i][j], defs, t, s, undefined, label_map)
                    if val is None:
                        status = "undefined-in-paper" if note == "undefined-in-paper" else "unparseable"
                        rows.append(EntryComparison(which, i, j, status, note))
                        continue
                    mine = c.entry(which, i, j)
                    if conv == "dlambda":
                        mine = mine / RatFunc(L if which == "A" else M)
                    status = "match" if mine == val else "mismatch"
                    rows.append(EntryComparison(which, i, j, status, note))
        results[conv] = rows
    best = max(results, key=lambda k: sum(r.status == "match" for r in results[k]))
    return best, results[best]


# --------------------------------------------------------------------------
# generator sets per family


def family_candidates(fixture: dict) -> Dict[str, MultiPoly]:
    out = {"l": L, "m": M, "t": parse_poly(fixture["t"], RING)}
    if fixture.get("s"):
        out["s"] = parse_poly(fixture["s"], RING)
    return out


def family_generators(family: str, source: str, N: int = 14) -> List[ThetaOperator]:
    """Generators for the ideal of a family.

    source: "derived"  recurrence pair (family 1), printed pair (family 2),
                       searched second-order operator plus printed L3 (family 3);
            "search"   all annihilators of theta-degree 2 and coefficient-degree 2.
    The series used is the constant-term expansion of 1/(F/(xyz)).
    """
    family = str(family)
    if source == "search":
        return find_annihilators(family_laurent_series(family, N), 2, 2)
    ops = load("operators.json")[family]
    if family == "1":
        return [signed_operator(o, -1, -1) for o in recurrence_operators(PRINTED_FORMULAS[1])]
    if family == "2":
        return [ThetaOperator.parse(ops["L1_thm"]), ThetaOperator.parse(ops["L3_thm"])]
    if family == "3":
        first = find_annihilators(family_laurent_series(family, N), 2, 1)[0]
        return [first, ThetaOperator.parse(ops["L3_thm"])]
    raise KeyError(family)


def family_pfaffian(family: str, source: str = "derived") -> ConnectionMatrixPair:
    cand = family_candidates(load("pfaffians.json")[str(family)])
    return derive_pfaffian(family_generators(family, source),
                           factors=[f for k, f in cand.items() if k not in ("l", "m")])


def same_pair(a: ConnectionMatrixPair, b: ConnectionMatrixPair) -> bool:
    return all(a.entry(w, i, j) == b.entry(w, i, j) for w in "AB" for i in range(4) for j in range(4))

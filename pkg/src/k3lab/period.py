"""Period power series, theta operators and annihilator discovery."""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import comb, factorial
import re
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .exactcore import MultiPoly, parse_poly

Index = Tuple[int, int]


# --------------------------------------------------------------------------
# truncated bivariate series


@dataclass(frozen=True)
class BiPowerSeries:
    """Coefficients c(n, m) of l^n m^m for n + m <= N; reliable only up to V."""

    N: int
    coeffs: Mapping[Index, Fraction]
    V: Optional[int] = None

    def __post_init__(self):
        clean = {k: Fraction(v) for k, v in self.coeffs.items() if v and k[0] + k[1] <= self.N}
        object.__setattr__(self, "coeffs", clean)
        if self.V is None:
            object.__setattr__(self, "V", self.N)

    def __getitem__(self, nm: Index) -> Fraction:
        return self.coeffs.get(nm, Fraction(0))

    def indices(self, upto: Optional[int] = None):
        top = self.N if upto is None else upto
        for d in range(top + 1):
            for n in range(d + 1):
                yield (n, d - n)

    def __add__(self, other: "BiPowerSeries") -> "BiPowerSeries":
        N = min(self.N, other.N)
        out = {k: self[k] + other[k] for k in self.indices(N)}
        return BiPowerSeries(N, out, min(self.V, other.V))

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "BiPowerSeries":
        return BiPowerSeries(self.N, {k: v * c for k, v in self.coeffs.items()}, self.V)

    def __mul__(self, other: "BiPowerSeries") -> "BiPowerSeries":
        N = min(self.N, other.N)
        out: Dict[Index, Fraction] = {}
        for (a, b), u in self.coeffs.items():
            for (c, d), v in other.coeffs.items():
                if a + b + c + d <= N:
                    k = (a + c, b + d)
                    out[k] = out.get(k, 0) + u * v
        return BiPowerSeries(N, out, min(self.V, other.V))

    def swap(self) -> "BiPowerSeries":
        return BiPowerSeries(self.N, {(m, n): v for (n, m), v in self.coeffs.items()}, self.V)

    def substitute_signs(self, sl: int, sm: int) -> "BiPowerSeries":
        """Series in (sl*l, sm*m)."""
        return BiPowerSeries(self.N, {(n, m): v * sl ** n * sm ** m for (n, m), v in self.coeffs.items()},
                             self.V)

    def is_zero_to_validity(self) -> bool:
        return all(v == 0 for k, v in self.coeffs.items() if k[0] + k[1] <= self.V)

    def truncate(self, N: int) -> "BiPowerSeries":
        return BiPowerSeries(N, self.coeffs, min(self.V, N))

    @classmethod
    def one(cls, N: int) -> "BiPowerSeries":
        return cls(N, {(0, 0): 1})

    @classmethod
    def monomial(cls, N: int, n: int, m: int, c=1) -> "BiPowerSeries":
        return cls(N, {(n, m): c})


# --------------------------------------------------------------------------
# period coefficients


@dataclass(frozen=True)
class FactorialFormula:
    """sign_n^n * sign_m^m * prod (alpha n + beta m)!^e."""

    factors: Tuple[Tuple[int, int, int], ...]
    sign_n: int = 1
    sign_m: int = 1

    def coefficient(self, n: int, m: int) -> Fraction:
        c = Fraction(self.sign_n ** n * self.sign_m ** m)
        for a, b, e in self.factors:
            f = factorial(a * n + b * m)
            c = c * f if e > 0 else c / f
            for _ in range(abs(e) - 1):
                c = c * f if e > 0 else c / f
        return c

    def ratio(self, var: str) -> "Ratio":
        """c(n+1, m)/c(n, m) (var = "n") or c(n, m+1)/c(n, m) as factored linear forms."""
        ring = ("n", "m")
        n, m = MultiPoly.var("n", ring), MultiPoly.var("m", ring)
        num, den = [], []
        const = Fraction(self.sign_n if var == "n" else self.sign_m)
        for a, b, e in self.factors:
            step = a if var == "n" else b
            base = n * a + m * b
            for k in range(1, step + 1):
                lin = base + k
                (num if e > 0 else den).extend([lin] * abs(e))
        return Ratio(const, tuple(num), tuple(den)).cancelled()


PRINTED_FORMULAS = {
    1: FactorialFormula(((3, 3, 1), (1, 0, -2), (0, 1, -2), (1, 1, -1))),
    2: FactorialFormula(((3, 4, 1), (0, 1, -2), (1, 0, -1), (1, 1, -2)), sign_n=-1),
    3: FactorialFormula(((2, 3, 1), (0, 1, -2), (1, 0, -3)), sign_n=-1),
}


def period_series(family: int, N: int) -> BiPowerSeries:
    """Printed factorial formulas with the (2 pi i)^2 prefactor dropped."""
    f = PRINTED_FORMULAS[int(family)]
    return BiPowerSeries(N, {(n, m): f.coefficient(n, m)
                             for n in range(N + 1) for m in range(N + 1 - n)})


def laurent_exponents(surface: MultiPoly) -> Tuple[List, Dict[str, Tuple[int, int, int]]]:
    """Split F/(xyz) into parameter-free monomials and the l-, m-monomials."""
    ring = surface.ring
    ix = [ring.index(v) for v in ("x", "y", "z")]
    il, im = ring.index("l"), ring.index("m")
    free, param = [], {}
    for e, c in surface.terms.items():
        if c != 1:
            raise ValueError("constant-term expansion expects unit coefficients")
        shift = tuple(e[i] - 1 for i in ix)
        if e[il] == 0 and e[im] == 0:
            free.append(shift)
        elif e[il] == 1 and e[im] == 0:
            param["l"] = shift
        elif e[im] == 1 and e[il] == 0:
            param["m"] = shift
        else:
            raise ValueError("unexpected parameter monomial")
    return free, param


def laurent_period_series(surface: MultiPoly, N: int) -> BiPowerSeries:
    """Constant term of 1/(F/(xyz)) expanded in powers of the non-constant part.

    Each term of (F/(xyz) - 1)^k that is free of x, y, z contributes with sign
    (-1)^k; the multiplicities are multinomial coefficients.  This is computed
    from the surface equation alone and serves as an independent series.
    """
    free, param = laurent_exponents(surface)
    if (0, 0, 0) not in free:
        raise ValueError("F/(xyz) needs a constant term")
    units = [v for v in free if v != (0, 0, 0)]
    if sorted(units) != sorted([(1, 0, 0), (0, 1, 0), (0, 0, 1)]):
        raise ValueError("expected the monomials x, y, z next to the constant")
    vl, vm = param["l"], param["m"]
    out = {}
    for n in range(N + 1):
        for m in range(N + 1 - n):
            alpha = [-(n * vl[i] + m * vm[i]) for i in range(3)]
            if min(alpha) < 0:
                continue
            k = sum(alpha) + n + m
            mult = factorial(k)
            for a in alpha + [n, m]:
                mult //= factorial(a)
            out[(n, m)] = Fraction((-1) ** k * mult)
    return BiPowerSeries(N, out)


# --------------------------------------------------------------------------
# theta operators


def _ff_expand(p: int, c: int) -> Dict[int, int]:
    """(T + c)^p as {power: coefficient}."""
    return {i: comb(p, i) * c ** (p - i) for i in range(p + 1)}


class ThetaOperator:
    """Sum of coeff * l^a m^b Tl^p Tm^q with every theta right of the monomial."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Mapping[Tuple[int, int, int, int], Fraction]] = None):
        self.terms = {k: Fraction(v) for k, v in (terms or {}).items() if v}

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def const(cls, c):
        return cls({(0, 0, 0, 0): c})

    @classmethod
    def parse(cls, text: str) -> "ThetaOperator":
        return _OpParser(text).parse()

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        other = _as_op(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return ThetaOperator(out)

    __radd__ = __add__

    def __neg__(self):
        return ThetaOperator({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-_as_op(other))

    def __rsub__(self, other):
        return _as_op(other) - self

    def scale(self, c):
        return ThetaOperator({k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        """Composition: (self o other), normalised by T_l l^c = l^c (T_l + c)."""
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        out: Dict[Tuple[int, int, int, int], Fraction] = {}
        for (a, b, p, q), u in self.terms.items():
            for (c, d, r, s), v in other.terms.items():
                ep = _ff_expand(p, c)
                eq = _ff_expand(q, d)
                for i, x in ep.items():
                    for j, y in eq.items():
                        k = (a + c, b + d, i + r, j + s)
                        out[k] = out.get(k, 0) + u * v * x * y
        return ThetaOperator(out)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int):
        out = ThetaOperator.const(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        return isinstance(other, ThetaOperator) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def theta_degree(self) -> int:
        return max((p + q for _, _, p, q in self.terms), default=0)

    def max_shift(self) -> int:
        return max((a + b for a, b, _, _ in self.terms), default=0)

    def coefficient_degree(self) -> int:
        return self.max_shift()

    def symbol_at(self, n: int, m: int) -> Dict[Index, Fraction]:
        """Recurrence row: coefficient of c(n - a, m - b) in (op eta)(n, m)."""
        out: Dict[Index, Fraction] = {}
        for (a, b, p, q), c in self.terms.items():
            k = (n - a, m - b)
            if k[0] < 0 or k[1] < 0:
                continue
            out[k] = out.get(k, 0) + c * k[0] ** p * k[1] ** q
        return out

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: (kv[0][0] + kv[0][1], kv[0]), reverse=False)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for (a, b, p, q), c in self.sorted_terms():
            fac = []
            for name, k in (("l", a), ("m", b), ("Tl", p), ("Tm", q)):
                if k == 1:
                    fac.append(name)
                elif k:
                    fac.append(f"{name}^{k}")
            body = " ".join(fac)
            parts.append(f"{c} * {body}" if body else f"{c}")
        return " + ".join(parts).replace("+ -", "- ")

    __repr__ = __str__


def _as_op(x):
    if isinstance(x, ThetaOperator):
        return x
    return ThetaOperator.const(x)


_OP_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|(Tl|Tm|l|m)|([-+*^()]))")


class _OpParser:
    def __init__(self, text: str):
        self.toks = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            mt = _OP_TOKEN.match(text, pos)
            if not mt or mt.end() == pos:
                if text[pos:].strip() == "":
                    break
                raise ValueError(f"cannot parse operator near {text[pos:pos + 15]!r}")
            pos = mt.end()
            if mt.group(1):
                self.toks.append(("num", Fraction(mt.group(1))))
            elif mt.group(2):
                self.toks.append(("var", mt.group(2)))
            else:
                self.toks.append(("op", mt.group(3)))
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def parse(self) -> ThetaOperator:
        r = self.expr()
        if self.i != len(self.toks):
            raise ValueError("trailing tokens in operator")
        return r

    def expr(self):
        sign = 1
        if self.peek() == ("op", "-"):
            self.take()
            sign = -1
        elif self.peek() == ("op", "+"):
            self.take()
        acc = self.term().scale(sign)
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self):
        acc = self.power()
        while True:
            t = self.peek()
            if t == ("op", "*"):
                self.take()
                acc = acc * self.power()
            elif t[0] in ("num", "var") or t == ("op", "("):
                acc = acc * self.power()
            else:
                return acc

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, k = self.take()
            if kind != "num" or k.denominator != 1:
                raise ValueError("operator exponents must be non-negative integers")
            return base ** int(k)
        return base

    def atom(self):
        kind, v = self.take()
        if kind == "num":
            return ThetaOperator.const(v)
        if kind == "var":
            key = {"l": (1, 0, 0, 0), "m": (0, 1, 0, 0), "Tl": (0, 0, 1, 0), "Tm": (0, 0, 0, 1)}[v]
            return ThetaOperator({key: 1})
        if (kind, v) == ("op", "("):
            r = self.expr()
            if self.take() != ("op", ")"):
                raise ValueError("unbalanced parentheses in operator")
            return r
        raise ValueError(f"unexpected token {v!r} in operator")


def apply_operator(op: ThetaOperator, s: BiPowerSeries) -> BiPowerSeries:
    out: Dict[Index, Fraction] = {}
    for (a, b, p, q), c in op.terms.items():
        for (n, m), v in s.coeffs.items():
            if n + a + m + b <= s.N:
                k = (n + a, m + b)
                out[k] = out.get(k, 0) + c * v * n ** p * m ** q
    return BiPowerSeries(s.N, out, s.V - op.max_shift())


@dataclass(frozen=True)
class AnnihilationReport:
    passed: bool
    first_failure: Optional[Tuple[int, int, Fraction]] = None

    def __str__(self):
        if self.passed:
            return "pass"
        n, m, r = self.first_failure
        return f"first failure at (n={n}, m={m}): residual {r}"


def annihilation_report(op: ThetaOperator, series: BiPowerSeries) -> AnnihilationReport:
    res = apply_operator(op, series)
    bad = sorted(k for k, v in res.coeffs.items() if v and k[0] + k[1] <= res.V)
    if not bad:
        return AnnihilationReport(True)
    n, m = bad[0]
    return AnnihilationReport(False, (n, m, res[(n, m)]))


# --------------------------------------------------------------------------
# operators from recurrences


@dataclass(frozen=True)
class Ratio:
    """const * prod(num) / prod(den), factors linear in (n, m)."""

    const: Fraction
    num: Tuple[MultiPoly, ...]
    den: Tuple[MultiPoly, ...]

    def cancelled(self) -> "Ratio":
        num = list(self.num)
        den = list(self.den)
        const = Fraction(self.const)
        changed = True
        while changed:
            changed = False
            for i, a in enumerate(num):
                for j, b in enumerate(den):
                    c = _prop(a, b)
                    if c is not None:
                        const *= c
                        del num[i]
                        del den[j]
                        changed = True
                        break
                if changed:
                    break
        return Ratio(const, tuple(num), tuple(den))

    def value(self, n: int, m: int) -> Fraction:
        v = Fraction(self.const)
        for f in self.num:
            v *= f.value({"n": n, "m": m})
        for f in self.den:
            d = f.value({"n": n, "m": m})
            if d == 0:
                raise ZeroDivisionError("ratio denominator vanishes")
            v /= d
        return v


def _prop(a: MultiPoly, b: MultiPoly) -> Optional[Fraction]:
    from .exactcore import proportional

    return proportional(a, b)


def _theta_poly(factors: Sequence[MultiPoly], shift_n: int) -> ThetaOperator:
    """prod f(Tl + shift_n, Tm) for linear f(n, m)."""
    out = ThetaOperator.const(1)
    for f in factors:
        op = ThetaOperator.zero()
        for (en, em), c in f.terms.items():
            if en + em == 0:
                op = op + ThetaOperator.const(c)
            elif en == 1:
                op = op + ThetaOperator({(0, 0, 1, 0): c}) + ThetaOperator.const(c * shift_n)
            elif em == 1:
                op = op + ThetaOperator({(0, 0, 0, 1): c})
            else:
                raise ValueError("recurrence factors must be linear")
        out = out * op
    return out


def _swap_vars(f: MultiPoly) -> MultiPoly:
    return MultiPoly(f.ring, {(e[1], e[0]): c for e, c in f.terms.items()})


def operator_from_recurrence(ratio_l: Ratio, ratio_m: Ratio) -> Tuple[ThetaOperator, ThetaOperator]:
    """From c(n+1,m)/c(n,m) = P/Q build Q(Tl - 1, Tm) - l*P(Tl, Tm); same for m."""
    def build(r: Ratio, var: str):
        if var == "n":
            q = _theta_poly(r.den, -1)
            p = _theta_poly(r.num, 0).scale(r.const)
            return q - ThetaOperator({(1, 0, 0, 0): 1}) * p
        # swap roles of n and m, build, then swap the operator back
        sw = Ratio(r.const, tuple(_swap_vars(f) for f in r.num), tuple(_swap_vars(f) for f in r.den))
        op = build(sw, "n")
        return ThetaOperator({(b, a, q_, p_): c for (a, b, p_, q_), c in op.terms.items()})

    for r in (ratio_l, ratio_m):
        for f in r.den:
            for n in range(0, 3):
                for m in range(0, 3):
                    if f.value({"n": n, "m": m}) == 0:
                        raise ZeroDivisionError("ratio denominator vanishes at a relevant index")
    return build(ratio_l, "n"), build(ratio_m, "m")


def recurrence_operators(formula: FactorialFormula) -> Tuple[ThetaOperator, ThetaOperator]:
    return operator_from_recurrence(formula.ratio("n"), formula.ratio("m"))


# --------------------------------------------------------------------------
# exact linear algebra and annihilator search


def rref(rows: List[List[Fraction]], ncols: int):
    """Reduced row echelon form; returns (rows, pivot columns)."""
    a = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a[:r], pivots


def nullspace(rows: List[List[Fraction]], ncols: int) -> List[List[Fraction]]:
    red, piv = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, p in enumerate(piv):
            v[p] = -red[i][f]
        basis.append(v)
    return basis


def operator_monomials(theta_deg: int, coeff_deg: int):
    out = []
    for a, b in product(range(coeff_deg + 1), repeat=2):
        if a + b > coeff_deg:
            continue
        for p, q in product(range(theta_deg + 1), repeat=2):
            if p + q <= theta_deg:
                out.append((a, b, p, q))
    return sorted(out, key=lambda k: (k[0] + k[1], k[0], k[2] + k[3], k[2]))


def find_annihilators(series: BiPowerSeries, theta_deg: int, coeff_deg: int) -> List[ThetaOperator]:
    """Basis of annihilating operators of bounded theta- and coefficient-degree."""
    mons = operator_monomials(theta_deg, coeff_deg)
    V = series.V - coeff_deg
    rows = []
    for n, m in series.indices(V):
        row = []
        for a, b, p, q in mons:
            k = (n - a, m - b)
            if k[0] < 0 or k[1] < 0:
                row.append(Fraction(0))
            else:
                row.append(series[k] * k[0] ** p * k[1] ** q)
        if any(row):
            rows.append(row)
    basis = nullspace(rows, len(mons))
    return [_normalise(ThetaOperator(dict(zip(mons, v)))) for v in basis]


def _normalise(op: ThetaOperator) -> ThetaOperator:
    if op.is_zero():
        return op
    lead = op.sorted_terms()[0][1]
    return op.scale(1 / lead)


def in_span(op: ThetaOperator, basis: Sequence[ThetaOperator]) -> bool:
    """Exact span membership of op in the linear span of basis."""
    keys = sorted(set(op.terms).union(*(b.terms for b in basis)))
    if not basis:
        return op.is_zero()
    cols = [[b.terms.get(k, Fraction(0)) for k in keys] for b in basis]
    rank = len(rref(cols, len(keys))[1])
    cols.append([op.terms.get(k, Fraction(0)) for k in keys])
    return len(rref(cols, len(keys))[1]) == rank


def proportional_ops(a: ThetaOperator, b: ThetaOperator) -> Optional[Fraction]:
    if a.terms.keys() != b.terms.keys() or a.is_zero():
        return None
    k = next(iter(a.terms))
    c = a.terms[k] / b.terms[k]
    return c if all(a.terms[x] == c * b.terms[x] for x in a.terms) else None


# --------------------------------------------------------------------------
# Appell F4 factorisation of the first family


def gauss_series_1d(a: Fraction, b: Fraction, c: Fraction, N: int) -> List[Fraction]:
    """Coefficients of F(a, b; c; x) up to x^N from the term ratio."""
    out = [Fraction(1)]
    for k in range(N):
        out.append(out[-1] * (a + k) * (b + k) / ((c + k) * (1 + k)))
    return out


def compose_univariate(coeffs: Sequence[Fraction], x: BiPowerSeries) -> BiPowerSeries:
    if x[(0, 0)] != 0:
        raise ValueError("inner series must vanish at the origin")
    N = x.N
    total = BiPowerSeries(N, {})
    power = BiPowerSeries.one(N)
    for k, c in enumerate(coeffs):
        if k > N:
            break
        total = total + power.scale(c)
        power = power * x
    return total


def geometric(y: BiPowerSeries) -> BiPowerSeries:
    """1/(1 - y) for y vanishing at the origin."""
    return compose_univariate([Fraction(1)] * (y.N + 1), y)


class IterationError(RuntimeError):
    pass


def f4_variables(N: int) -> Tuple[BiPowerSeries, BiPowerSeries]:
    """Solve x(1 - y) = 27 l, y(1 - x) = 27 m by fixed-point iteration."""
    L = BiPowerSeries.monomial(N, 1, 0, 27)
    M = BiPowerSeries.monomial(N, 0, 1, 27)
    x, y = L, M
    for _ in range(N + 2):
        nx = L * geometric(y)
        ny = M * geometric(x)
        if nx.coeffs == x.coeffs and ny.coeffs == y.coeffs:
            return x, y
        x, y = nx, ny
    raise IterationError("fixed-point iteration did not stabilise")


def f4_factorization_check(N: int, eta: Optional[BiPowerSeries] = None) -> AnnihilationReport:
    """Compare F(1/3,2/3;1;x) F(1/3,2/3;1;y) with eta_1 up to total degree N."""
    x, y = f4_variables(N)
    g = gauss_series_1d(Fraction(1, 3), Fraction(2, 3), Fraction(1), N)
    prod_ = compose_univariate(g, x) * compose_univariate(g, y)
    eta = eta if eta is not None else period_series(1, N)
    for n, m in sorted(prod_.indices(N)):
        d = prod_[(n, m)] - eta[(n, m)]
        if d:
            return AnnihilationReport(False, (n, m, d))
    return AnnihilationReport(True)


def signed_operator(op: ThetaOperator, sl: int, sm: int) -> ThetaOperator:
    """The operator after l -> sl*l, m -> sm*m (theta is unchanged)."""
    return ThetaOperator({(a, b, p, q): c * sl ** a * sm ** b for (a, b, p, q), c in op.terms.items()})


def family_laurent_series(family, N: int) -> BiPowerSeries:
    from .fibration import load_family

    return laurent_period_series(load_family(str(family)).surface.poly, N)

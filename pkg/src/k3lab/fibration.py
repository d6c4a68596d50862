"""Elliptic fibrations of the three surface families.

Birational maps to Weierstrass models, Kodaira normal forms, discriminants and
the classification of singular fibres from vanishing orders.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import inf
from typing import Dict, List, Mapping, Optional, Tuple

from .exactcore import (
    MultiPoly,
    RatFunc,
    ZeroDenominatorError,
    divide_remainder,
    exact_divide,
    format_poly,
    is_squarefree_univariate,
    parse_poly,
    parse_ratfunc,
    proportional,
    substitute,
    union_ring,
    NOT_DIVISIBLE,
)

PARAMS = ("l", "m")
SURFACE_RING = ("x", "y", "z") + PARAMS


class DegenerateCubicError(ValueError):
    pass


class FiberClassificationError(ValueError):
    pass


class SampleOutsideLambdaError(ValueError):
    pass


# --------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class SurfaceEquation:
    family: str
    poly: MultiPoly

    @classmethod
    def parse(cls, family: str, text: str) -> "SurfaceEquation":
        return cls(family, parse_poly(text, SURFACE_RING))


@dataclass(frozen=True)
class WeierstrassForm:
    """square^2 = cubic^3 + a2*cubic^2 + a1*cubic + a0 with a_i in (t, l, m)."""

    t: str
    a2: MultiPoly
    a1: MultiPoly
    a0: MultiPoly
    cubic_var: str = "y"
    square_var: str = "z"

    @classmethod
    def parse(cls, t, a2, a1, a0, cubic_var="y", square_var="z") -> "WeierstrassForm":
        ring = (t,) + PARAMS
        return cls(t, parse_poly(a2, ring), parse_poly(a1, ring), parse_poly(a0, ring),
                   cubic_var, square_var)

    def equation(self, ring) -> MultiPoly:
        """square^2 - (cubic part) as a polynomial in the given chart ring."""
        y = MultiPoly.var(self.cubic_var, ring)
        z = MultiPoly.var(self.square_var, ring)
        a2, a1, a0 = (a.to_ring(ring) for a in (self.a2, self.a1, self.a0))
        return z * z - (y ** 3 + a2 * y * y + a1 * y + a0)


@dataclass(frozen=True)
class KodairaNormalForm:
    """z^2 = y^3 - g2(t) y - g3(t)."""

    t: str
    g2: MultiPoly
    g3: MultiPoly
    chart: str = "finite"


@dataclass(frozen=True, order=True)
class FiberType:
    kind: str
    n: int = 0

    def __post_init__(self):
        if self.kind not in {"smooth", "I", "I*", "II", "III", "IV", "II*", "III*", "IV*"}:
            raise ValueError(f"unknown fibre kind {self.kind}")

    @classmethod
    def parse(cls, text: str) -> "FiberType":
        text = text.strip()
        if text == "smooth":
            return cls("smooth")
        if text in {"II", "III", "IV", "II*", "III*", "IV*"}:
            return cls(text)
        if text.startswith("I*"):
            return cls("I*", int(text[2:]))
        if text.startswith("I") and text[1:].isdigit():
            return cls("I", int(text[1:]))
        raise ValueError(f"unknown fibre type {text!r}")

    def euler(self) -> int:
        if self.kind == "I":
            return self.n
        if self.kind == "I*":
            return self.n + 6
        return {"smooth": 0, "II": 2, "III": 3, "IV": 4, "IV*": 8, "III*": 9, "II*": 10}[self.kind]

    def components(self) -> int:
        """Number m_v of irreducible components of the fibre."""
        if self.kind == "I":
            return max(self.n, 1)
        if self.kind == "I*":
            return self.n + 5
        return {"smooth": 1, "II": 1, "III": 2, "IV": 3, "IV*": 7, "III*": 8, "II*": 9}[self.kind]

    def __str__(self):
        if self.kind in ("I", "I*"):
            return f"{self.kind}{self.n}"
        return self.kind


@dataclass(frozen=True)
class FiberConfiguration:
    """Entries (location, type, count); location is "0", "infinity" or "residual"."""

    entries: Tuple[Tuple[str, FiberType, int], ...]
    orders: Dict[str, Tuple] = field(default_factory=dict, compare=False)

    def euler_sum(self) -> int:
        return sum(t.euler() * k for _, t, k in self.entries)

    def at(self, location: str) -> Optional[FiberType]:
        for loc, t, _ in self.entries:
            if loc == location:
                return t
        return None

    def count(self, location: str) -> int:
        return sum(k for loc, _, k in self.entries if loc == location)

    def __str__(self):
        parts = []
        for _, t, k in self.entries:
            parts.append(f"{k}{t}" if k > 1 else str(t))
        return "+".join(parts)


# --------------------------------------------------------------------------
# operations


@dataclass(frozen=True)
class BirationalResult:
    passed: bool
    witness: Optional[str] = None
    cofactor: Optional[MultiPoly] = None


def verify_birational(F: SurfaceEquation, phi: Mapping[str, RatFunc], target: MultiPoly) -> BirationalResult:
    """Check that F o phi vanishes on the target model.

    The numerator of the composite, with monomial factors cleared, must be an
    exact multiple of the target polynomial.  On failure the leading term of the
    division remainder is the witness.
    """
    ring = target.ring
    full = {}
    for v in ("x", "y", "z"):
        img = phi.get(v)
        if img is None:
            img = RatFunc(MultiPoly.var(v, ring))
        full[v] = img.to_ring(ring)
    comp = substitute(F.poly, full)
    num = comp.num
    if num.is_zero():
        return BirationalResult(False, "composite vanishes identically")
    num = num.divide_monomial(num.monomial_content())
    q = exact_divide(num, target)
    if q is not NOT_DIVISIBLE:
        return BirationalResult(True, None, q)
    _, r = divide_remainder(num, target)
    e, c = r.leading_term()
    return BirationalResult(False, format_poly(MultiPoly(ring, {e: c})))


def depress_cubic(w: WeierstrassForm) -> KodairaNormalForm:
    """Complete the cube with cubic -> cubic - a2/3."""
    a2, a1, a0 = w.a2, w.a1, w.a0
    g2 = a2 * a2 / 3 - a1
    g3 = a1 * a2 / 3 - (a2 ** 3) * Fraction(2, 27) - a0
    return KodairaNormalForm(w.t, g2, g3, "finite")


def integral_rescaling(k: KodairaNormalForm) -> Tuple[int, KodairaNormalForm]:
    """Smallest positive integer u making (u^4 g2, u^6 g3) integral."""
    d2 = max((c.denominator for c in k.g2.terms.values()), default=1)
    d3 = max((c.denominator for c in k.g3.terms.values()), default=1)
    u = 1
    while True:
        g2 = k.g2.scale(u ** 4)
        g3 = k.g3.scale(u ** 6)
        if all(c.denominator == 1 for c in g2.terms.values()) and all(
                c.denominator == 1 for c in g3.terms.values()):
            return u, KodairaNormalForm(k.t, g2, g3, k.chart)
        u += 1
        if u > d2 * d3:
            raise AssertionError("no integral rescaling found")


def discriminant(k: KodairaNormalForm) -> MultiPoly:
    d = k.g2 ** 3 * 4 - k.g3 ** 2 * 27
    if d.is_zero():
        raise DegenerateCubicError("degenerate cubic: discriminant vanishes identically")
    return d


def to_infinity_chart(k: KodairaNormalForm, s: str) -> KodairaNormalForm:
    """Second chart t = 1/s with weights (s^8 g2(1/s), s^12 g3(1/s))."""
    ring = (s,) + PARAMS

    def flip(g, w):
        # g lives in (t, l, m)
        out = {}
        for e, c in g.terms.items():
            if e[0] > w:
                raise ValueError(f"degree in {k.t} exceeds weight {w}")
            out[(w - e[0],) + e[1:]] = c
        return MultiPoly(ring, out)

    g2 = k.g2.to_ring((k.t,) + PARAMS)
    g3 = k.g3.to_ring((k.t,) + PARAMS)
    return KodairaNormalForm(s, flip(g2, 8), flip(g3, 12), "infinity")


def _order(p: MultiPoly, t: str):
    return inf if p.is_zero() else p.min_degree(t)


_TABLE = (
    # (predicate on (o2, o3, od), fibre builder)
    (lambda a, b, d: (a, b, d) == (0, 0, 0), lambda a, b, d: FiberType("smooth")),
    (lambda a, b, d: a == 0 and b == 0 and d > 0, lambda a, b, d: FiberType("I", d)),
    (lambda a, b, d: a >= 1 and b == 1 and d == 2, lambda a, b, d: FiberType("II")),
    (lambda a, b, d: a == 1 and b >= 2 and d == 3, lambda a, b, d: FiberType("III")),
    (lambda a, b, d: a >= 2 and b == 2 and d == 4, lambda a, b, d: FiberType("IV")),
    (lambda a, b, d: a >= 2 and b >= 3 and d == 6, lambda a, b, d: FiberType("I*", 0)),
    (lambda a, b, d: a == 2 and b == 3 and d > 6, lambda a, b, d: FiberType("I*", d - 6)),
    (lambda a, b, d: a >= 3 and b == 4 and d == 8, lambda a, b, d: FiberType("IV*")),
    (lambda a, b, d: a == 3 and b >= 5 and d == 9, lambda a, b, d: FiberType("III*")),
    (lambda a, b, d: a >= 4 and b == 5 and d == 10, lambda a, b, d: FiberType("II*")),
)


def classify_fiber(ord_g2, ord_g3, ord_delta) -> FiberType:
    """Kodaira's table; orders of an identically vanishing coefficient are math.inf."""
    for pred, build in _TABLE:
        if pred(ord_g2, ord_g3, ord_delta):
            return build(ord_g2, ord_g3, ord_delta)
    raise FiberClassificationError("non-minimal or inconsistent orders")


def minimal_orders(k: KodairaNormalForm) -> Tuple:
    """Vanishing orders at t = 0 over Q(l, m), reduced to a minimal model."""
    o2, o3 = _order(k.g2, k.t), _order(k.g3, k.t)
    od = _order(discriminant(k), k.t)
    while o2 >= 4 and o3 >= 6:
        o2, o3, od = o2 - 4, o3 - 6, od - 12
    return o2, o3, od


def in_lambda(lambda_poly: MultiPoly, sample: Mapping[str, Fraction]) -> bool:
    l, m = Fraction(sample["l"]), Fraction(sample["m"])
    return l != 0 and m != 0 and lambda_poly.value({"l": l, "m": m}) != 0


def residual_factor(k: KodairaNormalForm) -> MultiPoly:
    d = discriminant(k)
    o = d.min_degree(k.t)
    e = [0] * len(d.ring)
    e[d.ring.index(k.t)] = o
    return d.divide_monomial(tuple(e))


def analyze_fibration(finite: KodairaNormalForm, infinity: KodairaNormalForm,
                      sample: Mapping[str, Fraction], lambda_poly: MultiPoly) -> FiberConfiguration:
    if not in_lambda(lambda_poly, sample):
        raise SampleOutsideLambdaError("sample outside Lambda")
    o0 = minimal_orders(finite)
    oi = minimal_orders(infinity)
    f0 = classify_fiber(*o0)
    fi = classify_fiber(*oi)
    res = residual_factor(finite)
    deg_generic = res.degree(finite.t)
    at = res.evaluate({"l": sample["l"], "m": sample["m"]}).to_ring((finite.t,))
    if at.degree(finite.t) != deg_generic or at.constant_term() == 0:
        raise SampleOutsideLambdaError("sample outside Lambda: residual factor degenerates")
    if not is_squarefree_univariate(at, finite.t):
        raise SampleOutsideLambdaError("sample outside Lambda: residual factor not squarefree")
    entries = []
    if f0.kind != "smooth":
        entries.append(("0", f0, 1))
    if fi.kind != "smooth":
        entries.append(("infinity", fi, 1))
    if deg_generic:
        entries.append(("residual", FiberType("I", 1), deg_generic))
    return FiberConfiguration(tuple(entries), {"0": o0, "infinity": oi, "residual_degree": deg_generic})


def euler_check(c: FiberConfiguration) -> bool:
    return c.euler_sum() == 24


# --------------------------------------------------------------------------
# fixture-driven family analysis


@dataclass
class FamilyData:
    key: str
    surface: SurfaceEquation
    chart_ring: Tuple[str, ...]
    phi: Dict[str, RatFunc]
    weierstrass: WeierstrassForm
    weierstrass_printed: WeierstrassForm
    infinity_var: str
    printed: Dict[str, MultiPoly]
    lambda_poly: MultiPoly
    expected: Dict


def load_family(key: str, fixture: Optional[dict] = None) -> FamilyData:
    from .data import load

    fx = (fixture or load("fibrations.json"))[key]
    base = fx["base"]
    chart_ring = tuple(fx["target_vars"]) + PARAMS
    family = "3" if key == "3b" else key
    surface = SurfaceEquation.parse(family, fx["surface"])
    phi = {v: parse_ratfunc(s, chart_ring) for v, s in fx["map"].items()}
    w = fx["weierstrass"]
    printed_w = WeierstrassForm.parse(base, w["a2"], w["a1"], w["a0"], fx["cubic_var"], fx["square_var"])
    wa = fx.get("weierstrass_amended", w)
    used_w = WeierstrassForm.parse(base, wa["a2"], wa["a1"], wa["a0"], fx["cubic_var"], fx["square_var"])
    printed = {}
    for name, text in fx["printed"].items():
        printed[name] = parse_poly(text)
    return FamilyData(key, surface, chart_ring, phi, used_w, printed_w, fx["infinity_var"], printed,
                      parse_poly(fx["lambda_poly"], PARAMS), fx["expected"])


def compare_up_to_constant(derived: MultiPoly, printed: MultiPoly) -> Optional[Fraction]:
    """Constant c with printed == c * derived, over the union of both rings."""
    ring = union_ring(derived.ring, printed.ring)
    return proportional(printed.to_ring(ring), derived.to_ring(ring))


def default_sample(key: str) -> Dict[str, Fraction]:
    return {"l": Fraction(1, 7), "m": Fraction(2, 11)}


def load_map(key: str, variant: str = "map") -> Dict[str, RatFunc]:
    from .data import load

    fx = load("fibrations.json")[key]
    ring = tuple(fx["target_vars"]) + PARAMS
    return {v: parse_ratfunc(s, ring) for v, s in fx[variant].items()}


def target_equation(fd: FamilyData) -> MultiPoly:
    return fd.weierstrass.equation(fd.chart_ring)


def printed_comparisons(fd: FamilyData) -> Dict[str, Tuple[Optional[Fraction], MultiPoly]]:
    """Constant c with printed == c * derived for g2, g3, D0 (finite chart) and
    h2, h3, Dinf (chart at infinity), together with the derived polynomial."""
    k = depress_cubic(fd.weierstrass)
    kinf = to_infinity_chart(k, fd.infinity_var)
    derived = {"g2": k.g2, "g3": k.g3, "D0": discriminant(k),
               "h2": kinf.g2, "h3": kinf.g3, "Dinf": discriminant(kinf)}
    return {name: (compare_up_to_constant(derived[name], fd.printed[name]), derived[name])
            for name in ("g2", "g3", "h2", "h3", "D0", "Dinf") if name in fd.printed}

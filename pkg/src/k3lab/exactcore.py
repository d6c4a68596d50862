"""Exact rational arithmetic: sparse multivariate polynomials and rational functions.

Polynomials live in an explicit ring (an ordered tuple of variable names) and
store a dict from exponent tuples to nonzero :class:`fractions.Fraction`
coefficients.  Terms are ordered graded-lexicographically with respect to the
declared variable order; the order only affects iteration and the choice of
leading term in :func:`exact_divide`.

Rational functions are kept unreduced apart from scalar content, and equality
is decided by cross-multiplication, so no multivariate gcd is ever needed.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import gcd, lcm
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

BigRat = Fraction

Exp = Tuple[int, ...]
Scalar = Union[int, Fraction]


class NotDivisible:
    """Sentinel returned by :func:`exact_divide` when the division is not exact."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NOT_DIVISIBLE"

    def __bool__(self):
        return False


NOT_DIVISIBLE = NotDivisible()


class ZeroDenominatorError(ZeroDivisionError):
    pass


def _grlex_key(e: Exp):
    return (sum(e), e)


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"cannot use {type(c).__name__} as a rational coefficient")


class MultiPoly:
    """Sparse polynomial with rational coefficients over a named ring."""

    __slots__ = ("ring", "terms", "_hash")

    def __init__(self, ring: Sequence[str], terms: Optional[Mapping[Exp, Scalar]] = None):
        self.ring = tuple(ring)
        n = len(self.ring)
        clean: Dict[Exp, Fraction] = {}
        if terms:
            for e, c in terms.items():
                if len(e) != n:
                    raise ValueError(f"exponent {e} does not match ring {self.ring}")
                if c:
                    clean[tuple(e)] = _as_fraction(c)
        self.terms = clean
        self._hash = None

    # construction helpers
    @classmethod
    def _raw(cls, ring: Tuple[str, ...], terms: Dict[Exp, Fraction]) -> "MultiPoly":
        p = object.__new__(cls)
        p.ring = ring
        p.terms = terms
        p._hash = None
        return p

    @classmethod
    def zero(cls, ring: Sequence[str]) -> "MultiPoly":
        return cls._raw(tuple(ring), {})

    @classmethod
    def const(cls, c: Scalar, ring: Sequence[str]) -> "MultiPoly":
        ring = tuple(ring)
        c = _as_fraction(c)
        return cls._raw(ring, {(0,) * len(ring): c} if c else {})

    @classmethod
    def var(cls, name: str, ring: Sequence[str]) -> "MultiPoly":
        ring = tuple(ring)
        e = [0] * len(ring)
        e[ring.index(name)] = 1
        return cls._raw(ring, {tuple(e): Fraction(1)})

    @classmethod
    def monomial(cls, exps: Exp, c: Scalar, ring: Sequence[str]) -> "MultiPoly":
        return cls(ring, {tuple(exps): c})

    @classmethod
    def parse(cls, text: str, ring: Optional[Sequence[str]] = None) -> "MultiPoly":
        return parse_poly(text, ring)

    # basic queries
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not any(next(iter(self.terms))))

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * len(self.ring), Fraction(0))

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: _grlex_key(kv[0]), reverse=True)

    def leading_term(self) -> Tuple[Exp, Fraction]:
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        e = max(self.terms, key=_grlex_key)
        return e, self.terms[e]

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def degree(self, var: str) -> int:
        if not self.terms:
            return -1
        i = self.ring.index(var)
        return max(e[i] for e in self.terms)

    def min_degree(self, var: str) -> int:
        if not self.terms:
            raise ValueError("order of zero polynomial")
        i = self.ring.index(var)
        return min(e[i] for e in self.terms)

    def variables(self) -> Tuple[str, ...]:
        """Variables that actually occur."""
        used = [False] * len(self.ring)
        for e in self.terms:
            for i, k in enumerate(e):
                if k:
                    used[i] = True
        return tuple(v for v, u in zip(self.ring, used) if u)

    # ring management
    def to_ring(self, ring: Sequence[str]) -> "MultiPoly":
        ring = tuple(ring)
        if ring == self.ring:
            return self
        idx = []
        for v in self.ring:
            idx.append(ring.index(v) if v in ring else None)
        n = len(ring)
        out: Dict[Exp, Fraction] = {}
        for e, c in self.terms.items():
            ne = [0] * n
            for k, j in zip(e, idx):
                if k:
                    if j is None:
                        raise ValueError(f"variable missing from target ring {ring}")
                    ne[j] = k
            out[tuple(ne)] = c
        return MultiPoly._raw(ring, out)

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.ring != self.ring:
                raise ValueError(f"ring mismatch: {self.ring} vs {other.ring}")
            return other
        if isinstance(other, (int, Fraction)):
            return MultiPoly.const(other, self.ring)
        return NotImplemented

    # arithmetic
    def __neg__(self):
        return MultiPoly._raw(self.ring, {e: -c for e, c in self.terms.items()})

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s += c
                if s:
                    out[e] = s
                else:
                    del out[e]
        return MultiPoly._raw(self.ring, out)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def scale(self, c: Scalar) -> "MultiPoly":
        c = _as_fraction(c)
        if not c:
            return MultiPoly.zero(self.ring)
        return MultiPoly._raw(self.ring, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        out: Dict[Exp, Fraction] = {}
        get = out.get
        for eb, cb in b.items():
            for ea, ca in a.items():
                e = tuple([x + y for x, y in zip(ea, eb)])
                v = get(e)
                out[e] = ca * cb if v is None else v + ca * cb
        return MultiPoly._raw(self.ring, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = MultiPoly.const(1, self.ring)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                raise ZeroDivisionError("division of a polynomial by zero")
            return self.scale(Fraction(1) / _as_fraction(other))
        if isinstance(other, MultiPoly):
            return RatFunc(self, other)
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.terms == MultiPoly.const(other, self.ring).terms
        if isinstance(other, MultiPoly):
            if self.ring != other.ring:
                return False
            return self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self.terms.items())))
        return self._hash

    # calculus and evaluation
    def diff(self, var: str) -> "MultiPoly":
        i = self.ring.index(var)
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                ne = list(e)
                ne[i] = k - 1
                out[tuple(ne)] = c * k
        return MultiPoly._raw(self.ring, out)

    def theta(self, var: str) -> "MultiPoly":
        """Euler derivative var * d/dvar."""
        i = self.ring.index(var)
        return MultiPoly._raw(self.ring, {e: c * e[i] for e, c in self.terms.items() if e[i]})

    def evaluate(self, values: Mapping[str, Scalar]) -> "MultiPoly":
        """Substitute rational constants for some variables; the ring is unchanged."""
        idx = [(self.ring.index(v), _as_fraction(x)) for v, x in values.items()]
        out: Dict[Exp, Fraction] = {}
        for e, c in self.terms.items():
            ne = list(e)
            for i, x in idx:
                if ne[i]:
                    c = c * x ** ne[i]
                    ne[i] = 0
            if c:
                t = tuple(ne)
                s = out.get(t, 0) + c
                if s:
                    out[t] = s
                else:
                    out.pop(t, None)
        return MultiPoly._raw(self.ring, out)

    def value(self, values: Mapping[str, Scalar]) -> Fraction:
        p = self.evaluate(values)
        if not p.is_constant():
            raise ValueError(f"variables {p.variables()} left unassigned")
        return p.constant_term()

    def shift(self, var: str, c: Scalar) -> "MultiPoly":
        """Return p with var replaced by var + c."""
        c = _as_fraction(c)
        if not c:
            return self
        return compose(self, {var: MultiPoly.var(var, self.ring) + c})

    def coefficients_in(self, var: str) -> Dict[int, "MultiPoly"]:
        """View as a polynomial in var: power -> coefficient (same ring, var absent)."""
        i = self.ring.index(var)
        out: Dict[int, Dict[Exp, Fraction]] = {}
        for e, c in self.terms.items():
            ne = list(e)
            k = ne[i]
            ne[i] = 0
            out.setdefault(k, {})[tuple(ne)] = c
        return {k: MultiPoly._raw(self.ring, t) for k, t in out.items()}

    def rename(self, names: Mapping[str, str]) -> "MultiPoly":
        """Same polynomial with ring variables renamed."""
        ring = tuple(names.get(v, v) for v in self.ring)
        if len(set(ring)) != len(ring):
            raise ValueError("renaming collapses two variables")
        return MultiPoly._raw(ring, dict(self.terms))

    # content
    def content(self) -> Fraction:
        """Positive rational c with self/c having coprime integer coefficients."""
        if not self.terms:
            return Fraction(0)
        num = 0
        den = 1
        for c in self.terms.values():
            num = gcd(num, c.numerator)
            den = lcm(den, c.denominator)
        return Fraction(num, den)

    def primitive(self) -> "MultiPoly":
        """Integer-coefficient primitive part with positive leading coefficient."""
        if not self.terms:
            return self
        c = self.content()
        if self.leading_term()[1] < 0:
            c = -c
        return self.scale(1 / c)

    def monomial_content(self) -> Exp:
        if not self.terms:
            return (0,) * len(self.ring)
        it = iter(self.terms)
        m = list(next(it))
        for e in it:
            m = [min(a, b) for a, b in zip(m, e)]
        return tuple(m)

    def divide_monomial(self, m: Exp) -> "MultiPoly":
        out = {}
        for e, c in self.terms.items():
            ne = tuple(a - b for a, b in zip(e, m))
            if min(ne) < 0:
                raise ValueError("monomial does not divide")
            out[ne] = c
        return MultiPoly._raw(self.ring, out)

    # printing
    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"MultiPoly({format_poly(self)!r}, ring={self.ring})"


# --------------------------------------------------------------------------
# text format

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z][A-Za-z0-9_']*)|(\*\*|[-+*/^()]))")


def _tokenize(text: str):
    pos = 0
    out = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse polynomial near {text[pos:pos + 20]!r}")
        num, name, op = m.groups()
        if num is not None:
            out.append(("num", int(num)))
        elif name is not None:
            out.append(("var", name))
        else:
            out.append(("op", "^" if op == "**" else op))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


class _Parser:
    """Recursive-descent parser for + - * / ^ with juxtaposition as product.

    Division is allowed by anything; the result is a RatFunc and callers that
    want a polynomial check that the denominator is constant.
    """

    def __init__(self, tokens, ring):
        self.toks = tokens
        self.i = 0
        self.ring = ring

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def expr(self):
        kind, val = self.peek()
        sign = 1
        if kind == "op" and val in "+-":
            self.take()
            sign = -1 if val == "-" else 1
        acc = self.term()
        if sign < 0:
            acc = -acc
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                rhs = self.term()
                acc = acc + rhs if val == "+" else acc - rhs
            else:
                return acc

    def term(self):
        acc = self.power()
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                rhs = self.power()
                acc = acc * rhs if val == "*" else acc / rhs
            elif kind in ("num", "var") or (kind == "op" and val == "("):
                acc = acc * self.power()
            else:
                return acc

    def power(self):
        base = self.atom()
        kind, val = self.peek()
        if kind == "op" and val == "^":
            self.take()
            sign = 1
            if self.peek() == ("op", "-"):
                self.take()
                sign = -1
            k, e = self.take()
            if k == "num":
                exp = e
            elif (k, e) == ("op", "("):
                k2, exp = self.take()
                if k2 != "num" or self.take() != ("op", ")"):
                    raise ValueError("exponent must be an integer")
            else:
                raise ValueError("exponent must be an integer")
            exp *= sign
            if exp < 0:
                return RatFunc.one(self.ring) / (base ** (-exp))
            return base ** exp
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return RatFunc(MultiPoly.const(val, self.ring))
        if kind == "var":
            if val not in self.ring:
                raise ValueError(f"variable {val!r} not in ring {self.ring}")
            return RatFunc(MultiPoly.var(val, self.ring))
        if (kind, val) == ("op", "("):
            e = self.expr()
            if self.take() != ("op", ")"):
                raise ValueError("unbalanced parentheses")
            return e
        if (kind, val) == ("op", "-"):
            return -self.power()
        raise ValueError(f"unexpected token {val!r}")


def _collect_vars(tokens):
    seen = []
    for k, v in tokens:
        if k == "var" and v not in seen:
            seen.append(v)
    return tuple(seen)


def parse_ratfunc(text: str, ring: Optional[Sequence[str]] = None) -> "RatFunc":
    toks = _tokenize(text)
    if ring is None:
        ring = _collect_vars(toks)
    ring = tuple(ring)
    p = _Parser(toks, ring)
    if not toks:
        return RatFunc(MultiPoly.zero(ring))
    result = p.expr()
    if p.i != len(toks):
        raise ValueError(f"trailing input in {text!r}")
    return result


def parse_poly(text: str, ring: Optional[Sequence[str]] = None) -> MultiPoly:
    """Parse `coeff * var^exp * ... + ...`; factored forms and products are accepted too."""
    r = parse_ratfunc(text, ring)
    if not r.den.is_constant():
        raise ValueError(f"{text!r} is not a polynomial")
    return r.num.scale(1 / r.den.constant_term())


def _format_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_poly(p: MultiPoly) -> str:
    if not p.terms:
        return "0"
    parts = []
    for e, c in p.sorted_terms():
        factors = []
        for v, k in zip(p.ring, e):
            if k == 1:
                factors.append(v)
            elif k > 1:
                factors.append(f"{v}^{k}")
        a = abs(c)
        if factors:
            body = " * ".join(factors)
            if a != 1:
                body = f"{_format_coeff(a)} * {body}"
        else:
            body = _format_coeff(a)
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    out = parts[0][1] if parts[0][0] == "+" else "-" + parts[0][1]
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


# --------------------------------------------------------------------------
# rational functions


class RatFunc:
    """Quotient of two polynomials in the same ring, compared by cross-multiplication."""

    __slots__ = ("num", "den")

    def __init__(self, num: MultiPoly, den: Optional[MultiPoly] = None):
        if den is None:
            den = MultiPoly.const(1, num.ring)
        if den.ring != num.ring:
            raise ValueError("numerator and denominator rings differ")
        if den.is_zero():
            raise ZeroDenominatorError("zero denominator")
        # scalar normalisation only: den primitive over Z, leading coefficient > 0
        c = den.content()
        if den.leading_term()[1] < 0:
            c = -c
        if c != 1:
            num = num.scale(1 / c)
            den = den.scale(1 / c)
        self.num = num
        self.den = den

    @classmethod
    def one(cls, ring):
        return cls(MultiPoly.const(1, ring))

    @classmethod
    def zero(cls, ring):
        return cls(MultiPoly.zero(ring))

    @classmethod
    def parse(cls, text: str, ring: Optional[Sequence[str]] = None) -> "RatFunc":
        return parse_ratfunc(text, ring)

    @property
    def ring(self):
        return self.num.ring

    def _coerce(self, other):
        if isinstance(other, RatFunc):
            if other.ring != self.ring:
                raise ValueError(f"ring mismatch: {self.ring} vs {other.ring}")
            return other
        if isinstance(other, MultiPoly):
            return RatFunc(other.to_ring(self.ring) if other.ring != self.ring else other)
        if isinstance(other, (int, Fraction)):
            return RatFunc(MultiPoly.const(other, self.ring))
        return NotImplemented

    def is_zero(self):
        return self.num.is_zero()

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if self.den == o.den:
            return RatFunc(self.num + o.num, self.den)
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return RatFunc(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o.num.is_zero():
            raise ZeroDenominatorError("division by the zero rational function")
        return RatFunc(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def __pow__(self, k: int):
        if k < 0:
            if self.num.is_zero():
                raise ZeroDenominatorError("zero to a negative power")
            return RatFunc(self.den ** (-k), self.num ** (-k))
        return RatFunc(self.num ** k, self.den ** k)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self.num * o.den == o.num * self.den

    __hash__ = None

    def theta(self, var: str) -> "RatFunc":
        """Euler derivative var * d/dvar."""
        return RatFunc(
            self.num.theta(var) * self.den - self.num * self.den.theta(var),
            self.den * self.den,
        )

    def diff(self, var: str) -> "RatFunc":
        return RatFunc(self.num.diff(var) * self.den - self.num * self.den.diff(var), self.den * self.den)

    def evaluate(self, values: Mapping[str, Scalar]) -> "RatFunc":
        d = self.den.evaluate(values)
        if d.is_zero():
            raise ZeroDenominatorError("denominator vanishes at the evaluation point")
        return RatFunc(self.num.evaluate(values), d)

    def value(self, values: Mapping[str, Scalar]) -> Fraction:
        d = self.den.value(values)
        if not d:
            raise ZeroDenominatorError("denominator vanishes at the evaluation point")
        return self.num.value(values) / d

    def as_poly(self) -> Optional[MultiPoly]:
        q = exact_divide(self.num, self.den)
        return None if q is NOT_DIVISIBLE else q

    def cancel_monomial(self) -> "RatFunc":
        """Remove the common monomial factor of numerator and denominator."""
        if self.num.is_zero():
            return RatFunc(self.num, MultiPoly.const(1, self.ring))
        a = self.num.monomial_content()
        b = self.den.monomial_content()
        m = tuple(min(x, y) for x, y in zip(a, b))
        if not any(m):
            return self
        return RatFunc(self.num.divide_monomial(m), self.den.divide_monomial(m))

    def to_ring(self, ring) -> "RatFunc":
        return RatFunc(self.num.to_ring(ring), self.den.to_ring(ring))

    def __str__(self):
        if self.den.is_constant() and self.den.constant_term() == 1:
            return format_poly(self.num)
        return f"({format_poly(self.num)}) / ({format_poly(self.den)})"

    def __repr__(self):
        return f"RatFunc({self})"


# --------------------------------------------------------------------------
# operations


def exact_divide(a: MultiPoly, b: MultiPoly):
    """Return q with a == b*q, or NOT_DIVISIBLE.

    Leading-term division in graded lex order; the first non-divisible leading
    term aborts, so no partial quotient is ever returned.
    """
    if b.ring != a.ring:
        raise ValueError("ring mismatch")
    if b.is_zero():
        raise ZeroDivisionError("exact_divide by the zero polynomial")
    if a.is_zero():
        return MultiPoly.zero(a.ring)
    be, bc = b.leading_term()
    if len(b.terms) == 1:
        out = {}
        for e, c in a.terms.items():
            d = tuple(x - y for x, y in zip(e, be))
            if min(d) < 0:
                return NOT_DIVISIBLE
            out[d] = c / bc
        return MultiPoly._raw(a.ring, out)
    # repeated leading-term elimination, with the remainder held in a dict
    rem = dict(a.terms)
    btail = [(e, c) for e, c in b.terms.items() if e != be]
    q: Dict[Exp, Fraction] = {}
    while rem:
        re_ = max(rem, key=_grlex_key)
        d = tuple(x - y for x, y in zip(re_, be))
        if min(d) < 0:
            return NOT_DIVISIBLE
        coef = rem.pop(re_) / bc
        q[d] = coef
        for e, c in btail:
            t = tuple(x + y for x, y in zip(e, d))
            v = rem.get(t, 0) - coef * c
            if v:
                rem[t] = v
            else:
                rem.pop(t, None)
    return MultiPoly._raw(a.ring, q)


def divide_remainder(a: MultiPoly, b: MultiPoly):
    """Multivariate division a = b*q + r where no term of r is divisible by lt(b)."""
    if b.ring != a.ring:
        raise ValueError("ring mismatch")
    if b.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    be, bc = b.leading_term()
    btail = [(e, c) for e, c in b.terms.items() if e != be]
    work = dict(a.terms)
    q: Dict[Exp, Fraction] = {}
    r: Dict[Exp, Fraction] = {}
    while work:
        te = max(work, key=_grlex_key)
        tc = work.pop(te)
        d = tuple(x - y for x, y in zip(te, be))
        if min(d) < 0:
            r[te] = tc
            continue
        coef = tc / bc
        q[d] = q.get(d, 0) + coef
        for e, c in btail:
            t = tuple(x + y for x, y in zip(e, d))
            v = work.get(t, 0) - coef * c
            if v:
                work[t] = v
            else:
                work.pop(t, None)
    return MultiPoly(a.ring, q), MultiPoly._raw(a.ring, r)


def divides(b: MultiPoly, a: MultiPoly) -> bool:
    return exact_divide(a, b) is not NOT_DIVISIBLE


def compose(p: MultiPoly, mapping: Mapping[str, MultiPoly]) -> MultiPoly:
    """Polynomial substitution; unmapped variables must exist in the target ring."""
    targets = list(mapping.values())
    ring = targets[0].ring if targets else p.ring
    images = []
    for v in p.ring:
        if v in mapping:
            images.append(mapping[v])
        else:
            images.append(MultiPoly.var(v, ring))
    return _compose_images(p, images, ring)


def _compose_images(p, images, ring):
    cache = {}

    def pw(i, k):
        key = (i, k)
        if key not in cache:
            cache[key] = images[i] ** k
        return cache[key]

    total = MultiPoly.zero(ring)
    for e, c in p.terms.items():
        t = MultiPoly.const(c, ring)
        for i, k in enumerate(e):
            if k:
                t = t * pw(i, k)
        total = total + t
    return total


def substitute(p: MultiPoly, mapping: Mapping[str, Union[RatFunc, MultiPoly]]) -> RatFunc:
    """Compose p with a map sending some of its variables to rational functions.

    Variables of p that are not mapped are kept and must exist in the common
    target ring.  The result is returned over the common denominator
    prod(den_v ^ deg_v(p)).
    """
    targets = []
    for v, img in mapping.items():
        if isinstance(img, MultiPoly):
            img = RatFunc(img)
        targets.append((v, img))
    if not targets:
        return RatFunc(p)
    ring = targets[0][1].ring
    for _, img in targets:
        if img.ring != ring:
            raise ValueError("map targets must share one ring")
    tmap = dict(targets)
    nums, dens, maxdeg = [], [], []
    for v in p.ring:
        if v in tmap:
            img = tmap[v]
            if img.den.is_zero():
                raise ZeroDenominatorError("zero denominator in substitution")
            nums.append(img.num)
            dens.append(img.den)
        else:
            if v not in ring:
                raise ValueError(f"variable {v!r} is neither mapped nor in the target ring")
            nums.append(MultiPoly.var(v, ring))
            dens.append(MultiPoly.const(1, ring))
        maxdeg.append(p.degree(v) if p.terms else 0)
    cache = {}

    def pw(seq, tag, i, k):
        key = (tag, i, k)
        if key not in cache:
            cache[key] = seq[i] ** k
        return cache[key]

    total = MultiPoly.zero(ring)
    for e, c in p.terms.items():
        t = MultiPoly.const(c, ring)
        for i, k in enumerate(e):
            if k:
                t = t * pw(nums, "n", i, k)
            if maxdeg[i] - k and not dens[i].is_constant():
                t = t * pw(dens, "d", i, maxdeg[i] - k)
            elif maxdeg[i] - k:
                t = t.scale(dens[i].constant_term() ** (maxdeg[i] - k))
        total = total + t
    den = MultiPoly.const(1, ring)
    for i, d in enumerate(dens):
        if maxdeg[i] > 0:
            den = den * pw(dens, "d", i, maxdeg[i])
    if den.is_zero():
        raise ZeroDenominatorError("zero denominator in substitution")
    return RatFunc(total, den)


def vanishing_order(p: MultiPoly, var: str, at: Scalar = 0) -> int:
    """Largest k with (var - at)^k dividing p; other variables are generic."""
    if p.is_zero():
        raise ValueError("order of zero polynomial")
    if at:
        p = p.shift(var, at)
    return p.min_degree(var)


def univariate_coeffs(p: MultiPoly, var: str) -> list:
    """Dense coefficient list (low to high) of a polynomial in `var` only."""
    others = [v for v in p.variables() if v != var]
    if others:
        raise ValueError(f"expected a univariate polynomial in {var}, found {others}")
    i = p.ring.index(var)
    deg = p.degree(var)
    out = [Fraction(0)] * (deg + 1)
    for e, c in p.terms.items():
        out[e[i]] = c
    return out


def _poly_divmod(a: list, b: list):
    a = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    lb = b[-1]
    while len(a) >= len(b) and any(a):
        k = len(a) - len(b)
        c = a[-1] / lb
        q[k] = c
        for j, bj in enumerate(b):
            a[j + k] -= c * bj
        a.pop()
        while a and a[-1] == 0:
            a.pop()
    return q, a


def univariate_gcd(a: list, b: list) -> list:
    """Monic gcd of dense univariate coefficient lists over Q."""
    while b and b[-1] == 0:
        b = b[:-1]
    while a and a[-1] == 0:
        a = a[:-1]
    while b:
        _, r = _poly_divmod(a, b)
        a, b = b, r
    if not a:
        return []
    return [c / a[-1] for c in a]


def is_squarefree_univariate(p: MultiPoly, var: str) -> bool:
    c = univariate_coeffs(p, var)
    if len(c) <= 2:
        return True
    dc = [k * c[k] for k in range(1, len(c))]
    return len(univariate_gcd(c, dc)) == 1


def proportional(a: MultiPoly, b: MultiPoly) -> Optional[Fraction]:
    """The rational c with a == c*b, or None."""
    if a.ring != b.ring:
        raise ValueError("ring mismatch")
    if a.is_zero() or b.is_zero():
        return Fraction(0) if a.is_zero() and b.is_zero() else None
    if a.terms.keys() != b.terms.keys():
        return None
    e = next(iter(a.terms))
    c = a.terms[e] / b.terms[e]
    for e, v in a.terms.items():
        if v != c * b.terms[e]:
            return None
    return c


def union_ring(*rings: Iterable[str]) -> Tuple[str, ...]:
    out = []
    for r in rings:
        for v in r:
            if v not in out:
                out.append(v)
    return tuple(out)

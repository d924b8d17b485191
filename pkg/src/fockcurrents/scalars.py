"""Exact coefficient arithmetic.

The working coefficient domain is Frac(Q[k])[h]: polynomials in the
deformation parameter h (rendered ``h``) whose coefficients are rational
functions of the level ``k`` over Q.  ``h`` is a polynomial indeterminate
and is never inverted globally; dividing by ``h`` is a guarded operation
(`Scalar.divide_by_hbar`) that fails loudly when the constant term
survives, which turns cancellation identities into testable assertions.

Two lighter value types support the engine: `Rational` (an alias of
`fractions.Fraction`) and `RatK`, an element of Frac(Q[k]).  Shift
arguments ("A" in a displacement ``A*h``) are plain `RatK` values.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

Rational = Fraction

__all__ = [
    "Rational",
    "RatK",
    "Scalar",
    "HShift",
    "NonDivisibleError",
    "NonSingleValuedError",
    "K",
    "gen_binomial",
    "binom_ratk",
    "scalar_arith",
    "divide_by_hbar",
]


class NonDivisibleError(ArithmeticError):
    """An h-division was requested but the h-constant term is nonzero."""


class NonSingleValuedError(ValueError):
    """A resolved u-exponent is not an integer, so no Laurent expansion exists."""


# ---------------------------------------------------------------------------
# dense univariate polynomials over Q, as tuples of Fractions (low -> high)

_PZERO: tuple = ()
_PONE = (Fraction(1),)


def _ptrim(cs):
    n = len(cs)
    while n and not cs[n - 1]:
        n -= 1
    return tuple(cs[:n])


def _padd(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] += c
    return _ptrim(out)


def _pneg(a):
    return tuple(-c for c in a)


def _pmul(a, b):
    if not a or not b:
        return _PZERO
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if not ca:
            continue
        for j, cb in enumerate(b):
            if cb:
                out[i + j] += ca * cb
    return _ptrim(out)


def _pscale(a, q):
    if not q:
        return _PZERO
    return tuple(c * q for c in a)


def _pdivmod(a, b):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    r = list(a)
    db, lb = len(b) - 1, b[-1]
    while len(r) >= len(b):
        if not r[-1]:
            r.pop()
            continue
        d = len(r) - 1 - db
        c = r[-1] / lb
        q[d] = c
        for i in range(len(b)):
            r[d + i] -= c * b[i]
        r.pop()
    return _ptrim(q), _ptrim(r)


def _pgcd(a, b):
    # monic Euclid; fine for the small degrees arising here
    while b:
        a, b = b, _pdivmod(a, b)[1]
    if not a:
        return _PZERO
    lead = a[-1]
    if lead == 1:
        return a
    return tuple(c / lead for c in a)


def _peval(a, x):
    acc = Fraction(0)
    for c in reversed(a):
        acc = acc * x + c
    return acc


def _prender(a, var="k"):
    if not a:
        return "0"
    parts = []
    for i, c in enumerate(a):
        if not c:
            continue
        if i == 0:
            parts.append(str(c))
        elif i == 1:
            parts.append(f"{c}*{var}" if c != 1 else var)
        else:
            parts.append(f"{c}*{var}^{i}" if c != 1 else f"{var}^{i}")
    return " + ".join(parts).replace("+ -", "- ")


class RatK:
    """A reduced rational function of k over Q; denominator monic."""

    __slots__ = ("num", "den", "_hash")

    def __new__(cls, num, den=_PONE):
        num = _ptrim(num)
        den = _ptrim(den)
        if not den:
            raise ZeroDivisionError("zero denominator in RatK")
        if not num:
            den = _PONE
        else:
            if len(den) > 1:
                g = _pgcd(num, den)
                if len(g) > 1:
                    num = _pdivmod(num, g)[0]
                    den = _pdivmod(den, g)[0]
            lead = den[-1]
            if lead != 1:
                num = tuple(c / lead for c in num)
                den = tuple(c / lead for c in den)
        self = object.__new__(cls)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "_hash", None)
        return self

    # -- constructors
    @staticmethod
    def of(v) -> "RatK":
        if isinstance(v, RatK):
            return v
        q = Fraction(v)
        return _RATK_CACHE.get(q) or RatK((q,))

    @staticmethod
    def linear(const, slope) -> "RatK":
        """const + slope*k with rational arguments."""
        return RatK((Fraction(const), Fraction(slope)))

    def __setattr__(self, *_):  # pragma: no cover - immutability guard
        raise AttributeError("RatK is immutable")

    # -- predicates / conversions
    def __bool__(self):
        return bool(self.num)

    def is_rational(self):
        return len(self.num) <= 1 and self.den == _PONE

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"not a constant: {self.render()}")
        return self.num[0] if self.num else Fraction(0)

    def as_int(self) -> int:
        q = self.as_fraction()
        if q.denominator != 1:
            raise ValueError(f"not an integer: {q}")
        return q.numerator

    def eval_at(self, k0: Fraction) -> Fraction:
        d = _peval(self.den, k0)
        if not d:
            raise ZeroDivisionError(f"denominator vanishes at k={k0}")
        return _peval(self.num, k0) / d

    # -- arithmetic
    def __add__(self, other):
        o = RatK.of(other)
        if self.den == o.den:
            return RatK(_padd(self.num, o.num), self.den)
        return RatK(
            _padd(_pmul(self.num, o.den), _pmul(o.num, self.den)),
            _pmul(self.den, o.den),
        )

    __radd__ = __add__

    def __neg__(self):
        return RatK(_pneg(self.num), self.den)

    def __sub__(self, other):
        return self + (-RatK.of(other))

    def __rsub__(self, other):
        return RatK.of(other) + (-self)

    def __mul__(self, other):
        o = RatK.of(other)
        if not self.num or not o.num:
            return RATK_ZERO
        return RatK(_pmul(self.num, o.num), _pmul(self.den, o.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = RatK.of(other)
        if not o.num:
            raise ZeroDivisionError("division by zero RatK")
        return RatK(_pmul(self.num, o.den), _pmul(self.den, o.num))

    def __rtruediv__(self, other):
        return RatK.of(other) / self

    def __pow__(self, n: int):
        if n < 0:
            return RATK_ONE / (self ** (-n))
        acc, base = RATK_ONE, self
        while n:
            if n & 1:
                acc = acc * base
            base = base * base
            n >>= 1
        return acc

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = RatK.of(other)
        if not isinstance(other, RatK):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self.num, self.den))
            object.__setattr__(self, "_hash", h)
        return h

    def render(self) -> str:
        n = _prender(self.num)
        if self.den == _PONE:
            return n if len(self.num) <= 1 else f"({n})"
        d = _prender(self.den)
        ns = n if len(self.num) <= 1 else f"({n})"
        return f"{ns}/({d})"

    def __repr__(self):
        return f"RatK[{self.render()}]"


RATK_ZERO = RatK(_PZERO)
RATK_ONE = RatK(_PONE)
K = RatK((Fraction(0), Fraction(1)))
_RATK_CACHE = {Fraction(0): RATK_ZERO, Fraction(1): RATK_ONE}
for _q in (-1, 2, -2, Fraction(1, 2), Fraction(-1, 2)):
    _RATK_CACHE[Fraction(_q)] = RatK((Fraction(_q),))

#: a u-argument shift "A" standing for the additive displacement A*h
HShift = RatK


def binom_ratk(r, j: int) -> RatK:
    """Generalized binomial coefficient r(r-1)...(r-j+1)/j! over Frac(Q[k])."""
    if j < 0:
        raise ValueError("binomial order must be >= 0")
    r = RatK.of(r)
    return _binom_cached(r, j)


@lru_cache(maxsize=None)
def _binom_cached(r: RatK, j: int) -> RatK:
    if j == 0:
        return RATK_ONE
    prev = _binom_cached(r, j - 1)
    return prev * (r - (j - 1)) / j


class Scalar:
    """Element of Frac(Q[k])[h] in canonical form; immutable.

    Stored sparsely as a sorted tuple of (h-degree, RatK) pairs with no
    zero coefficients.  The symbolic backend uses these directly; the
    specialized backends replace them by plain Fractions/floats.
    """

    __slots__ = ("coeffs", "_hash")

    def __new__(cls, coeffs):
        items = [(d, c) for d, c in coeffs if c]
        items.sort(key=lambda t: t[0])
        self = object.__new__(cls)
        object.__setattr__(self, "coeffs", tuple(items))
        object.__setattr__(self, "_hash", None)
        return self

    def __setattr__(self, *_):  # pragma: no cover
        raise AttributeError("Scalar is immutable")

    # -- constructors
    @staticmethod
    def of(v) -> "Scalar":
        if isinstance(v, Scalar):
            return v
        if isinstance(v, RatK):
            return Scalar(((0, v),))
        return Scalar(((0, RatK.of(v)),))

    @staticmethod
    def monomial(d: int, c) -> "Scalar":
        return Scalar(((d, RatK.of(c)),))

    @staticmethod
    def hbar(d: int = 1) -> "Scalar":
        return Scalar(((d, RATK_ONE),))

    # -- predicates
    def __bool__(self):
        return bool(self.coeffs)

    def is_zero(self):
        return not self.coeffs

    def hbar_valuation(self) -> int:
        """Lowest h-power present; raises on zero."""
        if not self.coeffs:
            raise ValueError("zero scalar has no valuation")
        return self.coeffs[0][0]

    def hbar_degree(self) -> int:
        if not self.coeffs:
            return -1
        return self.coeffs[-1][0]

    def constant_ratk(self) -> RatK:
        for d, c in self.coeffs:
            if d == 0:
                return c
        return RATK_ZERO

    # -- arithmetic
    def __add__(self, other):
        o = Scalar.of(other)
        if not self.coeffs:
            return o
        if not o.coeffs:
            return self
        acc = dict(self.coeffs)
        for d, c in o.coeffs:
            cur = acc.get(d)
            acc[d] = c if cur is None else cur + c
        return Scalar(acc.items())

    __radd__ = __add__

    def __neg__(self):
        return Scalar(tuple((d, -c) for d, c in self.coeffs))

    def __sub__(self, other):
        return self + (-Scalar.of(other))

    def __rsub__(self, other):
        return Scalar.of(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, RatK)):
            o = RatK.of(other)
            if not o:
                return SCALAR_ZERO
            return Scalar(tuple((d, c * o) for d, c in self.coeffs))
        o = Scalar.of(other)
        if not self.coeffs or not o.coeffs:
            return SCALAR_ZERO
        acc: dict = {}
        for d1, c1 in self.coeffs:
            for d2, c2 in o.coeffs:
                d = d1 + d2
                p = c1 * c2
                cur = acc.get(d)
                acc[d] = p if cur is None else cur + p
        return Scalar(acc.items())

    __rmul__ = __mul__

    def __truediv__(self, other):
        """Exact division; raises NonDivisibleError when inexact in h."""
        if isinstance(other, (int, Fraction, RatK)):
            o = RatK.of(other)
            if not o:
                raise ZeroDivisionError("division by zero scalar")
            return Scalar(tuple((d, c / o) for d, c in self.coeffs))
        o = Scalar.of(other)
        if not o.coeffs:
            raise ZeroDivisionError("division by zero scalar")
        if not self.coeffs:
            return SCALAR_ZERO
        if len(o.coeffs) == 1:
            d0, c0 = o.coeffs[0]
            out = []
            for d, c in self.coeffs:
                if d < d0:
                    raise NonDivisibleError(
                        f"({self.render()}) not divisible by ({o.render()})"
                    )
                out.append((d - d0, c / c0))
            return Scalar(out)
        # long division in h over the field Frac(Q[k])
        rem = dict(self.coeffs)
        out: dict = {}
        od, oc = o.coeffs[-1]
        while rem:
            d = max(rem)
            if d < od:
                break
            c = rem[d] / oc
            out[d - od] = c
            for dd, cc in o.coeffs:
                t = dd + (d - od)
                cur = rem.get(t, RATK_ZERO) - cc * c
                if cur:
                    rem[t] = cur
                else:
                    rem.pop(t, None)
        if rem:
            raise NonDivisibleError(
                f"({self.render()}) not divisible by ({o.render()})"
            )
        return Scalar(out.items())

    def divide_by_hbar(self, power: int = 1) -> "Scalar":
        """Exact division by h**power; NonDivisibleError if the valuation is short."""
        if power == 0 or not self.coeffs:
            return self
        if self.coeffs[0][0] < power:
            raise NonDivisibleError(
                f"h-constant term survives: cannot divide ({self.render()}) by h^{power}"
            )
        return Scalar(tuple((d - power, c) for d, c in self.coeffs))

    # -- specialization
    def specialize_k(self, k0) -> "Scalar":
        k0 = Fraction(k0)
        if k0 in (0, -2):
            raise ValueError("k0 must avoid 0 and -2")
        return Scalar(tuple((d, RatK.of(c.eval_at(k0))) for d, c in self.coeffs))

    def specialize(self, k0, h0) -> Fraction:
        k0, h0 = Fraction(k0), Fraction(h0)
        if k0 in (0, -2):
            raise ValueError("k0 must avoid 0 and -2")
        acc = Fraction(0)
        for d, c in self.coeffs:
            acc += c.eval_at(k0) * h0**d
        return acc

    # -- comparisons / rendering
    def __eq__(self, other):
        if isinstance(other, (int, Fraction, RatK)):
            other = Scalar.of(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash(self.coeffs)
            object.__setattr__(self, "_hash", h)
        return h

    def render(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for d, c in self.coeffs:
            cs = c.render()
            if d == 0:
                parts.append(cs)
            elif d == 1:
                parts.append(f"{cs}*h" if cs != "1" else "h")
            else:
                parts.append(f"{cs}*h^{d}" if cs != "1" else f"h^{d}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"Scalar[{self.render()}]"


SCALAR_ZERO = Scalar(())
SCALAR_ONE = Scalar.of(1)


def gen_binomial(r, j: int) -> Scalar:
    """Binomial coefficient C(r, j) = r(r-1)...(r-j+1)/j! as a Scalar."""
    return Scalar.of(binom_ratk(r, j))


def scalar_arith(a: Scalar, b: Scalar, op: str) -> Scalar:
    """Field arithmetic on scalars; `op` one of add/sub/mul/div."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


def divide_by_hbar(a: Scalar, power: int = 1) -> Scalar:
    return Scalar.of(a).divide_by_hbar(power)

"""Coefficient backends.

The mode engine is generic over a coefficient backend with two layers:

* field elements ("f_"): pure functions of k used inside truncated
  binomial series in x = h/u -- `RatK` symbolically, `Fraction` when k is
  specialized, `float` in the float backend;
* vector coefficients ("c_"): what multiplies Fock states -- `Scalar`
  symbolically (the h-power is carried explicitly), plain `Fraction`
  or `float` otherwise.

The symbolic backend is the default for every verification suite; the
float backend exists solely for limit studies and is rejected by the
suite runner.
"""

from __future__ import annotations

from fractions import Fraction

from .scalars import (
    RATK_ONE,
    RATK_ZERO,
    NonDivisibleError,
    RatK,
    Scalar,
    binom_ratk,
)


class SymbolicBackend:
    """Exact arithmetic with k and h both symbolic."""

    name = "symbolic"
    is_float = False

    f_zero = RATK_ZERO
    f_one = RATK_ONE

    @staticmethod
    def f_from_ratk(r: RatK):
        return r

    @staticmethod
    def f_from_fraction(q):
        return RatK.of(q)

    @staticmethod
    def f_is_zero(f) -> bool:
        return not f

    c_zero = Scalar(())

    @staticmethod
    def c_make(f, hdeg: int):
        """Vector coefficient f * h**hdeg."""
        return Scalar(((hdeg, f),))

    @staticmethod
    def c_of(v):
        return Scalar.of(v)

    @staticmethod
    def c_div_hbar(c, power: int):
        return c.divide_by_hbar(power)

    @staticmethod
    def c_is_zero(c) -> bool:
        return not c

    @staticmethod
    def c_render(c) -> str:
        return c.render()

    def signature(self):
        return ("symbolic",)

    def __repr__(self):
        return "SymbolicBackend()"


class SpecializedBackend:
    """Exact arithmetic with k and h specialized to rationals."""

    name = "specialized"
    is_float = False

    def __init__(self, k0, h0):
        k0, h0 = Fraction(k0), Fraction(h0)
        if k0 in (0, -2):
            raise ValueError("k0 must avoid 0 and -2")
        self.k0 = k0
        self.h0 = h0
        self.f_zero = Fraction(0)
        self.f_one = Fraction(1)
        self.c_zero = Fraction(0)
        self._hpow = [Fraction(1)]

    def f_from_ratk(self, r: RatK):
        return r.eval_at(self.k0)

    @staticmethod
    def f_from_fraction(q):
        return Fraction(q)

    @staticmethod
    def f_is_zero(f) -> bool:
        return not f

    def _h(self, d: int):
        hp = self._hpow
        while len(hp) <= d:
            hp.append(hp[-1] * self.h0)
        return hp[d]

    def c_make(self, f, hdeg: int):
        return f * self._h(hdeg)

    def c_of(self, v):
        if isinstance(v, Scalar):
            return v.specialize(self.k0, self.h0)
        if isinstance(v, RatK):
            return v.eval_at(self.k0)
        return Fraction(v)

    def c_div_hbar(self, c, power: int):
        return c / self._h(power)

    @staticmethod
    def c_is_zero(c) -> bool:
        return not c

    @staticmethod
    def c_render(c) -> str:
        return str(c)

    def signature(self):
        return ("specialized", str(self.k0), str(self.h0))

    def __repr__(self):
        return f"SpecializedBackend(k0={self.k0}, h0={self.h0})"


class FloatBackend:
    """Floating point; limit studies only, never the verification path."""

    name = "float"
    is_float = True

    def __init__(self, k0, h0):
        self.k0 = float(k0)
        self.h0 = float(h0)
        self.f_zero = 0.0
        self.f_one = 1.0
        self.c_zero = 0.0

    def f_from_ratk(self, r: RatK):
        return float(r.eval_at(Fraction(self.k0).limit_denominator(10**12)))

    @staticmethod
    def f_from_fraction(q):
        return float(q)

    @staticmethod
    def f_is_zero(f) -> bool:
        return f == 0.0

    def c_make(self, f, hdeg: int):
        return f * self.h0**hdeg

    def c_of(self, v):
        if isinstance(v, Scalar):
            return float(v.specialize(Fraction(self.k0).limit_denominator(10**12),
                                      Fraction(self.h0).limit_denominator(10**12)))
        if isinstance(v, RatK):
            return self.f_from_ratk(v)
        return float(v)

    def c_div_hbar(self, c, power: int):
        return c / self.h0**power

    @staticmethod
    def c_is_zero(c) -> bool:
        return c == 0.0

    @staticmethod
    def c_render(c) -> str:
        return f"{c:.12g}"

    def signature(self):
        return ("float", repr(self.k0), repr(self.h0))

    def __repr__(self):
        return f"FloatBackend(k0={self.k0}, h0={self.h0})"


SYMBOLIC = SymbolicBackend()

"""The (l+1)-dimensional evaluation module with spectral parameter.

Basis vectors w_m (x) u^a with 0 <= m <= l and a an integer power; the
level is zero, so the relation suite runs with shift c = 0.  Action of the
generators (n any integer, w_{-1} = w_{l+1} = 0):

  e_n (w_m x u^a) = m       (u + (l-2m+1)/2 h)^n (w_{m-1} x u^a)
  f_n (w_m x u^a) = (l-m)   (u + (l-2m-1)/2 h)^n (w_{m+1} x u^a)
  h_n (w_m x u^a) = [(m+1)(l-m)(u + (l-2m-1)/2 h)^n
                      - m(l-m+1)(u + (l-2m+1)/2 h)^n] (w_m x u^a)
  d   (w_m x u^a) = -a (w_m x u^{a-1})

Negative powers (u + b h)^n expand as descending u-series, truncated at a
configured low power; the truncation point is chained through compositions
so that every reported coefficient is exact.  Generating-function modes:
coefficient of u^{-r-1} of h+(u) is the identity at r = -1, h*h_r for
r >= 0, and zero otherwise (h- mirrored to r < 0 with sign -h).
"""

from __future__ import annotations

from fractions import Fraction

from .reports import RelationReport
from .scalars import Scalar, binom_ratk


class EvalVector:
    """Finite map (m, a) -> Scalar over the evaluation-module basis."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = dict(terms) if terms else {}

    @staticmethod
    def unit(m: int, a: int, coeff=None):
        v = EvalVector()
        v.terms[(m, a)] = coeff if coeff is not None else Scalar.of(1)
        return v

    def add_term(self, key, coeff):
        cur = self.terms.get(key)
        new = coeff if cur is None else cur + coeff
        if new:
            self.terms[key] = new
        else:
            self.terms.pop(key, None)

    def __add__(self, other):
        out = EvalVector(self.terms)
        for kk, c in other.terms.items():
            out.add_term(kk, c)
        return out

    def __sub__(self, other):
        out = EvalVector(self.terms)
        for kk, c in other.terms.items():
            out.add_term(kk, -c)
        return out

    def scaled(self, c):
        if not c:
            return EvalVector()
        return EvalVector({kk: v * c for kk, v in self.terms.items()})

    def truncated_low(self, low: int):
        return EvalVector({kk: c for kk, c in self.terms.items() if kk[1] >= low})

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return isinstance(other, EvalVector) and self.terms == other.terms

    def items_sorted(self):
        return sorted(self.terms.items())

    def render(self) -> str:
        if not self.terms:
            return "0"
        return "  +  ".join(
            f"({c.render()}) w{m}*u^{a}" for (m, a), c in self.items_sorted()
        )


class _Factor:
    def __init__(self, fn, tgt):
        self.fn = fn
        self.tgt = tgt

    def __call__(self, m):
        return self.fn(m)

    def target(self, m):
        return self.tgt(m)


class EvalModule:
    """Action of the generators on V^(l) with an exactness low-power cap."""

    def __init__(self, l: int):
        if l < 0:
            raise ValueError("l must be >= 0")
        self.l = int(l)

    def beta_minus(self, m):
        return Fraction(self.l - 2 * m - 1, 2)

    def beta_plus(self, m):
        return Fraction(self.l - 2 * m + 1, 2)

    def gen_apply(self, gen: str, n: int, v: EvalVector, low: int) -> EvalVector:
        l = self.l
        out = EvalVector()
        items = list(v.terms.items())
        if gen == "e":
            for (m, a), c in items:
                if m == 0:
                    continue
                self._expand(out, c, m, a, n, self.beta_plus(m),
                             _Factor(lambda mm: Fraction(mm), lambda mm: mm - 1), low)
        elif gen == "f":
            for (m, a), c in items:
                if m == l:
                    continue
                self._expand(out, c, m, a, n, self.beta_minus(m),
                             _Factor(lambda mm: Fraction(l - mm), lambda mm: mm + 1), low)
        elif gen == "h":
            for (m, a), c in items:
                f1 = Fraction((m + 1) * (l - m))
                f2 = Fraction(m * (l - m + 1))
                if f1:
                    self._expand(out, c * f1, m, a, n, self.beta_minus(m),
                                 _Factor(lambda mm: Fraction(1), lambda mm: mm), low)
                if f2:
                    self._expand(out, c * (-f2), m, a, n, self.beta_plus(m),
                                 _Factor(lambda mm: Fraction(1), lambda mm: mm), low)
        elif gen == "d":
            for (m, a), c in items:
                if a:
                    out.add_term((m, a - 1), c * Scalar.of(-a))
        else:
            raise ValueError(f"unknown generator {gen!r}")
        return out

    @staticmethod
    def _expand(out, base, m, a, n, beta, fac, low):
        f = fac(m)
        if not f:
            return
        base = base * f
        tgt = fac.target(m)
        i = 0
        while True:
            power = a + n - i
            if power < low:
                break
            coeff = binom_ratk(Fraction(n), i) * beta**i
            if coeff:
                out.add_term((tgt, power), base * Scalar.monomial(i, coeff))
            i += 1
            if n >= 0 and i > n:
                break

    # -- generating-function modes (constants of h+- included)
    def genfunc_mode(self, gen: str, r: int, v: EvalVector, low: int) -> EvalVector:
        if gen in ("e", "f"):
            return self.gen_apply(gen, r, v, low)
        if gen == "hp":
            out = EvalVector()
            if r == -1:
                out = out + v
            if r >= 0:
                out = out + self.gen_apply("h", r, v, low).scaled(Scalar.hbar())
            return out
        if gen == "hm":
            out = EvalVector()
            if r == -1:
                out = out + v
            if r <= -1:
                out = out + self.gen_apply("h", r, v, low).scaled(-Scalar.hbar())
            return out
        if gen == "d":
            return self.gen_apply("d", 0, v, low)
        raise ValueError(f"unknown generating function {gen!r}")


class EvalAdapter:
    """Binds the generic relation checkers to the evaluation module (c = 0)."""

    def __init__(self, l: int, power_window: int = 3):
        self.module = EvalModule(l)
        self.window = int(power_window)

    def unit(self, probe):
        m, a = probe
        return EvalVector.unit(m, a)

    def _window_shift(self, gen, mode):
        if gen == "d":
            return -1
        return max(mode, 0) if mode is not None else 0

    def compose(self, ops, probe):
        lows = [0] * len(ops)
        lows[0] = -self.window
        for i in range(1, len(ops)):
            g, mode = ops[i - 1]
            lows[i] = lows[i - 1] - self._window_shift(g, mode)
        cur = self.unit(probe)
        for i in range(len(ops) - 1, -1, -1):
            g, mode = ops[i]
            cur = self.module.genfunc_mode(g, mode, cur, lows[i])
            if not cur:
                break
        return cur.truncated_low(-self.window)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def scale(self, v, scalar):
        return v.scaled(Scalar.of(scalar))

    def is_zero(self, v):
        return v is None or v.is_zero()

    def div_hbar(self, v):
        out = EvalVector()
        for kk, c in v.terms.items():
            out.add_term(kk, c.divide_by_hbar(1))
        return out

    def shifted_hp_mode(self, m: int, n: int, probe):
        # c = 0: the v^{-n-1} coefficient of v^m h+(v) is the h+ mode m+n
        return self.compose([("hp", m + n)], probe)

    def render_probe(self, probe):
        return f"w{probe[0]}*u^{probe[1]}"

    def render_residual(self, v):
        return [[f"w{m}*u^{a}", c.render()] for (m, a), c in v.items_sorted()]

    def report_params(self, **kw):
        return {"backend": "eval", "l": self.module.l, "c": "0",
                "power_window": self.window}

"""Expression language for normal-ordered lattice vertex operators.

A `Primitive` is one normal-ordered product

    overall * h^{-hbar_div} *
      exp( sum creation legs ) * charge exps * power factors *
      exp( sum annihilation legs )

where a leg with coefficient alpha and shift A denotes the half-series
sum_{n>0} (alpha/n) a_{X,-/+n} (u+A h)^{+/-n} (creation/annihilation),
a frozen leg is the same series with u replaced by 0, and a power factor
denotes (u+B h)^{gamma d_X + c}.  Composite expressions (sums, scalar
multiples, argument shifts, difference quotients, disjoint products)
normalize to a flat weighted sum of primitives; the 1/h of a difference
quotient is deferred to evaluation and asserted exact there.
"""

from __future__ import annotations

from fractions import Fraction

from .fock import BOSONS, FockState
from .scalars import (
    RATK_ONE,
    RATK_ZERO,
    NonSingleValuedError,
    RatK,
    Scalar,
)

CRE = "cre"
ANN = "ann"


class OverlappingProductError(ValueError):
    """Product factors share a boson; not representable as one primitive."""


class Leg:
    __slots__ = ("boson", "side", "alpha", "shift", "frozen")

    def __init__(self, boson, side, alpha, shift, frozen=False):
        assert side in (CRE, ANN)
        object.__setattr__(self, "boson", boson)
        object.__setattr__(self, "side", side)
        object.__setattr__(self, "alpha", RatK.of(alpha))
        object.__setattr__(self, "shift", RatK.of(shift))
        object.__setattr__(self, "frozen", bool(frozen))

    def __setattr__(self, *_):  # pragma: no cover
        raise AttributeError("Leg is immutable")

    def key(self):
        return (self.boson, self.side, self.shift, self.frozen)

    def sort_key(self):
        return (self.boson, self.side, self.frozen, self.shift.num, self.shift.den)

    def render(self):
        arg = "0" if self.frozen else "u"
        sgn = "-" if self.side == ANN else "+"
        return f"leg({self.boson},{self.side},a={self.alpha.render()},({arg}+({self.shift.render()})h)^{sgn}n)"


class PowerFactor:
    """(u + shift*h)^(gamma*d_boson + const); boson None means scalar power."""

    __slots__ = ("boson", "gamma", "const", "shift")

    def __init__(self, boson, gamma, const, shift):
        object.__setattr__(self, "boson", boson)
        object.__setattr__(self, "gamma", RatK.of(gamma))
        object.__setattr__(self, "const", RatK.of(const))
        object.__setattr__(self, "shift", RatK.of(shift))

    def __setattr__(self, *_):  # pragma: no cover
        raise AttributeError("PowerFactor is immutable")

    def exponent_on(self, state: FockState) -> RatK:
        if self.boson is None or not self.gamma:
            return self.const
        return self.gamma * RatK.of(state.charge_eigen(self.boson)) + self.const

    def key(self):
        return (self.boson or "", self.shift)

    def sort_key(self):
        return (self.boson or "", self.shift.num, self.shift.den)

    def render(self):
        e = []
        if self.boson is not None and self.gamma:
            g = self.gamma.render()
            e.append(f"{g}*d_{self.boson}" if g != "1" else f"d_{self.boson}")
        if self.const or not e:
            e.append(self.const.render())
        return f"(u+({self.shift.render()})h)^({'+'.join(e)})"


class Primitive:
    __slots__ = ("overall", "hbar_div", "legs", "charges", "powers", "_hash")

    def __init__(self, overall=RATK_ONE, hbar_div=0, legs=(), charges=(0, 0, 0), powers=()):
        merged = {}
        for leg in legs:
            k = leg.key()
            cur = merged.get(k)
            merged[k] = leg.alpha if cur is None else cur + leg.alpha
        legs = tuple(
            sorted(
                (Leg(b, side, a, sh, fr) for (b, side, sh, fr), a in merged.items() if a),
                key=Leg.sort_key,
            )
        )
        pmerged = {}
        for p in powers:
            k = p.key()
            cur = pmerged.get(k)
            pmerged[k] = (
                (p.gamma, p.const) if cur is None else (cur[0] + p.gamma, cur[1] + p.const)
            )
        powers = tuple(
            sorted(
                (
                    PowerFactor(b if b else None, g, c, sh)
                    for (b, sh), (g, c) in pmerged.items()
                    if g or c
                ),
                key=PowerFactor.sort_key,
            )
        )
        dl, ds, dt = charges
        object.__setattr__(self, "overall", RatK.of(overall))
        object.__setattr__(self, "hbar_div", int(hbar_div))
        object.__setattr__(self, "legs", legs)
        object.__setattr__(self, "charges", (Fraction(dl), int(ds), int(dt)))
        object.__setattr__(self, "powers", powers)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, *_):  # pragma: no cover
        raise AttributeError("Primitive is immutable")

    # -- structure
    def support(self):
        bs = set()
        for leg in self.legs:
            bs.add(leg.boson)
        dl, ds, dt = self.charges
        for boson, d in zip(BOSONS, (dl, ds, dt)):
            if d:
                bs.add(boson)
        for p in self.powers:
            if p.boson is not None and p.gamma:
                bs.add(p.boson)
        return bs

    def shifted(self, c) -> "Primitive":
        c = RatK.of(c)
        if not c:
            return self
        legs = tuple(
            leg if leg.frozen else Leg(leg.boson, leg.side, leg.alpha, leg.shift + c)
            for leg in self.legs
        )
        powers = tuple(
            PowerFactor(p.boson, p.gamma, p.const, p.shift + c) for p in self.powers
        )
        return Primitive(self.overall, self.hbar_div, legs, self.charges, powers)

    def scaled(self, f) -> "Primitive":
        return Primitive(self.overall * RatK.of(f), self.hbar_div, self.legs,
                         self.charges, self.powers)

    def bump_hdiv(self, by=1) -> "Primitive":
        return Primitive(self.overall, self.hbar_div + by, self.legs, self.charges,
                         self.powers)

    def merge_disjoint(self, other: "Primitive") -> "Primitive":
        if self.support() & other.support():
            raise OverlappingProductError(
                f"product factors share bosons {sorted(self.support() & other.support())}"
            )
        dl1, ds1, dt1 = self.charges
        dl2, ds2, dt2 = other.charges
        return Primitive(
            self.overall * other.overall,
            self.hbar_div + other.hbar_div,
            self.legs + other.legs,
            (dl1 + dl2, ds1 + ds2, dt1 + dt2),
            self.powers + other.powers,
        )

    # -- homogeneity
    def power_exponent_on(self, state: FockState) -> int:
        """Total resolved u-exponent of the power factors on `state`.

        Must be an integer for a single-valued Laurent expansion.
        """
        total = RATK_ZERO
        for p in self.powers:
            total = total + p.exponent_on(state)
        try:
            return total.as_int()
        except ValueError:
            raise NonSingleValuedError(
                f"power exponent {total.render()} is not an integer on {state.render()}"
            ) from None

    def max_weight_drop(self, mode: int, state: FockState) -> int:
        """Largest weight decrease any matrix element of this mode can have.

        From the h-monomial structure: a nonzero element needs
        m + 1 + (w_out - w_in) + P >= 0.  Pure-creation primitives cannot
        lower weight at all.
        """
        if not any(leg.side == ANN for leg in self.legs):
            return 0
        return mode + 1 + self.power_exponent_on(state)

    def has_annihilation(self):
        return any(leg.side == ANN for leg in self.legs)

    def __eq__(self, other):
        return (
            isinstance(other, Primitive)
            and self.overall == other.overall
            and self.hbar_div == other.hbar_div
            and self.legs == other.legs
            and self.charges == other.charges
            and self.powers == other.powers
        )

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash(
                (
                    self.overall,
                    self.hbar_div,
                    tuple((l.boson, l.side, l.alpha, l.shift, l.frozen) for l in self.legs),
                    self.charges,
                    tuple((p.boson, p.gamma, p.const, p.shift) for p in self.powers),
                )
            )
            object.__setattr__(self, "_hash", h)
        return h

    def render(self) -> str:
        bits = [f"overall={self.overall.render()}"]
        if self.hbar_div:
            bits.append(f"h^-{self.hbar_div}")
        dl, ds, dt = self.charges
        if dl or ds or dt:
            bits.append(f"charge(dl={dl},ds={ds},dt={dt})")
        bits.extend(p.render() for p in self.powers)
        bits.extend(l.render() for l in self.legs)
        return "Prim{" + "; ".join(bits) + "}"


# ---------------------------------------------------------------------------
# AST nodes


class VopExpr:
    def normalize(self):
        raise NotImplementedError


class Prim(VopExpr):
    def __init__(self, primitive: Primitive):
        self.primitive = primitive

    def normalize(self):
        return ((Scalar.of(1), self.primitive),)


class ScalarMul(VopExpr):
    def __init__(self, scalar, expr: VopExpr):
        self.scalar = Scalar.of(scalar)
        self.expr = expr

    def normalize(self):
        if not self.scalar:
            return ()
        return tuple((self.scalar * w, p) for w, p in self.expr.normalize())


class Sum(VopExpr):
    def __init__(self, *exprs):
        self.exprs = exprs

    def normalize(self):
        acc = []
        for e in self.exprs:
            acc.extend(e.normalize())
        return _collect(acc)


class UShift(VopExpr):
    """Argument substitution u -> u + c*h."""

    def __init__(self, c, expr: VopExpr):
        self.c = RatK.of(c)
        self.expr = expr

    def normalize(self):
        return tuple((w, p.shifted(self.c)) for w, p in self.expr.normalize())


class DiffQuot(VopExpr):
    """The difference quotient g(u) -> (g(u + alpha*h) - g(u)) / h."""

    def __init__(self, alpha, expr: VopExpr):
        self.alpha = Fraction(alpha)
        self.expr = expr

    def normalize(self):
        acc = []
        for w, p in self.expr.normalize():
            acc.append((w, p.shifted(RatK.of(self.alpha)).bump_hdiv()))
            acc.append((-w, p.bump_hdiv()))
        return _collect(acc)


class HbarInv(VopExpr):
    """Explicit 1/h prefactor, deferred and asserted exact at evaluation."""

    def __init__(self, expr: VopExpr, power: int = 1):
        self.expr = expr
        self.power = int(power)

    def normalize(self):
        return tuple((w, p.bump_hdiv(self.power)) for w, p in self.expr.normalize())


class Product(VopExpr):
    """Product of factors with pairwise disjoint boson supports."""

    def __init__(self, *exprs):
        self.exprs = exprs

    def normalize(self):
        terms = ((Scalar.of(1), Primitive()),)
        for e in self.exprs:
            nxt = []
            for w1, p1 in terms:
                for w2, p2 in e.normalize():
                    nxt.append((w1 * w2, p1.merge_disjoint(p2)))
            terms = nxt
        return _collect(terms)


def _collect(terms):
    acc = {}
    order = []
    for w, p in terms:
        if not w:
            continue
        if p not in acc:
            acc[p] = w
            order.append(p)
        else:
            acc[p] = acc[p] + w
    return tuple((acc[p], p) for p in order if acc[p])


class NormalizedExpr:
    """Flat weighted sum of primitives with uniform charge shifts."""

    __slots__ = ("name", "terms", "charges", "max_hdiv")

    def __init__(self, name: str, expr_or_terms):
        if isinstance(expr_or_terms, VopExpr):
            terms = expr_or_terms.normalize()
        else:
            terms = tuple(expr_or_terms)
        if not terms:
            raise ValueError("normalized expression has no terms")
        charges = {p.charges for _, p in terms}
        if len(charges) != 1:
            raise ValueError(f"non-uniform charge shifts in {name}: {charges}")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "charges", next(iter(charges)))
        object.__setattr__(self, "max_hdiv", max(p.hbar_div for _, p in terms))

    def __setattr__(self, *_):  # pragma: no cover
        raise AttributeError("NormalizedExpr is immutable")

    def max_weight_drop(self, mode: int, state: FockState) -> int:
        return max(p.max_weight_drop(mode, state) for _, p in self.terms)

    def shifted(self, c) -> "NormalizedExpr":
        c = RatK.of(c)
        return NormalizedExpr(
            f"{self.name}(u+({c.render()})h)",
            tuple((w, p.shifted(c)) for w, p in self.terms),
        )

    def with_scalar_power(self, exponent: int, shift) -> "NormalizedExpr":
        """Multiply by the scalar factor (u + shift*h)^exponent."""
        sh = RatK.of(shift)
        extra = PowerFactor(None, 0, exponent, sh)
        terms = tuple(
            (w, Primitive(p.overall, p.hbar_div, p.legs, p.charges, p.powers + (extra,)))
            for w, p in self.terms
        )
        return NormalizedExpr(f"(u+({sh.render()})h)^{exponent} {self.name}", terms)

    def statistics_parity(self, other: "NormalizedExpr") -> int:
        """Exchange statistics parity from the integer-metric lattice charges.

        0 -> the two expressions commute (modulo poles), 1 -> anticommute.
        Only the chi (metric +1) and phi (metric -1) charges contribute.
        """
        _, ds1, dt1 = self.charges
        _, ds2, dt2 = other.charges
        return (dt1 * dt2 + ds1 * ds2) % 2

    def render(self) -> str:
        lines = [f"{self.name}:"]
        for w, p in self.terms:
            lines.append(f"  ({w.render()}) * {p.render()}")
        return "\n".join(lines)


def normalize(expr: VopExpr):
    """Public normalization entry point: flat (Scalar, Primitive) pairs."""
    return _collect(expr.normalize())


def homogeneity_profile(prim: Primitive, state: FockState):
    """Affine h-exponent law of matrix elements of this primitive.

    Returns (P, E) with P the resolved power exponent and
    E(w_in, w_out, m) = m + 1 + (w_out - w_in) + P - hbar_div; matrix
    elements between graded states are single h-monomials of exactly
    that degree, and vanish whenever the structural order
    m + 1 + (w_out - w_in) + P is negative.
    """
    P = prim.power_exponent_on(state)
    hdiv = prim.hbar_div

    def E(w_in: int, w_out: int, m: int) -> int:
        return m + 1 + (w_out - w_in) + P - hdiv

    return P, E

"""Built-in operator constructions.

The four Drinfeld currents e, f, h+, h- realized on the triple-boson Fock
space, the derivation d, the xi/eta pair and their zero modes, the
finite-J screening operator and charge, and the bosonized type I / II
vertex-operator components with their commutator towers.

Every construction is a normalized sum of disjoint-boson primitives; the
expression-level 1/h prefactors are deferred divisions asserted exact at
evaluation time.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

from .fock import CH, PH, PHI, FockState
from .modeengine import (
    DOp,
    ExprModeOp,
    LinearCombinationOp,
    ModeEngine,
    compose_apply,
)
from .scalars import RATK_ONE, K, RatK, Scalar
from .vopir import (
    ANN,
    CRE,
    DiffQuot,
    HbarInv,
    Leg,
    NormalizedExpr,
    PowerFactor,
    Prim,
    Primitive,
    Product,
    ScalarMul,
    Sum,
    VopExpr,
)


def vertex(boson: str, beta, A, B) -> Prim:
    """:exp{beta * X(u; A, B)}: as a single primitive.

    Creation half at shift A, zero-mode charge, the grading power
    (u+Bh)^{beta d_X}, and the annihilation half at shift B.
    """
    beta = RatK.of(beta)
    A = RatK.of(A)
    B = RatK.of(B)
    return Prim(
        Primitive(
            legs=(
                Leg(boson, CRE, beta, A),
                Leg(boson, ANN, -beta, B),
            ),
            charges=_charge_units(boson, beta),
            powers=(PowerFactor(boson, beta, 0, B),),
        )
    )


def _charge_units(boson: str, beta: RatK):
    if boson == PHI:
        return ((beta * (K + 2)).as_fraction(), 0, 0)
    b = beta.as_fraction()
    if b.denominator != 1:
        raise ValueError("phi/chi charges must be integral")
    return (Fraction(0), b.numerator, 0) if boson == PH else (Fraction(0), 0, b.numerator)


def _legs(boson, side, *pairs):
    return tuple(Leg(boson, side, a, sh) for a, sh in pairs)


@lru_cache(maxsize=None)
def current_e() -> NormalizedExpr:
    """e(u): difference quotient of the chi vertex times the phi vertex."""
    chi = vertex(CH, -1, -(K + 2), -(K + 2))
    phi = vertex(PH, -1, -(K + 1), -(K + 2))
    return NormalizedExpr("e", ScalarMul(-1, Product(DiffQuot(1, chi), phi)))


@lru_cache(maxsize=None)
def current_f() -> NormalizedExpr:
    """f(u): two-primitive sum with the explicit 1/h prefactor deferred."""
    t1_phi_osc = Prim(
        Primitive(
            legs=_legs(PHI, ANN, (1, -2), (-1, 0)),
            powers=(PowerFactor(PHI, 1, 0, 0), PowerFactor(PHI, -1, 0, -2)),
        )
    )
    t1 = Product(t1_phi_osc, vertex(PH, 1, -1, 0), vertex(CH, 1, -1, -1))
    t2_phi_osc = Prim(
        Primitive(
            legs=_legs(PHI, CRE, (RatK.of(2) / (K + 2), -(K + 3)),
                       (RatK.of(-2) / (K + 2), -1)),
        )
    )
    t2 = Product(t2_phi_osc, vertex(PH, 1, -(K + 3), -(K + 2)),
                 vertex(CH, 1, -(K + 2), -(K + 2)))
    return NormalizedExpr("f", HbarInv(Sum(t1, ScalarMul(-1, t2))))


@lru_cache(maxsize=None)
def current_hp() -> NormalizedExpr:
    """h+(u): annihilation halves and grading ratios for Phi and phi."""
    phi_cap = Prim(
        Primitive(
            legs=_legs(PHI, ANN, (1, -(K + 2)), (-1, -K)),
            powers=(PowerFactor(PHI, 1, 0, -K), PowerFactor(PHI, -1, 0, -(K + 2))),
        )
    )
    phi_low = Prim(
        Primitive(
            legs=_legs(PH, ANN, (1, -(K + 2)), (-1, -K)),
            powers=(PowerFactor(PH, 1, 0, -K), PowerFactor(PH, -1, 0, -(K + 2))),
        )
    )
    return NormalizedExpr("hp", Product(phi_cap, phi_low))


@lru_cache(maxsize=None)
def current_hm() -> NormalizedExpr:
    """h-(u): pure creation halves for Phi and phi."""
    phi_cap = Prim(
        Primitive(
            legs=_legs(PHI, CRE, (RatK.of(2) / (K + 2), -(K + 3)),
                       (RatK.of(-2) / (K + 2), -1)),
        )
    )
    phi_low = Prim(Primitive(legs=_legs(PH, CRE, (1, -(K + 3)), (-1, -(K + 1)))))
    return NormalizedExpr("hm", Product(phi_cap, phi_low))


@lru_cache(maxsize=None)
def current_xi() -> NormalizedExpr:
    return NormalizedExpr("xi", vertex(CH, -1, -(K + 2), -(K + 2)))


@lru_cache(maxsize=None)
def current_eta() -> NormalizedExpr:
    return NormalizedExpr("eta", vertex(CH, 1, -(K + 2), -(K + 2)))


@lru_cache(maxsize=None)
def current_screening(J: int) -> NormalizedExpr:
    """S(u)_[J]: e-like chi/phi part dressed by a finite-J Phi tail.

    The Phi charge is e^{-(2/(k+2)) a_Phi}: the screening shifts l -> l-2.
    """
    if J < 0:
        raise ValueError("J must be >= 0")
    powers = []
    ann = []
    for j in range(J + 1):
        powers.append(PowerFactor(PHI, 1, 0, -(2 + (K + 2) * j)))
        powers.append(PowerFactor(PHI, -1, 0, RatK.of(-(j)) * (K + 2)))
        ann.append((RATK_ONE, RatK.of(-(j)) * (K + 2)))
        ann.append((RatK.of(-1), -(2 + (K + 2) * j)))
    phi_tail = Prim(
        Primitive(
            legs=_legs(PHI, CRE, (RatK.of(-2) / (K + 2), -1)) + _legs(PHI, ANN, *ann),
            charges=(Fraction(-2), 0, 0),
            powers=tuple(powers),
        )
    )
    phi = vertex(PH, -1, -1, 0)
    q1 = Product(vertex(CH, -1, 0, 0), phi, phi_tail)
    q2 = Product(vertex(CH, -1, -1, -1), phi, phi_tail)
    return NormalizedExpr(f"S[{J}]", HbarInv(Sum(q1, ScalarMul(-1, q2))))


def _phi_minus_legs(u_dep: bool, alpha: RatK, A, B):
    """Creation pair of a Phi^(-) block; u_dep False freezes the argument at 0."""
    return (
        Leg(PHI, CRE, alpha, RatK.of(A), frozen=not u_dep),
        Leg(PHI, CRE, -alpha, RatK.of(B), frozen=not u_dep),
    )


@lru_cache(maxsize=None)
def vertex_phi_top(l: int, J: int, delta: Fraction) -> NormalizedExpr:
    """Type I top component Phi_{l,l}(u)[J,delta]; a pure-Phi primitive."""
    if l < 0 or J < 0:
        raise ValueError("need l >= 0 and J >= 0")
    delta = Fraction(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    al = RatK.of(2) / (K + 2)
    legs = []
    # A_j = -(k+l-1)/2 + 2j and B_j = -(k-l-1)/2 + 2j
    for j in range(J + 1):
        A = (RatK.of(-(l - 1)) - K) / 2 + 2 * j
        B = (RatK.of(l + 1) - K) / 2 + 2 * j
        legs.extend(_phi_minus_legs(True, al, A, B))
        legs.extend(_phi_minus_legs(False, al, 2 + delta + 2 * j, 2 * j))
    powers = []
    ann = []
    for j in range(1, J + 1):
        A = (RatK.of(l - 1) - K) / 2 - (K + 2) * j
        B = (RatK.of(-(l + 1)) - K) / 2 - (K + 2) * j
        ann.append(Leg(PHI, ANN, -1, A))
        ann.append(Leg(PHI, ANN, 1, B))
        powers.append(PowerFactor(PHI, 1, 0, A))
        powers.append(PowerFactor(PHI, -1, 0, B))
    prim = Primitive(
        legs=tuple(legs) + tuple(ann),
        charges=(Fraction(l), 0, 0),
        powers=tuple(powers),
    )
    return NormalizedExpr(f"PhiTop[l={l},J={J},d={delta}]", Prim(prim))


@lru_cache(maxsize=None)
def vertex_psi_bot(l: int, J: int, delta: Fraction) -> NormalizedExpr:
    """Type II bottom component Psi_{l,0}(u)[J,delta]."""
    if l < 0 or J < 0:
        raise ValueError("need l >= 0 and J >= 0")
    delta = Fraction(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    al = RatK.of(2) / (K + 2)
    legs = []
    for j in range(J + 1):
        A = RatK.of(Fraction(l - 5, 2)) - K + 2 * j
        B = RatK.of(Fraction(-(l + 1), 2)) - K + 2 * j
        legs.extend(_phi_minus_legs(True, al, A, B))
        legs.extend(_phi_minus_legs(False, al, 2 + delta + 2 * j, 2 * j))
    powers = []
    ann = []
    for j in range(1, J + 1):
        A = RatK.of(Fraction(-(l - 1), 2)) - (K + 2) * j
        B = RatK.of(Fraction(l - 3, 2)) - (K + 2) * j
        ann.append(Leg(PHI, ANN, -1, A))
        ann.append(Leg(PHI, ANN, 1, B))
        powers.append(PowerFactor(PHI, 1, 0, A))
        powers.append(PowerFactor(PHI, -1, 0, B))
    phi_part = Prim(
        Primitive(legs=tuple(legs) + tuple(ann), charges=(Fraction(l), 0, 0),
                  powers=tuple(powers))
    )
    phi_v = vertex(PH, 1, RatK.of(Fraction(l - 5, 2)) - K,
                   RatK.of(Fraction(-(l + 3), 2)) - K)
    chi_v = vertex(CH, 1, RatK.of(Fraction(l - 3, 2)) - K,
                   RatK.of(Fraction(l - 3, 2)) - K)
    return NormalizedExpr(
        f"PsiBot[l={l},J={J},d={delta}]", Product(phi_part, phi_v, chi_v)
    )


# ---------------------------------------------------------------------------
# zero modes and towers


def zero_mode(which: str, J: int = 0) -> ExprModeOp:
    """xi0 (coefficient of u^0), eta0 (coefficient of u^-1), or the
    screening charge S_[J] (coefficient of u^-1)."""
    if which == "xi0":
        return ExprModeOp(current_xi(), -1)
    if which == "eta0":
        return ExprModeOp(current_eta(), 0)
    if which == "S_charge":
        return ExprModeOp(current_screening(J), 0)
    raise ValueError(f"unknown zero mode {which!r}")


def vertex_tower(vtype: str, l: int, m: int, J: int, delta: Fraction):
    """Mode family of Phi_{l,m} / Psi_{l,m} via iterated zero-mode commutators.

    Type I:  Phi_{l,m} = (1/(l-m)!) [...[Phi_{l,l}, f_0]...f_0]  (l-m times)
    Type II: Psi_{l,m} = (1/m!)     [...[Psi_{l,0}, e_0]...e_0]  (m times)

    Returns a callable mode -> ModeOperator.
    """
    if not 0 <= m <= l:
        raise ValueError("need 0 <= m <= l")
    if vtype == "I":
        top = vertex_phi_top(l, J, delta)
        r = l - m
        partner = ExprModeOp(current_f(), 0)
        base_name = f"PhiTower[l={l},m={m},J={J}]"
    elif vtype == "II":
        top = vertex_psi_bot(l, J, delta)
        r = m
        partner = ExprModeOp(current_e(), 0)
        base_name = f"PsiTower[l={l},m={m},J={J}]"
    else:
        raise ValueError("vertex type must be 'I' or 'II'")

    def at_mode(mode: int) -> LinearCombinationOp:
        vop = ExprModeOp(top, mode)
        branches = []
        for i in range(r + 1):
            coeff = Scalar.of(Fraction(comb(r, i) * (-1) ** i, factorial(r)))
            ops = [partner] * i + [vop] + [partner] * (r - i)
            branches.append((coeff, ops))
        return LinearCombinationOp(branches, f"{base_name}[{mode}]")

    return at_mode


CURRENTS = {
    "e": current_e,
    "f": current_f,
    "hp": current_hp,
    "hm": current_hm,
    "xi": current_xi,
    "eta": current_eta,
}


# ---------------------------------------------------------------------------
# the Fock-module adapter used by the generic relation checkers


class FockAdapter:
    """Binds the generic checkers to the Fock backend with shift c = k
    (or c = k0 under a specialized backend)."""

    def __init__(self, engine: ModeEngine, out_cap: int):
        self.engine = engine
        self.out_cap = int(out_cap)
        self._tplus_cache = {}

    # -- generator resolution
    def _expr(self, gen) -> NormalizedExpr:
        if isinstance(gen, NormalizedExpr):
            return gen
        return CURRENTS[gen]()

    def unit(self, state: FockState):
        one = self.engine.backend.c_of(1)
        from .fock import FockVector

        return FockVector.unit(state, one)

    def compose(self, ops, probe):
        mode_ops = [ExprModeOp(self._expr(g), m) for g, m in ops]
        return compose_apply(self.engine, mode_ops, self.unit(probe), self.out_cap)

    def compose_operators(self, mode_ops, probe):
        return compose_apply(self.engine, mode_ops, self.unit(probe), self.out_cap)

    # -- vector algebra
    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def scale(self, v, scalar):
        return v.scaled(self.engine.backend.c_of(scalar))

    def is_zero(self, v) -> bool:
        return v is None or v.is_zero()

    def div_hbar(self, v):
        be = self.engine.backend
        out = type(v)()
        for st, c in v.terms.items():
            out.add_term(st, be.c_div_hbar(c, 1))
        return out

    # -- delta-relation pieces
    def c_shift(self) -> RatK:
        return K

    def shifted_hp_mode(self, m: int, n: int, probe):
        """v^{-n-1} coefficient of (v+ch)^m h+(v+ch) applied to the probe."""
        expr = self._tplus_cache.get(m)
        if expr is None:
            c = self.c_shift()
            expr = current_hp().shifted(c).with_scalar_power(m, c)
            self._tplus_cache[m] = expr
        return self.engine.apply_mode(expr, n, self.unit(probe), self.out_cap)

    # -- reporting
    def render_probe(self, probe) -> str:
        return probe.render()

    def render_residual(self, v):
        r = self.engine.backend.c_render
        return [[st.render(), r(c)] for st, c in v.items_sorted()]

    def report_params(self, **kw):
        p = {"backend": self.engine.backend.name, "out_weight_cap": self.out_cap,
             "c": "k" if self.engine.backend.name == "symbolic" else "k0"}
        for key, v in kw.items():
            if isinstance(v, NormalizedExpr):
                p[key] = v.name
        return p

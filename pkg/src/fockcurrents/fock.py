"""Triple-boson Heisenberg algebra, charged Fock states, grading and the
weight-raising operator d.

States are PBW occupation multisets over the three bosons Phi, phi, chi
on a charged vacuum |l;s,t>.  The metric constants are

    kappa(Phi) = (k+2)/2,   kappa(phi) = -1,   kappa(chi) = +1,

so [a_{X,m}, a_{X,n}] = kappa(X)*m*delta_{m+n,0} and [d_X, a_X] = kappa(X).
Charge eigenvalues derive from the labels: <d_Phi> = l/2, <d_phi> = -s,
<d_chi> = t.  This module is the single place that convention lives.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache

from .scalars import RATK_ONE, K, RatK

PHI = "Phi"   # level boson, metric (k+2)/2
PH = "phi"    # negative-metric boson
CH = "chi"    # auxiliary fermion-like boson
BOSONS = (PHI, PH, CH)
_BIDX = {PHI: 0, PH: 1, CH: 2}

_KAPPA = {PHI: (K + 2) / 2, PH: RatK.of(-1), CH: RATK_ONE}


def kappa(boson: str) -> RatK:
    return _KAPPA[boson]


class CapExceededError(RuntimeError):
    """An operation would produce weight beyond the declared cap."""


class FockState:
    """Immutable charged occupation state.

    occ is a triple (per boson, in BOSONS order) of sorted tuples of
    (mode n > 0, multiplicity >= 1); weight = sum n*mult.
    """

    __slots__ = ("l", "s", "t", "occ", "weight", "_hash")

    def __init__(self, l, s: int, t: int, occ=((), (), ())):
        object.__setattr__(self, "l", Fraction(l))
        object.__setattr__(self, "s", int(s))
        object.__setattr__(self, "t", int(t))
        norm = []
        w = 0
        for part in occ:
            part = tuple(sorted((int(n), int(m)) for n, m in part if m))
            for n, m in part:
                if n <= 0 or m < 0:
                    raise ValueError("occupation modes must be positive")
                w += n * m
            norm.append(part)
        object.__setattr__(self, "occ", tuple(norm))
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "_hash", hash((self.l, self.s, self.t, self.occ)))

    def __setattr__(self, *_):  # pragma: no cover
        raise AttributeError("FockState is immutable")

    def __eq__(self, other):
        return (
            isinstance(other, FockState)
            and self.l == other.l
            and self.s == other.s
            and self.t == other.t
            and self.occ == other.occ
        )

    def __hash__(self):
        return self._hash

    def charges(self):
        return (self.l, self.s, self.t)

    def charge_eigen(self, boson: str) -> Fraction:
        """Eigenvalue of d_X on this state."""
        if boson == PHI:
            return self.l / 2
        if boson == PH:
            return Fraction(-self.s)
        return Fraction(self.t)

    def occ_of(self, boson: str):
        return self.occ[_BIDX[boson]]

    def with_occ(self, boson: str, part):
        occ = list(self.occ)
        occ[_BIDX[boson]] = part
        return FockState(self.l, self.s, self.t, occ)

    def add_quantum(self, boson: str, n: int, count: int = 1):
        d = dict(self.occ_of(boson))
        d[n] = d.get(n, 0) + count
        return self.with_occ(boson, tuple(d.items()))

    def remove_quantum(self, boson: str, n: int, count: int = 1):
        d = dict(self.occ_of(boson))
        have = d.get(n, 0)
        if have < count:
            return None
        if have == count:
            del d[n]
        else:
            d[n] = have - count
        return self.with_occ(boson, tuple(d.items()))

    def shifted_charges(self, dl, ds: int, dt: int):
        return FockState(self.l + Fraction(dl), self.s + ds, self.t + dt, self.occ)

    def sort_key(self):
        return (self.weight, self.l, self.s, self.t, self.occ)

    def render(self) -> str:
        toks = []
        for boson, prefix in ((PHI, "aPhi"), (PH, "aphi"), (CH, "achi")):
            for n, m in sorted(self.occ_of(boson), reverse=True):
                toks.extend([f"{prefix}[-{n}]"] * m)
        l = self.l
        ls = str(l.numerator) if l.denominator == 1 else f"{l.numerator}/{l.denominator}"
        toks.append(f"|{ls},{self.s},{self.t}>")
        return " ".join(toks)

    def __repr__(self):
        return f"FockState({self.render()})"


_STATE_TOKEN = re.compile(r"\s*(aPhi|aphi|achi)\[(-?\d+)\]")
_STATE_KET = re.compile(r"\s*\|\s*(-?\d+(?:/\d+)?)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*>\s*$")


def parse_state(text: str) -> FockState:
    """Parse `aPhi[-1] achi[-2] |l,s,t>` into a FockState."""
    pos = 0
    quanta = []
    while True:
        m = _STATE_TOKEN.match(text, pos)
        if not m:
            break
        prefix, mode = m.group(1), int(m.group(2))
        if mode >= 0:
            raise ValueError(f"state oscillators must have negative modes, got {mode}")
        boson = {"aPhi": PHI, "aphi": PH, "achi": CH}[prefix]
        quanta.append((boson, -mode))
        pos = m.end()
    m = _STATE_KET.match(text, pos)
    if not m:
        raise ValueError(f"expected |l,s,t> at offset {pos} in {text!r}")
    state = FockState(Fraction(m.group(1)), int(m.group(2)), int(m.group(3)))
    for boson, n in quanta:
        state = state.add_quantum(boson, n)
    return state


class FockVector:
    """Finite linear combination of FockStates; coefficients are backend values."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = dict(terms) if terms else {}

    @staticmethod
    def unit(state: FockState, coeff):
        v = FockVector()
        v.terms[state] = coeff
        return v

    def add_term(self, state: FockState, coeff):
        cur = self.terms.get(state)
        new = coeff if cur is None else cur + coeff
        if new:
            self.terms[state] = new
        else:
            self.terms.pop(state, None)

    def __add__(self, other: "FockVector"):
        out = FockVector(self.terms)
        for st, c in other.terms.items():
            out.add_term(st, c)
        return out

    def __sub__(self, other: "FockVector"):
        out = FockVector(self.terms)
        for st, c in other.terms.items():
            out.add_term(st, -c)
        return out

    def scaled(self, c):
        if not c:
            return FockVector()
        return FockVector({st: v * c for st, v in self.terms.items()})

    def truncated(self, weight_cap: int):
        return FockVector({st: c for st, c in self.terms.items() if st.weight <= weight_cap})

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return isinstance(other, FockVector) and self.terms == other.terms

    def items_sorted(self):
        return sorted(self.terms.items(), key=lambda kv: kv[0].sort_key())

    def max_weight(self) -> int:
        return max((st.weight for st in self.terms), default=0)

    def uniform_charges(self):
        cs = {st.charges() for st in self.terms}
        if len(cs) == 1:
            return next(iter(cs))
        return None

    def render(self, render_coeff=str) -> str:
        if not self.terms:
            return "0"
        parts = []
        for st, c in self.items_sorted():
            parts.append(f"({render_coeff(c)}) {st.render()}")
        return "  +  ".join(parts)

    def __repr__(self):
        return f"FockVector<{len(self.terms)} terms>"


# ---------------------------------------------------------------------------
# oscillator action


def apply_oscillator(backend, boson: str, kind, v: FockVector) -> FockVector:
    """Apply a_{X,n} / e^{beta a_X} / d_X to a vector.

    kind is ("mode", n) with n != 0, ("charge_exp", beta) with beta a
    rational or RatK, or "charge_eigen".
    """
    tag = kind if isinstance(kind, str) else kind[0]
    out = FockVector()
    if tag == "mode":
        n = int(kind[1])
        if n == 0:
            raise ValueError("mode must be nonzero")
        if n < 0:
            for st, c in v.terms.items():
                out.add_term(st.add_quantum(boson, -n), c)
        else:
            kap = kappa(boson)
            for st, c in v.terms.items():
                mult = dict(st.occ_of(boson)).get(n, 0)
                if not mult:
                    continue
                red = st.remove_quantum(boson, n)
                out.add_term(red, c * backend.c_of(kap * (n * mult)))
    elif tag == "charge_exp":
        beta = kind[1]
        dl, ds, dt = charge_shift_units(boson, beta)
        for st, c in v.terms.items():
            out.add_term(st.shifted_charges(dl, ds, dt), c)
    elif tag == "charge_eigen":
        for st, c in v.terms.items():
            eig = st.charge_eigen(boson)
            if eig:
                out.add_term(st, c * backend.c_of(eig))
    else:
        raise ValueError(f"unknown oscillator kind {kind!r}")
    return out


def charge_shift_units(boson: str, beta):
    """Label shifts (dl, ds, dt) produced by e^{beta a_X}."""
    if boson == PHI:
        b = RatK.of(beta) * (K + 2)
        dl = b.as_fraction()  # raises if the shift is not rational
        return (dl, 0, 0)
    b = RatK.of(beta).as_fraction()
    if b.denominator != 1:
        raise ValueError(f"{boson} charge shift must be an integer, got {b}")
    if boson == PH:
        return (Fraction(0), b.numerator, 0)
    return (Fraction(0), 0, b.numerator)


def apply_d(backend, v: FockVector, weight_cap: int) -> FockVector:
    """Exact action of d = d_Phi + d_phi + d_chi; raises weight by one."""
    if v and v.max_weight() + 1 > weight_cap:
        raise CapExceededError(
            f"d would produce weight {v.max_weight() + 1} > cap {weight_cap}"
        )
    out = FockVector()
    for st, c in v.terms.items():
        for boson in BOSONS:
            # (1/kappa) a_{X,-1} d_X  --> coefficient <d_X>/kappa
            eig = st.charge_eigen(boson)
            if eig:
                coeff = RatK.of(eig) / kappa(boson)
                out.add_term(st.add_quantum(boson, 1), c * backend.c_of(coeff))
            # (1/kappa) sum_n a_{X,-(n+1)} a_{X,n}  --> n*mult, metric free
            for n, mult in st.occ_of(boson):
                red = st.remove_quantum(boson, n).add_quantum(boson, n + 1)
                out.add_term(red, c * backend.c_of(n * mult))
    return out


def translate(backend, gamma, v: FockVector, weight_cap: int) -> FockVector:
    """e^{gamma d} v truncated at weight_cap (finite: d raises weight by 1)."""
    gamma = Fraction(gamma)
    out = FockVector(v.truncated(weight_cap).terms)
    term = v.truncated(weight_cap)
    j = 0
    while term:
        j += 1
        feed = FockVector(
            {st: c for st, c in term.terms.items() if st.weight + 1 <= weight_cap}
        )
        if not feed:
            break
        term = apply_d(backend, feed, weight_cap).scaled(backend.c_of(gamma / j))
        for st, c in term.terms.items():
            out.add_term(st, c)
    return out


# ---------------------------------------------------------------------------
# graded bases


@lru_cache(maxsize=None)
def _partitions_colored(w: int, ncolors: int) -> int:
    # coefficient of q^w in prod_{n>=1} (1-q^n)^(-ncolors)
    counts = [1] + [0] * w
    for n in range(1, w + 1):
        for _ in range(ncolors):
            for i in range(n, w + 1):
                counts[i] += counts[i - n]
    return counts[w]


def graded_dimension(l, s, t, w: int) -> int:
    """Number of PBW basis states of weight w (independent of the charges)."""
    if w < 0:
        raise ValueError("weight must be >= 0")
    return _partitions_colored(w, 3)


@lru_cache(maxsize=None)
def _multisets_of_weight(w: int):
    """All occupation tuples ((n, mult), ...) of total weight w, descending n."""
    out = []

    def rec(remaining, max_mode, acc):
        if remaining == 0:
            out.append(tuple(acc))
            return
        for n in range(min(max_mode, remaining), 0, -1):
            for m in range(remaining // n, 0, -1):
                acc.append((n, m))
                rec(remaining - n * m, n - 1, acc)
                acc.pop()

    rec(w, w, [])
    return tuple(out)


def basis_states(l, s: int, t: int, w: int):
    """Deterministically ordered PBW basis of the weight-w component."""
    states = []
    for wa in range(w + 1):
        for wb in range(w - wa + 1):
            wc = w - wa - wb
            for pa in _multisets_of_weight(wa):
                for pb in _multisets_of_weight(wb):
                    for pc in _multisets_of_weight(wc):
                        states.append(FockState(l, s, t, (pa, pb, pc)))
    states.sort(key=lambda st: st.sort_key())
    return states


def basis_states_upto(l, s: int, t: int, wmax: int):
    out = []
    for w in range(wmax + 1):
        out.extend(basis_states(l, s, t, w))
    return out

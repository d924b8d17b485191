"""Independently implemented classical (deformation parameter -> 0) currents.

These are the level-k Wakimoto currents built from undeformed vertex
operators: every shifted argument collapses to u, so each pattern carries
a single u-power and no series expansion is needed.  The implementation
shares nothing with the mode engine; it is the oracle the deformed
currents' leading parts are compared against.

    e(u) -> :d_u(chi)(u) exp{-chi(u) - phi(u)}:
    f(u) -> :[(k+2) d_u(phi) + (k+1) d_u(chi) + 2 d_u(Phi)] exp{chi(u)+phi(u)}:
    (1/h)(h+(u) - h-(u)) -> 2 (d_u(phi)(u) + d_u(Phi)(u))

with d_u(X)(u) = d_X u^{-1} + sum_{n != 0} a_{X,n} u^{-n-1}.
"""

from __future__ import annotations

from fractions import Fraction

from .fock import BOSONS, CH, PH, PHI, FockState, FockVector, kappa
from .scalars import K, RatK


class ClassicalCurrent:
    """:L(u) * prod_X exp{beta_X X(u)}: with a linear prefactor L."""

    def __init__(self, name, linear, betas, charge_shift):
        self.name = name
        self.linear = tuple((b, RatK.of(c)) for b, c in linear)  # sum c * d_u(X)(u)
        self.betas = {b: Fraction(x) for b, x in betas.items() if x}
        self.charge_shift = charge_shift  # (dl, ds, dt)

    def mode(self, backend, m: int, v: FockVector, out_cap: int) -> FockVector:
        out = FockVector()
        for state, cin in v.terms.items():
            for st_out, coeff in self._columns(state, m, out_cap):
                out.add_term(st_out, cin * backend.c_of(coeff))
        return out

    # -- direct enumeration: single u-power per pattern
    def _columns(self, state: FockState, m: int, out_cap: int):
        dl, ds, dt = self.charge_shift
        power = 0
        for b, beta in self.betas.items():
            p = beta * state.charge_eigen(b)
            if p.denominator != 1:
                raise ValueError("classical vertex exponent must be integral")
            power += p.numerator

        results = []
        for w_rem, removals, fac_r in self._vertex_reductions(state):
            mid = state
            for boson, n, j in removals:
                mid = mid.remove_quantum(boson, n, j)
            base_u = -w_rem + power
            w_mid = mid.weight
            for lin_u, lin_fac, lin_apply in self._linear_choices(state, mid, out_cap):
                mid2 = lin_apply(mid) if lin_apply else mid
                if mid2 is None:
                    continue
                room = out_cap - mid2.weight
                if room < 0:
                    continue
                for w_add, adds, fac_a in self._vertex_additions(room):
                    u_exp = base_u + lin_u + w_add
                    if u_exp != -m - 1:
                        continue
                    st_out = mid2
                    for boson, n, j in adds:
                        st_out = st_out.add_quantum(boson, n, j)
                    st_out = st_out.shifted_charges(dl, ds, dt)
                    results.append((st_out, fac_r * lin_fac * fac_a))
        merged: dict = {}
        for st, c in results:
            merged[st] = merged.get(st, RatK.of(0)) + c
        return [(st, c) for st, c in merged.items() if c]

    def _vertex_reductions(self, state: FockState):
        entries = [(0, (), RatK.of(1))]
        for boson, beta in self.betas.items():
            for n, mult in state.occ_of(boson):
                opts = [(0, None, RatK.of(1))]
                fac = RatK.of(1)
                for j in range(1, mult + 1):
                    # exp{-beta sum (a_n / n) u^-n}: j quanta at level n
                    fac = fac * RatK.of(Fraction(-beta, n)) * kappa(boson) * n \
                        * Fraction(mult - j + 1, j)
                    opts.append((n * j, (boson, n, j), fac))
                nxt = []
                for w0, rem0, f0 in entries:
                    for wj, remj, fj in opts:
                        if remj is None:
                            nxt.append((w0, rem0, f0))
                        else:
                            nxt.append((w0 + wj, rem0 + (remj,), f0 * fj))
                entries = nxt
        return entries

    def _vertex_additions(self, room: int):
        # multisets over (boson with beta != 0, level) with weight <= room
        bosons = tuple(sorted(self.betas))
        entries = [(0, (), RatK.of(1))]
        if not bosons or room <= 0:
            return entries
        slots = [(b, n) for b in bosons for n in range(room, 0, -1)]

        def rec(start, left, spent, adds, fac):
            for idx in range(start, len(slots)):
                boson, n = slots[idx]
                if n > left:
                    continue
                beta = self.betas[boson]
                cur = fac
                for cnt in range(1, left // n + 1):
                    cur = cur * RatK.of(Fraction(beta, n)) / cnt
                    na = adds + ((boson, n, cnt),)
                    entries.append((spent + n * cnt, na, cur))
                    rec(idx + 1, left - n * cnt, spent + n * cnt, na, cur)

        rec(0, room, 0, (), RatK.of(1))
        entries.sort(key=lambda e: (e[0], e[1]))
        return entries

    def _linear_choices(self, state_in: FockState, mid: FockState, out_cap: int):
        """Expansion of the linear prefactor. Yields (u_exponent, factor, apply)."""
        if not self.linear:
            yield (0, RatK.of(1), None)
            return
        for boson, c in self.linear:
            # d_X u^-1 reads the input-state eigenvalue
            eig = state_in.charge_eigen(boson)
            if eig:
                yield (-1, c * RatK.of(eig), None)
            # annihilation a_{X,n} u^{-n-1} contracts against what is left
            for n, mult in mid.occ_of(boson):
                fac = c * kappa(boson) * (n * mult)

                def rm(st, b=boson, nn=n):
                    return st.remove_quantum(b, nn)

                yield (-n - 1, fac, rm)
            # creation a_{X,-n} u^{n-1}
            for n in range(1, out_cap - mid.weight + 1):

                def addq(st, b=boson, nn=n):
                    return st.add_quantum(b, nn)

                yield (n - 1, c, addq)


def classical_e() -> ClassicalCurrent:
    return ClassicalCurrent(
        "e_classical",
        linear=((CH, RatK.of(1)),),
        betas={CH: -1, PH: -1},
        charge_shift=(Fraction(0), -1, -1),
    )


def classical_f() -> ClassicalCurrent:
    return ClassicalCurrent(
        "f_classical",
        linear=((PH, K + 2), (CH, K + 1), (PHI, RatK.of(2))),
        betas={CH: 1, PH: 1},
        charge_shift=(Fraction(0), 1, 1),
    )


def classical_h() -> ClassicalCurrent:
    """The h-current limit 2(d_u(phi) + d_u(Phi)); no vertex factor."""
    return ClassicalCurrent(
        "h_classical",
        linear=((PH, RatK.of(2)), (PHI, RatK.of(2))),
        betas={},
        charge_shift=(Fraction(0), 0, 0),
    )

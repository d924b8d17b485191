"""Exact extraction of u-modes of vertex-operator expressions on Fock vectors.

The computational primitive: the coefficient of u^{-m-1} of a normal-ordered
primitive acting on a PBW basis state, computed by expanding annihilation
exponentials finitely (bounded by the state), creation exponentials up to
the output weight cap, and every shifted power (u+Ah)^e as
u^e (1 + A x)^e with x = h/u truncated at the order the target mode forces.
Matrix elements between fixed graded states come out as single h-monomials
of degree m + 1 + (w_out - w_in) + P, which also yields the sound
intermediate-cap bound max_weight_drop = m + 1 + P for compositions.

Columns (one basis state, one primitive, all modes up to a bound) are
cached aggressively; vector application is linear assembly over columns.
"""

from __future__ import annotations

from functools import lru_cache

from .fock import BOSONS, FockState, FockVector, apply_d, kappa
from .reports import ASSERTED, Check, RelationReport
from .scalars import RatK, binom_ratk
from .vopir import ANN, CRE, NormalizedExpr, Primitive


class NonConvergentWindowError(RuntimeError):
    """Stabilization fallback failed to converge; genuinely infinite sum."""


# ---------------------------------------------------------------------------
# truncated series in x = h/u with field coefficients


@lru_cache(maxsize=None)
def _binom_series_ratk(shift: RatK, expo: RatK, order: int):
    """(1 + shift*x)^expo to the given order, coefficients in Frac(Q[k])."""
    if order == 0:
        return (RatK.of(1),)
    prev = _binom_series_ratk(shift, expo, order - 1)
    return prev + (binom_ratk(expo, order) * shift**order,)


def _series_mul(a, b, order, zero):
    la, lb = len(a), len(b)
    if not la or not lb:
        return ()
    n = min(order + 1, la + lb - 1)
    out = [zero] * n
    for i, ca in enumerate(a):
        if not ca:
            continue
        jmax = min(lb, n - i)
        for j in range(jmax):
            cb = b[j]
            if cb:
                out[i + j] = out[i + j] + ca * cb
    return tuple(out)


class ModeEngine:
    """Per-backend evaluator with column caches."""

    def __init__(self, backend, max_mode_hint: int = 4):
        self.backend = backend
        self.max_mode_hint = int(max_mode_hint)
        self._mapped_binom = {}
        self._level_series = {}
        self._add_tables = {}
        self._expr_cols = {}
        self._keepalive = {}

    # -- series plumbing ----------------------------------------------------
    def _binom_series(self, shift: RatK, expo: RatK, order: int):
        key = (shift, expo)
        cur = self._mapped_binom.get(key)
        if cur is None or len(cur) <= order:
            raw = _binom_series_ratk(shift, expo, order)
            f = self.backend.f_from_ratk
            cur = tuple(f(c) for c in raw)
            self._mapped_binom[key] = cur
        return cur[: order + 1]

    def _level(self, prim: Primitive, boson: str, n: int, side: str, order: int):
        """Per-level leg coefficient series.

        ANN: sum of (alpha/n)(1+A x)^(-n); CRE: sum of (alpha/n)(1+A x)^n
        with frozen legs contributing (alpha A^n / n) x^n.  Returns None if
        the primitive has no legs of that side on that boson.
        """
        key = (id(prim), boson, n, side)
        got = self._level_series.get(key)
        if got is not None and (got[0] is None or len(got[1]) > order):
            return got[1][: order + 1] if got[0] is not None else None
        zero = self.backend.f_zero
        acc = [zero] * (order + 1)
        found = False
        for leg in prim.legs:
            if leg.boson != boson or leg.side != side:
                continue
            if leg.frozen and side == ANN:
                raise NotImplementedError("frozen annihilation legs are unsupported")
            found = True
            coeff = self.backend.f_from_ratk(leg.alpha / n)
            if leg.frozen:
                if n <= order:
                    c = coeff * self.backend.f_from_ratk(leg.shift**n)
                    if c:
                        acc[n] = acc[n] + c
            else:
                expo = RatK.of(-n if side == ANN else n)
                ser = self._binom_series(leg.shift, expo, order)
                for i, c in enumerate(ser):
                    if c:
                        acc[i] = acc[i] + coeff * c
        if not found:
            self._level_series[key] = (None, ())
            return None
        res = tuple(acc)
        self._level_series[key] = (True, res)
        return res

    # -- creation (addition) tables -------------------------------------------
    def _additions(self, prim: Primitive, w_max: int, order: int):
        """Creation multisets of weight <= w_max with factor series, sorted
        by weight.  Entries: (w_add, additions, series) with additions a
        tuple of (boson, n, count) and series = prod c_{X,n}^count / count!.
        """
        key = id(prim)
        got = self._add_tables.get(key)
        if got is not None:
            w0, o0, entries = got
            if w0 >= w_max and o0 >= order:
                if w0 == w_max:
                    return entries
                out = []
                for e in entries:
                    if e[0] > w_max:
                        break
                    out.append(e)
                return out
            w_max = max(w_max, w0)
            order = max(order, o0)
        bosons = tuple(sorted({leg.boson for leg in prim.legs if leg.side == CRE}))
        zero = self.backend.f_zero
        one = self.backend.f_one
        entries = [(0, (), (one,))]
        slots = [(b, n) for b in bosons for n in range(w_max, 0, -1)]

        def rec(start, w_left, w_spent, adds, ser):
            for idx in range(start, len(slots)):
                boson, n = slots[idx]
                if n > w_left:
                    continue
                lvl = self._level(prim, boson, n, CRE, order)
                if lvl is None:
                    continue
                cur = ser
                for cnt in range(1, w_left // n + 1):
                    cur = _series_mul(cur, lvl, order, zero)
                    cur = tuple(c / cnt for c in cur)
                    if not any(cur):
                        break
                    na = adds + ((boson, n, cnt),)
                    entries.append((w_spent + n * cnt, na, cur))
                    rec(idx + 1, w_left - n * cnt, w_spent + n * cnt, na, cur)

        if bosons and w_max > 0:
            rec(0, w_max, 0, (), (one,))
        entries.sort(key=lambda e: (e[0], e[1]))
        self._add_tables[key] = (w_max, order, entries)
        return entries

    # -- reductions ------------------------------------------------------------
    def _reductions(self, prim: Primitive, state: FockState, order: int):
        """Annihilation patterns on `state`: (w_removed, removals, factor, series)."""
        one = self.backend.f_one
        zero = self.backend.f_zero
        entries = [(0, (), one, (one,))]
        for boson in BOSONS:
            occ = state.occ_of(boson)
            if not occ:
                continue
            for n, mult in occ:
                lvl = self._level(prim, boson, n, ANN, order)
                if lvl is None:
                    continue
                kap = kappa(boson)
                opts = [(0, None, one, (one,))]
                ser = (one,)
                for j in range(1, mult + 1):
                    ser = _series_mul(ser, lvl, order, zero)
                    fac = self.backend.f_from_ratk(
                        binom_ratk(RatK.of(mult), j) * (kap * n) ** j
                    )
                    opts.append((n * j, (boson, n, j), fac, ser))
                nxt = []
                for w0, rem0, f0, s0 in entries:
                    for wj, remj, fj, sj in opts:
                        if remj is None:
                            nxt.append((w0, rem0, f0, s0))
                        else:
                            nxt.append(
                                (w0 + wj, rem0 + (remj,), f0 * fj,
                                 _series_mul(s0, sj, order, zero))
                            )
                entries = nxt
        return entries

    # -- primitive columns ------------------------------------------------------
    def _prim_columns(self, prim: Primitive, state: FockState, out_cap: int, m_hi: int):
        """dict out_state -> dict mode -> field coeff, exact for weights <= out_cap
        and modes <= m_hi.  The h-degree of entry (st_out, m) is
        m + 1 + (st_out.weight - state.weight) + P  (before hbar_div)."""
        P = prim.power_exponent_on(state)
        w_in = state.weight
        D_max = m_hi + 1 + (out_cap - w_in) + P
        cols: dict = {}
        if D_max < 0:
            return cols, P
        zero = self.backend.f_zero
        pser = (self.backend.f_one,)
        for pf in prim.powers:
            e = pf.exponent_on(state)
            if not e:
                continue
            pser = _series_mul(pser, self._binom_series(pf.shift, e, D_max), D_max, zero)
        overall = self.backend.f_from_ratk(prim.overall)
        dl, ds, dt = prim.charges
        for w_rem, removals, fac_r, ser_r in self._reductions(prim, state, D_max):
            w_left = out_cap - (w_in - w_rem)
            if w_left < 0:
                continue
            base = _series_mul(ser_r, pser, D_max, zero)
            if not any(base):
                continue
            mid = state
            for boson, n, cnt in removals:
                mid = mid.remove_quantum(boson, n, cnt)
            mid = mid.shifted_charges(dl, ds, dt)
            fac = overall * fac_r
            for w_add, adds, ser_a in self._additions(prim, w_left, D_max):
                if w_add > w_left:
                    break
                E = w_add - w_rem + P
                full = _series_mul(base, ser_a, D_max, zero)
                out_state = mid
                for boson, n, cnt in adds:
                    out_state = out_state.add_quantum(boson, n, cnt)
                tgt = None
                for d, c in enumerate(full):
                    if not c:
                        continue
                    m = d - 1 - E
                    if m > m_hi:
                        break
                    if tgt is None:
                        tgt = cols.setdefault(out_state, {})
                    contrib = fac * c
                    cur = tgt.get(m)
                    tgt[m] = contrib if cur is None else cur + contrib
        for st in list(cols):
            d = {m: c for m, c in cols[st].items() if not self.backend.f_is_zero(c)}
            if d:
                cols[st] = d
            else:
                del cols[st]
        return cols, P

    def _columns(self, nexpr: NormalizedExpr, state: FockState, out_cap: int, m_hi: int):
        """Per-state columns of a normalized expression with h-division done:
        dict out_state -> dict mode -> vector coefficient."""
        key = (id(nexpr), state)
        entry = self._expr_cols.get(key)
        if entry is not None:
            cap0, mhi0, data = entry
            if cap0 >= out_cap and mhi0 >= m_hi:
                return data
            out_cap = max(out_cap, cap0)
            m_hi = max(m_hi, mhi0)
        else:
            self._keepalive[id(nexpr)] = nexpr
        D = nexpr.max_hdiv
        numer: dict = {}
        w_in = state.weight
        for w, prim in nexpr.terms:
            wconv = self.backend.c_of(w)
            cols, P = self._prim_columns(prim, state, out_cap, m_hi)
            pad = D - prim.hbar_div
            for st_out, modes in cols.items():
                dw = st_out.weight - w_in
                tgt = numer.setdefault(st_out, {})
                for m, f in modes.items():
                    dexp = m + 1 + dw + P + pad
                    contrib = wconv * self.backend.c_make(f, dexp)
                    cur = tgt.get(m)
                    tgt[m] = contrib if cur is None else cur + contrib
        data: dict = {}
        for st_out, modes in numer.items():
            od = {}
            for m, c in modes.items():
                if self.backend.c_is_zero(c):
                    continue
                od[m] = self.backend.c_div_hbar(c, D) if D else c
            if od:
                data[st_out] = od
        self._expr_cols[key] = (out_cap, m_hi, data)
        return data

    # -- public application -------------------------------------------------------
    def apply_mode(self, nexpr: NormalizedExpr, m: int, v: FockVector,
                   out_cap: int) -> FockVector:
        """Exact coefficient of u^{-m-1} of nexpr(u) * v, on weights <= out_cap."""
        m_hi = max(m, self.max_mode_hint)
        out = FockVector()
        for state, cin in v.terms.items():
            cols = self._columns(nexpr, state, out_cap, m_hi)
            for st_out, modes in cols.items():
                if st_out.weight > out_cap:
                    continue
                c = modes.get(m)
                if c is not None:
                    out.add_term(st_out, cin * c)
        return out

    def clear_caches(self):
        self._mapped_binom.clear()
        self._level_series.clear()
        self._add_tables.clear()
        self._expr_cols.clear()
        self._keepalive.clear()


# ---------------------------------------------------------------------------
# mode operators and composition


class ModeOperator:
    """A mode-indexed exact linear action on Fock vectors."""

    def apply(self, engine: ModeEngine, v: FockVector, out_cap: int) -> FockVector:
        raise NotImplementedError

    def weight_drop(self, charges) -> int:
        raise NotImplementedError

    def charge_shift(self):
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError


class ExprModeOp(ModeOperator):
    def __init__(self, nexpr: NormalizedExpr, mode: int):
        self.nexpr = nexpr
        self.mode = int(mode)

    def apply(self, engine, v, out_cap):
        return engine.apply_mode(self.nexpr, self.mode, v, out_cap)

    def weight_drop(self, charges):
        probe = FockState(*charges)
        return max(0, self.nexpr.max_weight_drop(self.mode, probe))

    def charge_shift(self):
        return self.nexpr.charges

    def describe(self):
        return f"{self.nexpr.name}[{self.mode}]"


class DOp(ModeOperator):
    """The derivation d; raises weight by exactly one."""

    def apply(self, engine, v, out_cap):
        feed = FockVector(
            {st: c for st, c in v.terms.items() if st.weight + 1 <= out_cap}
        )
        return apply_d(engine.backend, feed, out_cap)

    def weight_drop(self, charges):
        return -1

    def charge_shift(self):
        from fractions import Fraction

        return (Fraction(0), 0, 0)

    def describe(self):
        return "d"


class LinearCombinationOp(ModeOperator):
    """Scalar-weighted sum of compositions; used for commutator towers."""

    def __init__(self, branches, name: str):
        # branches: list of (Scalar coefficient, [ModeOperator ... applied right to left])
        self.branches = branches
        self.name = name

    def apply(self, engine, v, out_cap):
        out = FockVector()
        for coeff, ops in self.branches:
            acc = compose_apply(engine, ops, v, out_cap)
            acc = acc.scaled(engine.backend.c_of(coeff))
            for st, c in acc.terms.items():
                out.add_term(st, c)
        return out

    def weight_drop(self, charges):
        worst = 0
        for _, ops in self.branches:
            worst = max(worst, _chain_drop(ops, charges))
        return worst

    def charge_shift(self):
        shifts = set()
        for _, ops in self.branches:
            dl, ds, dt = 0, 0, 0
            for op in ops:
                a, b, c = op.charge_shift()
                dl, ds, dt = dl + a, ds + b, dt + c
            shifts.add((dl, ds, dt))
        if len(shifts) != 1:
            raise ValueError("non-uniform charge shift in combination")
        return next(iter(shifts))

    def describe(self):
        return self.name


def _chain_drop(ops, charges):
    """Total weight drop of a composition (operator-product order)."""
    # walk right to left tracking the charge sector each op sees
    l, s, t = charges
    sector = [charges] * len(ops)
    for i in range(len(ops) - 1, -1, -1):
        sector[i] = (l, s, t)
        dl, ds, dt = ops[i].charge_shift()
        l, s, t = l + dl, s + ds, t + dt
    total = 0
    for i in range(len(ops)):
        total += ops[i].weight_drop(sector[i])
    return total


def compose_apply(engine: ModeEngine, ops, v: FockVector, out_cap: int,
                  intermediate_cap="auto") -> FockVector:
    """Apply ops right-to-left (operator-product order), exact to out_cap.

    Intermediate caps follow the analytic drop bound: the input of stage i
    must be exact to (cap of its output) + drop(stage i's successor...).
    """
    if not ops:
        return v.truncated(out_cap)
    charge_set = {st.charges() for st in v.terms} or {(0, 0, 0)}
    caps = [0] * len(ops)
    caps[0] = out_cap
    if intermediate_cap == "auto":
        drops = [0] * len(ops)
        for charges in charge_set:
            l, s, t = charges
            sectors = [None] * len(ops)
            for i in range(len(ops) - 1, -1, -1):
                sectors[i] = (l, s, t)
                dl, ds, dt = ops[i].charge_shift()
                l, s, t = l + dl, s + ds, t + dt
            for i in range(len(ops)):
                drops[i] = max(drops[i], ops[i].weight_drop(sectors[i]))
        for i in range(1, len(ops)):
            # output cap of the stage applying ops[i] (deeper in the chain)
            caps[i] = max(0, caps[i - 1] + drops[i - 1])
    else:
        for i in range(1, len(ops)):
            caps[i] = int(intermediate_cap)
    cur = v
    for i in range(len(ops) - 1, -1, -1):
        cur = ops[i].apply(engine, cur, caps[i])
        if not cur:
            break
    return cur.truncated(out_cap)


def compose_apply_stabilized(engine, ops, v, out_cap, step=2, repeats=3):
    """Stabilization fallback: enlarge a flat intermediate cap until the
    out-window stops changing twice in a row."""
    base = out_cap + step
    prev = None
    agree = 0
    for _ in range(repeats + 2):
        cur = compose_apply(engine, ops, v, out_cap, intermediate_cap=base)
        if prev is not None and cur == prev:
            agree += 1
            if agree >= 1:
                return cur
        else:
            agree = 0
        prev = cur
        base += step
    raise NonConvergentWindowError(
        f"no stabilization after {repeats} enlargements (cap {base})"
    )


# ---------------------------------------------------------------------------
# generic relation checkers (shared by the Fock and evaluation backends)


def _residual_entries(vec, render):
    return [[st.render(), render(c)] for st, c in vec.items_sorted()]


def check_bilinear(adapter, relation: str, A, B, P_L, P_R, mode_pairs, probes,
                   severity=ASSERTED) -> RelationReport:
    """Cleared-denominator bilinear exchange relation.

    Asserts, for each (m, n) and probe,

      sum_j p^L_j sum_i C(j,i)(-1)^(j-i) A_{m+i} B_{n+j-i}
        - sum_j p^R_j sum_i C(j,i)(-1)^(j-i) B_{n+j-i} A_{m+i}  == 0

    where P_L = [p^L_0, p^L_1, ...] are Scalar coefficients of powers of
    x = u - v.  `adapter` supplies mode application and vector arithmetic
    for the module backend in use.
    """
    report = RelationReport(relation, adapter.report_params(A=A, B=B))
    from math import comb

    for m, n in mode_pairs:
        for probe in probes:
            resid = None
            for side, P in (("L", P_L), ("R", P_R)):
                sgn_side = 1 if side == "L" else -1
                for j, pj in enumerate(P):
                    if not pj:
                        continue
                    for i in range(j + 1):
                        c = comb(j, i) * ((-1) ** (j - i)) * sgn_side
                        if side == "L":
                            ops = [(A, m + i), (B, n + j - i)]
                        else:
                            ops = [(B, n + j - i), (A, m + i)]
                        term = adapter.compose(ops, probe)
                        term = adapter.scale(term, pj * c)
                        resid = term if resid is None else adapter.add(resid, term)
            ok = adapter.is_zero(resid)
            report.add(
                Check(
                    check_id=relation,
                    status="pass" if ok else "fail",
                    severity=severity,
                    modes=(m, n),
                    probe=adapter.render_probe(probe),
                    residual=None if ok else adapter.render_residual(resid),
                )
            )
    return report


def check_ef_delta(adapter, relation: str, mode_pairs, probes,
                   severity=ASSERTED) -> RelationReport:
    """[e_m, f_n] = (1/h)(T+_{m,n} - T-_{m,n}) with the shift c supplied by
    the adapter (c = k on the Fock backend, c = 0 on the evaluation module).

    T+ is the v^{-n-1} coefficient of (v+ch)^m h+(v+ch); T- is the
    v^{-(m+n)-1} coefficient of h-(v); the constant parts of h+- enter
    automatically.  The 1/h division must be exact; a NonDivisibleError is
    reported as a failed check, never skipped.
    """
    report = RelationReport(relation, adapter.report_params())
    for m, n in mode_pairs:
        for probe in probes:
            try:
                lhs = adapter.sub(
                    adapter.compose([("e", m), ("f", n)], probe),
                    adapter.compose([("f", n), ("e", m)], probe),
                )
                tplus = adapter.shifted_hp_mode(m, n, probe)
                tminus = adapter.compose([("hm", m + n)], probe)
                rhs = adapter.div_hbar(adapter.sub(tplus, tminus))
                resid = adapter.sub(lhs, rhs)
                ok = adapter.is_zero(resid)
                detail = None
                residual = None if ok else adapter.render_residual(resid)
            except Exception as exc:  # NonDivisible and window errors fail loudly
                ok = False
                detail = {"error": f"{type(exc).__name__}: {exc}"}
                residual = None
            report.add(
                Check(
                    check_id=relation,
                    status="pass" if ok else "fail",
                    severity=severity,
                    modes=(m, n),
                    probe=adapter.render_probe(probe),
                    detail=detail,
                    residual=residual,
                )
            )
    return report

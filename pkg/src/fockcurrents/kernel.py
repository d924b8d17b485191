"""Deformed-module kernel tables.

eta0 maps F_{l,s,s} -> F_{l,s,s+1}; the deformed module is its kernel.
Each matrix element from a weight-w source state to a weight-w' target is
a single h-monomial of degree 1 + s + (w' - w), so rows can be stripped
of h and the rank computed over Frac(Q[k]) by fraction-free (Bareiss)
elimination on a denominator-cleared polynomial matrix.  Specialized
reruns at rational k confirm the symbolic ranks.

Target weights are truncated; the truncation is extended until the rank
is stable for two consecutive extensions (deterministic, recorded in the
table row).
"""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction

from .algebra import current_eta
from .fock import FockVector, basis_states
from .modeengine import ModeEngine
from .scalars import RatK, Scalar, _padd, _pdivmod, _pmul, _pneg


def _poly_sub(a, b):
    return _padd(a, _pneg(b))


def bareiss_rank_poly(rows):
    """Rank of a matrix with Q[k] entries (tuples of Fractions) by Bareiss."""
    m = [list(r) for r in rows]
    nr = len(m)
    if not nr:
        return 0
    nc = len(m[0])
    rank = 0
    prev = (Fraction(1),)
    r = 0
    for c in range(nc):
        piv = None
        for i in range(r, nr):
            if m[i][c]:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(r + 1, nr):
            for j in range(c + 1, nc):
                num = _poly_sub(_pmul(m[r][c], m[i][j]), _pmul(m[i][c], m[r][j]))
                if num:
                    q, rem = _pdivmod(num, prev)
                    if rem:
                        raise ArithmeticError("Bareiss exact division failed")
                    m[i][j] = q
                else:
                    m[i][j] = ()
            m[i][c] = ()
        prev = m[r][c]
        r += 1
        rank += 1
        if r == nr:
            break
    return rank


def bareiss_rank_fraction(rows):
    """Rank over Q (entries Fractions); plain fraction-free elimination."""
    m = [list(r) for r in rows]
    nr = len(m)
    if not nr:
        return 0
    nc = len(m[0])
    rank = 0
    prev = Fraction(1)
    r = 0
    for c in range(nc):
        piv = None
        for i in range(r, nr):
            if m[i][c]:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(r + 1, nr):
            for j in range(c + 1, nc):
                m[i][j] = (m[r][c] * m[i][j] - m[i][c] * m[r][j]) / prev
            m[i][c] = Fraction(0)
        prev = m[r][c]
        r += 1
        rank += 1
        if r == nr:
            break
    return rank


def _strip_monomial(coeff: Scalar, expected_deg: int) -> RatK:
    cs = coeff.coeffs
    if not cs:
        return RatK.of(0)
    if len(cs) != 1 or cs[0][0] != expected_deg:
        raise AssertionError(
            f"eta0 matrix element is not the expected h-monomial: {coeff.render()}"
        )
    return cs[0][1]


class KernelTable:
    """Per-weight kernel dimensions of eta0 on F_{l,s,s}."""

    def __init__(self, l, s: int, k_mode: str):
        self.l = Fraction(l)
        self.s = int(s)
        self.k_mode = k_mode
        self.rows = []  # dicts: w, dim, rank, ker, target_cap

    def add_row(self, w, dim, rank, target_cap):
        self.rows.append(
            {"w": w, "dim": dim, "rank": rank, "ker": dim - rank,
             "target_cap": target_cap}
        )

    def to_json_dict(self):
        return {
            "l": str(self.l),
            "s": self.s,
            "k": self.k_mode,
            "rows": self.rows,
        }

    def to_json(self):
        return json.dumps(self.to_json_dict(), indent=2) + "\n"

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["l", "s", "w", "dim", "rank", "ker", "target_cap"])
        for r in self.rows:
            w.writerow([self.l, self.s, r["w"], r["dim"], r["rank"], r["ker"],
                        r["target_cap"]])
        return buf.getvalue()


def eta0_blocks(engine: ModeEngine, l, s: int, w: int, target_cap: int):
    """Stacked eta0 matrix from the weight-w source component, h stripped.

    Rows indexed by target basis states of weight <= target_cap in
    F_{l,s,s+1}; columns by source basis states; entries in Frac(Q[k])
    (or Fractions on a specialized backend).
    """
    eta = current_eta()
    sources = basis_states(l, s, s, w)
    targets = []
    index = {}
    for wt in range(max(0, w - (s + 1)), target_cap + 1):
        for st in basis_states(l, s, s + 1, wt):
            index[st] = len(targets)
            targets.append(st)
    symbolic = engine.backend.name == "symbolic"
    empty = ((), (Fraction(1),)) if symbolic else Fraction(0)
    rows = [[empty] * len(sources) for _ in targets]
    for col, src in enumerate(sources):
        uv = FockVector.unit(src, engine.backend.c_of(1))
        img = engine.apply_mode(eta, 0, uv, target_cap)
        for st, c in img.terms.items():
            i = index.get(st)
            if i is None:
                continue
            if symbolic:
                r = _strip_monomial(c, 1 + s + (st.weight - w))
                rows[i][col] = _clear_ratk(r)
            else:
                rows[i][col] = c
    return rows, len(sources)


def _clear_ratk(r: RatK):
    # row entries share the same h-power; clearing each entry's k-denominator
    # changes the row by a nonzero scale only after a common-denominator pass,
    # so multiply through num * (den-inverse as a polynomial is not available):
    # instead return num when den == 1, else scale by den via cross terms.
    return (r.num, r.den)


def _rows_to_poly(rows):
    """Clear denominators row-wise: each entry is (num, den) in Q[k]."""
    out = []
    for row in rows:
        dens = [d for (_, d) in row if d != (Fraction(1),)]
        common = (Fraction(1),)
        for d in dens:
            common = _pmul(common, d)
        new_row = []
        for (n, d) in row:
            if not n:
                new_row.append(())
                continue
            q, rem = _pdivmod(common, d)
            assert not rem
            new_row.append(_pmul(n, q))
        out.append(new_row)
    return out


def kernel_dimensions(engine: ModeEngine, l, s: int, w_max: int,
                      extra_cap: int = 4) -> KernelTable:
    """dim / rank / kernel table for eta0 on F_{l,s,s} up to weight w_max.

    The target truncation starts at the structural minimum and is extended
    until the rank is unchanged twice in a row (or extra_cap is hit).
    """
    symbolic = engine.backend.name == "symbolic"
    table = KernelTable(l, s, "symbolic" if symbolic else "specialized")
    for w in range(w_max + 1):
        dim = len(basis_states(l, s, s, w))
        best_rank = 0
        stable = 0
        used_cap = w
        cap = max(0, w - (s + 1))
        while True:
            rows, ncols = eta0_blocks(engine, l, s, w, cap)
            if symbolic:
                rank = bareiss_rank_poly(_rows_to_poly(rows))
            else:
                rank = bareiss_rank_fraction(rows)
            if rank == best_rank:
                stable += 1
            else:
                best_rank = rank
                stable = 0
            used_cap = cap
            if best_rank >= dim or (stable >= 1 and cap >= w) or cap >= w + extra_cap:
                break
            cap += 1
        table.add_row(w, dim, best_rank, used_cap)
    return table

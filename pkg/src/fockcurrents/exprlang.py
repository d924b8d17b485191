"""Operator-word grammar used by the command line.

    expr  := term (('+' | '-') term)*
    term  := [rational] atom+
    atom  := name params? mode?
    name  := 'e' | 'f' | 'hp' | 'hm' | 'S' | 'xi0' | 'eta0' | 'd'
    params:= '{' key '=' value (',' key '=' value)* '}'
    mode  := '[' integer ']'

Atoms in a term compose right-to-left.  e/f/hp/hm/S require a mode index;
xi0/eta0/d take none.  Example: "hp[1] - hm[-1]", "1/2 e[0] f[0]",
"S{J=2}[0] eta0".
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at offset {pos}")
        self.pos = pos


MODENAMES = ("hp", "hm", "eta0", "xi0", "e", "f", "S", "d")
_NEEDS_MODE = {"e", "f", "hp", "hm", "S"}
_NO_MODE = {"xi0", "eta0", "d"}

_WS = re.compile(r"\s*")
_RATIONAL = re.compile(r"(-?\d+(?:/\d+)?)(?!\w|\[|\{)")
_NAME = re.compile(r"(hp|hm|eta0|xi0|e|f|S|d)\b|\b")
_INT = re.compile(r"-?\d+")


@dataclass
class Atom:
    name: str
    mode: int | None = None
    params: dict = field(default_factory=dict)


@dataclass
class Term:
    coeff: Fraction
    atoms: list


def _skip_ws(text, pos):
    return _WS.match(text, pos).end()


def _parse_atom(text, pos):
    for name in MODENAMES:
        if text.startswith(name, pos):
            nxt = pos + len(name)
            if nxt < len(text) and (text[nxt].isalnum() or text[nxt] == "_"):
                continue
            break
    else:
        raise ExprSyntaxError("expected generator name", pos)
    pos += len(name)
    params = {}
    if pos < len(text) and text[pos] == "{":
        end = text.find("}", pos)
        if end < 0:
            raise ExprSyntaxError("unterminated parameter block", pos)
        body = text[pos + 1 : end]
        for piece in body.split(","):
            if not piece.strip():
                continue
            if "=" not in piece:
                raise ExprSyntaxError(f"bad parameter {piece!r}", pos)
            k, v = piece.split("=", 1)
            params[k.strip()] = v.strip()
        pos = end + 1
    mode = None
    if pos < len(text) and text[pos] == "[":
        m = _INT.match(text, pos + 1)
        if not m or text[m.end() : m.end() + 1] != "]":
            raise ExprSyntaxError("expected integer mode in brackets", pos + 1)
        mode = int(m.group(0))
        pos = m.end() + 1
    if name in _NEEDS_MODE and mode is None:
        raise ExprSyntaxError(f"generator {name!r} requires a mode like {name}[0]", pos)
    if name in _NO_MODE and mode is not None:
        raise ExprSyntaxError(f"generator {name!r} takes no mode index", pos)
    return Atom(name, mode, params), pos


def parse_expr(text: str):
    """Parse an operator word into a list of Terms."""
    terms = []
    pos = _skip_ws(text, 0)
    if pos >= len(text):
        raise ExprSyntaxError("empty expression", pos)
    sign = Fraction(1)
    first = True
    while pos < len(text):
        if not first:
            if text[pos] == "+":
                sign = Fraction(1)
            elif text[pos] == "-":
                sign = Fraction(-1)
            else:
                raise ExprSyntaxError("expected '+' or '-' between terms", pos)
            pos = _skip_ws(text, pos + 1)
        coeff = sign
        m = _RATIONAL.match(text, pos)
        if m:
            coeff = sign * Fraction(m.group(1))
            pos = _skip_ws(text, m.end())
        atoms = []
        while pos < len(text) and text[pos] not in "+-":
            atom, pos = _parse_atom(text, pos)
            atoms.append(atom)
            pos = _skip_ws(text, pos)
        if not atoms:
            raise ExprSyntaxError("term has no generators", pos)
        terms.append(Term(coeff, atoms))
        first = False
        pos = _skip_ws(text, pos)
    return terms


def bind_terms(terms):
    """Resolve parsed terms into a ModeOperator (composition right-to-left)."""
    from .algebra import CURRENTS, current_screening, zero_mode
    from .modeengine import DOp, ExprModeOp, LinearCombinationOp
    from .scalars import Scalar

    branches = []
    for term in terms:
        ops = []
        for atom in term.atoms:
            if atom.name in ("e", "f", "hp", "hm"):
                ops.append(ExprModeOp(CURRENTS[atom.name](), atom.mode))
            elif atom.name == "S":
                J = int(atom.params.get("J", 0))
                ops.append(ExprModeOp(current_screening(J), atom.mode))
            elif atom.name in ("xi0", "eta0"):
                ops.append(zero_mode(atom.name))
            elif atom.name == "d":
                ops.append(DOp())
            else:  # pragma: no cover - grammar prevents this
                raise ValueError(atom.name)
        branches.append((Scalar.of(term.coeff), ops))
    if len(branches) == 1 and branches[0][0] == Scalar.of(1):
        pass
    return LinearCombinationOp(branches, "word")

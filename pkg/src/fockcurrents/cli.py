"""Command-line front end.

    fockcurrents verify --suite theorem31 [--config cfg.json] [--out report.json]
    fockcurrents act --expr "e[0] f[0]" --state "|1,0,0>" --max-weight 3
    fockcurrents kernel --l 0 --s 0 --max-weight 2 [--out table.json]
    fockcurrents character --max-weight 4
    fockcurrents study screening --J 0:4 --k 3 --hbar 1/10 [--float]
    fockcurrents study vertex --type I --l 1 --J 1:4 --delta 1/10,1/100 --k 3 --hbar 1/10

Exit codes: 0 all asserted checks pass; 1 some check failed (or an
operator application error); 2 usage or configuration error; 3 a global
resource limit was exceeded.  Flagged cross-checks never affect the exit
code.  All output is exact rationals unless --float is given to a study.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import jsonschema

from .backends import SYMBOLIC
from .exprlang import ExprSyntaxError, bind_terms, parse_expr
from .fock import FockVector, graded_dimension, parse_state
from .kernel import kernel_dimensions
from .modeengine import ModeEngine, compose_apply
from .scalars import NonDivisibleError, NonSingleValuedError
from .suites import (
    SUITE_IDS,
    SuiteConfig,
    SuiteConfigError,
    run_suite,
    screening_convergence_study,
    vertex_residual_study,
)

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "suite": {"type": "string"},
        "backend": {"enum": ["fock", "eval"]},
        "k": {"type": "string"},
        "hbar": {"type": "string"},
        "charges": {
            "type": "array",
            "items": {
                "type": "array",
                "minItems": 3,
                "maxItems": 3,
                "items": [{"type": "string"}, {"type": "integer"}, {"type": "integer"}],
            },
        },
        "max_probe_weight": {"type": "integer", "minimum": 0},
        "mode_window": {"type": "array", "minItems": 4, "maxItems": 4,
                        "items": {"type": "integer"}},
        "out_weight_cap": {"type": "integer", "minimum": 0},
        "J": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "delta": {"type": "string"},
        "eval_l": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "power_window": {"type": "integer", "minimum": 1},
        "threads": {"type": "integer", "minimum": 0},
        "limits": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "max_weight": {"type": "integer", "minimum": 0},
                "max_J": {"type": "integer", "minimum": 0},
                "time_budget_s": {"type": ["number", "null"]},
            },
        },
    },
}

DEFAULT_LIMITS = {"max_weight": 8, "max_J": 8, "time_budget_s": None}


def load_config(path) -> tuple[dict, dict]:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    jsonschema.validate(raw, CONFIG_SCHEMA)
    limits = dict(DEFAULT_LIMITS)
    limits.update(raw.pop("limits", {}))
    return raw, limits


def config_from_args(args, raw: dict) -> SuiteConfig:
    kw = {}
    if "charges" in raw:
        kw["charges"] = tuple((Fraction(l), s, t) for l, s, t in raw["charges"])
    for src, dst in (("backend", "backend"), ("k", "k"), ("hbar", "hbar"),
                     ("max_probe_weight", "max_probe_weight"),
                     ("out_weight_cap", "out_weight_cap"),
                     ("power_window", "power_window"), ("threads", "threads")):
        if src in raw:
            kw[dst] = raw[src]
    if "mode_window" in raw:
        kw["mode_window"] = tuple(raw["mode_window"])
    if "J" in raw:
        kw["J_values"] = tuple(raw["J"])
    if "delta" in raw:
        kw["delta"] = Fraction(raw["delta"])
    if "eval_l" in raw:
        kw["eval_l"] = tuple(raw["eval_l"])
    return SuiteConfig(suite=args.suite or raw.get("suite", ""), **kw)


def _write_out(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def cmd_verify(args) -> int:
    try:
        raw, limits = load_config(args.config) if args.config else ({}, dict(DEFAULT_LIMITS))
        cfg = config_from_args(args, raw)
        cfg.validate()
    except (SuiteConfigError, jsonschema.ValidationError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if cfg.max_probe_weight > limits["max_weight"]:
        print("resource limit: max_probe_weight exceeds limits.max_weight",
              file=sys.stderr)
        return 3
    if cfg.J_values and max(cfg.J_values) > limits["max_J"]:
        print("resource limit: J exceeds limits.max_J", file=sys.stderr)
        return 3
    report = run_suite(cfg)
    summary = report.summary
    print(f"suite {cfg.suite}: pass={summary['pass']} fail={summary['fail']} "
          f"skipped={summary['skipped']} flagged={summary['flagged']} "
          f"[{report.elapsed_s:.1f}s]")
    for c in report.failed_checks()[:20]:
        print(f"  FAIL {c.check_id} modes={c.modes} probe={c.probe}")
    if args.out:
        _write_out(args.out, report.to_json())
    return 0 if report.all_passed() else 1


def cmd_act(args) -> int:
    try:
        terms = parse_expr(args.expr)
        state = parse_state(args.state)
    except (ExprSyntaxError, ValueError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    be = SYMBOLIC
    engine = ModeEngine(be)
    op = bind_terms(terms)
    uv = FockVector.unit(state, be.c_of(1))
    try:
        out = op.apply(engine, uv, args.max_weight)
    except (NonSingleValuedError, NonDivisibleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out.render(be.c_render))
    return 0


def cmd_kernel(args) -> int:
    if args.max_weight > args.limit_weight:
        print("resource limit: --max-weight above limit", file=sys.stderr)
        return 3
    be = SYMBOLIC
    engine = ModeEngine(be)
    try:
        table = kernel_dimensions(engine, Fraction(args.l), args.s, args.max_weight)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(table.to_csv())
    if args.out:
        _write_out(args.out, table.to_json())
    return 0


def cmd_character(args) -> int:
    if args.max_weight < 0:
        print("usage error: --max-weight must be >= 0", file=sys.stderr)
        return 2
    rows = [(w, graded_dimension(0, 0, 0, w)) for w in range(args.max_weight + 1)]
    print("w,dim")
    for w, d in rows:
        print(f"{w},{d}")
    if args.out:
        _write_out(args.out, json.dumps({"dims": [d for _, d in rows]}, indent=2) + "\n")
    return 0


def _parse_range(text: str):
    if ":" in text:
        lo, hi = text.split(":", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",") if x]


def cmd_study(args) -> int:
    if args.which == "screening":
        J = _parse_range(args.J)
        if max(J) > args.limit_J:
            print("resource limit: J above limit", file=sys.stderr)
            return 3
        table = screening_convergence_study(J, Fraction(args.k), Fraction(args.hbar),
                                            use_float=args.float)
        cols = ["J", "comm_S_e", "comm_S_f", "comm_S_hm", "anticomm_eta0_S"]
        print(",".join(cols))
        for row in table["rows"]:
            print(",".join(_fmt(row[c], args.float) for c in cols))
        for key, val in table["summary"].items():
            print(f"# {key}: {val}")
    elif args.which == "vertex":
        J = _parse_range(args.J)
        if max(J) > args.limit_J:
            print("resource limit: J above limit", file=sys.stderr)
            return 3
        deltas = [Fraction(d) for d in args.delta.split(",")]
        table = vertex_residual_study(args.type, args.l, J, deltas,
                                      Fraction(args.k), Fraction(args.hbar),
                                      use_float=args.float)
        print("J,delta,hp_residual,hm_residual")
        for row in table["rows"]:
            print(f"{row['J']},{row['delta']},{_fmt(row['hp_residual'], args.float)},"
                  f"{_fmt(row['hm_residual'], args.float)}")
    else:  # pragma: no cover - argparse prevents this
        return 2
    if args.out:
        _write_out(args.out, json.dumps(_jsonable(table), indent=2) + "\n")
    return 0


def _fmt(v, as_float: bool) -> str:
    if as_float:
        return f"{float(v):.6g}"
    return str(v)


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fockcurrents",
                                description="exact verifier for the free-field "
                                            "current realization")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a named verification suite")
    v.add_argument("--suite", choices=SUITE_IDS, required=False)
    v.add_argument("--config", help="JSON config file")
    v.add_argument("--out", help="write the JSON report here")
    v.set_defaults(fn=cmd_verify)

    a = sub.add_parser("act", help="apply an operator word to a state")
    a.add_argument("--expr", required=True)
    a.add_argument("--state", required=True)
    a.add_argument("--max-weight", type=int, default=3)
    a.set_defaults(fn=cmd_act)

    k = sub.add_parser("kernel", help="eta0 kernel dimension table")
    k.add_argument("--l", required=True)
    k.add_argument("--s", type=int, required=True)
    k.add_argument("--max-weight", type=int, required=True)
    k.add_argument("--limit-weight", type=int, default=DEFAULT_LIMITS["max_weight"])
    k.add_argument("--out")
    k.set_defaults(fn=cmd_kernel)

    c = sub.add_parser("character", help="graded dimensions of the Fock space")
    c.add_argument("--max-weight", type=int, required=True)
    c.add_argument("--out")
    c.set_defaults(fn=cmd_character)

    s = sub.add_parser("study", help="limit studies (tables, no pass/fail)")
    s.add_argument("which", choices=["screening", "vertex"])
    s.add_argument("--J", default="0:4")
    s.add_argument("--k", default="3")
    s.add_argument("--hbar", default="1/10")
    s.add_argument("--delta", default="1/10")
    s.add_argument("--type", choices=["I", "II"], default="I")
    s.add_argument("--l", type=int, default=1)
    s.add_argument("--float", action="store_true")
    s.add_argument("--limit-J", type=int, default=DEFAULT_LIMITS["max_J"])
    s.add_argument("--out")
    s.set_defaults(fn=cmd_study)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if args.command == "verify" and not args.suite and not args.config:
        print("usage error: verify needs --suite or --config", file=sys.stderr)
        return 2
    return args.fn(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 success / accepted / equal, 1 rejected / unequal,
2 usage or parse error, 3 an enumeration cap was hit.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from systema.ast import size_params
from systema.errors import CapExceeded, ParseError, SystemAError, UnboundParameterError
from systema.normalize import equivalent, normalize
from systema.parser import parse_name, parse_protocol, print_term, to_json
from systema.projection import project, project_env
from systema.realizability import check_pr
from systema.semantics import verify
from systema.trace import DEFAULT_N, InstantiationConfig, format_trace, global_traces

SCHEMA_VERSION = 1

OK, REJECTED, USAGE, TRUNCATED = 0, 1, 2, 3


class _Out:
    def __init__(self, fmt: str, stream=None):
        self.fmt = fmt
        self.stream = stream or sys.stdout
        self.color = (os.environ.get("SYSTEMA_COLOR", "1") != "0"
                      and getattr(self.stream, "isatty", lambda: False)())

    def paint(self, text: str, good: bool) -> str:
        if not self.color:
            return text
        return f"\x1b[{32 if good else 31}m{text}\x1b[0m"

    def line(self, text: str = "") -> None:
        print(text, file=self.stream)

    def json(self, payload: dict) -> None:
        print(json.dumps({"schema_version": SCHEMA_VERSION, **payload}, indent=2), file=self.stream)


def _bindings(pairs: list[str]) -> dict[str, int]:
    out = {}
    for pair in pairs or []:
        name, sep, value = pair.partition("=")
        if not sep or not name.strip():
            raise ValueError(f"--bind expects name=value, got {pair!r}")
        try:
            n = int(value)
        except ValueError:
            raise ValueError(f"--bind {name}: {value!r} is not an integer") from None
        if n < 1:
            raise ValueError(f"--bind {name}: sizes start at 1")
        out[name.strip()] = n
    return out


def _config(args, g=None, fill_defaults: bool = True) -> InstantiationConfig:
    bindings = _bindings(args.bind)
    if g is not None and fill_defaults:
        for name in size_params(g):
            bindings.setdefault(name, DEFAULT_N)
    return InstantiationConfig(bindings=bindings, star_bound=args.star_bound,
                               max_traces=args.max_traces, max_states=args.max_states)


def _load(path: str, kind: str = "global"):
    return parse_protocol(Path(path).read_text(encoding="utf-8"), kind)


# ---------------------------------------------------------------- commands


def cmd_parse(args, out: _Out) -> int:
    results = []
    for path in args.files:
        proto = _load(path, args.kind)
        if out.fmt == "json":
            results.append({"file": path, "name": proto.name, "params": proto.params,
                            "roles": [str(r) for r in proto.roles],
                            "term": to_json(proto.body, args.kind)})
        else:
            out.line(print_term(proto.body))
        for w in proto.warnings:
            print(f"{path}: warning: {w.message}", file=sys.stderr)
    if out.fmt == "json":
        out.json({"command": "parse", "results": results})
    return OK


def cmd_project(args, out: _Out) -> int:
    g = _load(args.file).body
    role = parse_name(args.role)
    local = project(g, role, simplify=not args.raw)
    if out.fmt == "json":
        out.json({"command": "project", "role": str(role), "text": print_term(local),
                  "term": to_json(local, "local")})
    else:
        out.line(print_term(local))
    return OK


def cmd_project_all(args, out: _Out) -> int:
    g = _load(args.file).body
    bindings = _bindings(args.bind)
    env = project_env(g, bindings or None, simplify=not args.raw)
    if out.fmt == "json":
        out.json({"command": "project-all",
                  "environment": {str(p): print_term(l) for p, l in env.items()}})
    else:
        for p, l in env.items():
            out.line(f"{p}: {print_term(l)}")
    return OK


def cmd_check(args, out: _Out) -> int:
    code = OK
    results = []
    for path in args.files:
        g = _load(path).body
        v = check_pr(g, _config(args, g), symmetric_exemption=args.symmetric_exemption)
        code = max(code, OK if v.accepted else REJECTED)
        if out.fmt == "json":
            results.append({"file": path, **v.to_json()})
            continue
        out.line(f"{path}: {out.paint(v.summary(), v.accepted)}")
        for w in v.witnesses[1:]:
            out.line(f"  also: {w.message} (at {w.path})")
        if v.bounded:
            b = v.config
            out.line(f"  decided at bounds {dict(b.bindings)} star_bound={b.star_bound}")
        for note in v.notes:
            out.line(f"  note: {note}")
    if out.fmt == "json":
        out.json({"command": "check", "results": results})
    return code


def cmd_normalize(args, out: _Out) -> int:
    l = _load(args.file, args.kind).body
    nf = normalize(l, idempotence=not args.no_idempotence)
    if out.fmt == "json":
        out.json({"command": "normalize", "text": print_term(nf.term), "steps": nf.steps,
                  "term": to_json(nf.term, args.kind)})
    else:
        out.line(print_term(nf.term))
    return OK


def cmd_equiv(args, out: _Out) -> int:
    a = _load(args.left, args.kind).body
    b = _load(args.right, args.kind).body
    same = equivalent(a, b, idempotence=not args.no_idempotence)
    if out.fmt == "json":
        out.json({"command": "equiv", "equivalent": same})
    else:
        out.line(out.paint("equivalent" if same else "not equivalent", same))
    return OK if same else REJECTED


def cmd_traces(args, out: _Out) -> int:
    g = _load(args.file).body
    cfg = _config(args, g)
    ts = global_traces(g, cfg).sorted()
    if out.fmt == "json":
        out.json({"command": "traces", "count": len(ts),
                  "bounds": {"bindings": cfg.bindings, "star_bound": cfg.star_bound},
                  "traces": [[str(e) for e in t] for t in ts]})
    else:
        for t in ts:
            out.line(format_trace(t))
    return OK


def cmd_verify(args, out: _Out) -> int:
    code = OK
    results = []
    for path in args.files:
        g = _load(path).body
        r = verify(g, _config(args, g), record_on_send=args.record_on_send)
        if r.inconclusive:
            code = max(code, TRUNCATED)
        elif not r.equal:
            code = max(code, REJECTED)
        if out.fmt == "json":
            results.append({"file": path, **r.to_json()})
            continue
        out.line(f"{path}: {out.paint(r.summary(), r.equal)}")
        if r.inconclusive:
            continue
        for label, ts in (("unsafe", r.unsafe), ("lost", r.lost)):
            for t in ts[:10]:
                out.line(f"  {label}: {format_trace(t)}")
    if out.fmt == "json":
        out.json({"command": "verify", "results": results})
    return code


# ---------------------------------------------------------------- argument parsing


def _parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="systema", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    bounds = argparse.ArgumentParser(add_help=False)
    bounds.add_argument("--bind", action="append", default=[], metavar="NAME=VALUE",
                        help=f"size parameter value (unbound ones default to {DEFAULT_N})")
    bounds.add_argument("--star-bound", type=int, default=2, metavar="K")
    bounds.add_argument("--max-traces", type=int, default=10**6)
    bounds.add_argument("--max-states", type=int, default=2_000_000)
    kind = argparse.ArgumentParser(add_help=False)
    kind.add_argument("--kind", choices=("global", "local"), default="local")
    idem = argparse.ArgumentParser(add_help=False)
    idem.add_argument("--no-idempotence", action="store_true",
                      help="do not use A + A = A while normalizing")

    sub = top.add_subparsers(dest="command", required=True)
    p = sub.add_parser("parse", parents=[common], help="parse and print")
    p.add_argument("files", nargs="+")
    p.add_argument("--kind", choices=("global", "local"), default="global")
    p.set_defaults(run=cmd_parse)

    p = sub.add_parser("project", parents=[common], help="project onto one role")
    p.add_argument("file")
    p.add_argument("--role", required=True)
    p.add_argument("--raw", action="store_true", help="keep every ε")
    p.set_defaults(run=cmd_project)

    p = sub.add_parser("project-all", parents=[common], help="project onto every role")
    p.add_argument("file")
    p.add_argument("--bind", action="append", default=[], metavar="NAME=VALUE")
    p.add_argument("--raw", action="store_true")
    p.set_defaults(run=cmd_project_all)

    p = sub.add_parser("check", parents=[common, bounds], help="projectability (PR)")
    p.add_argument("files", nargs="+")
    p.add_argument("--symmetric-exemption", action="store_true",
                   help="skip PP when both parallel operands are the same term")
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("normalize", parents=[common, kind, idem], help="normal form")
    p.add_argument("file")
    p.set_defaults(run=cmd_normalize)

    p = sub.add_parser("equiv", parents=[common, kind, idem], help="compare normal forms")
    p.add_argument("left")
    p.add_argument("right")
    p.set_defaults(run=cmd_equiv)

    p = sub.add_parser("traces", parents=[common, bounds], help="enumerate traces")
    p.add_argument("file")
    p.set_defaults(run=cmd_traces)

    p = sub.add_parser("verify", parents=[common, bounds],
                       help="compare global traces with the projected environment")
    p.add_argument("files", nargs="+")
    p.add_argument("--record-on-send", action="store_true",
                   help="order events by send instead of receive")
    p.set_defaults(run=cmd_verify)
    return top


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    if getattr(args, "star_bound", 0) < 0:
        print("systema: --star-bound must be >= 0", file=sys.stderr)
        return USAGE
    out = _Out(args.format)
    try:
        return args.run(args, out)
    except ParseError as exc:
        for d in exc.diagnostics:
            print(d, file=sys.stderr)
        return USAGE
    except CapExceeded as exc:
        print(f"systema: cap exceeded: {exc}", file=sys.stderr)
        return TRUNCATED
    except (UnboundParameterError, ValueError, OSError) as exc:
        print(f"systema: {exc}", file=sys.stderr)
        return USAGE
    except SystemAError as exc:
        print(f"systema: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())

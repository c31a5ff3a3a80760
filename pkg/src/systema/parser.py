"""Concrete syntax for global and local types.

Grammar (tightest binding first: postfix ``*``/``^``, then ``;``, ``~``, ``|``
and ``+``; all binary operators associate to the left)::

    expr    := choice
    choice  := par ('+' par)*
    par     := shuf ('|' shuf)*
    shuf    := seq ('~' seq)*
    seq     := post (';' post)*
    post    := atom ('*' | '^' size)*
    atom    := 'skip' | '(' expr ')' | nary | cond | leaf
    nary    := ('seq' | 'choice' | 'par' | 'shuffle') VAR 'in' '1' '..' size '{' expr '}'
    cond    := 'when' index '=' index '{' expr '}' 'else' '{' expr '}'
    leaf    := name '->' name ':' name          (global)
             | name '!' name | name '?' name    (local)
    name    := IDENT ('[' index ']')?

A file may also hold a named block::

    protocol Name(n, ...) { roles a, b, c[i]; <expr> }

``#`` starts a comment that runs to the end of the line.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from systema.ast import (
    EMPTY, Binary, Choice, ChoiceN, Cond, Empty, Exp, Interaction, MessageLabel, NAry,
    Parallel, ParallelN, ProcessName, Recv, Send, Seq, SeqN, Shuffle, ShuffleN, Star, Term,
)
from systema.errors import Diagnostic, ParseError, SourceSpan

KEYWORDS = {"skip", "seq", "choice", "par", "shuffle", "in", "when", "else", "protocol", "roles"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<arrow>->)
  | (?P<dots>\.\.)
  | (?P<int>[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>[:;+|~^*!?(){}\[\],=])
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str  # ident, int, sym, eof
    text: str
    span: SourceSpan


def _tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    byte_of = _ByteOffsets(text)
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            span = SourceSpan(byte_of(pos), byte_of(pos + 1), line, pos - line_start + 1)
            raise ParseError([Diagnostic("error", f"unexpected character {text[pos]!r}", span)])
        kind = m.lastgroup
        span = SourceSpan(byte_of(pos), byte_of(m.end()), line, pos - line_start + 1)
        if kind == "ws":
            newlines = m.group().count("\n")
            if newlines:
                line += newlines
                line_start = pos + m.group().rindex("\n") + 1
        else:
            if kind in ("arrow", "dots"):
                kind = "sym"
            tokens.append(Token(kind, m.group(), span))
        pos = m.end()
    tokens.append(Token("eof", "", SourceSpan(byte_of(pos), byte_of(pos), line, pos - line_start + 1)))
    return tokens


class _ByteOffsets:
    def __init__(self, text: str):
        self.text = text
        self.ascii = text.isascii()

    def __call__(self, i: int) -> int:
        if self.ascii:
            return i
        return len(self.text[:i].encode("utf-8"))


@dataclass
class Protocol:
    name: str | None
    params: list[str]
    roles: list[ProcessName]
    body: Term
    kind: str  # "global" | "local"
    warnings: list[Diagnostic] = field(default_factory=list)


_NARY = {"seq": SeqN, "choice": ChoiceN, "par": ParallelN, "shuffle": ShuffleN}
_BINOPS = [("+", Choice), ("|", Parallel), ("~", Shuffle), (";", Seq)]


class _Parser:
    def __init__(self, text: str, kind: str, free_vars=()):
        self.toks = _tokenize(text)
        self.i = 0
        self.kind = kind
        self.scope: list[str] = list(free_vars)

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError([Diagnostic("error", msg, tok.span)])

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("sym", "ident") and t.text == text

    def accept(self, text: str) -> Token | None:
        if self.at(text):
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, text: str) -> Token:
        t = self.accept(text)
        if t is None:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return t

    def ident(self, what: str = "identifier") -> Token:
        t = self.tok
        if t.kind != "ident" or t.text in KEYWORDS:
            raise self.error(f"expected {what}, found {t.text or 'end of input'!r}")
        self.i += 1
        return t

    # -- entry points
    def document(self) -> Protocol:
        if self.at("protocol"):
            proto = self.protocol()
        else:
            proto = Protocol(None, [], [], self.expr(), self.kind)
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r} after expression")
        return proto

    def protocol(self) -> Protocol:
        self.expect("protocol")
        name = self.ident("protocol name").text
        params: list[str] = []
        if self.accept("("):
            if not self.at(")"):
                params.append(self.ident("parameter").text)
                while self.accept(","):
                    params.append(self.ident("parameter").text)
            self.expect(")")
        self.expect("{")
        roles: list[ProcessName] = []
        if self.accept("roles"):
            roles.append(self.role())
            while self.accept(","):
                roles.append(self.role())
            self.expect(";")
        body = self.expr()
        self.expect("}")
        return Protocol(name, params, roles, body, self.kind)

    def role(self) -> ProcessName:
        base = self.ident("role").text
        index = None
        if self.accept("["):
            t = self.tok
            if t.kind == "int":
                index = self.literal(t)
            else:
                index = self.ident("index").text
            self.expect("]")
        return ProcessName(base, index)

    # -- expressions
    def expr(self, level: int = 0) -> Term:
        if level == len(_BINOPS):
            return self.postfix()
        sym, node = _BINOPS[level]
        left = self.expr(level + 1)
        while self.accept(sym):
            left = node(left, self.expr(level + 1))
        return left

    def postfix(self) -> Term:
        t = self.atom()
        while True:
            if self.accept("*"):
                t = Star(t)
            elif self.accept("^"):
                t = Exp(t, self.size())
            else:
                return t

    def literal(self, t: Token) -> int:
        value = int(t.text)
        if value < 1:
            raise self.error("numbers in indices and bounds start at 1", t)
        self.i += 1
        return value

    def size(self):
        t = self.tok
        if t.kind == "int":
            return self.literal(t)
        return self.ident("size parameter").text

    def index(self):
        t = self.tok
        if t.kind == "int":
            return self.literal(t)
        name = self.ident("index").text
        if name not in self.scope:
            raise self.error(f"unbound index {name}", t)
        return name

    def name(self, cls):
        base = self.ident().text
        index = None
        if self.accept("["):
            index = self.index()
            self.expect("]")
        return cls(base, index)

    def atom(self) -> Term:
        t = self.tok
        if self.accept("skip"):
            return EMPTY
        if self.accept("("):
            inner = self.expr()
            self.expect(")")
            return inner
        if t.kind == "ident" and t.text in _NARY:
            return self.nary()
        if self.accept("when"):
            left = self.index()
            self.expect("=")
            right = self.index()
            self.expect("{")
            then = self.expr()
            self.expect("}")
            self.expect("else")
            self.expect("{")
            orelse = self.expr()
            self.expect("}")
            if self.kind == "global":
                raise self.error("'when' is only allowed in local types", t)
            return Cond(left, right, then, orelse)
        return self.leaf()

    def nary(self) -> Term:
        node = _NARY[self.tok.text]
        self.i += 1
        var = self.ident("index variable").text
        self.expect("in")
        lo = self.tok
        if lo.kind != "int" or lo.text != "1":
            raise self.error("ranges start at 1", lo)
        self.i += 1
        self.expect("..")
        bound = self.size()
        self.expect("{")
        self.scope.append(var)
        try:
            body = self.expr()
        finally:
            self.scope.pop()
        self.expect("}")
        return node(var, bound, body)

    def leaf(self) -> Term:
        start = self.tok
        proc = self.name(ProcessName)
        if self.kind == "global":
            if not self.accept("->"):
                raise self.error(f"expected '->' after {proc}")
            receiver = self.name(ProcessName)
            self.expect(":")
            label = self.name(MessageLabel)
            if proc == receiver:
                raise self.error(f"self-message {proc} -> {receiver}", start)
            return Interaction(proc, label, receiver)
        if self.accept("!"):
            return Send(proc, self.name(MessageLabel))
        if self.accept("?"):
            return Recv(proc, self.name(MessageLabel))
        raise self.error(f"expected '!' or '?' after {proc}")


def parse_protocol(text: str, kind: str = "global", free_vars=()) -> Protocol:
    proto = _Parser(text, kind, free_vars).document()
    if proto.name is not None:
        from systema.ast import size_params

        missing = sorted(size_params(proto.body) - set(proto.params))
        for p in missing:
            proto.warnings.append(Diagnostic(
                "warning", f"size parameter {p} is not declared in protocol {proto.name}",
                path="root"))
    return proto


def parse_global(text: str, free_vars=()) -> Term:
    """Parse a global type; raises :class:`ParseError` with located diagnostics."""
    return parse_protocol(text, "global", free_vars).body


def parse_local(text: str, free_vars=()) -> Term:
    return parse_protocol(text, "local", free_vars).body


def parse_name(text: str) -> ProcessName:
    p = _Parser(text, "local")
    p.scope = None  # any variable is accepted here
    base = p.ident("process name").text
    index = None
    if p.accept("["):
        t = p.tok
        index = p.literal(t) if t.kind == "int" else p.ident("index").text
        p.expect("]")
    if p.tok.kind != "eof":
        raise p.error("unexpected trailing input in process name")
    return ProcessName(base, index)


# ---------------------------------------------------------------- printing

_PREC = {Choice: 1, Parallel: 2, Shuffle: 3, Seq: 4}
_SYM = {Choice: "+", Parallel: "|", Shuffle: "~", Seq: ";"}
_NARY_KW = {SeqN: "seq", ChoiceN: "choice", ParallelN: "par", ShuffleN: "shuffle"}
_POSTFIX = 5
_ATOM = 6


def _prec(t: Term) -> int:
    if isinstance(t, Binary):
        return _PREC[type(t)]
    if isinstance(t, (Star, Exp)):
        return _POSTFIX
    if isinstance(t, (Interaction, Send, Recv)):
        # leaves read ambiguously under a postfix operator; keep them bracketed
        return _POSTFIX - 0.5
    return _ATOM


def _fmt(t: Term, need: float) -> str:
    s = _fmt_bare(t)
    return f"({s})" if _prec(t) < need else s


def _fmt_bare(t: Term) -> str:
    match t:
        case Empty():
            return "skip"
        case Interaction(s, m, r):
            return f"{s} -> {r} : {m}"
        case Send(p, m):
            return f"{p} ! {m}"
        case Recv(p, m):
            return f"{p} ? {m}"
        case Star(body):
            return _fmt(body, _POSTFIX) + "*"
        case Exp(body, bound):
            return _fmt(body, _POSTFIX) + f"^{bound}"
        case Cond(left, right, then, orelse):
            return f"when {left} = {right} {{ {_fmt_bare(then)} }} else {{ {_fmt_bare(orelse)} }}"
        case NAry(var=var, bound=bound, body=body):
            return f"{_NARY_KW[type(t)]} {var} in 1..{bound} {{ {_fmt_bare(body)} }}"
        case Binary(left=left, right=right):
            p = _PREC[type(t)]
            return f"{_fmt(left, p)} {_SYM[type(t)]} {_fmt(right, p + 0.5)}"
    raise TypeError(f"not a term: {t!r}")


def print_term(t: Term) -> str:
    """Canonical text; ``parse(print_term(t)) == t`` for well-formed terms."""
    return _fmt_bare(t)


# ---------------------------------------------------------------- JSON

_KIND_NAMES = {
    Empty: "Empty", Interaction: "Interaction", Send: "Send", Recv: "Recv",
    Seq: "Seq", Choice: "Choice", Parallel: "Parallel", Shuffle: "Shuffle",
    SeqN: "Seq-N", ChoiceN: "Choice-N", ParallelN: "Parallel-N", ShuffleN: "Shuffle-N",
    Exp: "Exp", Star: "KleeneStar", Cond: "Cond",
}
_KIND_CLASSES = {v: k for k, v in _KIND_NAMES.items()}


def _name_json(n) -> dict:
    return {"base": n.base, "index": n.index}


def to_json(t: Term, kind: str = "global") -> dict:
    """Variant-tagged tree; node kinds are ``G-*`` or ``L-*`` rule names."""
    prefix = "G-" if kind == "global" else "L-"
    node: dict = {"kind": prefix + _KIND_NAMES[type(t)]}
    match t:
        case Interaction(s, m, r):
            node.update(sender=_name_json(s), label=_name_json(m), receiver=_name_json(r))
        case Send(p, m) | Recv(p, m):
            node.update(peer=_name_json(p), label=_name_json(m))
        case Binary(left=left, right=right):
            node.update(left=to_json(left, kind), right=to_json(right, kind))
        case NAry(var=var, bound=bound, body=body):
            node.update(var=var, bound=bound, body=to_json(body, kind))
        case Exp(body, bound):
            node.update(body=to_json(body, kind), bound=bound)
        case Star(body):
            node.update(body=to_json(body, kind))
        case Cond(left, right, then, orelse):
            node.update(left=left, right=right, then=to_json(then, kind),
                        orelse=to_json(orelse, kind))
    return node


def from_json(node: dict) -> Term:
    cls = _KIND_CLASSES[node["kind"][2:]]
    if cls is Empty:
        return EMPTY
    if cls is Interaction:
        return Interaction(ProcessName(**node["sender"]), MessageLabel(**node["label"]),
                           ProcessName(**node["receiver"]))
    if cls in (Send, Recv):
        return cls(ProcessName(**node["peer"]), MessageLabel(**node["label"]))
    if issubclass(cls, Binary):
        return cls(from_json(node["left"]), from_json(node["right"]))
    if issubclass(cls, NAry):
        return cls(node["var"], node["bound"], from_json(node["body"]))
    if cls is Exp:
        return Exp(from_json(node["body"]), node["bound"])
    if cls is Star:
        return Star(from_json(node["body"]))
    return Cond(node["left"], node["right"], from_json(node["then"]), from_json(node["orelse"]))

"""Events, traces, ground instantiation and trace-set enumeration."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, NamedTuple

from systema import kernel
from systema.ast import (
    EMPTY, Binary, Choice, ChoiceN, Cond, Empty, Exp, Interaction, MessageLabel, NAry,
    Parallel, ParallelN, ProcessName, Recv, Send, Seq, SeqN, Shuffle, Star, Term,
    _subst, fold, resolve_cond,
)
from systema.errors import CapExceeded, UnboundParameterError

DEFAULT_N = 2


class Event(NamedTuple):
    sender: ProcessName
    label: MessageLabel
    receiver: ProcessName

    def __str__(self) -> str:
        return f"{self.sender}-{self.label}->{self.receiver}"

    def sort_key(self) -> tuple:
        return (self.sender.sort_key(), self.label.sort_key(), self.receiver.sort_key())


Trace = tuple  # tuple[Event, ...]


def format_trace(t: Trace) -> str:
    return ", ".join(str(e) for e in t) if t else "(empty)"


def trace_key(t: Trace) -> tuple:
    return (len(t), tuple(e.sort_key() for e in t))


@dataclass(frozen=True)
class TraceSet:
    traces: frozenset
    bindings: dict = field(default_factory=dict, compare=False)
    star_bound: int | None = field(default=None, compare=False)
    truncated: bool = field(default=False, compare=False)

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self) -> Iterator[Trace]:
        return iter(self.traces)

    def __contains__(self, t) -> bool:
        return tuple(t) in self.traces

    def sorted(self) -> list[Trace]:
        return sorted(self.traces, key=trace_key)


@dataclass
class InstantiationConfig:
    bindings: dict[str, int] = field(default_factory=dict)
    star_bound: int | None = 2  # None keeps stars unexpanded
    max_shuffle: int = 6  # largest n accepted for shuffle i in 1..n
    max_traces: int = 10**6
    max_states: int = 2_000_000

    def __post_init__(self):
        for name, value in self.bindings.items():
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"binding {name}={value!r}: sizes start at 1")
        if self.star_bound is not None and self.star_bound < 0:
            raise ValueError("star_bound must be >= 0")

    def size(self, bound, default: int | None = None) -> int:
        if isinstance(bound, int):
            return bound
        if bound in self.bindings:
            return self.bindings[bound]
        if default is not None:
            return default
        raise UnboundParameterError(f"size parameter {bound!r} is not bound")

    def replace(self, **changes) -> "InstantiationConfig":
        data = dict(bindings=dict(self.bindings), star_bound=self.star_bound,
                    max_shuffle=self.max_shuffle, max_traces=self.max_traces,
                    max_states=self.max_states)
        data.update(changes)
        return InstantiationConfig(**data)


# ---------------------------------------------------------------- instantiation


def _check_ground(names: Iterable, node: Term) -> None:
    for n in names:
        if isinstance(n.index, str):
            raise UnboundParameterError(f"free index variable {n.index} in {node}")


def instantiate(g: Term, cfg: InstantiationConfig) -> Term:
    """Expand parameters, binders, exponents, shuffles and (bounded) stars.

    The result contains only ε, leaves, ``;``, ``+`` and ``|`` (plus ``*`` when
    ``cfg.star_bound`` is None).
    """
    match g:
        case Empty():
            return g
        case Interaction(s, m, r):
            _check_ground((s, m, r), g)
            return g
        case Send(p, m) | Recv(p, m):
            _check_ground((p, m), g)
            return g
        case Shuffle(left, right):
            a, b = instantiate(left, cfg), instantiate(right, cfg)
            return Choice(Seq(a, b), Seq(b, a))
        case Binary(left=left, right=right):
            return type(g)(instantiate(left, cfg), instantiate(right, cfg))
        case NAry(var=var, bound=bound, body=body):
            n = cfg.size(bound)
            bodies = [instantiate(_subst(body, var, k), cfg) for k in range(1, n + 1)]
            if isinstance(g, SeqN):
                return fold(Seq, bodies)
            if isinstance(g, ChoiceN):
                return fold(Choice, bodies)
            if isinstance(g, ParallelN):
                return fold(Parallel, bodies)
            if n > cfg.max_shuffle:
                raise CapExceeded(f"shuffle over {n} operands exceeds the cap of {cfg.max_shuffle}")
            return fold(Choice, [fold(Seq, list(perm)) for perm in itertools.permutations(bodies)])
        case Exp(body, bound):
            return fold(Seq, [instantiate(body, cfg)] * cfg.size(bound))
        case Star(body):
            inner = instantiate(body, cfg)
            if cfg.star_bound is None:
                return Star(inner)
            return fold(Choice, [fold(Seq, [inner] * k) for k in range(cfg.star_bound + 1)])
        case Cond(left, right, then, orelse):
            decided = resolve_cond(left, right)
            if decided is None:
                raise UnboundParameterError(f"cannot decide {left} = {right}")
            return instantiate(then if decided else orelse, cfg)
    raise TypeError(f"not a term: {g!r}")


# ---------------------------------------------------------------- enumeration


def _traces(g: Term, cap: int) -> set:
    match g:
        case Empty():
            return {()}
        case Interaction(s, m, r):
            return {(Event(s, m, r),)}
        case Send() | Recv():
            # local types: a trace is a sequence of actions
            return {(g,)}
        case Seq(left, right):
            a, b = _traces(left, cap), _traces(right, cap)
            if len(a) * len(b) > cap:
                out = set()
                for x in a:
                    for y in b:
                        out.add(x + y)
                        if len(out) > cap:
                            raise CapExceeded(f"more than {cap} traces")
                return out
            return {x + y for x in a for y in b}
        case Choice(left, right):
            out = _traces(left, cap) | _traces(right, cap)
        case Shuffle(left, right):
            a, b = _traces(left, cap), _traces(right, cap)
            out = {x + y for x in a for y in b} | {y + x for x in a for y in b}
        case Parallel(left, right):
            out = kernel.interleave_sets(_traces(left, cap), _traces(right, cap), cap)
            if out is None:
                raise CapExceeded(f"more than {cap} traces")
        case _:
            raise ValueError(f"traces() needs a ground, star-free term; got {type(g).__name__}")
    if len(out) > cap:
        raise CapExceeded(f"more than {cap} traces")
    return out


def traces(g: Term, cfg: InstantiationConfig | None = None) -> TraceSet:
    """The trace set of a ground, star-free type (see :func:`instantiate`).

    Global types yield event sequences, local types action sequences.
    """
    cfg = cfg or InstantiationConfig()
    return TraceSet(frozenset(_traces(g, cfg.max_traces)), dict(cfg.bindings), cfg.star_bound)


def global_traces(g: Term, cfg: InstantiationConfig | None = None) -> TraceSet:
    cfg = cfg or InstantiationConfig()
    return traces(instantiate(g, cfg), cfg)


# ---------------------------------------------------------------- first / last


def _instances(t: NAry, cfg: InstantiationConfig | None) -> list[Term]:
    n = (cfg or InstantiationConfig()).size(t.bound, DEFAULT_N)
    return [_subst(t.body, t.var, k) for k in range(1, n + 1)]


def nullable(g: Term, cfg: InstantiationConfig | None = None) -> bool:
    """Whether ``g`` can produce the empty trace."""
    match g:
        case Empty() | Star():
            return True
        case Interaction() | Send() | Recv():
            return False
        case Choice(left, right):
            return nullable(left, cfg) or nullable(right, cfg)
        case Binary(left=left, right=right):
            return nullable(left, cfg) and nullable(right, cfg)
        case ChoiceN():
            return any(nullable(b, cfg) for b in _instances(g, cfg))
        case NAry():
            return all(nullable(b, cfg) for b in _instances(g, cfg))
        case Exp(body, _):
            return nullable(body, cfg)
        case Cond(left, right, then, orelse):
            decided = resolve_cond(left, right)
            if decided is None:
                return nullable(then, cfg) or nullable(orelse, cfg)
            return nullable(then if decided else orelse, cfg)
    raise TypeError(f"not a term: {g!r}")


def _edge(g: Term, cfg, last: bool) -> set[Event]:
    match g:
        case Empty():
            return set()
        case Interaction(s, m, r):
            return {Event(s, m, r)}
        case Seq(left, right):
            near, far = (right, left) if last else (left, right)
            out = _edge(near, cfg, last)
            if nullable(near, cfg):
                out |= _edge(far, cfg, last)
            return out
        case Binary(left=left, right=right):
            return _edge(left, cfg, last) | _edge(right, cfg, last)
        case SeqN():
            bodies = _instances(g, cfg)
            if last:
                bodies.reverse()
            out: set[Event] = set()
            for b in bodies:
                out |= _edge(b, cfg, last)
                if not nullable(b, cfg):
                    break
            return out
        case NAry():
            out = set()
            for b in _instances(g, cfg):
                out |= _edge(b, cfg, last)
            return out
        case Exp(body, _) | Star(body):
            return _edge(body, cfg, last)
    raise TypeError(f"first/last are defined on global types, not {type(g).__name__}")


def first_set(g: Term, cfg: InstantiationConfig | None = None) -> set[Event]:
    """Events that can open a trace of ``g``, computed without enumeration."""
    return _edge(g, cfg, last=False)


def last_set(g: Term, cfg: InstantiationConfig | None = None) -> set[Event]:
    return _edge(g, cfg, last=True)


# ---------------------------------------------------------------- distinctive points


def project_event(e: Event, p: ProcessName) -> Term:
    if e.sender == p:
        return Send(e.receiver, e.label)
    if e.receiver == p:
        return Recv(e.sender, e.label)
    return EMPTY


def project_trace(t: Trace, p: ProcessName) -> tuple:
    """Per-position projections of ``t`` onto ``p``; ε positions are kept."""
    return tuple(project_event(e, p) for e in t)


def _visible(view: tuple) -> tuple:
    return tuple(x for x in view if not isinstance(x, Empty))


def distinctive_view_point(v1: tuple, v2: tuple) -> int | None:
    """:func:`distinctive_point` on precomputed per-position projections."""
    s1, s2 = _visible(v1), _visible(v2)
    if not s1 or not s2 or s1 == s2:
        return None
    for i in range(max(len(v1), len(v2))):
        a = v1[i] if i < len(v1) else EMPTY
        b = v2[i] if i < len(v2) else EMPTY
        if a != b:
            return i + 1
    return None


def distinctive_point(t1: Trace, t2: Trace, p: ProcessName) -> int | None:
    """1-based index where ``t1`` and ``t2`` first differ as seen by ``p``.

    None stands for ε: either projection is empty, or the two projections
    are equal.  Positions past the end of the shorter trace project to ε.
    """
    return distinctive_view_point(project_trace(t1, p), project_trace(t2, p))


# ---------------------------------------------------------------- membership


def _seq(a: Term, b: Term) -> Term:
    if isinstance(a, Empty):
        return b
    if isinstance(b, Empty):
        return a
    return Seq(a, b)


def _par(a: Term, b: Term) -> Term:
    if isinstance(a, Empty):
        return b
    if isinstance(b, Empty):
        return a
    return Parallel(a, b)


@lru_cache(maxsize=1 << 18)
def _derive(t: Term, e: Event) -> frozenset:
    match t:
        case Empty():
            return frozenset()
        case Interaction(s, m, r):
            return frozenset({EMPTY}) if (s, m, r) == e else frozenset()
        case Seq(left, right):
            out = {_seq(x, right) for x in _derive(left, e)}
            if nullable(left):
                out |= _derive(right, e)
            return frozenset(out)
        case Choice(left, right):
            return _derive(left, e) | _derive(right, e)
        case Parallel(left, right):
            return frozenset({_par(x, right) for x in _derive(left, e)}
                             | {_par(left, y) for y in _derive(right, e)})
        case Star(body):
            return frozenset(_seq(x, t) for x in _derive(body, e))
    raise ValueError(f"membership needs an instantiated term; got {type(t).__name__}")


def member(g: Term, trace: Trace, cfg: InstantiationConfig | None = None) -> bool:
    """Whether ``trace`` belongs to the unbounded trace set of ``g``.

    Stars are not unrolled; only parameters are bound from ``cfg``.
    """
    cfg = (cfg or InstantiationConfig()).replace(star_bound=None)
    states = {instantiate(g, cfg)}
    for e in trace:
        nxt = set()
        for s in states:
            nxt |= _derive(s, e)
        if not nxt:
            return False
        states = nxt
    return any(nullable(s) for s in states)


def members(g: Term, trs, cfg: InstantiationConfig | None = None) -> set:
    """The subset of ``trs`` that :func:`member` accepts, sharing work across prefixes."""
    cfg = (cfg or InstantiationConfig()).replace(star_bound=None)
    start = frozenset({instantiate(g, cfg)})
    steps: dict = {}
    out = set()
    for t in trs:
        states = start
        for e in t:
            key = (states, e)
            nxt = steps.get(key)
            if nxt is None:
                nxt = frozenset().union(*(_derive(x, e) for x in states))
                steps[key] = nxt
            states = nxt
            if not states:
                break
        if any(nullable(x) for x in states):
            out.add(t)
    return out


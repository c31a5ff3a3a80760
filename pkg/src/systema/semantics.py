"""Asynchronous execution of environments and the trace-equality oracle.

Messages travel through unordered per-(sender, receiver) buffers with
guaranteed delivery.  An execution counts only once it is complete: every
process may stop and every buffer is empty.  Events enter the recorded trace
when they are received.
"""
from __future__ import annotations

import sys
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

from systema import kernel
from systema.ast import (
    EMPTY, Choice, Empty, Exp, NAry, Parallel, ProcessName, MessageLabel, Recv, Send, Seq,
    Shuffle, Star, Term,
)
from systema.errors import CapExceeded
from systema.projection import Environment, project_env
from systema.trace import (
    Event, InstantiationConfig, Trace, TraceSet, _par, _seq, format_trace, instantiate,
    members, nullable, trace_key, traces,
)

SEND = "send"
RECV = "recv"


class Action(NamedTuple):
    kind: str  # "send" | "recv"
    owner: ProcessName
    peer: ProcessName
    label: MessageLabel

    def event(self) -> Event:
        if self.kind == SEND:
            return Event(self.owner, self.label, self.peer)
        return Event(self.peer, self.label, self.owner)

    def __str__(self) -> str:
        op = "!" if self.kind == SEND else "?"
        return f"{self.owner}: {self.peer} {op} {self.label}"


def ready_actions(l: Term, owner: ProcessName | None = None) -> set[tuple[Action, Term]]:
    """Next actions of a ground local type, each with the residual type left after it.

    Choices commit to the branch whose action fires; parallel components
    advance independently.
    """
    match l:
        case Empty():
            return set()
        case Send(peer, label):
            return {(Action(SEND, owner, peer, label), EMPTY)}
        case Recv(peer, label):
            return {(Action(RECV, owner, peer, label), EMPTY)}
        case Seq(left, right):
            out = {(a, _seq(r, right)) for a, r in ready_actions(left, owner)}
            if nullable(left):
                out |= ready_actions(right, owner)
            return out
        case Choice(left, right):
            return ready_actions(left, owner) | ready_actions(right, owner)
        case Parallel(left, right):
            return ({(a, _par(r, right)) for a, r in ready_actions(left, owner)}
                    | {(a, _par(left, r)) for a, r in ready_actions(right, owner)})
        case Shuffle() | Exp() | NAry():
            return ready_actions(instantiate(l, InstantiationConfig()), owner)
        case Star():
            raise ValueError("expand stars (instantiate with a star bound) before execution")
    raise TypeError(f"not a ground local type: {l!r}")


# ---------------------------------------------------------------- reference machine


class Buffers:
    """Multisets of in-flight labels, one per (sender, receiver) channel."""

    def __init__(self, contents: dict | None = None):
        self._c: dict[tuple[ProcessName, ProcessName], Counter] = {
            k: Counter(v) for k, v in (contents or {}).items() if sum(v.values())}

    def put(self, sender, receiver, label) -> "Buffers":
        nxt = Buffers(self._c)
        nxt._c.setdefault((sender, receiver), Counter())[label] += 1
        return nxt

    def take(self, sender, receiver, label) -> "Buffers | None":
        box = self._c.get((sender, receiver))
        if not box or box[label] <= 0:
            return None
        nxt = Buffers(self._c)
        nxt._c[(sender, receiver)][label] -= 1
        if nxt._c[(sender, receiver)][label] == 0:
            del nxt._c[(sender, receiver)][label]
        if not nxt._c[(sender, receiver)]:
            del nxt._c[(sender, receiver)]
        return nxt

    def is_empty(self) -> bool:
        return not self._c

    def counts(self) -> dict:
        return {k: dict(v) for k, v in self._c.items()}


@dataclass
class Configuration:
    residuals: dict[ProcessName, Term]
    buffers: Buffers = field(default_factory=Buffers)
    recorded: tuple[Event, ...] = ()
    history: tuple[Action, ...] = ()

    def complete(self) -> bool:
        return self.buffers.is_empty() and all(nullable(l) for l in self.residuals.values())

    def successors(self) -> Iterator["Configuration"]:
        for p, l in self.residuals.items():
            for act, rest in ready_actions(l, p):
                if act.kind == SEND:
                    bufs = self.buffers.put(p, act.peer, act.label)
                    recorded = self.recorded
                else:
                    bufs = self.buffers.take(act.peer, p, act.label)
                    if bufs is None:
                        continue
                    recorded = self.recorded + (act.event(),)
                residuals = dict(self.residuals)
                residuals[p] = rest
                yield Configuration(residuals, bufs, recorded, self.history + (act,))


def complete_executions(env: Environment, cfg: InstantiationConfig | None = None,
                        limit: int = 100_000) -> Iterator[Configuration]:
    """Every complete execution of a small environment, by plain depth-first search.

    Exponential; meant for cross-checking the compiled explorer on tiny inputs.
    """
    cfg = cfg or InstantiationConfig()
    start = Configuration({p: instantiate(l, cfg) for p, l in env.items()})
    stack = [start]
    seen = 0
    while stack:
        conf = stack.pop()
        seen += 1
        if seen > limit:
            raise CapExceeded(f"more than {limit} configurations")
        if conf.complete():
            yield conf
        stack.extend(conf.successors())


# ---------------------------------------------------------------- compiled exploration


@dataclass
class Automaton:
    states: list[Term]
    moves: list[list[tuple[Action, int]]]
    accepting: list[bool]


def compile_automaton(l: Term, owner: ProcessName) -> Automaton:
    """Reachable residuals of a ground local type and the actions between them."""
    index = {l: 0}
    states = [l]
    moves: list[list[tuple[Action, int]]] = []
    i = 0
    while i < len(states):
        out = []
        acts = sorted(ready_actions(states[i], owner), key=lambda ar: str(ar[0]))
        for act, rest in acts:
            if rest not in index:
                index[rest] = len(states)
                states.append(rest)
            out.append((act, index[rest]))
        moves.append(out)
        i += 1
    return Automaton(states, moves, [nullable(s) for s in states])


def encode_environment(env: Environment, cfg: InstantiationConfig) -> tuple[list, list, list[Event]]:
    """Kernel input for ``env``: per-process move tables, accepting flags, and slot events."""
    slots: dict[Event, int] = {}
    trans, accepting = [], []
    for p, l in env.items():
        auto = compile_automaton(instantiate(l, cfg), p)
        table = []
        for out in auto.moves:
            row = []
            for act, target in out:
                slot = slots.setdefault(act.event(), len(slots))
                row.append((kernel.SEND if act.kind == SEND else kernel.RECV, slot, target))
            table.append(row)
        trans.append(table)
        accepting.append(auto.accepting)
    return trans, accepting, sorted(slots, key=slots.get)


def run_kernel(impl, trans, accepting, n_slots: int, max_states: int, record_on_send: bool):
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 20_000))
    try:
        return impl.explore(trans, accepting, n_slots, max_states, record_on_send)
    finally:
        sys.setrecursionlimit(limit)


def env_traces(env: Environment, cfg: InstantiationConfig | None = None,
               record_on_send: bool = False, backend=None) -> TraceSet:
    """Traces of all complete executions of ``env``, stars unrolled to the bound.

    A truncated exploration (``cfg.max_states`` hit) is flagged on the result.
    """
    cfg = cfg or InstantiationConfig()
    trans, accepting, events = encode_environment(env, cfg)
    raw, _, truncated = run_kernel(backend or kernel, trans, accepting, len(events),
                                   cfg.max_states, record_on_send)
    result = frozenset(tuple(events[s] for s in t) for t in raw)
    return TraceSet(result, dict(cfg.bindings), cfg.star_bound, truncated)


# ---------------------------------------------------------------- oracle


@dataclass
class Report:
    equal: bool  # no lost behaviour and no unsafe trace
    exact: bool  # the two bounded trace sets coincide
    inconclusive: bool
    global_count: int
    env_count: int
    lost: list[Trace]  # in tr(G) but not producible by the environment
    unsafe: list[Trace]  # produced by the environment, not in tr(G) at any bound
    beyond_bound: list[Trace]  # in tr(G), but only with more star unrollings
    config: InstantiationConfig = field(default_factory=InstantiationConfig)

    def summary(self) -> str:
        if self.inconclusive:
            return "inconclusive: exploration truncated"
        if self.equal:
            extra = "" if self.exact else f" ({len(self.beyond_bound)} env traces need more unrollings)"
            return f"equal: {self.global_count} traces{extra}"
        return (f"unequal: {len(self.lost)} lost, {len(self.unsafe)} unsafe "
                f"(global {self.global_count}, environment {self.env_count})")

    def to_json(self, limit: int = 10) -> dict:
        def fmt(ts):
            return [[str(e) for e in t] for t in ts[:limit]]

        return {
            "equal": self.equal,
            "exact": self.exact,
            "inconclusive": self.inconclusive,
            "global_traces": self.global_count,
            "environment_traces": self.env_count,
            "bounds": {"bindings": dict(self.config.bindings),
                       "star_bound": self.config.star_bound},
            "lost": fmt(self.lost),
            "unsafe": fmt(self.unsafe),
            "beyond_bound": fmt(self.beyond_bound),
        }


def verify(g: Term, cfg: InstantiationConfig | None = None, record_on_send: bool = False,
           backend=None) -> Report:
    """Compare the traces of ``g`` with those of its projected environment.

    Environment traces outside the bounded global set are split into
    genuinely unsafe ones (not in the unbounded language of ``g``) and ones
    that ``g`` only produces with more star unrollings than the bound allows.
    """
    cfg = cfg or InstantiationConfig()
    a = traces(instantiate(g, cfg), cfg)
    env = project_env(g, cfg.bindings)
    b = env_traces(env, cfg, record_on_send, backend)
    lost = sorted(a.traces - b.traces, key=trace_key)
    extra = sorted(b.traces - a.traces, key=trace_key)
    inside = members(g, extra, cfg)
    unsafe = [t for t in extra if t not in inside]
    beyond = [t for t in extra if t in inside]
    return Report(
        equal=not lost and not unsafe and not b.truncated,
        exact=a.traces == b.traces and not b.truncated,
        inconclusive=b.truncated,
        global_count=len(a),
        env_count=len(b),
        lost=lost,
        unsafe=unsafe,
        beyond_bound=beyond,
        config=cfg,
    )


__all__ = [
    "Action", "Buffers", "Configuration", "Report", "complete_executions", "compile_automaton",
    "encode_environment", "env_traces", "format_trace", "ready_actions", "verify",
]

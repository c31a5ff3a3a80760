"""Decide the projectability criteria SP, CP, PP, KP and their composition PR.

Criteria that quantify over trace sets are decided on bounded instantiations
(size parameters default to 2, stars are unrolled ``star_bound`` times); every
verdict records the configuration it was decided under.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from systema.ast import (
    EMPTY, Choice, ChoiceN, Empty, Exp, Interaction, NAry, Parallel, ParallelN, ProcessName,
    Recv, Send, Seq, SeqN, Shuffle, ShuffleN, Star, Term, _subst, ground_participants,
    size_params, walk,
)
from systema.trace import (
    DEFAULT_N, Event, InstantiationConfig, Trace, distinctive_view_point, first_set,
    global_traces, last_set, project_trace,
)


@dataclass(frozen=True)
class Witness:
    path: str
    message: str
    process: ProcessName | None = None
    events: tuple[Event, ...] = ()
    traces: tuple[Trace, ...] = ()
    index: int | None = None

    def to_json(self) -> dict:
        return {
            "path": self.path,
            "message": self.message,
            "process": str(self.process) if self.process is not None else None,
            "events": [str(e) for e in self.events],
            "traces": [[str(e) for e in t] for t in self.traces],
            "index": self.index,
        }


@dataclass
class Verdict:
    accepted: bool
    criterion: str  # SP / CP / PP / KP / PR
    witnesses: list[Witness] = field(default_factory=list)
    config: InstantiationConfig = field(default_factory=InstantiationConfig)
    bounded: bool = False
    notes: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.accepted

    def summary(self) -> str:
        if self.accepted:
            return f"{self.criterion} accepted"
        w = self.witnesses[0]
        return f"{self.criterion} violated: {w.message} (at {w.path})"

    def to_json(self) -> dict:
        return {
            "accepted": self.accepted,
            "criterion": self.criterion,
            "bounded": self.bounded,
            "bounds": {"bindings": dict(self.config.bindings),
                       "star_bound": self.config.star_bound},
            "witnesses": [w.to_json() for w in self.witnesses],
            "notes": list(self.notes),
        }


def _with_defaults(g: Term, cfg: InstantiationConfig | None) -> InstantiationConfig:
    cfg = (cfg or InstantiationConfig()).replace()
    for name in size_params(g):
        cfg.bindings.setdefault(name, DEFAULT_N)
    return cfg


def _is_bounded(g: Term, cfg: InstantiationConfig) -> bool:
    return any(isinstance(n, Star) or (isinstance(n, (NAry, Exp)) and isinstance(n.bound, str))
               for n in walk(g))


def _pair(e1: Event, e2: Event) -> str:
    return (f"{e1.sender}->{e1.receiver}:{e1.label} ; "
            f"{e2.sender}->{e2.receiver}:{e2.label}")


# ---------------------------------------------------------------- SP


def _sp_pairs(left: Term, right: Term, cfg, path: str) -> list[Witness]:
    """(last, first) pairs across a sequencing point that break the two-event rule."""
    out = []
    lasts = sorted(last_set(left, cfg), key=Event.sort_key)
    firsts = sorted(first_set(right, cfg), key=Event.sort_key)
    for e1 in lasts:
        for e2 in firsts:
            if e2.sender != e1.receiver:
                out.append(Witness(path, _pair(e1, e2), e2.sender, (e1, e2)))
    return out


def _instance_pair(g: NAry) -> tuple[Term, Term]:
    return _subst(g.body, g.var, 1), _subst(g.body, g.var, 2)


def _sp_node(g: Term, cfg, path: str) -> list[Witness]:
    match g:
        case Seq(left, right):
            return _sp_pairs(left, right, cfg, path)
        case SeqN():
            g1, g2 = _instance_pair(g)
            return _sp_pairs(g1, g2, cfg, path)
        case Exp(body, _) | Star(body):
            return _sp_pairs(body, body, cfg, path)
    return []


def _child_paths(g: Term, path: str):
    from systema.ast import _child_labels

    return [(c, f"{path}.{label}") for label, c in zip(_child_labels(g), g.children())]


def check_sp(g: Term, cfg: InstantiationConfig | None = None) -> Verdict:
    """Sequential projectability of every ``;``, n-ary ``seq``, ``^n`` and ``*`` in ``g``."""
    cfg = _with_defaults(g, cfg)
    witnesses: list[Witness] = []

    def go(node: Term, path: str) -> None:
        witnesses.extend(_sp_node(node, cfg, path))
        for c, p in _child_paths(node, path):
            go(c, p)

    go(g, "root")
    return Verdict(not witnesses, "SP", witnesses, cfg, bounded=False)


# ---------------------------------------------------------------- CP


def _deciding_sender(firsts1: set[Event], firsts2: set[Event], p: ProcessName) -> bool:
    """Condition (i): every opening event of both branches is sent by ``p`` and
    each cross pair differs in receiver or label."""
    for e1 in firsts1:
        for e2 in firsts2:
            if e1.sender != p or e2.sender != p:
                return False
            if e1.receiver == p or e2.receiver == p:
                return False
            if e1.receiver == e2.receiver and e1.label == e2.label:
                return False
    return True


def _distinct_receives(a, b) -> bool:
    """Both projected actions are receives, from different peers or of different labels."""
    if not (isinstance(a, Recv) and isinstance(b, Recv)):
        return False
    return a.peer != b.peer or a.label != b.label


def _views(ts, p: ProcessName) -> dict:
    groups: dict = {}
    for t in ts:
        groups.setdefault(project_trace(t, p), t)
    return groups


def _cp(g1: Term, g2: Term, cfg: InstantiationConfig, path: str,
        criterion: str = "CP") -> Verdict:
    t1s = sorted(global_traces(g1, cfg), key=len)
    t2s = sorted(global_traces(g2, cfg), key=len)
    f1, f2 = first_set(g1, cfg), first_set(g2, cfg)
    procs = ground_participants(Choice(g1, g2), cfg.bindings, DEFAULT_N)
    witnesses = []
    for p in sorted(procs, key=ProcessName.sort_key):
        if _deciding_sender(f1, f2, p):
            continue
        bad = _first_cp_failure(_views(t1s, p), _views(t2s, p))
        if bad is not None:
            (v1, t1), (v2, t2), i = bad
            if i is not None and i <= len(t1) and t1[i - 1].sender == p:
                why = f"{p} must choose but is the sender at position {i}"
            else:
                why = f"{p} cannot tell the branches apart at position {i}"
            witnesses.append(Witness(path, why, p, traces=(t1, t2), index=i))
    return Verdict(not witnesses, criterion, witnesses, cfg, bounded=_is_bounded(Choice(g1, g2), cfg))


def _first_cp_failure(views1: dict, views2: dict):
    for v1, t1 in views1.items():
        for v2, t2 in views2.items():
            i = distinctive_view_point(v1, v2)
            if i is None:
                continue
            a = v1[i - 1] if i <= len(v1) else EMPTY
            b = v2[i - 1] if i <= len(v2) else EMPTY
            if not _distinct_receives(a, b):
                return (v1, t1), (v2, t2), i
    return None


def check_cp(g: Term, cfg: InstantiationConfig | None = None, path: str = "root") -> Verdict:
    """Choice-wise projectability of a ``+``, ``~``, n-ary ``choice`` or n-ary ``shuffle`` node."""
    cfg = _with_defaults(g, cfg)
    match g:
        case Choice(left, right) | Shuffle(left, right):
            return _cp(left, right, cfg, path)
        case ChoiceN() | ShuffleN():
            g1, g2 = _instance_pair(g)
            return _cp(g1, g2, cfg, path)
    raise TypeError(f"CP applies to choice and shuffle nodes, not {type(g).__name__}")


def check_kp(star_body: Term, continuation: Term, cfg: InstantiationConfig | None = None,
             path: str = "root") -> Verdict:
    """Kleene-star projectability of ``star_body* ; continuation``."""
    cfg = _with_defaults(Choice(star_body, continuation), cfg)
    return _cp(star_body, continuation, cfg, path, criterion="KP")


# ---------------------------------------------------------------- PP


def _pp_one_way(g1: Term, g2: Term, cfg, path: str) -> list[Witness]:
    t1s = sorted(global_traces(g1, cfg), key=len)
    t2s = sorted(global_traces(g2, cfg), key=len)
    events2: dict[Event, Trace] = {}
    for t in t2s:
        for e in t:
            events2.setdefault(e, t)
    procs = ground_participants(Parallel(g1, g2), cfg.bindings, DEFAULT_N)
    out = []
    for p in sorted(procs, key=ProcessName.sort_key):
        bad = _first_pp_failure(t1s, events2, p)
        if bad is not None:
            t1, t1b, i, e, t2 = bad
            out.append(Witness(
                path, f"distinctive event {e} of {p} at position {i} also occurs in the "
                      f"parallel branch", p, (e,), (t1, t1b, t2), i))
    return out


def _first_pp_failure(t1s, events2: dict, p: ProcessName):
    groups: dict = {}
    for t in t1s:
        groups.setdefault(project_trace(t, p), []).append(t)
    views = list(groups)
    for v in views:
        for vb in views:
            i = distinctive_view_point(v, vb)
            if i is None:
                continue
            a = v[i - 1] if i <= len(v) else EMPTY
            b = vb[i - 1] if i <= len(vb) else EMPTY
            if isinstance(a, Send) and isinstance(b, Send):
                continue  # (b): p sends at the distinctive point in both traces
            for t in groups[v]:
                for tb in groups[vb]:
                    for e in (t[i - 1] if i <= len(t) else None,
                              tb[i - 1] if i <= len(tb) else None):
                        if e is not None and e in events2:
                            return t, tb, i, e, events2[e]
    return None


def check_pp(g: Term, cfg: InstantiationConfig | None = None, path: str = "root",
             symmetric_exemption: bool = False) -> Verdict:
    """Parallel projectability of a ``|`` or n-ary ``par`` node, in both operand orders.

    With ``symmetric_exemption`` a node whose two operands (or two instances)
    are identical is accepted without the trace check.
    """
    cfg = _with_defaults(g, cfg)
    match g:
        case Parallel(left, right):
            g1, g2 = left, right
        case ParallelN():
            g1, g2 = _instance_pair(g)
        case _:
            raise TypeError(f"PP applies to parallel nodes, not {type(g).__name__}")
    if symmetric_exemption and g1 == g2:
        return Verdict(True, "PP", [], cfg, bounded=False,
                       notes=[f"{path}: identical parallel branches exempted"])
    witnesses = _pp_one_way(g1, g2, cfg, path) + _pp_one_way(g2, g1, cfg, path)
    return Verdict(not witnesses, "PP", witnesses, cfg, bounded=_is_bounded(g, cfg))


# ---------------------------------------------------------------- PR


class _Reject(Exception):
    def __init__(self, verdict: Verdict):
        self.verdict = verdict


def _seq_items(g: Term) -> list[Term]:
    if isinstance(g, Seq):
        return _seq_items(g.left) + _seq_items(g.right)
    return [g]


class _PR:
    def __init__(self, cfg: InstantiationConfig, symmetric_exemption: bool):
        self.cfg = cfg
        self.symmetric_exemption = symmetric_exemption
        self.bounded = False
        self.notes: list[str] = []

    def require(self, verdict: Verdict) -> None:
        self.bounded |= verdict.bounded
        self.notes.extend(verdict.notes)
        if not verdict.accepted:
            raise _Reject(verdict)

    def sp(self, witnesses: list[Witness]) -> None:
        self.require(Verdict(not witnesses, "SP", witnesses, self.cfg))

    def check(self, g: Term, path: str) -> None:
        cfg = self.cfg
        match g:
            case Empty() | Interaction():
                return
            case Seq():
                self.spine(_seq_items(g), path)
            case Star():
                self.notes.append(f"{path}: star without continuation checked as '* ; skip'")
                self.star_block(g, EMPTY, path)
            case Exp(body, _):
                self.check(body, f"{path}.body")
                self.sp(_sp_pairs(body, body, cfg, path))
            case Choice(left, right) | Shuffle(left, right):
                self.check(left, f"{path}.left")
                self.check(right, f"{path}.right")
                self.require(_cp(left, right, cfg, path))
            case Parallel(left, right):
                self.check(left, f"{path}.left")
                self.check(right, f"{path}.right")
                self.require(check_pp(g, cfg, path, self.symmetric_exemption))
            case NAry():
                g1, g2 = _instance_pair(g)
                self.check(g1, f"{path}{{1/{g.var}}}")
                self.check(g2, f"{path}{{2/{g.var}}}")
                if isinstance(g, SeqN):
                    self.sp(_sp_pairs(g1, g2, cfg, path))
                elif isinstance(g, (ChoiceN, ShuffleN)):
                    self.require(_cp(g1, g2, cfg, path))
                else:
                    self.require(check_pp(g, cfg, path, self.symmetric_exemption))
            case _:
                raise TypeError(f"PR is defined on global types, not {type(g).__name__}")

    def spine(self, items: list[Term], path: str) -> None:
        """A flattened ``;`` chain; each star is grouped with what follows it."""
        head, rest = items[0], items[1:]
        rest_term = _fold_right(rest)
        if isinstance(head, Star):
            self.star_block(head, rest_term, path)
            return
        self.check(head, f"{path}[0]")
        if rest:
            self.spine(rest, path + "+")
            self.sp(_sp_pairs(head, rest_term, self.cfg, path))

    def star_block(self, star: Star, cont: Term, path: str) -> None:
        body = star.body
        self.check(body, f"{path}.body")
        if isinstance(cont, Seq):
            self.spine(_seq_items(cont), path + "+")
        else:
            self.check(cont, path + "+")
        # KP first: it is the condition particular to this rule
        self.require(check_kp(body, cont, self.cfg, path))
        self.sp(_sp_pairs(body, body, self.cfg, path))
        self.sp(_sp_pairs(star, cont, self.cfg, path))


def _fold_right(items: list[Term]) -> Term:
    if not items:
        return EMPTY
    acc = items[-1]
    for t in reversed(items[:-1]):
        acc = Seq(t, acc)
    return acc


def check_pr(g: Term, cfg: InstantiationConfig | None = None,
             symmetric_exemption: bool = False) -> Verdict:
    """Membership in PR by structural induction; reports the first violated criterion."""
    cfg = _with_defaults(g, cfg)
    run = _PR(cfg, symmetric_exemption)
    try:
        run.check(g, "root")
    except _Reject as rej:
        v = rej.verdict
        v.bounded = v.bounded or run.bounded
        v.notes = run.notes + [n for n in v.notes if n not in run.notes]
        return v
    return Verdict(True, "PR", [], cfg, bounded=run.bounded, notes=run.notes)

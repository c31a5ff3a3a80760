"""Reduction system and normal forms for local types.

Rules, applied at any position:

R1  units          ε ; L → L,  L ; ε → L,  ε | L → L,  L | ε → L,
                   ε ~ L → L,  L ~ ε → L (the last two only with R6 on)
R2  collapse       ε* → ε,  (ε + L)* → L*,  (L + ε)* → L*,  ε^n → ε,
                   op i in 1..n { ε } → ε,
                   when decided → branch,  when x = y { A } else { A } → A,
                   seq/par/shuffle i in 1..n { when i = k { A } else { ε } } → A
R3  shuffle        L1 ~ L2 → (L1 ; L2) + (L2 ; L1)
R4  association    (A op B) op C → A op (B op C)      for ;  +  |
R5  commutation    adjacent operands of + and | are swapped into term order
R6  idempotence    A + A → A,  A + (A + C) → A + C

Every rule preserves the trace language.  Termination: R3 removes a shuffle
and only copies shuffles strictly below it; R1/R2/R6 shrink the term; R4 and R5
decrease the usual rotation and inversion counts.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from systema.ast import (
    EMPTY, Choice, ChoiceN, Cond, Empty, Exp, Interaction, NAry, Parallel, Recv,
    Send, Seq, SeqN, Shuffle, ShuffleN, ParallelN, Star, Term, _index_key, free_vars,
    rename_free, replace_children, resolve_cond,
)

_RANK = {
    Empty: 0, Send: 1, Recv: 2, Interaction: 3, Seq: 4, Choice: 5, Parallel: 6,
    Shuffle: 7, Exp: 8, Star: 9, SeqN: 10, ChoiceN: 11, ParallelN: 12, ShuffleN: 13,
    Cond: 14,
}


def _size_key(b) -> tuple:
    return (0, b) if isinstance(b, int) else (1, b)


@lru_cache(maxsize=1 << 16)
def term_key(t: Term) -> tuple:
    """Total order on terms: node kind, then names, then children."""
    rank = _RANK[type(t)]
    match t:
        case Interaction(s, m, r):
            return (rank, s.sort_key(), m.sort_key(), r.sort_key())
        case Send(p, m) | Recv(p, m):
            return (rank, p.sort_key(), m.sort_key())
        case NAry(var=var, bound=bound, body=body):
            return (rank, var, _size_key(bound), term_key(body))
        case Exp(body, bound):
            return (rank, _size_key(bound), term_key(body))
        case Cond(left, right, then, orelse):
            return (rank, _index_key(left), _index_key(right), term_key(then), term_key(orelse))
    return (rank,) + tuple(term_key(c) for c in t.children())


def _collapse_nary_cond(t: NAry) -> Term | None:
    if isinstance(t, ChoiceN) or not isinstance(t.body, Cond):
        return None
    c = t.body
    if not isinstance(c.orelse, Empty):
        return None
    if c.left == t.var:
        other = c.right
    elif c.right == t.var:
        other = c.left
    else:
        return None
    if other == t.var or t.var in free_vars(c.then):
        return None
    if isinstance(other, int) and isinstance(t.bound, int) and other > t.bound:
        return EMPTY
    return c.then


def _simplify_root(t: Term, idempotence: bool) -> Term | None:
    """R1 and R2 at the root of ``t``."""
    match t:
        case Seq(Empty(), r) | Parallel(Empty(), r):
            return r
        case Seq(l, Empty()) | Parallel(l, Empty()):
            return l
        case Shuffle(Empty(), r) if idempotence:
            return r
        case Shuffle(l, Empty()) if idempotence:
            return l
        case Star(Empty()) | Exp(Empty(), _):
            return EMPTY
        case Star(Choice(Empty(), body)) | Star(Choice(body, Empty())):
            return Star(body)
        case NAry(body=Empty()):
            return EMPTY
        case Cond(left, right, then, orelse):
            decided = resolve_cond(left, right)
            if decided is True:
                return then
            if decided is False or then == orelse:
                return orelse
        case NAry():
            return _collapse_nary_cond(t)
    return None


def _root_rewrite(t: Term, idempotence: bool = True) -> Term | None:
    r = _simplify_root(t, idempotence)
    if r is not None:
        return r
    match t:
        case Shuffle(l, r):
            return Choice(Seq(l, r), Seq(r, l))
        case Seq(Seq(a, b), c):
            return Seq(a, Seq(b, c))
        case Choice() | Parallel():
            op = type(t)
            a, b = t.left, t.right
            if isinstance(a, op):
                return op(a.left, op(a.right, b))
            dedup = idempotence and op is Choice
            if isinstance(b, op):
                b1, rest = b.left, b.right
                if dedup and a == b1:
                    return b
                if term_key(a) > term_key(b1):
                    return op(b1, op(a, rest))
            else:
                if dedup and a == b:
                    return a
                if term_key(a) > term_key(b):
                    return op(b, a)
    return None


def reduce_step(l: Term, idempotence: bool = True) -> Term | None:
    """One rewrite at the leftmost-innermost redex, or None in normal form."""
    kids = l.children()
    for i, c in enumerate(kids):
        r = reduce_step(c, idempotence)
        if r is not None:
            return replace_children(l, kids[:i] + (r,) + kids[i + 1:])
    return _root_rewrite(l, idempotence)


def redex_paths(t: Term, idempotence: bool = True) -> list[tuple[int, ...]]:
    """Positions (child-index paths) of every redex in ``t``."""
    out = []

    def go(node: Term, path: tuple[int, ...]) -> None:
        if _root_rewrite(node, idempotence) is not None:
            out.append(path)
        for i, c in enumerate(node.children()):
            go(c, path + (i,))

    go(t, ())
    return out


def rewrite_at(t: Term, path: tuple[int, ...], idempotence: bool = True) -> Term:
    if not path:
        r = _root_rewrite(t, idempotence)
        if r is None:
            raise ValueError("no redex at this position")
        return r
    kids = list(t.children())
    kids[path[0]] = rewrite_at(kids[path[0]], path[1:], idempotence)
    return replace_children(t, kids)


@dataclass(frozen=True)
class NormalForm:
    term: Term
    steps: int  # reductions applied to reach ``term``

    def __str__(self) -> str:
        return str(self.term)


@lru_cache(maxsize=1 << 16)
def _nf(t: Term, idempotence: bool) -> tuple[Term, int]:
    steps = 0
    kids = []
    for c in t.children():
        k, s = _nf(c, idempotence)
        kids.append(k)
        steps += s
    t = replace_children(t, kids)
    r = _root_rewrite(t, idempotence)
    if r is None:
        return t, steps
    k, s = _nf(r, idempotence)
    return k, steps + s + 1


def normalize(l: Term, idempotence: bool = True) -> NormalForm:
    """Innermost-first normalization; bodies of binders, stars and exponents
    are normalized in place without unrolling."""
    term, steps = _nf(l, idempotence)
    return NormalForm(term, steps)


def eliminate_epsilon(l: Term) -> Term:
    """Apply only the unit and collapse rules (R1, R2), plus ε + ε → ε, bottom-up."""
    t = replace_children(l, [eliminate_epsilon(c) for c in l.children()])
    while True:
        if isinstance(t, Choice) and isinstance(t.left, Empty) and isinstance(t.right, Empty):
            return EMPTY
        r = _simplify_root(t, idempotence=True)
        if r is None:
            return t
        t = r


def _rename(t: Term, name_for, depth: int) -> Term:
    if isinstance(t, NAry):
        new = name_for(depth)
        body = rename_free(t.body, t.var, new)
        return type(t)(new, t.bound, _rename(body, name_for, depth + 1))
    return replace_children(t, [_rename(c, name_for, depth) for c in t.children()])


def rename_bound(t: Term) -> Term:
    """α-rename binders to canonical names that depend only on nesting depth."""
    counter = itertools.count()
    # unique names first, so that the depth-based names cannot be captured
    t = _rename(t, lambda _: f"#{next(counter)}", 0)
    return _rename(t, lambda d: f"${d}", 0)


def canonical(l: Term, idempotence: bool = True) -> Term:
    t = l
    for _ in range(8):
        nxt = normalize(rename_bound(t), idempotence).term
        if nxt == t:
            break
        t = nxt
    return t


def equivalent(l1: Term, l2: Term, idempotence: bool = True) -> bool:
    """Structural equivalence of normal forms up to renaming of bound indices.

    Free process and message names must match exactly.
    """
    return canonical(l1, idempotence) == canonical(l2, idempotence)

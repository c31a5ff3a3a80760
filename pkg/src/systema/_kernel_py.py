"""Pure-Python hot loops.  ``_ckernel.pyx`` mirrors this module line for line."""
from __future__ import annotations

SEND = 0
RECV = 1


class _TooMany(Exception):
    pass


def interleavings(a: tuple, b: tuple, cap: int | None = None) -> set:
    """All order-preserving merges of two sequences.

    With ``cap``, returns None as soon as any partial result exceeds it;
    each partial set embeds injectively into the final one.
    """
    memo: dict = {}

    def go(i: int, j: int):
        key = (i, j)
        if key in memo:
            return memo[key]
        if i == len(a):
            res = {b[j:]}
        elif j == len(b):
            res = {a[i:]}
        else:
            res = {(a[i],) + s for s in go(i + 1, j)}
            res.update((b[j],) + s for s in go(i, j + 1))
            if cap is not None and len(res) > cap:
                raise _TooMany
        memo[key] = res
        return res

    try:
        return go(0, 0)
    except _TooMany:
        return None


def interleave_sets(left, right, cap: int) -> set:
    """Union of the interleavings of every pair; None once it exceeds ``cap``."""
    out: set = set()
    for a in left:
        for b in right:
            merged = interleavings(a, b, cap)
            if merged is None:
                return None
            out |= merged
            if len(out) > cap:
                return None
    return out


def explore(trans, nullable, n_slots: int, max_states: int, record_on_send: bool):
    """Enumerate the traces of complete executions of a product of automata.

    ``trans[p][s]`` lists ``(kind, slot, target)`` moves of process ``p`` in
    local state ``s``; a slot identifies one (sender, label, receiver) triple
    and doubles as the buffer index for that triple.  A send increments the
    slot's buffer count; a receive needs a positive count and decrements it.
    An execution is complete when every process sits in a nullable state and
    every buffer is empty.  Each trace lists slots in the order their events
    were recorded (at receive, or at send when ``record_on_send``).

    Returns ``(traces, visited_states, truncated)``.
    """
    n_procs = len(trans)
    memo: dict = {}
    truncated = False

    def visit(procs: tuple, buf: tuple):
        nonlocal truncated
        key = (procs, buf)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if len(memo) >= max_states:
            truncated = True
            return frozenset()
        result = set()
        done = True
        for p in range(n_procs):
            if not nullable[p][procs[p]]:
                done = False
                break
        if done and not any(buf):
            result.add(())
        for p in range(n_procs):
            for kind, slot, target in trans[p][procs[p]]:
                if kind == RECV and buf[slot] == 0:
                    continue
                nprocs = procs[:p] + (target,) + procs[p + 1:]
                delta = 1 if kind == SEND else -1
                nbuf = buf[:slot] + (buf[slot] + delta,) + buf[slot + 1:]
                sub = visit(nprocs, nbuf)
                if not sub:
                    continue
                if (kind == RECV) != record_on_send:
                    result.update((slot,) + s for s in sub)
                else:
                    result.update(sub)
        frozen = frozenset(result)
        memo[key] = frozen
        return frozen

    start = (tuple(0 for _ in range(n_procs)), tuple(0 for _ in range(n_slots)))
    traces = visit(*start)
    return traces, len(memo), truncated

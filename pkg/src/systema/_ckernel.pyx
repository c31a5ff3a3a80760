# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twin of ``_kernel_py``; same signatures, same results."""

cdef enum:
    SEND = 0
    RECV = 1


class _TooMany(Exception):
    pass


cdef class _Interleaver:
    cdef tuple a, b
    cdef Py_ssize_t la, lb, cap
    cdef list memo

    def __init__(self, tuple a, tuple b, Py_ssize_t cap=-1):
        self.a = a
        self.b = b
        self.la = len(a)
        self.lb = len(b)
        self.cap = cap
        self.memo = [None] * ((self.la + 1) * (self.lb + 1))

    cdef set go(self, Py_ssize_t i, Py_ssize_t j):
        cdef Py_ssize_t key = i * (self.lb + 1) + j
        cdef set res
        cdef tuple s, head
        cached = self.memo[key]
        if cached is not None:
            return <set>cached
        if i == self.la:
            res = {self.b[j:]}
        elif j == self.lb:
            res = {self.a[i:]}
        else:
            res = set()
            head = (self.a[i],)
            for s in self.go(i + 1, j):
                res.add(head + s)
            head = (self.b[j],)
            for s in self.go(i, j + 1):
                res.add(head + s)
            if self.cap >= 0 and len(res) > self.cap:
                raise _TooMany()
        self.memo[key] = res
        return res


def interleavings(tuple a, tuple b, cap=None):
    try:
        return _Interleaver(a, b, -1 if cap is None else cap).go(0, 0)
    except _TooMany:
        return None


def interleave_sets(left, right, Py_ssize_t cap):
    cdef set out = set()
    cdef tuple a, b
    for a in left:
        for b in right:
            try:
                out |= _Interleaver(a, b, cap).go(0, 0)
            except _TooMany:
                return None
            if len(out) > cap:
                return None
    return out


cdef class _Explorer:
    cdef list trans
    cdef list nullable
    cdef Py_ssize_t n_procs
    cdef Py_ssize_t max_states
    cdef bint record_on_send
    cdef dict memo
    cdef public bint truncated

    def __init__(self, list trans, list nullable, Py_ssize_t max_states, bint record_on_send):
        self.trans = trans
        self.nullable = nullable
        self.n_procs = len(trans)
        self.max_states = max_states
        self.record_on_send = record_on_send
        self.memo = {}
        self.truncated = False

    cdef frozenset visit(self, tuple procs, tuple buf):
        cdef object key = (procs, buf)
        cdef Py_ssize_t p, slot, target, kind, delta, count
        cdef bint done
        cdef set result
        cdef frozenset sub, frozen
        cdef tuple nprocs, nbuf, s, move
        hit = self.memo.get(key)
        if hit is not None:
            return <frozenset>hit
        if len(self.memo) >= self.max_states:
            self.truncated = True
            return frozenset()
        result = set()
        done = True
        for p in range(self.n_procs):
            if not (<list>self.nullable[p])[<Py_ssize_t>procs[p]]:
                done = False
                break
        if done and not any(buf):
            result.add(())
        for p in range(self.n_procs):
            for move in (<list>(<list>self.trans[p])[<Py_ssize_t>procs[p]]):
                kind = move[0]
                slot = move[1]
                target = move[2]
                count = buf[slot]
                if kind == RECV and count == 0:
                    continue
                nprocs = procs[:p] + (target,) + procs[p + 1:]
                delta = 1 if kind == SEND else -1
                nbuf = buf[:slot] + (count + delta,) + buf[slot + 1:]
                sub = self.visit(nprocs, nbuf)
                if not sub:
                    continue
                if (kind == RECV) != self.record_on_send:
                    head = (slot,)
                    for s in sub:
                        result.add(head + s)
                else:
                    result.update(sub)
        frozen = frozenset(result)
        self.memo[key] = frozen
        return frozen


def explore(trans, nullable, Py_ssize_t n_slots, Py_ssize_t max_states, bint record_on_send):
    cdef _Explorer ex = _Explorer(list(trans), list(nullable), max_states, record_on_send)
    start_procs = tuple(0 for _ in range(len(trans)))
    start_buf = tuple(0 for _ in range(n_slots))
    traces = ex.visit(start_procs, start_buf)
    return traces, len(ex.memo), ex.truncated

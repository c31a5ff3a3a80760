"""Projection of global types onto participants."""
from __future__ import annotations

from systema.ast import (
    EMPTY, Binary, Cond, Empty, Exp, Interaction, NAry, ProcessName, Recv, Send, Star, Term,
    _subst, free_vars, ground_participants, participants, size_params, walk,
)

Environment = dict  # ProcessName -> local type, ordered by participant


def _match(name: ProcessName, p: ProcessName, distinct: frozenset[str]):
    """True/False if ``name`` is decided to denote ``p``, else the undecided index pair."""
    if name.base != p.base or (name.index is None) != (p.index is None):
        return False
    if name.index == p.index:
        return True
    if isinstance(name.index, str) and name.index in distinct:
        return False
    if isinstance(name.index, int) and isinstance(p.index, int):
        return False
    if isinstance(name.index, str) and isinstance(p.index, str):
        # an unrelated free variable; projection onto a fresh family member
        return False
    return (p.index, name.index)


def _guard(decision, then: Term, orelse: Term) -> Term:
    if decision is True:
        return then
    if decision is False:
        return orelse
    left, right = decision
    return Cond(left, right, then, orelse)


def _mentions_family(body: Term, base: str, var: str) -> bool:
    def go(node: Term) -> bool:
        if isinstance(node, NAry) and node.var == var:
            return False
        if isinstance(node, Interaction):
            return any(n.base == base and n.index == var for n in (node.sender, node.receiver))
        return any(go(c) for c in node.children())

    return go(body)


def _project(g: Term, p: ProcessName, distinct: frozenset[str]) -> Term:
    match g:
        case Empty():
            return EMPTY
        case Interaction(a, m, b):
            # P-Interaction, with a guard when a family member may or may not be p
            as_receiver = _guard(_match(b, p, distinct), Recv(a, m), EMPTY)
            return _guard(_match(a, p, distinct), Send(b, m), as_receiver)
        case Exp(body, bound):
            return Exp(_project(body, p, distinct), bound)
        case Star(body):
            return Star(_project(body, p, distinct))
        case Binary(left=left, right=right):
            return type(g)(_project(left, p, distinct), _project(right, p, distinct))
        case NAry(var=var, bound=bound, body=body):
            if p.index is not None and _mentions_family(body, p.base, var):
                # case split: the instance i = k versus every other instance
                then = _project(_subst(body, var, p.index), p, distinct)
                orelse = _project(body, p, distinct | {var})
                inner = Cond(var, p.index, then, orelse)
            else:
                inner = _project(body, p, distinct)
            return type(g)(var, bound, inner)
    raise TypeError(f"cannot project {type(g).__name__}")


def project(g: Term, p: ProcessName, simplify: bool = False) -> Term:
    """``g`` projected onto ``p`` by structural recursion.

    ``p`` may be a plain process, a ground family member ``c[2]`` or a family
    member with a variable index ``c[k]``; in the latter two cases binders
    that range over the family split into ``when i = k { ... } else { ... }``.
    The raw result keeps every ε; pass ``simplify=True`` for ε-elimination.
    """
    if isinstance(p.index, str):
        bound_vars = {n.var for n in walk(g) if isinstance(n, NAry)}
        if p.index in bound_vars:
            raise ValueError(f"family variable {p.index} clashes with a binder in the global type")
    local = _project(g, p, frozenset())
    if simplify:
        from systema.normalize import eliminate_epsilon

        local = eliminate_epsilon(local)
    return local


def fresh_var(g: Term, preferred: str = "k") -> str:
    taken = {n.var for n in walk(g) if isinstance(n, NAry)} | free_vars(g) | size_params(g)
    if preferred not in taken:
        return preferred
    i = 1
    while f"{preferred}{i}" in taken:
        i += 1
    return f"{preferred}{i}"


def _sorted(names) -> list[ProcessName]:
    return sorted(names, key=lambda n: n.sort_key())


def project_env(g: Term, bindings: dict[str, int] | None = None,
                simplify: bool = False) -> Environment:
    """Map every participant of ``g`` to its projection.

    When ``bindings`` cover all size parameters, the keys are the ground
    participants (every family member ``c[1]..c[n]``).  Otherwise each family
    is represented by a member ``c[k]`` with a fresh variable ``k`` plus the
    members ``c[1]`` and ``c[2]``.
    """
    bindings = bindings or {}
    if size_params(g) <= set(bindings):
        keys = _sorted(ground_participants(g, bindings))
    else:
        k = fresh_var(g)
        keys = set()
        for name in participants(g, instances=True):
            keys.add(name.with_index(k) if isinstance(name.index, str) else name)
        keys = _sorted(keys)
    return {p: project(g, p, simplify=simplify) for p in keys}


def project_event(e, p: ProcessName) -> Term:
    """Projection of one ground event; ``e`` has sender, label and receiver."""
    if e.sender == p:
        return Send(e.receiver, e.label)
    if e.receiver == p:
        return Recv(e.sender, e.label)
    return EMPTY


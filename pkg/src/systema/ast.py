"""Term representations for global and local types.

Global and local types share their combinator nodes (``Seq``, ``Choice``,
``Parallel``, ``Shuffle``, the four n-ary binders, ``Exp`` and ``Star``).
They differ only in their leaves: ``Interaction`` for global types,
``Send``/``Recv`` for local types.  ``Cond`` is a local-only node produced
when projecting onto one member of an indexed process family; it selects a
branch depending on whether two indices are equal.

All terms are immutable and hashable.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Union

from systema.errors import Diagnostic

# An index is a literal natural number (>= 1) or the name of an index variable.
Index = Union[int, str]
# A size is a literal natural number (>= 1) or the name of a size parameter.
Size = Union[int, str]


def _index_key(index: Index | None) -> tuple:
    if index is None:
        return (0,)
    if isinstance(index, int):
        return (1, index)
    return (2, index)


def format_index(index: Index) -> str:
    return str(index)


@dataclass(frozen=True, order=False)
class Name:
    base: str
    index: Index | None = None

    def __str__(self) -> str:
        if self.index is None:
            return self.base
        return f"{self.base}[{self.index}]"

    def sort_key(self) -> tuple:
        return (self.base, _index_key(self.index))

    @property
    def is_ground(self) -> bool:
        return not isinstance(self.index, str)

    def with_index(self, index: Index | None) -> "Name":
        return type(self)(self.base, index)


class ProcessName(Name):
    """A participant such as ``s``, ``c[1]`` or the family member ``c[i]``."""


class MessageLabel(Name):
    """A message type such as ``ack`` or ``lock[i]``."""


def _term(cls):
    """Make ``cls`` a frozen dataclass whose hash is computed once."""
    cls = dataclass(frozen=True)(cls)
    field_names = tuple(f.name for f in dataclasses.fields(cls))

    def __hash__(self):
        try:
            return self.__dict__["_hash"]
        except KeyError:
            h = hash((cls.__name__,) + tuple(getattr(self, n) for n in field_names))
            object.__setattr__(self, "_hash", h)
            return h

    cls.__hash__ = __hash__
    return cls


class Term:
    """Base class of every global and local type node."""

    def children(self) -> tuple["Term", ...]:
        return ()

    def __str__(self) -> str:
        from systema.parser import print_term

        return print_term(self)


@_term
class Empty(Term):
    pass


EMPTY = Empty()


@_term
class Interaction(Term):
    sender: ProcessName
    label: MessageLabel
    receiver: ProcessName


@_term
class Send(Term):
    peer: ProcessName
    label: MessageLabel


@_term
class Recv(Term):
    peer: ProcessName
    label: MessageLabel


class Binary(Term):
    left: Term
    right: Term

    def children(self):
        return (self.left, self.right)


@_term
class Seq(Binary):
    left: Term
    right: Term


@_term
class Choice(Binary):
    left: Term
    right: Term


@_term
class Parallel(Binary):
    left: Term
    right: Term


@_term
class Shuffle(Binary):
    left: Term
    right: Term


class NAry(Term):
    """``op`` folded over ``body`` with ``var`` ranging over 1..bound."""

    var: str
    bound: Size
    body: Term

    def children(self):
        return (self.body,)


@_term
class SeqN(NAry):
    var: str
    bound: Size
    body: Term


@_term
class ChoiceN(NAry):
    var: str
    bound: Size
    body: Term


@_term
class ParallelN(NAry):
    var: str
    bound: Size
    body: Term


@_term
class ShuffleN(NAry):
    var: str
    bound: Size
    body: Term


@_term
class Exp(Term):
    body: Term
    bound: Size

    def children(self):
        return (self.body,)


@_term
class Star(Term):
    body: Term

    def children(self):
        return (self.body,)


@_term
class Cond(Term):
    """``then`` when the indices ``left`` and ``right`` are equal, else ``orelse``."""

    left: Index
    right: Index
    then: Term
    orelse: Term

    def children(self):
        return (self.then, self.orelse)


BINARY_OF_NARY: dict[type, type] = {
    SeqN: Seq,
    ChoiceN: Choice,
    ParallelN: Parallel,
    ShuffleN: Shuffle,
}

GlobalType = Term
LocalType = Term


def replace_children(t: Term, children: Iterable[Term]) -> Term:
    kids = tuple(children)
    if isinstance(t, Binary):
        left, right = kids
        if left is t.left and right is t.right:
            return t
        return type(t)(left, right)
    if isinstance(t, NAry):
        (body,) = kids
        return t if body is t.body else type(t)(t.var, t.bound, body)
    if isinstance(t, Exp):
        (body,) = kids
        return t if body is t.body else Exp(body, t.bound)
    if isinstance(t, Star):
        (body,) = kids
        return t if body is t.body else Star(body)
    if isinstance(t, Cond):
        then, orelse = kids
        return Cond(t.left, t.right, then, orelse)
    return t


def walk(t: Term) -> Iterator[Term]:
    """Pre-order traversal."""
    stack = [t]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children()))


def fold(op: Callable[[Term, Term], Term], terms: list[Term]) -> Term:
    """Left-nested fold; the empty list folds to ε."""
    if not terms:
        return EMPTY
    acc = terms[0]
    for t in terms[1:]:
        acc = op(acc, t)
    return acc


# ---------------------------------------------------------------- substitution


def _subst_index(index: Index | None, var: str, value: Index) -> Index | None:
    return value if index == var else index


def _subst_name(name: Name, var: str, value: Index) -> Name:
    if name.index == var:
        return name.with_index(value)
    return name


def resolve_cond(left: Index, right: Index) -> bool | None:
    """True/False when the equality of two indices is decided, else None."""
    if left == right:
        return True
    if isinstance(left, int) and isinstance(right, int):
        return False
    return None


def _subst(t: Term, var: str, value: Index) -> Term:
    match t:
        case Interaction(s, m, r):
            return Interaction(_subst_name(s, var, value), _subst_name(m, var, value),
                               _subst_name(r, var, value))
        case Send(p, m):
            return Send(_subst_name(p, var, value), _subst_name(m, var, value))
        case Recv(p, m):
            return Recv(_subst_name(p, var, value), _subst_name(m, var, value))
        case NAry() if t.var == var:
            return t
        case Cond(left, right, then, orelse):
            left = _subst_index(left, var, value)
            right = _subst_index(right, var, value)
            decided = resolve_cond(left, right)
            if decided is True:
                return _subst(then, var, value)
            if decided is False:
                return _subst(orelse, var, value)
            return Cond(left, right, _subst(then, var, value), _subst(orelse, var, value))
        case Empty():
            return t
    return replace_children(t, [_subst(c, var, value) for c in t.children()])


def substitute(term: Term, var: str, value: int) -> Term:
    """Replace free occurrences of index variable ``var`` by the literal ``value``.

    Binders reusing ``var`` shadow it.  Substituting a variable that does not
    occur is the identity.
    """
    if not isinstance(value, int) or value < 1:
        raise ValueError(f"index values start at 1, got {value!r}")
    return _subst(term, var, value)


def rename_free(term: Term, var: str, new: str) -> Term:
    """Replace free occurrences of index variable ``var`` by variable ``new``."""
    return _subst(term, var, new)


def bind_sizes(t: Term, bindings: dict[str, int]) -> Term:
    """Replace size-parameter names with their bound values."""

    def size(b: Size) -> Size:
        return bindings.get(b, b) if isinstance(b, str) else b

    kids = [bind_sizes(c, bindings) for c in t.children()]
    t = replace_children(t, kids)
    if isinstance(t, NAry) and isinstance(t.bound, str) and t.bound in bindings:
        return type(t)(t.var, size(t.bound), t.body)
    if isinstance(t, Exp) and isinstance(t.bound, str) and t.bound in bindings:
        return Exp(t.body, size(t.bound))
    return t


# ---------------------------------------------------------------- queries


def _names(t: Term) -> Iterator[Name]:
    match t:
        case Interaction(s, m, r):
            yield s
            yield m
            yield r
        case Send(p, m) | Recv(p, m):
            yield p
            yield m


def free_vars(t: Term) -> set[str]:
    out: set[str] = set()

    def go(node: Term, bound: frozenset[str]) -> None:
        for name in _names(node):
            if isinstance(name.index, str) and name.index not in bound:
                out.add(name.index)
        if isinstance(node, Cond):
            for ix in (node.left, node.right):
                if isinstance(ix, str) and ix not in bound:
                    out.add(ix)
        if isinstance(node, NAry):
            bound = bound | {node.var}
        for c in node.children():
            go(c, bound)

    go(t, frozenset())
    return out


def size_params(t: Term) -> set[str]:
    out = set()
    for node in walk(t):
        if isinstance(node, (NAry, Exp)) and isinstance(node.bound, str):
            out.add(node.bound)
    return out


def is_ground(t: Term) -> bool:
    """No free index variables, no size parameters, no binders left unexpanded."""
    return not free_vars(t) and not size_params(t)


def participants(g: Term, instances: bool = False) -> set[ProcessName]:
    """Every sender, receiver or peer occurring syntactically in ``g``.

    Indexed families appear once under their variable (``c[i]``).  With
    ``instances=True`` the members ``c[1]`` and ``c[2]`` of every family bound
    by an n-ary node are reported as well.
    """
    out: set[ProcessName] = set()

    def go(node: Term, binders: frozenset[str]) -> None:
        match node:
            case Interaction(s, _, r):
                out.update((s, r))
            case Send(p, _) | Recv(p, _):
                out.add(p)
        if isinstance(node, NAry):
            binders = binders | {node.var}
        for c in node.children():
            go(c, binders)

    go(g, frozenset())
    if instances:
        for binder in (n for n in walk(g) if isinstance(n, NAry)):
            for k in (1, 2):
                go(_subst(binder.body, binder.var, k), frozenset())
    return out


def ground_participants(g: Term, bindings: dict[str, int] | None = None,
                        default: int | None = None) -> set[ProcessName]:
    """Participants after expanding every n-ary binder over its range."""
    bindings = bindings or {}
    out: set[ProcessName] = set()

    def go(node: Term) -> None:
        match node:
            case Interaction(s, _, r):
                out.update(n for n in (s, r) if n.is_ground)
                return
            case Send(p, _) | Recv(p, _):
                if p.is_ground:
                    out.add(p)
                return
            case NAry(var=var, bound=bound, body=body):
                n = bound if isinstance(bound, int) else bindings.get(bound, default)
                if n is None:
                    raise_unbound(bound)
                for k in range(1, n + 1):
                    go(_subst(body, var, k))
                return
        for c in node.children():
            go(c)

    go(g)
    return out


def raise_unbound(name: str):
    from systema.errors import UnboundParameterError

    raise UnboundParameterError(f"size parameter {name!r} is not bound")


# ---------------------------------------------------------------- well-formedness


def _child_labels(t: Term) -> tuple[str, ...]:
    if isinstance(t, Binary):
        return ("left", "right")
    if isinstance(t, Cond):
        return ("then", "else")
    if t.children():
        return ("body",)
    return ()


def well_formed(term: Term, free: Iterable[str] = ()) -> list[Diagnostic]:
    """Structural checks; an empty list means the term is well formed.

    Reports unbound index variables, self-messages, non-positive literal
    indices or bounds, and mixing of global and local leaves.
    """
    diags: list[Diagnostic] = []
    leaf_kinds: set[str] = set()

    def err(path: str, msg: str) -> None:
        diags.append(Diagnostic("error", msg, path=path))

    def check_index(ix: Index | None, bound: frozenset[str], path: str) -> None:
        if isinstance(ix, int) and ix < 1:
            err(path, f"index literal {ix} is below 1")
        elif isinstance(ix, str) and ix not in bound:
            err(path, f"unbound index {ix}")

    def go(node: Term, bound: frozenset[str], path: str) -> None:
        for name in _names(node):
            check_index(name.index, bound, path)
        match node:
            case Interaction(s, _, r):
                leaf_kinds.add("global")
                if s == r:
                    err(path, f"self-message {s} -> {r}")
            case Send() | Recv():
                leaf_kinds.add("local")
            case Cond(left, right, _, _):
                leaf_kinds.add("local")
                check_index(left, bound, path)
                check_index(right, bound, path)
            case NAry(bound=b) | Exp(bound=b):
                if isinstance(b, int) and b < 1:
                    err(path, f"size bound {b} is below 1")
        if isinstance(node, NAry):
            bound = bound | {node.var}
        for label, c in zip(_child_labels(node), node.children()):
            go(c, bound, f"{path}.{label}")

    go(term, frozenset(free), "root")
    if len(leaf_kinds) > 1:
        err("root", "term mixes global interactions with local send/receive actions")
    return diags

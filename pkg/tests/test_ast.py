import pytest

from systema.ast import (
    EMPTY, Choice, Cond, Interaction, MessageLabel, ProcessName, Send, Seq, SeqN, ShuffleN,
    Star, bind_sizes, free_vars, is_ground, participants, size_params, substitute, well_formed,
)
from systema.parser import parse_global, parse_local

P = ProcessName
M = MessageLabel


def ix(s, m, r):
    return Interaction(s, m, r)


def test_names_compare_on_base_and_index():
    assert P("c", 1) == P("c", 1)
    assert P("c", 1) != P("c", 2)
    assert P("c", 1) != P("c")
    assert str(P("c", "i")) == "c[i]"
    assert str(M("lock", 2)) == "lock[2]"


def test_terms_are_immutable_and_hashable():
    t = ix(P("a"), M("m"), P("b"))
    with pytest.raises(Exception):
        t.sender = P("z")
    assert hash(t) == hash(ix(P("a"), M("m"), P("b")))


def test_substitute_instantiates_family_member():
    g = ix(P("c", "i"), M("lock"), P("s"))
    assert substitute(g, "i", 1) == ix(P("c", 1), M("lock"), P("s"))


def test_substitute_absent_variable_is_identity():
    g = ix(P("a"), M("m"), P("b"))
    assert substitute(g, "i", 2) == g


def test_substitute_respects_binders():
    g = ShuffleN("i", "n", ix(P("c", "i"), M("lock"), P("s")))
    assert substitute(g, "i", 1) == g


def test_substitute_rejects_zero():
    with pytest.raises(ValueError):
        substitute(EMPTY, "i", 0)


def test_substitute_idempotent_and_commuting():
    g = parse_global("c[i] -> d[j] : m[i] ; d[j] -> c[i] : k", free_vars=("i", "j"))
    once = substitute(g, "i", 2)
    assert substitute(once, "i", 2) == once
    assert substitute(substitute(g, "i", 1), "j", 2) == substitute(substitute(g, "j", 2), "i", 1)


def test_substitute_resolves_conditions():
    l = Cond("i", "k", Send(P("s"), M("lock")), EMPTY)
    assert substitute(substitute(l, "i", 2), "k", 2) == Send(P("s"), M("lock"))
    assert substitute(substitute(l, "i", 2), "k", 1) == EMPTY


def test_participants():
    assert participants(parse_global("a -> b : m ; b -> c : k")) == {P("a"), P("b"), P("c")}
    lock = parse_global("shuffle i in 1..n { c[i] -> s : lock }")
    assert participants(lock) == {P("s"), P("c", "i")}
    assert participants(lock, instances=True) == {P("s"), P("c", "i"), P("c", 1), P("c", 2)}
    assert participants(EMPTY) == set()


def test_participants_of_instance_are_ground_instances():
    g = parse_global("shuffle i in 1..n { c[i] -> s : lock ; s -> c[i] : ack }")
    inst = substitute(g.body, "i", 2)
    assert participants(inst) <= participants(g, instances=True)


def test_well_formed_reports_self_message():
    diags = well_formed(ix(P("a"), M("m"), P("a")))
    assert len(diags) == 1
    assert "self-message" in diags[0].message
    assert diags[0].path == "root"


def test_well_formed_accepts_sliding_window(protocol):
    assert well_formed(protocol("sliding_window")) == []


def test_well_formed_reports_unbound_index():
    diags = well_formed(ix(P("c", "j"), M("m"), P("s")))
    assert diags and "j" in diags[0].message


def test_well_formed_reports_zero_bound():
    diags = well_formed(SeqN("i", 0, ix(P("c", "i"), M("m"), P("s"))))
    assert diags


def test_well_formed_rejects_mixed_leaves():
    diags = well_formed(Seq(ix(P("a"), M("m"), P("b")), Send(P("b"), M("m"))))
    assert diags


def test_free_vars_and_size_params():
    g = parse_global("par i in 1..n { a[i] -> b : m[j] }^k", free_vars=("j",))
    assert free_vars(g) == {"j"}
    assert size_params(g) == {"n", "k"}
    assert not is_ground(g)
    bound = bind_sizes(g, {"n": 2, "k": 1})
    assert size_params(bound) == set()


def test_star_and_choice_children():
    l = parse_local("(b ! m + b ? k)*")
    assert isinstance(l, Star) and isinstance(l.body, Choice)
    assert l.children() == (l.body,)

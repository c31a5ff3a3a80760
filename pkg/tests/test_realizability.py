import random

import pytest

from generators import ground_global
from systema.ast import Interaction, MessageLabel, Parallel, ProcessName, Recv, Send, Seq
from systema.errors import CapExceeded
from systema.parser import parse_global
from systema.realizability import check_cp, check_kp, check_pp, check_pr, check_sp
from systema.trace import InstantiationConfig, distinctive_point, project_event

P = ProcessName
M = MessageLabel


def g(text):
    return parse_global(text)


# ---------------------------------------------------------------- SP


def test_sp_rejects_unrelated_sequence():
    v = check_sp(g("a -> b : m1 ; c -> d : m2"))
    assert not v.accepted and v.criterion == "SP"
    e1, e2 = v.witnesses[0].events
    assert (str(e1), str(e2)) == ("a-m1->b", "c-m2->d")


def test_sp_rejects_same_sender_twice():
    assert not check_sp(g("a -> b : m1 ; a -> b : m2")).accepted


def test_sp_accepts_fan_in_fan_out():
    assert check_sp(g("(a -> b : m | c -> b : m) ; (b -> l : m | b -> k : m)")).accepted


def test_sp_covers_nested_nodes():
    assert not check_sp(g("(a -> b : m ; c -> d : k)*")).accepted
    assert not check_sp(g("(a -> b : m ; c -> d : k) + a -> b : z")).accepted
    assert not check_sp(g("seq i in 1..n { c[i] -> s : m }")).accepted
    assert check_sp(g("seq i in 1..n { s -> c[i] : m ; c[i] -> s : k }")).accepted
    assert check_sp(g("(a -> b : m ; b -> a : k)^3")).accepted


# ---------------------------------------------------------------- CP


def test_cp_choice_example(protocol):
    v = check_cp(protocol("choice_bad"))
    assert not v.accepted and v.criterion == "CP"
    assert [w.process for w in v.witnesses] == [P("c")]
    assert v.witnesses[0].index == 3


def test_cp_condition_one():
    assert check_cp(g("a -> b : m1 + a -> b : m2")).accepted
    assert check_cp(g("a -> b : m + a -> c : m")).accepted


def test_cp_lock_unlock(protocol):
    assert check_cp(protocol("lock_unlock")).accepted


def test_cp_shuffle_delegates_to_choice():
    a, b = "a -> b : m1 ; b -> c : k ; c -> d : t1", "a -> b : m2 ; b -> c : k ; c -> d : t2"
    choice = check_cp(g(f"({a}) + ({b})"))
    shuffle = check_cp(g(f"({a}) ~ ({b})"))
    assert choice.accepted == shuffle.accepted
    assert [w.process for w in choice.witnesses] == [w.process for w in shuffle.witnesses]


def test_cp_needs_choice_node():
    with pytest.raises(TypeError):
        check_cp(g("a -> b : m"))


def test_cp_one_sided_participants_pass_by_epsilon():
    # the literal epsilon clause: c and d never appear in the left branch
    assert check_cp(g("a -> b : m + c -> d : k")).accepted


# ---------------------------------------------------------------- PP


def test_pp_parallel_example(protocol):
    v = check_pp(protocol("parallel_bad"))
    assert not v.accepted and v.criterion == "PP"
    w = v.witnesses[0]
    assert w.process == P("b")
    assert str(w.events[0]) == "a-m1->b"


def test_pp_disjoint_branches():
    assert check_pp(g("a -> b : m | c -> d : k")).accepted


def test_pp_sliding_window(protocol):
    sw = protocol("sliding_window")
    assert not check_pp(sw).accepted
    exempt = check_pp(sw, symmetric_exemption=True)
    assert exempt.accepted and exempt.notes


def test_pp_symmetric():
    rng = random.Random(2)
    for _ in range(80):
        a, b = ground_global(rng, 2, stars=False), ground_global(rng, 2, stars=False)
        assert check_pp(Parallel(a, b)).accepted == check_pp(Parallel(b, a)).accepted


# ---------------------------------------------------------------- KP


def test_kp_star_example(protocol):
    star = protocol("star_bad")
    v = check_kp(star.left.body, star.right)
    assert not v.accepted and v.criterion == "KP"
    assert P("c") in [w.process for w in v.witnesses]


def test_kp_accepts():
    assert check_kp(g("a -> b : m"), g("a -> b : m2")).accepted
    assert check_kp(g("a -> b : m"), g("skip")).accepted


# ---------------------------------------------------------------- PR


def test_pr_base_cases():
    assert check_pr(g("skip")).accepted
    assert check_pr(g("a -> b : m")).accepted


@pytest.mark.parametrize("name, criterion, process", [
    ("seq_bad", "SP", None),
    ("seq_bad2", "SP", None),
    ("choice_bad", "CP", "c"),
    ("parallel_bad", "PP", "b"),
    ("star_bad", "KP", "c"),
])
def test_pr_rejections(protocol, name, criterion, process):
    v = check_pr(protocol(name))
    assert not v.accepted
    assert v.criterion == criterion
    if process:
        assert P(process) in [w.process for w in v.witnesses]


@pytest.mark.parametrize("name", ["lock_unlock", "sp_parallel", "empty", "single"])
def test_pr_accepts(protocol, name):
    v = check_pr(protocol(name))
    assert v.accepted, v.summary()


def test_pr_resource_sharing_fails_sp_at_star(protocol):
    v = check_pr(protocol("resource_sharing"))
    assert not v.accepted and v.criterion == "SP"
    assert "{1/i}" in v.witnesses[0].path


def test_pr_notes_bare_star():
    v = check_pr(g("(a -> b : m ; b -> a : k)*"))
    assert v.accepted
    assert any("star without continuation" in n for n in v.notes)


def test_pr_summary_text(protocol):
    assert check_pr(protocol("seq_bad")).summary() == "SP violated: a->b:m1 ; c->d:m2 (at root)"


def test_verdict_json(protocol):
    data = check_pr(protocol("choice_bad")).to_json()
    assert data["accepted"] is False
    assert data["criterion"] == "CP"
    assert data["witnesses"][0]["process"] == "c"
    assert data["bounds"]["star_bound"] == 2


# ---------------------------------------------------------------- witnesses re-fail


def _recheck(witness, criterion):
    if criterion == "SP":
        e1, e2 = witness.events
        pair = Seq(Interaction(e1.sender, e1.label, e1.receiver),
                   Interaction(e2.sender, e2.label, e2.receiver))
        assert not check_sp(pair).accepted
    elif criterion in ("CP", "KP"):
        t1, t2 = witness.traces
        p, i = witness.process, witness.index
        assert distinctive_point(t1, t2, p) == i
        a = project_event(t1[i - 1], p) if i <= len(t1) else None
        b = project_event(t2[i - 1], p) if i <= len(t2) else None
        assert not (isinstance(a, Recv) and isinstance(b, Recv) and a != b)
    elif criterion == "PP":
        t1, t1b, t2 = witness.traces
        p, i = witness.process, witness.index
        assert distinctive_point(t1, t1b, p) == i
        a = project_event(t1[i - 1], p) if i <= len(t1) else None
        b = project_event(t1b[i - 1], p) if i <= len(t1b) else None
        assert not (isinstance(a, Send) and isinstance(b, Send))
        assert witness.events[0] in t2


def test_rejection_witnesses_are_genuine():
    rng = random.Random(31)
    seen = set()
    cfg = InstantiationConfig(max_traces=5000)
    for _ in range(400):
        term = ground_global(rng, 3)
        try:
            v = check_pr(term, cfg)
        except CapExceeded:
            continue
        if v.accepted:
            continue
        seen.add(v.criterion)
        for w in v.witnesses:
            _recheck(w, v.criterion)
    assert {"SP", "CP", "PP"} <= seen

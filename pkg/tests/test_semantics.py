import random
from collections import Counter

import pytest

from generators import ground_global
from systema.ast import EMPTY, MessageLabel, ProcessName, Star
from systema.errors import CapExceeded
from systema.parser import parse_global, parse_local
from systema.projection import project_env
from systema.semantics import (
    RECV, SEND, Action, Buffers, complete_executions, compile_automaton, env_traces,
    ready_actions, verify,
)
from systema.trace import Event, InstantiationConfig, instantiate, traces

P = ProcessName
M = MessageLabel
ME = P("me")


def ev(s, m, r):
    return Event(P(s), M(m), P(r))


# ---------------------------------------------------------------- ready_actions


def test_ready_sequence_head():
    assert ready_actions(parse_local("b ! m ; b ? ack"), ME) == {
        (Action(SEND, ME, P("b"), M("m")), parse_local("b ? ack"))}


def test_ready_parallel_respects_order():
    acts = {(a.kind, str(a.label)) for a, _ in ready_actions(parse_local("(a ! t ; a ! u) | a ? v"), ME)}
    assert acts == {(SEND, "t"), (RECV, "v")}


def test_ready_empty():
    assert ready_actions(EMPTY, ME) == set()


def test_ready_choice_commits():
    acts = ready_actions(parse_local("a ! m ; a ? x + a ! k ; a ? y"), ME)
    assert {str(r) for _, r in acts} == {"a ? x", "a ? y"}


def test_ready_nullable_left():
    acts = ready_actions(parse_local("(skip + a ! m) ; a ? k"), ME)
    assert {a.kind for a, _ in acts} == {SEND, RECV}


def test_ready_rejects_star():
    with pytest.raises(ValueError):
        ready_actions(Star(parse_local("a ! m")), ME)


def test_action_event_direction():
    assert Action(SEND, P("a"), P("b"), M("m")).event() == ev("a", "m", "b")
    assert Action(RECV, P("b"), P("a"), M("m")).event() == ev("a", "m", "b")


def test_buffers():
    b = Buffers().put(P("a"), P("b"), M("m")).put(P("a"), P("b"), M("m"))
    assert b.counts() == {(P("a"), P("b")): {M("m"): 2}}
    assert b.take(P("b"), P("a"), M("m")) is None
    b = b.take(P("a"), P("b"), M("m")).take(P("a"), P("b"), M("m"))
    assert b.is_empty()


def test_automaton_accepting_states():
    auto = compile_automaton(parse_local("a ! m ; a ? k"), ME)
    assert len(auto.states) == 3
    assert auto.accepting == [False, False, True]


# ---------------------------------------------------------------- env_traces


def test_env_single_interaction():
    env = project_env(parse_global("a -> b : m"))
    assert env_traces(env).traces == {(ev("a", "m", "b"),)}


def test_env_g1_reorders():
    env = project_env(parse_global("a -> b : m1 ; c -> d : m2"))
    assert (ev("c", "m2", "d"), ev("a", "m1", "b")) in env_traces(env)


def test_env_lock_unlock(protocol):
    g = protocol("lock_unlock")
    cfg = InstantiationConfig(bindings={"n": 2})
    b = env_traces(project_env(g, cfg.bindings), cfg)
    assert b.traces == traces(instantiate(g, cfg), cfg).traces
    assert len(b) == 2


def test_env_deterministic(protocol):
    env = project_env(protocol("parallel_bad"))
    assert env_traces(env) == env_traces(env)


def test_env_truncation_flag(protocol):
    g = protocol("lock_unlock")
    cfg = InstantiationConfig(bindings={"n": 3}, max_states=5)
    r = verify(g, cfg)
    assert r.inconclusive and not r.equal


# ---------------------------------------------------------------- reference machine


def _small_types(seed, count):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        g = ground_global(rng, 2, stars=False)
        out.append(g)
    return out


def test_kernel_agrees_with_reference_machine():
    cfg = InstantiationConfig()
    compared = 0
    for g in _small_types(11, 80):
        env = project_env(g)
        try:
            ref = {c.recorded for c in complete_executions(env, cfg, limit=20_000)}
        except CapExceeded:
            continue
        assert env_traces(env, cfg).traces == ref
        compared += 1
    assert compared > 50


def test_execution_invariants():
    cfg = InstantiationConfig()
    for g in _small_types(12, 40):
        env = project_env(g)
        try:
            runs = list(complete_executions(env, cfg, limit=20_000))
        except CapExceeded:
            continue
        for conf in runs:
            sent, received = Counter(), Counter()
            for act in conf.history:
                e = act.event()
                if act.kind == SEND:
                    sent[e] += 1
                else:
                    # causality: a receive never precedes its send
                    assert sent[e] > received[e]
                    received[e] += 1
            assert sent == received
            assert Counter(conf.recorded) == received


def test_send_ordering_agrees_on_lock_unlock_n1(protocol):
    cfg = InstantiationConfig(bindings={"n": 1})
    assert verify(protocol("lock_unlock"), cfg, record_on_send=True).equal


def test_send_ordering_changes_lock_unlock_n2(protocol):
    cfg = InstantiationConfig(bindings={"n": 2})
    assert verify(protocol("lock_unlock"), cfg).equal
    r = verify(protocol("lock_unlock"), cfg, record_on_send=True)
    assert not r.equal and len(r.unsafe) == 6


# ---------------------------------------------------------------- verify


def test_verify_g1(protocol):
    r = verify(protocol("seq_bad"))
    assert not r.equal
    assert r.unsafe == [(ev("c", "m2", "d"), ev("a", "m1", "b"))]
    assert not r.lost


@pytest.mark.parametrize("name, bindings, star_bound", [
    ("lock_unlock", {"n": 2}, 2),
    ("sliding_window", {"n": 1}, 2),
    ("single", {}, 2),
    ("empty", {}, 2),
])
def test_verify_equal(protocol, name, bindings, star_bound):
    r = verify(protocol(name), InstantiationConfig(bindings=bindings, star_bound=star_bound))
    assert r.equal and r.exact, r.summary()


def test_verify_witnesses_shortest_first(protocol):
    r = verify(parse_global("a -> b : m1 ; c -> d : m2 ; e -> f : m3"))
    lengths = [len(t) for t in r.unsafe]
    assert lengths == sorted(lengths)


def test_forward_inclusion_sample():
    rng = random.Random(13)
    cfg = InstantiationConfig(max_traces=5000, max_states=200_000)
    for _ in range(60):
        g = ground_global(rng, 3)
        try:
            r = verify(g, cfg)
        except CapExceeded:
            continue
        if not r.inconclusive:
            assert not r.lost


def test_report_json(protocol):
    data = verify(protocol("seq_bad")).to_json()
    assert data["equal"] is False
    assert data["unsafe"] == [["c-m2->d", "a-m1->b"]]
    assert data["global_traces"] == 1
    assert data["environment_traces"] == 2

import random

import pytest
from hypothesis import given, settings, strategies as st

from generators import TermGen
from systema.ast import (
    EMPTY, Interaction, MessageLabel, ParallelN, ProcessName, Recv, Send, Seq, ShuffleN, Star,
)
from systema.errors import ParseError
from systema.parser import (
    from_json, parse_global, parse_local, parse_name, parse_protocol, print_term, to_json,
)

P = ProcessName
M = MessageLabel


def test_sliding_window_global():
    g = parse_global("par i in 1..n { (a -> b : m ; b -> a : ack)* }")
    assert g == ParallelN("i", "n", Star(Seq(Interaction(P("a"), M("m"), P("b")),
                                             Interaction(P("b"), M("ack"), P("a")))))


def test_skip_is_empty():
    assert parse_global("skip") is EMPTY
    assert parse_local("skip") is EMPTY


def test_sequence_of_interactions():
    g = parse_global("a -> b : m1 ; c -> d : m2")
    assert g == Seq(Interaction(P("a"), M("m1"), P("b")), Interaction(P("c"), M("m2"), P("d")))


def test_local_send_receive():
    assert parse_local("b ! m ; b ? ack") == Seq(Send(P("b"), M("m")), Recv(P("b"), M("ack")))


def test_local_shuffle_family():
    l = parse_local("shuffle i in 1..n { c[i] ? lock ; c[i] ! ack ; c[i] ? unlock }")
    assert isinstance(l, ShuffleN) and l.bound == "n"


def test_precedence_star_over_parallel():
    g = parse_global("a -> b : m* | c -> d : k")
    assert print_term(g) == "(a -> b : m)* | c -> d : k"
    assert print_term(parse_global("par i in 1..n { (a -> b : m ; b -> a : ack)* }")) == \
        "par i in 1..n { (a -> b : m ; b -> a : ack)* }"


def test_precedence_ladder():
    g = parse_global("a -> b : m + c -> d : k | e -> f : z ~ g -> h : y ; a -> c : x")
    assert print_term(g) == "a -> b : m + c -> d : k | e -> f : z ~ g -> h : y ; a -> c : x"
    assert type(g).__name__ == "Choice"
    assert type(g.right).__name__ == "Parallel"
    assert type(g.right.right).__name__ == "Shuffle"
    assert type(g.right.right.right).__name__ == "Seq"


def test_left_nested_sequence_prints_flat():
    a, b, c = (Interaction(P(x), M("m"), P("z")) for x in "abc")
    assert print_term(Seq(Seq(a, b), c)) == "a -> z : m ; b -> z : m ; c -> z : m"
    assert print_term(Seq(a, Seq(b, c))) == "a -> z : m ; (b -> z : m ; c -> z : m)"


def test_empty_prints_skip():
    assert print_term(EMPTY) == "skip"


def test_exponent_and_comments():
    g = parse_global("# header\n(a -> b : m)^3 # trailing\n")
    assert print_term(g) == "(a -> b : m)^3"


def test_protocol_block():
    proto = parse_protocol("protocol Lock(n) { roles c[i], s; shuffle i in 1..n { c[i] -> s : lock } }")
    assert proto.name == "Lock"
    assert proto.params == ["n"]
    assert P("s") in proto.roles
    assert not proto.warnings


def test_protocol_undeclared_parameter_warns():
    proto = parse_protocol("protocol P() { par i in 1..n { a[i] -> b : m } }")
    assert proto.warnings and "n" in proto.warnings[0].message


def test_syntax_error_has_span():
    with pytest.raises(ParseError) as info:
        parse_global("a -> b : m ;\n c -> -> d : k")
    d = info.value.diagnostics[0]
    assert d.severity == "error"
    assert d.span is not None and d.span.line == 2
    assert d.span.start <= d.span.end


def test_unbound_index_is_an_error():
    with pytest.raises(ParseError) as info:
        parse_global("c[j] -> s : m")
    assert "j" in str(info.value)


def test_wrong_grammar_is_an_error():
    with pytest.raises(ParseError):
        parse_global("b ! m")
    with pytest.raises(ParseError):
        parse_local("a -> b : m")


def test_unexpected_character():
    with pytest.raises(ParseError):
        parse_global("a -> b : m @")


def test_parse_name():
    assert parse_name("c[1]") == P("c", 1)
    assert parse_name("c[k]") == P("c", "k")
    assert parse_name("s") == P("s")


def test_json_tags_and_round_trip():
    g = parse_global("par i in 1..n { (a -> b[i] : m ; b[i] -> a : ack)* }")
    node = to_json(g)
    assert node["kind"] == "G-Parallel-N"
    assert node["body"]["kind"] == "G-KleeneStar"
    assert from_json(node) == g
    l = parse_local("b ! m ; b ? ack")
    assert to_json(l, "local")["kind"] == "L-Seq"
    assert from_json(to_json(l, "local")) == l


@pytest.mark.parametrize("kind", ["global", "local"])
def test_random_round_trip(kind):
    parse = parse_global if kind == "global" else parse_local
    rng = random.Random(11)
    for _ in range(300):
        t = TermGen(rng, kind).term(5)
        assert parse(print_term(t)) == t
        assert from_json(to_json(t, kind)) == t


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), depth=st.integers(0, 6), kind=st.sampled_from(["global", "local"]))
def test_round_trip_property(seed, depth, kind):
    parse = parse_global if kind == "global" else parse_local
    t = TermGen(random.Random(seed), kind).term(depth)
    text = print_term(t)
    assert parse(text) == t
    assert print_term(parse(text)) == text

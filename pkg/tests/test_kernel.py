import random

import pytest

from generators import ground_global
from systema import kernel
from systema.errors import CapExceeded
from systema.projection import project_env
from systema.semantics import env_traces
from systema.trace import InstantiationConfig

BACKENDS = kernel.backends()


def test_backend_selected():
    assert kernel.BACKEND in BACKENDS


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_interleavings_count(name):
    impl = BACKENDS[name]
    assert len(impl.interleavings(tuple("abc"), tuple("xyz"))) == 20
    assert impl.interleavings((), tuple("ab")) == {tuple("ab")}
    assert impl.interleavings(tuple("aaaa"), tuple("bbbb"), cap=5) is None


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_interleave_sets_cap(name):
    impl = BACKENDS[name]
    left = {tuple("ab"), tuple("c")}
    right = {tuple("x")}
    assert impl.interleave_sets(left, right, 100) == {
        tuple("abx"), tuple("axb"), tuple("xab"), tuple("cx"), tuple("xc")}
    assert impl.interleave_sets(left, right, 3) is None


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernel not built")
def test_interleavings_parity():
    rng = random.Random(1)
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    for _ in range(200):
        a = tuple(rng.choice("abc") for _ in range(rng.randint(0, 5)))
        b = tuple(rng.choice("xyz") for _ in range(rng.randint(0, 5)))
        cap = rng.choice([None, 10, 50])
        assert py.interleavings(a, b, cap) == cy.interleavings(a, b, cap)


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernel not built")
def test_explore_parity():
    rng = random.Random(2)
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    cfg = InstantiationConfig(max_traces=5000, max_states=50_000)
    for _ in range(80):
        g = ground_global(rng, 3)
        env = project_env(g)
        for on_send in (False, True):
            try:
                a = env_traces(env, cfg, on_send, backend=py)
            except CapExceeded:
                continue
            b = env_traces(env, cfg, on_send, backend=cy)
            assert a.traces == b.traces and a.truncated == b.truncated


def test_explore_tiny_product():
    # one sender, one receiver, one slot
    trans = [[[(kernel.SEND, 0, 1)], []], [[(kernel.RECV, 0, 1)], []]]
    nullable = [[False, True], [False, True]]
    for impl in BACKENDS.values():
        traces, states, truncated = impl.explore(trans, nullable, 1, 100, False)
        assert traces == {(0,)} and not truncated
        _, _, truncated = impl.explore(trans, nullable, 1, 0, False)
        assert truncated

"""Time the pure-Python and compiled kernels on the same workloads.

    python benchmarks/bench_kernel.py [--repeat N]
"""
from __future__ import annotations

import argparse
import random
import sys
import timeit
from pathlib import Path

from systema import kernel
from systema.parser import parse_protocol
from systema.projection import project_env
from systema.semantics import encode_environment, run_kernel
from systema.trace import InstantiationConfig

PROTOCOLS = Path(__file__).resolve().parent.parent / "protocols"


def _load(name):
    return parse_protocol((PROTOCOLS / f"{name}.sat").read_text(encoding="utf-8")).body


def workloads():
    rng = random.Random(0)
    a = tuple(rng.randrange(4) for _ in range(9))
    b = tuple(rng.randrange(4) for _ in range(9))
    yield "interleavings 9x9", lambda impl: impl.interleavings(a, b)
    for name, n, sb in (("lock_unlock", 3, 2), ("sliding_window", 2, 2),
                        ("resource_sharing", 2, 2)):
        cfg = InstantiationConfig(bindings={"n": n}, star_bound=sb)
        env = project_env(_load(name), cfg.bindings)
        trans, accepting, events = encode_environment(env, cfg)
        yield f"explore {name} n={n} sb={sb}", \
            lambda impl, t=trans, a=accepting, k=len(events): run_kernel(impl, t, a, k, 10**7, False)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    found = kernel.backends()
    if "cython" not in found:
        print("compiled kernel not built; only timing the Python one", file=sys.stderr)
    names = sorted(found)
    print(f"{'workload':40}" + "".join(f"{n:>12}" for n in names) + "     speedup")
    for label, job in workloads():
        times = {}
        for n in names:
            times[n] = min(timeit.repeat(lambda: job(found[n]), number=1, repeat=args.repeat))
        row = f"{label:40}" + "".join(f"{times[n]:>11.3f}s" for n in names)
        if len(names) == 2:
            row += f"{times['python'] / times['cython']:>11.1f}x"
        print(row)
    return 0


if __name__ == "__main__":
    sys.exit(main())

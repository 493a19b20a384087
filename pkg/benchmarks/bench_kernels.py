"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Workloads come from the built-in actions: refinement of a restriction
table, and brute-force enumeration of fixed words.
"""
import argparse
import random
import sys
import timeit

from selfsim import _pykernels, kernels
from selfsim.action import RestrictionTable
from selfsim.algebra import parse_element
from selfsim.mealy import basilica, grigorchuk, odometer


def random_machine(n_states, n_letters, seed=0):
    rng = random.Random(seed)
    out, to = [], []
    for _ in range(n_states):
        perm = list(range(n_letters))
        rng.shuffle(perm)
        out.append(perm)
        to.append([rng.randrange(n_states) for _ in range(n_letters)])
    return out, to


def workloads():
    B = basilica()
    table = RestrictionTable(B, [parse_element("ab" * 6 + "b^-1 a^-1" * 3, B)])
    big_out, big_to = random_machine(3000, 3, seed=1)
    g = parse_element("cadac", grigorchuk())
    g_table = RestrictionTable(g.backend, [g])
    g_accept = [int(lab == g_table.labels()[0]) for lab in g_table.labels()]
    o = parse_element("g g", odometer(4))
    o_table = RestrictionTable(o.backend, [o])
    o_accept = [int(lab == o_table.labels()[0]) for lab in o_table.labels()]
    return [
        (f"refine basilica table ({len(table.out)} states)", "refine_partition", (table.out, table.to)),
        ("refine random machine (3000 states)", "refine_partition", (big_out, big_to)),
        ("fixed words grigorchuk cadac, k=16", "brute_force_fixed",
         (g_table.out, g_table.to, g_table.index[g.factors], 16, g_accept)),
        ("fixed words odometer(4) g^2, k=8", "brute_force_fixed",
         (o_table.out, o_table.to, o_table.index[o.factors], 8, o_accept)),
    ]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if kernels.compiled is None:
        print("compiled extension not available; build it with `pip install -e . --no-build-isolation`")
        return 1
    print(f"{'workload':48s} {'python':>10s} {'cython':>10s} {'speedup':>8s}")
    for title, fn, call_args in workloads():
        py = getattr(_pykernels, fn)
        cy = getattr(kernels.compiled, fn)
        t_py = min(timeit.repeat(lambda: py(*call_args), number=1, repeat=args.repeat))
        t_cy = min(timeit.repeat(lambda: cy(*call_args), number=1, repeat=args.repeat))
        print(f"{title:48s} {t_py * 1e3:9.2f}ms {t_cy * 1e3:9.2f}ms {t_py / t_cy:7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())

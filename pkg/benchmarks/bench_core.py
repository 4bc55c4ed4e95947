"""Compiled core vs pure-Python fallback on the hot kernels.

    python benchmarks/bench_core.py [--pixels 64] [--seeds 300] [--repeat 3]
"""
import argparse
import random
import time

from fastescape import core, tower
from fastescape.growthfn import load_catalog
from fastescape.orbit import classify_escape, iterate
from fastescape.render import RenderJob, render


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def bench_tower(k, n=20000):
    pairs = [k.t_norm(random.randint(0, 3), random.uniform(1.0, tower.E)) for _ in range(n)]

    def go():
        for lv, m in pairs:
            k.t_pow(*k.t_exp(lv, m), 1.5)
            k.t_cmp(lv, m, 2, 1.5, 1e-9)
    return go


def bench_orbits(cat, backend, seeds):
    f = cat["exp"]
    rng = random.Random(1)
    zs = [complex(rng.uniform(-10, 10), rng.uniform(-10, 10)) for _ in range(seeds)]

    def go():
        for z in zs:
            classify_escape(f, iterate(f, z, 30, backend=backend), R=3.0, backend=backend)
    return go


def bench_render(cat, backend, px):
    job = RenderJob("exp", center=5 + 0j, width=8, height=8, pixels_x=px, pixels_y=px)

    def go():
        render(job, threads=1, catalog=cat, backend=backend)
    return go


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pixels", type=int, default=64)
    ap.add_argument("--seeds", type=int, default=300)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    random.seed(0)
    cat = load_catalog()
    backends = ["python"]
    try:
        core.load_backend("cython")
        backends.append("cython")
    except ImportError:
        print("compiled core not built; timing the fallback only")
    cases = [
        ("tower ops x20000", lambda b: bench_tower(core.load_backend(b))),
        ("orbit+classify x%d" % args.seeds, lambda b: bench_orbits(cat, b, args.seeds)),
        ("render %dx%d, 1 thread" % (args.pixels, args.pixels),
         lambda b: bench_render(cat, b, args.pixels)),
    ]
    print("%-28s %12s %12s %9s" % ("kernel", "python [s]", "cython [s]", "speedup"))
    for name, make in cases:
        times = {b: best_of(make(b), args.repeat) for b in backends}
        cy = times.get("cython")
        print("%-28s %12.4f %12s %9s" % (
            name, times["python"], "-" if cy is None else "%.4f" % cy,
            "-" if cy is None else "%.1fx" % (times["python"] / cy)))


if __name__ == "__main__":
    main()

"""Compare the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--degrees 8 32 128] [--repeat 5]

Both implementations run on the same coefficients and starting points, so
the root sets they return are also compared.
"""

import argparse
import timeit

import numpy as np

from dynsheaf.numerics import _kernels_py

try:
    from dynsheaf.numerics import _kernels as _compiled
except ImportError:
    _compiled = None


def _problem(n, seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
    c = c / c[-1]
    r = 1.0 + np.max(np.abs(c[:-1]))
    angles = 2 * np.pi * (np.arange(n) + rng.uniform(0, 0.5)) / n
    z0 = 0.5 * r * np.exp(1j * angles)
    return c, z0


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def run(degrees, repeat, seed=0):
    rows = []
    eta = 1e-14
    for n in degrees:
        c, z0 = _problem(n, seed)
        pts = np.exp(1j * np.linspace(0, 2 * np.pi, 4096))
        row = {"degree": n}
        impls = {"python": _kernels_py}
        if _compiled is not None:
            impls["compiled"] = _compiled
        roots = {}
        for name, mod in impls.items():
            row[f"aberth_{name}"] = _best(lambda m=mod: m.aberth(c, z0, 500, eta), repeat)
            row[f"horner_{name}"] = _best(lambda m=mod: m.horner(c, pts), repeat)
            roots[name] = np.sort_complex(mod.aberth(c, z0, 500, eta)[0])
        if "compiled" in roots:
            row["max_root_gap"] = float(np.max(np.abs(roots["compiled"] - roots["python"])))
        rows.append(row)
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--degrees", type=int, nargs="+", default=[8, 32, 128, 512])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    rows = run(args.degrees, args.repeat)
    if _compiled is None:
        print("compiled extension not built; timing the numpy fallback only")
    print(f"{'degree':>6} {'kernel':>7} {'python [ms]':>12} {'compiled [ms]':>14} {'speedup':>8}")
    for r in rows:
        for k in ("aberth", "horner"):
            py = r[f"{k}_python"] * 1e3
            if f"{k}_compiled" in r:
                co = r[f"{k}_compiled"] * 1e3
                print(f"{r['degree']:>6} {k:>7} {py:>12.3f} {co:>14.3f} {py / co:>7.1f}x")
            else:
                print(f"{r['degree']:>6} {k:>7} {py:>12.3f} {'-':>14} {'-':>8}")
        if "max_root_gap" in r:
            print(f"{'':>6} max |root gap| = {r['max_root_gap']:.2e}")


if __name__ == "__main__":
    main()

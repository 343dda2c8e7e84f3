"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Each kernel runs on the same seeded inputs under both backends; outputs are
checked for equality before timings are reported.  The end-to-end rows time
the flatness test of the two bundled examples in a subprocess per backend.
"""

import argparse
import os
import random
import subprocess
import sys
import timeit
from pathlib import Path

from dtflat import _pykernels as py

try:
    from dtflat import _ckernels as cy
except ImportError:
    cy = None

ROOT = Path(__file__).resolve().parent.parent
P = 2147483647


def random_terms(rng, nvars, nterms, deg, coeff=50):
    out = {}
    while len(out) < nterms:
        e = tuple(rng.randint(0, deg) for _ in range(nvars))
        c = rng.randint(-coeff, coeff)
        if c:
            out[e] = c
    return out


def cases(rng):
    a = random_terms(rng, 6, 60, 4)
    b = random_terms(rng, 6, 60, 4)
    vals = [rng.randint(-9, 9) for _ in range(6)]
    mat = [[rng.randint(0, P - 1) for _ in range(40)] for _ in range(30)]
    sing = [row[:] for row in mat[:20]] + [[(x + y) % P for x, y in zip(mat[0], mat[1])]] * 10
    qmat = [[rng.randint(-20, 20) for _ in range(30)] for _ in range(24)]
    return {
        "mul_terms": lambda k: k.mul_terms(a, b),
        "add_terms": lambda k: k.add_terms(a, b, -3),
        "diff_terms": lambda k: k.diff_terms(a, 2),
        "eval_terms": lambda k: k.eval_terms(a, vals),
        "embed_terms": lambda k: k.embed_terms(a, [0, 2, 4, 6, 8, 10], 12),
        "rank_mod": lambda k: k.rank_mod(sing, 40, P),
        "nullspace_mod": lambda k: k.nullspace_mod(sing, 40, P),
        "rref_int": lambda k: k.rref_int(qmat, 30),
    }


def end_to_end(backend):
    env = dict(os.environ)
    if backend == "python":
        env["DTFLAT_PURE_PYTHON"] = "1"
    else:
        env.pop("DTFLAT_PURE_PYTHON", None)
    code = (
        "import time, dtflat\n"
        "from dtflat.cli import parse_system\n"
        "assert dtflat.BACKEND == %r, dtflat.BACKEND\n"
        "for name in ('ex1', 'ex2'):\n"
        "    s = parse_system(open(%r + '/systems/' + name + '.flatsys').read())\n"
        "    t = time.perf_counter(); r = dtflat.test_flat(s); dtflat.flat_outputs(r)\n"
        "    print(name, time.perf_counter() - t)\n"
    ) % (backend, str(ROOT))
    res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return dict((ln.split()[0], float(ln.split()[1])) for ln in res.stdout.splitlines())


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)
    if cy is None:
        print("compiled kernels are not built; run `pip install -e . --no-build-isolation` first")
        return 1
    rng = random.Random(0)
    print(f"{'kernel':<16}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for name, fn in cases(rng).items():
        if fn(py) != fn(cy):
            print(f"{name}: backends disagree")
            return 1
        tp = min(timeit.repeat(lambda: fn(py), number=1, repeat=args.repeat)) * 1e3
        tc = min(timeit.repeat(lambda: fn(cy), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<16}{tp:>12.3f}{tc:>12.3f}{tp / tc:>10.2f}")
    tpy, tcy = end_to_end("python"), end_to_end("cython")
    for name in tpy:
        a, b = tpy[name] * 1e3, tcy[name] * 1e3
        print(f"{'test_flat ' + name:<16}{a:>12.1f}{b:>12.1f}{a / b:>10.2f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py --n 200000 --k 64 --repeat 5

Each kernel is run on identical inputs under both backends; outputs are
compared before timings are reported.
"""
import argparse
import json
import time

import numpy as np

from mlgap import kernels, metrics
from mlgap.core import LabeledCodeSet


def _best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def make_inputs(n, k, seed):
    rng = np.random.default_rng(seed)
    nbytes = (k + 7) // 8
    mask = (1 << k) - 1
    values = [int.from_bytes(rng.bytes(nbytes), "little") & mask for _ in range(n)]
    db = LabeledCodeSet.from_values(k, values, rng.integers(0, 10, n).tolist())
    return db, db[int(rng.integers(n))]


def run(n, k, repeat, seed):
    db, q = make_inputs(n, k, seed)
    words = db.words
    qw = q.code.words()
    ids = np.ascontiguousarray(db.code_ids, dtype=np.int64)
    rel = metrics.relevance(db, q, metrics.RelevanceMode.FINE)
    small = db.subset(range(min(n, 2000)))
    jobs = {
        "hamming_to_query": lambda impl: impl.hamming_to_query(words, qw),
        "hamming_matrix(2000x2000)": lambda impl: impl.hamming_matrix(small.words, small.words),
        "resolve_extreme": lambda impl: impl.resolve_extreme(dist, rel, k, True),
        "ap_sorted": lambda impl: impl.ap_sorted(ranked, n),
        "lgap_aggregates": lambda impl: impl.lgap_aggregates(dist, ids, rel, db.n_distinct, k // 4),
    }
    dist = kernels.BACKENDS["numpy"].hamming_to_query(words, qw)
    ranked = kernels.BACKENDS["numpy"].resolve_extreme(dist, rel, k, True)
    rows = []
    for name, job in jobs.items():
        row = {"kernel": name}
        outputs = {}
        for backend, impl in sorted(kernels.BACKENDS.items()):
            row[backend], outputs[backend] = _best_of(lambda: job(impl), repeat)
        ref = outputs["numpy"]
        for backend, out in outputs.items():
            same = all(np.array_equal(a, b) for a, b in zip(out, ref)) if isinstance(ref, tuple) \
                else np.array_equal(out, ref)
            if not same:
                raise SystemExit(f"{name}: {backend} output differs from numpy")
        if "cython" in row:
            row["speedup"] = row["numpy"] / row["cython"]
        rows.append(row)
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=200_000, help="database size")
    p.add_argument("--k", type=int, default=64, help="code width in bits")
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true", help="print rows as JSON")
    args = p.parse_args(argv)
    rows = run(args.n, args.k, args.repeat, args.seed)
    if args.json:
        print(json.dumps(rows, indent=2))
        return
    print(f"n={args.n} k={args.k} backends={sorted(kernels.BACKENDS)} (best of {args.repeat}, seconds)")
    for r in rows:
        extra = f"  x{r['speedup']:.1f}" if "speedup" in r else ""
        cy = f"{r['cython']:.5f}" if "cython" in r else "   n/a"
        print(f"  {r['kernel']:<28} numpy {r['numpy']:.5f}  cython {cy}{extra}")


if __name__ == "__main__":
    main()

"""Compare the compiled and numpy expression kernels.

    python3 benchmarks/bench_kernels.py [--rows 10000 100000 1000000] [--repeat 5]

Each case evaluates one structural equation over a column table; the
``forward`` case samples the whole smoking SFM. Reported times are the best
of ``--repeat`` runs. The scalar tree walker is timed on a small slice only,
as a reference point.
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from teleoscm import _core, models
from teleoscm._core import compile_expression, vm_numpy
from teleoscm.expr import evaluate, parse_expression
from teleoscm.operators import build_sfm
from teleoscm.sampling import draw_exogenous, forward, shard_rng

try:
    from teleoscm._core import _vm as compiled
except ImportError:
    compiled = None

NAMES = ("a", "b", "c")
CASES = {
    "linear": "0.3 * a + b + 1",
    "threshold": "if(a > 1, 1, 0)",
    "nested": "if(a + b < 0.5, (a - c) / (1 + b * b), -(c * 2) + a * b)",
}


def best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_expression(src, rows, repeat):
    expr = parse_expression(src)
    prog = compile_expression(expr, {n: i for i, n in enumerate(NAMES)})
    table = np.ascontiguousarray(np.random.default_rng(0).normal(size=(len(NAMES), rows)))
    out = np.empty(rows)
    err = np.empty(rows, dtype=np.uint8)

    def runner(run):
        return lambda: run(prog.codes, prog.args, prog.consts, table, out, err)

    result = {"numpy": best(runner(vm_numpy.run_program), repeat)}
    if compiled is not None:
        result["cython"] = best(runner(compiled.run_program), repeat)
    slice_rows = min(rows, 2000)
    envs = [dict(zip(NAMES, table[:, i])) for i in range(slice_rows)]
    walk = best(lambda: [evaluate(expr, e) for e in envs], 1)
    result["tree_walker_est"] = walk * rows / slice_rows
    return result


def bench_forward(rows, repeat):
    p = models.SMOKING_POLICY
    sfm = build_sfm(models.smoking(), p.target, p.policy)
    exo = draw_exogenous(sfm, rows, shard_rng(0))
    result = {"numpy": best(lambda: forward(sfm, exo, run=vm_numpy.run_program), repeat)}
    if compiled is not None:
        result["cython"] = best(lambda: forward(sfm, exo, run=compiled.run_program), repeat)
    return result


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, nargs="+", default=[10_000, 100_000, 1_000_000])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", action="store_true", help="print machine-readable results")
    args = ap.parse_args(argv)

    rows_out = []
    for rows in args.rows:
        for name, src in CASES.items():
            rows_out.append({"case": name, "rows": rows, **bench_expression(src, rows, args.repeat)})
        rows_out.append({"case": "forward(smoking_sfm)", "rows": rows, **bench_forward(rows, args.repeat)})

    if args.json:
        print(json.dumps({"active_backend": _core.BACKEND, "results": rows_out}, indent=2))
        return
    print(f"active backend: {_core.BACKEND}")
    print(f"{'case':<22}{'rows':>10}{'numpy ms':>12}{'cython ms':>12}{'speedup':>9}{'walker ms*':>13}")
    for r in rows_out:
        cy = r.get("cython")
        speed = f"{r['numpy'] / cy:8.1f}x" if cy else "      n/a"
        walker = f"{r['tree_walker_est'] * 1e3:13.1f}" if "tree_walker_est" in r else f"{'':>13}"
        cy_ms = f"{cy * 1e3:12.2f}" if cy else f"{'n/a':>12}"
        print(f"{r['case']:<22}{r['rows']:>10}{r['numpy'] * 1e3:12.2f}{cy_ms}{speed}{walker}")
    print("* tree walker extrapolated from a 2000-row slice")


if __name__ == "__main__":
    main()

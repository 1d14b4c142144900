"""Throughput of the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import time

import numpy as np

from mdsfountain import _rng, field_new
from mdsfountain._backend import available
from mdsfountain.codes import build_rs, build_spc


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    f16 = field_new(4)
    rs = build_rs(15, 10, f16)
    spc = build_spc(10)
    mats = np.random.default_rng(0).integers(0, 16, size=(2000, 12, 10), dtype=np.uint8)

    def rank(k):
        return lambda: [k.rank(m, f16.mul_table, f16.inv_table) for m in mats]

    def pf(k, code, eps, trials):
        f = code.field
        return lambda: k.pf_block(code.gen_t, 10, f.mul_table, f.inv_table, eps, 11,
                                  _rng.root_key(1), _rng.root_key(2), 0, trials, False, 1000)

    keys = np.random.default_rng(1).integers(0, 2**63, size=1000, dtype=np.uint64)

    def multi(k):
        f = spc.field
        return lambda: [k.multiuser_trial(spc.gen_t, 10, f.mul_table, f.inv_table, 0.01, keys, t, 500)
                        for t in range(20)]

    return [
        ("rank 12x10 GF(16)", 2000, rank),
        ("pf_block RS(15,10) eps=0.1", 20_000, lambda k: pf(k, rs, 0.1, 20_000)),
        ("pf_block SPC(11,10) eps=0.1", 20_000, lambda k: pf(k, spc, 0.1, 20_000)),
        ("multiuser 1000 users", 20, multi),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = available()
    names = sorted(backends)
    print(f"{'case':32s}" + "".join(f"{n + ' us/op':>16s}" for n in names) + f"{'speedup':>10s}")
    for label, ops, make in cases():
        per_op = {n: _best(make(backends[n]), args.repeat) / ops * 1e6 for n in names}
        speed = per_op["python"] / per_op["cython"] if "cython" in per_op else float("nan")
        print(f"{label:32s}" + "".join(f"{per_op[n]:16.2f}" for n in names) + f"{speed:10.1f}")


if __name__ == "__main__":
    main()

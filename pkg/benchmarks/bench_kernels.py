"""Compare the compiled and pure-Python kernels.

    python3 benchmarks/bench_kernels.py --sizes 10000 100000 1000000

Both backends run on the same tables and inputs; outputs are checked for
equality before any timing is reported.
"""
from __future__ import annotations

import argparse
import random
import statistics
import time

import numpy as np

from tokautoma import _pykernels, compile_tokenizer
from tokautoma.automaton import trim
from tokautoma.bpe_oracle import tokenize_hf
from tokautoma.construction import build_token_dfa
from tokautoma.gen import random_proper_dictionary
from tokautoma.kernels import DFATable, encode_symbols

try:
    from tokautoma import _ckernels
except ImportError:
    _ckernels = None


def timed(fn, repeat):
    runs = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        runs.append(time.perf_counter() - start)
    return statistics.median(runs)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[10_000, 100_000, 1_000_000])
    parser.add_argument("--rules", type=int, default=50)
    parser.add_argument("--sigma", default="abcdefgh")
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    backends = [("python", _pykernels)]
    if _ckernels is not None:
        backends.append(("compiled", _ckernels))
    else:
        print("compiled extension not built; timing the pure-Python kernels only")

    rng = random.Random(args.seed)
    d = random_proper_dictionary(rng, args.sigma, args.rules)
    table = compile_tokenizer(d).table()
    dfa = DFATable(trim(build_token_dfa(None, d)))
    print(f"dictionary: {len(d)} rules over {len(d.sigma)} symbols")
    print(f"{'kernel':<10} {'n':>9} " + " ".join(f"{name:>12}" for name, _ in backends) + "   speedup")

    for n in args.sizes:
        w = "".join(rng.choice(args.sigma) for _ in range(n))
        syms = encode_symbols(w, table.codes)
        targs = (table.target, table.out_start, table.out_len, table.out_flat,
                 table.final_start, table.final_len, syms, table.initial, len(table.symbols),
                 n + table.max_final)
        outputs = [b.transduce_ids(*targs) for _, b in backends]
        ref = outputs[0]
        for status, out, count in outputs[1:]:
            assert status == ref[0] and count == ref[2]
            assert np.array_equal(out[:count], ref[1][:ref[2]])
        times = [timed(lambda b=b: b.transduce_ids(*targs), args.repeat) for _, b in backends]
        _row("transduce", n, times)

        ids = dfa.encode(tokenize_hf(d, w))
        dargs = (dfa.target, len(dfa.labels), ids, dfa.initial)
        results = [b.dfa_scan(*dargs) for _, b in backends]
        assert all(r == results[0] for r in results)
        times = [timed(lambda b=b: b.dfa_scan(*dargs), args.repeat) for _, b in backends]
        _row("dfa_scan", len(ids), times)


def _row(kernel, n, times):
    cells = " ".join(f"{t * 1e3:>9.3f} ms" for t in times)
    speedup = f"{times[0] / times[-1]:>8.1f}x" if len(times) > 1 else ""
    print(f"{kernel:<10} {n:>9} {cells} {speedup}")


if __name__ == "__main__":
    main()

"""Pure-Python versions of the compiled inner loops (same signatures)."""
from __future__ import annotations

import numpy as np


def transduce_ids(target, out_start, out_len, out_flat, final_start, final_len,
                  syms, initial, n_symbols, capacity):
    target = target.tolist()
    out_start = out_start.tolist()
    out_len = out_len.tolist()
    out_flat = out_flat.tolist()
    out: list[int] = []
    q = initial
    for i, a in enumerate(syms.tolist()):
        e = q * n_symbols + a
        q = target[e]
        if q < 0:
            return 1, np.asarray(out, dtype=np.int32), i
        ln = out_len[e]
        if ln:
            s = out_start[e]
            out.extend(out_flat[s:s + ln])
    ln = int(final_len[q])
    if ln < 0:
        return 2, np.asarray(out, dtype=np.int32), len(out)
    s = int(final_start[q])
    out.extend(out_flat[s:s + ln])
    return 0, np.asarray(out, dtype=np.int32), len(out)


def dfa_scan(target, n_labels, labels, initial):
    target = target.tolist()
    q = initial
    for i, a in enumerate(labels.tolist()):
        r = target[q * n_labels + a]
        if r < 0:
            return -1, i
        q = r
    return q, len(labels)

"""Table layouts for the hot loops and backend selection.

The compiled extension is used when it was built and ``TOKAUTOMA_PURE`` is
unset; otherwise the pure-Python loops are used.  Both return the same
results.
"""
from __future__ import annotations

import json
import os

import numpy as np

from .core import AlphabetError

if os.environ.get("TOKAUTOMA_PURE"):
    from . import _pykernels as backend
else:
    try:
        from . import _ckernels as backend
    except ImportError:  # extension not built
        from . import _pykernels as backend

BACKEND = "compiled" if backend.__name__.endswith("_ckernels") else "python"

__all__ = ["BACKEND", "DFATable", "TransducerTable", "encode_symbols"]


def _codepoints(w: str) -> np.ndarray:
    return np.frombuffer(w.encode("utf-32-le", "surrogatepass"), dtype=np.uint32)


def encode_symbols(w: str, codes: np.ndarray) -> np.ndarray:
    """Map each character of ``w`` to its index in the sorted code array.

    Raises :class:`AlphabetError` at the first character not in ``codes``.
    """
    cps = _codepoints(w)
    if not len(codes):
        if len(cps):
            raise AlphabetError(w[0], 0)
        return np.zeros(0, dtype=np.int32)
    idx = np.searchsorted(codes, cps)
    np.minimum(idx, len(codes) - 1, out=idx)
    bad = np.flatnonzero(codes[idx] != cps)
    if len(bad):
        i = int(bad[0])
        raise AlphabetError(w[i], i)
    return idx.astype(np.int32)


class TransducerTable:
    """Flat integer tables for a subsequential transducer."""

    def __init__(self, symbols, tokens, target, out_start, out_len, out_flat,
                 final_start, final_len, initial):
        self.symbols = symbols
        self.codes = np.array([ord(s) for s in symbols], dtype=np.uint32)
        self.tokens = tokens
        self.target = target
        self.out_start = out_start
        self.out_len = out_len
        self.out_flat = out_flat
        self.final_start = final_start
        self.final_len = final_len
        self.initial = initial
        self.max_out = int(out_len.max()) if len(out_len) else 0
        self.max_final = max(0, int(final_len.max())) if len(final_len) else 0

    @classmethod
    def from_machine(cls, t) -> "TransducerTable":
        symbols = sorted(t.input_alphabet)
        sym_idx = {s: i for i, s in enumerate(symbols)}
        tokens = sorted(t.output_alphabet)
        tok_idx = {s: i for i, s in enumerate(tokens)}
        ns = len(symbols)
        nq = t.n_states
        target = np.full(nq * ns, -1, dtype=np.int32)
        out_start = np.zeros(nq * ns, dtype=np.int32)
        out_len = np.zeros(nq * ns, dtype=np.int32)
        final_start = np.zeros(nq, dtype=np.int32)
        final_len = np.full(nq, -1, dtype=np.int32)
        flat: list[int] = []
        for q, row in enumerate(t.delta):
            for a, (r, o) in row.items():
                e = q * ns + sym_idx[a]
                target[e] = r
                out_start[e] = len(flat)
                out_len[e] = len(o)
                flat.extend(tok_idx[x] for x in o)
        for q, o in t.final_output.items():
            final_start[q] = len(flat)
            final_len[q] = len(o)
            flat.extend(tok_idx[x] for x in o)
        out_flat = np.array(flat, dtype=np.int32)
        return cls(symbols, tokens, target, out_start, out_len, out_flat,
                   final_start, final_len, t.initial)

    _ARRAYS = ("target", "out_start", "out_len", "out_flat", "final_start", "final_len")
    MAGIC = b"TOKAUTOMA-TABLE 1\n"

    def to_bytes(self) -> bytes:
        """Binary layout: magic line, JSON header line, raw little-endian int32 arrays."""
        header = {
            "symbols": self.symbols,
            "tokens": self.tokens,
            "initial": int(self.initial),
            "lengths": [len(getattr(self, name)) for name in self._ARRAYS],
        }
        head = self.MAGIC + json.dumps(header, ensure_ascii=False).encode("utf-8")
        # pad with JSON whitespace so the arrays start 8-byte aligned and load as views
        parts = [head, b" " * (-(len(head) + 1) % 8), b"\n"]
        parts.extend(np.ascontiguousarray(getattr(self, name), dtype="<i4").tobytes() for name in self._ARRAYS)
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> "TransducerTable":
        if not data.startswith(cls.MAGIC):
            raise ValueError("not a transducer table")
        end = data.find(b"\n", len(cls.MAGIC))
        if end < 0:
            raise ValueError("truncated header")
        try:
            header = json.loads(data[len(cls.MAGIC):end].decode("utf-8"))
            symbols = [str(x) for x in header["symbols"]]
            tokens = [str(x) for x in header["tokens"]]
            initial = int(header["initial"])
            lengths = [int(x) for x in header["lengths"]]
        except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValueError(f"bad header: {exc}") from None
        if len(lengths) != len(cls._ARRAYS) or min(lengths, default=0) < 0:
            raise ValueError("bad array lengths")
        if len(data) - end - 1 != 4 * sum(lengths):
            raise ValueError("table size does not match its header")
        arrays = {}
        offset = end + 1
        for name, n in zip(cls._ARRAYS, lengths):
            a = np.frombuffer(data, dtype="<i4", count=n, offset=offset)
            # read-only views suffice; copy only to fix byte order or alignment
            if a.dtype != np.int32 or not a.flags.aligned:
                a = a.astype(np.int32)
            arrays[name] = a
            offset += 4 * n
        cls._check(symbols, tokens, initial, arrays)
        return cls(symbols, tokens, initial=initial, **arrays)

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "TransducerTable":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())

    @staticmethod
    def _check(symbols, tokens, initial, arrays) -> None:
        # the compiled loop trusts these tables, so reject anything out of range
        n_states = len(arrays["final_len"])
        target = arrays["target"]
        if any(len(x) != 1 for x in symbols) or symbols != sorted(set(symbols)):
            raise ValueError("input symbols must be distinct single characters in sorted order")
        if not 0 <= initial < n_states:
            raise ValueError("initial state out of range")
        if len(target) != n_states * len(symbols) or len(arrays["out_start"]) != len(target) \
                or len(arrays["out_len"]) != len(target) or len(arrays["final_start"]) != n_states:
            raise ValueError("table lengths disagree")
        for name in ("out_start", "out_len", "final_start"):
            if len(arrays[name]) and arrays[name].min() < 0:
                raise ValueError(f"negative entry in {name}")
        if len(target) and not -1 <= target.min() <= target.max() < n_states:
            raise ValueError("transition target out of range")
        flat = arrays["out_flat"]
        if len(flat) and not 0 <= flat.min() <= flat.max() < len(tokens):
            raise ValueError("output token id out of range")
        ends = np.concatenate([arrays["out_start"] + arrays["out_len"],
                               arrays["final_start"] + np.maximum(arrays["final_len"], 0)])
        if len(ends) and ends.max() > len(flat):
            raise ValueError("output span out of range")

    def run_ids(self, w: str) -> np.ndarray | None:
        """Output token ids for ``w``, or ``None`` when it is not accepted."""
        syms = encode_symbols(w, self.codes)
        n = len(syms)
        args = (self.target, self.out_start, self.out_len, self.out_flat,
                self.final_start, self.final_len, syms, self.initial, len(self.symbols))
        status, out, count = backend.transduce_ids(*args, n + self.max_final)
        if status == 3:
            # only possible for machines whose outputs outnumber their inputs
            status, out, count = backend.transduce_ids(*args, n * self.max_out + self.max_final)
        if status:
            return None
        return out[:count]

    def run(self, w: str):
        try:
            ids = self.run_ids(w)
        except AlphabetError as exc:
            return exc
        if ids is None:
            return None
        tokens = self.tokens
        return tuple([tokens[i] for i in ids.tolist()])


class DFATable:
    """Flat transition table of a token DFA, labels indexed in sorted order."""

    def __init__(self, a):
        self.labels = sorted(a.alphabet)
        self.index = {t: i for i, t in enumerate(self.labels)}
        n = len(self.labels)
        self.target = np.full(a.n_states * n, -1, dtype=np.int32)
        for q in a.states:
            for t, r in a.delta[q].items():
                self.target[q * n + self.index[t]] = r
        self.initial = a.initial
        self.finals = frozenset(a.finals)

    def encode(self, tokens) -> np.ndarray:
        """Label indices; a token outside the alphabet raises ``KeyError``."""
        index = self.index
        return np.array([index[t] for t in tokens], dtype=np.int32)

    def scan(self, ids: np.ndarray) -> tuple[int, int]:
        """``(state, consumed)``; state is -1 when the run dies after ``consumed`` labels."""
        return backend.dfa_scan(self.target, len(self.labels), ids, self.initial)

    def first_failure(self, tokens) -> int | None:
        """1-based position of the first rejected token, ``len + 1`` for a
        non-accepting end state, ``None`` when the sequence is accepted."""
        index = self.index
        ids = []
        for t in tokens:
            i = index.get(t)
            if i is None:
                break
            ids.append(i)
        q, consumed = self.scan(np.array(ids, dtype=np.int32))
        if q < 0 or consumed < len(tokens):
            return consumed + 1
        return None if q in self.finals else len(tokens) + 1

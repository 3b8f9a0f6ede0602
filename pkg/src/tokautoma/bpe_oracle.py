"""Reference BPE tokenizers.

``tokenize_hf_reference`` follows the HuggingFace loop literally (rules in
priority order, leftmost application first) and is the ground truth for
everything else in the package.  ``tokenize_hf`` is an indexed version with a
heap over adjacent pairs.  ``tokenize_sp`` and ``tokenize_sp_reference``
re-select the best rule after every merge.  The two orders agree on proper
dictionaries in which every rule creates a new token; they can differ when a
merged token is produced by two rules.
"""
from __future__ import annotations

import heapq
from typing import Iterable

from .core import Dictionary, Token, Tokenization, check_symbols, require_proper

__all__ = [
    "all_tokenizations",
    "tokenize_hf",
    "tokenize_hf_reference",
    "tokenize_sp",
    "tokenize_sp_reference",
]


def _prepare(d: Dictionary, w: str, checked: bool) -> None:
    if checked:
        require_proper(d)
        check_symbols(w, d.sigma)


def tokenize_hf_reference(d: Dictionary, w: str, checked: bool = True) -> Tokenization:
    _prepare(d, w, checked)
    tau = list(w)
    for rule in d.rules:
        u, v = rule.left, rule.right
        while True:
            # smallest |phi| with tau = phi + [u, v] + phi'
            for i in range(len(tau) - 1):
                if tau[i] == u and tau[i + 1] == v:
                    tau[i:i + 2] = [u + v]
                    break
            else:
                break
    return tuple(tau)


def tokenize_sp_reference(d: Dictionary, w: str, checked: bool = True) -> Tokenization:
    """Literal SentencePiece loop: rescan for the best adjacent pair after each merge."""
    _prepare(d, w, checked)
    ranks = _ranks(d)
    tau = list(w)
    while True:
        best = None
        best_i = -1
        for i in range(len(tau) - 1):
            r = ranks.get((tau[i], tau[i + 1]))
            if r is not None and (best is None or r < best):
                best, best_i = r, i
        if best is None:
            return tuple(tau)
        tau[best_i:best_i + 2] = [tau[best_i] + tau[best_i + 1]]


def tokenize_sp(d: Dictionary, w: str, checked: bool = True) -> Tokenization:
    """SentencePiece order: always merge the best-ranked adjacent pair, leftmost first."""
    _prepare(d, w, checked)
    return _heap_merge(_ranks(d), w, one_pass=False)


def tokenize_hf(d: Dictionary, w: str, checked: bool = True) -> Tokenization:
    """Indexed BPE: heap of (rule rank, position) over a linked list of tokens.

    Ranks are popped in increasing order, so the rules are applied one after
    another as in the reference; an adjacency formed by a later rule for an
    earlier one is ignored, exactly as the single pass over the rules would.
    """
    _prepare(d, w, checked)
    return _heap_merge(_ranks(d), w, one_pass=True)


def _heap_merge(ranks: dict[tuple[str, str], int], w: str, one_pass: bool) -> Tokenization:
    n = len(w)
    if n < 2:
        return tuple(w)
    toks: list[str | None] = list(w)
    nxt = list(range(1, n + 1))
    prv = list(range(-1, n - 1))
    heap = []
    for i in range(n - 1):
        r = ranks.get((w[i], w[i + 1]))
        if r is not None:
            heap.append((r, i))
    heapq.heapify(heap)
    current = 0
    while heap:
        r, i = heapq.heappop(heap)
        left = toks[i]
        if left is None:
            continue
        if one_pass:
            if r < current:
                continue
            current = r
        j = nxt[i]
        if j >= n or ranks.get((left, toks[j])) != r:
            continue
        merged = left + toks[j]
        toks[i] = merged
        toks[j] = None
        k = nxt[j]
        nxt[i] = k
        if k < n:
            prv[k] = i
            rk = ranks.get((merged, toks[k]))
            if rk is not None:
                heapq.heappush(heap, (rk, i))
        p = prv[i]
        if p >= 0:
            rp = ranks.get((toks[p], merged))
            if rp is not None:
                heapq.heappush(heap, (rp, p))
    return tuple(t for t in toks if t is not None)


def _ranks(d: Dictionary) -> dict[tuple[str, str], int]:
    return d.ranks


def all_tokenizations(gamma: Iterable[Token], w: str) -> set[Tokenization]:
    """Every sequence of tokens from ``gamma`` whose concatenation is ``w``."""
    gamma = frozenset(gamma)
    if not w:
        return {()}
    lengths = sorted({len(t) for t in gamma})
    # suffixes[i]: tokenizations of w[i:]
    suffixes: list[list[Tokenization]] = [[] for _ in range(len(w) + 1)]
    suffixes[len(w)] = [()]
    for i in range(len(w) - 1, -1, -1):
        out = suffixes[i]
        for k in lengths:
            if i + k > len(w):
                break
            tok = w[i:i + k]
            if tok in gamma:
                out.extend((tok,) + rest for rest in suffixes[i + k])
    return set(suffixes[0])

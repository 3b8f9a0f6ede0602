"""Automata from the worked examples plus brute-force helpers shared by tests."""
from __future__ import annotations

import itertools
import random

from tokautoma import Dictionary, TokenDFA
from tokautoma.gen import random_proper_dictionary


def a1() -> TokenDFA:
    # universal {a,b} after merging a≀a
    return TokenDFA([{"aa": 0, "b": 0, "a": 1}, {"b": 0}], 0, [0, 1])


def a2() -> TokenDFA:
    # A1 after merging b≀a
    return TokenDFA(
        [
            {"aa": 0, "a": 1, "ba": 1, "b": 2},
            {"ba": 1, "b": 2},
            {"b": 2, "ba": 1, "aa": 0},
        ],
        0,
        [0, 1, 2],
    )


def fig1() -> TokenDFA:
    # accepts a≀b≀c and a≀bc
    return TokenDFA([{"a": 1}, {"b": 2, "bc": 4}, {"c": 3}, {}, {}], 0, [3, 4])


def fig3() -> TokenDFA:
    # unique tokenizations, yet not context-invariant
    return TokenDFA([{"a": 0, "aa": 1}, {}], 0, [1])


EXAMPLE1 = Dictionary.from_pairs([("a", "a"), ("a", "b"), ("b", "c"), ("ab", "c"), ("bc", "ab")])


def d_k(k: int) -> Dictionary:
    return Dictionary.from_pairs([("a" * 2 ** i, "a" * 2 ** i) for i in range(k)])


def strings(sigma, max_len: int):
    sigma = sorted(sigma)
    for n in range(max_len + 1):
        for w in itertools.product(sigma, repeat=n):
            yield "".join(w)


def accepted_up_to(a: TokenDFA, max_chars: int) -> set[tuple[str, ...]]:
    """Every accepted tokenization whose projection has at most max_chars symbols."""
    out = set()
    stack = [(a.initial, (), 0)]
    while stack:
        q, toks, n = stack.pop()
        if q in a.finals:
            out.add(toks)
        for t, r in a.delta[q].items():
            if n + len(t) <= max_chars:
                stack.append((r, toks + (t,), n + len(t)))
    return out


def runs_by_string(a: TokenDFA, max_chars: int) -> dict[str, set[tuple[str, ...]]]:
    """Projection -> tokenizations of runs from any start state."""
    out: dict[str, set] = {}
    for s in a.states:
        stack = [(s, ())]
        while stack:
            q, toks = stack.pop()
            out.setdefault("".join(toks), set()).add(toks)
            for t, r in a.delta[q].items():
                if sum(map(len, toks)) + len(t) <= max_chars:
                    stack.append((r, toks + (t,)))
    return out


def corpus(n: int, seed: int = 0, max_sigma: int = 4, max_rules: int = 8, new_tokens: bool = True):
    rng = random.Random(seed)
    for _ in range(n):
        sigma = "abcd"[: rng.randint(1, max_sigma)]
        yield random_proper_dictionary(rng, sigma, rng.randint(0, max_rules), max_len=6, new_tokens=new_tokens)

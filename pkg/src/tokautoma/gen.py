"""Random proper dictionaries for tests and benchmarks."""
from __future__ import annotations

import random

from .core import Dictionary


def random_proper_dictionary(rng: random.Random, sigma: str, n_rules: int, max_len: int = 6,
                             attempts: int = 200, new_tokens: bool = True) -> Dictionary:
    """Draw up to ``n_rules`` rules whose sides are tokens produced earlier.

    Each rule joins two current tokens into a token of length at most
    ``max_len``; rules are never repeated.  With ``new_tokens`` every rule
    must create a token not seen before, as a BPE trainer normally does;
    without it, two rules may produce the same token.  Fewer rules are
    returned when no suitable rule turns up within ``attempts`` draws.
    """
    tokens = sorted(set(sigma))
    seen: set[tuple[str, str]] = set()
    rules: list[tuple[str, str]] = []
    for _ in range(n_rules):
        for _ in range(attempts):
            u, v = rng.choice(tokens), rng.choice(tokens)
            if len(u) + len(v) > max_len or (u, v) in seen:
                continue
            if not new_tokens or u + v not in tokens:
                break
        else:
            break
        seen.add((u, v))
        rules.append((u, v))
        if u + v not in tokens:
            tokens.append(u + v)
    return Dictionary.from_pairs(rules, extra_symbols=sigma)

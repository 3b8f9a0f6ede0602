"""Building token DFAs for BPE tokenizations of regular languages."""
from __future__ import annotations

from typing import Iterable, Iterator, NamedTuple

from .automaton import TokenDFA, e_set, e_uv, is_context_invariant, trim
from .core import Dictionary, MergeRule, require_proper
from .regex import Regex, parse_regex, regex_to_dfa, substring_dfa
from .strings import StringDFA

__all__ = [
    "InvariantViolation",
    "LedgerCheck",
    "StringDFA",
    "apply_merge",
    "base_token_dfa",
    "build_steps",
    "build_token_dfa",
    "contains_pattern_dfa",
    "merge_ledger",
    "regex_to_dfa",
    "universal_token_dfa",
]


class InvariantViolation(AssertionError):
    """A per-merge invariant failed while building in validation mode."""


def universal_token_dfa(sigma: Iterable[str]) -> TokenDFA:
    sigma = sorted(set(sigma))
    if not sigma:
        raise ValueError("the base alphabet is empty")
    return TokenDFA([{s: 0 for s in sigma}], 0, [0], sigma)


def base_token_dfa(a: StringDFA) -> TokenDFA:
    """Reinterpret each symbol label of a string DFA as a one-symbol token."""
    return TokenDFA([dict(d) for d in a.delta], a.initial, a.finals, a.alphabet, validate=False)


def _merge_in_place(delta: list[dict], finals: set, provenance: list, alphabet: set,
                    u: str, v: str, rule_index: int | None) -> int:
    """One merge of ``u`` then ``v`` into ``uv``, mutating the arguments.

    Returns the number of fresh states created (0 means nothing changed).
    """
    uv = u + v
    triples = []
    for s1 in range(len(delta)):
        s2 = delta[s1].get(u)
        if s2 is None:
            continue
        s3 = delta[s2].get(v)
        if s3 is not None:
            triples.append((s1, s2, s3))
    if not triples:
        return 0
    for s1, _, s3 in triples:
        delta[s1][uv] = s3
    alphabet.add(uv)
    s2s = sorted({s2 for _, s2, _ in triples})
    fresh = {}
    for s2 in s2s:
        f = len(delta)
        fresh[s2] = f
        delta.append({})
        provenance.append((s2, rule_index))
        if s2 in finals:
            finals.add(f)
    skip = {v} if u != v else {v, uv}
    for s2 in s2s:
        delta[fresh[s2]] = {t: r for t, r in delta[s2].items() if t not in skip}
    for d in delta:
        r = d.get(u)
        if r is not None and r in fresh:
            d[u] = fresh[r]
    return len(s2s)


def apply_merge(a: TokenDFA, rule: MergeRule | tuple[str, str]) -> TokenDFA:
    """Merge the rule ``u≀v`` into ``a``.

    Every run reading ``u`` then ``v`` is replaced by one reading ``uv``.
    Each state entered by ``u`` that has an outgoing ``v`` gets a fresh copy
    without its ``v`` transition (nor its ``uv`` transition when ``u == v``),
    and ``u`` transitions are redirected to the copies.  Returns ``a`` itself
    when the rule never applies.  No trimming is done.
    """
    u, v = (rule.left, rule.right) if isinstance(rule, MergeRule) else rule
    idx = rule.priority if isinstance(rule, MergeRule) else None
    delta = [dict(d) for d in a.delta]
    finals = set(a.finals)
    provenance = list(a.provenance)
    alphabet = set(a.alphabet)
    if not _merge_in_place(delta, finals, provenance, alphabet, u, v, idx):
        return a
    return TokenDFA(delta, a.initial, finals, alphabet, provenance, validate=False)


class LedgerCheck(NamedTuple):
    name: str
    ok: bool
    detail: str


def merge_ledger(before: TokenDFA, after: TokenDFA, rule: MergeRule | tuple[str, str]) -> list[LedgerCheck]:
    """State-count and image-size relations that must hold for one merge."""
    u, v = (rule.left, rule.right) if isinstance(rule, MergeRule) else rule
    uv = u + v
    checks = []
    n_uv = len(e_uv(before, u, v))
    checks.append(LedgerCheck(
        "states", after.n_states == before.n_states + n_uv,
        f"|Q'|={after.n_states}, |Q|={before.n_states}, |E_u,v|={n_uv}",
    ))
    eu_b, eu_a = len(e_set(before, u)), len(e_set(after, u))
    checks.append(LedgerCheck("E_u", eu_a == eu_b, f"|E_u(A')|={eu_a}, |E_u(A)|={eu_b}"))
    # the bound counts states that gain an incoming uv; when an earlier rule
    # already produced uv, only the new targets are bounded by |E_v(A)|
    euv_b = e_set(before, uv) if uv in before.alphabet else frozenset()
    gained, ev_b = len(e_set(after, uv) - euv_b), len(e_set(before, v))
    label = "|E_uv(A')|" if not euv_b else "|E_uv(A') - E_uv(A)|"
    checks.append(LedgerCheck("E_uv", gained <= ev_b, f"{label}={gained}, |E_v(A)|={ev_b}"))
    bad = [b for b in sorted(before.alphabet - {uv}) if len(e_set(after, b)) != len(e_set(before, b))]
    checks.append(LedgerCheck("E_beta", not bad, f"changed: {bad}" if bad else "all equal"))
    return checks


def _start(language: StringDFA | TokenDFA | None, d: Dictionary, sigma: Iterable[str]) -> TokenDFA:
    if language is None:
        return universal_token_dfa(set(d.sigma) | set(sigma))
    if isinstance(language, StringDFA):
        return base_token_dfa(trim(language))
    return language


def build_steps(language: StringDFA | TokenDFA | None, d: Dictionary,
                sigma: Iterable[str] = ()) -> Iterator[tuple[MergeRule | None, TokenDFA]]:
    """Yield ``(None, A_0)`` and then ``(rule_i, A_i)`` after each merge.

    ``language=None`` starts from the universal automaton over the
    dictionary's alphabet plus ``sigma``.  Every yielded automaton is an
    independent immutable snapshot.
    """
    require_proper(d)
    a = _start(language, d, sigma)
    yield None, a
    for rule in d.rules:
        a = apply_merge(a, rule)
        yield rule, a


def build_token_dfa(language: StringDFA | TokenDFA | None, d: Dictionary, trim_at_end: bool = False,
                    validate: bool = False, sigma: Iterable[str] = ()) -> TokenDFA:
    """Fold all rules of a proper dictionary into the token DFA of ``language``.

    The result accepts exactly the BPE tokenizations of the strings in the
    language.  With ``validate`` set, context-invariance and the merge ledger
    are checked after every step and :class:`InvariantViolation` is raised on
    the first failure.
    """
    require_proper(d)
    if validate:
        a = None
        for rule, nxt in build_steps(language, d, sigma):
            if rule is None:
                verdict = is_context_invariant(nxt)
                if not verdict:
                    raise InvariantViolation(f"input automaton is not context-invariant: {verdict.witness}")
            else:
                _check_step(a, nxt, rule)
            a = nxt
        return trim(a) if trim_at_end else a

    a = _start(language, d, sigma)
    delta = [dict(x) for x in a.delta]
    finals = set(a.finals)
    provenance = list(a.provenance)
    alphabet = set(a.alphabet)
    for rule in d.rules:
        _merge_in_place(delta, finals, provenance, alphabet, rule.left, rule.right, rule.priority)
    out = TokenDFA(delta, a.initial, finals, alphabet, provenance, validate=False)
    return trim(out) if trim_at_end else out


def _check_step(before: TokenDFA, after: TokenDFA, rule: MergeRule) -> None:
    verdict = is_context_invariant(after)
    if not verdict:
        raise InvariantViolation(f"merge {rule} broke context-invariance: {verdict.witness}")
    for check in merge_ledger(before, after, rule):
        if not check.ok:
            raise InvariantViolation(f"merge {rule}: ledger check {check.name} failed ({check.detail})")
    for q in range(before.n_states, after.n_states):
        if rule.right in after.delta[q]:
            raise InvariantViolation(f"fresh state {q} has an outgoing {rule.right!r} transition")


def contains_pattern_dfa(r: Regex | str, d: Dictionary, sigma: Iterable[str] = ()) -> TokenDFA:
    """Token DFA for the correct tokenizations of strings containing a match of ``r``."""
    require_proper(d)
    sigma = set(d.sigma) | set(sigma)
    if isinstance(r, str):
        r = parse_regex(r)
    language = substring_dfa(r, sigma)
    return build_token_dfa(language, d, trim_at_end=True)

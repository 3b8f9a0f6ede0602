import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tokautoma.automaton import (
    LocalityCapExceeded,
    LocalityError,
    Status,
    TokenDFA,
    WindowValidator,
    accepts,
    canonical_form,
    dloc,
    e_set,
    e_u_not_v,
    e_uv,
    equivalent,
    image,
    is_context_invariant,
    isomorphic,
    locality_profile,
    match_stream,
    run,
    trim,
    window_validate,
)
from tokautoma.construction import build_token_dfa, universal_token_dfa

from fixtures import a1, a2, accepted_up_to, corpus, fig1, fig3, runs_by_string


def test_run():
    assert run(a2(), 0, ("aa", "a", "ba")) == 1
    assert run(a2(), 2, ()) == 2
    assert run(a1(), 1, ("a",)) is None
    with pytest.raises(ValueError):
        run(a1(), 7, ())


def test_accepts():
    # b≀aa is the tokenization of "baa"; b≀ba≀aa is not one of "bbaaa"
    assert accepts(a2(), ("b", "aa"))
    assert accepts(a2(), ("b", "b", "aa", "a"))
    assert not accepts(a2(), ("b", "ba", "aa"))
    assert not accepts(a2(), ("a", "a"))
    assert accepts(a2(), ())
    assert not accepts(fig3(), ())


def test_constructor_validation():
    with pytest.raises(ValueError):
        TokenDFA([{"a": 3}], 0, [0])
    with pytest.raises(ValueError):
        TokenDFA([{"a": 0}], 1, [0])
    with pytest.raises(ValueError):
        TokenDFA([{"": 0}], 0, [0])


def test_trim_isolated_state():
    a = TokenDFA([{"a": 0}, {"b": 0}, {}], 0, [0])
    t = trim(a)
    assert t.n_states == 1
    assert equivalent(a, t)


def test_trim_keeps_all_accepting():
    assert trim(a2()) is a2() or trim(a2()) == a2()
    assert trim(a2()).n_states == 3


def test_trim_empty_language():
    t = trim(TokenDFA([{"a": 1}, {}], 0, []))
    assert t.n_states == 1 and not t.finals


def test_trim_after_merge_drops_bypassed_state():
    from tokautoma.construction import apply_merge

    # q0 -a-> q1 -b-> q2: merging a≀b sends the only a-transition to the
    # copy of q1, so q1 itself can no longer be reached
    a = TokenDFA([{"a": 1}, {"b": 2}, {}], 0, [1, 2])
    m = apply_merge(a, ("a", "b"))
    assert m.n_states == 4
    t = trim(m)
    assert t.n_states == 3
    assert accepted_up_to(m, 6) == accepted_up_to(t, 6) == {("a",), ("ab",)}


def test_context_invariance_fig1():
    v = is_context_invariant(fig1())
    assert not v
    w = v.witness
    assert w.is_valid_for(fig1())
    assert {w.tokens1, w.tokens2} >= {("b", "c"), ("bc",)} or "".join(w.tokens1) == "".join(w.tokens2)


def test_context_invariance_fig3():
    v = is_context_invariant(fig3())
    assert not v
    assert v.witness.is_valid_for(fig3())


def test_base_dfa_is_context_invariant():
    a = TokenDFA([{"a": 1, "b": 0}, {"a": 0}], 0, [1])
    assert is_context_invariant(a)
    assert is_context_invariant(a2())
    assert is_context_invariant(universal_token_dfa("ab"))


def _ci_brute(a: TokenDFA, bound: int) -> bool:
    for toks in runs_by_string(a, bound).values():
        if len(toks) > 1:
            return False
    return True


def _random_token_dfa(rng: random.Random) -> TokenDFA:
    n = rng.randint(1, 3)
    tokens = ["a", "b", "aa", "ab", "ba", "aab"][: rng.randint(2, 6)]
    delta = [{} for _ in range(n)]
    for q in range(n):
        for t in tokens:
            if rng.random() < 0.4:
                delta[q][t] = rng.randrange(n)
    return TokenDFA(delta, 0, [q for q in range(n) if rng.random() < 0.6])


def test_context_invariance_matches_brute_force():
    rng = random.Random(7)
    for _ in range(300):
        a = _random_token_dfa(rng)
        bound = a.n_states ** 2 * 3 + 3
        v = is_context_invariant(a)
        assert bool(v) == _ci_brute(a, min(bound, 10)), a.delta
        if not v:
            assert v.witness.is_valid_for(a)


def test_equivalent_fig2():
    v = equivalent(a1(), a2())
    assert not v
    # "ba" as one token is a shorter witness than b≀a; both separate them
    assert v.witness == ("ba",)
    assert accepts(a1(), v.witness) != accepts(a2(), v.witness)
    assert accepts(a1(), ("b", "a")) != accepts(a2(), ("b", "a"))


def test_equivalent_trivial():
    assert equivalent(a2(), trim(a2()))
    assert equivalent(universal_token_dfa("ab"), universal_token_dfa("ba"))
    assert not equivalent(universal_token_dfa("a"), universal_token_dfa("ab"))


def test_equivalent_matches_enumeration():
    rng = random.Random(3)
    for _ in range(300):
        x, y = _random_token_dfa(rng), _random_token_dfa(rng)
        v = equivalent(x, y)
        lx, ly = accepted_up_to(x, 8), accepted_up_to(y, 8)
        if v:
            assert lx == ly
        else:
            w = v.witness
            assert accepts(x, w) != accepts(y, w)
            # shortest: no distinguishing tokenization with fewer tokens
            diff = (lx ^ ly)
            if diff:
                assert len(w) <= min(len(t) for t in diff)


def test_image_sets():
    assert e_set(a2(), "ba") == {1}
    assert image(a2(), set(), "a") == frozenset()
    assert e_uv(a1(), "a", "b") == {1}
    assert e_u_not_v(a1(), "aa", "a") == frozenset()
    assert e_set(a1(), ("aa", "a")) == {1}


def test_dloc_values():
    assert dloc(universal_token_dfa("ab"), 1) == (1, ("a",))
    assert dloc(a1(), 1)[0] == 1
    assert dloc(a2(), 0)[0] == 3
    assert dloc(TokenDFA([{}], 0, [0]), 1) == (0, None)
    with pytest.raises(ValueError):
        dloc(a1(), -1)


def _dloc_brute(a: TokenDFA, k: int) -> int:
    best = 0
    for tau in itertools.product(sorted(a.alphabet), repeat=k):
        best = max(best, len(e_set(a, tau)))
    return best


def test_dloc_matches_brute_force_and_is_monotone():
    rng = random.Random(5)
    for _ in range(100):
        a = _random_token_dfa(rng)
        prof = locality_profile(a, 3)
        for k in (1, 2, 3):
            assert prof[k] == _dloc_brute(a, k)
            assert prof[k] <= prof[k - 1]
            if prof.witnesses[k] is not None:
                assert len(e_set(a, prof.witnesses[k])) == prof[k]


def test_locality_cap():
    with pytest.raises(LocalityCapExceeded):
        locality_profile(_random_token_dfa(random.Random(1)), 3, max_sets=0)


def test_match_stream():
    assert list(match_stream(a2(), ["aa", "aa", "a"])) == [Status.ACCEPTING] * 3
    assert list(match_stream(a2(), ["a", "a"])) == [Status.ACCEPTING, Status.DEAD]
    assert list(match_stream(a2(), [])) == []


def test_window_validate_examples():
    assert window_validate(a2(), 1, ["aa", "a", "ba", "b", "aa"])
    assert accepts(a2(), ["aa", "a", "ba", "b", "aa"])
    assert not window_validate(a2(), 1, ["a", "aa"])
    assert window_validate(a2(), 1, ["b"])
    assert window_validate(a2(), 1, [])


def test_fig_automata_are_1_local():
    assert dloc(fig3(), 1)[0] == 1
    assert dloc(fig1(), 1)[0] == 1


def test_window_validate_precondition():
    with pytest.raises(LocalityError) as info:
        WindowValidator(TokenDFA([{"a": 0}, {"a": 1}], 0, [0, 1]), 1)
    assert info.value.value == 2


def test_window_scan_reports_index():
    v = WindowValidator(a2(), 1)
    assert v.scan(["aa", "a", "a"]) == 3
    assert v.scan(["zz"]) == 1
    assert v.scan(["aa", "zz"]) == 2


def test_window_k2_matches_accepts():
    for d in corpus(20, seed=9):
        a = trim(build_token_dfa(None, d))
        if dloc(a, 2)[0] > 1:
            continue
        toks = sorted(a.alphabet)
        rng = random.Random(0)
        for _ in range(50):
            s = [rng.choice(toks) for _ in range(rng.randint(0, 6))]
            assert window_validate(a, 2, s) == accepts(a, s)


def test_json_round_trip_and_canonical():
    a = a2()
    text = a.to_json({"note": "x"})
    b = TokenDFA.from_json(text)
    assert b == a
    assert b.to_json({"note": "x"}) == text
    with pytest.raises(ValueError):
        TokenDFA.from_json('{"alphabet": []}')


def test_canonical_form_and_isomorphism():
    a = a2()
    perm = [2, 0, 1]
    delta = [None] * 3
    for q in range(3):
        delta[perm[q]] = {t: perm[r] for t, r in a.delta[q].items()}
    b = TokenDFA(delta, perm[0], [perm[q] for q in a.finals])
    assert isomorphic(a, b)
    assert canonical_form(a) == canonical_form(b)
    assert not isomorphic(a1(), a2())


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from(["a", "aa", "b", "ba", "bb"]), max_size=10))
def test_window_equals_accepts_on_a2(stream):
    assert window_validate(a2(), 1, stream) == accepts(a2(), stream)

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tokautoma.bpe_oracle import (
    all_tokenizations,
    tokenize_hf,
    tokenize_hf_reference,
    tokenize_sp,
    tokenize_sp_reference,
)
from tokautoma.core import AlphabetError, Dictionary, NotProperError, project

from fixtures import EXAMPLE1, corpus, strings

TOKENIZERS = [tokenize_hf_reference, tokenize_hf, tokenize_sp, tokenize_sp_reference]


@pytest.mark.parametrize("tok", TOKENIZERS)
def test_example1(tok):
    assert tok(EXAMPLE1, "aaaaacbcabc") == ("aa", "aa", "a", "c", "bc", "abc")


@pytest.mark.parametrize("tok", TOKENIZERS)
def test_small_cases(tok):
    assert tok(Dictionary(extra_symbols=frozenset("abc")), "abc") == ("a", "b", "c")
    aa = Dictionary.from_pairs([("a", "a")])
    assert tok(aa, "aaa") == ("aa", "a")
    assert tok(aa, "aaaa") == ("aa", "aa")
    assert tok(aa, "") == ()
    assert tok(Dictionary(extra_symbols=frozenset("x")), "x") == ("x",)


@pytest.mark.parametrize("tok", TOKENIZERS)
def test_rejections(tok):
    with pytest.raises(NotProperError):
        tok(Dictionary.from_pairs([("ab", "a"), ("a", "b")]), "aba")
    with pytest.raises(AlphabetError):
        tok(Dictionary.from_pairs([("a", "a")]), "ab")


def test_reference_and_indexed_agree_exhaustively():
    # the indexed version against the literal one; SentencePiece order is
    # compared separately in the acceptance suite
    for d in corpus(60, seed=11):
        for w in strings(d.sigma, 7):
            ref = tokenize_hf_reference(d, w)
            assert tokenize_hf(d, w) == ref
            assert project(ref) == w
            assert set(ref) <= d.gamma


def test_idempotent_and_lookahead():
    # re-tokenizing the projection is stable; extending the input keeps
    # all but at most |D| leading tokens
    for d in corpus(30, seed=5):
        for w in strings(d.sigma, 5):
            t = tokenize_hf(d, w)
            assert tokenize_hf(d, project(t)) == t
            for x in strings(d.sigma, 2):
                tx = tokenize_hf(d, w + x)
                common = 0
                while common < min(len(t), len(tx)) and t[common] == tx[common]:
                    common += 1
                assert common >= len(t) - len(d)


def test_semantics_split_on_repeated_merged_token():
    # the later rule aa≀a rebuilds "aaa", which re-enables the earlier aa≀aaa;
    # the single pass over the rules does not go back for it
    d = Dictionary.from_pairs([("a", "a"), ("a", "aa"), ("aa", "aaa"), ("aa", "a")])
    assert tokenize_hf_reference(d, "aaaaa") == ("aa", "aaa")
    assert tokenize_hf(d, "aaaaa") == ("aa", "aaa")
    assert tokenize_sp(d, "aaaaa") == ("aaaaa",)
    assert tokenize_sp_reference(d, "aaaaa") == ("aaaaa",)


def test_duplicate_rule_keeps_first_priority():
    d = Dictionary.from_pairs([("a", "b"), ("c", "a"), ("a", "b")])
    for tok in TOKENIZERS:
        assert tok(d, "cab") == ("c", "ab")


def test_sp_heap_matches_literal_loop():
    # includes dictionaries with repeated merged tokens, where the order matters
    for d in corpus(60, seed=13, new_tokens=False):
        for w in strings(d.sigma, 6):
            assert tokenize_sp(d, w) == tokenize_sp_reference(d, w)


def test_all_tokenizations():
    assert all_tokenizations({"a", "b", "c", "ab", "bc", "abc"}, "abc") == {
        ("a", "b", "c"), ("ab", "c"), ("a", "bc"), ("abc",)
    }
    assert all_tokenizations({"a", "b"}, "ab") == {("a", "b")}
    assert all_tokenizations({"a"}, "") == {()}
    assert all_tokenizations({"a"}, "b") == set()


@settings(max_examples=200)
@given(st.data())
def test_random_long_inputs_agree(data):
    d = data.draw(st.sampled_from(list(corpus(40, seed=2))))
    sigma = sorted(d.sigma)
    w = data.draw(st.text(alphabet=sigma, max_size=40)) if sigma else ""
    assert tokenize_hf(d, w) == tokenize_hf_reference(d, w)
    assert tokenize_sp(d, w) == tokenize_sp_reference(d, w)

"""Finite-state constructions for byte-pair-encoding tokenizations."""
from .automaton import (
    LocalityProfile,
    TokenDFA,
    Verdict,
    WindowValidator,
    accepts,
    canonical_form,
    dloc,
    e_set,
    equivalent,
    is_context_invariant,
    isomorphic,
    locality_profile,
    match_stream,
    trim,
    window_validate,
)
from .bpe_oracle import (
    all_tokenizations,
    tokenize_hf,
    tokenize_hf_reference,
    tokenize_sp,
    tokenize_sp_reference,
)
from .construction import (
    apply_merge,
    build_steps,
    build_token_dfa,
    contains_pattern_dfa,
    merge_ledger,
    universal_token_dfa,
)
from .core import (
    AlphabetError,
    Dictionary,
    DictionaryFormatError,
    MergeRule,
    NotProperError,
    is_proper,
    parse_dictionary,
    project,
    serialize_dictionary,
)
from .regex import regex_to_dfa, substring_dfa
from .strings import StringDFA
from .transducer import (
    SubseqTransducer,
    Transducer,
    build_transducer,
    check_functional,
    compile_tokenizer,
    determinize,
    transduce,
)

__version__ = "0.1.0"

__all__ = [
    "AlphabetError",
    "Dictionary",
    "DictionaryFormatError",
    "LocalityProfile",
    "MergeRule",
    "NotProperError",
    "StringDFA",
    "SubseqTransducer",
    "TokenDFA",
    "Transducer",
    "Verdict",
    "WindowValidator",
    "accepts",
    "all_tokenizations",
    "apply_merge",
    "build_steps",
    "build_token_dfa",
    "build_transducer",
    "canonical_form",
    "check_functional",
    "compile_tokenizer",
    "contains_pattern_dfa",
    "determinize",
    "dloc",
    "e_set",
    "equivalent",
    "is_context_invariant",
    "is_proper",
    "isomorphic",
    "locality_profile",
    "match_stream",
    "merge_ledger",
    "parse_dictionary",
    "project",
    "regex_to_dfa",
    "serialize_dictionary",
    "substring_dfa",
    "tokenize_hf",
    "tokenize_hf_reference",
    "tokenize_sp",
    "tokenize_sp_reference",
    "transduce",
    "trim",
    "universal_token_dfa",
    "window_validate",
]

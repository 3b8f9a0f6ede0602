"""Command-line entry point: ``tokautoma build|tokenize|validate|equiv|match|stats``.

Exit codes: 0 success or accept, 1 usage or parse error, 2 improper
dictionary, 3 input-data violation (including rejected streams and
inequivalent dictionaries), 4 internal invariant failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager
from typing import Iterable, Iterator, TextIO

from .automaton import (
    LocalityCapExceeded,
    LocalityError,
    TokenDFA,
    WindowValidator,
    equivalent,
    is_context_invariant,
    locality_profile,
    trim,
)
from .bpe_oracle import tokenize_hf
from .construction import InvariantViolation, build_token_dfa, contains_pattern_dfa
from .core import (
    AlphabetError,
    Dictionary,
    DictionaryFormatError,
    NotProperError,
    Token,
    Tokenization,
    escape_token,
    parse_dictionary,
    project,
    unescape_token,
)
from .kernels import DFATable, TransducerTable
from .regex import RegexError, regex_to_dfa
from .transducer import (
    DeterminizationAborted,
    NotFunctionalError,
    SubseqTransducer,
    build_transducer,
    compile_tokenizer,
    determinize,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IMPROPER = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4


class CommandError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# token streams


def format_record(tokens: Iterable[Token]) -> str:
    return "\t".join(escape_token(t) for t in tokens)


def parse_record(line: str) -> Tokenization:
    line = line.rstrip("\n")
    if not line:
        return ()
    return tuple(unescape_token(x) for x in line.split("\t"))


class Vocab:
    """Token/id bijection stored as a JSON array (index = id)."""

    def __init__(self, tokens: Iterable[Token]):
        self.tokens = list(tokens)
        self.ids = {t: i for i, t in enumerate(self.tokens)}
        if len(self.ids) != len(self.tokens):
            raise ValueError("vocabulary lists a token twice")

    @classmethod
    def load(cls, path: str) -> "Vocab":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, list) or not all(isinstance(t, str) and t for t in data):
            raise ValueError("vocabulary must be a JSON array of nonempty strings")
        return cls(data)

    def dump(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.tokens, fh, ensure_ascii=False)
            fh.write("\n")

    def encode(self, tokens: Iterable[Token]) -> str:
        try:
            return " ".join(str(self.ids[t]) for t in tokens)
        except KeyError as exc:
            raise CommandError(EXIT_DATA, f"token {exc.args[0]!r} is not in the vocabulary") from None

    def decode(self, line: str) -> Tokenization:
        out = []
        for x in line.split():
            try:
                i = int(x)
            except ValueError:
                raise CommandError(EXIT_USAGE, f"bad token id {x!r}") from None
            if not 0 <= i < len(self.tokens):
                raise CommandError(EXIT_DATA, f"token id {i} is not in the vocabulary")
            out.append(self.tokens[i])
        return tuple(out)


# loading helpers


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CommandError(EXIT_USAGE, f"cannot read {path}: {exc.strerror}") from None


def _sigma(args) -> set[str]:
    return set(unescape_token(args.sigma)) if args.sigma else set()


def load_dictionary(path: str, extra: Iterable[str] = ()) -> Dictionary:
    try:
        d = parse_dictionary(_read(path), extra_symbols=extra)
    except DictionaryFormatError as exc:
        raise CommandError(EXIT_USAGE, f"{path}: {exc}") from None
    verdict = d.properness
    if not verdict:
        raise CommandError(EXIT_IMPROPER, f"{path}: {NotProperError(verdict)}")
    return d


def load_automaton(path: str) -> TokenDFA:
    try:
        return TokenDFA.from_json(_read(path))
    except ValueError as exc:
        raise CommandError(EXIT_USAGE, f"{path}: {exc}") from None


def load_transducer_table(path: str) -> TransducerTable:
    """Load a tokenizer saved as JSON or as a binary table."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise CommandError(EXIT_USAGE, f"cannot read {path}: {exc.strerror}") from None
    try:
        if data.startswith(TransducerTable.MAGIC):
            return TransducerTable.from_bytes(data)
        return SubseqTransducer.from_json(data.decode("utf-8")).table()
    except (ValueError, KeyError) as exc:
        raise CommandError(EXIT_USAGE, f"{path}: {exc}") from None


@contextmanager
def _input(path: str | None, stdin: TextIO) -> Iterator[TextIO]:
    if path is None or path == "-":
        yield stdin
        return
    try:
        fh = open(path, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise CommandError(EXIT_USAGE, f"cannot read {path}: {exc.strerror}") from None
    with fh:
        yield fh


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise CommandError(EXIT_USAGE, f"cannot write {path}: {exc.strerror}") from None


def _records(fh: TextIO, vocab: Vocab | None) -> Iterator[Tokenization]:
    for line in fh:
        line = line.rstrip("\n")
        yield vocab.decode(line) if vocab is not None else parse_record(line)


def _vocab(args) -> Vocab | None:
    if not args.ids:
        return None
    if not args.vocab:
        raise CommandError(EXIT_USAGE, "--ids needs --vocab")
    try:
        return Vocab.load(args.vocab)
    except OSError as exc:
        raise CommandError(EXIT_USAGE, f"cannot read {args.vocab}: {exc.strerror}") from None
    except ValueError as exc:
        raise CommandError(EXIT_USAGE, f"{args.vocab}: {exc}") from None


# commands


def cmd_build(args, out: TextIO) -> int:
    extra = _sigma(args)
    d = load_dictionary(args.dict, extra)
    language = None
    if args.lang is not None:
        try:
            language = regex_to_dfa(args.lang, d.sigma)
        except RegexError as exc:
            raise CommandError(EXIT_USAGE, f"bad --lang: {exc}") from None
    try:
        a = build_token_dfa(language, d, trim_at_end=args.trim, validate=args.validate)
    except InvariantViolation as exc:
        raise CommandError(EXIT_INTERNAL, f"invariant failure: {exc}") from None
    meta = {
        "rules": len(d),
        "sigma": sorted(d.sigma),
        "language": "universal" if language is None else args.lang,
        "trimmed": bool(args.trim),
    }
    text = a.to_json(meta)
    d1 = locality_profile(a, 1)[1]
    report = f"states {a.n_states}\ntransitions {a.n_transitions}\ndloc1 {d1}\n"
    if args.out:
        _write(args.out, text)
        out.write(report)
    else:
        out.write(text)
        sys.stderr.write(report)
    if args.vocab:
        Vocab(sorted(d.gamma)).dump(args.vocab)
    if args.transducer_out:
        try:
            if language is None:
                t = compile_tokenizer(d)
            else:
                t = determinize(build_transducer(trim(a)),
                                max_pending=2 * len(d) * max(d.max_token_length, 1) + a.n_states + 8)
        except (NotFunctionalError, DeterminizationAborted) as exc:
            raise CommandError(EXIT_INTERNAL, f"transducer construction failed: {exc}") from None
        if args.transducer_out.endswith(".bin"):
            try:
                t.table().save(args.transducer_out)
            except OSError as exc:
                raise CommandError(EXIT_USAGE, f"cannot write {args.transducer_out}: {exc.strerror}") from None
        else:
            _write(args.transducer_out, t.to_json())
    return EXIT_OK


def cmd_tokenize(args, stdin: TextIO, out: TextIO) -> int:
    d = load_dictionary(args.dict, _sigma(args))
    vocab = _vocab(args)
    if args.mode == "oracle":
        def encode(w: str, lineno: int) -> str:
            try:
                toks = tokenize_hf(d, w)
            except AlphabetError as exc:
                raise AlphabetError(exc.symbol, exc.position, lineno) from None
            return vocab.encode(toks) if vocab else format_record(toks)
    else:
        if args.transducer:
            table = load_transducer_table(args.transducer)
        else:
            table = compile_tokenizer(d).table()
        if vocab:
            names = [vocab.ids.get(tok) for tok in table.tokens]
            names = [str(i) if i is not None else None for i in names]
            sep = " "
        else:
            names = [escape_token(tok) for tok in table.tokens]
            sep = "\t"

        def encode(w: str, lineno: int) -> str:
            try:
                ids = table.run_ids(w)
            except AlphabetError as exc:
                raise AlphabetError(exc.symbol, exc.position, lineno) from None
            if ids is None:
                raise CommandError(EXIT_DATA, f"line {lineno}: input is outside the tokenizer's domain")
            parts = [names[i] for i in ids.tolist()]
            if None in parts:
                missing = table.tokens[ids.tolist()[parts.index(None)]]
                raise CommandError(EXIT_DATA, f"token {missing!r} is not in the vocabulary")
            return sep.join(parts)

    with _input(args.input, stdin) as fh:
        for lineno, line in enumerate(fh, 1):
            try:
                out.write(encode(line.rstrip("\n"), lineno) + "\n")
            except AlphabetError as exc:
                raise CommandError(EXIT_DATA, str(exc)) from None
    return EXIT_OK


_TABLE_MIN_RECORD = 64


def _first_failure(a: TokenDFA, tokens: Tokenization) -> int | None:
    q = a.initial
    for i, t in enumerate(tokens, 1):
        q = a.delta[q].get(t)
        if q is None:
            return i
    return None if q in a.finals else len(tokens) + 1


def cmd_validate(args, stdin: TextIO, out: TextIO) -> int:
    a = load_automaton(args.aut)
    vocab = _vocab(args)
    if args.window:
        try:
            validator = WindowValidator(a, 1)
        except LocalityError as exc:
            raise CommandError(EXIT_DATA, f"window mode needs a 1-local automaton: {exc}") from None
        check = validator.scan
    else:
        table = DFATable(a)

        def check(tokens):
            if len(tokens) >= _TABLE_MIN_RECORD:
                return table.first_failure(tokens)
            return _first_failure(a, tokens)
    status = EXIT_OK
    with _input(args.input, stdin) as fh:
        for n, tokens in enumerate(_records(fh, vocab), 1):
            bad = check(tokens)
            if bad is None:
                out.write("accept\n")
                continue
            status = EXIT_DATA
            if bad <= len(tokens) and tokens[bad - 1] not in a.alphabet:
                out.write(f"reject {bad} unknown-token\n")
            elif bad > len(tokens):
                out.write(f"reject {bad} not-final\n")
            else:
                out.write(f"reject {bad}\n")
    return status


def cmd_equiv(args, out: TextIO) -> int:
    extra = _sigma(args)
    d1 = load_dictionary(args.dict, extra)
    d2 = load_dictionary(args.dict2, extra)
    sigma = set(d1.sigma) | set(d2.sigma) | extra
    a1 = trim(build_token_dfa(None, d1, sigma=sigma))
    a2 = trim(build_token_dfa(None, d2, sigma=sigma))
    verdict = equivalent(a1, a2)
    if verdict:
        doc = {"equivalent": True}
        text = "equivalent\n"
    else:
        w = project(verdict.witness)
        t1 = tokenize_hf(d1.with_symbols(sigma), w)
        t2 = tokenize_hf(d2.with_symbols(sigma), w)
        if t1 == t2:
            raise CommandError(EXIT_INTERNAL, f"witness {w!r} does not separate the dictionaries")
        doc = {"equivalent": False, "witness": w, "tokens1": list(t1), "tokens2": list(t2)}
        text = (
            "inequivalent\n"
            f"witness {escape_token(w)}\n"
            f"dict1 {format_record(t1)}\n"
            f"dict2 {format_record(t2)}\n"
        )
    out.write(json.dumps(doc, ensure_ascii=False) + "\n" if args.json else text)
    return EXIT_OK if verdict else EXIT_DATA


def cmd_match(args, stdin: TextIO, out: TextIO) -> int:
    d = load_dictionary(args.dict, _sigma(args))
    vocab = _vocab(args)
    if args.pattern is None:
        raise CommandError(EXIT_USAGE, "match needs --pattern")
    try:
        pattern = contains_pattern_dfa(args.pattern, d)
    except RegexError as exc:
        raise CommandError(EXIT_USAGE, f"bad --pattern: {exc}") from None
    valid = build_token_dfa(None, d)
    status = EXIT_OK
    with _input(args.input, stdin) as fh:
        for tokens in _records(fh, vocab):
            if not valid.accepts(tokens):
                out.write("invalid\n")
                status = EXIT_DATA
            else:
                out.write("match\n" if pattern.accepts(tokens) else "nomatch\n")
    return status


def cmd_stats(args, out: TextIO) -> int:
    a = load_automaton(args.aut)
    k = 3 if args.k is None else args.k
    if k < 1:
        raise CommandError(EXIT_USAGE, "--k must be at least 1")
    inv = is_context_invariant(a)
    try:
        prof = locality_profile(a, k)
    except LocalityCapExceeded as exc:
        raise CommandError(EXIT_DATA, str(exc)) from None
    dl = {str(i): prof.values[i] for i in range(1, k + 1)}
    wit = {str(i): list(prof.witnesses[i]) if prof.witnesses[i] is not None else None for i in range(1, k + 1)}
    if args.json:
        doc = {
            "states": a.n_states,
            "transitions": a.n_transitions,
            "finals": len(a.finals),
            "context_invariant": bool(inv),
            "context_witness": None if inv else {
                "start1": inv.witness.start1, "tokens1": list(inv.witness.tokens1),
                "start2": inv.witness.start2, "tokens2": list(inv.witness.tokens2),
            },
            "dloc": dl,
            "dloc_witnesses": wit,
        }
        out.write(json.dumps(doc, ensure_ascii=False, sort_keys=True) + "\n")
        return EXIT_OK
    out.write(f"states {a.n_states}\ntransitions {a.n_transitions}\nfinals {len(a.finals)}\n")
    if inv:
        out.write("context-invariant yes\n")
    else:
        w = inv.witness
        out.write(
            f"context-invariant no: from {w.start1} {format_record(w.tokens1)}"
            f" | from {w.start2} {format_record(w.tokens2)}\n"
        )
    for i in range(1, k + 1):
        tau = prof.witnesses[i]
        shown = format_record(tau) if tau else "-"
        out.write(f"dloc{i} {prof.values[i]} {shown}\n")
    return EXIT_OK


# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tokautoma",
        description="Finite-state tools for BPE tokenizations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, stream=False):
        p.add_argument("--sigma", help="extra base symbols (escapes \\s \\t \\n \\\\ allowed)")
        if stream:
            p.add_argument("input", nargs="?", help="input file (default: stdin)")
            p.add_argument("--ids", action="store_true", help="token streams as integer ids")
            p.add_argument("--vocab", help="vocabulary JSON array used with --ids")

    p = sub.add_parser("build", help="build the token DFA of a dictionary")
    p.add_argument("--dict", required=True)
    lang = p.add_mutually_exclusive_group()
    lang.add_argument("--universal", action="store_true", help="all strings over the alphabet (default)")
    lang.add_argument("--lang", help="regex for the input language")
    p.add_argument("--out", help="automaton file (default: stdout)")
    p.add_argument("--trim", action="store_true", help="remove useless states")
    p.add_argument("--validate", action="store_true", help="check invariants after every merge")
    p.add_argument("--vocab", help="also write the sorted token vocabulary here")
    p.add_argument("--transducer-out",
                   help="also write the subsequential tokenizer here (binary table if the name ends in .bin)")
    common(p)

    p = sub.add_parser("tokenize", help="tokenize one record per input line")
    p.add_argument("--dict", required=True)
    p.add_argument("--mode", choices=("oracle", "transducer"), default="transducer")
    p.add_argument("--transducer", help="prebuilt tokenizer, JSON or binary table (transducer mode)")
    common(p, stream=True)

    p = sub.add_parser("validate", help="check token streams against an automaton")
    p.add_argument("--aut", required=True)
    p.add_argument("--window", action="store_true", help="sliding-window check (1-local automata)")
    common(p, stream=True)

    p = sub.add_parser("equiv", help="decide whether two dictionaries tokenize alike")
    p.add_argument("--dict", required=True)
    p.add_argument("--dict2", required=True)
    p.add_argument("--json", action="store_true")
    common(p)

    p = sub.add_parser("match", help="search token streams for a pattern in the underlying text")
    p.add_argument("--dict", required=True)
    p.add_argument("--pattern", required=True)
    common(p, stream=True)

    p = sub.add_parser("stats", help="report size, invariance and locality of an automaton")
    p.add_argument("--aut", required=True)
    p.add_argument("--k", type=int, help="largest k for dloc (default 3)")
    p.add_argument("--json", action="store_true")
    return parser


def main(argv: list[str] | None = None, stdin: TextIO | None = None, stdout: TextIO | None = None) -> int:
    stdin = sys.stdin if stdin is None else stdin
    out = sys.stdout if stdout is None else stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        if args.command == "build":
            return cmd_build(args, out)
        if args.command == "tokenize":
            return cmd_tokenize(args, stdin, out)
        if args.command == "validate":
            return cmd_validate(args, stdin, out)
        if args.command == "equiv":
            return cmd_equiv(args, out)
        if args.command == "match":
            return cmd_match(args, stdin, out)
        return cmd_stats(args, out)
    except CommandError as exc:
        sys.stderr.write(f"tokautoma {args.command}: {exc}\n")
        return exc.code


if __name__ == "__main__":
    sys.exit(main())

"""A small regex front end compiled to string DFAs.

Supported syntax: literals, concatenation, ``|``, ``*``, ``+``, ``?``,
grouping with parentheses, ``.`` (any base symbol), character classes
``[abc]``, ``[a-c]``, ``[^ab]``, and backslash escapes (``\\s`` is a space,
``\\n`` and ``\\t`` as usual, anything else is taken literally).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

from .automaton import trim
from .strings import StringDFA

__all__ = [
    "Regex",
    "RegexError",
    "minimize",
    "nfa_from_regex",
    "parse_regex",
    "regex_to_dfa",
    "substring_dfa",
]


class RegexError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


@dataclass(frozen=True)
class Chars:
    chars: frozenset[str]
    negated: bool = False
    position: int = 0


@dataclass(frozen=True)
class AnySymbol:
    position: int = 0


@dataclass(frozen=True)
class Concat:
    parts: tuple["Regex", ...]


@dataclass(frozen=True)
class Alt:
    options: tuple["Regex", ...]


@dataclass(frozen=True)
class Repeat:
    body: "Regex"
    op: str  # one of "*", "+", "?"


Regex = Union[Chars, AnySymbol, Concat, Alt, Repeat]

_SPECIAL = set("()[]|*+?.\\")
_ESCAPES = {"s": " ", "n": "\n", "t": "\t"}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self) -> str | None:
        return self.text[self.pos] if self.pos < len(self.text) else None

    def take(self) -> str:
        c = self.text[self.pos]
        self.pos += 1
        return c

    def parse(self) -> Regex:
        node = self.alt()
        if self.pos != len(self.text):
            raise RegexError(f"unexpected {self.text[self.pos]!r}", self.pos)
        return node

    def alt(self) -> Regex:
        options = [self.concat()]
        while self.peek() == "|":
            self.take()
            options.append(self.concat())
        return options[0] if len(options) == 1 else Alt(tuple(options))

    def concat(self) -> Regex:
        parts = []
        while self.peek() is not None and self.peek() not in "|)":
            parts.append(self.repeat())
        return parts[0] if len(parts) == 1 else Concat(tuple(parts))

    def repeat(self) -> Regex:
        node = self.atom()
        while self.peek() in ("*", "+", "?"):
            node = Repeat(node, self.take())
        return node

    def escape(self) -> str:
        if self.peek() is None:
            raise RegexError("dangling backslash", self.pos - 1)
        c = self.take()
        return _ESCAPES.get(c, c)

    def atom(self) -> Regex:
        start = self.pos
        c = self.take()
        if c == "(":
            if self.peek() == ")":
                self.take()
                return Concat(())
            node = self.alt()
            if self.peek() != ")":
                raise RegexError("missing ')'", self.pos)
            self.take()
            return node
        if c == "[":
            return self.char_class(start)
        if c == ".":
            return AnySymbol(start)
        if c == "\\":
            return Chars(frozenset(self.escape()), position=start)
        if c in _SPECIAL:
            raise RegexError(f"unexpected {c!r}", start)
        return Chars(frozenset(c), position=start)

    def char_class(self, start: int) -> Regex:
        negated = False
        if self.peek() == "^":
            self.take()
            negated = True
        chars: set[str] = set()
        first = True
        while True:
            c = self.peek()
            if c is None:
                raise RegexError("unterminated character class", start)
            if c == "]" and not first:
                self.take()
                break
            first = False
            self.take()
            lo = self.escape() if c == "\\" else c
            if self.peek() == "-" and self.pos + 1 < len(self.text) and self.text[self.pos + 1] != "]":
                self.take()
                c2 = self.take()
                hi = self.escape() if c2 == "\\" else c2
                if ord(hi) < ord(lo):
                    raise RegexError(f"bad range {lo}-{hi}", start)
                chars.update(chr(x) for x in range(ord(lo), ord(hi) + 1))
            else:
                chars.add(lo)
        return Chars(frozenset(chars), negated, start)


def parse_regex(text: str) -> Regex:
    return _Parser(text).parse()


class _NFA:
    """Thompson NFA: ``eps[q]`` epsilon targets, ``edges[q]`` (symbol set, target)."""

    def __init__(self):
        self.eps: list[list[int]] = []
        self.edges: list[list[tuple[frozenset[str], int]]] = []

    def new(self) -> int:
        self.eps.append([])
        self.edges.append([])
        return len(self.eps) - 1


def _compile(node: Regex, nfa: _NFA, sigma: frozenset[str]) -> tuple[int, int]:
    if isinstance(node, (Chars, AnySymbol)):
        if isinstance(node, AnySymbol):
            chars = sigma
        elif node.negated:
            chars = sigma - node.chars
        else:
            outside = sorted(node.chars - sigma)
            if outside:
                raise RegexError(f"symbol {outside[0]!r} is not in the base alphabet", node.position)
            chars = node.chars
        s, f = nfa.new(), nfa.new()
        nfa.edges[s].append((frozenset(chars), f))
        return s, f
    if isinstance(node, Concat):
        s = f = nfa.new()
        for part in node.parts:
            ps, pf = _compile(part, nfa, sigma)
            nfa.eps[f].append(ps)
            f = pf
        return s, f
    if isinstance(node, Alt):
        s, f = nfa.new(), nfa.new()
        for opt in node.options:
            os_, of = _compile(opt, nfa, sigma)
            nfa.eps[s].append(os_)
            nfa.eps[of].append(f)
        return s, f
    if isinstance(node, Repeat):
        bs, bf = _compile(node.body, nfa, sigma)
        s, f = nfa.new(), nfa.new()
        nfa.eps[s].append(bs)
        nfa.eps[bf].append(f)
        if node.op in ("*", "?"):
            nfa.eps[s].append(f)
        if node.op in ("*", "+"):
            nfa.eps[bf].append(bs)
        return s, f
    raise TypeError(f"not a regex node: {node!r}")


def nfa_from_regex(r: Regex | str, sigma: Iterable[str], substring: bool = False) -> tuple[_NFA, int, int]:
    """Thompson NFA for ``r``; with ``substring`` for Σ*·L(r)·Σ*."""
    sigma = frozenset(sigma)
    if isinstance(r, str):
        r = parse_regex(r)
    nfa = _NFA()
    s, f = _compile(r, nfa, sigma)
    if substring:
        pre, post = nfa.new(), nfa.new()
        nfa.edges[pre].append((sigma, pre))
        nfa.eps[pre].append(s)
        nfa.eps[f].append(post)
        nfa.edges[post].append((sigma, post))
        s, f = pre, post
    return nfa, s, f


def _closure(nfa: _NFA, states: Iterable[int]) -> frozenset[int]:
    seen = set(states)
    stack = list(seen)
    while stack:
        q = stack.pop()
        for r in nfa.eps[q]:
            if r not in seen:
                seen.add(r)
                stack.append(r)
    return frozenset(seen)


def _determinize(nfa: _NFA, start: int, final: int, sigma: Iterable[str]) -> StringDFA:
    symbols = sorted(set(sigma))
    init = _closure(nfa, [start])
    index = {init: 0}
    order = [init]
    delta: list[dict[str, int]] = []
    i = 0
    while i < len(order):
        subset = order[i]
        i += 1
        row = {}
        for a in symbols:
            targets = [r for q in subset for chars, r in nfa.edges[q] if a in chars]
            if not targets:
                continue
            nxt = _closure(nfa, targets)
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            row[a] = index[nxt]
        delta.append(row)
    finals = [j for j, s in enumerate(order) if final in s]
    return minimize(trim(StringDFA(delta, 0, finals, symbols)))


def minimize(a: StringDFA) -> StringDFA:
    """Merge equivalent states by partition refinement (Moore's algorithm).

    Missing transitions are treated as going to an implicit dead state.
    """
    symbols = sorted(a.alphabet)
    block = [1 if q in a.finals else 0 for q in a.states]
    n_blocks = len(set(block))
    while True:
        sig = {}
        new = []
        for q in a.states:
            key = (block[q],) + tuple(
                block[a.delta[q][c]] if c in a.delta[q] else -1 for c in symbols
            )
            new.append(sig.setdefault(key, len(sig)))
        if len(sig) == n_blocks:
            break
        block, n_blocks = new, len(sig)
    # number blocks in order of first appearance, initial state first
    order: dict[int, int] = {block[a.initial]: 0}
    for q in a.states:
        order.setdefault(block[q], len(order))
    delta: list[dict[str, int]] = [{} for _ in order]
    for q in a.states:
        delta[order[block[q]]] = {c: order[block[r]] for c, r in a.delta[q].items()}
    finals = {order[block[q]] for q in a.finals}
    return StringDFA(delta, 0, finals, symbols)


def regex_to_dfa(r: Regex | str, sigma: Iterable[str]) -> StringDFA:
    """Deterministic, trimmed string DFA for the regex language over ``sigma``."""
    sigma = set(sigma)
    nfa, s, f = nfa_from_regex(r, sigma)
    return _determinize(nfa, s, f, sigma)


def substring_dfa(r: Regex | str, sigma: Iterable[str]) -> StringDFA:
    """String DFA for the strings that contain a match of ``r``."""
    sigma = set(sigma)
    nfa, s, f = nfa_from_regex(r, sigma, substring=True)
    return _determinize(nfa, s, f, sigma)

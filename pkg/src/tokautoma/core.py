"""Base alphabets, tokens, tokenizations, merge rules and dictionaries.

Tokens are plain ``str`` values and tokenizations are tuples of tokens.  A
tokenization and the string it projects to are different objects:
``("a", "bc")`` is a tokenization, ``"abc"`` is its projection.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

Token = str
Tokenization = tuple[str, ...]

__all__ = [
    "AlphabetError",
    "Dictionary",
    "DictionaryFormatError",
    "MergeRule",
    "NotProperError",
    "Properness",
    "Token",
    "Tokenization",
    "base_tokenization",
    "escape_token",
    "is_proper",
    "parse_dictionary",
    "project",
    "serialize_dictionary",
    "unescape_token",
]


class DictionaryFormatError(ValueError):
    """A dictionary file line could not be parsed."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class AlphabetError(ValueError):
    """A symbol outside the base alphabet was encountered."""

    def __init__(self, symbol: str, position: int, line: int | None = None):
        where = f"position {position}" if line is None else f"line {line}, column {position + 1}"
        super().__init__(f"symbol {symbol!r} at {where} is not in the base alphabet")
        self.symbol = symbol
        self.position = position
        self.line = line


class NotProperError(ValueError):
    def __init__(self, verdict: "Properness"):
        super().__init__(
            f"dictionary is not proper: rule {verdict.index} has {verdict.side} side "
            f"{verdict.token!r} which no earlier rule produces"
        )
        self.verdict = verdict


@dataclass(frozen=True)
class MergeRule:
    left: Token
    right: Token
    priority: int = 0

    def __post_init__(self):
        if not self.left or not self.right:
            raise ValueError("merge rule tokens must be nonempty")

    @property
    def merged(self) -> Token:
        return self.left + self.right

    def __str__(self):
        return f"{self.left}≀{self.right}"


class Properness(NamedTuple):
    """Outcome of :func:`is_proper`; truthy when the dictionary is proper."""

    ok: bool
    index: int | None = None
    side: str | None = None
    token: Token | None = None

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class Dictionary:
    """An ordered list of merge rules; position is priority (0 is highest).

    ``extra_symbols`` lets callers declare base symbols that occur in no rule.
    """

    rules: tuple[MergeRule, ...] = ()
    extra_symbols: frozenset[str] = frozenset()
    sigma: frozenset[str] = field(init=False)
    gamma: frozenset[Token] = field(init=False)

    def __post_init__(self):
        rules = tuple(
            r if r.priority == i else MergeRule(r.left, r.right, i)
            for i, r in enumerate(self.rules)
        )
        object.__setattr__(self, "rules", rules)
        extra = frozenset(self.extra_symbols)
        for s in extra:
            if len(s) != 1:
                raise ValueError(f"extra base symbol {s!r} is not a single character")
        object.__setattr__(self, "extra_symbols", extra)
        sigma = set(extra)
        for r in rules:
            sigma.update(r.left)
            sigma.update(r.right)
        object.__setattr__(self, "sigma", frozenset(sigma))
        object.__setattr__(self, "gamma", frozenset(sigma) | {r.merged for r in rules})

    @cached_property
    def properness(self) -> "Properness":
        """Cached :func:`is_proper` verdict (the dictionary is immutable)."""
        return is_proper(self.rules)

    @cached_property
    def ranks(self) -> dict[tuple[str, str], int]:
        """Map from ``(left, right)`` to the position of its first occurrence."""
        ranks: dict[tuple[str, str], int] = {}
        for i, r in enumerate(self.rules):
            ranks.setdefault((r.left, r.right), i)
        return ranks

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]], extra_symbols: Iterable[str] = ()):
        return cls(
            tuple(MergeRule(u, v, i) for i, (u, v) in enumerate(pairs)),
            frozenset(extra_symbols),
        )

    def with_symbols(self, extra: Iterable[str]) -> "Dictionary":
        return Dictionary(self.rules, self.extra_symbols | frozenset(extra))

    def prefix(self, i: int) -> "Dictionary":
        """The dictionary made of the ``i`` highest-priority rules."""
        return Dictionary(self.rules[:i], self.sigma)

    @property
    def pairs(self) -> list[tuple[str, str]]:
        return [(r.left, r.right) for r in self.rules]

    @property
    def max_token_length(self) -> int:
        return max((len(r.merged) for r in self.rules), default=1)

    def __len__(self):
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)


_ESCAPES = {"\\": "\\\\", " ": "\\s", "\n": "\\n", "\t": "\\t"}
_UNESCAPES = {"\\": "\\", "s": " ", "n": "\n", "t": "\t"}


_ESCAPE_TABLE = str.maketrans(_ESCAPES)


def escape_token(token: Token) -> str:
    return token.translate(_ESCAPE_TABLE)


def unescape_token(text: str) -> Token:
    if "\\" not in text:
        return text
    out = []
    i = 0
    while i < len(text):
        c = text[i]
        if c == "\\":
            if i + 1 >= len(text) or text[i + 1] not in _UNESCAPES:
                raise ValueError(f"bad escape sequence in {text!r}")
            out.append(_UNESCAPES[text[i + 1]])
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def parse_dictionary(text: str, skip_header: bool = True, extra_symbols: Iterable[str] = ()) -> Dictionary:
    """Parse a merges file: one ``<left> <right>`` rule per line, in priority order.

    A first line starting with ``#`` is skipped when ``skip_header`` is set.
    Properness is not checked here.
    """
    rules: list[MergeRule] = []
    seen: dict[tuple[str, str], int] = {}
    lines = text.split("\n")
    for lineno, line in enumerate(lines, start=1):
        if line.endswith("\r"):
            line = line[:-1]
        if lineno == 1 and skip_header and line.startswith("#"):
            continue
        if not line:
            continue
        fields = line.split(" ")
        if len(fields) != 2:
            raise DictionaryFormatError(lineno, f"expected two space-separated tokens, got {len(fields)} fields")
        try:
            left, right = unescape_token(fields[0]), unescape_token(fields[1])
        except ValueError as exc:
            raise DictionaryFormatError(lineno, str(exc)) from None
        if not left or not right:
            raise DictionaryFormatError(lineno, "empty token")
        if (left, right) in seen:
            raise DictionaryFormatError(lineno, f"duplicate rule {left!r} {right!r} (first on line {seen[left, right]})")
        seen[left, right] = lineno
        rules.append(MergeRule(left, right, len(rules)))
    return Dictionary(tuple(rules), frozenset(extra_symbols))


def serialize_dictionary(d: Dictionary, header: str | None = None) -> str:
    lines = [header] if header is not None else []
    lines.extend(f"{escape_token(r.left)} {escape_token(r.right)}" for r in d.rules)
    return "".join(line + "\n" for line in lines)


def is_proper(d: Dictionary | Sequence[MergeRule]) -> Properness:
    """Check that every multi-symbol rule side is produced by a strictly earlier rule.

    Returns the first offending rule index and side on failure.
    """
    rules = d.rules if isinstance(d, Dictionary) else tuple(d)
    produced: set[str] = set()
    for j, r in enumerate(rules):
        left, right = r.left, r.right
        if len(left) > 1 and left not in produced:
            return Properness(False, j, "left", left)
        if len(right) > 1 and right not in produced:
            return Properness(False, j, "right", right)
        produced.add(left + right)
    return Properness(True)


def require_proper(d: Dictionary) -> None:
    verdict = d.properness
    if not verdict:
        raise NotProperError(verdict)


def project(t: Iterable[Token]) -> str:
    return "".join(t)


def base_tokenization(w: str, sigma: Iterable[str] | None = None) -> Tokenization:
    if sigma is not None:
        check_symbols(w, sigma)
    return tuple(w)


def check_symbols(w: str, sigma: Iterable[str], line: int | None = None) -> None:
    sigma = sigma if isinstance(sigma, (set, frozenset)) else frozenset(sigma)
    for i, c in enumerate(w):
        if c not in sigma:
            raise AlphabetError(c, i, line)

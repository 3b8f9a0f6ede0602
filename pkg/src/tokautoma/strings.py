from __future__ import annotations

from .automaton import TokenDFA

__all__ = ["StringDFA"]


class StringDFA(TokenDFA):
    """A DFA over the base alphabet: every label is a single symbol."""

    __slots__ = ()

    def _validate(self, labels):
        super()._validate(labels)
        for t in self.alphabet:
            if len(t) != 1:
                raise ValueError(f"string DFA label {t!r} is not a single symbol")

    def accepts_string(self, w: str) -> bool:
        return self.accepts(w)

"""String-to-tokenization transducers.

A token DFA is unfolded into a real-time transducer that reads one base
symbol per step and emits each token when its last symbol is read.  For a
context-invariant DFA that transducer is functional, and for BPE it can be
determinized into a subsequential machine that tokenizes in one pass.
"""
from __future__ import annotations

import json
from collections import deque
from typing import Iterable, Mapping, NamedTuple, Sequence

from . import kernels
from .automaton import TokenDFA, Verdict
from .core import AlphabetError, Dictionary, Token, Tokenization, require_proper

__all__ = [
    "DeterminizationAborted",
    "NotFunctionalError",
    "SubseqTransducer",
    "Transducer",
    "build_transducer",
    "check_functional",
    "compile_tokenizer",
    "determinize",
    "transduce",
    "transduce_reference",
    "transducer_outputs",
]


class NotFunctionalError(ValueError):
    def __init__(self, witness):
        super().__init__(f"transducer is not functional: {witness}")
        self.witness = witness


class DeterminizationAborted(RuntimeError):
    """Pending output grew past the cap; the function likely has unbounded variation."""

    def __init__(self, cap: int, subset):
        super().__init__(f"pending output exceeded {cap} tokens in subset {subset}")
        self.cap = cap
        self.subset = subset


class FunctionalWitness(NamedTuple):
    input: str
    output1: Tokenization
    output2: Tokenization


class Transducer:
    """Real-time transducer: each transition reads exactly one base symbol and
    emits one token or nothing (``None``).

    ``transitions[q]`` is a list of ``(symbol, output, target)``;
    ``final_output`` maps accepting states to their final output.
    """

    def __init__(self, n_states: int, initial: int,
                 transitions: Sequence[Sequence[tuple[str, Token | None, int]]],
                 final_output: Mapping[int, Tokenization],
                 input_alphabet: Iterable[str] | None = None):
        self.n_states = n_states
        self.initial = initial
        self.transitions = tuple(tuple(ts) for ts in transitions)
        self.final_output = {q: tuple(o) for q, o in final_output.items()}
        syms = {a for ts in self.transitions for a, _, _ in ts}
        self.input_alphabet = frozenset(syms if input_alphabet is None else input_alphabet)
        for ts in self.transitions:
            for a, _, _ in ts:
                if len(a) != 1:
                    raise ValueError(f"transition reads {a!r}, not a single symbol")
        self._by_symbol = None

    @property
    def output_alphabet(self) -> frozenset[Token]:
        out = {o for ts in self.transitions for _, o, _ in ts if o is not None}
        for o in self.final_output.values():
            out.update(o)
        return frozenset(out)

    def by_symbol(self) -> list[dict[str, list[tuple[Tokenization, int]]]]:
        if self._by_symbol is None:
            rows = []
            for ts in self.transitions:
                row: dict[str, list[tuple[Tokenization, int]]] = {}
                for a, o, r in ts:
                    row.setdefault(a, []).append(((o,) if o is not None else (), r))
                rows.append(row)
            self._by_symbol = rows
        return self._by_symbol

    def __repr__(self):
        n = sum(len(ts) for ts in self.transitions)
        return f"Transducer({self.n_states} states, {n} transitions)"


def build_transducer(a: TokenDFA) -> Transducer:
    """Unfold each token transition into a chain of single-symbol steps that
    output nothing until the last symbol, which outputs the whole token."""
    transitions: list[list[tuple[str, Token | None, int]]] = [[] for _ in a.states]
    for p in a.states:
        for tok in sorted(a.delta[p]):
            q = a.delta[p][tok]
            src = p
            for sym in tok[:-1]:
                mid = len(transitions)
                transitions.append([])
                transitions[src].append((sym, None, mid))
                src = mid
            transitions[src].append((tok[-1], tok, q))
    sigma = {c for t in a.alphabet for c in t}
    return Transducer(len(transitions), a.initial, transitions, {q: () for q in a.finals}, sigma)


def transducer_outputs(t: Transducer, w: str) -> set[Tokenization]:
    """All outputs of accepting runs reading ``w`` (brute force)."""
    rows = t.by_symbol()
    configs = {(t.initial, ())}
    for c in w:
        nxt = set()
        for q, out in configs:
            for o, r in rows[q].get(c, ()):
                nxt.add((r, out + o))
        configs = nxt
        if not configs:
            return set()
    return {out + t.final_output[q] for q, out in configs if q in t.final_output}


def _accessible_coaccessible(t: Transducer) -> set[int]:
    seen = {t.initial}
    stack = [t.initial]
    preds: list[list[int]] = [[] for _ in range(t.n_states)]
    for q, ts in enumerate(t.transitions):
        for _, _, r in ts:
            preds[r].append(q)
    while stack:
        q = stack.pop()
        for _, _, r in t.transitions[q]:
            if r not in seen:
                seen.add(r)
                stack.append(r)
    co = set(t.final_output)
    stack = list(co)
    while stack:
        r = stack.pop()
        for q in preds[r]:
            if q not in co:
                co.add(q)
                stack.append(q)
    return seen & co


def _lcp(seqs) -> Tokenization:
    it = iter(seqs)
    first = next(it)
    n = len(first)
    for s in it:
        n = min(n, len(s))
        for i in range(n):
            if s[i] != first[i]:
                n = i
                break
        if n == 0:
            break
    return first[:n]


def check_functional(t: Transducer) -> Verdict:
    """Decide whether the transducer defines a partial function.

    Pairs of runs on the same input are explored in the square machine,
    restricted to pairs from which both runs can still accept.  In a
    functional transducer every such pair is reached with a single output
    delay, which keeps the search finite; a second delay, an incomparable
    delay, or disagreeing final outputs each prove non-functionality.
    """
    rows = t.by_symbol()
    start = (t.initial, t.initial)
    # forward exploration of the square
    succ: dict[tuple[int, int], list[tuple[str, Tokenization, Tokenization, tuple[int, int]]]] = {}
    queue = deque([start])
    succ[start] = []
    while queue:
        p, q = pair = queue.popleft()
        out = succ[pair]
        rp, rq = rows[p], rows[q]
        for a in sorted(rp.keys() & rq.keys()):
            for op, p2 in rp[a]:
                for oq, q2 in rq[a]:
                    nxt = (p2, q2)
                    out.append((a, op, oq, nxt))
                    if nxt not in succ:
                        succ[nxt] = []
                        queue.append(nxt)
    preds: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for pair, edges in succ.items():
        for *_, nxt in edges:
            preds.setdefault(nxt, []).append(pair)
    co = {pair for pair in succ if pair[0] in t.final_output and pair[1] in t.final_output}
    stack = list(co)
    while stack:
        pair = stack.pop()
        for prev in preds.get(pair, ()):
            if prev not in co:
                co.add(prev)
                stack.append(prev)
    if start not in co:
        return Verdict(True)

    def completion(pair) -> str:
        parent = {pair: None}
        dq = deque([pair])
        while dq:
            cur = dq.popleft()
            if cur[0] in t.final_output and cur[1] in t.final_output:
                path = []
                while parent[cur] is not None:
                    cur, a = parent[cur]
                    path.append(a)
                return "".join(reversed(path))
            for a, _, _, nxt in succ[cur]:
                if nxt in co and nxt not in parent:
                    parent[nxt] = (cur, a)
                    dq.append(nxt)
        raise AssertionError("co-accessible pair without completion")

    def fail(*inputs):
        for w in inputs:
            outs = sorted(transducer_outputs(t, w))
            if len(outs) >= 2:
                return Verdict(False, FunctionalWitness(w, outs[0], outs[1]))
        raise AssertionError("non-functionality detected without a witness")

    # delay: (side, excess) with side 0 when the first run's output is ahead
    delays: dict[tuple[int, int], tuple[int, Tokenization]] = {start: (0, ())}
    path_of: dict[tuple[int, int], str] = {start: ""}
    queue = deque([start])
    while queue:
        pair = queue.popleft()
        side, excess = delays[pair]
        x = path_of[pair]
        p, q = pair
        if p in t.final_output and q in t.final_output:
            left = (excess if side == 0 else ()) + t.final_output[p]
            right = (excess if side == 1 else ()) + t.final_output[q]
            if left != right:
                return fail(x)
        for a, op, oq, nxt in succ[pair]:
            if nxt not in co:
                continue
            left = (excess if side == 0 else ()) + op
            right = (excess if side == 1 else ()) + oq
            common = _lcp((left, right))
            lrest, rrest = left[len(common):], right[len(common):]
            if lrest and rrest:
                return fail(x + a + completion(nxt))
            delay = (0, lrest) if lrest else (1, rrest) if rrest else (0, ())
            old = delays.get(nxt)
            if old is None:
                delays[nxt] = delay
                path_of[nxt] = x + a
                queue.append(nxt)
            elif old != delay:
                z = completion(nxt)
                return fail(path_of[nxt] + z, x + a + z)
    return Verdict(True)


class SubseqTransducer:
    """Input-deterministic transducer.

    ``delta[q]`` maps a base symbol to ``(target, output tokens)``;
    ``final_output`` maps accepting states to the tokens flushed at the end.
    """

    def __init__(self, delta: Sequence[Mapping[str, tuple[int, Tokenization]]], initial: int,
                 final_output: Mapping[int, Tokenization], input_alphabet: Iterable[str] | None = None):
        self.delta = tuple({a: (r, tuple(o)) for a, (r, o) in d.items()} for d in delta)
        self.initial = initial
        self.final_output = {q: tuple(o) for q, o in final_output.items()}
        syms = {a for d in self.delta for a in d}
        self.input_alphabet = frozenset(syms if input_alphabet is None else input_alphabet)
        n = len(self.delta)
        if not 0 <= initial < n:
            raise ValueError("initial state out of range")
        for d in self.delta:
            for a, (r, _) in d.items():
                if not 0 <= r < n or len(a) != 1:
                    raise ValueError(f"bad transition on {a!r} to {r}")
        self._table = None

    @property
    def n_states(self) -> int:
        return len(self.delta)

    @property
    def output_alphabet(self) -> frozenset[Token]:
        out = {t for d in self.delta for _, o in d.values() for t in o}
        for o in self.final_output.values():
            out.update(o)
        return frozenset(out)

    def is_input_deterministic(self) -> bool:
        # dict rows make this structural; kept for callers that load foreign files
        return all(len(set(d)) == len(d) for d in self.delta)

    def __repr__(self):
        return f"SubseqTransducer({self.n_states} states)"

    def table(self) -> "kernels.TransducerTable":
        if self._table is None:
            self._table = kernels.TransducerTable.from_machine(self)
        return self._table

    def to_json(self) -> str:
        inputs = sorted(self.input_alphabet)
        outputs = sorted(self.output_alphabet)
        idx = {t: i for i, t in enumerate(outputs)}
        transitions = sorted(
            [q, a, [idx[t] for t in o], r] for q, d in enumerate(self.delta) for a, (r, o) in d.items()
        )
        doc = {
            "input_alphabet": inputs,
            "output_alphabet": outputs,
            "states": self.n_states,
            "initial": self.initial,
            "transitions": transitions,
            "final_outputs": {str(q): [idx[t] for t in o] for q, o in sorted(self.final_output.items())},
        }
        return json.dumps(doc, ensure_ascii=False, sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "SubseqTransducer":
        doc = json.loads(text)
        try:
            outputs = doc["output_alphabet"]
            delta: list[dict[str, tuple[int, Tokenization]]] = [{} for _ in range(int(doc["states"]))]
            for q, a, o, r in doc["transitions"]:
                if a in delta[q]:
                    raise ValueError(f"state {q} has two transitions on {a!r}")
                delta[q][a] = (r, tuple(outputs[i] for i in o))
            finals = {int(q): tuple(outputs[i] for i in o) for q, o in doc["final_outputs"].items()}
            return cls(delta, doc["initial"], finals, doc["input_alphabet"])
        except (KeyError, TypeError, IndexError) as exc:
            raise ValueError(f"malformed transducer document: {exc}") from None


def _trim_transducer(t: Transducer) -> Transducer:
    keep = _accessible_coaccessible(t)
    if t.initial not in keep:
        return Transducer(1, 0, [[]], {}, t.input_alphabet)
    order = sorted(keep)
    new = {q: i for i, q in enumerate(order)}
    transitions = [[(a, o, new[r]) for a, o, r in t.transitions[q] if r in new] for q in order]
    finals = {new[q]: o for q, o in t.final_output.items() if q in new}
    return Transducer(len(order), new[t.initial], transitions, finals, t.input_alphabet)


def determinize(t: Transducer, max_pending: int | None = None, check: bool = True) -> SubseqTransducer:
    """Subsequential determinization of a functional real-time transducer.

    Subset states are sorted tuples of ``(state, pending tokens)``.  On each
    symbol the longest common token prefix of all candidate outputs is
    emitted and the remainders stay pending.  ``max_pending`` caps the
    pending length (in tokens); it defaults to ``n_states**2 + 8``.
    Subsets that cannot reach acceptance are pruned.
    """
    t = _trim_transducer(t)
    if check:
        verdict = check_functional(t)
        if not verdict:
            raise NotFunctionalError(verdict.witness)
    cap = t.n_states ** 2 + 8 if max_pending is None else max_pending
    rows = t.by_symbol()
    symbols = sorted(t.input_alphabet)
    init: tuple[tuple[int, Tokenization], ...] = ((t.initial, ()),)
    index = {init: 0}
    order = [init]
    delta: list[dict[str, tuple[int, Tokenization]]] = []
    final_output: dict[int, Tokenization] = {}
    i = 0
    while i < len(order):
        subset = order[i]
        row: dict[str, tuple[int, Tokenization]] = {}
        for a in symbols:
            cands: dict[int, Tokenization] = {}
            for q, pend in subset:
                for o, r in rows[q].get(a, ()):
                    s = pend + o
                    prev = cands.get(r)
                    if prev is None:
                        cands[r] = s
                    elif prev != s:
                        raise NotFunctionalError(f"state {r} reached with pending {prev} and {s}")
            if not cands:
                continue
            emit = _lcp(cands.values())
            k = len(emit)
            nxt = tuple(sorted((r, s[k:]) for r, s in cands.items()))
            if max(len(s) for _, s in nxt) > cap:
                raise DeterminizationAborted(cap, nxt)
            j = index.get(nxt)
            if j is None:
                j = index[nxt] = len(order)
                order.append(nxt)
            row[a] = (j, emit)
        delta.append(row)
        outs = {pend + t.final_output[q] for q, pend in subset if q in t.final_output}
        if len(outs) > 1:
            raise NotFunctionalError(f"subset {subset} has final outputs {sorted(outs)}")
        if outs:
            final_output[i] = outs.pop()
        i += 1
    return _prune(delta, final_output, t.input_alphabet)


def _prune(delta, final_output, sigma) -> SubseqTransducer:
    preds: list[list[int]] = [[] for _ in delta]
    for q, row in enumerate(delta):
        for r, _ in row.values():
            preds[r].append(q)
    live = set(final_output)
    stack = list(live)
    while stack:
        r = stack.pop()
        for q in preds[r]:
            if q not in live:
                live.add(q)
                stack.append(q)
    live.add(0)
    order = sorted(live)
    new = {q: i for i, q in enumerate(order)}
    rows = [{a: (new[r], o) for a, (r, o) in delta[q].items() if r in new} for q in order]
    finals = {new[q]: o for q, o in final_output.items() if q in new}
    return SubseqTransducer(rows, 0, finals, sigma)


_TABLE_MIN_LENGTH = 64


def transduce(t: SubseqTransducer, w: str) -> Tokenization | None:
    """Run the machine over ``w`` in one left-to-right pass.

    Returns ``None`` when the run dies or ends outside an accepting state;
    raises :class:`AlphabetError` on a symbol outside the input alphabet.
    Short inputs take a plain dictionary walk; the array kernel only pays off
    once its setup cost is amortised.
    """
    if len(w) < _TABLE_MIN_LENGTH:
        return transduce_reference(t, w)
    result = t.table().run(w)
    if isinstance(result, AlphabetError):
        raise result
    return result


def transduce_reference(t: SubseqTransducer, w: str) -> Tokenization | None:
    q = t.initial
    out: list[Token] = []
    for i, c in enumerate(w):
        if c not in t.input_alphabet:
            raise AlphabetError(c, i)
        step = t.delta[q].get(c)
        if step is None:
            return None
        q, o = step
        out.extend(o)
    final = t.final_output.get(q)
    if final is None:
        return None
    out.extend(final)
    return tuple(out)


def compile_tokenizer(d: Dictionary, sigma: Iterable[str] = ()) -> SubseqTransducer:
    """The subsequential tokenizer for a proper dictionary."""
    from .construction import build_token_dfa

    require_proper(d)
    a = build_token_dfa(None, d, trim_at_end=True, sigma=sigma)
    t = build_transducer(a)
    guard = t.n_states + 8
    return determinize(t, max_pending=2 * len(d) * d.max_token_length + guard, check=False)

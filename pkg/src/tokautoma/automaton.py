"""Token DFAs: deterministic automata whose transition labels are tokens."""
from __future__ import annotations

import enum
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Mapping, NamedTuple, Sequence

from .core import Token, Tokenization, project

__all__ = [
    "ContextWitness",
    "LocalityCapExceeded",
    "LocalityError",
    "LocalityProfile",
    "Status",
    "StreamMatcher",
    "TokenDFA",
    "Verdict",
    "WindowValidator",
    "accepts",
    "canonical_form",
    "dloc",
    "e_set",
    "e_u_not_v",
    "e_uv",
    "equivalent",
    "image",
    "is_context_invariant",
    "isomorphic",
    "locality_profile",
    "match_stream",
    "run",
    "trim",
    "window_validate",
]


class Verdict(NamedTuple):
    """A yes/no answer that carries a witness when the answer is no."""

    holds: bool
    witness: Any = None

    def __bool__(self):
        return self.holds


class LocalityError(ValueError):
    def __init__(self, k: int, value: int):
        super().__init__(f"automaton is not {k}-local: dloc(A,{k}) = {value}")
        self.k = k
        self.value = value


class LocalityCapExceeded(RuntimeError):
    """Too many distinct image sets; dloc was not computed."""


class TokenDFA:
    """A token DFA over states ``0 .. n-1``.

    ``delta[q]`` maps a token to the target of the transition from ``q``.
    Instances are treated as immutable; the per-state dicts must not be
    modified after construction.  ``provenance[q]`` is ``None`` for original
    states and ``(source_state, rule_index)`` for states created by a merge.
    """

    __slots__ = ("delta", "initial", "finals", "alphabet", "provenance")

    def __init__(
        self,
        delta: Sequence[Mapping[Token, int]],
        initial: int = 0,
        finals: Iterable[int] = (),
        alphabet: Iterable[Token] | None = None,
        provenance: Sequence[Any] | None = None,
        validate: bool = True,
    ):
        self.delta: tuple[dict[Token, int], ...] = tuple(
            d if isinstance(d, dict) else dict(d) for d in delta
        )
        self.initial = initial
        self.finals = frozenset(finals)
        labels = {t for d in self.delta for t in d}
        self.alphabet = frozenset(labels if alphabet is None else alphabet)
        self.provenance = tuple(provenance) if provenance is not None else (None,) * len(self.delta)
        if validate:
            self._validate(labels)

    def _validate(self, labels):
        n = len(self.delta)
        if not 0 <= self.initial < n:
            raise ValueError(f"initial state {self.initial} out of range")
        for q in self.finals:
            if not 0 <= q < n:
                raise ValueError(f"final state {q} out of range")
        if not labels <= self.alphabet:
            raise ValueError(f"labels {sorted(labels - self.alphabet)} missing from alphabet")
        for q, d in enumerate(self.delta):
            for t, r in d.items():
                if not t:
                    raise ValueError("empty token label")
                if not 0 <= r < n:
                    raise ValueError(f"transition {q} -{t}-> {r} leaves the state set")
        if len(self.provenance) != n:
            raise ValueError("provenance length does not match state count")

    @property
    def n_states(self) -> int:
        return len(self.delta)

    @property
    def states(self) -> range:
        return range(len(self.delta))

    @property
    def n_transitions(self) -> int:
        return sum(len(d) for d in self.delta)

    def transitions(self) -> Iterator[tuple[int, Token, int]]:
        for q, d in enumerate(self.delta):
            for t in sorted(d):
                yield q, t, d[t]

    def step(self, q: int, token: Token) -> int | None:
        return self.delta[q].get(token)

    def accepts(self, t: Iterable[Token]) -> bool:
        return accepts(self, t)

    def __eq__(self, other):
        if not isinstance(other, TokenDFA):
            return NotImplemented
        return (
            self.delta == other.delta
            and self.initial == other.initial
            and self.finals == other.finals
            and self.alphabet == other.alphabet
        )

    __hash__ = None

    def __repr__(self):
        return f"TokenDFA({self.n_states} states, {self.n_transitions} transitions, |Γ|={len(self.alphabet)})"

    # serialization

    def to_json(self, metadata: Mapping[str, Any] | None = None) -> str:
        alphabet = sorted(self.alphabet)
        index = {t: i for i, t in enumerate(alphabet)}
        transitions = sorted((q, index[t], r) for q, d in enumerate(self.delta) for t, r in d.items())
        meta = dict(metadata or {})
        if any(p is not None for p in self.provenance):
            meta["provenance"] = [list(p) if p is not None else None for p in self.provenance]
        doc = {
            "alphabet": alphabet,
            "states": self.n_states,
            "initial": self.initial,
            "finals": sorted(self.finals),
            "transitions": [list(x) for x in transitions],
            "metadata": meta,
        }
        return json.dumps(doc, ensure_ascii=False, sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "TokenDFA":
        doc = json.loads(text)
        try:
            alphabet = list(doc["alphabet"])
            n = int(doc["states"])
            delta: list[dict[str, int]] = [{} for _ in range(n)]
            for q, ti, r in doc["transitions"]:
                t = alphabet[ti]
                if t in delta[q]:
                    raise ValueError(f"state {q} has two transitions on {t!r}")
                delta[q][t] = r
            prov = doc.get("metadata", {}).get("provenance")
            if prov is not None:
                prov = [tuple(p) if p is not None else None for p in prov]
            return cls(delta, doc["initial"], doc["finals"], alphabet, prov)
        except (KeyError, TypeError, IndexError) as exc:
            raise ValueError(f"malformed automaton document: {exc}") from None


def run(a: TokenDFA, start: int, t: Iterable[Token]) -> int | None:
    if not 0 <= start < a.n_states:
        raise ValueError(f"unknown state {start}")
    q = start
    delta = a.delta
    for tok in t:
        q = delta[q].get(tok)
        if q is None:
            return None
    return q


def accepts(a: TokenDFA, t: Iterable[Token]) -> bool:
    q = run(a, a.initial, t)
    return q is not None and q in a.finals


def _reachable(a: TokenDFA) -> set[int]:
    seen = {a.initial}
    stack = [a.initial]
    while stack:
        q = stack.pop()
        for r in a.delta[q].values():
            if r not in seen:
                seen.add(r)
                stack.append(r)
    return seen


def _coreachable(a: TokenDFA) -> set[int]:
    preds: list[list[int]] = [[] for _ in a.states]
    for q, d in enumerate(a.delta):
        for r in d.values():
            preds[r].append(q)
    seen = set(a.finals)
    stack = list(a.finals)
    while stack:
        r = stack.pop()
        for q in preds[r]:
            if q not in seen:
                seen.add(q)
                stack.append(q)
    return seen


def _restrict(a: TokenDFA, keep: Iterable[int]) -> TokenDFA:
    order = sorted(keep)
    new = {q: i for i, q in enumerate(order)}
    delta = [{t: new[r] for t, r in a.delta[q].items() if r in new} for q in order]
    return type(a)(
        delta,
        new[a.initial],
        (new[q] for q in a.finals if q in new),
        a.alphabet,
        [a.provenance[q] for q in order],
        validate=False,
    )


def trim(a: TokenDFA) -> TokenDFA:
    """Remove states that are unreachable or cannot reach a final state.

    The initial state is always kept, so an automaton with an empty language
    trims to a single non-final state.
    """
    keep = _reachable(a) & _coreachable(a)
    keep.add(a.initial)
    if len(keep) == a.n_states:
        return a
    return _restrict(a, keep)


# context-invariance


class ContextWitness(NamedTuple):
    """Two runs reading the same string with different tokenizations."""

    start1: int
    tokens1: Tokenization
    start2: int
    tokens2: Tokenization

    def is_valid_for(self, a: TokenDFA) -> bool:
        return (
            self.tokens1 != self.tokens2
            and project(self.tokens1) == project(self.tokens2)
            and run(a, self.start1, self.tokens1) is not None
            and run(a, self.start2, self.tokens2) is not None
        )


def _shortest_path(a: TokenDFA, src: int, dst: int) -> Tokenization | None:
    parent: dict[int, tuple[int, Token] | None] = {src: None}
    queue = deque([src])
    while queue:
        q = queue.popleft()
        if q == dst:
            path = []
            while parent[q] is not None:
                q, t = parent[q]
                path.append(t)
            return tuple(reversed(path))
        for t in sorted(a.delta[q]):
            r = a.delta[q][t]
            if r not in parent:
                parent[r] = (q, t)
                queue.append(r)
    return None


def is_context_invariant(a: TokenDFA) -> Verdict:
    """Decide whether no two runs, from any start states, read the same string
    with different tokenizations.

    Runs are explored in pairs after their first differing token.  A
    configuration is (state of the run that is behind, state of the run that
    is ahead, the part of the ahead run's last token not yet matched); the
    pending part is always a proper suffix of a token, so the search is finite.
    The property fails exactly when a configuration with nothing pending is
    reachable.
    """
    delta = a.delta
    labels = sorted({t for d in delta for t in d})
    label_set = set(labels)
    sources: dict[Token, list[int]] = {t: [] for t in labels}
    for q, d in enumerate(delta):
        for t in d:
            sources[t].append(q)
    for t in labels:
        sources[t].sort()

    # key -> (flip, parent key or start record, token read)
    # flip False: run 1 is behind.
    info: dict[tuple[int, int, str], tuple[bool, Any, Token | None]] = {}
    queue: deque[tuple[int, int, str]] = deque()
    for q in a.states:
        for t2 in sorted(delta[q]):
            for i in range(1, len(t2)):
                t1 = t2[:i]
                if t1 not in label_set:
                    continue
                for p in sources[t1]:
                    key = (delta[p][t1], delta[q][t2], t2[i:])
                    if key not in info:
                        info[key] = (False, ("start", p, t1, q, t2), None)
                        queue.append(key)

    def witness(key, last_token, last_flip):
        runs = ([], [])
        if last_token is not None:
            runs[1 if last_flip else 0].append(last_token)
        while True:
            flip, parent, tok = info[key]
            if parent[0] == "start":
                _, p, t1, q, t2 = parent
                runs[0].append(t1)
                runs[1].append(t2)
                break
            pflip = info[parent][0]
            runs[1 if pflip else 0].append(tok)
            key = parent
        tok1 = tuple(reversed(runs[0]))
        tok2 = tuple(reversed(runs[1]))
        if p == q:
            prefix = _shortest_path(a, a.initial, p)
            if prefix is not None:
                return ContextWitness(a.initial, prefix + tok1, a.initial, prefix + tok2)
        return ContextWitness(p, tok1, q, tok2)

    while queue:
        key = queue.popleft()
        behind, ahead, pending = key
        flip = info[key][0]
        for x, r in sorted(delta[behind].items()):
            if x == pending:
                return Verdict(False, witness(key, x, flip))
            if len(x) < len(pending):
                if pending.startswith(x):
                    nkey = (r, ahead, pending[len(x):])
                    nflip = flip
                else:
                    continue
            elif x.startswith(pending):
                nkey = (ahead, r, x[len(pending):])
                nflip = not flip
            else:
                continue
            if nkey not in info:
                info[nkey] = (nflip, key, x)
                queue.append(nkey)
    return Verdict(True)


# equivalence


def equivalent(a1: TokenDFA, a2: TokenDFA) -> Verdict:
    """Language equality by union-find over the synchronized product.

    Both automata are implicitly completed with a rejecting sink over the
    union of their alphabets.  The breadth-first order makes the returned
    counterexample a shortest tokenization accepted by exactly one automaton.
    """
    alphabet = sorted(a1.alphabet | a2.alphabet)
    sink = -1
    uf: dict[tuple[int, int], tuple[int, int]] = {}

    def find(x):
        root = x
        while uf.get(root, root) != root:
            root = uf[root]
        while x != root:
            nxt = uf.get(x, x)
            uf[x] = root
            x = nxt
        return root

    def final(side, q):
        if q == sink:
            return False
        return q in (a1 if side == 0 else a2).finals

    def step(side, q, t):
        if q == sink:
            return sink
        r = (a1 if side == 0 else a2).delta[q].get(t)
        return sink if r is None else r

    start = ((0, a1.initial), (1, a2.initial))
    parent: dict[tuple, tuple | None] = {start: None}
    uf[start[1]] = start[0]
    queue = deque([start])
    while queue:
        pair = queue.popleft()
        (_, p), (_, q) = pair
        if final(0, p) != final(1, q):
            path = []
            while parent[pair] is not None:
                pair, t = parent[pair]
                path.append(t)
            return Verdict(False, tuple(reversed(path)))
        if p == sink and q == sink:
            continue
        for t in alphabet:
            x = (0, step(0, p, t))
            y = (1, step(1, q, t))
            rx, ry = find(x), find(y)
            if rx != ry:
                uf[ry] = rx
                nxt = (x, y)
                parent[nxt] = (pair, t)
                queue.append(nxt)
    return Verdict(True)


def canonical_form(a: TokenDFA) -> TokenDFA:
    """Renumber states in breadth-first order from the initial state, reading
    outgoing tokens in sorted order; unreachable states follow in id order."""
    order = [a.initial]
    seen = {a.initial}
    i = 0
    while i < len(order):
        q = order[i]
        i += 1
        for t in sorted(a.delta[q]):
            r = a.delta[q][t]
            if r not in seen:
                seen.add(r)
                order.append(r)
    order.extend(q for q in a.states if q not in seen)
    new = {q: i for i, q in enumerate(order)}
    delta = [{t: new[r] for t, r in a.delta[q].items()} for q in order]
    return type(a)(delta, 0, (new[q] for q in a.finals), a.alphabet, [a.provenance[q] for q in order], validate=False)


def isomorphic(a1: TokenDFA, a2: TokenDFA) -> bool:
    c1, c2 = canonical_form(a1), canonical_form(a2)
    return c1.delta == c2.delta and c1.finals == c2.finals


# locality


def image(a: TokenDFA, states: Iterable[int], u: Token) -> frozenset[int]:
    delta = a.delta
    return frozenset(r for r in (delta[q].get(u) for q in states) if r is not None)


def e_set(a: TokenDFA, tau: Token | Sequence[Token]) -> frozenset[int]:
    """States reached last by runs reading ``tau`` from any state."""
    if isinstance(tau, str):
        tau = (tau,)
    s = frozenset(a.states)
    for t in tau:
        s = image(a, s, t)
    return s


def e_uv(a: TokenDFA, u: Token, v: Token) -> frozenset[int]:
    """States with an incoming ``u`` transition and an outgoing ``v`` transition."""
    return frozenset(q for q in e_set(a, u) if v in a.delta[q])


def e_u_not_v(a: TokenDFA, u: Token, v: Token) -> frozenset[int]:
    return e_set(a, u) - e_uv(a, u, v)


@dataclass
class LocalityProfile:
    values: dict[int, int] = field(default_factory=dict)
    witnesses: dict[int, Tokenization | None] = field(default_factory=dict)

    def __getitem__(self, k: int) -> int:
        return self.values[k]


def _token_maps(a: TokenDFA) -> dict[Token, dict[int, int]]:
    maps: dict[Token, dict[int, int]] = {}
    for q, d in enumerate(a.delta):
        for t, r in d.items():
            maps.setdefault(t, {})[q] = r
    return maps


def locality_profile(a: TokenDFA, k_max: int, max_sets: int = 200_000) -> LocalityProfile:
    """dloc(A,k) for k = 0..k_max by iterating images of the full state set.

    dloc(A,0) is |Q| (the image under the empty tokenization).
    """
    maps = _token_maps(a)
    tokens = sorted(maps)
    prof = LocalityProfile({0: a.n_states}, {0: ()})
    level: dict[frozenset[int], Tokenization] = {frozenset(a.states): ()}
    for k in range(1, k_max + 1):
        nxt: dict[frozenset[int], Tokenization] = {}
        for s, tau in level.items():
            for t in tokens:
                m = maps[t]
                img = frozenset(m[q] for q in s if q in m)
                if img and img not in nxt:
                    nxt[img] = tau + (t,)
                    if len(nxt) > max_sets:
                        raise LocalityCapExceeded(f"more than {max_sets} distinct image sets at k={k}")
        level = nxt
        if level:
            best = max(level, key=len)
            prof.values[k] = len(best)
            prof.witnesses[k] = level[best]
        else:
            prof.values[k] = 0
            prof.witnesses[k] = None
    return prof


def dloc(a: TokenDFA, k: int, max_sets: int = 200_000) -> tuple[int, Tokenization | None]:
    if k < 0:
        raise ValueError("k must be nonnegative")
    prof = locality_profile(a, k, max_sets)
    return prof.values[k], prof.witnesses[k]


# streaming


class Status(enum.Enum):
    DEAD = "dead"
    ALIVE = "alive"
    ACCEPTING = "accepting"


class StreamMatcher:
    """Single-cursor matcher: feed tokens one at a time."""

    __slots__ = ("dfa", "state", "consumed")

    def __init__(self, a: TokenDFA):
        self.dfa = a
        self.state: int | None = a.initial
        self.consumed = 0

    @property
    def status(self) -> Status:
        if self.state is None:
            return Status.DEAD
        return Status.ACCEPTING if self.state in self.dfa.finals else Status.ALIVE

    def feed(self, token: Token) -> Status:
        self.consumed += 1
        if self.state is not None:
            self.state = self.dfa.delta[self.state].get(token)
        return self.status


def match_stream(a: TokenDFA, tokens: Iterable[Token]) -> Iterator[Status]:
    m = StreamMatcher(a)
    for t in tokens:
        yield m.feed(t)


class WindowValidator:
    """Validate token streams of a k-local automaton by inspecting windows of
    k+1 consecutive tokens only.

    A window is valid when it labels some run anywhere in the automaton.  The
    first k tokens are additionally run from the initial state, and the end
    of the stream is checked for finality through the (unique) state reached
    by the last k tokens.
    """

    def __init__(self, a: TokenDFA, k: int = 1):
        if k < 1:
            raise ValueError("window validation needs k >= 1")
        value, _ = dloc(a, k)
        if value > 1:
            raise LocalityError(k, value)
        self.dfa = a
        self.k = k
        self._maps = _token_maps(a)
        self._windows: dict[tuple[Token, ...], bool] = {}
        if k == 1:
            ends = {t: next(iter(m.values())) for t, m in self._maps.items()}
            self._end = ends
            self._pairs = {
                (t1, t2) for t1, r in ends.items() for t2 in a.delta[r]
            }

    def _window_ok(self, window: tuple[Token, ...]) -> bool:
        if self.k == 1:
            return window in self._pairs
        ok = self._windows.get(window)
        if ok is None:
            ok = bool(e_set(self.dfa, window))
            self._windows[window] = ok
        return ok

    def scan(self, tokens: Iterable[Token]) -> int | None:
        """Return ``None`` if the stream is accepted, else the 1-based index of
        the first token that completes an invalid window (or ``n + 1`` when the
        stream ends outside a final state)."""
        a = self.dfa
        k = self.k
        window: deque[Token] = deque(maxlen=k + 1)
        q: int | None = a.initial
        n = 0
        for tok in tokens:
            n += 1
            window.append(tok)
            if n <= k:
                q = a.delta[q].get(tok)
                if q is None:
                    return n
            elif not self._window_ok(tuple(window)):
                return n
        if n == 0:
            end = a.initial
        elif n <= k:
            end = q
        elif k == 1:
            end = self._end[window[-1]]
        else:
            (end,) = e_set(a, tuple(window)[1:])
        return None if end in a.finals else n + 1

    def validate(self, tokens: Iterable[Token]) -> bool:
        return self.scan(tokens) is None


def window_validate(a: TokenDFA, k: int, tokens: Iterable[Token]) -> bool:
    return WindowValidator(a, k).validate(tokens)

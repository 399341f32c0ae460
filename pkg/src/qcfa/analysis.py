"""DFA analysis: minimization, distinguishing words and forbidden-construction search."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .models import Dfa


@dataclass(frozen=True)
class DistinguishabilityCertificate:
    s: str
    t: str
    word: tuple[str, ...]

    def replay(self, d: Dfa) -> bool:
        return (d.run(self.word, self.s) in d.accepting) != (d.run(self.word, self.t) in d.accepting)


@dataclass(frozen=True)
class ForbiddenConstructionWitness:
    s: str
    t: str
    word: tuple[str, ...]

    def conditions(self, d: Dfa) -> dict[str, bool]:
        """The four pattern conditions, each checked by direct simulation."""
        reach = reachable(d, self.t)
        return {
            "distinct": self.s != self.t,
            "s_to_t": d.run(self.word, self.s) == self.t,
            "t_loops": d.run(self.word, self.t) == self.t,
            "t_mixed": bool(reach & d.accepting) and bool(reach - d.accepting),
        }

    def replay(self, d: Dfa) -> bool:
        return all(self.conditions(d).values())


def reachable(d: Dfa, start: str) -> set[str]:
    seen = {start}
    todo = [start]
    while todo:
        s = todo.pop()
        for a in d.alphabet:
            t = d.transitions[(s, a)]
            if t not in seen:
                seen.add(t)
                todo.append(t)
    return seen


def minimize_dfa(d: Dfa) -> tuple[Dfa, dict[str, str]]:
    """Moore partition refinement after pruning unreachable states.

    Returns the minimal DFA and a map from every reachable original state
    to its representative, the first state of its block in declaration order.
    """
    live = reachable(d, d.initial)
    states = [s for s in d.states if s in live]
    order = {s: i for i, s in enumerate(states)}
    block = {s: int(s in d.accepting) for s in states}
    n_blocks = len(set(block.values()))
    while True:
        signature = {s: (block[s],) + tuple(block[d.transitions[(s, a)]] for a in d.alphabet) for s in states}
        ids: dict[tuple, int] = {}
        for s in states:
            ids.setdefault(signature[s], len(ids))
        new_block = {s: ids[signature[s]] for s in states}
        if len(ids) == n_blocks:
            block = new_block
            break
        block, n_blocks = new_block, len(ids)
    rep: dict[int, str] = {}
    for s in states:
        rep.setdefault(block[s], s)
    mapping = {s: rep[block[s]] for s in states}
    reps = sorted(set(mapping.values()), key=order.get)
    delta = {(r, a): mapping[d.transitions[(r, a)]] for r in reps for a in d.alphabet}
    minimal = Dfa(reps, d.alphabet, delta, mapping[d.initial], {r for r in reps if r in d.accepting})
    return minimal, mapping


def is_minimal(d: Dfa) -> bool:
    return len(minimize_dfa(d)[0].states) == len(d.states)


def _shortest_word(d: Dfa, start: tuple[str, str], goal) -> tuple[str, ...] | None:
    """BFS on state pairs driven by a common word; symbols expanded in alphabet order."""
    parent = {start: None}
    queue = deque([start])
    while queue:
        pair = queue.popleft()
        if goal(pair):
            word = []
            while parent[pair] is not None:
                pair, sym = parent[pair]
                word.append(sym)
            return tuple(reversed(word))
        s, t = pair
        for a in d.alphabet:
            nxt = (d.transitions[(s, a)], d.transitions[(t, a)])
            if nxt not in parent:
                parent[nxt] = (pair, a)
                queue.append(nxt)
    return None


def distinguish(d: Dfa, s: str, t: str) -> DistinguishabilityCertificate | None:
    """Shortest word separating ``s`` from ``t``, or ``None`` if they are equivalent."""
    for x in (s, t):
        if x not in d.states:
            raise KeyError(f"unknown state {x!r}")
    word = _shortest_word(d, (s, t), lambda p: (p[0] in d.accepting) != (p[1] in d.accepting))
    return None if word is None else DistinguishabilityCertificate(s, t, word)


def dfa_equivalent(d1: Dfa, d2: Dfa) -> bool:
    """Language equivalence by searching the product for a disagreeing pair."""
    if set(d1.alphabet) != set(d2.alphabet):
        return False
    seen = {(d1.initial, d2.initial)}
    todo = [(d1.initial, d2.initial)]
    while todo:
        x, y = todo.pop()
        if (x in d1.accepting) != (y in d2.accepting):
            return False
        for a in d1.alphabet:
            nxt = (d1.transitions[(x, a)], d2.transitions[(y, a)])
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return True


def find_forbidden_construction(d: Dfa) -> ForbiddenConstructionWitness | None:
    """Search the minimal DFA for ``s ≠ t`` and a word ``x`` with ``s·x = t = t·x``.

    ``t`` must reach both an accepting and a non-accepting state.  Among all
    witnesses the one with the shortest word is returned; ties go to the
    alphabet-order-smallest word, then to the earliest ``(s, t)`` pair.
    States refer to the minimized DFA (which keeps original names).
    """
    m, _ = minimize_dfa(d)
    alpha_rank = {a: i for i, a in enumerate(m.alphabet)}
    best = None
    for t in m.states:
        reach = reachable(m, t)
        if not (reach & m.accepting) or not (reach - m.accepting):
            continue
        for s in m.states:
            if s == t:
                continue
            word = _shortest_word(m, (s, t), lambda p, t=t: p == (t, t))
            if word is None:
                continue
            key = (len(word), [alpha_rank[a] for a in word], m.states.index(s), m.states.index(t))
            if best is None or key < best[0]:
                best = (key, ForbiddenConstructionWitness(s, t, word))
    return None if best is None else best[1]

"""Histories: the causally consistent plays of a scenario."""

from __future__ import annotations

from functools import lru_cache
from typing import Iterator

from .core import CausalScenario, accessible, accessible_measurements, dom


class HistorySet:
    """A finite set of histories in canonical (size, lexicographic) order."""

    def __init__(self, scenario: CausalScenario, histories):
        self.scenario = scenario
        self.histories = tuple(sorted(set(histories), key=scenario.section_key))
        self._members = frozenset(self.histories)

    def __iter__(self) -> Iterator[frozenset]:
        return iter(self.histories)

    def __len__(self) -> int:
        return len(self.histories)

    def __contains__(self, s) -> bool:
        return s in self._members

    def __eq__(self, other) -> bool:
        if isinstance(other, HistorySet):
            return self._members == other._members
        return NotImplemented

    def __repr__(self) -> str:
        return f"HistorySet({len(self)} histories)"

    @property
    def members(self) -> frozenset:
        return self._members

    def to_json(self) -> list:
        return [[list(e) for e in self.scenario.sorted_section(s)] for s in self.histories]


def extensions(M: CausalScenario, s: frozenset) -> Iterator[frozenset]:
    """All one-step extensions ``s + (x, o)`` with ``x`` accessible from ``s``."""
    for x in accessible_measurements(M, s):
        for o in M.outcomes_of(x):
            yield s | {(x, o)}


def history_layers(M: CausalScenario) -> list[frozenset]:
    """The increasing layers H_0, H_1, ... up to and including the fixed point."""
    layers = [frozenset([frozenset()])]
    while True:
        current = layers[-1]
        nxt = current | {t for s in current for t in extensions(M, s)}
        if nxt == current:
            return layers
        layers.append(nxt)


@lru_cache(maxsize=256)
def enumerate_histories(M: CausalScenario) -> HistorySet:
    # frontier expansion; equal to the last of history_layers(M)
    seen = {frozenset()}
    frontier = [frozenset()]
    while frontier:
        new = []
        for s in frontier:
            for t in extensions(M, s):
                if t not in seen:
                    seen.add(t)
                    new.append(t)
        frontier = new
    return HistorySet(M, seen)


def is_history(M: CausalScenario, s) -> bool:
    """Decide membership in Hist(M) by greedily replaying the events of ``s``.

    Accessibility only grows as events are added (no rival of a pending
    measurement can appear, since ``s`` is consistent and rival-free), so any
    admissible event can be taken first.
    """
    s = frozenset(s)
    performed = dom(s)
    if len(performed) != len(s):
        return False
    for x in performed:
        if x not in M.index or performed & M.rivals(x):
            return False
    built: frozenset = frozenset()
    pending = set(s)
    while pending:
        step = [e for e in pending if accessible(M, built, e[0])]
        if not step:
            return False
        built = built.union(step)
        pending.difference_update(step)
    return True


def is_maximal(M: CausalScenario, s: frozenset) -> bool:
    return not any(accessible(M, s, x) for x in M.measurements)


def maximal_histories(M: CausalScenario) -> HistorySet:
    return HistorySet(M, (s for s in enumerate_histories(M) if is_maximal(M, s)))


def maximal_elements(M: CausalScenario, S) -> frozenset:
    """Maximal members of a down-closed set ``S`` of histories of ``M``."""
    S = S if isinstance(S, (set, frozenset)) else frozenset(S)
    return frozenset(s for s in S if not any(t in S for t in extensions(M, s)))


def down_closure(M: CausalScenario, tops) -> frozenset:
    """All histories of ``M`` contained in some member of ``tops``.

    Every history below ``t`` is reachable from ``t`` by deleting one event at a
    time while staying inside Hist(M).
    """
    seen = set()
    stack = [frozenset(t) for t in tops]
    while stack:
        t = stack.pop()
        if t in seen:
            continue
        seen.add(t)
        for e in t:
            u = t - {e}
            if u not in seen and accessible(M, u, e[0]) and is_history(M, u):
                stack.append(u)
    return frozenset(seen)

"""Nature and Experimenter strategies: validation, enumeration, restriction,
gluing and play-off."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .core import CausalScenario, accessible, accessible_measurements, dom, restrict_scenario
from .histories import (
    down_closure,
    enumerate_histories,
    extensions,
    is_history,
    is_maximal,
    maximal_elements,
    maximal_histories,
)


class StrategyError(ValueError):
    pass


class NotAHistory(StrategyError):
    pass


class DeterminismViolation(StrategyError):
    def __init__(self, s, x, o1, o2):
        super().__init__(f"two responses {o1!r} and {o2!r} to {x!r} after {sorted(s)}")
        self.history, self.measurement, self.outcomes = s, x, (o1, o2)


class TotalityViolation(StrategyError):
    def __init__(self, s, x):
        super().__init__(f"no response to accessible {x!r} after {sorted(s)}")
        self.history, self.measurement = s, x


class NotDownClosed(StrategyError):
    pass


class OutcomeIncomplete(StrategyError):
    def __init__(self, s, x, missing):
        super().__init__(f"after {sorted(s)} measurement {x!r} is allowed but outcome "
                         f"{missing!r} is not accepted")
        self.history, self.measurement, self.missing = s, x, missing


class StrictCoTotalityViolation(StrategyError):
    pass


class IncompatibleFamily(StrategyError):
    def __init__(self, i, j, left, right):
        super().__init__(f"members {i} and {j} restrict differently to their overlap")
        self.pair = (i, j)
        self.restrictions = (left, right)


class ScenarioMismatch(StrategyError):
    pass


class EnumerationLimit(RuntimeError):
    """Raised when strategy enumeration exceeds the caller's limit."""

    def __init__(self, limit: int):
        super().__init__(f"more than {limit} strategies; enumeration aborted")
        self.limit = limit


@dataclass(frozen=True, eq=False)
class NStrategy:
    """A Nature strategy, identified by its set of maximal histories."""

    scenario: CausalScenario
    maximal: frozenset

    def __eq__(self, other):
        if not isinstance(other, NStrategy):
            return NotImplemented
        return self.maximal == other.maximal

    def __hash__(self):
        return hash(self.maximal)

    @cached_property
    def histories(self) -> frozenset:
        return down_closure(self.scenario, self.maximal)

    def __contains__(self, s) -> bool:
        s = frozenset(s)
        return any(s <= m for m in self.maximal) and is_history(self.scenario, s)

    def response(self, s: frozenset, x: str) -> str | None:
        for o in self.scenario.outcomes_of(x):
            if s | {(x, o)} in self.histories:
                return o
        return None

    def key(self) -> tuple:
        return tuple(sorted(self.scenario.section_key(m) for m in self.maximal))

    def sorted_maximal(self) -> list[list[tuple[str, str]]]:
        M = self.scenario
        return [M.sorted_section(m) for m in sorted(self.maximal, key=M.section_key)]

    def __repr__(self):
        return f"NStrategy({self.sorted_maximal()})"

    @classmethod
    def from_histories(cls, M: CausalScenario, histories) -> "NStrategy":
        histories = frozenset(histories)
        tops = frozenset(s for s in histories if is_maximal(M, s))
        sigma = cls(M, tops)
        sigma.__dict__["histories"] = histories
        return sigma


@dataclass(frozen=True)
class EStrategy:
    """An Experimenter strategy; play stops at ``terminal`` histories."""

    scenario: CausalScenario = field(compare=False, hash=False)
    histories: frozenset
    terminal: frozenset
    closure: str = "hist"

    @cached_property
    def maximal(self) -> frozenset:
        return maximal_elements(self.scenario, self.histories)

    def allowed(self, s: frozenset) -> list[str]:
        """Measurements the strategy permits after ``s``."""
        M = self.scenario
        return [x for x in accessible_measurements(M, s)
                if any(s | {(x, o)} in self.histories for o in M.outcomes_of(x))]

    def sorted_maximal(self):
        M = self.scenario
        return [M.sorted_section(m) for m in sorted(self.maximal, key=M.section_key)]


# -- Nature strategies ------------------------------------------------------

def _check_n_strategy(M: CausalScenario, sigma: frozenset) -> None:
    for s in sigma:
        for x in accessible_measurements(M, s):
            got = [o for o in M.outcomes_of(x) if s | {(x, o)} in sigma]
            if len(got) > 1:
                raise DeterminismViolation(s, x, got[0], got[1])
            if not got:
                raise TotalityViolation(s, x)


def validate_n_strategy(M: CausalScenario, maximal: Iterable[Iterable]) -> NStrategy:
    tops = [frozenset(tuple(e) for e in m) for m in maximal]
    for t in tops:
        if not is_history(M, t):
            raise NotAHistory(f"{sorted(t)} is not a history of the scenario")
    sigma = down_closure(M, tops)
    _check_n_strategy(M, sigma)
    return NStrategy.from_histories(M, sigma)


def enumerate_n_strategies(
    M: CausalScenario,
    *,
    containing: frozenset | None = None,
    limit: int | None = None,
) -> list[NStrategy]:
    """All Nature strategies over ``M``, canonically ordered.

    With ``containing`` only the strategies that include that set of histories
    are produced.  Raises EnumerationLimit when more than ``limit`` exist.
    """
    found, truncated = _enumerate(M, containing, limit)
    if truncated:
        raise EnumerationLimit(limit)
    return found


class _Stop(Exception):
    pass


def _enumerate(M, containing, limit):
    # Strategies are built layer by layer.  Choosing outcome o for x at s adds
    # h = s + (x, o); every other one-step parent h - (y, p) of h must already
    # be in the strategy and respond p to y, which becomes a forced choice.
    hist = enumerate_histories(M).members
    found: list[NStrategy] = []
    choice: dict[tuple[frozenset, str], str] = {}
    key = M.section_key

    def options(s, x):
        opts = M.outcomes_of(x)
        if containing is not None:
            forced = [o for o in opts if s | {(x, o)} in containing]
            if forced:
                return forced
        return opts

    def search(sigma: frozenset, layer: frozenset, pairs: list, k: int):
        if k == len(pairs):
            nxt = frozenset(s | {(x, choice[s, x])} for s, x in pairs)
            if not nxt:
                if limit is not None and len(found) == limit:
                    raise _Stop
                found.append(NStrategy.from_histories(M, sigma))
                return
            new_pairs = [(s, x) for s in sorted(nxt, key=key)
                         for x in accessible_measurements(M, s)]
            search(sigma | nxt, nxt, new_pairs, 0)
            return
        s, x = pairs[k]
        if (s, x) in choice:
            search(sigma, layer, pairs, k + 1)
            return
        for o in options(s, x):
            h = s | {(x, o)}
            forced = [((s, x), o)]
            ok = True
            for e in h:
                if e == (x, o):
                    continue
                p = h - {e}
                if p not in hist:
                    continue
                if p not in layer:
                    ok = False
                    break
                prev = choice.get((p, e[0]))
                if prev is None:
                    forced.append(((p, e[0]), e[1]))
                elif prev != e[1]:
                    ok = False
                    break
            if not ok:
                continue
            for pair, val in forced:
                choice[pair] = val
            try:
                search(sigma, layer, pairs, k + 1)
            finally:
                for pair, _ in forced:
                    del choice[pair]

    root = frozenset([frozenset()])
    truncated = False
    try:
        search(root, root, [(frozenset(), x) for x in accessible_measurements(M, frozenset())], 0)
    except _Stop:
        truncated = True
    found.sort(key=NStrategy.key)
    return found, truncated


def restrict_strategy(sigma: NStrategy, U: Iterable[str]) -> NStrategy:
    MU = restrict_scenario(sigma.scenario, U)
    hist_u = enumerate_histories(MU).members
    return NStrategy.from_histories(MU, sigma.histories & hist_u)


def check_monotonicity(sigma: NStrategy) -> bool:
    """Outcomes are inherited upwards: a response at ``s`` persists at every ``t >= s``."""
    M, hs = sigma.scenario, sigma.histories
    for s in hs:
        for x in accessible_measurements(M, s):
            o = sigma.response(s, x)
            for t in hs:
                if not s < t:
                    continue
                if x in dom(t):
                    if (x, o) not in t:
                        return False
                elif accessible(M, t, x) and t | {(x, o)} not in hs:
                    return False
    return True


# -- gluing -------------------------------------------------------------------

@dataclass
class GlueReport:
    outcome: str  # "unique" | "multiple_completions" | "no_gluing" | "nondeterministic_union"
    strategies: list[NStrategy]
    union: frozenset
    union_deterministic: bool
    union_total: bool
    truncated: bool = False
    conflict: object = None


def glue(
    M: CausalScenario,
    cover: Sequence[Iterable[str]],
    family: Sequence[NStrategy],
    *,
    limit: int = 1024,
) -> GlueReport:
    """Glue a compatible family ``family[i]`` over ``M_{cover[i]}``.

    Any gluing contains the union of the family.  When the union is total it
    is the unique gluing; otherwise its completions are enumerated (at most
    ``limit``).  A compatible family can have no gluing at all: the union may
    be deterministic while every completion is forced into two outcomes at
    some history that mixes events from different cover elements.
    """
    cover = [frozenset(U) for U in cover]
    if len(cover) != len(family):
        raise ValueError("cover and family have different lengths")
    if not family:
        empty = frozenset([frozenset()])
        return GlueReport("unique", [NStrategy.from_histories(restrict_scenario(M, ()), empty)],
                          empty, True, True)
    for i in range(len(family)):
        for j in range(i + 1, len(family)):
            inter = cover[i] & cover[j]
            left = restrict_strategy(family[i], inter)
            right = restrict_strategy(family[j], inter)
            if left != right:
                raise IncompatibleFamily(i, j, left, right)

    MU = restrict_scenario(M, frozenset().union(*cover))
    union = frozenset().union(*(f.histories for f in family))
    deterministic, total, conflict = True, True, None
    for s in union:
        for x in accessible_measurements(MU, s):
            got = [o for o in MU.outcomes_of(x) if s | {(x, o)} in union]
            if len(got) > 1:
                deterministic, conflict = False, (s, x, got)
            elif not got:
                total = False
    if not deterministic:
        return GlueReport("nondeterministic_union", [], union, False, total, conflict=conflict)

    completions, truncated = _enumerate(MU, union, limit)
    if not completions:
        outcome = "no_gluing"
    elif len(completions) == 1:
        outcome = "unique"
    else:
        outcome = "multiple_completions"
    return GlueReport(outcome, completions, union, deterministic, total, truncated)


def complete_strategy(M: CausalScenario, partial: frozenset) -> NStrategy:
    """Canonical completion of a deterministic down-closed set to a strategy of ``M``.

    Missing responses are filled with the first declared outcome.
    """
    sigma = set(partial) or {frozenset()}
    frontier = sorted(sigma, key=M.section_key)
    while frontier:
        new = []
        for s in frontier:
            for x in accessible_measurements(M, s):
                got = [o for o in M.outcomes_of(x) if s | {(x, o)} in sigma]
                if not got:
                    got = [M.outcomes_of(x)[0]]
                h = s | {(x, got[0])}
                if h not in sigma:
                    sigma.add(h)
                    new.append(h)
        frontier = new
    sigma_f = frozenset(sigma)
    _check_n_strategy(M, sigma_f)
    return NStrategy.from_histories(M, sigma_f)


# -- Experimenter strategies and play -------------------------------------------

CLOSURES = ("hist", "play")


def validate_e_strategy(
    M: CausalScenario,
    histories: Iterable[Iterable],
    terminal: Iterable[Iterable] | None = None,
    *,
    strict: bool = False,
    closure: str = "hist",
) -> EStrategy:
    """Check an Experimenter strategy.

    With ``closure="hist"`` the strategy is the down-closure of ``histories``
    in Hist(M), so the maximal histories suffice.  With ``closure="play"``
    ``histories`` must list the whole strategy, closed under taking play
    prefixes: every non-empty member extends some member by one accessible
    event.  ``terminal`` defaults to the maximal elements.  In strict mode
    every history that is not maximal in Hist(M) must be continued.
    """
    if closure not in CLOSURES:
        raise ValueError(f"closure must be one of {CLOSURES}, got {closure!r}")
    if strict and closure != "hist":
        raise StrategyError("strict validation needs down-closure in Hist(M)")
    given = frozenset(frozenset(tuple(e) for e in s) for s in histories)
    for s in given:
        if not is_history(M, s):
            raise NotAHistory(f"{sorted(s)} is not a history of the scenario")
    if closure == "hist":
        tau = down_closure(M, given | {frozenset()})
    else:
        tau = given
        if frozenset() not in tau:
            raise NotDownClosed("the empty history is missing")
        for s in tau:
            if s and not any(s - {e} in tau and accessible(M, s - {e}, e[0]) for e in s):
                raise NotDownClosed(f"{sorted(s)} has no one-step prefix in the strategy")
    for s in tau:
        for x in accessible_measurements(M, s):
            present = [o for o in M.outcomes_of(x) if s | {(x, o)} in tau]
            if present and len(present) < len(M.outcomes_of(x)):
                missing = next(o for o in M.outcomes_of(x) if o not in present)
                raise OutcomeIncomplete(s, x, missing)
    tops = maximal_elements(M, tau)
    term = tops if terminal is None else frozenset(frozenset(tuple(e) for e in t) for t in terminal)
    if not term <= tops:
        raise StrategyError("terminal histories must be maximal in the strategy")
    if strict:
        for s in tops:
            if not is_maximal(M, s):
                raise StrictCoTotalityViolation(
                    f"{sorted(s)} is not maximal in Hist(M) but the strategy stops there")
        if term != tops:
            raise StrictCoTotalityViolation("terminal must be exactly the maximal histories")
    tau_obj = EStrategy(M, tau, term, closure)
    tau_obj.__dict__["maximal"] = tops
    return tau_obj


def full_e_strategy(M: CausalScenario) -> EStrategy:
    return validate_e_strategy(M, maximal_histories(M).members)


def play(sigma: NStrategy, tau: EStrategy) -> frozenset:
    """Maximal histories of the intersection of the two strategies."""
    if not same_game(sigma.scenario, tau.scenario):
        raise ScenarioMismatch("strategies live over different scenarios")
    M = tau.scenario
    both = frozenset(s for s in tau.histories if s in sigma)
    return maximal_elements(M, both)


def same_game(M1: CausalScenario, M2: CausalScenario) -> bool:
    """Equal as games, ignoring any attached cover."""
    return (M1.measurements, M1.outcomes, M1.enabling, M1.exclusive) == (
        M2.measurements, M2.outcomes, M2.enabling, M2.exclusive)


def playout_key(M: CausalScenario, playout: frozenset) -> tuple:
    return tuple(sorted(M.section_key(s) for s in playout))


__all__ = [
    "CLOSURES", "NStrategy", "EStrategy", "GlueReport",
    "validate_n_strategy", "enumerate_n_strategies", "restrict_strategy", "glue",
    "check_monotonicity", "validate_e_strategy", "full_e_strategy", "play",
    "complete_strategy", "playout_key", "same_game", "extensions",
    "StrategyError", "NotAHistory", "DeterminismViolation", "TotalityViolation",
    "NotDownClosed", "OutcomeIncomplete", "StrictCoTotalityViolation",
    "IncompatibleFamily", "ScenarioMismatch", "EnumerationLimit",
]

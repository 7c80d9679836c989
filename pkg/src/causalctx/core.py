"""Causal measurement scenarios: events, sections, enabling and accessibility.

An event is a ``(measurement, outcome)`` pair of string ids and a section is a
``frozenset`` of events with no measurement repeated.  Scenarios are immutable
and hashable, so derived data (histories, strategies) can be cached per
scenario.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Mapping

Event = tuple[str, str]
Section = frozenset  # frozenset[Event]


class ScenarioError(ValueError):
    """Raised when a scenario description violates a structural invariant."""


@dataclass(frozen=True)
class Enabling:
    """One generating entry ``premise |- target`` of the enabling relation."""

    premise: frozenset
    target: str


@dataclass(frozen=True)
class CausalScenario:
    """A finite causal measurement scenario.

    ``exclusive`` lists groups of measurements of which at most one may occur
    in a history (one input per site in Bell-type encodings).  It is empty for
    everything built directly from the game description.
    """

    measurements: tuple[str, ...]
    outcomes: tuple[tuple[str, ...], ...]
    enabling: tuple[Enabling, ...]
    cover: tuple[frozenset, ...] | None = None
    exclusive: tuple[frozenset, ...] = ()
    name: str = field(default="", compare=False)

    @cached_property
    def index(self) -> dict[str, int]:
        return {x: i for i, x in enumerate(self.measurements)}

    @cached_property
    def outcome_index(self) -> dict[str, dict[str, int]]:
        return {x: {o: j for j, o in enumerate(os)}
                for x, os in zip(self.measurements, self.outcomes)}

    @cached_property
    def _premises(self) -> dict[str, tuple[frozenset, ...]]:
        table: dict[str, list[frozenset]] = {x: [] for x in self.measurements}
        for entry in self.enabling:
            table[entry.target].append(entry.premise)
        return {x: tuple(ps) for x, ps in table.items()}

    @cached_property
    def _rivals(self) -> dict[str, frozenset]:
        rivals: dict[str, set[str]] = {x: set() for x in self.measurements}
        for group in self.exclusive:
            for x in group:
                rivals[x] |= group - {x}
        return {x: frozenset(r) for x, r in rivals.items()}

    def outcomes_of(self, x: str) -> tuple[str, ...]:
        return self.outcomes[self.index[x]]

    def premises(self, x: str) -> tuple[frozenset, ...]:
        return self._premises[x]

    def rivals(self, x: str) -> frozenset:
        return self._rivals[x]

    def event_key(self, e: Event) -> tuple[int, int]:
        return self.index[e[0]], self.outcome_index[e[0]][e[1]]

    def section_key(self, s: Iterable[Event]) -> tuple:
        events = sorted(self.event_key(e) for e in s)
        return len(events), tuple(events)

    def sorted_section(self, s: Iterable[Event]) -> list[Event]:
        return sorted(s, key=self.event_key)

    def sorted_measurements(self, xs: Iterable[str]) -> list[str]:
        return sorted(xs, key=self.index.__getitem__)

    @property
    def is_flat(self) -> bool:
        """True when every measurement is initially enabled and nothing is exclusive."""
        if self.exclusive:
            return False
        return all(any(not p for p in self.premises(x)) for x in self.measurements)

    def contains_event(self, e: Event) -> bool:
        return e[0] in self.index and e[1] in self.outcome_index[e[0]]


def is_consistent(events: Iterable[Event]) -> bool:
    seen: dict[str, str] = {}
    for x, o in events:
        if seen.setdefault(x, o) != o:
            return False
    return True


def dom(s: Iterable[Event]) -> frozenset:
    return frozenset(x for x, _ in s)


def accessible(M: CausalScenario, s: frozenset, x: str) -> bool:
    """Whether ``x`` can be performed after the events in ``s``."""
    performed = dom(s)
    if x in performed or performed & M.rivals(x):
        return False
    return any(p <= s for p in M.premises(x))


def accessible_measurements(M: CausalScenario, s: frozenset) -> list[str]:
    """Measurements accessible from ``s``, in declaration order."""
    return [x for x in M.measurements if accessible(M, s, x)]


def restrict_scenario(M: CausalScenario, U: Iterable[str]) -> CausalScenario:
    U = frozenset(U)
    unknown = U - set(M.measurements)
    if unknown:
        raise ScenarioError(f"unknown measurements in restriction: {sorted(unknown)}")
    keep = [i for i, x in enumerate(M.measurements) if x in U]
    enabling = tuple(e for e in M.enabling if dom(e.premise) | {e.target} <= U)
    exclusive = tuple(g & U for g in M.exclusive if len(g & U) > 1)
    return CausalScenario(
        measurements=tuple(M.measurements[i] for i in keep),
        outcomes=tuple(M.outcomes[i] for i in keep),
        enabling=enabling,
        cover=None,
        exclusive=exclusive,
        name=M.name,
    )


def with_cover(M: CausalScenario, cover: Iterable[Iterable[str]] | None) -> CausalScenario:
    """Return ``M`` carrying a (validated) cover."""
    return build_scenario(
        M.measurements, dict(zip(M.measurements, M.outcomes)),
        [(e.premise, e.target) for e in M.enabling],
        cover=cover, exclusive=M.exclusive, name=M.name,
    )


def build_scenario(
    measurements: Iterable[str],
    outcomes: Mapping[str, Iterable[str]],
    enabling: Iterable[tuple[Iterable[Event], str]] | str,
    cover: Iterable[Iterable[str]] | None = None,
    exclusive: Iterable[Iterable[str]] = (),
    name: str = "",
) -> CausalScenario:
    """Programmatic constructor; checks every invariant and raises ScenarioError."""
    measurements = tuple(measurements)
    if len(set(measurements)) != len(measurements):
        dup = sorted({x for x in measurements if measurements.count(x) > 1})
        raise ScenarioError(f"duplicate measurement id(s): {dup}")
    outs: list[tuple[str, ...]] = []
    for x in measurements:
        if x not in outcomes:
            raise ScenarioError(f"no outcome list for measurement {x!r}")
        os = tuple(outcomes[x])
        if not os:
            raise ScenarioError(f"empty outcome list for measurement {x!r}")
        if len(set(os)) != len(os):
            raise ScenarioError(f"duplicate outcome ids for measurement {x!r}")
        outs.append(os)
    extra = set(outcomes) - set(measurements)
    if extra:
        raise ScenarioError(f"outcomes given for unknown measurements: {sorted(extra)}")
    known = {x: set(os) for x, os in zip(measurements, outs)}

    if enabling == "flat":
        enabling = [((), x) for x in measurements]
    elif isinstance(enabling, str):
        raise ScenarioError(f"unknown enabling shorthand {enabling!r}")
    entries = []
    for premise, target in enabling:
        premise = frozenset(tuple(e) for e in premise)
        for x, o in premise:
            if x not in known or o not in known[x]:
                raise ScenarioError(f"enabling premise references unknown event ({x!r}, {o!r})")
        if not is_consistent(premise):
            raise ScenarioError(f"inconsistent enabling premise for {target!r}: "
                                f"{sorted(premise)}")
        if target not in known:
            raise ScenarioError(f"enabling target {target!r} is not a measurement")
        if target in dom(premise):
            raise ScenarioError(f"enabling target {target!r} occurs in its own premise")
        entries.append(Enabling(premise, target))

    groups = []
    for g in exclusive:
        g = frozenset(g)
        if not g <= set(measurements):
            raise ScenarioError(f"exclusive group mentions unknown measurements: "
                                f"{sorted(g - set(measurements))}")
        groups.append(g)

    if cover is not None:
        cover = tuple(frozenset(c) for c in cover)
        for c in cover:
            if not c <= set(measurements):
                raise ScenarioError(f"cover element mentions unknown measurements: "
                                    f"{sorted(c - set(measurements))}")
        covered = frozenset().union(*cover) if cover else frozenset()
        if covered != set(measurements):
            raise ScenarioError(
                f"cover does not cover the measurements; missing {sorted(set(measurements) - covered)}")

    return CausalScenario(measurements, tuple(outs), tuple(entries), cover,
                          tuple(groups), name)


def validate_scenario(raw: Mapping[str, Any]) -> CausalScenario:
    """Validate a scenario in its JSON form (already parsed)."""
    if not isinstance(raw, Mapping):
        raise ScenarioError("scenario must be a JSON object")
    try:
        ms = raw["measurements"]
    except KeyError:
        raise ScenarioError("scenario has no 'measurements'") from None
    ids, outcomes = [], {}
    for m in ms:
        if "id" not in m or "outcomes" not in m:
            raise ScenarioError("each measurement needs 'id' and 'outcomes'")
        mid = str(m["id"])
        if mid in outcomes:
            raise ScenarioError(f"duplicate measurement id(s): [{mid!r}]")
        ids.append(mid)
        outcomes[mid] = [str(o) for o in m["outcomes"]]
    enabling = raw.get("enabling", "flat")
    if not isinstance(enabling, str):
        try:
            enabling = [([tuple(map(str, e)) for e in entry["after"]], str(entry["enables"]))
                        for entry in enabling]
        except (KeyError, TypeError, ValueError):
            raise ScenarioError("enabling entries need 'after' (list of [mid, oid]) "
                                "and 'enables'") from None
    return build_scenario(ids, outcomes, enabling, cover=raw.get("cover"),
                          exclusive=raw.get("exclusive", ()), name=str(raw.get("name", "")))


def scenario_to_json(M: CausalScenario) -> dict[str, Any]:
    out: dict[str, Any] = {
        "name": M.name,
        "measurements": [{"id": x, "outcomes": list(os)}
                         for x, os in zip(M.measurements, M.outcomes)],
    }
    flat = (len(M.enabling) == len(M.measurements)
            and all(not e.premise for e in M.enabling)
            and [e.target for e in M.enabling] == list(M.measurements))
    out["enabling"] = "flat" if flat else [
        {"after": [list(e) for e in M.sorted_section(entry.premise)], "enables": entry.target}
        for entry in M.enabling
    ]
    if M.cover is not None:
        out["cover"] = [M.sorted_measurements(c) for c in M.cover]
    if M.exclusive:
        out["exclusive"] = [M.sorted_measurements(g) for g in M.exclusive]
    return out

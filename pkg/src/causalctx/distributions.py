"""Finitely supported distributions with weights in a semiring.

Two semirings are provided: exact non-negative rationals (probabilistic) and
booleans (possibilistic).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

from .strategies import EStrategy, NStrategy, ScenarioMismatch, play, restrict_strategy


class DistributionError(ValueError):
    pass


class WeightSumNotOne(DistributionError):
    pass


class SemiringMismatch(DistributionError):
    pass


class MissingMeasurementInPlayout(DistributionError):
    pass


class NonBinaryOutcome(DistributionError):
    pass


@dataclass(frozen=True)
class Semiring:
    name: str
    zero: Any
    one: Any
    add: Callable[[Any, Any], Any]
    mul: Callable[[Any, Any], Any]

    def coerce(self, w):
        if self.name == "boolean":
            if not isinstance(w, bool):
                raise DistributionError(f"boolean weight expected, got {w!r}")
            return w
        w = Fraction(w)
        if w < 0:
            raise DistributionError(f"negative weight {w}")
        return w

    def total(self, ws: Iterable):
        acc = self.zero
        for w in ws:
            acc = self.add(acc, w)
        return acc

    def format(self, w) -> Any:
        return w if self.name == "boolean" else str(w)

    def parse(self, raw) -> Any:
        if self.name == "boolean":
            return self.coerce(raw)
        if isinstance(raw, float):
            raise DistributionError("rational weights must be strings like '1/4', not floats")
        return self.coerce(Fraction(str(raw)))


RATIONAL = Semiring("rational", Fraction(0), Fraction(1),
                    lambda a, b: a + b, lambda a, b: a * b)
BOOLEAN = Semiring("boolean", False, True,
                   lambda a, b: a or b, lambda a, b: a and b)
SEMIRINGS = {"rational": RATIONAL, "boolean": BOOLEAN}


class Dist:
    """A normalised distribution: a map from hashable elements to nonzero weights."""

    __slots__ = ("semiring", "support")

    def __init__(self, semiring: Semiring, weights: Mapping[Hashable, Any] | Iterable,
                 *, check: bool = True):
        items = weights.items() if isinstance(weights, Mapping) else weights
        support: dict = {}
        for elem, w in items:
            w = semiring.coerce(w)
            if w == semiring.zero:
                continue
            support[elem] = semiring.add(support[elem], w) if elem in support else w
        self.semiring = semiring
        self.support = support
        if check and semiring.total(support.values()) != semiring.one:
            raise WeightSumNotOne(
                f"weights combine to {semiring.total(support.values())}, not {semiring.one}")

    @classmethod
    def point(cls, elem, semiring: Semiring = RATIONAL) -> "Dist":
        return cls(semiring, {elem: semiring.one})

    @classmethod
    def uniform(cls, elems: Sequence, semiring: Semiring = RATIONAL) -> "Dist":
        elems = list(elems)
        if semiring is BOOLEAN:
            return cls(semiring, {e: True for e in elems})
        return cls(semiring, {e: Fraction(1, len(elems)) for e in elems})

    def __getitem__(self, elem):
        return self.support.get(elem, self.semiring.zero)

    def __iter__(self):
        return iter(self.support)

    def __len__(self):
        return len(self.support)

    def items(self):
        return self.support.items()

    def __eq__(self, other):
        if not isinstance(other, Dist):
            return NotImplemented
        return self.semiring.name == other.semiring.name and self.support == other.support

    def __repr__(self):
        body = ", ".join(f"{e!r}: {w}" for e, w in self.support.items())
        return f"Dist[{self.semiring.name}]({{{body}}})"

    def map(self, f: Callable) -> "Dist":
        """Pushforward along ``f``."""
        out: dict = {}
        add = self.semiring.add
        for e, w in self.support.items():
            k = f(e)
            out[k] = add(out[k], w) if k in out else w
        return Dist(self.semiring, out, check=False)

    def to_boolean(self) -> "Dist":
        return Dist(BOOLEAN, {e: True for e in self.support})

    def sorted_items(self, key: Callable | None = None):
        return sorted(self.support.items(), key=(lambda kv: key(kv[0])) if key else None)


def pushforward(d: Dist, U: Iterable[str]) -> Dist:
    """Marginalise a distribution over strategies to the sub-scenario on ``U``."""
    U = frozenset(U)
    cache: dict = {}

    def restrict(sigma: NStrategy):
        if sigma not in cache:
            cache[sigma] = restrict_strategy(sigma, U)
        return cache[sigma]

    return d.map(restrict)


def mix(coeffs: Sequence[tuple[Any, Dist]]) -> Dist:
    """Convex combination ``sum_k w_k d_k`` (weights in the dists' semiring)."""
    if not coeffs:
        raise WeightSumNotOne("empty mixture")
    sr = coeffs[0][1].semiring
    if any(d.semiring.name != sr.name for _, d in coeffs):
        raise SemiringMismatch("mixture of distributions over different semirings")
    weights = [sr.coerce(w) for w, _ in coeffs]
    if sr.total(weights) != sr.one:
        raise WeightSumNotOne(f"mixture weights combine to {sr.total(weights)}")
    out: dict = {}
    for w, (_, d) in zip(weights, coeffs):
        for e, v in d.items():
            wv = sr.mul(w, v)
            out[e] = sr.add(out[e], wv) if e in out else wv
    return Dist(sr, out)


def play_mixed(dN: Dist, dE: Dist) -> Dist:
    """Bilinear extension of play: weight of a playout set sums dN(s) * dE(t)."""
    if dN.semiring.name != dE.semiring.name:
        raise SemiringMismatch("nature and experimenter distributions use different semirings")
    sr = dN.semiring
    out: dict = {}
    for sigma, w in dN.items():
        for tau, v in dE.items():
            if not isinstance(sigma, NStrategy) or not isinstance(tau, EStrategy):
                raise TypeError("play_mixed expects N-strategies against E-strategies")
            P = play(sigma, tau)
            wv = sr.mul(w, v)
            out[P] = sr.add(out[P], wv) if P in out else wv
    return Dist(sr, out)


def _bit(x: str, o: str, outcomes: Sequence[str] | None, labelling) -> int:
    if labelling and x in labelling:
        return labelling[x][o]
    if outcomes is None:
        if o in ("0", "1"):
            return int(o)
        raise NonBinaryOutcome(f"no bit labelling for outcome {o!r} of {x!r}")
    if len(outcomes) != 2:
        raise NonBinaryOutcome(f"measurement {x!r} is not two-valued and has no bit labelling")
    return outcomes.index(o)


def playout_events(P: frozenset, terminal: frozenset | None = None) -> dict[str, str]:
    """The events of a playout set as a measurement -> outcome map.

    With ``terminal`` (an E-strategy's terminal histories) only the playout's
    single complete run is read.
    """
    if terminal is not None:
        runs = [s for s in P if s in terminal]
        if len(runs) != 1:
            raise MissingMeasurementInPlayout(
                f"expected one complete run in the playout, found {len(runs)}")
        P = runs
    events: dict[str, str] = {}
    for s in P:
        for x, o in s:
            if events.setdefault(x, o) != o:
                raise DistributionError(f"playout assigns two outcomes to {x!r}")
    return events


def readout_parity(
    d: Dist,
    measurements: Sequence[str],
    labelling: Mapping[str, Mapping[str, int]] | None = None,
    *,
    partial: bool = False,
    scenario=None,
    terminal: frozenset | None = None,
) -> Dist:
    """Pushforward of a playout distribution along the XOR of outcome bits.

    Outcome ``k`` of a two-valued measurement reads as bit ``k`` unless
    ``labelling`` says otherwise.  With ``partial=True`` only the listed
    measurements that were actually played are read (at least one must be).
    Without ``scenario`` the outcome ids ``"0"``/``"1"`` read as themselves.
    ``terminal`` restricts reading to each playout's complete run.
    """
    def parity(P):
        events = playout_events(P, terminal)
        bit, seen = 0, 0
        for x in measurements:
            if x not in events:
                if partial:
                    continue
                raise MissingMeasurementInPlayout(f"measurement {x!r} was not played")
            outcomes = scenario.outcomes_of(x) if scenario is not None else None
            bit ^= _bit(x, events[x], outcomes, labelling)
            seen += 1
        if not seen:
            raise MissingMeasurementInPlayout("none of the listed measurements was played")
        return bit

    return d.map(parity)


__all__ = [
    "Semiring", "RATIONAL", "BOOLEAN", "SEMIRINGS", "Dist",
    "pushforward", "mix", "play_mixed", "readout_parity", "playout_events",
    "DistributionError", "WeightSumNotOne", "SemiringMismatch",
    "MissingMeasurementInPlayout", "NonBinaryOutcome", "ScenarioMismatch",
]

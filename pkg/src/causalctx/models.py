"""Empirical models over causal contextuality scenarios.

A model assigns one distribution over local Nature strategies to each context
of the scenario's cover.  Classicality is membership in the polytope spanned
by the deterministic models, decided exactly with :mod:`causalctx.lp`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Mapping, Sequence

from .core import CausalScenario, dom, restrict_scenario
from .distributions import BOOLEAN, RATIONAL, Dist, Semiring, pushforward
from .lp import LPResult, RationalLP, solve, verify_certificate
from .strategies import (
    EStrategy,
    NStrategy,
    enumerate_n_strategies,
    restrict_strategy,
)


class ModelError(ValueError):
    pass


class IncompatibleModel(ModelError):
    pass


class SemiringNotRational(ModelError):
    pass


class ScenarioNotFlat(ModelError):
    pass


DEFAULT_MAX_STRATEGIES = 200_000


@lru_cache(maxsize=512)
def gamma(M: CausalScenario, limit: int | None = DEFAULT_MAX_STRATEGIES) -> tuple[NStrategy, ...]:
    """Cached, canonically ordered Nature strategies of ``M``."""
    return tuple(enumerate_n_strategies(M, limit=limit))


@dataclass
class EmpiricalModel:
    scenario: CausalScenario
    contexts: tuple[frozenset, ...]
    dists: tuple[Dist, ...]
    semiring: Semiring = RATIONAL

    def __post_init__(self):
        self.contexts = tuple(frozenset(c) for c in self.contexts)
        self.dists = tuple(self.dists)
        if len(self.contexts) != len(self.dists):
            raise ModelError("one distribution per context is required")
        covered = frozenset().union(*self.contexts) if self.contexts else frozenset()
        if covered != set(self.scenario.measurements):
            raise ModelError("the contexts do not cover the scenario's measurements")
        for C, d in zip(self.contexts, self.dists):
            if d.semiring.name != self.semiring.name:
                raise ModelError("context distribution in the wrong semiring")
            MC = restrict_scenario(self.scenario, C)
            for sigma in d:
                if not isinstance(sigma, NStrategy) or set(sigma.scenario.measurements) != C:
                    raise ModelError(f"support of context {sorted(C)} must consist of "
                                     f"strategies over that context")
                if sigma.scenario != MC:
                    raise ModelError(f"strategy over a different sub-scenario in {sorted(C)}")

    def dist(self, context: Iterable[str]) -> Dist:
        return self.dists[self.contexts.index(frozenset(context))]

    def to_possibilistic(self) -> "EmpiricalModel":
        return EmpiricalModel(self.scenario, self.contexts,
                              tuple(d.to_boolean() for d in self.dists), BOOLEAN)


def model_from_global(M: CausalScenario, d: Dist,
                      contexts: Sequence[Iterable[str]] | None = None) -> EmpiricalModel:
    """The model induced by a distribution over global strategies."""
    contexts = [frozenset(c) for c in (contexts if contexts is not None else M.cover)]
    return EmpiricalModel(M, tuple(contexts), tuple(pushforward(d, C) for C in contexts),
                          d.semiring)


def deterministic_model(M: CausalScenario, sigma: NStrategy,
                        contexts: Sequence[Iterable[str]] | None = None) -> EmpiricalModel:
    return model_from_global(M, Dist.point(sigma), contexts)


def enumerate_deterministic_models(M: CausalScenario, *, dedupe: bool = False,
                                   limit: int | None = DEFAULT_MAX_STRATEGIES
                                   ) -> list[EmpiricalModel]:
    if M.cover is None:
        raise ModelError("scenario has no cover")
    models, seen = [], set()
    for sigma in gamma(M, limit):
        if dedupe:
            profile = tuple(restrict_strategy(sigma, C) for C in M.cover)
            if profile in seen:
                continue
            seen.add(profile)
        models.append(deterministic_model(M, sigma))
    return models


# -- compatibility -------------------------------------------------------------

@dataclass
class CompatibilityReport:
    compatible: bool
    violations: list[tuple[int, int, NStrategy, object, object]] = field(default_factory=list)


def check_compatibility(e: EmpiricalModel) -> CompatibilityReport:
    violations = []
    n = len(e.contexts)
    for i in range(n):
        for j in range(i + 1, n):
            U = e.contexts[i] & e.contexts[j]
            left = pushforward(e.dists[i], U)
            right = pushforward(e.dists[j], U)
            for tau in sorted(set(left) | set(right), key=NStrategy.key):
                if left[tau] != right[tau]:
                    violations.append((i, j, tau, left[tau], right[tau]))
    return CompatibilityReport(not violations, violations)


def _require_compatible(e: EmpiricalModel) -> None:
    report = check_compatibility(e)
    if not report.compatible:
        i, j, tau, a, b = report.violations[0]
        raise IncompatibleModel(
            f"contexts {i} and {j} disagree on {tau!r}: {a} vs {b} "
            f"({len(report.violations)} violation(s))")


# -- incidence system and LPs ----------------------------------------------------

@dataclass
class IncidenceSystem:
    """Columns are global strategies grouped by their restriction profile;
    rows are pairs (context index, local strategy)."""

    strategies: tuple[NStrategy, ...]
    local: tuple[tuple[NStrategy, ...], ...]
    rows: list[tuple[int, NStrategy]]
    columns: list[list[int]]  # column -> indices into ``strategies``
    profiles: list[tuple[NStrategy, ...]]
    matrix: list[list[int]]

    def rhs(self, e: EmpiricalModel) -> list[Fraction]:
        return [e.dists[i][tau] for i, tau in self.rows]


def incidence_system(M: CausalScenario, contexts: Sequence[frozenset],
                     limit: int | None = DEFAULT_MAX_STRATEGIES) -> IncidenceSystem:
    return _incidence(M, tuple(contexts), limit)


@lru_cache(maxsize=64)
def _incidence(M, contexts, limit):
    glob = gamma(M, limit)
    local = tuple(gamma(restrict_scenario(M, C), limit) for C in contexts)
    rows = [(i, tau) for i, taus in enumerate(local) for tau in taus]
    row_of = {r: k for k, r in enumerate(rows)}
    profiles: list[tuple] = []
    columns: list[list[int]] = []
    seen: dict[tuple, int] = {}
    for k, sigma in enumerate(glob):
        prof = tuple(restrict_strategy(sigma, C) for C in contexts)
        if prof in seen:
            columns[seen[prof]].append(k)
        else:
            seen[prof] = len(profiles)
            profiles.append(prof)
            columns.append([k])
    matrix = [[0] * len(profiles) for _ in rows]
    for c, prof in enumerate(profiles):
        for i, tau in enumerate(prof):
            matrix[row_of[(i, tau)]][c] = 1
    return IncidenceSystem(glob, local, rows, columns, profiles, matrix)


@dataclass
class ContextualityVerdict:
    status: str  # "causally_noncontextual" | "causally_contextual"
    global_section: Dist | None = None
    certificate: list[Fraction] | None = None
    lp: RationalLP | None = None
    result: LPResult | None = None
    system: IncidenceSystem | None = None

    @property
    def contextual(self) -> bool:
        return self.status == "causally_contextual"


def _feasibility_lp(system: IncidenceSystem, e: EmpiricalModel) -> RationalLP:
    n = len(system.profiles)
    rows = [list(r) for r in system.matrix] + [[1] * n]
    rhs = system.rhs(e) + [Fraction(1)]
    return RationalLP([0] * n, rows, rhs)


def decide_causal_contextuality(e: EmpiricalModel,
                                limit: int | None = DEFAULT_MAX_STRATEGIES
                                ) -> ContextualityVerdict:
    if e.semiring.name != "rational":
        raise SemiringNotRational("boolean models are decided by decide_possibilistic")
    _require_compatible(e)
    system = incidence_system(e.scenario, e.contexts, limit)
    lp = _feasibility_lp(system, e)
    res = solve(lp)
    if not verify_certificate(lp, res):
        raise ArithmeticError("LP certificate failed verification")
    if res.status == "infeasible":
        return ContextualityVerdict("causally_contextual", None, res.dual_certificate,
                                    lp, res, system)
    weights = {system.strategies[system.columns[c][0]]: w
               for c, w in enumerate(res.primal) if w}
    d = Dist(RATIONAL, weights)
    return ContextualityVerdict("causally_noncontextual", d, None, lp, res, system)


def verify_global_section(e: EmpiricalModel, d: Dist) -> bool:
    return all(pushforward(d, C) == dist for C, dist in zip(e.contexts, e.dists))


def verify_infeasibility(e: EmpiricalModel, verdict: ContextualityVerdict) -> bool:
    """Check ``y . e < 0`` and ``y . M >= 0`` for the stored certificate."""
    y, system = verdict.certificate, verdict.system
    if y is None or system is None:
        return False
    rhs = system.rhs(e) + [Fraction(1)]
    rows = system.matrix + [[1] * len(system.profiles)]
    if sum(a * b for a, b in zip(y, rhs)) >= 0:
        return False
    return all(sum(y[r] * rows[r][c] for r in range(len(rows))) >= 0
               for c in range(len(system.profiles)))


@dataclass
class FractionResult:
    noncontextual_fraction: Fraction
    contextual_fraction: Fraction
    witness_subdistribution: dict[NStrategy, Fraction]
    lp: RationalLP | None = None
    result: LPResult | None = None


def contextual_fraction(e: EmpiricalModel,
                        limit: int | None = DEFAULT_MAX_STRATEGIES) -> FractionResult:
    """Largest total weight of non-negative global strategy weights whose
    context marginals stay below the model."""
    if e.semiring.name != "rational":
        raise SemiringNotRational("the contextual fraction needs rational weights")
    _require_compatible(e)
    system = incidence_system(e.scenario, e.contexts, limit)
    n = len(system.profiles)
    lp = RationalLP([1] * n, [], [], [list(r) for r in system.matrix], system.rhs(e))
    res = solve(lp)
    if res.status != "optimal" or not verify_certificate(lp, res):
        raise ArithmeticError("contextual fraction LP did not certify an optimum")
    ncf = res.objective_value
    witness = {system.strategies[system.columns[c][0]]: w
               for c, w in enumerate(res.primal) if w}
    return FractionResult(ncf, 1 - ncf, witness, lp, res)


def decide_possibilistic(e: EmpiricalModel,
                         limit: int | None = DEFAULT_MAX_STRATEGIES) -> ContextualityVerdict:
    """Boolean global section search.

    Any witness set lies inside the set of global strategies whose every
    restriction is possible, so that set is a witness iff any witness exists.
    """
    if e.semiring.name != "boolean":
        e = e.to_possibilistic()
    _require_compatible(e)
    system = incidence_system(e.scenario, e.contexts, limit)
    supports = [set(d) for d in e.dists]
    candidates = [c for c, prof in enumerate(system.profiles)
                  if all(tau in supports[i] for i, tau in enumerate(prof))]
    for i, supp in enumerate(supports):
        reached = {system.profiles[c][i] for c in candidates}
        if reached != supp:
            return ContextualityVerdict("causally_contextual", None, None, None, None, system)
    members = {system.strategies[k]: True for c in candidates for k in system.columns[c]}
    return ContextualityVerdict("causally_noncontextual", Dist(BOOLEAN, members),
                                system=system)


# -- flat models -------------------------------------------------------------------

def flat_model_from_tables(
    M: CausalScenario,
    tables: Sequence[tuple[Sequence[str], Mapping[tuple[str, ...], object]]],
    semiring: Semiring = RATIONAL,
) -> EmpiricalModel:
    """Build a flat model from per-context outcome tables.

    Each table maps an outcome tuple (ordered like the context list) to a
    weight.  Refused for non-flat scenarios, where history statistics do not
    determine strategy distributions.
    """
    from .encodings import assignment_to_flat_strategy

    if not M.is_flat:
        raise ScenarioNotFlat(
            "outcome tables determine strategy distributions only for flat scenarios; "
            "for causal contexts give a distribution over strategies instead")
    contexts, dists = [], []
    for ctx, rows in tables:
        ctx = list(ctx)
        MC = restrict_scenario(M, ctx)
        weights = {}
        for outs, w in rows.items():
            if len(outs) != len(ctx):
                raise ModelError(f"outcome tuple {outs!r} does not match context {ctx}")
            weights[assignment_to_flat_strategy(MC, dict(zip(ctx, outs)))] = w
        contexts.append(frozenset(ctx))
        dists.append(Dist(semiring, weights))
    return EmpiricalModel(M, tuple(contexts), tuple(dists), semiring)


def _assignment_weights(e: EmpiricalModel, S: frozenset):
    """Marginal of a flat model on the measurement set ``S`` as assignment weights."""
    from .encodings import flat_strategy_to_assignment

    for C, d in zip(e.contexts, e.dists):
        if S <= C:
            out: dict = {}
            for sigma, w in d.items():
                a = flat_strategy_to_assignment(sigma)
                k = frozenset((x, a[x]) for x in S)
                out[k] = out.get(k, 0) + w
            return out
    raise ModelError(f"no context contains the measurements {sorted(S)}")


def nature_mixture(e: EmpiricalModel, tau: EStrategy) -> Dist:
    """Distribution over global Nature strategies answering ``tau`` as the model does.

    Outcomes are revealed along the Experimenter's terminal runs: at each stage
    the measurements shared by every run consistent with the outcomes seen so
    far are drawn jointly, conditioned on those outcomes, from the marginal of
    a context containing everything measured.  Measurements no run reaches get
    their first outcome.
    """
    from .encodings import assignment_to_flat_strategy

    M = e.scenario
    if not M.is_flat:
        raise ScenarioNotFlat("model-driven play is defined for flat scenarios")
    if e.semiring.name != "rational":
        raise SemiringNotRational("model-driven play needs rational weights")
    runs = list(tau.terminal)
    out: dict = {}

    def forced(a: dict) -> frozenset:
        live = [dom(r) for r in runs
                if all(a.get(x, o) == o for x, o in r)]
        if not live:
            raise ModelError("no terminal run is consistent with the outcomes drawn")
        common = frozenset.intersection(*live) - set(a)
        if not common and any(not d <= set(a) for d in live):
            raise ModelError("the Experimenter's next measurement is not determined; "
                             "model-driven play needs a deterministic choice of measurements")
        return common

    def walk(a: dict, w: Fraction):
        nxt = forced(a)
        if not nxt:
            full = dict(a)
            for x in M.measurements:
                full.setdefault(x, M.outcomes_of(x)[0])
            sigma = assignment_to_flat_strategy(M, full)
            out[sigma] = out.get(sigma, 0) + w
            return
        seen = frozenset(a.items())
        joint = _assignment_weights(e, frozenset(a) | nxt)
        base = sum((v for k, v in joint.items() if seen <= k), Fraction(0))
        if base == 0:
            raise ModelError("conditioning on outcomes the model deems impossible")
        for k in sorted(joint, key=M.section_key):
            if joint[k] and seen <= k:
                walk(dict(k), w * joint[k] / base)

    walk({}, Fraction(1))
    return Dist(RATIONAL, out)


def product_tables(*blocks: Sequence[tuple[Sequence[str], Mapping[tuple[str, ...], object]]]):
    """Tables of the product model: contexts are unions of one context per block."""
    out = []
    for combo in product(*blocks):
        ctx: list[str] = []
        rows: dict = {}
        for c, _ in combo:
            ctx.extend(c)
        for picks in product(*(list(t.items()) for _, t in combo)):
            outs: tuple = ()
            w = Fraction(1)
            for o, v in picks:
                outs += tuple(o)
                w *= Fraction(v)
            rows[outs] = w
        out.append((ctx, rows))
    return out

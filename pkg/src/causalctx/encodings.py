"""Scenario builders: flat scenarios, causally ordered Bell (GP) scenarios and
the worked examples (GHZ, Anders-Browne gates, PR box on a 2-chain, gluing
counterexample)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Any, Iterable, Mapping, Sequence

from .core import CausalScenario, ScenarioError, accessible_measurements, build_scenario, dom, restrict_scenario
from .distributions import RATIONAL, Dist
from .histories import enumerate_histories
from .models import EmpiricalModel, ScenarioNotFlat, flat_model_from_tables, product_tables
from .strategies import EStrategy, NStrategy, validate_e_strategy, validate_n_strategy

BITS = ("0", "1")


# -- flat scenarios ----------------------------------------------------------------

def flat_scenario(measurements: Sequence[str], outcomes: Mapping[str, Sequence[str]] | Sequence[str],
                  cover: Iterable[Iterable[str]] | None = None, name: str = "") -> CausalScenario:
    """Every measurement initially enabled.  ``outcomes`` may be one shared list."""
    if not isinstance(outcomes, Mapping):
        outcomes = {x: tuple(outcomes) for x in measurements}
    return build_scenario(measurements, outcomes, "flat", cover=cover, name=name)


def flat_strategy_to_assignment(sigma: NStrategy) -> dict[str, str]:
    M = sigma.scenario
    if not M.is_flat:
        raise ScenarioNotFlat("assignments correspond to strategies only over flat scenarios")
    (top,) = sigma.maximal
    return dict(top)


def assignment_to_flat_strategy(M: CausalScenario, assignment: Mapping[str, str]) -> NStrategy:
    """The unique strategy over a flat scenario answering each measurement as given."""
    if not M.is_flat:
        raise ScenarioNotFlat("assignments correspond to strategies only over flat scenarios")
    if set(assignment) != set(M.measurements):
        raise ScenarioError("assignment must cover exactly the scenario's measurements")
    for x, o in assignment.items():
        if o not in M.outcomes_of(x):
            raise ScenarioError(f"{o!r} is not an outcome of {x!r}")
    return NStrategy(M, frozenset([frozenset(assignment.items())]))


def flat_assignments(M: CausalScenario) -> list[dict[str, str]]:
    return [dict(zip(M.measurements, outs)) for outs in product(*M.outcomes)]


# -- GP scenarios ------------------------------------------------------------------------

@dataclass(frozen=True)
class GPScenario:
    sites: tuple[str, ...]
    inputs: Mapping[str, tuple[str, ...]]
    outputs: Mapping[str, tuple[str, ...]]
    order: frozenset  # strict order: pairs (a, b) meaning a < b
    name: str = ""

    def __post_init__(self):
        sites = set(self.sites)
        if len(sites) != len(self.sites):
            raise ScenarioError("duplicate site ids")
        for a, b in self.order:
            if a not in sites or b not in sites:
                raise ScenarioError(f"order mentions unknown site in ({a!r}, {b!r})")
            if a == b:
                raise ScenarioError(f"order is not irreflexive at {a!r}")
            if (b, a) in self.order:
                raise ScenarioError(f"order is not antisymmetric on {a!r}, {b!r}")
        for a, b in self.order:
            for c, d in self.order:
                if b == c and (a, d) not in self.order:
                    raise ScenarioError(f"order is not transitive: {a}<{b}<{d} but not {a}<{d}")
        for w in self.sites:
            if not self.inputs.get(w) or not self.outputs.get(w):
                raise ScenarioError(f"site {w!r} needs nonempty inputs and outputs")

    def below(self, w: str) -> list[str]:
        return [v for v in self.sites if (v, w) in self.order]

    def is_lower_set(self, lam: Iterable[str]) -> bool:
        lam = set(lam)
        return all(set(self.below(w)) <= lam for w in lam)


def gp_measurement(site: str, inp: str) -> str:
    return f"{site}{inp}"


def gp_from_json(raw: Mapping[str, Any]) -> GPScenario:
    try:
        sites = [s["id"] for s in raw["sites"]]
        inputs = {s["id"]: tuple(map(str, s["inputs"])) for s in raw["sites"]}
        outputs = {s["id"]: tuple(map(str, s["outputs"])) for s in raw["sites"]}
    except (KeyError, TypeError):
        raise ScenarioError("GP scenario needs 'sites' with 'id', 'inputs', 'outputs'") from None
    order = frozenset((str(a), str(b)) for a, b in raw.get("order", []))
    return GPScenario(tuple(sites), inputs, outputs, order, str(raw.get("name", "")))


def gp_to_causal(gp: GPScenario) -> CausalScenario:
    """Encode a GP scenario.

    Measurement ``(w, i)`` is enabled by any section that performs exactly one
    input at every site strictly below ``w``.  Inputs at one site are mutually
    exclusive.  The attached cover is the Bell cover: one input per site.
    """
    measurements, outcomes = [], {}
    for w in gp.sites:
        for i in gp.inputs[w]:
            m = gp_measurement(w, i)
            measurements.append(m)
            outcomes[m] = gp.outputs[w]
    enabling = []
    for w in gp.sites:
        past = gp.below(w)
        choices = [[(gp_measurement(v, i), o) for i in gp.inputs[v] for o in gp.outputs[v]]
                   for v in past]
        for i in gp.inputs[w]:
            for premise in product(*choices):
                enabling.append((premise, gp_measurement(w, i)))
    exclusive = [[gp_measurement(w, i) for i in gp.inputs[w]]
                 for w in gp.sites if len(gp.inputs[w]) > 1]
    cover = [[gp_measurement(w, i) for w, i in zip(gp.sites, pick)]
             for pick in product(*(gp.inputs[w] for w in gp.sites))]
    return build_scenario(measurements, outcomes, enabling, cover=cover,
                          exclusive=exclusive, name=gp.name)


def gp_contexts(gp: GPScenario, lower: Iterable[str]) -> list[list[str]]:
    """Contexts choosing one input per site of a lower set."""
    lower = [w for w in gp.sites if w in set(lower)]
    if not gp.is_lower_set(lower):
        raise ScenarioError(f"{lower} is not down-closed in the causal order")
    return [[gp_measurement(w, i) for w, i in zip(lower, pick)]
            for pick in product(*(gp.inputs[w] for w in lower))]


def is_causally_secured(M: CausalScenario, U: Iterable[str]) -> bool:
    """Whether some history of the restricted scenario performs all of ``U``."""
    U = frozenset(U)
    return any(dom(s) == U for s in enumerate_histories(restrict_scenario(M, U)))


def two_chain_gp() -> GPScenario:
    return GPScenario(("A", "B"), {"A": BITS, "B": BITS}, {"A": BITS, "B": BITS},
                      frozenset({("A", "B")}), "chsh-2chain")


def chsh_2chain() -> CausalScenario:
    return gp_to_causal(two_chain_gp())


def chsh_flat() -> CausalScenario:
    X = ["A0", "A1", "B0", "B1"]
    cover = [[f"A{i}", f"B{j}"] for i in BITS for j in BITS]
    return flat_scenario(X, BITS, cover, "chsh-flat")


def pr_table(i: str, j: str) -> dict[tuple[str, str], Fraction]:
    target = int(i) & int(j)
    return {(a, b): Fraction(1, 2) for a in BITS for b in BITS if int(a) ^ int(b) == target}


def pr_box_flat() -> EmpiricalModel:
    M = chsh_flat()
    return flat_model_from_tables(M, [((f"A{i}", f"B{j}"), pr_table(i, j))
                                      for i in BITS for j in BITS])


def two_chain_strategy(M: CausalScenario, s_a, s_b, context: Sequence[str] | None = None
                       ) -> NStrategy:
    """Strategy of the 2-chain from ``s_a(i)`` and ``s_b(i, j)`` (bits as ints).

    With ``context`` the strategy is built over that sub-scenario instead.
    """
    MU = M if context is None else restrict_scenario(M, context)
    tops = []
    for i in BITS:
        a = f"A{i}"
        if a not in MU.index:
            continue
        ea = (a, str(s_a(int(i))))
        bobs = [(f"B{j}", str(s_b(int(i), int(j)))) for j in BITS if f"B{j}" in MU.index]
        if bobs:
            tops.extend(frozenset({ea, eb}) for eb in bobs)
        else:
            tops.append(frozenset({ea}))
    return validate_n_strategy(MU, tops)


def pr_box_2chain() -> EmpiricalModel:
    """PR correlations on the 2-chain, as distributions over local strategies."""
    M = chsh_2chain()
    contexts, dists = [], []
    for C in M.cover:
        ctx = M.sorted_measurements(C)
        i, j = int(ctx[0][1]), int(ctx[1][1])
        weights = {}
        for (a, b), w in pr_table(str(i), str(j)).items():
            sigma = two_chain_strategy(M, lambda _i, a=a: a, lambda _i, _j, b=b: b, ctx)
            weights[sigma] = w
        contexts.append(C)
        dists.append(Dist(RATIONAL, weights))
    return EmpiricalModel(M, tuple(contexts), tuple(dists))


def pr_mixture_2chain() -> Dist:
    """Half (s_A = 0, s_B = x.y), half (s_A = 1, s_B = x.y + 1)."""
    M = chsh_2chain()
    s1 = two_chain_strategy(M, lambda i: 0, lambda i, j: i & j)
    s2 = two_chain_strategy(M, lambda i: 1, lambda i, j: (i & j) ^ 1)
    return Dist(RATIONAL, {s1: Fraction(1, 2), s2: Fraction(1, 2)})


# -- GHZ and Anders-Browne ----------------------------------------------------------------

GHZ_MEASUREMENTS = ("A0", "A1", "B0", "B1", "C0", "C1")
# basis index per site: 0 is X, 1 is Y
GHZ_TABLE_CONTEXTS = (("A0", "B1", "C1"), ("A1", "B0", "C1"), ("A1", "B1", "C0"),
                      ("A0", "B0", "C0"))
GHZ_EXTRA_CONTEXTS = (("A0", "B0", "C1"), ("A0", "B1", "C0"), ("A1", "B0", "C0"),
                      ("A1", "B1", "C1"))


def ghz_table(context: Sequence[str]) -> dict[tuple[str, ...], Fraction]:
    """Outcome distribution of one GHZ context (outcome "0" is +1, "1" is -1).

    Contexts with an even number of Y's are uniform on outcome strings whose
    parity is (number of Y's / 2) mod 2; the others are uniform on all strings.
    """
    ys = sum(int(x[1]) for x in context)
    rows = list(product(BITS, repeat=len(context)))
    if ys % 2:
        return {r: Fraction(1, len(rows)) for r in rows}
    parity = (ys // 2) % 2
    keep = [r for r in rows if sum(map(int, r)) % 2 == parity]
    return {r: Fraction(1, len(keep)) for r in keep}


def ghz_scenario(cover: str = "table", prefix: str = "") -> CausalScenario:
    """Flat GHZ scenario; ``cover`` is "table" (4 contexts), "extended" (8) or "bell"."""
    X = [prefix_measurement(prefix, x) for x in GHZ_MEASUREMENTS]
    if cover == "table":
        ctxs = GHZ_TABLE_CONTEXTS
    elif cover in ("extended", "bell"):
        ctxs = GHZ_TABLE_CONTEXTS + GHZ_EXTRA_CONTEXTS
    else:
        raise ValueError(f"unknown GHZ cover {cover!r}")
    ctxs = [[prefix_measurement(prefix, x) for x in c] for c in ctxs]
    return flat_scenario(X, BITS, ctxs, "ghz" + ("-" + cover if cover != "table" else ""))


def prefix_measurement(prefix: str, x: str) -> str:
    return f"{x[0]}{prefix}{x[1:]}" if prefix else x


def ghz_model(extended: bool = False) -> EmpiricalModel:
    M = ghz_scenario("extended" if extended else "table")
    ctxs = GHZ_TABLE_CONTEXTS + (GHZ_EXTRA_CONTEXTS if extended else ())
    return flat_model_from_tables(M, [(c, ghz_table(c)) for c in ctxs])


def anders_browne_labelling(prefix: str = "") -> dict[str, dict[str, int]]:
    """Outcome bits under which the XOR of a gate's three outcomes is AND(i, j).

    With outcome "0" read as bit 0 everywhere the XOR of the three bits is
    OR(i, j).  Reading the Y-basis outcomes at sites A and B inverted adds
    i + j (mod 2) to the XOR, which turns OR into AND.
    """
    lab = {}
    for x in GHZ_MEASUREMENTS:
        flipped = x in ("A1", "B1")
        lab[prefix_measurement(prefix, x)] = {"0": int(flipped), "1": int(not flipped)}
    return lab


def _e_strategy_from_rule(M: CausalScenario, allowed, depth: int, closure: str) -> EStrategy:
    """Experimenter strategy generated by the move rule ``allowed(h)``.

    The rule is followed from the empty history, accepting every outcome,
    until ``depth`` events have occurred; those complete runs are terminal.
    With ``closure="hist"`` the strategy is the down-closure of the runs, which
    over a flat scenario forgets the order of moves; with ``closure="play"``
    it is the tree of positions the rule actually visits.
    """
    visited = {frozenset()}
    runs = set()
    frontier = [frozenset()]
    while frontier:
        new = set()
        for h in frontier:
            if len(h) == depth:
                runs.add(h)
                continue
            acc = set(accessible_measurements(M, h))
            moves = allowed(h)
            if not moves:
                raise ScenarioError(f"move rule stops early at {sorted(h)}")
            for x in moves:
                if x not in acc:
                    raise ScenarioError(f"{x!r} is not accessible after {sorted(h)}")
                new.update(h | {(x, o)} for o in M.outcomes_of(x))
        visited |= new
        frontier = list(new)
    given = runs if closure == "hist" else visited
    return validate_e_strategy(M, given, runs, closure=closure)


def anders_browne_e_strategy(i: int, j: int, M: CausalScenario | None = None) -> EStrategy:
    """Measure ``A_i`` and ``B_j`` (either order), then ``C_{i xor j}``.

    Runs stop after the three measurements although the flat GHZ scenario
    leaves others accessible, so the result fails the strict co-totality check.
    """
    M = M if M is not None else ghz_scenario()
    a, b, c = f"A{i}", f"B{j}", f"C{i ^ j}"

    def allowed(h):
        done = dom(h)
        moves = [x for x in (a, b) if x not in done]
        if not moves and c not in done:
            moves.append(c)
        return moves

    return _e_strategy_from_rule(M, allowed, 3, "hist")


def two_block_ghz_scenario() -> CausalScenario:
    first, second = ghz_scenario(), ghz_scenario(prefix="'")
    X = list(first.measurements) + list(second.measurements)
    cover = [a | b for a in first.cover for b in second.cover]
    return flat_scenario(X, BITS, cover, "ghz-two-block")


def two_block_ghz_model() -> EmpiricalModel:
    M = two_block_ghz_scenario()
    b1 = [(c, ghz_table(c)) for c in GHZ_TABLE_CONTEXTS]
    b2 = [([prefix_measurement("'", x) for x in c], ghz_table(c)) for c in GHZ_TABLE_CONTEXTS]
    return flat_model_from_tables(M, product_tables(b1, b2))


def chained_and_e_strategy(i: int, j: int, j2: int,
                           labelling: Mapping[str, Mapping[str, int]] | None = None,
                           M: CausalScenario | None = None) -> EStrategy:
    """Two AND gates with feedforward.

    Gate one measures ``A_i``, ``B_j`` then ``C_{i xor j}``; ``B'_{j2}`` is a
    free input available from the start.  Once gate one is complete the first
    primed input is the XOR of its outcome bits, which selects ``A'``; after
    ``A'`` and ``B'`` comes ``C'`` indexed by the XOR of the primed inputs.
    """
    M = M if M is not None else two_block_ghz_scenario()
    lab = labelling if labelling is not None else {
        **anders_browne_labelling(), **anders_browne_labelling("'")}
    a, b, c, b2 = f"A{i}", f"B{j}", f"C{i ^ j}", f"B'{j2}"

    def allowed(h):
        ev = dict(h)
        moves = [x for x in (a, b, b2) if x not in ev]
        if a in ev and b in ev and c not in ev:
            moves.append(c)
        if c in ev:
            p = lab[a][ev[a]] ^ lab[b][ev[b]] ^ lab[c][ev[c]]
            a2 = f"A'{p}"
            if a2 not in ev:
                moves.append(a2)
            elif b2 in ev:
                c2 = f"C'{p ^ j2}"
                if c2 not in ev:
                    moves.append(c2)
        return moves

    return _e_strategy_from_rule(M, allowed, 6, "play")


# -- gluing counterexample -----------------------------------------------------------------

def gluing_scenario() -> CausalScenario:
    return build_scenario(
        ["x", "y", "z"], {w: BITS for w in "xyz"},
        [((), "x"), ((), "y"), ((("x", "0"), ("y", "0")), "z")],
        cover=[["x", "z"], ["y", "z"]], name="gluing")


def gluing_counterexample():
    """The scenario, its cover, and the compatible pair that glues non-uniquely."""
    M = gluing_scenario()
    cover = [frozenset({"x", "z"}), frozenset({"y", "z"})]
    s1 = validate_n_strategy(restrict_scenario(M, cover[0]), [[("x", "0")]])
    s2 = validate_n_strategy(restrict_scenario(M, cover[1]), [[("y", "0")]])
    return M, cover, [s1, s2]

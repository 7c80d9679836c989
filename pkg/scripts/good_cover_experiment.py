#!/usr/bin/env python3
"""Experiment: which covers make gluing of compatible families unique?

For random small causal scenarios and every two-element cover, glue every
compatible family and tally the outcomes, split by whether each cover element
is causally secured (some history of the restricted scenario performs all of
it) and by whether the cover is closed under intersection of premises, i.e.
every enabling premise of a measurement in U lies inside U.  This only
gathers evidence; it does not settle the question.

usage: python3 scripts/good_cover_experiment.py [--seeds N] [--measurements K]
"""

from __future__ import annotations

import argparse
import itertools
import random
from collections import Counter

from causalctx.core import build_scenario, restrict_scenario
from causalctx.encodings import is_causally_secured
from causalctx.strategies import enumerate_n_strategies, glue, restrict_strategy


def random_scenario(rng: random.Random, k: int):
    xs = [f"x{i}" for i in range(k)]
    enabling = []
    for x in xs:
        others = [y for y in xs if y != x]
        for _ in range(rng.randint(1, 2)):
            size = rng.choice([0, 0, 1, 1, 2])
            premise = [(y, rng.choice("01")) for y in rng.sample(others, min(size, len(others)))]
            enabling.append((premise, x))
    return build_scenario(xs, {x: "01" for x in xs}, enabling)


def premise_closed(M, U) -> bool:
    return all({y for y, _ in p} <= U for x in U for p in M.premises(x))


def run(seeds: int, k: int) -> Counter:
    tally: Counter = Counter()
    for seed in range(seeds):
        rng = random.Random(seed)
        M = random_scenario(rng, k)
        X = frozenset(M.measurements)
        subsets = [frozenset(c) for r in range(1, k) for c in itertools.combinations(sorted(X), r)]
        for U1, U2 in itertools.combinations(subsets, 2):
            if U1 | U2 != X:
                continue
            secured = is_causally_secured(M, U1) and is_causally_secured(M, U2)
            closed = premise_closed(M, U1) and premise_closed(M, U2)
            g1 = enumerate_n_strategies(restrict_scenario(M, U1))
            g2 = enumerate_n_strategies(restrict_scenario(M, U2))
            for s1 in g1:
                for s2 in g2:
                    if restrict_strategy(s1, U1 & U2) != restrict_strategy(s2, U1 & U2):
                        continue
                    rep = glue(M, [U1, U2], [s1, s2])
                    tally[secured, closed, rep.outcome] += 1
    return tally


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=40)
    ap.add_argument("--measurements", type=int, default=3)
    args = ap.parse_args()
    tally = run(args.seeds, args.measurements)
    print(f"{'secured':8s} {'premise-closed':15s} {'outcome':22s} families")
    for (secured, closed, outcome), n in sorted(tally.items()):
        print(f"{str(secured):8s} {str(closed):15s} {outcome:22s} {n}")


if __name__ == "__main__":
    main()

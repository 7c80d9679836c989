"""Independent reference implementations used only by the tests.

Each oracle works straight from a definition, by brute force, and shares no
code with the package beyond the scenario container itself.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from causalctx.core import build_scenario


# -- scenarios ------------------------------------------------------------------

def s1():
    return build_scenario(["x"], {"x": "01"}, [((), "x")], name="S1")


def s2(cover=None):
    return build_scenario(["x", "y", "z"], {w: "01" for w in "xyz"},
                          [((), "x"), ((), "y"), ((("x", "0"), ("y", "0")), "z")],
                          cover=cover, name="S2")


def random_causal_scenario(rng: random.Random, max_events: int = 8, cover: bool = False):
    """Random scenario with at most ``max_events`` events in total, no exclusive groups."""
    k = rng.randint(1, 4)
    sizes = [1] * k
    budget = max_events - k
    for i in range(k):
        extra = rng.randint(0, min(2, budget))
        sizes[i] += extra
        budget -= extra
    xs = [f"m{i}" for i in range(k)]
    outs = {x: [str(o) for o in range(n)] for x, n in zip(xs, sizes)}
    enabling = []
    for x in xs:
        others = [y for y in xs if y != x]
        for _ in range(rng.randint(0, 2)):
            size = rng.choice([0, 0, 1, 1, 2])
            chosen = rng.sample(others, min(size, len(others)))
            enabling.append(([(y, rng.choice(outs[y])) for y in chosen], x))
    if not any(not p for p, _ in enabling):
        enabling.append(([], xs[0]))
    cov = None
    if cover:
        cov = _random_cover(rng, xs)
    return build_scenario(xs, outs, enabling, cover=cov)


def _random_cover(rng: random.Random, xs):
    cov = []
    while not cov or set().union(*cov) != set(xs):
        size = rng.randint(1, min(3, len(xs)))
        c = sorted(rng.sample(xs, size))
        if c not in cov:
            cov.append(c)
    return cov


def random_flat_scenario(rng: random.Random):
    k = rng.randint(1, 4)
    xs = [f"f{i}" for i in range(k)]
    # cyclic covers are where contextuality lives; they need two-valued measurements
    cyclic = k >= 3 and rng.random() < 0.7
    lo = 2 if cyclic else 1
    outs = {x: [str(o) for o in range(rng.randint(lo, 3))] for x in xs}
    # keep the global assignment count modest
    while np.prod([len(v) for v in outs.values()]) > 36:
        x = rng.choice(xs)
        if len(outs[x]) > lo:
            outs[x].pop()
    if cyclic:
        cover = [[xs[i], xs[(i + 1) % k]] for i in range(k)]
    else:
        cover = _random_cover(rng, xs)
    return build_scenario(xs, outs, "flat", cover=cover)


# -- histories and strategies by brute force ---------------------------------------

def naive_accessible(M, s, x) -> bool:
    done = {m for m, _ in s}
    if x in done:
        return False
    for g in M.exclusive:
        if x in g and done & (g - {x}):
            return False
    return any(e.target == x and e.premise <= s for e in M.enabling)


def brute_histories(M) -> set:
    """Consistent sections with some event ordering that is accessible step by step."""
    found = set()
    choices = [[None] + [(x, o) for o in os] for x, os in zip(M.measurements, M.outcomes)]
    for pick in itertools.product(*choices):
        events = [e for e in pick if e is not None]
        for order in itertools.permutations(events):
            built = frozenset()
            ok = True
            for x, o in order:
                if not naive_accessible(M, built, x):
                    ok = False
                    break
                built = built | {(x, o)}
            if ok:
                found.add(frozenset(events))
                break
    return found


def brute_strategies(M, containing=frozenset()) -> list[frozenset]:
    """All down-closed, deterministic, total subsets of Hist(M) that include
    ``containing`` (small M only)."""
    hist = sorted(brute_histories(M), key=lambda s: (len(s), sorted(s)))
    base = {frozenset()} | set(containing)
    rest = [h for h in hist if h not in base]
    if len(rest) > 18:
        raise ValueError("too many histories for subset enumeration")
    out = []
    for mask in range(1 << len(rest)):
        sigma = base | {h for i, h in enumerate(rest) if mask >> i & 1}
        if not all(h in sigma for t in sigma for h in hist if h <= t):
            continue
        ok = True
        for s in sigma:
            for x in M.measurements:
                if naive_accessible(M, s, x):
                    n = sum(1 for o in M.outcomes_of(x) if s | {(x, o)} in sigma)
                    if n != 1:
                        ok = False
                        break
            if not ok:
                break
        if ok:
            out.append(frozenset(sigma))
    return out


# -- flat contextuality by assignments ---------------------------------------------

def assignments(M):
    for pick in itertools.product(*M.outcomes):
        yield dict(zip(M.measurements, pick))


def assignment_lp(M, tables):
    """Columns: global assignments; rows: (context, local outcome tuple) plus normalisation.

    ``tables`` is a list of (context list, {outcome tuple: weight}).
    """
    glob = list(assignments(M))
    rows, rhs = [], []
    for ctx, table in tables:
        for outs in itertools.product(*(M.outcomes_of(x) for x in ctx)):
            rows.append([1 if tuple(g[x] for x in ctx) == outs else 0 for g in glob])
            rhs.append(Fraction(table.get(outs, 0)))
    return glob, rows, rhs


def assignment_reference_contextual(M, tables) -> bool:
    """Float reference: infeasibility of the assignment LP (scipy HiGHS)."""
    glob, rows, rhs = assignment_lp(M, tables)
    A = np.array(rows + [[1] * len(glob)], dtype=float)
    b = np.array([float(v) for v in rhs] + [1.0])
    res = linprog(np.zeros(len(glob)), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    return res.status == 2


def assignment_reference_fraction(M, tables) -> float:
    glob, rows, rhs = assignment_lp(M, tables)
    res = linprog(-np.ones(len(glob)), A_ub=np.array(rows, dtype=float),
                  b_ub=np.array([float(v) for v in rhs]), bounds=(0, None), method="highs")
    return 1.0 + res.fun


def random_flat_tables(rng: random.Random, M, contextual_bias: float = 0.5):
    """Context tables of a compatible model from a (possibly signed) global weighting.

    A random convex mixture of assignments is perturbed by a signed term; the
    result is kept only if every context marginal is non-negative.
    """
    glob = list(assignments(M))
    while True:
        w = [Fraction(0)] * len(glob)
        for _ in range(rng.randint(1, 3)):
            w[rng.randrange(len(glob))] += Fraction(rng.randint(1, 4))
        total = sum(w)
        w = [v / total for v in w]
        if rng.random() < contextual_bias and len(glob) > 1:
            i, j = rng.sample(range(len(glob)), 2)
            eps = Fraction(rng.randint(1, 3), 8)
            w[i] -= eps
            w[j] += eps
        tables = []
        ok = True
        for ctx in M.cover:
            ctx = M.sorted_measurements(ctx)
            table: dict = {}
            for g, v in zip(glob, w):
                k = tuple(g[x] for x in ctx)
                table[k] = table.get(k, Fraction(0)) + v
            if any(v < 0 for v in table.values()):
                ok = False
                break
            tables.append((ctx, {k: v for k, v in table.items() if v}))
        if ok:
            return tables


def random_compatible_vertex(rng: random.Random, M):
    """Context tables at a vertex of the polytope of compatible models.

    A random objective is optimised exactly over normalised, non-negative
    tables with agreeing marginals; such vertices are often contextual.  Only
    the input is generated this way; verdicts are checked elsewhere.
    """
    from causalctx.lp import RationalLP, solve

    ctxs = [M.sorted_measurements(c) for c in M.cover]
    var = []
    for i, ctx in enumerate(ctxs):
        for outs in itertools.product(*(M.outcomes_of(x) for x in ctx)):
            var.append((i, outs))
    n = len(var)
    rows, rhs = [], []
    for i in range(len(ctxs)):
        rows.append([1 if v[0] == i else 0 for v in var])
        rhs.append(1)
    for i in range(len(ctxs)):
        for j in range(i + 1, len(ctxs)):
            shared = [x for x in ctxs[i] if x in ctxs[j]]
            for outs in itertools.product(*(M.outcomes_of(x) for x in shared)):
                want = dict(zip(shared, outs))
                row = []
                for k, o in var:
                    if k not in (i, j):
                        row.append(0)
                        continue
                    a = dict(zip(ctxs[k], o))
                    hit = all(a[x] == want[x] for x in shared)
                    row.append((1 if k == i else -1) if hit else 0)
                rows.append(row)
                rhs.append(0)
    # reward an equal/differ relation on each pair context, with an odd number
    # of "differ" so that no assignment satisfies every pair
    differ = [rng.random() < 0.5 for _ in ctxs]
    if sum(differ) % 2 == 0:
        differ[0] = not differ[0]
    cost = []
    for k, o in var:
        bonus = 6 if len(o) == 2 and (o[0] != o[1]) == differ[k] else 0
        cost.append(rng.randint(-2, 2) + bonus)
    res = solve(RationalLP(cost, rows, rhs))
    tables = []
    for i, ctx in enumerate(ctxs):
        tables.append((ctx, {o: w for (k, o), w in zip(var, res.primal) if k == i and w}))
    return tables


def random_flat_model_tables(rng: random.Random, M):
    """Mixture of a compatible-polytope vertex and a classical model."""
    vertex = random_compatible_vertex(rng, M)
    classical = random_flat_tables(rng, M, 0.0)
    lam = Fraction(rng.randint(1, 4), 4)
    out = []
    for (ctx, a), (_, b) in zip(vertex, classical):
        keys = set(a) | set(b)
        table = {k: lam * a.get(k, 0) + (1 - lam) * b.get(k, 0) for k in keys}
        out.append((ctx, {k: v for k, v in table.items() if v}))
    return out


# -- exact vertex search -----------------------------------------------------------

def _row_reduce(rows, rhs):
    """Reduced row echelon form of [rows | rhs]; None if inconsistent."""
    m = len(rows)
    n = len(rows[0]) if rows else 0
    aug = [[Fraction(v) for v in r] + [Fraction(b)] for r, b in zip(rows, rhs)]
    r = 0
    for c in range(n):
        p = next((i for i in range(r, m) if aug[i][c] != 0), None)
        if p is None:
            continue
        aug[r], aug[p] = aug[p], aug[r]
        piv = aug[r][c]
        aug[r] = [v / piv for v in aug[r]]
        for i in range(m):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * bb for a, bb in zip(aug[i], aug[r])]
        r += 1
    if any(aug[i][n] != 0 for i in range(r, m)):
        return None
    return aug[:r]


def _solve_square(aug_rows, cols):
    """Solution of the square system on ``cols``, or None if singular."""
    k = len(cols)
    a = [[row[c] for c in cols] + [row[-1]] for row in aug_rows]
    for c in range(k):
        p = next((i for i in range(c, k) if a[i][c] != 0), None)
        if p is None:
            return None
        a[c], a[p] = a[p], a[c]
        piv = a[c][c]
        a[c] = [v / piv for v in a[c]]
        for i in range(k):
            if i != c and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return [a[i][k] for i in range(k)]


def vertex_search_feasible(eq_rows, eq_rhs, le_rows=(), le_rhs=()) -> bool:
    """Feasibility of {A x = b, C x <= d, x >= 0} by enumerating bases.

    Inequalities get slack columns.  If the system is feasible it has a basic
    feasible solution, and its support extends to a set of rank(A) independent
    columns on which the solution is unique, so trying every such set is
    exhaustive.
    """
    n = len(eq_rows[0]) if eq_rows else len(le_rows[0])
    m_le = len(le_rows)
    rows = [list(r) + [0] * m_le for r in eq_rows]
    rows += [list(r) + [1 if j == i else 0 for j in range(m_le)] for i, r in enumerate(le_rows)]
    reduced = _row_reduce(rows, list(eq_rhs) + list(le_rhs))
    if reduced is None:
        return False
    rank = len(reduced)
    if rank == 0:
        return True  # b = 0 after reduction: x = 0 works
    for S in itertools.combinations(range(n + m_le), rank):
        x = _solve_square(reduced, S)
        if x is not None and all(v >= 0 for v in x):
            return True
    return False


def random_lp_rows(rng: random.Random, m: int, n: int, lo: int = -3, hi: int = 3):
    return [[rng.randint(lo, hi) for _ in range(n)] for _ in range(m)]


# -- GHZ ------------------------------------------------------------------------

GHZ_PARITY_ROWS = {
    # context -> required XOR of the outcome bits (outcome "0" = +1)
    ("A0", "B1", "C1"): 1,
    ("A1", "B0", "C1"): 1,
    ("A1", "B1", "C0"): 1,
    ("A0", "B0", "C0"): 0,
}


def ghz_assignment_violations() -> list[int]:
    """For each of the 64 global assignments, how many parity rows it breaks."""
    out = []
    names = ["A0", "A1", "B0", "B1", "C0", "C1"]
    for bits in itertools.product((0, 1), repeat=6):
        a = dict(zip(names, bits))
        out.append(sum(1 for ctx, p in GHZ_PARITY_ROWS.items()
                       if a[ctx[0]] ^ a[ctx[1]] ^ a[ctx[2]] != p))
    return out

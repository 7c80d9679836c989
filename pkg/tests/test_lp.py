import random
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from causalctx.encodings import ghz_model
from causalctx.lp import LPResult, RationalLP, solve, verify_certificate
from causalctx.models import decide_causal_contextuality

from oracles import random_lp_rows, vertex_search_feasible


def test_maximise_bounded_variable():
    lp = RationalLP([1], le_rows=[[1]], le_rhs=[1])
    res = solve(lp)
    assert res.status == "optimal"
    assert res.objective_value == 1
    assert verify_certificate(lp, res)


def test_infeasible_system_has_farkas_certificate():
    lp = RationalLP.feasibility([[1, 1], [1, -1]], [1, 3])
    res = solve(lp)
    assert res.status == "infeasible"
    y = res.dual_certificate
    assert verify_certificate(lp, res)
    # y.A >= 0 columnwise and y.b < 0
    assert y[0] + y[1] >= 0 and y[0] - y[1] >= 0
    assert y[0] * 1 + y[1] * 3 < 0


def test_unbounded_has_a_ray():
    lp = RationalLP([1, 0], le_rows=[[-1, 1]], le_rhs=[2])
    res = solve(lp)
    assert res.status == "unbounded"
    assert verify_certificate(lp, res)


def test_ghz_incidence_system_is_infeasible():
    v = decide_causal_contextuality(ghz_model())
    assert v.result.status == "infeasible"
    assert verify_certificate(v.lp, v.result)


def test_degenerate_problem_terminates():
    # classic cycling example for the largest-coefficient rule
    lp = RationalLP(
        [Fraction(3, 4), -150, Fraction(1, 50), -6],
        le_rows=[[Fraction(1, 4), -60, Fraction(-1, 25), 9],
                 [Fraction(1, 2), -90, Fraction(-1, 50), 3],
                 [0, 0, 1, 0]],
        le_rhs=[0, 0, 1])
    res = solve(lp)
    assert res.status == "optimal"
    assert res.objective_value == Fraction(1, 20)
    assert verify_certificate(lp, res)


def test_mismatched_shapes_rejected():
    with pytest.raises(ValueError):
        RationalLP([1, 2], [[1]], [1])
    with pytest.raises(ValueError):
        RationalLP([1], [[1]], [])


def tamper(res: LPResult, which: str, k: int = 0, delta=Fraction(1, 7)) -> LPResult:
    vec = list(getattr(res, which))
    vec[k] += delta
    return LPResult(res.status, **{**{"primal": res.primal, "dual_certificate": res.dual_certificate,
                                      "objective_value": res.objective_value, "ray": res.ray},
                                   which: vec})


def test_tampered_farkas_vector_fails():
    lp = RationalLP.feasibility([[1, 1], [1, -1]], [1, 3])
    res = solve(lp)
    assert res.dual_certificate == [1, -1]
    # Farkas vectors are not unique: a small push along the slack stays valid
    assert verify_certificate(lp, tamper(res, "dual_certificate", 0, Fraction(1, 7)))
    assert not verify_certificate(lp, tamper(res, "dual_certificate", 0, Fraction(-1, 7)))
    bad = LPResult(res.status, None, [-v for v in res.dual_certificate], None)
    assert not verify_certificate(lp, bad)


def test_tampered_optimal_certificates_fail():
    lp = RationalLP([1, 2], le_rows=[[1, 1], [0, 1]], le_rhs=[4, 3])
    res = solve(lp)
    assert res.objective_value == 7
    assert not verify_certificate(lp, tamper(res, "dual_certificate", 0))
    assert not verify_certificate(lp, tamper(res, "primal", 0))
    wrong_value = LPResult(res.status, res.primal, res.dual_certificate, res.objective_value + 1)
    assert not verify_certificate(lp, wrong_value)
    assert not verify_certificate(lp, LPResult("mystery", None, None, None))


def test_ghz_certificate_tampered():
    v = decide_causal_contextuality(ghz_model())
    y = v.result.dual_certificate
    k = next(i for i, val in enumerate(y) if val)
    bad = list(y)
    bad[k] = -bad[k] * 1000
    assert not verify_certificate(v.lp, LPResult("infeasible", None, bad, None))


def random_lp(rng: random.Random) -> RationalLP:
    n = rng.randint(1, 8)
    m_eq = rng.randint(0, 3)
    m_le = rng.randint(0 if m_eq else 1, 3)
    eq = random_lp_rows(rng, m_eq, n)
    le = random_lp_rows(rng, m_le, n)
    return RationalLP([rng.randint(-3, 3) for _ in range(n)],
                      eq, [rng.randint(-4, 4) for _ in range(m_eq)],
                      le, [rng.randint(-4, 4) for _ in range(m_le)])


CORPUS = [random_lp(random.Random(seed)) for seed in range(300)]


@pytest.mark.parametrize("k", range(len(CORPUS)))
def test_random_corpus_certificates_and_vertex_search(k):
    lp = CORPUS[k]
    res = solve(lp)
    assert verify_certificate(lp, res)
    assert res.feasible == vertex_search_feasible(lp.eq_rows, lp.eq_rhs, lp.le_rows, lp.le_rhs)


@pytest.mark.parametrize("k", range(0, len(CORPUS), 3))
def test_random_corpus_matches_float_reference(k):
    lp = CORPUS[k]
    res = solve(lp)
    ref = linprog(-np.array([float(c) for c in lp.objective]),
                  A_eq=np.array(lp.eq_rows, dtype=float) if lp.eq_rows else None,
                  b_eq=np.array([float(b) for b in lp.eq_rhs]) if lp.eq_rows else None,
                  A_ub=np.array(lp.le_rows, dtype=float) if lp.le_rows else None,
                  b_ub=np.array([float(b) for b in lp.le_rhs]) if lp.le_rows else None,
                  bounds=(0, None), method="highs")
    status = {0: "optimal", 2: "infeasible", 3: "unbounded"}[ref.status]
    assert res.status == status
    if status == "optimal":
        assert float(res.objective_value) == pytest.approx(-ref.fun, abs=1e-9)


@pytest.mark.parametrize("k", range(0, len(CORPUS), 5))
def test_row_scaling_keeps_the_verdict(k):
    lp = CORPUS[k]
    rng = random.Random(k)
    scaled = lp.scaled([Fraction(rng.randint(1, 9), rng.randint(1, 9)) for _ in lp.eq_rows],
                       [Fraction(rng.randint(1, 9), rng.randint(1, 9)) for _ in lp.le_rows])
    a, b = solve(lp), solve(scaled)
    assert a.status == b.status
    assert a.objective_value == b.objective_value
    assert verify_certificate(scaled, b)

from dataclasses import dataclass

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from problems import scalar_problem
from proxident.experiments import make_scenario
from proxident.identification import identification_series
from proxident.inertia import InertiaSchedule
from proxident.regularizers import L1, DistPBall, GroupOnSphere, Nuclear, ZeroCoordinate
from proxident.smooth import CompositeProblem, LeastSquares
from proxident.solvers import (
    ALGORITHMS,
    SolverConfig,
    accelerated_descent_slack,
    check_eq_base,
    in_z,
    prox_grad_step,
    resolve_gamma,
    run,
    run_pg,
    run_provisional,
    test_t1 as reach_test,
    test_t2 as prospective_test,
)


@dataclass(frozen=True)
class NoInertia(InertiaSchedule):
    def next_t(self):
        return 1.0


class Unstructured(L1):
    """l1 with no declared candidate manifolds."""

    def prox(self, u, gamma):
        res = super().prox(u, gamma)
        return res._replace(signature=frozenset())

    def candidates(self):
        return []


def small_lasso(seed, m=8, n=12, lam=0.3, reg=None):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(m, n))
    b = rng.normal(size=m)
    return CompositeProblem(LeastSquares(a, b), reg or L1(n), lam=lam), 3 * rng.normal(size=n)


def counting(problem):
    """Wrap ``problem.prox_grad`` to count forward-backward evaluations."""
    calls = [0]
    inner = problem.prox_grad

    def wrapped(x, gamma):
        calls[0] += 1
        return inner(x, gamma)

    problem.prox_grad = wrapped
    return calls


# -- the one-dimensional example ----------------------------------------------


def test_prox_grad_step_scalar_examples():
    p = scalar_problem()
    res = prox_grad_step(p, 0.5, np.array([1.0]))
    assert res.point[0] == 0.5 and res.signature == frozenset()
    res = prox_grad_step(p, 0.5, np.array([0.0]))
    assert res.point[0] == 0.0 and res.signature == {ZeroCoordinate(0)}


def test_pg_scalar_geometric_and_never_structured():
    tr = run_pg(scalar_problem(), [1.0], SolverConfig(algo="pg", gamma=0.5, max_prox_steps=40, keep_iterates=True))
    for r in tr.records:
        assert r.point[0] == 0.5 ** (r.k + 1)
        assert r.signature == frozenset()


@pytest.mark.parametrize("x0,gamma", [(-1.0, 0.5), (1.0, 1.0)])
def test_pg_scalar_identifies_immediately(x0, gamma):
    tr = run_pg(scalar_problem(), [x0], SolverConfig(algo="pg", gamma=gamma, max_prox_steps=5, keep_iterates=True))
    assert tr.records[0].signature == {ZeroCoordinate(0)}
    assert tr.records[0].point[0] == 0.0
    assert all(r.signature == {ZeroCoordinate(0)} for r in tr.records)


def test_lambda_zero_step_is_gradient_step():
    p = CompositeProblem(LeastSquares([[2.0, 1.0]], [1.0]), L1(2), lam=0.0)
    x = np.array([0.3, -0.2])
    res = prox_grad_step(p, 0.1, x)
    assert np.array_equal(res.point, x - 0.1 * p.smooth.grad(x))


# -- configuration ------------------------------------------------------------


def test_gamma_guard():
    p = scalar_problem()  # L = 1
    for algo in ("apg", "mfista", "t1", "t2"):
        with pytest.raises(ValueError):
            run(p, [1.0], SolverConfig(algo=algo, gamma=1.01, max_prox_steps=4))
    assert resolve_gamma(p, SolverConfig(algo="pg", gamma=1.9)) == 1.9
    with pytest.raises(ValueError):
        resolve_gamma(p, SolverConfig(algo="pg", gamma=2.0))
    with pytest.raises(ValueError):
        resolve_gamma(p, SolverConfig(algo="pg", gamma=0.0))
    assert resolve_gamma(p, SolverConfig(algo="t1")) == pytest.approx(1.0, rel=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(algo="ista")
    with pytest.raises(ValueError):
        SolverConfig(zeta=0.0)
    with pytest.raises(ValueError):
        SolverConfig(max_prox_steps=0)
    with pytest.raises(ValueError):
        run_provisional(scalar_problem(), [1.0], SolverConfig(algo="apg"))
    with pytest.raises(ValueError):
        run(scalar_problem(), [1.0, 2.0], SolverConfig(algo="pg"))
    with pytest.raises(ValueError):
        # a T2 iteration needs two steps
        run(scalar_problem(), [1.0], SolverConfig(algo="t2", max_prox_steps=1))


def test_default_zeta_is_first_step_length():
    p, x0 = small_lasso(0)
    tr = run(p, x0, SolverConfig(algo="t1", max_prox_steps=3))
    step = p.prox_grad(x0, tr.gamma).point
    assert tr.zeta == pytest.approx(float(np.sum((step - x0) ** 2)), rel=1e-15)
    # equality in the first step-length test: membership is the value test
    assert tr.records[0].in_z == (tr.records[0].f_value <= tr.f0)


# -- degenerate equivalences --------------------------------------------------


@pytest.mark.parametrize("algo", ["apg", "mfista"])
def test_zero_inertia_equals_pg(algo):
    p, x0 = small_lasso(1)
    pg = run(p, x0, SolverConfig(algo="pg", max_prox_steps=300, keep_iterates=True))
    other = run(p, x0, SolverConfig(algo=algo, schedule=NoInertia(), max_prox_steps=300, keep_iterates=True))
    # PG decreases F monotonically, so the monotone variant never holds back
    for a, b in zip(pg.records, other.records):
        assert np.array_equal(a.point, b.point)
        assert a.signature == b.signature


@pytest.mark.parametrize("algo", ["t1", "t2"])
@pytest.mark.parametrize("how", ["lambda0", "no-candidates"])
def test_empty_collection_gives_apg(algo, how):
    if how == "lambda0":
        p, x0 = small_lasso(2, lam=0.0)
    else:
        p, x0 = small_lasso(2, reg=Unstructured(12))
    per = 2 if algo == "t2" else 1
    apg = run(p, x0, SolverConfig(algo="apg", max_prox_steps=200, keep_iterates=True))
    prov = run(p, x0, SolverConfig(algo=algo, max_prox_steps=200 * per, keep_iterates=True))
    assert len(apg) == len(prov)
    for a, b in zip(apg.records, prov.records):
        assert np.array_equal(a.point, b.point)
        assert b.accelerated


def test_first_apg_iterate_equals_pg():
    p, x0 = small_lasso(3)
    a = run(p, x0, SolverConfig(algo="apg", max_prox_steps=2, keep_iterates=True))
    b = run(p, x0, SolverConfig(algo="pg", max_prox_steps=2, keep_iterates=True))
    assert a.records[0].alpha == 0.0
    assert np.array_equal(a.records[0].point, b.records[0].point)


# -- Z-set and the two tests ---------------------------------------------------


def test_in_z_examples():
    y = np.array([1.0, 2.0])
    assert in_z(y, y.copy(), 0.5, zeta=1e-3, f0=0.5)
    assert not in_z(y, y.copy(), 0.6, zeta=1e-3, f0=0.5)
    step = y + np.array([np.sqrt(2.0), 0.0])  # squared length 2 = 2 zeta
    assert not in_z(y, step, 0.0, zeta=1.0, f0=1.0)
    step = y + np.array([1.0, 0.0])  # boundary counts as inside
    assert in_z(y, step, 0.0, zeta=1.0, f0=1.0)


def test_t1_examples():
    z3 = ZeroCoordinate(3)
    assert reach_test(frozenset(), frozenset([z3]), True) is False
    assert reach_test(frozenset([z3]), frozenset([z3]), True) is True
    assert reach_test(frozenset([z3, ZeroCoordinate(1)]), frozenset([z3]), True) is True
    assert reach_test(frozenset(), frozenset([z3]), False) is True


def _sphere_problem():
    # f = ||x||^2 / 2, so with gamma = 1/2 the forward step halves x
    return CompositeProblem(LeastSquares(np.eye(2), np.zeros(2), scale=0.5), DistPBall(2, 2), lam=1.0)


def test_t2_examples():
    p = _sphere_problem()
    x_cur, x_prev = np.array([2.4, 0.0]), np.zeros(2)
    acc, plain, extrap = prospective_test(p, 0.5, x_cur, x_prev, 0.5, True)
    assert acc is False
    assert plain.signature == {GroupOnSphere(0)} and extrap.signature == frozenset()
    assert np.allclose(plain.point, [1.0, 0.0])
    acc, _, _ = prospective_test(p, 0.5, x_cur, x_prev, 0.5, False)
    assert acc is True
    acc, plain, extrap = prospective_test(p, 0.5, x_cur, x_prev, 0.0, True)
    assert acc is True
    assert np.array_equal(plain.point, extrap.point) and plain.signature == extrap.signature
    # same signatures: no structural loss
    acc, _, _ = prospective_test(p, 0.5, np.array([2.2, 0.0]), np.array([2.0, 0.0]), 0.5, True)
    assert acc is True


def test_t2_reuses_the_chosen_candidate():
    p, x0 = small_lasso(5)
    tr = run(p, x0, SolverConfig(algo="t2", max_prox_steps=400, keep_iterates=True))
    x_prev, x = tr.x0, tr.x0
    for r in tr.records:
        y = x + r.alpha * (x - x_prev) if r.accelerated else x
        expect = p.prox_grad(y, tr.gamma)
        assert np.array_equal(r.point, expect.point)
        assert r.signature == expect.signature
        x_prev, x = x, r.point


# -- accounting and monotonicity ----------------------------------------------


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from(ALGORITHMS), st.integers(2, 60))
def test_step_accounting(seed, algo, budget):
    p, x0 = small_lasso(seed)
    calls = counting(p)
    tr = run(p, x0, SolverConfig(algo=algo, max_prox_steps=budget))
    steps = tr.prox_steps
    assert calls[0] == steps[-1]
    assert np.all(np.diff(steps) == (2 if algo == "t2" else 1))
    assert steps[-1] <= budget
    assert [r.k for r in tr.records] == list(range(len(tr)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.floats(0.1, 1.0))
def test_pg_monotone(seed, frac):
    p, x0 = small_lasso(seed)
    tr = run(p, x0, SolverConfig(algo="pg", gamma=frac / p.lipschitz, max_prox_steps=200))
    f = np.concatenate([[tr.f0], tr.f_values])
    assert np.all(np.diff(f) <= 1e-12 * (1 + np.abs(f[:-1])))


def test_mfista_monotone_on_fixtures():
    for name in ("fixture-l1", "fixture-ball13", "fixture-ball26", "lasso", "nuclear-small"):
        sc = make_scenario(name, 0)
        tr = run(sc.problem, sc.x0, SolverConfig(algo="mfista", max_prox_steps=500))
        f = np.concatenate([[tr.f0], tr.f_values])
        assert np.all(np.diff(f) <= 0.0), name


def test_mfista_matches_apg_final_value(lasso42):
    cfg = dict(max_prox_steps=20_000)
    fa = run(lasso42.problem, lasso42.x0, SolverConfig(algo="apg", **cfg)).f_values[-1]
    fm = run(lasso42.problem, lasso42.x0, SolverConfig(algo="mfista", **cfg)).f_values[-1]
    assert abs(fa - fm) <= 1e-9


def test_early_stop_on_suboptimality():
    p, x0 = small_lasso(6)
    full = run(p, x0, SolverConfig(algo="apg", max_prox_steps=3000))
    f_star = full.f_values.min()
    tr = run(p, x0, SolverConfig(algo="apg", max_prox_steps=3000, f_star_hint=f_star, stop_subopt=1e-6))
    assert len(tr) < len(full)
    assert tr.f_values[-1] - f_star <= 1e-6
    assert np.all(tr.f_values[:-1] - f_star > 1e-6)


def test_callback_can_stop():
    p, x0 = small_lasso(7)
    tr = run(p, x0, SolverConfig(algo="apg", max_prox_steps=100), callback=lambda k, **_: k == 9)
    assert len(tr) == 10


# -- behaviour on the lasso scenario -----------------------------------------


def test_apg_beats_pg_at_500_steps(lasso42, lasso42_ref):
    pg = run(lasso42.problem, lasso42.x0, SolverConfig(algo="pg", max_prox_steps=500))
    apg = run(lasso42.problem, lasso42.x0, SolverConfig(algo="apg", max_prox_steps=500))
    f_star = lasso42_ref.f_star
    assert apg.f_values[-1] - f_star < pg.f_values[-1] - f_star


def test_t1_stops_resetting_after_final_identification(lasso42, lasso42_ref):
    tr = run(lasso42.problem, lasso42.x0, SolverConfig(algo="t1", max_prox_steps=20_000))
    s = identification_series(tr, lasso42_ref)
    full = (s.correct == s.n_target) & (s.spurious == 0)
    assert full[-1]
    misses = np.flatnonzero(~full)
    final_id = misses[-1] + 1  # record where the final structure is reached for good
    nonacc = np.flatnonzero(~tr.accelerated)
    # one reset on the iteration right after, then acceleration throughout
    assert nonacc[-1] == final_id + 1
    assert tr.accelerated[final_id + 2 :].all()


def test_t2_keeps_the_sphere_on_ball13_fixture():
    sc = make_scenario("fixture-ball13")
    tr = run(sc.problem, sc.x0, SolverConfig(algo="t2", max_prox_steps=500))
    on = np.array([GroupOnSphere(0) in r.signature for r in tr.records])
    assert on.any()
    first = int(np.argmax(on))
    assert on[first:].all()


def test_pg_sublinear_bound(lasso42, lasso42_ref):
    # F(x_k) - F* <= ||x0 - x*||^2 / (2 gamma k) for gamma = 1/L
    tr = run(lasso42.problem, lasso42.x0, SolverConfig(algo="pg", max_prox_steps=10_000))
    k = np.arange(1, len(tr) + 1)
    bound = np.sum((lasso42.x0 - lasso42_ref.point) ** 2) / (2 * tr.gamma * k)
    assert np.all(tr.f_values - lasso42_ref.f_star <= bound * (1 + 1e-9))


@pytest.mark.xfail(
    strict=True,
    reason="PG drifts through the 68-dimensional null space of A at about gamma*lam per "
    "step from x0 in [0, 10]^128; over k <= 1e4 suboptimality stays near 4 and the "
    "log-log slope is about -0.01, not the asymptotic -1",
)
def test_pg_loglog_slope_on_lasso(lasso42, lasso42_ref):
    tr = run(lasso42.problem, lasso42.x0, SolverConfig(algo="pg", max_prox_steps=10_000))
    k = np.arange(100, 10_001)
    sub = tr.f_values[k - 1] - lasso42_ref.f_star
    slope = np.polyfit(np.log(k), np.log(sub), 1)[0]
    assert slope <= -0.9


# -- audits -------------------------------------------------------------------


@pytest.mark.parametrize("algo", ["t1", "t2", "apg"])
def test_eq_base_on_lasso(lasso42, lasso42_ref, algo):
    per = 2 if algo == "t2" else 1
    tr = run(lasso42.problem, lasso42.x0, SolverConfig(algo=algo, max_prox_steps=2000 * per, keep_iterates=True))
    rep = check_eq_base(tr, lasso42_ref.point, lasso42_ref.f_star, tr.gamma, lasso42.problem.lipschitz)
    assert rep.ok, rep.violations[:5]


def test_eq_base_all_accelerated_rhs_is_distance_term(lasso42, lasso42_ref):
    tr = run(lasso42.problem, lasso42.x0, SolverConfig(algo="apg", max_prox_steps=300))
    rep = check_eq_base(tr, lasso42_ref.point, lasso42_ref.f_star, tr.gamma, lasso42.problem.lipschitz)
    d0 = np.sum((lasso42.x0 - lasso42_ref.point) ** 2) / (2 * tr.gamma)
    assert np.allclose(rep.rhs, d0, rtol=1e-10)


def test_eq_base_needs_iterates_for_resets(lasso42, lasso42_ref):
    tr = run(lasso42.problem, lasso42.x0, SolverConfig(algo="pg", max_prox_steps=5))
    with pytest.raises(ValueError):
        check_eq_base(tr, lasso42_ref.point, lasso42_ref.f_star, tr.gamma, lasso42.problem.lipschitz)


def test_eq_base_flags_a_wrong_optimum(lasso42, lasso42_ref):
    # an optimal value 10 too low adds 10 t_n^2 to the left side, which
    # outgrows the fixed right side (about 1.7e6 here) within 2000 steps
    tr = run(lasso42.problem, lasso42.x0, SolverConfig(algo="apg", max_prox_steps=2000))
    rep = check_eq_base(tr, lasso42_ref.point, lasso42_ref.f_star - 10.0, tr.gamma, lasso42.problem.lipschitz)
    assert not rep.ok


def _accelerated_slacks(problem, x0, algo, budget, x_star, f_star):
    lip = problem.lipschitz
    out = []

    def audit(k, x, y, x_next, t, t_prev, gamma, **_):
        out.append(accelerated_descent_slack(problem, gamma, lip, x, y, x_next, t, t_prev, x_star, f_star))

    run(problem, x0, SolverConfig(algo=algo, max_prox_steps=budget), callback=audit)
    return np.array(out)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from(ALGORITHMS))
def test_accelerated_descent_inequality_small(seed, algo):
    p, x0 = small_lasso(seed, m=12, n=8)  # overdetermined: unique minimizer
    ref = run(p, x0, SolverConfig(algo="mfista", max_prox_steps=5000))
    slacks = _accelerated_slacks(p, x0, algo, 300, ref.final_point, ref.f_values.min())
    assert slacks.min() >= -1e-9


def test_accelerated_descent_inequality_nuclear():
    sc = make_scenario("nuclear-small", 1)
    ref = run(sc.problem, sc.x0, SolverConfig(algo="mfista", max_prox_steps=30_000))
    for algo in ("apg", "t1"):
        slacks = _accelerated_slacks(sc.problem, sc.x0, algo, 500, ref.final_point, ref.f_values.min())
        assert slacks.min() >= -1e-9, algo


def test_nuclear_run_reports_rank_signatures():
    sc = make_scenario("nuclear-small", 0)
    tr = run(sc.problem, sc.x0, SolverConfig(algo="apg", max_prox_steps=50))
    assert all(len(r.signature) == 1 for r in tr.records)
    assert isinstance(sc.problem.reg, Nuclear)


def test_runs_are_deterministic(lasso42):
    a = run(lasso42.problem, lasso42.x0, SolverConfig(algo="t2", max_prox_steps=1000))
    b = run(lasso42.problem, lasso42.x0, SolverConfig(algo="t2", max_prox_steps=1000))
    assert np.array_equal(a.f_values, b.f_values)
    assert np.array_equal(a.final_point, b.final_point)

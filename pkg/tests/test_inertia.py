import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import nesterov_t
from proxident.inertia import (
    ChambolleDossal,
    InertiaSchedule,
    Liang,
    Nesterov,
    advance,
    parse_schedule,
    validate_assumption2,
)


def _alphas(s, n):
    out = []
    for _ in range(n):
        a, s = advance(s)
        out.append(a)
    return out, s


def test_nesterov_first_values():
    s = Nesterov()
    assert s.t == 1.0
    a2, s = s.advance()
    assert a2 == 0.0
    assert s.t == pytest.approx((1 + math.sqrt(5)) / 2, rel=1e-15)
    a3, s = s.advance()
    assert s.t == pytest.approx(2.1935, abs=1e-4)
    assert a3 == pytest.approx(0.2817, abs=1e-4)
    assert a3 == pytest.approx((nesterov_t(1) - 1) / nesterov_t(2), rel=1e-15)


def test_nesterov_matches_recursion_oracle():
    s = Nesterov()
    for k in range(1, 200):
        _, s = s.advance()
        assert s.t == pytest.approx(nesterov_t(k), rel=1e-14)
    assert s.k == 199


def test_chambolle_dossal_closed_form():
    s = ChambolleDossal(a=3.0)
    a2, s = s.advance()
    assert a2 == 0.0 and s.t == pytest.approx(4 / 3)
    a3, s = s.advance()
    assert s.t == pytest.approx(5 / 3)
    assert a3 == pytest.approx(0.2)


def test_liang_recursion():
    s = Liang(p=0.5, q=1.0)
    _, s2 = s.advance()
    assert s2.t == pytest.approx((0.5 + math.sqrt(1.0 + 4.0)) / 2)


@pytest.mark.parametrize("sched", [Nesterov(), ChambolleDossal(a=3.0), ChambolleDossal(a=10.0), Liang(), Liang(p=1.0, q=4.0)])
def test_first_alpha_zero_and_range(sched):
    alphas, _ = _alphas(sched, 2000)
    assert alphas[0] == 0.0
    assert all(0.0 <= a < 1.0 for a in alphas)


def test_nesterov_alpha_monotone():
    alphas, _ = _alphas(Nesterov(), 10_000)
    assert all(b >= a for a, b in zip(alphas, alphas[1:]))
    assert alphas[-1] > 0.999


def test_validate_assumption2():
    rep = validate_assumption2(Nesterov(), 10_000)
    assert rep.passed and rep.c_empirical >= 0.5
    assert validate_assumption2(ChambolleDossal(a=3.0), 10_000).passed
    assert validate_assumption2(Liang(), 10_000).passed


class _Squares(InertiaSchedule):
    def next_t(self):
        return float((self.k + 2) ** 2)


def test_validate_detects_broken_schedule():
    rep = validate_assumption2(_Squares(), 50)
    assert not rep.passed
    assert rep.violations


def test_validate_rejects_short_horizon():
    with pytest.raises(ValueError):
        validate_assumption2(Nesterov(), 1)


@settings(max_examples=50, deadline=None)
@given(st.floats(2.0001, 50.0), st.integers(2, 3000))
def test_chambolle_dossal_satisfies_assumption(a, horizon):
    assert validate_assumption2(ChambolleDossal(a=a), horizon).passed


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 1.0), st.floats(0.01, 1.0), st.integers(2, 2000))
def test_liang_satisfies_assumption(p, frac, horizon):
    # t_{k+1}^2 - t_{k+1} - t_k^2 = (p^2 - 2p + q)/4 + (p - 1) s / 2 with
    # s = sqrt(q + 4 t_k^2), so q <= p (2 - p) is sufficient
    q = frac * p * (2.0 - p)
    assert validate_assumption2(Liang(p=p, q=q), horizon).passed


def test_liang_with_large_q_fails():
    # p = 1 makes the excess exactly (q - 1) / 4 at every step
    rep = validate_assumption2(Liang(p=1.0, q=2.0), 10)
    assert not rep.passed
    assert all(v[3] == pytest.approx(0.25) for v in rep.violations)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        ChambolleDossal(a=2.0)
    with pytest.raises(ValueError):
        Liang(p=0.0)
    with pytest.raises(ValueError):
        Liang(q=0.0)


def test_parse_schedule():
    assert parse_schedule("nesterov") == Nesterov()
    assert parse_schedule("cd:4") == ChambolleDossal(a=4.0)
    assert parse_schedule("liang:0.5,2") == Liang(p=0.5, q=2.0)
    for bad in ["", "fista", "cd:x", "liang:1", "nesterov:2", "cd:1.5"]:
        with pytest.raises(ValueError):
            parse_schedule(bad)


def test_schedules_are_immutable_values():
    s = Nesterov()
    _, s2 = s.advance()
    assert s.t == 1.0 and s.k == 0 and s2.k == 1

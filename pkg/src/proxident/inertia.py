"""Inertial sequences ``t_k`` and extrapolation weights ``alpha_k``.

Indexing convention: every schedule starts at ``t_0 = 1`` and one call to
:meth:`InertiaSchedule.advance` produces ``t_{k+1}`` together with
``alpha_{k+1} = (t_k - 1) / t_{k+1}``. The first weight is therefore always
zero, and ``y_k = x_k + alpha_k (x_k - x_{k-1})`` uses ``t_{k-1}`` and
``t_k`` exactly as in the accelerated descent inequality.
"""

import math
from dataclasses import dataclass, replace

__all__ = [
    "ChambolleDossal",
    "InertiaSchedule",
    "Liang",
    "Nesterov",
    "ValidationReport",
    "advance",
    "parse_schedule",
    "validate_assumption2",
]


@dataclass(frozen=True)
class InertiaSchedule:
    """Base class; subclasses define :meth:`next_t`."""

    t: float = 1.0
    k: int = 0

    def next_t(self):
        raise NotImplementedError

    def advance(self):
        """Return ``(alpha_next, schedule_at_k_plus_1)``."""
        t_next = self.next_t()
        alpha = (self.t - 1.0) / t_next
        return alpha, replace(self, t=t_next, k=self.k + 1)


@dataclass(frozen=True)
class Nesterov(InertiaSchedule):
    def next_t(self):
        return (1.0 + math.sqrt(1.0 + 4.0 * self.t * self.t)) / 2.0


@dataclass(frozen=True)
class ChambolleDossal(InertiaSchedule):
    """``t_k = (k + a - 1) / a`` counted from ``t = 1``, i.e. ``t_j = (j + a) / a``."""

    a: float = 3.0

    def __post_init__(self):
        if not self.a > 2:
            raise ValueError("Chambolle-Dossal schedule needs a > 2")

    def next_t(self):
        return (self.k + 1 + self.a) / self.a


@dataclass(frozen=True)
class Liang(InertiaSchedule):
    """``t_k = (p + sqrt(q + 4 t_{k-1}^2)) / 2``."""

    p: float = 1.0 / 20.0
    q: float = 0.5

    def __post_init__(self):
        if not 0 < self.p <= 1 or not self.q > 0:
            raise ValueError("Liang schedule needs p in (0, 1] and q > 0")

    def next_t(self):
        return (self.p + math.sqrt(self.q + 4.0 * self.t * self.t)) / 2.0


def advance(schedule):
    return schedule.advance()


@dataclass
class ValidationReport:
    horizon: int
    violations: list  # (k, t_k, t_{k+1}, excess)
    c_empirical: float

    @property
    def passed(self):
        return not self.violations and self.c_empirical > 0


def validate_assumption2(schedule, horizon):
    """Check ``t_{k+1}^2 - t_{k+1} <= t_k^2`` and report ``min_k t_k / k``."""
    if horizon < 2:
        raise ValueError("horizon must be at least 2")
    violations = []
    c_emp = math.inf
    s = schedule
    for _ in range(horizon):
        t_k = s.t
        _, s = s.advance()
        t_next = s.t
        excess = t_next * t_next - t_next - t_k * t_k
        if excess > 1e-12 * max(1.0, t_k * t_k):
            violations.append((s.k - 1, t_k, t_next, excess))
        c_emp = min(c_emp, t_next / s.k)
    return ValidationReport(horizon, violations, c_emp)


def parse_schedule(text):
    """Parse ``nesterov``, ``cd:<a>`` or ``liang:<p>,<q>``."""
    name, _, args = text.strip().lower().partition(":")
    if name == "nesterov" and not args:
        return Nesterov()
    if name == "cd":
        return ChambolleDossal(a=float(args) if args else 3.0)
    if name == "liang":
        if not args:
            return Liang()
        p, q = (float(v) for v in args.split(","))
        return Liang(p=p, q=q)
    raise ValueError(f"unknown schedule {text!r}; expected nesterov, cd:<a> or liang:<p>,<q>")

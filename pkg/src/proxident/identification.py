"""Reference solutions and per-iteration identification counts."""

from dataclasses import dataclass

import numpy as np

from .linalg import as_point
from .solvers import SolverConfig, run_mfista

__all__ = [
    "IdentificationSeries",
    "ReferenceSolution",
    "compute_reference",
    "identification_series",
    "stability_metrics",
    "suboptimality_floor",
]


@dataclass
class ReferenceSolution:
    """High-accuracy solution; ``signature`` comes from the final prox call."""

    point: np.ndarray
    f_star: float
    signature: frozenset
    subopt_achieved: float
    converged: bool
    iterations: int


def compute_reference(problem, x0=None, gamma=None, target_subopt=1e-15, budget=100_000, window=200):
    """Run monotone FISTA until ``F`` stops improving.

    The run ends when the best value improved by less than
    ``target_subopt * (1 + |F|)`` over the last ``max(window, k // 5)``
    iterations, or when ``budget`` iterations are spent, in which case
    ``converged`` is False. The window grows with ``k`` because the monotone
    scheme can hold its iterate for long stretches before improving again.
    ``subopt_achieved`` is the last windowed relative decrease.
    """
    if not target_subopt > 0:
        raise ValueError("target_subopt must be positive")
    x0 = np.zeros(problem.shape) if x0 is None else as_point(x0, "x0")
    history = []
    state = {"decrease": np.inf}

    def plateau(k, f_next, **_):
        best = min(f_next, history[-1]) if history else f_next
        history.append(best)
        span = max(window, k // 5)
        if k >= span:
            old = history[k - span]
            dec = (old - best) / (1.0 + abs(best))
            state["decrease"] = dec
            return dec <= target_subopt
        return False

    cfg = SolverConfig(algo="mfista", gamma=gamma, max_prox_steps=budget)
    trace = run_mfista(problem, x0, cfg, callback=plateau)
    converged = state["decrease"] <= target_subopt
    return ReferenceSolution(
        point=trace.final_point,
        f_star=float(min(trace.f_values.min(), trace.f0)),
        signature=trace.final_signature,
        subopt_achieved=float(state["decrease"]),
        converged=bool(converged),
        iterations=len(trace),
    )


@dataclass
class IdentificationSeries:
    """Counts of reference manifolds held (``correct``) and not held (``spurious``)."""

    k: np.ndarray
    prox_steps: np.ndarray
    correct: np.ndarray
    spurious: np.ndarray
    n_target: int

    def __len__(self):
        return len(self.k)

    def rows(self):
        return zip(self.k.tolist(), self.prox_steps.tolist(), self.correct.tolist(), self.spurious.tolist())


def identification_series(trace, ref):
    """``|sig_k & sig*|`` and ``|sig_k - sig*|`` for every record of ``trace``."""
    target = ref.signature if isinstance(ref, ReferenceSolution) else frozenset(ref)
    recs = trace.records
    correct = np.fromiter((len(r.signature & target) for r in recs), dtype=np.int64, count=len(recs))
    spurious = np.fromiter((len(r.signature - target) for r in recs), dtype=np.int64, count=len(recs))
    return IdentificationSeries(
        k=np.array([r.k for r in recs], dtype=np.int64),
        prox_steps=np.array([r.prox_steps for r in recs], dtype=np.int64),
        correct=correct,
        spurious=spurious,
        n_target=len(target),
    )


def stability_metrics(series):
    """First prox step with exact identification and the number of later misses.

    Returns ``(first, holes)``; ``first`` is None (and ``holes`` 0) when the
    reference structure is never matched exactly.
    """
    if len(series) == 0:
        raise ValueError("empty series")
    full = (series.correct == series.n_target) & (series.spurious == 0)
    hits = np.flatnonzero(full)
    if hits.size == 0:
        return None, 0
    first = int(hits[0])
    holes = int(np.count_nonzero(~full[first:]))
    return int(series.prox_steps[first]), holes


def suboptimality_floor(ref, traces):
    """``F*`` floored at the best value reached by any compared run."""
    best = min([ref.f_star] + [float(t.f_values.min()) for t in traces])
    return best

"""Nonsmooth terms with closed-form proximal operators.

Every ``prox`` call returns the output point together with the set of
candidate manifolds that the closed-form branch places it on. Membership is
read off the branch taken, never re-tested on the floating-point output.

Manifold identifiers are small tagged tuples so signatures are plain
``frozenset`` objects with C-level hashing.
"""

from typing import NamedTuple

import numpy as np

from .linalg import svd

__all__ = [
    "DistPBall",
    "GroupDistPBall",
    "GroupOnSphere",
    "L1",
    "Nuclear",
    "ProxResult",
    "RankEquals",
    "ZeroCoordinate",
    "candidate_collection",
    "evaluate",
    "prox",
    "signature_key",
]


class ZeroCoordinate(NamedTuple):
    index: int
    kind: str = "zero"


class RankEquals(NamedTuple):
    rank: int
    kind: str = "rank"


class GroupOnSphere(NamedTuple):
    group: int
    kind: str = "sphere"


EMPTY = frozenset()


class ProxResult(NamedTuple):
    """Prox output, its structure signature and ``g`` at the output point.

    ``value`` comes from the closed form (e.g. the shrunk singular values) so
    callers evaluating ``F`` do not pay for a second decomposition.
    """

    point: np.ndarray
    signature: frozenset
    value: float = None


def signature_key(signature):
    """Canonical, order-independent text form of a signature."""
    return ";".join(sorted(f"{m.kind}:{m[0]}" for m in signature))


def _shape(shape):
    if np.ndim(shape) == 0:
        return (int(shape),)
    return tuple(int(d) for d in shape)


def _check_gamma(gamma):
    if not gamma > 0:
        raise ValueError(f"prox step must be positive, got {gamma}")


class L1:
    """``g(x) = sum_i |x_i|``; candidate manifolds ``{x : x_i = 0}``."""

    def __init__(self, shape):
        self.shape = _shape(shape)
        self.size = int(np.prod(self.shape))
        self._ids = tuple(ZeroCoordinate(i) for i in range(self.size))

    def _check(self, x):
        if x.shape != self.shape:
            raise ValueError(f"expected shape {self.shape}, got {x.shape}")

    def value(self, x):
        x = np.asarray(x, dtype=np.float64)
        self._check(x)
        return float(np.abs(x).sum())

    def prox(self, u, gamma):
        _check_gamma(gamma)
        u = np.asarray(u, dtype=np.float64)
        self._check(u)
        zero = np.abs(u) <= gamma
        out = u - gamma * np.sign(u)
        out[zero] = 0.0
        ids = self._ids
        sig = frozenset([ids[i] for i in np.flatnonzero(zero.ravel())])
        return ProxResult(out, sig, float(np.abs(out).sum()))

    def candidates(self):
        return list(self._ids)

    def __repr__(self):
        return f"L1(shape={self.shape})"


class Nuclear:
    """Sum of singular values of a matrix; manifolds ``{x : rank(x) = r}``.

    After soft-thresholding, singular values below ``1e-12 * sigma_max`` are
    treated as zero (Jacobi SVD noise floor).
    """

    rel_floor = 1e-12

    def __init__(self, shape):
        if len(shape) != 2:
            raise ValueError("Nuclear expects a matrix shape")
        self.shape = tuple(int(d) for d in shape)
        self._ids = tuple(RankEquals(r) for r in range(min(self.shape) + 1))

    def _check(self, x):
        if x.shape != self.shape:
            raise ValueError(f"expected shape {self.shape}, got {x.shape}")

    def value(self, x):
        x = np.asarray(x, dtype=np.float64)
        self._check(x)
        return float(svd(x).singulars.sum())

    def prox(self, u, gamma):
        _check_gamma(gamma)
        u = np.asarray(u, dtype=np.float64)
        self._check(u)
        left, sing, right = svd(u)  # rejects non-finite input
        shrunk = np.maximum(sing - gamma, 0.0)
        keep = shrunk > self.rel_floor * sing[0]
        rank = int(np.count_nonzero(keep))
        shrunk = np.where(keep, shrunk, 0.0)
        out = (left[:, :rank] * shrunk[:rank]) @ right[:, :rank].T
        if rank == 0:
            out = np.zeros(self.shape)
        return ProxResult(out, frozenset([self._ids[rank]]), float(shrunk[:rank].sum()))

    def candidates(self):
        return list(self._ids)

    def __repr__(self):
        return f"Nuclear(shape={self.shape})"


def _pnorm(v, p):
    return float(np.sum(np.abs(v) ** p) ** (1.0 / p))


def _ball_prox(u, p, gamma):
    """Closed form used for ``max(0, ||.||_p - 1)``.

    Returns ``(point, on_sphere, g(point))``; ties at ``||u||_p == 1`` or
    ``1 + gamma`` go to the sphere branch.
    """
    r = _pnorm(u, p)
    if r < 1.0:
        return u.copy(), False, 0.0
    if r <= 1.0 + gamma:
        return u / r, True, 0.0
    return u * (1.0 - gamma / r), False, r - gamma - 1.0


class DistPBall:
    """``g(x) = max(0, ||x||_p - 1)`` with the unit ``p``-sphere as manifold.

    For ``p != 2`` the prox is the radial closed form shared with the
    ``p = 2`` case, which is the operator used throughout this package.
    """

    def __init__(self, p, shape):
        if not p > 1:
            raise ValueError("p must exceed 1")
        self.p = float(p)
        self.shape = _shape(shape)
        self._sphere = GroupOnSphere(0)

    def _check(self, x):
        if x.shape != self.shape:
            raise ValueError(f"expected shape {self.shape}, got {x.shape}")

    def value(self, x):
        x = np.asarray(x, dtype=np.float64)
        self._check(x)
        return max(0.0, _pnorm(x, self.p) - 1.0)

    def prox(self, u, gamma):
        _check_gamma(gamma)
        u = np.asarray(u, dtype=np.float64)
        self._check(u)
        out, on, val = _ball_prox(u, self.p, gamma)
        return ProxResult(out, frozenset([self._sphere]) if on else EMPTY, val)

    def candidates(self):
        return [self._sphere]

    def __repr__(self):
        return f"DistPBall(p={self.p}, shape={self.shape})"


class GroupDistPBall:
    """``g(x) = sum_g max(0, ||x_g||_p - 1)`` over contiguous index groups."""

    def __init__(self, p, groups):
        if not p > 1:
            raise ValueError("p must exceed 1")
        self.p = float(p)
        self.groups = [(int(a), int(b)) for a, b in groups]
        pos = 0
        for a, b in self.groups:
            if a != pos or b <= a:
                raise ValueError("groups must be contiguous ranges partitioning the coordinates")
            pos = b
        self.size = pos
        self.shape = (pos,)
        self._ids = tuple(GroupOnSphere(g) for g in range(len(self.groups)))

    @classmethod
    def uniform(cls, p, n_groups, group_size):
        return cls(p, [(g * group_size, (g + 1) * group_size) for g in range(n_groups)])

    def _check(self, x):
        if x.shape != self.shape:
            raise ValueError(f"expected shape {self.shape}, got {x.shape}")

    def value(self, x):
        x = np.asarray(x, dtype=np.float64)
        self._check(x)
        return float(sum(max(0.0, _pnorm(x[a:b], self.p) - 1.0) for a, b in self.groups))

    def prox(self, u, gamma):
        _check_gamma(gamma)
        u = np.asarray(u, dtype=np.float64)
        self._check(u)
        out = np.empty_like(u)
        members = []
        total = 0.0
        for g, (a, b) in enumerate(self.groups):
            out[a:b], on, val = _ball_prox(u[a:b], self.p, gamma)
            total += val
            if on:
                members.append(self._ids[g])
        return ProxResult(out, frozenset(members), total)

    def candidates(self):
        return list(self._ids)

    def __repr__(self):
        return f"GroupDistPBall(p={self.p}, groups={len(self.groups)})"


def evaluate(reg, x):
    return reg.value(x)


def prox(reg, u, gamma_eff):
    return reg.prox(u, gamma_eff)


def candidate_collection(reg):
    return reg.candidates()

"""Least-squares smooth term and the composite objective ``f + lam * g``."""

import functools

import numpy as np

from .linalg import as_point, spectral_norm
from .regularizers import ProxResult

__all__ = [
    "CompositeProblem",
    "LeastSquares",
    "composite_value",
    "f_grad",
    "f_value",
    "lipschitz_constant",
]

# Power-iteration tolerance for L. Tighter than strictly needed for step sizes
# so that descent-lemma checks at gamma = 1/L are not polluted by an
# underestimated L.
LIPSCHITZ_TOL = 1e-12


class LeastSquares:
    """``f(x) = scale * ||A vec(x) - b||^2`` for a vector or matrix variable ``x``.

    Parameters
    ----------
    a : array_like, shape (m, d)
        Operator acting on the flattened variable (row-major ``vec``).
    b : array_like, shape (m,)
        Target.
    shape : tuple of int, optional
        Shape of the variable; defaults to ``(d,)``.
    scale : float, optional
        Positive multiplier ``c``; ``1`` matches ``||Ax - b||^2``.
    """

    def __init__(self, a, b, shape=None, scale=1.0):
        self.a = as_point(np.atleast_2d(a), "a")
        self.b = as_point(np.atleast_1d(b), "b").ravel()
        if self.a.shape[0] != self.b.size:
            raise ValueError("A and b have incompatible sizes")
        self.shape = (self.a.shape[1],) if shape is None else tuple(int(d) for d in shape)
        if int(np.prod(self.shape)) != self.a.shape[1]:
            raise ValueError(f"A has {self.a.shape[1]} columns but the variable has shape {self.shape}")
        if not scale > 0:
            raise ValueError("scale must be positive")
        self.scale = float(scale)

    def _vec(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != self.shape:
            raise ValueError(f"expected shape {self.shape}, got {x.shape}")
        return x.ravel()

    def residual(self, x):
        return self.a @ self._vec(x) - self.b

    def value(self, x):
        r = self.residual(x)
        return self.scale * float(r @ r)

    def grad(self, x):
        r = self.residual(x)
        return (2.0 * self.scale * (self.a.T @ r)).reshape(self.shape)

    def value_and_grad(self, x):
        r = self.residual(x)
        return self.scale * float(r @ r), (2.0 * self.scale * (self.a.T @ r)).reshape(self.shape)

    @functools.cached_property
    def lipschitz(self):
        sigma = spectral_norm(self.a, tol=LIPSCHITZ_TOL)
        if sigma == 0.0:
            raise ValueError("A is zero; the gradient is constant and L is undefined")
        return 2.0 * self.scale * sigma * sigma


def f_value(ls, x):
    return ls.value(x)


def f_grad(ls, x):
    return ls.grad(x)


def lipschitz_constant(ls):
    return ls.lipschitz


class CompositeProblem:
    """``F(x) = f(x) + lam * g(x)`` with ``f`` least squares and ``g`` a regularizer."""

    def __init__(self, smooth, reg, lam=1.0):
        if not lam >= 0:
            raise ValueError("lam must be nonnegative")
        if tuple(reg.shape) != tuple(smooth.shape):
            raise ValueError(f"regularizer shape {reg.shape} does not match variable shape {smooth.shape}")
        self.smooth = smooth
        self.reg = reg
        self.lam = float(lam)
        self.shape = smooth.shape

    @property
    def lipschitz(self):
        return self.smooth.lipschitz

    def value(self, x):
        fx = self.smooth.value(x)
        if self.lam == 0.0:
            return fx
        return fx + self.lam * self.reg.value(x)

    def prox_grad(self, x, gamma):
        """One forward-backward step ``prox_{gamma lam g}(x - gamma grad f(x))``."""
        if not gamma > 0:
            raise ValueError("gamma must be positive")
        u = x - gamma * self.smooth.grad(x)
        if self.lam == 0.0:
            return ProxResult(u, frozenset(), 0.0)
        return self.reg.prox(u, gamma * self.lam)

    def value_of(self, result):
        """``F`` at a prox output, reusing the regularizer value it carries."""
        if result.value is None:
            return self.value(result.point)
        return self.smooth.value(result.point) + self.lam * result.value

    def candidates(self):
        return self.reg.candidates()

    def __repr__(self):
        return f"CompositeProblem(shape={self.shape}, reg={self.reg!r}, lam={self.lam})"


def composite_value(problem, x):
    return problem.value(x)

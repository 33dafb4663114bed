"""Independent reference computations used only by the tests.

Nothing here shares code with the package: the eigen-solver is a two-sided
Jacobi method on the symmetric Gram matrix, the scalar prox is a grid
search, and the inertial sequences are written out from their closed forms.
"""

import math

import numpy as np


def jacobi_eigh(s, tol=1e-14, max_sweeps=100):
    """Eigenvalues of a symmetric matrix, descending (cyclic two-sided Jacobi)."""
    a = np.array(s, dtype=np.float64)
    n = a.shape[0]
    for _ in range(max_sweeps):
        off = math.sqrt(max(0.0, float(np.sum(a * a) - np.sum(np.diag(a) ** 2))))
        if off <= tol * max(1.0, float(np.abs(a).max())):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) <= 1e-300 + 1e-18 * abs(a[q, q] - a[p, p]):
                    continue  # negligible; also keeps theta finite
                theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                sn = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = sn
                rot[q, p] = -sn
                a = rot.T @ a @ rot
    return np.sort(np.diag(a))[::-1]


def singular_values(a):
    """Singular values via the Gram matrix's Jacobi eigenvalues."""
    a = np.asarray(a, dtype=np.float64)
    gram = a.T @ a if a.shape[0] >= a.shape[1] else a @ a.T
    return np.sqrt(np.maximum(jacobi_eigh(gram), 0.0))


def scalar_prox_grid(h, u, gamma, lo=-10.0, hi=10.0, n=400001):
    """argmin_w h(w) + (w - u)^2 / (2 gamma) over a uniform grid."""
    w = np.linspace(lo, hi, n)
    obj = h(w) + (w - u) ** 2 / (2.0 * gamma)
    return float(w[np.argmin(obj)]), (hi - lo) / (n - 1)


def nesterov_t(k):
    """t_k from t_0 = 1 by the recursion written out directly."""
    t = 1.0
    for _ in range(k):
        t = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
    return t


def pnorm(v, p):
    return float(np.sum(np.abs(v) ** p) ** (1.0 / p))

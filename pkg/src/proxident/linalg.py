"""Dense linear algebra helpers: spectral norm, one-sided Jacobi SVD, seeded RNG.

Points and matrices are plain ``float64`` numpy arrays. Everything here is
deterministic for a given input, which the golden CSV traces rely on.
"""

import math

import numba
import numpy as np

__all__ = [
    "ConvergenceError",
    "Rng",
    "SvdResult",
    "as_point",
    "spectral_norm",
    "svd",
]


class ConvergenceError(RuntimeError):
    """An iterative routine hit its iteration cap."""


def as_point(x, name="x"):
    """Return ``x`` as a float64 array, rejecting NaN and infinite entries."""
    arr = np.asarray(x, dtype=np.float64)
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} has non-finite entries")
    return arr


class Rng:
    """Seeded stream built on the PCG64 bit generator.

    Only the raw 64-bit outputs of PCG64 are consumed; uniforms use the top
    53 bits and normals come from the Box-Muller transform, so the stream
    does not depend on numpy's higher-level sampling routines.
    """

    _SCALE = 1.0 / 9007199254740992.0  # 2**-53

    def __init__(self, seed):
        self.seed = int(seed)
        self._bits = np.random.PCG64(self.seed)

    def _unit(self, n):
        raw = self._bits.random_raw(n)
        return (raw >> np.uint64(11)).astype(np.float64) * self._SCALE

    def uniform(self, lo=0.0, hi=1.0, size=None):
        """Uniform samples in ``[lo, hi)``."""
        if not lo < hi:
            raise ValueError("uniform requires lo < hi")
        n = 1 if size is None else int(np.prod(size))
        u = lo + (hi - lo) * self._unit(n)
        # rounding of lo + (hi-lo)*u can land on hi
        u = np.minimum(u, np.nextafter(hi, lo))
        return float(u[0]) if size is None else u.reshape(size)

    def normal(self, size=None):
        """Standard normal samples (Box-Muller, both outputs used)."""
        n = 1 if size is None else int(np.prod(size))
        pairs = (n + 1) // 2
        u = self._unit(2 * pairs)
        u1 = 1.0 - u[:pairs]  # in (0, 1]
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * math.pi * u[pairs:]
        z = np.empty(2 * pairs)
        z[0::2] = radius * np.cos(angle)
        z[1::2] = radius * np.sin(angle)
        z = z[:n]
        return float(z[0]) if size is None else z.reshape(size)

    def permutation(self, n):
        """Uniform random permutation of ``range(n)`` (Fisher-Yates)."""
        perm = np.arange(n)
        u = self._unit(max(n - 1, 0))
        for i in range(n - 1, 0, -1):
            j = int(u[n - 1 - i] * (i + 1))
            perm[i], perm[j] = perm[j], perm[i]
        return perm


def rand_uniform(rng, lo, hi):
    return rng.uniform(lo, hi)


def rand_normal(rng):
    return rng.normal()


def spectral_norm(a, tol=1e-8, max_iter=100_000):
    """Largest singular value of ``a`` by power iteration on ``a.T @ a``.

    The start vector is the normalized all-ones vector. Iteration stops once
    the error estimate, extrapolated from the ratio of successive changes,
    drops below ``tol`` relative to the current estimate.
    """
    a = as_point(a, "a")
    if a.ndim == 1:
        a = a[None, :]
    if not np.any(a):
        return 0.0
    v = np.full(a.shape[1], 1.0 / math.sqrt(a.shape[1]))
    sigma2 = 0.0
    prev_delta = None
    for _ in range(max_iter):
        w = a.T @ (a @ v)
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            # start vector in the null space of a
            v = np.roll(v, 1) + np.arange(v.size) / v.size
            v /= np.linalg.norm(v)
            continue
        v = w / norm_w
        av = a @ v
        new = float(av @ av)
        delta = abs(new - sigma2)
        sigma2 = new
        if prev_delta is not None and prev_delta > 0.0:
            ratio = min(delta / prev_delta, 0.999999)
            err = delta * ratio / (1.0 - ratio)
            # sigma2 relative error tol maps to sigma relative error tol/2
            if err <= tol * sigma2 and delta <= tol * sigma2:
                return math.sqrt(sigma2)
        elif prev_delta == 0.0 and delta == 0.0:
            return math.sqrt(sigma2)
        prev_delta = delta
    raise ConvergenceError(
        f"power iteration did not reach tol={tol} in {max_iter} iterations; "
        "the top singular values are likely (nearly) tied"
    )


class SvdResult:
    """Thin SVD ``a = left @ diag(singulars) @ right.T``."""

    __slots__ = ("left", "singulars", "right")

    def __init__(self, left, singulars, right):
        self.left = left
        self.singulars = singulars
        self.right = right

    def reconstruct(self):
        return (self.left * self.singulars) @ self.right.T

    def __iter__(self):
        return iter((self.left, self.singulars, self.right))


@numba.njit(cache=True)
def _jacobi_sweeps(work, v, max_sweeps):
    """Cyclic one-sided Jacobi on the columns of ``work``; returns sweeps used or -1."""
    m, n = work.shape
    eps = 2.220446049250313e-16
    # columns below eps * ||A||_F are rounding noise; rotating them never settles
    noise = 0.0
    for r in range(m):
        for c in range(n):
            noise += work[r, c] * work[r, c]
    noise *= eps * eps
    # the computed inner product carries O(m eps) relative rounding error
    tol = m * eps
    for sweep in range(max_sweeps):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                alpha = 0.0
                beta = 0.0
                gamma = 0.0
                for r in range(m):
                    alpha += work[r, i] * work[r, i]
                    beta += work[r, j] * work[r, j]
                    gamma += work[r, i] * work[r, j]
                if abs(gamma) <= tol * math.sqrt(alpha * beta) or min(alpha, beta) <= noise:
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                sgn = 1.0 if zeta >= 0.0 else -1.0
                t = sgn / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                for r in range(m):
                    wi = work[r, i]
                    wj = work[r, j]
                    work[r, i] = c * wi - s * wj
                    work[r, j] = s * wi + c * wj
                for r in range(n):
                    vi = v[r, i]
                    vj = v[r, j]
                    v[r, i] = c * vi - s * vj
                    v[r, j] = s * vi + c * vj
        if not rotated:
            return sweep
    return -1


def _complete_basis(u, rank):
    """Replace columns ``rank:`` of ``u`` by an orthonormal completion."""
    m, k = u.shape
    cols = [u[:, i].copy() for i in range(rank)]
    e = 0
    while len(cols) < k:
        cand = np.zeros(m)
        cand[e % m] = 1.0
        e += 1
        for _ in range(2):  # reorthogonalize once
            for c in cols:
                cand -= (c @ cand) * c
        nrm = np.linalg.norm(cand)
        if nrm > 1e-8:
            cols.append(cand / nrm)
    return np.column_stack(cols)


@numba.njit(cache=True)
def _jacobi_svd(work, max_sweeps):
    """Sweeps, then sorted singular values and normalized columns, in one call."""
    m, n = work.shape
    v = np.eye(n)
    sweeps = _jacobi_sweeps(work, v, max_sweeps)
    sing = np.empty(n)
    for c in range(n):
        acc = 0.0
        for r in range(m):
            acc += work[r, c] * work[r, c]
        sing[c] = math.sqrt(acc)
    order = np.argsort(-sing, kind="mergesort")
    sing = sing[order]
    floor = sing[0] * n * 2.220446049250313e-16
    u = np.zeros((m, n))
    v_sorted = np.empty((n, n))
    rank = 0
    for c in range(n):
        src = order[c]
        for r in range(n):
            v_sorted[r, c] = v[r, src]
        if sing[c] > floor:
            rank += 1
            for r in range(m):
                u[r, c] = work[r, src] / sing[c]
    return u, sing, v_sorted, rank, sweeps


def svd(a, max_sweeps=60):
    """Thin SVD by one-sided (Hestenes) Jacobi rotations.

    Returns ``left`` (``m x k``), ``singulars`` (``k``, nonincreasing) and
    ``right`` (``n x k``) with ``k = min(m, n)``. Left singular vectors
    belonging to zero singular values are completed to an orthonormal set.
    """
    a = as_point(a, "a")
    if a.ndim != 2 or min(a.shape) < 1:
        raise ValueError("svd expects a 2-D array with at least one row and column")
    transposed = a.shape[0] < a.shape[1]
    work = np.array(a.T if transposed else a, dtype=np.float64, order="C")
    u, sing, v, rank, sweeps = _jacobi_svd(work, max_sweeps)
    if sweeps < 0:
        raise ConvergenceError(f"Jacobi SVD did not converge in {max_sweeps} sweeps")
    if rank < work.shape[1]:
        u = _complete_basis(u, rank)
    if transposed:
        return SvdResult(v, sing, u)
    return SvdResult(u, sing, v)

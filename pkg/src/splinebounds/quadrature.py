"""Gauss-Legendre quadrature, Gram/stiffness/load assembly and the small solvers
used by the projectors.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .errors import (
    MissingDerivativeError,
    NonconformingOrderError,
    NotPositiveDefiniteError,
    SingularSystemError,
)
from .spline_core import SplineSpace, TestFunction, basis_matrix, eval_basis_local

DEFAULT_OVERSAMPLE = 4


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return self.nodes.size


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> QuadratureRule:
    """``n``-point Gauss-Legendre rule on ``[-1, 1]``."""
    if not 1 <= n <= 64:
        raise ValueError(f"number of Gauss points must be in [1, 64], got {n}")
    x, w = np.polynomial.legendre.leggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return QuadratureRule(x, w)


def split_points(space_or_breaks, extra=()) -> np.ndarray:
    """Sorted union of element break points and additional interior points."""
    if isinstance(space_or_breaks, SplineSpace):
        xi = space_or_breaks.knots.breakpoints
    else:
        xi = np.asarray(space_or_breaks, dtype=float)
    a, b = xi[0], xi[-1]
    extra = [float(e) for e in extra if a < e < b]
    return np.unique(np.concatenate([xi, extra]))


def composite_rule(breaks: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss rule with ``n`` nodes on every piece between consecutive ``breaks``."""
    rule = gauss_legendre(n)
    lo, hi = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (hi - lo)
    x = (lo + hi) * 0.5 + half * rule.nodes[None, :]
    w = half * rule.weights[None, :]
    return x.ravel(), w.ravel()


@dataclass(frozen=True, eq=False)
class BandedSymMatrix:
    """Symmetric matrix in upper band storage (``band[u + i - j, j] = A[i, j]``)."""

    band: np.ndarray

    @property
    def order(self) -> int:
        return self.band.shape[1]

    @property
    def bandwidth(self) -> int:
        return self.band.shape[0] - 1

    def to_dense(self) -> np.ndarray:
        u, n = self.bandwidth, self.order
        A = np.zeros((n, n))
        for d in range(u + 1):
            diag = self.band[u - d, d:]
            A[np.arange(n - d), np.arange(d, n)] = diag
            A[np.arange(d, n), np.arange(n - d)] = diag
        return A

    @classmethod
    def from_dense(cls, A: np.ndarray, bandwidth: int | None = None) -> BandedSymMatrix:
        A = np.asarray(A, dtype=float)
        n = A.shape[0]
        if bandwidth is None:
            nz = np.nonzero(A)
            bandwidth = int(np.max(np.abs(nz[0] - nz[1]), initial=0))
        band = np.zeros((bandwidth + 1, n))
        for d in range(bandwidth + 1):
            band[bandwidth - d, d:] = A[np.arange(n - d), np.arange(d, n)]
        return cls(band)

    def __matmul__(self, x):
        return self.to_dense() @ x


def assemble_gram(space: SplineSpace, ell: int = 0) -> BandedSymMatrix:
    """Matrix of ``int d^ell B_i d^ell B_j`` with ``p + 1`` Gauss points per element.

    Only the upper band is accumulated, so the result is exactly symmetric.
    """
    p, k = space.p, space.k
    if ell < 0 or ell > min(p, k + 1):
        raise NonconformingOrderError(f"order {ell} not conforming for p={p}, k={k}")
    breaks = space.knots.breakpoints
    rule = gauss_legendre(p + 1)
    band = np.zeros((p + 1, space.dim))
    for e in range(breaks.size - 1):
        lo, hi = breaks[e], breaks[e + 1]
        x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * rule.nodes
        w = 0.5 * (hi - lo) * rule.weights
        first, vals = eval_basis_local(space, x, ell, element=e)
        f0 = int(first[0])
        local = np.einsum("m,mi,mj->ij", w, vals, vals)
        for i in range(p + 1):
            for j in range(i, p + 1):
                band[p + i - j, f0 + j] += local[i, j]
    return BandedSymMatrix(band)


def quadrature_for(space: SplineSpace, breakpoints=(), oversample: int = DEFAULT_OVERSAMPLE):
    """Composite rule for loads: elements split at ``breakpoints``, ``p + 1 + oversample`` nodes."""
    return composite_rule(split_points(space, breakpoints), space.p + 1 + oversample)


def assemble_load(
    space: SplineSpace, u: TestFunction, ell: int = 0, oversample: int = DEFAULT_OVERSAMPLE
) -> np.ndarray:
    """Vector of ``int d^ell u d^ell B_i``."""
    if ell > u.r_max:
        raise MissingDerivativeError(f"load of order {ell} needs derivative {ell} of u")
    x, w = quadrature_for(space, u.breakpoints, oversample)
    B = basis_matrix(space, x, ell)
    return B.T @ (w * u(x, ell))


def cholesky(A: BandedSymMatrix) -> np.ndarray:
    try:
        return scipy.linalg.cholesky_banded(A.band, lower=False)
    except np.linalg.LinAlgError as exc:
        m = re.search(r"(\d+)", str(exc))
        pivot = int(m.group(1)) - 1 if m else -1
        raise NotPositiveDefiniteError(pivot) from exc


def condition_estimate(factor: np.ndarray) -> float:
    """Cheap condition estimate from the diagonal of the band Cholesky factor."""
    d = np.abs(factor[-1])
    return float((d.max() / d.min()) ** 2)


def solve_spd(A: BandedSymMatrix, rhs: np.ndarray) -> np.ndarray:
    """Banded Cholesky solve; ``rhs`` may hold several columns."""
    U = cholesky(A)
    return scipy.linalg.cho_solve_banded((U, False), np.asarray(rhs, dtype=float))


def solve_kkt(
    A: BandedSymMatrix | np.ndarray,
    C: np.ndarray,
    rhs: np.ndarray,
    crhs: np.ndarray,
) -> np.ndarray:
    """Solve ``A x + C^T lam = rhs``, ``C x = crhs`` and return ``x``.

    ``A`` is positive semidefinite and must be definite on the kernel of ``C``.
    Dense factorization of the bordered system; the border is tiny.
    """
    C = np.atleast_2d(np.asarray(C, dtype=float))
    rhs = np.asarray(rhs, dtype=float)
    if C.size == 0:
        if isinstance(A, BandedSymMatrix):
            return solve_spd(A, rhs)
        return solve_spd(BandedSymMatrix.from_dense(A), rhs)
    Ad = A.to_dense() if isinstance(A, BandedSymMatrix) else np.asarray(A, dtype=float)
    n, m = Ad.shape[0], C.shape[0]
    if C.shape[1] != n:
        raise ValueError("constraint matrix has wrong width")

    # Row scaling keeps the border commensurate with A.
    scale = np.linalg.norm(Ad, ord=np.inf) / np.maximum(np.linalg.norm(C, axis=1), 1e-300)
    Cs = C * scale[:, None]
    sv = np.linalg.svd(Cs, compute_uv=False)
    if sv[-1] <= 1e-12 * sv[0] or m > n:
        raise SingularSystemError("constraint matrix is rank deficient")
    try:
        np.linalg.cholesky(Ad + Cs.T @ Cs / np.linalg.norm(Ad, ord=np.inf))
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError("A is not definite on the kernel of the constraints") from exc

    crhs = np.asarray(crhs, dtype=float)
    K = np.zeros((n + m, n + m))
    K[:n, :n] = Ad
    K[:n, n:] = Cs.T
    K[n:, :n] = Cs
    if rhs.ndim == 1:
        full = np.concatenate([rhs, crhs * scale])
    else:
        full = np.vstack([rhs, crhs * scale[:, None]])
    sol = scipy.linalg.solve(K, full, assume_a="sym")
    return sol[:n]

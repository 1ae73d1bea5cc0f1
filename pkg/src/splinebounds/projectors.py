"""L2, Ritz, boundary-interpolating and reduced-space projectors onto spline spaces.

Each univariate projector is materialized as a :class:`LinearProjector`: a
matrix acting on samples of the target (and its derivatives) at fixed
quadrature points. The univariate projection is one matrix-vector product;
tensor-product projections apply one such matrix per direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np
import scipy.linalg

from .errors import (
    EmptySpaceError,
    InvalidDataError,
    InvalidSmoothnessError,
    MissingDerivativeError,
    NonconformingOrderError,
    ResolutionError,
)
from .quadrature import (
    DEFAULT_OVERSAMPLE,
    BandedSymMatrix,
    assemble_gram,
    cholesky,
    composite_rule,
    condition_estimate,
    quadrature_for,
    solve_kkt,
    solve_spd,
    split_points,
)
from .spline_core import (
    SplineFunction,
    SplineSpace,
    TestFunction,
    basis_matrix,
)

# Gauss points per piece beyond p + 1 when measuring errors.
ERROR_OVERSAMPLE = 8


@dataclass(frozen=True, eq=False)
class LinearProjector:
    """Projector ``u -> matrix @ [d^orders[m] u(points[m])]_m`` onto ``space``."""

    space: SplineSpace
    points: np.ndarray
    orders: np.ndarray
    matrix: np.ndarray
    kind: str

    @property
    def max_order(self) -> int:
        return int(self.orders.max(initial=0))

    def sample(self, u: TestFunction) -> np.ndarray:
        if self.max_order > u.r_max:
            raise MissingDerivativeError(f"{self.kind} projector needs derivative {self.max_order}")
        vals = np.empty(self.points.size)
        for o in np.unique(self.orders):
            sel = self.orders == o
            vals[sel] = u(self.points[sel], int(o))
        return vals

    def apply(self, u: TestFunction) -> SplineFunction:
        return SplineFunction(self.space, self.matrix @ self.sample(u))


@dataclass(frozen=True, eq=False)
class ProjectionResult:
    spline: SplineFunction
    diagnostics: dict = field(default_factory=dict)

    @property
    def coefficients(self) -> np.ndarray:
        return self.spline.coefficients


def _legendre_moments(x: np.ndarray, a: float, b: float, count: int) -> np.ndarray:
    """Shifted Legendre polynomials ``P_0..P_{count-1}`` on ``(a, b)`` at ``x``."""
    s = 2.0 * (x - a) / (b - a) - 1.0
    return np.polynomial.legendre.legvander(s, max(count - 1, 0))[:, :count]


def l2_operator(space: SplineSpace, breakpoints=(), oversample: int = DEFAULT_OVERSAMPLE) -> LinearProjector:
    x, w = quadrature_for(space, breakpoints, oversample)
    B = basis_matrix(space, x)
    M = solve_spd(assemble_gram(space, 0), B.T * w[None, :])
    return LinearProjector(space, x, np.zeros(x.size, dtype=int), M, "l2")


def ritz_operator(
    space: SplineSpace, q: int, breakpoints=(), oversample: int = DEFAULT_OVERSAMPLE
) -> LinearProjector:
    """Order-``q`` Ritz projector with moment conditions against ``P_{q-1}``."""
    if q == 0:
        return l2_operator(space, breakpoints, oversample)
    if q < 0 or q > space.k + 1:
        raise NonconformingOrderError(f"Ritz order {q} needs k >= {q - 1}, got k={space.k}")
    a, b = space.knots.a, space.knots.b
    x, w = quadrature_for(space, breakpoints, oversample)
    S, n = x.size, space.dim
    Bq = basis_matrix(space, x, q)
    B0 = basis_matrix(space, x, 0)
    L = _legendre_moments(x, a, b, q)
    C = (B0 * w[:, None]).T @ L  # (n, q): int B_i g_m
    rhs = np.zeros((n, 2 * S))
    rhs[:, :S] = Bq.T * w[None, :]
    crhs = np.zeros((q, 2 * S))
    crhs[:, S:] = L.T * w[None, :]
    M = solve_kkt(assemble_gram(space, q), C.T, rhs, crhs)
    points = np.concatenate([x, x])
    orders = np.concatenate([np.full(S, q), np.zeros(S, dtype=int)])
    return LinearProjector(space, points, orders, M, f"ritz{q}")


def q_operator(space: SplineSpace, breakpoints=(), oversample: int = DEFAULT_OVERSAMPLE) -> LinearProjector:
    """``u(a)`` plus the antiderivative of the L2 projection of ``u'`` onto the
    derivative space; antidifferentiation uses the exact coefficient recurrence.
    """
    if space.p < 1 or space.k < 0:
        raise InvalidSmoothnessError("Q projector needs p >= 1 and k >= 0")
    D = space.derivative_space()
    x, w = quadrature_for(space, breakpoints, oversample)
    Bd = basis_matrix(D, x)
    Md = solve_spd(assemble_gram(D, 0), Bd.T * w[None, :])
    t, p, n = space.knot_vector, space.p, space.dim
    i = np.arange(1, n)
    steps = (t[i + p] - t[i]) / p
    T = np.tril(np.ones((n, n - 1)), -1) * steps[None, :]
    M = np.hstack([np.ones((n, 1)), T @ Md])
    points = np.concatenate([[space.knots.a], x])
    orders = np.concatenate([[0], np.ones(x.size, dtype=int)])
    return LinearProjector(space, points, orders, M, "q")


def l2_project(space: SplineSpace, u: TestFunction, oversample: int = DEFAULT_OVERSAMPLE) -> ProjectionResult:
    x, w = quadrature_for(space, u.breakpoints, oversample)
    B = basis_matrix(space, x)
    load = B.T @ (w * u(x))
    G = assemble_gram(space, 0)
    U = cholesky(G)
    c = scipy.linalg.cho_solve_banded((U, False), load)
    resid = np.linalg.norm(G @ c - load) / max(np.linalg.norm(load), 1e-300)
    diag = {"orthogonality_residual": float(resid), "constraint_residual": 0.0,
            "condition_estimate": condition_estimate(U)}
    return ProjectionResult(SplineFunction(space, c), diag)


def ritz_project(
    space: SplineSpace, u: TestFunction, q: int, oversample: int = DEFAULT_OVERSAMPLE
) -> ProjectionResult:
    if q == 0:
        return l2_project(space, u, oversample)
    if q > u.r_max:
        raise MissingDerivativeError(f"Ritz order {q} needs derivative {q} of u")
    op = ritz_operator(space, q, u.breakpoints, oversample)
    c = op.apply(u).coefficients
    S = op.points.size // 2
    x = op.points[:S]
    _, w = quadrature_for(space, u.breakpoints, oversample)
    load = basis_matrix(space, x, q).T @ (w * u(x, q))
    A = assemble_gram(space, q)
    L = _legendre_moments(x, space.knots.a, space.knots.b, q)
    B0 = basis_matrix(space, x)
    cres = (B0 @ c - u(x)) * w @ L
    diag = {
        "orthogonality_residual": float(np.linalg.norm(A @ c - load) / max(np.linalg.norm(load), 1e-300)),
        "constraint_residual": float(np.abs(cres).max()),
    }
    return ProjectionResult(SplineFunction(space, c), diag)


def q_project(space: SplineSpace, u: TestFunction, oversample: int = DEFAULT_OVERSAMPLE) -> ProjectionResult:
    if u.r_max < 1:
        raise MissingDerivativeError("Q projector needs the first derivative of u")
    op = q_operator(space, u.breakpoints, oversample)
    s = op.apply(u)
    a, b = space.knots.a, space.knots.b
    diag = {
        "endpoint_residual": float(max(abs(s(a)[0] - u(a)), abs(s(b)[0] - u(b)))),
    }
    return ProjectionResult(s, diag)


# --- reduced spaces -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ReducedSpace:
    """Maximally smooth splines with vanishing even or odd boundary derivatives.

    ``basis`` maps reduced coefficients to parent coefficients and has
    orthonormal columns spanning the kernel of ``constraints``.
    """

    parent: SplineSpace
    parity: str
    variant: str
    basis: np.ndarray
    constraints: np.ndarray
    orders: tuple[int, ...]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def spline(self, reduced_coefficients) -> SplineFunction:
        return SplineFunction(self.parent, self.basis @ np.asarray(reduced_coefficients, dtype=float))


def reduced_orders(p: int, parity: str, variant: str) -> tuple[int, ...]:
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    if variant not in ("strict", "bar"):
        raise ValueError(f"variant must be 'strict' or 'bar', got {variant!r}")
    top = p if variant == "strict" else p - 1
    start = 0 if parity == "even" else 1
    return tuple(range(start, top + 1, 2))


def build_reduced_space(space: SplineSpace, parity: str, variant: str = "strict") -> ReducedSpace:
    if space.k != space.p - 1:
        raise InvalidSmoothnessError("reduced spaces need maximal smoothness k = p - 1")
    orders = reduced_orders(space.p, parity, variant)
    a, b = space.knots.a, space.knots.b
    rows = []
    for alpha in orders:
        rows.append(basis_matrix(space, [a, b], alpha))
    n = space.dim
    if rows:
        C = np.vstack(rows)
        norms = np.linalg.norm(C, axis=1)
        C = C[norms > 0] / norms[norms > 0, None]
    else:
        C = np.zeros((0, n))
    if C.shape[0]:
        _, sv, Vt = np.linalg.svd(C)
        rank = int(np.sum(sv > 1e-10 * sv[0]))
        T = Vt[rank:].T
    else:
        T = np.eye(n)
    if T.shape[1] == 0:
        raise EmptySpaceError(f"reduced space ({parity}, {variant}) of {space!r} is empty")
    return ReducedSpace(space, parity, variant, T, C, orders)


def ritz_reduced(
    reduced: ReducedSpace, u: TestFunction, oversample: int = DEFAULT_OVERSAMPLE
) -> ProjectionResult:
    """Ritz projection onto a reduced space (the L2 projection when ``p = 0``).

    Even parity expects data vanishing at both ends; odd parity adds the
    mean-value constraint.
    """
    space = reduced.parent
    a, b = space.knots.a, space.knots.b
    x, w = quadrature_for(space, u.breakpoints, oversample)
    if reduced.parity == "even":
        scale = max(1.0, float(np.abs(u(x)).max()))
        ends = np.abs(u(np.array([a, b])))
        if ends.max() > 1e-10 * scale:
            raise InvalidDataError("even-parity reduced projection needs u(a) = u(b) = 0")
    T = reduced.basis
    ell = 0 if space.p == 0 else 1
    if ell > u.r_max:
        raise MissingDerivativeError("reduced Ritz projection needs u'")
    A = T.T @ assemble_gram(space, ell).to_dense() @ T
    rhs = T.T @ (basis_matrix(space, x, ell).T @ (w * u(x, ell)))
    diag = {}
    if reduced.parity == "odd" and ell == 1:
        mean_row = T.T @ (basis_matrix(space, x).T @ w)
        y = solve_kkt(A, mean_row[None, :], rhs, np.array([w @ u(x)]))
    else:
        y = solve_spd(BandedSymMatrix.from_dense(A, A.shape[0] - 1), rhs)
    s = reduced.spline(y)
    diag["orthogonality_residual"] = float(
        np.linalg.norm(A @ y - rhs) / max(np.linalg.norm(rhs), 1e-300)
    )
    if reduced.parity == "odd":
        diag["mean_residual"] = float(abs(w @ (s(x) - u(x))))
    return ProjectionResult(s, diag)


# --- error measurement ----------------------------------------------------------

def error_norm(u: TestFunction, s: SplineFunction, ell: int = 0, oversample: int = ERROR_OVERSAMPLE) -> float:
    """``||d^ell (u - s)||`` on the spline's interval."""
    if ell > u.r_max:
        raise MissingDerivativeError(f"error in order {ell} needs derivative {ell} of u")
    breaks = split_points(s.space, u.breakpoints)
    x, w = composite_rule(breaks, s.space.p + 1 + oversample)
    diff = u(x, ell) - s(x, ell)
    return float(np.sqrt(np.sum(w * diff * diff)))


def function_norm(u: TestFunction, domain, ell: int = 0, extra=(), n: int = 24) -> float:
    """``||d^ell u||`` on ``domain`` by composite Gauss quadrature."""
    breaks = split_points(np.linspace(domain[0], domain[1], 17), tuple(extra) + tuple(u.breakpoints))
    x, w = composite_rule(breaks, n)
    v = u(x, ell)
    return float(np.sqrt(np.sum(w * v * v)))


# --- operator norm estimation -------------------------------------------------

@dataclass(frozen=True)
class ConstantEstimate:
    t: int
    r: int
    grid: int
    value: float


def _fine_cells(space: SplineSpace, grid: int) -> np.ndarray:
    xi = space.knots.breakpoints
    L = space.knots.length
    counts = np.maximum(1, np.round(grid * np.diff(xi) / L).astype(int))
    edges = [np.linspace(xi[e], xi[e + 1], counts[e] + 1)[:-1] for e in range(xi.size - 1)]
    return np.concatenate(edges + [[xi[-1]]])


def estimate_constant(space: SplineSpace, r: int, grid: int = 400) -> ConstantEstimate:
    """Discrete estimate of ``||(I - Z) K^r||`` for the L2 projector ``Z`` onto ``space``
    and ``K`` integration from the left.

    The supremum is taken over piecewise constants on ``grid`` cells aligned with
    the knots; ``K^r`` and the projection are evaluated exactly on them, so the
    estimate never exceeds the true norm (up to rounding).
    """
    if grid < 200:
        raise ResolutionError("grid must have at least 200 cells")
    if r < 0:
        raise ValueError("r must be nonnegative")
    t = space.k + 1
    if r == 0:
        return ConstantEstimate(t, 0, grid, 1.0)
    edges = _fine_cells(space, grid)
    M = edges.size - 1
    nq = max(r, space.p) + 1
    x, w = composite_rule(edges, nq)
    cell = np.repeat(np.arange(M), nq)

    xm = x[:, None]
    lo, hi = edges[None, :-1], edges[None, 1:]
    Kr = (np.clip(xm - lo, 0, None) ** r - np.clip(xm - hi, 0, None) ** r) / factorial(r)
    Kr[np.arange(x.size), cell] = (x - edges[cell]) ** r / factorial(r)

    B = basis_matrix(space, x)
    G = (B * w[:, None]).T @ B
    Z = B @ np.linalg.solve(G, (B * w[:, None]).T)
    T = Kr - Z @ Kr
    delta = np.diff(edges)
    A = np.sqrt(w)[:, None] * T / np.sqrt(delta)[None, :]
    H = A.T @ A
    top = scipy.linalg.eigh(H, eigvals_only=True, subset_by_index=[M - 1, M - 1])[0]
    return ConstantEstimate(t, r, grid, float(np.sqrt(max(top, 0.0))))

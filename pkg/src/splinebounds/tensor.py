"""Tensor-product spline spaces, projectors and error bounds.

A tensor projector ``Pi_1 x ... x Pi_d`` is applied by contracting the
univariate projector matrices with samples of the target on the product of
the univariate sample sets; derivative samples enter wherever a univariate
projector consumes them (e.g. ``d_1 d_2 u`` for Ritz or Q in both directions).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .constants import C_value
from .errors import MissingDerivativeError, ParameterError
from .projectors import ERROR_OVERSAMPLE, LinearProjector, l2_operator, q_operator, ritz_operator
from .quadrature import DEFAULT_OVERSAMPLE, assemble_gram, composite_rule, split_points
from .spline_core import SplineSpace, TestFunction, basis_matrix


@dataclass(frozen=True)
class TensorSpace:
    spaces: tuple[SplineSpace, ...]

    def __post_init__(self):
        object.__setattr__(self, "spaces", tuple(self.spaces))
        if not self.spaces:
            raise ValueError("a tensor space needs at least one direction")

    @property
    def d(self) -> int:
        return len(self.spaces)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.spaces)

    @property
    def dim(self) -> int:
        return int(np.prod(self.shape))

    @property
    def h(self) -> tuple[float, ...]:
        return tuple(s.knots.h for s in self.spaces)

    @property
    def domain(self) -> tuple[tuple[float, float], ...]:
        return tuple((s.knots.a, s.knots.b) for s in self.spaces)


@dataclass(frozen=True)
class TensorTestFunction:
    """Multivariate target given by partial-derivative evaluators.

    ``derivatives`` maps a multi-index ``alpha`` to a callable of the ``d``
    coordinate arrays; ``breakpoints[i]`` lists lines ``x_i = const`` where the
    highest derivatives may jump.
    """

    __test__ = False

    derivatives: Mapping[tuple[int, ...], Callable]
    breakpoints: tuple[tuple[float, ...], ...] = ()
    name: str = ""

    @property
    def d(self) -> int:
        return len(next(iter(self.derivatives)))

    def has(self, alpha) -> bool:
        return tuple(alpha) in self.derivatives

    def __call__(self, *coords, alpha=None) -> np.ndarray:
        alpha = tuple(alpha) if alpha is not None else (0,) * self.d
        if alpha not in self.derivatives:
            raise MissingDerivativeError(f"{self.name or 'function'} has no derivative {alpha}")
        arrays = np.broadcast_arrays(*[np.asarray(c, dtype=float) for c in coords])
        return np.broadcast_to(np.asarray(self.derivatives[alpha](*arrays), dtype=float), arrays[0].shape)

    def axis_breakpoints(self, i: int) -> tuple[float, ...]:
        return tuple(self.breakpoints[i]) if i < len(self.breakpoints) else ()


def separable(*factors: TestFunction) -> TensorTestFunction:
    """``u(x_1, ..., x_d) = f_1(x_1) ... f_d(x_d)`` with all available mixed derivatives."""
    ders = {}
    for alpha in itertools.product(*[range(f.r_max + 1) for f in factors]):
        def fn(*xs, alpha=alpha):
            out = 1.0
            for f, a, x in zip(factors, alpha, xs):
                out = out * f(x, a)
            return out
        ders[alpha] = fn
    return TensorTestFunction(ders, tuple(f.breakpoints for f in factors),
                              name="*".join(f.name or "f" for f in factors))


@dataclass(frozen=True, eq=False)
class TensorSplineFunction:
    tspace: TensorSpace
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        if c.shape != self.tspace.shape:
            raise ValueError(f"coefficient shape {c.shape} does not match {self.tspace.shape}")
        object.__setattr__(self, "coefficients", c)

    def __call__(self, *coords, alpha=None, side: str = "right") -> np.ndarray:
        """Evaluate at scattered points (coordinate arrays of a common shape)."""
        d = self.tspace.d
        alpha = tuple(alpha) if alpha is not None else (0,) * d
        arrays = np.broadcast_arrays(*[np.asarray(c, dtype=float) for c in coords])
        shape = arrays[0].shape
        mats = [basis_matrix(s, a.ravel(), o, side=side) for s, a, o in zip(self.tspace.spaces, arrays, alpha)]
        out = self.coefficients
        # contract the first axis of the coefficients with each basis matrix, keeping the point axis
        res = np.einsum("mi,i...->m...", mats[0], out)
        for B in mats[1:]:
            res = np.einsum("mj,mj...->m...", B, res)
        return res.reshape(shape)

    def grid(self, axes: Sequence[np.ndarray], alpha=None) -> np.ndarray:
        """Evaluate on the tensor grid ``axes[0] x axes[1] x ...``."""
        alpha = tuple(alpha) if alpha is not None else (0,) * self.tspace.d
        out = self.coefficients
        for i, (s, x, o) in enumerate(zip(self.tspace.spaces, axes, alpha)):
            out = _mode_product(out, basis_matrix(s, np.asarray(x, dtype=float), o), i)
        return out


@dataclass(frozen=True, eq=False)
class TensorProjectionResult:
    function: TensorSplineFunction
    diagnostics: dict = field(default_factory=dict)

    @property
    def coefficients(self) -> np.ndarray:
        return self.function.coefficients


def _mode_product(T: np.ndarray, M: np.ndarray, axis: int) -> np.ndarray:
    """Multiply tensor ``T`` by matrix ``M`` along ``axis`` (``M`` acts on that index)."""
    T = np.moveaxis(T, axis, 0)
    out = np.tensordot(M, T, axes=(1, 0))
    return np.moveaxis(out, 0, axis)


def apply_tensor_operators(operators: Sequence[LinearProjector], u: TensorTestFunction) -> np.ndarray:
    """Coefficients of ``(Pi_1 x ... x Pi_d) u`` for materialized univariate projectors."""
    if len(operators) != u.d:
        raise ValueError("one univariate projector per direction is required")
    order_sets = [np.unique(op.orders) for op in operators]
    coeffs = np.zeros(tuple(op.matrix.shape[0] for op in operators))
    for combo in itertools.product(*order_sets):
        alpha = tuple(int(o) for o in combo)
        if not u.has(alpha):
            raise MissingDerivativeError(f"tensor projection needs derivative {alpha} of the target")
        sel = [op.orders == o for op, o in zip(operators, combo)]
        pts = [op.points[s] for op, s in zip(operators, sel)]
        grids = np.meshgrid(*pts, indexing="ij")
        block = u(*grids, alpha=alpha)
        for i, (op, s) in enumerate(zip(operators, sel)):
            block = _mode_product(block, op.matrix[:, s], i)
        coeffs += block
    return coeffs


def _operators(tspace: TensorSpace, u: TensorTestFunction, kind: str, oversample: int):
    ops = []
    for i, s in enumerate(tspace.spaces):
        bp = u.axis_breakpoints(i)
        if kind == "l2":
            ops.append(l2_operator(s, bp, oversample))
        elif kind == "ritz":
            ops.append(ritz_operator(s, 1, bp, oversample))
        elif kind == "q":
            ops.append(q_operator(s, bp, oversample))
        else:
            raise ValueError(f"unknown tensor projector kind {kind!r}")
    return ops


def tensor_project(tspace: TensorSpace, u: TensorTestFunction, kind: str,
                   oversample: int = DEFAULT_OVERSAMPLE) -> TensorProjectionResult:
    coeffs = apply_tensor_operators(_operators(tspace, u, kind, oversample), u)
    return TensorProjectionResult(TensorSplineFunction(tspace, coeffs), {"kind": kind})


def tensor_l2_project(tspace: TensorSpace, u: TensorTestFunction,
                      oversample: int = DEFAULT_OVERSAMPLE) -> TensorProjectionResult:
    """L2 projection onto a tensor space of any dimension (Kronecker mass solve)."""
    res = tensor_project(tspace, u, "l2", oversample)
    # Galerkin residual: (G_1 x ... x G_d) c - load, with the load from the same quadrature.
    quads = [composite_rule(split_points(s, u.axis_breakpoints(i)), s.p + 1 + oversample)
             for i, s in enumerate(tspace.spaces)]
    grids = np.meshgrid(*[q[0] for q in quads], indexing="ij")
    load = u(*grids)
    Gc = res.coefficients
    for i, (s, (x, w)) in enumerate(zip(tspace.spaces, quads)):
        load = _mode_product(load, basis_matrix(s, x).T * w[None, :], i)
        Gc = _mode_product(Gc, assemble_gram(s, 0).to_dense(), i)
    resid = np.linalg.norm(Gc - load) / max(np.linalg.norm(load), 1e-300)
    res.diagnostics["orthogonality_residual"] = float(resid)
    return res


def tensor_ritz_project(tspace: TensorSpace, u: TensorTestFunction,
                        oversample: int = DEFAULT_OVERSAMPLE) -> TensorProjectionResult:
    """First-order Ritz projection in every direction."""
    return tensor_project(tspace, u, "ritz", oversample)


def tensor_q_project(tspace: TensorSpace, u: TensorTestFunction,
                     oversample: int = DEFAULT_OVERSAMPLE) -> TensorProjectionResult:
    """Boundary-interpolating projection in every direction."""
    return tensor_project(tspace, u, "q", oversample)


# --- norms ------------------------------------------------------------------

def tensor_quadrature(tspace: TensorSpace, breakpoints=(), oversample: int = ERROR_OVERSAMPLE):
    """Product Gauss rule split at knots and target breakpoints (grid axes and weight tensor)."""
    axes, weights = [], []
    for i, s in enumerate(tspace.spaces):
        bp = tuple(breakpoints[i]) if i < len(breakpoints) else ()
        x, w = composite_rule(split_points(s, bp), s.p + 1 + oversample)
        axes.append(x)
        weights.append(w)
    W = weights[0]
    for w in weights[1:]:
        W = np.multiply.outer(W, w)
    return axes, W


def tensor_error_norm(u: TensorTestFunction, s: TensorSplineFunction, alpha=None,
                      oversample: int = ERROR_OVERSAMPLE) -> float:
    """``||d^alpha (u - s)||`` over the tensor domain."""
    alpha = tuple(alpha) if alpha is not None else (0,) * s.tspace.d
    axes, W = tensor_quadrature(s.tspace, u.breakpoints, oversample)
    grids = np.meshgrid(*axes, indexing="ij")
    diff = u(*grids, alpha=alpha) - s.grid(axes, alpha)
    return float(np.sqrt(np.sum(W * diff * diff)))


def tensor_function_norm(u: TensorTestFunction, tspace: TensorSpace, alpha,
                         oversample: int = ERROR_OVERSAMPLE) -> float:
    """``||d^alpha u||`` using the quadrature of ``tspace`` (knots plus breakpoints)."""
    axes, W = tensor_quadrature(tspace, u.breakpoints, oversample)
    grids = np.meshgrid(*axes, indexing="ij")
    v = u(*grids, alpha=tuple(alpha))
    return float(np.sqrt(np.sum(W * v * v)))


# --- bounds -----------------------------------------------------------------

def tensor_l2_bound(tspace: TensorSpace, r: int, seminorms: Sequence[float]) -> float:
    """``sum_i C_{h_i,p_i,k_i,r} ||d_i^r u||``."""
    total = 0.0
    for s, n in zip(tspace.spaces, seminorms):
        total += C_value(s.knots.h, s.p, s.k, r, s.knots.length) * n
    return total


def _derivative_space_constants(s: SplineSpace, r: int):
    if s.p < 1 or s.k < 0:
        raise ParameterError("no-derivative-space", f"need p >= 1, k >= 0 in every direction, got {s!r}")
    if s.p - 1 < r - 2:
        raise ParameterError("degree-too-low", f"need p - 1 >= r - 2, got p={s.p}, r={r}")

    def C(m: int) -> float:
        return C_value(s.knots.h, s.p - 1, s.k - 1, m, s.knots.length) if m > 0 else 1.0

    return C


def tensor_ritz_bounds(tspace: TensorSpace, r: int, norms: Mapping[tuple[int, int], float]) -> dict:
    """Balanced ``H^r`` bounds for the first-order Ritz or Q tensor projection (``d = 2``).

    ``norms`` holds ``||d^alpha u||`` for ``alpha`` in ``(r,0), (0,r), (1,r-1), (r-1,1)``.
    The result maps ``(ell_1, ell_2)`` in ``{0,1}^2`` to the bound.
    """
    if tspace.d != 2:
        raise ParameterError("dimension", "tensor Ritz bounds are implemented for d = 2")
    if r < 2:
        raise ParameterError("negative-order", "balanced tensor Ritz bounds need r >= 2")
    C1 = _derivative_space_constants(tspace.spaces[0], r)
    C2 = _derivative_space_constants(tspace.spaces[1], r)
    n_r0, n_0r = norms[(r, 0)], norms[(0, r)]
    n_1r, n_r1 = norms[(1, r - 1)], norms[(r - 1, 1)]
    return {
        (0, 0): C1(1) * C1(r - 1) * n_r0 + C2(1) * C2(r - 1) * n_0r
        + C1(1) * C2(1) * min(C2(r - 2) * n_1r, C1(r - 2) * n_r1),
        (1, 0): C1(r - 1) * n_r0 + C2(1) * C2(r - 2) * n_1r,
        (0, 1): C1(1) * C1(r - 2) * n_r1 + C2(r - 1) * n_0r,
        (1, 1): C1(r - 2) * n_r1 + C2(r - 2) * n_1r,
    }


def tensor_ritz_unbalanced_bound(tspace: TensorSpace, norms: Mapping[tuple[int, int], float]) -> float:
    """Reporting-only bound for targets with only ``d_1 u``, ``d_2 u``, ``d_1 d_2 u`` in L2."""
    C1 = _derivative_space_constants(tspace.spaces[0], 2)
    C2 = _derivative_space_constants(tspace.spaces[1], 2)
    return C1(1) * norms[(1, 0)] + C2(1) * norms[(0, 1)] + C1(1) * C2(1) * norms[(1, 1)]

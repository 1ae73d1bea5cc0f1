"""Geometry maps of the unit square, Faa di Bruno geometry constants, mapped
projections and the continuous multi-patch Q projection.

Physical-domain quantities are always pulled back to the parametric square;
the inverse map is never evaluated.
"""

from __future__ import annotations

import itertools
import math
from abc import ABC, abstractmethod
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    DegenerateMapError,
    InvalidMultipatchError,
    MissingDerivativeError,
    ParameterError,
)
from .quadrature import DEFAULT_OVERSAMPLE
from .spline_core import KnotSequence, SplineSpace, basis_matrix, uniform_knots
from .tensor import (
    TensorSpace,
    TensorSplineFunction,
    TensorTestFunction,
    tensor_project,
    tensor_quadrature,
)

DET_TOL = 1e-10
# Chebyshev-Lobatto points per element and direction for sup-norm sampling.
# An odd count puts a sample at every element midpoint as well as the ends.
DEFAULT_RESOLUTION = 13


# --- Bell polynomials and the Faa di Bruno index sets --------------------------

def bell(r: int, j: int, x: Sequence) -> float | np.ndarray:
    """Partial exponential Bell polynomial ``B_{r,j}(x_1, ..., x_{r-j+1})``.

    Entries of ``x`` may be arrays; the result broadcasts.
    """
    if not (isinstance(r, int) and isinstance(j, int)) or r < 0 or j < 0 or j > r:
        raise ParameterError("bell-index", f"need 0 <= j <= r, got r={r}, j={j}")
    need = r - j + 1 if r > 0 else 0
    if len(x) < need:
        raise ParameterError("bell-arguments", f"B_{{{r},{j}}} needs {need} arguments, got {len(x)}")
    xs = [np.asarray(v, dtype=float) for v in x]

    @lru_cache(maxsize=None)
    def B(n: int, k: int):
        if k == 0:
            return 1.0 if n == 0 else 0.0
        total = 0.0
        for i in range(k - 1, n):
            total = total + math.comb(n, i) * xs[n - i - 1] * B(i, k - 1)
        return total / k

    return B(r, j)


def faa_index_set(r: int, j: Sequence[int], d: int | None = None) -> list[tuple[tuple[int, ...], ...]]:
    """All ``k[m][c] >= 0`` (``m = 1..r``, ``c = 1..d``) with column sums ``j``
    and ``sum_m m * sum_c k[m][c] = r``."""
    j = tuple(int(v) for v in j)
    d = len(j) if d is None else d
    if len(j) != d:
        raise ParameterError("faa-index", f"multi-index {j} does not have {d} entries")
    if not 1 <= sum(j) <= r:
        raise ParameterError("faa-index", f"need 1 <= |j| <= r, got |j|={sum(j)}, r={r}")
    out = []

    def rows_with_sum(total: int, limits: tuple[int, ...]):
        # d-vectors with entries bounded by limits and the given entry sum
        if len(limits) == 1:
            if total <= limits[0]:
                yield (total,)
            return
        for v in range(min(total, limits[0]) + 1):
            for rest in rows_with_sum(total - v, limits[1:]):
                yield (v,) + rest

    def rec(m: int, remaining_r: int, remaining_j: tuple[int, ...], acc: list):
        if m > r:
            if remaining_r == 0 and not any(remaining_j):
                out.append(tuple(acc))
            return
        for s in range(remaining_r // m + 1):
            for row in rows_with_sum(s, remaining_j):
                rec(m + 1, remaining_r - m * s, tuple(a - b for a, b in zip(remaining_j, row)), acc + [row])

    rec(1, r, j, [])
    return out


def faa_coefficient(karr: Sequence[Sequence[int]]) -> float:
    """``r! / prod_{m,c} (k[m][c]! (m!)^k[m][c])`` for an element of :func:`faa_index_set`."""
    r = sum((m + 1) * sum(row) for m, row in enumerate(karr))
    den = 1.0
    for m, row in enumerate(karr, start=1):
        for kmc in row:
            den *= math.factorial(kmc) * math.factorial(m) ** kmc
    return math.factorial(r) / den


def faa_sum(r: int, j: Sequence[int], derivs: Sequence[Sequence]) -> float | np.ndarray:
    """Inner Faa di Bruno sum; ``derivs[m-1][c]`` holds ``d_i^m G_c``."""
    total = 0.0
    for karr in faa_index_set(r, j):
        term = faa_coefficient(karr)
        for m, row in enumerate(karr):
            for c, kmc in enumerate(row):
                if kmc:
                    term = term * np.asarray(derivs[m][c], dtype=float) ** kmc
        total = total + term
    return total


# --- general chain rule -------------------------------------------------------

Monomial = tuple  # sorted tuple of (component, derivative multi-index) factors


@lru_cache(maxsize=None)
def chain_rule_expansion(alpha: tuple[int, ...]) -> dict:
    """Expansion of ``d^alpha (f o G)`` as ``sum_j (D^j f) o G * P_j``.

    ``P_j`` is returned as ``{monomial: coefficient}`` where a monomial lists
    factors ``d^beta G_c`` as ``(c, beta)`` pairs. Built by repeated product
    rule, independently of the index-set formula.
    """
    d = len(alpha)
    zero = (0,) * d
    terms: dict = {zero: {(): 1}}
    for i in range(d):
        for _ in range(alpha[i]):
            new: dict = defaultdict(lambda: defaultdict(int))
            e_i = tuple(int(a == i) for a in range(d))
            for j, poly in terms.items():
                for mono, coef in poly.items():
                    # derivative hits the outer function: D^{j + e_c} f times d_i G_c
                    for c in range(d):
                        jj = tuple(v + (a == c) for a, v in enumerate(j))
                        m2 = tuple(sorted(mono + ((c, e_i),)))
                        new[jj][m2] += coef
                    # derivative hits one factor of the monomial
                    for pos, (c, beta) in enumerate(mono):
                        beta2 = tuple(b + e for b, e in zip(beta, e_i))
                        m2 = tuple(sorted(mono[:pos] + ((c, beta2),) + mono[pos + 1:]))
                        new[j][m2] += coef
            terms = {j: {m: c for m, c in poly.items() if c} for j, poly in new.items()}
    return {j: poly for j, poly in terms.items() if poly}


def evaluate_expansion_poly(poly: Mapping, gder: Callable) -> np.ndarray:
    """Evaluate ``{monomial: coef}`` with ``gder(c, beta)`` giving ``d^beta G_c``."""
    total = 0.0
    for mono, coef in poly.items():
        term = float(coef)
        for c, beta in mono:
            term = term * gder(c, beta)
        total = total + term
    return total


# --- geometry maps --------------------------------------------------------------

class GeometryMap(ABC):
    """Map ``G`` of the unit square into the plane.

    ``knots`` gives the element partition used for mesh-dependent sup-norms;
    ``smoothness`` holds the global continuity per direction (``None`` when
    the map is smooth everywhere).
    """

    knots: tuple[KnotSequence, KnotSequence]
    smoothness: tuple[int, int] | None
    name: str

    @abstractmethod
    def derivative(self, beta, x, y, element: tuple[int, int] | None = None) -> np.ndarray:
        """``d^beta G`` at points; returns shape ``(2,) + x.shape``."""

    def __call__(self, x, y) -> np.ndarray:
        return self.derivative((0, 0), x, y)

    def jacobian(self, x, y, element=None) -> np.ndarray:
        """``J[c, i] = d_i G_c`` with shape ``(2, 2) + x.shape``."""
        return np.stack([self.derivative((1, 0), x, y, element), self.derivative((0, 1), x, y, element)], axis=1)

    def det(self, x, y, element=None) -> np.ndarray:
        J = self.jacobian(x, y, element)
        return J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]


@dataclass(frozen=True, eq=False)
class AnalyticMap(GeometryMap):
    """Map given by closed-form partial derivatives ``{beta: f(x, y) -> (G_1, G_2)}``."""

    derivatives: Mapping[tuple[int, int], Callable]
    knots: tuple[KnotSequence, KnotSequence] = (uniform_knots(0, 1, 0), uniform_knots(0, 1, 0))
    smoothness: tuple[int, int] | None = None
    name: str = "analytic"

    def derivative(self, beta, x, y, element=None) -> np.ndarray:
        beta = tuple(beta)
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        if beta not in self.derivatives:
            raise MissingDerivativeError(f"map {self.name} has no derivative {beta}")
        g1, g2 = self.derivatives[beta](x, y)
        return np.stack([np.broadcast_to(np.asarray(g1, dtype=float), x.shape),
                         np.broadcast_to(np.asarray(g2, dtype=float), x.shape)])


@dataclass(frozen=True, eq=False)
class SplineMap(GeometryMap):
    """Componentwise tensor-product spline map; derivatives are taken per element."""

    tspace: TensorSpace
    control: np.ndarray  # shape (2, n1, n2)
    name: str = "spline"

    @property
    def knots(self):
        return tuple(s.knots for s in self.tspace.spaces)

    @property
    def smoothness(self):
        return tuple(s.k for s in self.tspace.spaces)

    def derivative(self, beta, x, y, element=None) -> np.ndarray:
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        s1, s2 = self.tspace.spaces
        e1, e2 = element if element is not None else (None, None)
        B1 = basis_matrix(s1, x.ravel(), beta[0], element=e1)
        B2 = basis_matrix(s2, y.ravel(), beta[1], element=e2)
        vals = np.einsum("mi,cij,mj->cm", B1, self.control, B2)
        return vals.reshape((2,) + x.shape)


def identity_map() -> AnalyticMap:
    return affine_map(np.eye(2), np.zeros(2), name="identity")


def affine_map(A, b, name: str = "affine") -> AnalyticMap:
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    ders = {
        (0, 0): lambda x, y: (A[0, 0] * x + A[0, 1] * y + b[0], A[1, 0] * x + A[1, 1] * y + b[1]),
        (1, 0): lambda x, y: (A[0, 0], A[1, 0]),
        (0, 1): lambda x, y: (A[0, 1], A[1, 1]),
    }
    for beta in itertools.product(range(12), repeat=2):
        if sum(beta) >= 2:
            ders[beta] = lambda x, y: (0.0, 0.0)
    return AnalyticMap(ders, name=name)


def quadratic_spline_map(amplitude: float = 0.08, N: int = 1) -> SplineMap:
    """C^1 quadratic spline map of the unit square onto itself.

    Control points sit at the Greville abscissae (the identity) with interior
    points displaced, so the boundary is mapped to itself.
    """
    space = SplineSpace(uniform_knots(0.0, 1.0, N), 2, 1)
    g = space.greville
    n = g.size
    X, Y = np.meshgrid(g, g, indexing="ij")
    wave = np.zeros(n)
    wave[1:-1] = np.where(np.arange(1, n - 1) % 2 == 1, 1.0, -1.0)
    bump = np.outer(wave, np.abs(wave))
    control = np.stack([X + amplitude * bump, Y + 0.5 * amplitude * bump.T])
    return SplineMap(TensorSpace((space, space)), control, name="quadratic_spline")


# --- sampling and geometry constants --------------------------------------------

def chebyshev_lobatto(lo: float, hi: float, n: int) -> np.ndarray:
    if n < 2:
        raise ParameterError("resolution", "sampling needs at least 2 points per element and direction")
    t = np.cos(np.pi * np.arange(n) / (n - 1))[::-1]
    return 0.5 * (lo + hi) + 0.5 * (hi - lo) * t


def element_samples(G: GeometryMap, resolution: int):
    """Yield ``(x, y, element)`` Chebyshev-Lobatto grids on every element of ``G``."""
    xi1, xi2 = (k.breakpoints for k in G.knots)
    for e1 in range(xi1.size - 1):
        px = chebyshev_lobatto(xi1[e1], xi1[e1 + 1], resolution)
        for e2 in range(xi2.size - 1):
            py = chebyshev_lobatto(xi2[e2], xi2[e2 + 1], resolution)
            x, y = np.meshgrid(px, py, indexing="ij")
            yield x, y, (e1, e2)


@dataclass(frozen=True)
class GeometryConstants:
    """Sampled geometry constants.

    ``table[alpha][j]`` is the sup of the Faa di Bruno coefficient of
    ``D^j u~`` in ``d^alpha (u~ o G)``; ``alpha = (r, 0)`` and ``(0, r)`` give the
    directional constants, ``(1, 1)`` (for ``r = 2``) the mixed ones.
    """

    C_G: float
    det_sup: float
    inv_det_sup: float
    r: int
    table: dict
    flavor: str
    resolution: int

    def C(self, i: int, j) -> float:
        alpha = (self.r, 0) if i == 1 else (0, self.r)
        return self.table[alpha].get(tuple(j), 0.0)

    def C_mixed(self, j) -> float:
        return self.table[(1, 1)].get(tuple(j), 0.0)

    @property
    def multi_indices(self) -> list[tuple[int, int]]:
        return [j for j in itertools.product(range(self.r + 1), repeat=2) if 1 <= sum(j) <= self.r]


def _map_derivative_cache(G: GeometryMap, x, y, element):
    cache = {}

    def gder(c: int, beta) -> np.ndarray:
        beta = tuple(beta)
        if beta not in cache:
            cache[beta] = G.derivative(beta, x, y, element)
        return cache[beta][c]

    return gder


def geometry_constants(G: GeometryMap, r: int, flavor: str = "mesh",
                       resolution: int = DEFAULT_RESOLUTION) -> GeometryConstants:
    """Sampled ``C_G`` and ``C_{G,i,r,j}`` (and the mixed constants for ``r = 2``).

    ``flavor="mesh"`` takes the sup element by element with one-sided
    derivatives; ``flavor="global"`` additionally requires the map to have
    ``r - 1`` continuous derivatives, so both flavors sample the same points.
    """
    if flavor not in ("mesh", "global"):
        raise ParameterError("flavor", f"flavor must be 'mesh' or 'global', got {flavor!r}")
    if r < 1:
        raise ParameterError("negative-order", "geometry constants need r >= 1")
    if flavor == "global" and G.smoothness is not None and min(G.smoothness) < r - 1:
        raise ParameterError("map-not-smooth", f"global sup-norms need C^{r - 1} maps, got smoothness {G.smoothness}")
    alphas = [(r, 0), (0, r)] + ([(1, 1)] if r == 2 else [])
    js = [j for j in itertools.product(range(r + 1), repeat=2) if 1 <= sum(j) <= r]
    table = {a: dict.fromkeys(js, 0.0) for a in alphas}
    det_sup, inv_det_sup = 0.0, 0.0
    for x, y, el in element_samples(G, resolution):
        gder = _map_derivative_cache(G, x, y, el)
        det = gder(0, (1, 0)) * gder(1, (0, 1)) - gder(0, (0, 1)) * gder(1, (1, 0))
        if np.min(np.abs(det)) < DET_TOL:
            raise DegenerateMapError(f"|det grad G| below {DET_TOL} on element {el}")
        det_sup = max(det_sup, float(np.max(np.abs(det))))
        inv_det_sup = max(inv_det_sup, float(np.max(1.0 / np.abs(det))))
        for i, alpha in enumerate(alphas[:2]):
            unit = (1, 0) if i == 0 else (0, 1)
            derivs = [[gder(c, tuple(m * u for u in unit)) for c in range(2)] for m in range(1, r + 1)]
            for j in js:
                v = faa_sum(r, j, derivs)
                table[alpha][j] = max(table[alpha][j], float(np.max(np.abs(v))))
        if r == 2:
            exp = chain_rule_expansion((1, 1))
            for j in js:
                if j in exp:
                    v = evaluate_expansion_poly(exp[j], gder)
                    table[(1, 1)][j] = max(table[(1, 1)][j], float(np.max(np.abs(v))))
    return GeometryConstants(det_sup * inv_det_sup, det_sup, inv_det_sup, r, table, flavor, resolution)


# --- pullback and mapped projection ----------------------------------------------

def _map_breaks(G: GeometryMap) -> tuple[tuple[float, ...], ...]:
    return tuple(tuple(k.breakpoints[1:-1]) for k in G.knots)


def pullback(G: GeometryMap, u_phys: TensorTestFunction, max_order: int = 2) -> TensorTestFunction:
    """Parametric target ``u = u~ o G`` with partial derivatives up to ``max_order``."""
    ders = {}
    for alpha in itertools.product(range(max_order + 1), repeat=2):
        if sum(alpha) > max_order:
            continue
        exp = chain_rule_expansion(alpha)
        if not all(u_phys.has(j) for j in exp):
            continue

        def fn(x, y, alpha=alpha, exp=exp):
            gder = _map_derivative_cache(G, x, y, None)
            X, Y = gder(0, (0, 0)), gder(1, (0, 0))
            total = 0.0
            for j, poly in exp.items():
                total = total + u_phys(X, Y, alpha=j) * evaluate_expansion_poly(poly, gder)
            return total

        ders[alpha] = fn
    return TensorTestFunction(ders, _map_breaks(G),
                              name=f"{u_phys.name}@{G.name}")


@dataclass(frozen=True, eq=False)
class MappedProjectionResult:
    geometry: GeometryMap
    function: TensorSplineFunction
    kind: str
    diagnostics: dict = field(default_factory=dict)

    def physical_derivative(self, ell, x, y) -> np.ndarray:
        """``d~^ell (s o G^{-1})`` at the images ``G(x, y)`` of parametric points."""
        ell = tuple(ell)
        s, G = self.function, self.geometry
        if ell == (0, 0):
            return s(x, y)
        J = G.jacobian(x, y)
        det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        # inverse-transpose of the Jacobian, entrywise
        JiT = np.stack([np.stack([J[1, 1], -J[1, 0]]), np.stack([-J[0, 1], J[0, 0]])]) / det
        grad = np.stack([s(x, y, alpha=(1, 0)), s(x, y, alpha=(0, 1))])
        g_phys = np.einsum("ab...,b...->a...", JiT, grad)
        if sum(ell) == 1:
            return g_phys[0] if ell == (1, 0) else g_phys[1]
        if ell not in ((1, 1), (2, 0), (0, 2)):
            raise MissingDerivativeError(f"physical derivative {ell} not supported")
        Hs = np.array([[s(x, y, alpha=(2, 0)), s(x, y, alpha=(1, 1))],
                       [s(x, y, alpha=(1, 1)), s(x, y, alpha=(0, 2))]])
        for c in range(2):
            hess_c = np.array([[G.derivative((2, 0), x, y)[c], G.derivative((1, 1), x, y)[c]],
                               [G.derivative((1, 1), x, y)[c], G.derivative((0, 2), x, y)[c]]])
            Hs = Hs - g_phys[c] * hess_c
        H = np.einsum("ab...,bc...,dc...->ad...", JiT, Hs, JiT)
        a, b = {(1, 1): (0, 1), (2, 0): (0, 0), (0, 2): (1, 1)}[ell]
        return H[a, b]

    def physical_error(self, u_phys: TensorTestFunction, ell=(0, 0), oversample: int = 8) -> float:
        """``||d~^ell (u~ - Pi~ u~)||`` over the physical domain, by pullback."""
        G = self.geometry
        axes, W = tensor_quadrature(self.function.tspace, _map_breaks(G), oversample)
        x, y = np.meshgrid(*axes, indexing="ij")
        X = G(x, y)
        det = np.abs(self.geometry.det(x, y))
        diff = u_phys(X[0], X[1], alpha=tuple(ell)) - self.physical_derivative(ell, x, y)
        return float(np.sqrt(np.sum(W * det * diff * diff)))

    def parametric_error(self, u_param: TensorTestFunction, alpha=(0, 0), oversample: int = 8) -> float:
        from .tensor import tensor_error_norm
        return tensor_error_norm(u_param, self.function, alpha, oversample)


def physical_norm(G: GeometryMap, tspace: TensorSpace, u_phys: TensorTestFunction, j, oversample: int = 8) -> float:
    """``||D^j u~||`` over ``G(Omega)`` via parametric quadrature weighted by ``|det grad G|``."""
    axes, W = tensor_quadrature(tspace, _map_breaks(G), oversample)
    x, y = np.meshgrid(*axes, indexing="ij")
    X = G(x, y)
    v = u_phys(X[0], X[1], alpha=tuple(j))
    return float(np.sqrt(np.sum(W * np.abs(G.det(x, y)) * v * v)))


def _check_map(G: GeometryMap, tspace: TensorSpace, resolution: int = DEFAULT_RESOLUTION) -> None:
    if tspace.d != 2 or any(dom != (0.0, 1.0) for dom in tspace.domain):
        raise ParameterError("parametric-domain", "mapped projections live on the unit square")
    for x, y, el in element_samples(G, resolution):
        if np.min(np.abs(G.det(x, y, el))) < DET_TOL:
            raise DegenerateMapError(f"|det grad G| below {DET_TOL} on element {el}")


def mapped_project(G: GeometryMap, tspace: TensorSpace, u_phys: TensorTestFunction, kind: str = "l2",
                   oversample: int = DEFAULT_OVERSAMPLE) -> MappedProjectionResult:
    """``(Pi (u~ o G)) o G^{-1}``, represented by its parametric spline."""
    _check_map(G, tspace)
    u = pullback(G, u_phys, max_order=2)
    res = tensor_project(tspace, u, kind, oversample)
    return MappedProjectionResult(G, res.function, kind, res.diagnostics)


# --- mapped bounds --------------------------------------------------------------

def physical_norm_table(G: GeometryMap, tspace: TensorSpace, u_phys: TensorTestFunction, r: int) -> dict:
    return {j: physical_norm(G, tspace, u_phys, j)
            for j in itertools.product(range(r + 1), repeat=2) if 1 <= sum(j) <= r}


def mapped_l2_bound(consts: GeometryConstants, tspace: TensorSpace, norms: Mapping) -> float:
    """``C_G sum_j (sum_i C_{h_i,p_i,k_i,r} C_{G,i,r,j}) ||D^j u~||``."""
    from .constants import C_value
    r = consts.r
    Cs = [C_value(s.knots.h, s.p, s.k, r, s.knots.length) for s in tspace.spaces]
    total = 0.0
    for j in consts.multi_indices:
        total += (Cs[0] * consts.C(1, j) + Cs[1] * consts.C(2, j)) * norms[j]
    return consts.C_G * total


def mapped_ritz_bound(consts: GeometryConstants, tspace: TensorSpace, ell, norms: Mapping) -> float:
    """Second-order bound for the mapped first-order Ritz or Q projection onto
    maximally smooth spaces: ``C_G (h/pi)^(2-|ell|) sum_j (C_{G,1,2,j} + C_{G,2,2,j} + C_{G,12,2,j}) ||D^j u~||``.
    """
    if consts.r != 2:
        raise ParameterError("order-mismatch", "the mapped Ritz bound uses r = 2 geometry constants")
    for s in tspace.spaces:
        if s.p < 1 or s.k != s.p - 1:
            raise ParameterError("not-maximal-smoothness", f"mapped Ritz bound needs k = p - 1 >= 0, got {s!r}")
    h = max(tspace.h)
    total = sum((consts.C(1, j) + consts.C(2, j) + consts.C_mixed(j)) * norms[j] for j in consts.multi_indices)
    return consts.C_G * (h / math.pi) ** (2 - sum(ell)) * total


# --- multi-patch ----------------------------------------------------------------

EDGES = ("left", "right", "bottom", "top")


def edge_points(edge: str, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    t = np.asarray(t, dtype=float)
    if edge == "left":
        return np.zeros_like(t), t
    if edge == "right":
        return np.ones_like(t), t
    if edge == "bottom":
        return t, np.zeros_like(t)
    if edge == "top":
        return t, np.ones_like(t)
    raise InvalidMultipatchError(f"unknown edge {edge!r}")


def _edge_space(tspace: TensorSpace, edge: str) -> SplineSpace:
    return tspace.spaces[1] if edge in ("left", "right") else tspace.spaces[0]


@dataclass(frozen=True)
class Patch:
    geometry: GeometryMap
    tspace: TensorSpace


@dataclass(frozen=True)
class Interface:
    patch_a: int
    edge_a: str
    patch_b: int
    edge_b: str
    reversed: bool = False


@dataclass(frozen=True, eq=False)
class MultiPatch:
    patches: tuple[Patch, ...]
    interfaces: tuple[Interface, ...] = ()
    samples: int = 100

    def __post_init__(self):
        object.__setattr__(self, "patches", tuple(self.patches))
        object.__setattr__(self, "interfaces", tuple(self.interfaces))
        t = np.linspace(0.0, 1.0, self.samples)
        for itf in self.interfaces:
            for idx, edge in ((itf.patch_a, itf.edge_a), (itf.patch_b, itf.edge_b)):
                if not 0 <= idx < len(self.patches) or edge not in EDGES:
                    raise InvalidMultipatchError(f"bad interface reference {itf}")
            pa, pb = self.patches[itf.patch_a], self.patches[itf.patch_b]
            sa, sb = _edge_space(pa.tspace, itf.edge_a), _edge_space(pb.tspace, itf.edge_b)
            xb = sb.knots.breakpoints
            if itf.reversed:
                xb = (xb[0] + xb[-1]) - xb[::-1]
            if (sa.p, sa.k) != (sb.p, sb.k) or xb.shape != sa.knots.breakpoints.shape \
                    or not np.allclose(xb, sa.knots.breakpoints, rtol=0, atol=1e-12):
                raise InvalidMultipatchError(f"interface spaces do not match: {itf}")
            tb = 1.0 - t if itf.reversed else t
            ga = pa.geometry(*edge_points(itf.edge_a, t))
            gb = pb.geometry(*edge_points(itf.edge_b, tb))
            if np.max(np.abs(ga - gb)) > 1e-10:
                raise InvalidMultipatchError(f"parameterizations differ along interface {itf}")


def _patch_target(u, i: int) -> TensorTestFunction:
    return u[i] if isinstance(u, (list, tuple)) else u


def multipatch_q_project(mp: MultiPatch, u_phys, oversample: int = DEFAULT_OVERSAMPLE) -> list[MappedProjectionResult]:
    """Patchwise mapped Q projection; the glued result is continuous across interfaces."""
    return [mapped_project(pt.geometry, pt.tspace, _patch_target(u_phys, i), "q", oversample)
            for i, pt in enumerate(mp.patches)]


def interface_jump(mp: MultiPatch, results: Sequence[MappedProjectionResult], samples: int = 100) -> float:
    """Largest mismatch of patch projections along all interfaces."""
    t = np.linspace(0.0, 1.0, samples)
    worst = 0.0
    for itf in mp.interfaces:
        tb = 1.0 - t if itf.reversed else t
        va = results[itf.patch_a].function(*edge_points(itf.edge_a, t))
        vb = results[itf.patch_b].function(*edge_points(itf.edge_b, tb))
        worst = max(worst, float(np.max(np.abs(va - vb))))
    return worst


def two_patch_square(tspace: TensorSpace) -> MultiPatch:
    """Unit square split at ``x = 1/2``; the second patch is rotated by a half turn."""
    G1 = affine_map([[0.5, 0.0], [0.0, 1.0]], [0.0, 0.0], name="left_half")
    G2 = affine_map([[-0.5, 0.0], [0.0, -1.0]], [1.0, 1.0], name="right_half_rotated")
    return MultiPatch((Patch(G1, tspace), Patch(G2, tspace)),
                      (Interface(0, "right", 1, "right", reversed=True),))


CATALOG = {
    "identity": identity_map,
    "affine": affine_map,
    "quadratic_spline": quadratic_spline_map,
}


def catalog_map(name: str, **params) -> GeometryMap:
    try:
        factory = CATALOG[name]
    except KeyError:
        raise ParameterError("unknown-map", f"unknown map {name!r}; known: {sorted(CATALOG)}") from None
    return factory(**params)

"""Knot sequences, spline spaces of arbitrary smoothness and B-spline evaluation.

A space of degree ``p`` and smoothness ``k`` on the break points
``a = xi_0 < ... < xi_{N+1} = b`` is realized by B-splines on the open knot
vector with end multiplicity ``p + 1`` and interior multiplicity ``p - k``.
Elements are half-open ``[xi_j, xi_{j+1})`` except the last, which is closed,
so evaluation at an interior break point returns the right limit unless
``side="left"`` is requested.
"""

from __future__ import annotations

from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from math import comb

import numpy as np

from .errors import (
    DegreeTooHighError,
    InvalidDomainError,
    InvalidSmoothnessError,
    MissingDerivativeError,
    OutOfDomainError,
)

# Relative slack used when deciding whether a point lies inside [a, b].
_DOMAIN_TOL = 1e-13


@dataclass(frozen=True, eq=False)
class KnotSequence:
    """Strictly increasing break points ``xi_0 < ... < xi_{N+1}``."""

    breakpoints: np.ndarray

    def __post_init__(self):
        xi = np.array(self.breakpoints, dtype=float)
        if xi.ndim != 1 or xi.size < 2:
            raise InvalidDomainError("need at least two break points")
        if not np.all(np.isfinite(xi)):
            raise InvalidDomainError("break points must be finite")
        if not np.all(np.diff(xi) > 0):
            raise InvalidDomainError("break points must be strictly increasing")
        xi.flags.writeable = False
        object.__setattr__(self, "breakpoints", xi)

    @property
    def a(self) -> float:
        return float(self.breakpoints[0])

    @property
    def b(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def N(self) -> int:
        """Number of interior break points."""
        return self.breakpoints.size - 2

    @property
    def spacings(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    @property
    def h(self) -> float:
        return float(self.spacings.max())

    @property
    def h_min(self) -> float:
        return float(self.spacings.min())

    @property
    def h_hat(self) -> float:
        """Maximal spacing with the first and last intervals counted twice."""
        d = self.spacings.copy()
        d[[0, -1]] *= 2.0  # a single interval is doubled once
        return float(d.max())

    def refine(self, x: float) -> KnotSequence:
        """Return the sequence with one extra break point ``x``."""
        if not self.a < x < self.b or np.any(self.breakpoints == x):
            raise InvalidDomainError(f"cannot insert break point {x}")
        return KnotSequence(np.sort(np.append(self.breakpoints, x)))

    def __eq__(self, other):
        return isinstance(other, KnotSequence) and np.array_equal(
            self.breakpoints, other.breakpoints
        )

    def __hash__(self):
        return hash(self.breakpoints.tobytes())

    def __repr__(self):
        return f"KnotSequence({self.breakpoints.tolist()})"


def uniform_knots(a: float, b: float, N: int) -> KnotSequence:
    """``N + 2`` equispaced break points on ``[a, b]``."""
    if not (np.isfinite(a) and np.isfinite(b)) or not a < b:
        raise InvalidDomainError(f"invalid interval ({a}, {b})")
    if N < 0:
        raise InvalidDomainError("N must be nonnegative")
    return KnotSequence(np.linspace(a, b, N + 2))


@dataclass(frozen=True, eq=False)
class SplineSpace:
    knots: KnotSequence
    degree: int
    smoothness: int

    def __post_init__(self):
        p, k = int(self.degree), int(self.smoothness)
        if p < 0:
            raise InvalidSmoothnessError("degree must be nonnegative")
        if not -1 <= k <= p - 1:
            raise InvalidSmoothnessError(f"smoothness {k} outside [-1, {p - 1}]")
        object.__setattr__(self, "degree", p)
        object.__setattr__(self, "smoothness", k)

    @property
    def p(self) -> int:
        return self.degree

    @property
    def k(self) -> int:
        return self.smoothness

    @property
    def dim(self) -> int:
        return self.knots.N * (self.p - self.k) + self.p + 1

    @cached_property
    def knot_vector(self) -> np.ndarray:
        xi = self.knots.breakpoints
        mult = np.full(xi.size, self.p - self.k)
        mult[0] = mult[-1] = self.p + 1
        t = np.repeat(xi, mult)
        t.flags.writeable = False
        return t

    @cached_property
    def element_spans(self) -> np.ndarray:
        """Knot-vector index ``mu`` with ``[t_mu, t_{mu+1})`` equal to each element."""
        xi = self.knots.breakpoints[:-1]
        return np.searchsorted(self.knot_vector, xi, side="right") - 1

    @property
    def greville(self) -> np.ndarray:
        t = self.knot_vector
        p = self.p
        if p == 0:
            return 0.5 * (t[:-1] + t[1:])
        return np.array([t[i + 1 : i + p + 1].mean() for i in range(self.dim)])

    def derivative_space(self) -> SplineSpace:
        """The space of first derivatives (degree and smoothness one lower)."""
        if self.p < 1 or self.k < 0:
            raise InvalidSmoothnessError("derivative space needs p >= 1 and k >= 0")
        return SplineSpace(self.knots, self.p - 1, self.k - 1)

    def refine(self, x: float) -> SplineSpace:
        return SplineSpace(self.knots.refine(x), self.p, self.k)

    def __eq__(self, other):
        return (
            isinstance(other, SplineSpace)
            and self.p == other.p
            and self.k == other.k
            and self.knots == other.knots
        )

    def __hash__(self):
        return hash((self.knots, self.p, self.k))

    def __repr__(self):
        return f"SplineSpace(p={self.p}, k={self.k}, N={self.knots.N}, [{self.knots.a}, {self.knots.b}])"


def make_space(knots: KnotSequence, p: int, k: int) -> SplineSpace:
    return SplineSpace(knots, p, k)


def _check_points(space: SplineSpace, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    a, b = space.knots.a, space.knots.b
    tol = _DOMAIN_TOL * max(1.0, abs(a), abs(b))
    if np.any(x < a - tol) or np.any(x > b + tol) or not np.all(np.isfinite(x)):
        raise OutOfDomainError(f"points outside [{a}, {b}]")
    return np.clip(x, a, b)


def find_spans(space: SplineSpace, x: np.ndarray, side: str = "right") -> np.ndarray:
    t = space.knot_vector
    p, n = space.p, space.dim
    if side == "right":
        mu = np.searchsorted(t, x, side="right") - 1
    elif side == "left":
        mu = np.searchsorted(t, x, side="left") - 1
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return np.clip(mu, p, n - 1)


def _basis_ders(t: np.ndarray, p: int, spans: np.ndarray, x: np.ndarray, nd: int) -> np.ndarray:
    """Nonzero B-splines and derivatives, vectorized over points.

    Returns ``ders[d, r, m]``: the ``d``-th derivative of basis ``spans[m] - p + r``
    at ``x[m]``, for ``d <= min(nd, p)``.
    """
    m = x.size
    ndu = np.zeros((p + 1, p + 1, m))
    ndu[0, 0] = 1.0
    left = np.zeros((p + 1, m))
    right = np.zeros((p + 1, m))
    for j in range(1, p + 1):
        left[j] = x - t[spans + 1 - j]
        right[j] = t[spans + j] - x
        saved = np.zeros(m)
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved

    nd = min(nd, p)
    ders = np.zeros((nd + 1, p + 1, m))
    ders[0] = ndu[:, p]
    for r in range(p + 1):
        a = np.zeros((2, p + 1, m))
        s1, s2 = 0, 1
        a[0, 0] = 1.0
        for k in range(1, nd + 1):
            d = np.zeros(m)
            rk, pk = r - k, p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d += a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d += a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d += a[s2, k] * ndu[r, pk]
            ders[k, r] = d
            s1, s2 = s2, s1
    fac = float(p)
    for k in range(1, nd + 1):
        ders[k] *= fac
        fac *= p - k
    return ders


def eval_basis_local(
    space: SplineSpace,
    x,
    d: int = 0,
    side: str = "right",
    element: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized form of :func:`eval_basis`.

    Returns ``(first, values)`` where ``values[m, r]`` is the ``d``-th derivative
    of basis function ``first[m] + r`` at ``x[m]``. With ``element`` given, every
    point is evaluated with that element's polynomial piece (one-sided limits on
    its closure).
    """
    if d < 0:
        raise ValueError("derivative order must be nonnegative")
    x = _check_points(space, x)
    p = space.p
    if element is None:
        spans = find_spans(space, x, side)
    else:
        spans = np.full(x.size, space.element_spans[element])
    if d > p:
        return spans - p, np.zeros((x.size, p + 1))
    ders = _basis_ders(space.knot_vector, p, spans, x, d)
    return spans - p, ders[d].T.copy()


def eval_basis(space: SplineSpace, x: float, d: int = 0, side: str = "right"):
    """Nonzero basis values (or ``d``-th derivatives) at a single point."""
    first, vals = eval_basis_local(space, [x], d, side)
    return int(first[0]), vals[0]


def basis_matrix(
    space: SplineSpace, x, d: int = 0, side: str = "right", element: int | None = None
) -> np.ndarray:
    """Dense collocation matrix ``B[m, i] = d^d B_i(x_m)``."""
    first, vals = eval_basis_local(space, x, d, side, element)
    B = np.zeros((first.size, space.dim))
    rows = np.arange(first.size)[:, None]
    cols = first[:, None] + np.arange(space.p + 1)[None, :]
    B[rows, cols] = vals
    return B


@dataclass(frozen=True, eq=False)
class SplineFunction:
    space: SplineSpace
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float)
        if c.shape != (self.space.dim,):
            raise ValueError(f"expected {self.space.dim} coefficients, got shape {c.shape}")
        c.flags.writeable = False
        object.__setattr__(self, "coefficients", c)

    def __call__(self, x, d: int = 0, side: str = "right") -> np.ndarray:
        first, vals = eval_basis_local(self.space, x, d, side)
        idx = first[:, None] + np.arange(self.space.p + 1)[None, :]
        return np.einsum("mr,mr->m", vals, self.coefficients[idx])

    def jumps(self, d: int) -> np.ndarray:
        """Right minus left limit of the ``d``-th derivative at interior break points."""
        xi = self.space.knots.breakpoints[1:-1]
        if xi.size == 0:
            return np.zeros(0)
        return self(xi, d, side="right") - self(xi, d, side="left")

    def derivative(self) -> SplineFunction:
        """Exact derivative as a member of :meth:`SplineSpace.derivative_space`."""
        sp = self.space
        t, p, c = sp.knot_vector, sp.p, self.coefficients
        i = np.arange(1, sp.dim)
        dc = p * (c[1:] - c[:-1]) / (t[i + p] - t[i])
        return SplineFunction(sp.derivative_space(), dc)

    def __add__(self, other: SplineFunction) -> SplineFunction:
        if other.space != self.space:
            raise ValueError("spaces differ")
        return SplineFunction(self.space, self.coefficients + other.coefficients)

    def __sub__(self, other: SplineFunction) -> SplineFunction:
        if other.space != self.space:
            raise ValueError("spaces differ")
        return SplineFunction(self.space, self.coefficients - other.coefficients)


def eval_spline(f: SplineFunction, x: float, d: int = 0) -> float:
    return float(f(x, d)[0])


def antiderivative(space: SplineSpace, dcoefs, value_at_a: float) -> SplineFunction:
    """Spline in ``space`` whose derivative has coefficients ``dcoefs`` in
    ``space.derivative_space()`` and whose value at ``a`` is ``value_at_a``.
    """
    t, p = space.knot_vector, space.p
    dcoefs = np.asarray(dcoefs, dtype=float)
    if dcoefs.shape != (space.dim - 1,):
        raise ValueError("derivative coefficients have the wrong length")
    i = np.arange(1, space.dim)
    steps = dcoefs * (t[i + p] - t[i]) / p
    c = value_at_a + np.concatenate([[0.0], np.cumsum(steps)])
    return SplineFunction(space, c)


def _elementary_symmetric(values: np.ndarray, jmax: int) -> np.ndarray:
    e = np.zeros(jmax + 1)
    e[0] = 1.0
    for v in values:
        e[1:] = e[1:] + v * e[:-1]
    return e


def embed_polynomial(space: SplineSpace, poly_coefficients: Sequence[float]) -> SplineFunction:
    """Exact B-spline coefficients of ``sum_j a_j x**j`` by blossoming.

    The ``i``-th coefficient is the polar form evaluated at ``t_{i+1..i+p}``.
    """
    a = np.trim_zeros(np.asarray(poly_coefficients, dtype=float), "b")
    p = space.p
    if a.size == 0:
        return SplineFunction(space, np.zeros(space.dim))
    if a.size - 1 > p:
        raise DegreeTooHighError(f"polynomial degree {a.size - 1} exceeds spline degree {p}")
    t = space.knot_vector
    binv = np.array([1.0 / comb(p, j) for j in range(a.size)])
    c = np.empty(space.dim)
    for i in range(space.dim):
        e = _elementary_symmetric(t[i + 1 : i + p + 1], p)
        c[i] = np.dot(a, e[: a.size] * binv)
    return SplineFunction(space, c)


def insert_breakpoint(f: SplineFunction, x: float) -> SplineFunction:
    """Represent ``f`` exactly in the space refined by one break point ``x``.

    Boehm insertion repeated ``p - k`` times.
    """
    space = f.space
    new_space = space.refine(x)
    t = np.array(space.knot_vector)
    c = np.array(f.coefficients)
    p = space.p
    for _ in range(p - space.k):
        mu = int(np.searchsorted(t, x, side="right") - 1)
        new = np.empty(c.size + 1)
        new[: mu - p + 1] = c[: mu - p + 1]
        for i in range(mu - p + 1, mu + 1):
            alpha = (x - t[i]) / (t[i + p] - t[i])
            new[i] = alpha * c[i] + (1.0 - alpha) * c[i - 1]
        new[mu + 1 :] = c[mu:]
        t = np.insert(t, mu + 1, x)
        c = new
    assert np.allclose(t, new_space.knot_vector)
    return SplineFunction(new_space, c)


@dataclass(frozen=True)
class TestFunction:
    """Target function with derivative evaluators.

    ``derivatives[d]`` evaluates the ``d``-th derivative (index 0 is the value).
    ``breakpoints`` lists interior points where the highest derivatives jump;
    quadrature is split there. ``seminorms`` may hold exact ``||d^r u||`` on
    ``domain``.
    """

    __test__ = False  # not a pytest test class

    derivatives: tuple[Callable, ...]
    breakpoints: tuple[float, ...] = ()
    seminorms: Mapping[int, float] = field(default_factory=dict)
    domain: tuple[float, float] | None = None
    name: str = ""

    @property
    def r_max(self) -> int:
        return len(self.derivatives) - 1

    def __call__(self, x, d: int = 0) -> np.ndarray:
        if d > self.r_max:
            raise MissingDerivativeError(f"{self.name or 'function'} has no derivative of order {d}")
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(self.derivatives[d](x), dtype=float), x.shape)

    def seminorm(self, r: int, domain: tuple[float, float]) -> float | None:
        """Exact ``||d^r u||`` if known for this domain, else ``None``."""
        if self.domain is not None and tuple(domain) == tuple(self.domain):
            return self.seminorms.get(r)
        return None


def spline_as_test_function(f: SplineFunction) -> TestFunction:
    """Wrap a spline so that projectors can consume it as data."""
    p = f.space.p
    ders = tuple((lambda x, d=d: f(np.ravel(x), d).reshape(np.shape(x))) for d in range(p + 2))
    return TestFunction(ders, tuple(f.space.knots.breakpoints[1:-1]), name="spline")


def polynomial_test_function(poly_coefficients: Sequence[float], max_order: int | None = None) -> TestFunction:
    """``sum_j a_j x**j`` with all derivatives (power-basis coefficients)."""
    P = np.polynomial.Polynomial(np.asarray(poly_coefficients, dtype=float))
    if max_order is None:
        max_order = max(P.degree(), 0) + 2
    ders = []
    for d in range(max_order + 1):
        ders.append(P.deriv(d) if d else P)
    return TestFunction(tuple(ders), name="poly")

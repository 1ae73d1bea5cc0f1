"""Named target functions for verification runs.

Every entry comes with closed-form derivative evaluators. Exact seminorms are
attached on the requested domain whenever a closed form is available.
"""

from __future__ import annotations

import math
from typing import Any, Callable, Mapping

import numpy as np

from .errors import ConfigError, MissingDerivativeError
from .quadrature import gauss_legendre
from .spline_core import TestFunction, polynomial_test_function
from .tensor import TensorTestFunction, separable

DEFAULT_ORDER = 12


def _sin(omega: float = 2 * math.pi, phi: float = 0.0, domain=(0.0, 1.0), max_order: int = DEFAULT_ORDER) -> TestFunction:
    omega, phi = float(omega), float(phi)
    a, b = map(float, domain)
    ders = tuple((lambda x, d=d: omega**d * np.sin(omega * x + phi + d * math.pi / 2)) for d in range(max_order + 1))
    norms = {}
    for r in range(max_order + 1):
        shift = phi + r * math.pi / 2
        if omega == 0.0:
            sq = (b - a) * math.sin(shift) ** 2 if r == 0 else 0.0
        else:
            # int sin^2 = (b - a)/2 - (sin 2(wb + s) - sin 2(wa + s)) / (4 w)
            sq = omega ** (2 * r) * ((b - a) / 2 - (math.sin(2 * (omega * b + shift)) - math.sin(2 * (omega * a + shift))) / (4 * omega))
        norms[r] = math.sqrt(max(sq, 0.0))
    return TestFunction(ders, (), norms, (a, b), f"sin({omega:g}x+{phi:g})")


def _poly(coefficients=None, degree: int | None = None, seed: int = 0, domain=(0.0, 1.0),
          max_order: int | None = None) -> TestFunction:
    if coefficients is None:
        if degree is None:
            raise ConfigError("poly needs 'coefficients' or 'degree'")
        coefficients = np.random.default_rng(seed).uniform(-1.0, 1.0, int(degree) + 1)
    coefficients = np.asarray(coefficients, dtype=float)
    f = polynomial_test_function(coefficients, max_order)
    a, b = map(float, domain)
    P = np.polynomial.Polynomial(coefficients)
    norms = {}
    for r in range(f.r_max + 1):
        sq = (P.deriv(r) ** 2).integ() if r <= P.degree() else np.polynomial.Polynomial([0.0])
        norms[r] = math.sqrt(max(float(sq(b) - sq(a)), 0.0))
    return TestFunction(f.derivatives, (), norms, (a, b), f"poly{P.degree()}")


def _exp(lam: float = 1.0, domain=(0.0, 1.0), max_order: int = DEFAULT_ORDER) -> TestFunction:
    lam = float(lam)
    a, b = map(float, domain)
    ders = tuple((lambda x, d=d: lam**d * np.exp(lam * x)) for d in range(max_order + 1))
    if lam == 0.0:
        norms = {r: (math.sqrt(b - a) if r == 0 else 0.0) for r in range(max_order + 1)}
    else:
        base = (math.exp(2 * lam * b) - math.exp(2 * lam * a)) / (2 * lam)
        norms = {r: abs(lam) ** r * math.sqrt(base) for r in range(max_order + 1)}
    return TestFunction(ders, (), norms, (a, b), f"exp({lam:g}x)")


def _runge(c: float = 25.0, center: float = 0.5, domain=(0.0, 1.0), max_order: int = DEFAULT_ORDER) -> TestFunction:
    """``1 / (1 + c (x - center)^2)``; derivatives from ``Re[1 / (1 + i s y)]`` with ``s = sqrt(c)``."""
    s = math.sqrt(float(c))
    center = float(center)

    def der(x, n):
        y = np.asarray(x, dtype=float) - center
        z = (1.0 + 1j * s * y) ** (-(n + 1))
        return np.real((-1) ** n * math.factorial(n) * (1j * s) ** n * z)

    ders = tuple((lambda x, n=n: der(x, n)) for n in range(max_order + 1))
    return TestFunction(ders, (), {}, tuple(map(float, domain)), f"runge({c:g})")


def _piecewise_c1(c: float = 1.0, x0: float = 0.5, domain=(0.0, 1.0), max_order: int = 2) -> TestFunction:
    """``x^3 + c (x - x0)_+^2``: C^1 with a jump of ``2c`` in the second derivative at ``x0``."""
    if max_order > 2:
        raise MissingDerivativeError("piecewise_c1 is only H^2: derivative orders above 2 are rejected")
    c, x0 = float(c), float(x0)
    a, b = map(float, domain)
    plus = lambda x: np.maximum(np.asarray(x, dtype=float) - x0, 0.0)  # noqa: E731
    ders = (
        lambda x: x**3 + c * plus(x) ** 2,
        lambda x: 3 * x**2 + 2 * c * plus(x),
        lambda x: 6 * x + 2 * c * (np.asarray(x, dtype=float) >= x0),
    )[: max_order + 1]
    # piecewise polynomial integrands: a Gauss rule per piece is exact
    rule = gauss_legendre(6)
    pieces = [(a, min(max(x0, a), b)), (min(max(x0, a), b), b)]
    norms = {}
    for r, f in enumerate(ders):
        sq = 0.0
        for lo, hi in pieces:
            if hi > lo:
                x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * rule.nodes
                sq += float(np.sum(0.5 * (hi - lo) * rule.weights * f(x) ** 2))
        norms[r] = math.sqrt(sq)
    bp = (x0,) if a < x0 < b else ()
    return TestFunction(ders, bp, norms, (a, b), f"piecewise_c1({c:g},{x0:g})")


CORPUS: dict[str, Callable[..., TestFunction]] = {
    "sin": _sin,
    "poly": _poly,
    "exp": _exp,
    "runge": _runge,
    "piecewise_c1": _piecewise_c1,
}


def corpus(id: str, params: Mapping[str, Any] | None = None) -> TestFunction:
    """Build the corpus target ``id`` with keyword ``params``."""
    if id not in CORPUS:
        raise ConfigError(f"unknown target {id!r}; known: {sorted(CORPUS)}")
    try:
        return CORPUS[id](**dict(params or {}))
    except TypeError as exc:
        raise ConfigError(f"bad parameters for target {id!r}: {exc}") from None


def tensor_corpus(id: str, params: Mapping[str, Any] | None = None) -> TensorTestFunction:
    """Bivariate targets: ``sin_product`` (``sin(w1 x + f1) sin(w2 y + f2)``) or
    ``product`` of two univariate corpus entries given as ``factors``."""
    params = dict(params or {})
    if id == "sin_product":
        w = params.get("omega", [math.pi, math.pi])
        phi = params.get("phi", [0.0, 0.0])
        return separable(_sin(w[0], phi[0], max_order=6), _sin(w[1], phi[1], max_order=6))
    if id == "product":
        factors = params.get("factors")
        if not factors or len(factors) != 2:
            raise ConfigError("product target needs two 'factors'")
        return separable(*[corpus(f["id"], f.get("params")) for f in factors])
    raise ConfigError(f"unknown bivariate target {id!r}; known: ['product', 'sin_product']")

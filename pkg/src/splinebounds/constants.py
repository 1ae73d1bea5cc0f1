"""Explicit a priori error constants for L2, Ritz, boundary-interpolating and
reduced-space spline projections, with the per-degree-of-freedom tables and the
crossover spacing between the spline and polynomial arguments.

All factorial ratios are evaluated through ``math.lgamma`` so nothing overflows
for large degrees. Preconditions are checked strictly and reported through
:class:`~splinebounds.errors.ParameterError` with a short ``reason``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext

from .errors import ParameterError

TIE_RTOL = 1e-15

# pi to 50 digits; powers of 1/pi are formed in decimal so they round once
_PI_DECIMAL = Decimal("3.1415926535897932384626433832795028841971693993751")


def inv_pi_power(r: int) -> float:
    """``(1/pi)^r`` correctly rounded to a double."""
    with localcontext() as ctx:
        ctx.prec = 40
        return float(1 / _PI_DECIMAL**r)


def _log_fact_ratio(num: int, den: int) -> float:
    """``log(num! / den!)``."""
    return math.lgamma(num + 1) - math.lgamma(den + 1)


def _require(cond: bool, reason: str, message: str) -> None:
    if not cond:
        raise ParameterError(reason, message)


def _check_int(**values) -> None:
    for name, v in values.items():
        if isinstance(v, bool) or int(v) != v:
            raise ParameterError("not-integer", f"{name} must be an integer, got {v!r}")


def _check_length(name: str, v: float) -> None:
    if not (math.isfinite(v) and v > 0):
        raise ParameterError("nonpositive-length", f"{name} must be positive and finite, got {v!r}")


# --- basic constants ------------------------------------------------------------

def poly_constant(p: int, r: int, L: float) -> float:
    """``(L/2)^r sqrt((p+1-r)!/(p+1+r)!)``: polynomial L2 approximation on an interval of length L."""
    _check_int(p=p, r=r)
    _check_length("L", L)
    _require(r >= 0, "negative-order", f"r must be nonnegative, got {r}")
    _require(p >= r - 1, "degree-too-low", f"need p >= r - 1, got p={p}, r={r}")
    if r == 0:
        return 1.0
    log_val = r * math.log(L / 2.0) + 0.5 * _log_fact_ratio(p + 1 - r, p + 1 + r)
    return math.exp(log_val)


def c_pkr(p: int, k: int, r: int) -> float:
    """Mesh-independent factor ``c_{p,k,r}`` of the bound ``c_{p,k,r} h^r``."""
    _check_int(p=p, k=k, r=r)
    _require(r >= 0, "negative-order", f"r must be nonnegative, got {r}")
    _require(-1 <= k <= p - 1, "invalid-smoothness", f"need -1 <= k <= p - 1, got p={p}, k={k}")
    _require(p >= r - 1, "degree-too-low", f"need p >= r - 1, got p={p}, r={r}")
    if r == 0:
        return 1.0
    if k == p - 1:
        return inv_pi_power(r)
    m = p - k
    log_inv = -0.5 * math.log(m * (m + 1))
    if k >= r - 2:
        return math.exp(r * (log_inv - math.log(2.0)))
    log_val = -r * math.log(2.0) + (k + 1) * log_inv + 0.5 * _log_fact_ratio(p + 1 - r, p - 1 + r - 2 * k)
    return math.exp(log_val)


def C_value(h: float, p: int, k: int, r: int, L: float) -> float:
    """``min{c_{p,k,r} h^r, poly_constant(p, r, L)}`` as a plain number."""
    return C_hpkr(EstimateQuery(p=p, k=k, r=r, h=h, L=L)).minimum


# --- query and breakdown types -------------------------------------------------

@dataclass(frozen=True)
class EstimateQuery:
    p: int
    k: int
    r: int
    h: float
    L: float
    q: int = 0
    ell: int = 0
    h_hat: float | None = None
    t: int | None = None

    def __post_init__(self):
        _check_int(p=self.p, k=self.k, r=self.r, q=self.q, ell=self.ell)
        _check_length("h", self.h)
        _check_length("L", self.L)
        _require(-1 <= self.k <= self.p - 1, "invalid-smoothness",
                 f"need -1 <= k <= p - 1, got p={self.p}, k={self.k}")
        _require(0 <= self.ell <= self.q <= self.r, "order-mismatch",
                 f"need 0 <= ell <= q <= r, got ell={self.ell}, q={self.q}, r={self.r}")
        _require(self.h <= self.L * (1 + 1e-12), "spacing-exceeds-length",
                 f"h={self.h} exceeds the interval length {self.L}")
        if self.h_hat is not None:
            _check_length("h_hat", self.h_hat)


@dataclass(frozen=True)
class BoundBreakdown:
    """Named bound candidates, their minimum and the label of the minimizer."""

    candidates: dict[str, float]
    minimum: float
    argmin: str
    flags: dict[str, bool] = field(default_factory=dict)
    extras: dict[str, float] = field(default_factory=dict)

    @classmethod
    def from_candidates(cls, candidates: dict[str, float], h_dependent=(), flags=None, extras=None):
        for name, v in candidates.items():
            if not (math.isfinite(v) and v >= 0):
                raise ParameterError("invalid-candidate", f"candidate {name} = {v!r}")
        order = sorted(candidates, key=lambda n: candidates[n])
        best = order[0]
        vmin = candidates[best]
        tied = [n for n in order if abs(candidates[n] - vmin) <= TIE_RTOL * max(abs(vmin), 1e-300)]
        label = best
        if len(tied) > 1:
            label = "tie"
            pick = [n for n in tied if n in h_dependent]
            vmin = candidates[pick[0]] if pick else vmin
        return cls(dict(candidates), vmin, label, dict(flags or {}), dict(extras or {}))

    def as_dict(self) -> dict:
        return {
            "candidates": self.candidates,
            "minimum": self.minimum,
            "argmin": self.argmin,
            "flags": self.flags,
            "extras": self.extras,
        }


def C_hpkr(query: EstimateQuery) -> BoundBreakdown:
    """``C_{h,p,k,r}``: the smaller of the spline argument ``c_{p,k,r} h^r``
    and the global polynomial argument."""
    p, k, r = query.p, query.k, query.r
    _require(p >= max(r - 1, k + 1), "degree-too-low", f"need p >= max(r-1, k+1), got p={p}, r={r}, k={k}")
    spline = c_pkr(p, k, r) * query.h ** r
    poly = poly_constant(p, r, query.L)
    return BoundBreakdown.from_candidates({"spline": spline, "polynomial": poly}, h_dependent=("spline",))


def max_smooth_bounds(query: EstimateQuery) -> BoundBreakdown:
    """All bound variants for maximally smooth splines (``k = p - 1``).

    Candidates: ``h_over_pi`` and ``polynomial`` (the two arguments of
    ``C_{h,p,r}``), ``product`` (chain of first-order constants over
    decreasing degree), ``harmonic`` and ``harmonic_small_r`` (the two
    harmonic-mean simplifications).
    """
    p, r, h, L = query.p, query.r, query.h, query.L
    _require(query.k == p - 1, "not-maximal-smoothness", f"need k = p - 1, got k={query.k}")
    _require(p >= r - 1, "degree-too-low", f"need p >= r - 1, got p={p}, r={r}")
    if r == 0:
        ones = dict.fromkeys(["h_over_pi", "polynomial", "product", "harmonic", "harmonic_small_r"], 1.0)
        return BoundBreakdown.from_candidates(ones, h_dependent=("h_over_pi",),
                                              extras={"C_hpr": 1.0})
    h_over_pi = (h / math.pi) ** r
    poly = poly_constant(p, r, L)
    product = 1.0
    for i in range(1, r + 1):
        product *= min(h / math.pi, poly_constant(p - i + 1, 1, L))
    e = math.e
    harmonic = (2 * e * h * L / (e * math.pi * L + 4 * h * (p + 1))) ** r
    small_r = (2 * h * L / (math.pi * L + 2 * h * (p - r + 2))) ** r
    flags = {
        "small_r_sharper_than_harmonic": p > e / (e - 2) * (r + 2 / e - 2),
        "polynomial_argument_active": poly < h_over_pi,
    }
    cands = {
        "h_over_pi": h_over_pi,
        "polynomial": poly,
        "product": product,
        "harmonic": harmonic,
        "harmonic_small_r": small_r,
    }
    return BoundBreakdown.from_candidates(
        cands, h_dependent=("h_over_pi", "product", "harmonic", "harmonic_small_r"),
        flags=flags, extras={"C_hpr": min(h_over_pi, poly)},
    )


def simplified_bound(h: float, p: int, k: int, r: int) -> float:
    """``(e h / (4 (p - k)))^r``.

    Derived for ``k <= p - 2``; it also holds at ``k = p - 1`` because
    ``1/pi < e/4``, where :func:`max_smooth_bounds` is much sharper.
    """
    _check_int(p=p, k=k, r=r)
    _check_length("h", h)
    _require(-1 <= k <= p - 1, "invalid-smoothness", f"need -1 <= k <= p - 1, got p={p}, k={k}")
    _require(p >= r - 1, "degree-too-low", f"need p >= r - 1, got p={p}, r={r}")
    return (math.e * h / (4 * (p - k))) ** r



def _ritz_checks(p: int, k: int, r: int, q: int, ell: int) -> None:
    _require(q <= k + 1, "q-exceeds-smoothness", f"Ritz order q={q} needs k >= q - 1, got k={k}")
    _require(q <= r, "q-exceeds-r", f"need q <= r, got q={q}, r={r}")
    _require(0 <= ell <= q, "ell-exceeds-q", f"need 0 <= ell <= q, got ell={ell}, q={q}")
    need = max(q, r - 1, 2 * q - ell - 1)
    _require(p >= need, "degree-too-low", f"need p >= {need}, got p={p}")


def ritz_bound(query: EstimateQuery) -> BoundBreakdown:
    """Bound on ``||d^ell (u - R^{q,k}_p u)|| / ||d^r u||``.

    Candidate ``ritz_product`` is ``C_{h,p-q,k-q,q-ell} C_{h,p-q,k-q,r-q}``;
    ``simplified`` (``k <= p-2``) and ``h_over_pi`` (``k = p-1``) are the
    explicit companions, which never undercut it.
    """
    p, k, r, q, ell, h, L = query.p, query.k, query.r, query.q, query.ell, query.h, query.L
    _ritz_checks(p, k, r, q, ell)
    product = C_value(h, p - q, k - q, q - ell, L) * C_value(h, p - q, k - q, r - q, L)
    cands = {"ritz_product": product}
    if k <= p - 2:
        cands["simplified"] = (math.e * h / (4 * (p - k))) ** (r - ell)
    else:
        cands["h_over_pi"] = (h / math.pi) ** (r - ell)
    extras = {"spline_product": c_pkr(p - q, k - q, q - ell) * c_pkr(p - q, k - q, r - q) * h ** (r - ell)}
    return BoundBreakdown.from_candidates(cands, h_dependent=tuple(cands), extras=extras)


def q_bound(query: EstimateQuery) -> float:
    """Bound on ``||d^ell (u - Q u)|| / ||d^r u||`` for ``ell`` in ``{0, 1}``.

    Uses the constants of the derivative space ``S^{k-1}_{p-1}``:
    ``C_{h,p-1,k-1,1} C_{h,p-1,k-1,r-1}`` for ``ell = 0`` and
    ``C_{h,p-1,k-1,r-1}`` for ``ell = 1``.
    """
    p, k, r, ell, h, L = query.p, query.k, query.r, query.ell, query.h, query.L
    _require(p >= 1 and k >= 0, "no-derivative-space", f"Q projector needs p >= 1, k >= 0, got p={p}, k={k}")
    _require(r >= 1, "negative-order", "Q bound needs r >= 1")
    _require(ell in (0, 1), "ell-exceeds-q", f"Q bound covers ell in {{0, 1}}, got {ell}")
    _require(p - 1 >= r - 2, "degree-too-low", f"need p - 1 >= r - 2, got p={p}, r={r}")
    second = C_value(h, p - 1, k - 1, r - 1, L)
    if ell == 1:
        return second
    return C_value(h, p - 1, k - 1, 1, L) * second


def reduced_bound(parity: str, variant: str, p: int, h: float, h_hat: float) -> float:
    """First-order constant for the Ritz projection onto a reduced space.

    Strict spaces alternate between ``h/pi`` and ``h_hat/pi`` with the parity
    of ``p``; the relaxed (``bar``) spaces always give ``h/pi``.
    """
    _check_int(p=p)
    _require(p >= 0, "degree-too-low", f"need p >= 0, got {p}")
    if parity not in ("even", "odd"):
        raise ParameterError("invalid-parity", f"parity must be 'even' or 'odd', got {parity!r}")
    if variant not in ("strict", "bar"):
        raise ParameterError("invalid-variant", f"variant must be 'strict' or 'bar', got {variant!r}")
    if variant == "bar":
        return h / math.pi
    use_hat = (p % 2 == 1) if parity == "odd" else (p % 2 == 0)
    return (h_hat if use_hat else h) / math.pi


# --- crossover between spline and polynomial arguments -------------------------

def crossover_h(p: int, r: int, L: float) -> float:
    """Spacing ``h*`` at which ``(h/pi)^r`` equals the polynomial argument."""
    _check_int(p=p, r=r)
    _check_length("L", L)
    _require(r >= 1, "negative-order", "crossover needs r >= 1 (both arguments equal 1 at r = 0)")
    _require(p >= r - 1, "degree-too-low", f"need p >= r - 1, got p={p}, r={r}")
    return math.pi * (L / 2.0) * math.exp(_log_fact_ratio(p + 1 - r, p + 1 + r) / (2 * r))


def crossover_h_bisect(p: int, r: int, L: float, tol: float = 1e-14) -> float:
    """Independent bisection for ``h*`` on the log-difference of the two arguments."""
    target = math.log(poly_constant(p, r, L)) / r

    def g(h):
        return math.log(h / math.pi) - target

    lo, hi = 1e-300, math.pi * L
    while g(hi) < 0:
        hi *= 2
    for _ in range(400):
        mid = 0.5 * (lo + hi) if lo > 0 and hi / lo < 4 else math.sqrt(lo * hi)
        if g(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= tol * hi:
            break
    return 0.5 * (lo + hi)


# --- per-degree-of-freedom constants and identities ----------------------------

def dof_constant(p: int, k: int, r: int) -> float:
    """``c_{p,k,r} (p - k)^r``."""
    return c_pkr(p, k, r) * (p - k) ** r


def ritz_dof_constant(p: int, k: int, r: int, q: int, ell: int) -> float:
    """``c_{p-q,k-q,q-ell} c_{p-q,k-q,r-q} (p - k)^(r - ell)``."""
    _check_int(p=p, k=k, r=r, q=q, ell=ell)
    _require(-1 <= k <= p - 1, "invalid-smoothness", f"need -1 <= k <= p - 1, got p={p}, k={k}")
    _ritz_checks(p, k, r, q, ell)
    return c_pkr(p - q, k - q, q - ell) * c_pkr(p - q, k - q, r - q) * (p - k) ** (r - ell)


def check_identity(p: int, k: int, q: int, ell: int, rtol: float = 1e-13) -> bool:
    """Whether ``c_{p-q,k-q,q-ell} c_{p-q,k-q,p+1-q} = c_{p-ell,k-ell,p+1-ell}`` to ``rtol``."""
    _check_int(p=p, k=k, q=q, ell=ell)
    _require(0 <= ell <= q, "ell-exceeds-q", f"need 0 <= ell <= q, got ell={ell}, q={q}")
    lo = max(q - 1, 2 * q - ell - 2)
    _require(lo <= k <= p - 1, "invalid-smoothness", f"need {lo} <= k <= {p - 1}, got k={k}")
    lhs = c_pkr(p - q, k - q, q - ell) * c_pkr(p - q, k - q, p + 1 - q)
    rhs = c_pkr(p - ell, k - ell, p + 1 - ell)
    return abs(lhs - rhs) <= rtol * abs(rhs)


FIGURE_COLUMNS = {
    1: ("p", "k", "value"),
    2: ("p", "k", "value"),
    3: ("p", "k", "ell", "value"),
    4: ("p", "r", "value"),
}


def figure_table(fig: int, max_degree: int = 10) -> list[tuple]:
    """Rows behind the four constant figures.

    1. ``dof_constant(p, k, 3)`` for ``p = 2..10`` and all ``k``.
    2. ``dof_constant(p, k, p + 1)`` for ``p = 1..10`` and all ``k``.
    3. ``ritz_dof_constant(p, k, p + 1, 1, ell)`` for ``ell`` in ``{0, 1}``, ``0 <= k <= p - 1``.
    4. ``crossover_h(p, r, 1)`` (normalized ``h*/L``) for ``r >= 1``, ``p >= max(r - 1, 0)``.
    """
    rows: list[tuple] = []
    if fig == 1:
        for p in range(2, max_degree + 1):
            rows += [(p, k, dof_constant(p, k, 3)) for k in range(-1, p)]
    elif fig == 2:
        for p in range(1, max_degree + 1):
            rows += [(p, k, dof_constant(p, k, p + 1)) for k in range(-1, p)]
    elif fig == 3:
        for p in range(1, max_degree + 1):
            for ell in (0, 1):
                rows += [(p, k, ell, ritz_dof_constant(p, k, p + 1, 1, ell)) for k in range(0, p)]
    elif fig == 4:
        for r in range(1, max_degree + 2):
            rows += [(p, r, crossover_h(p, r, 1.0)) for p in range(max(r - 1, 0), max_degree + 1)]
    else:
        raise ParameterError("unknown-figure", f"figure id must be 1..4, got {fig!r}")
    return rows

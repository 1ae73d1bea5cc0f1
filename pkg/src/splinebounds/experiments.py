"""Verification and convergence experiments driven by JSON configurations.

A configuration selects a target, a projector, a set of spaces and a
refinement schedule. Each (space, orders, mesh) combination becomes one row
holding the measured error, the theoretical bound and their ratio.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping

import jsonschema
import numpy as np

from . import constants as C
from .corpus import corpus, tensor_corpus
from .errors import ConfigError, InvalidDataError, ParameterError, SplineBoundsError
from .geometry import (
    DEFAULT_RESOLUTION,
    catalog_map,
    geometry_constants,
    interface_jump,
    mapped_l2_bound,
    mapped_project,
    mapped_ritz_bound,
    multipatch_q_project,
    physical_norm_table,
    two_patch_square,
)
from .projectors import (
    build_reduced_space,
    error_norm,
    function_norm,
    l2_project,
    q_project,
    ritz_project,
    ritz_reduced,
)
from .spline_core import KnotSequence, SplineSpace, uniform_knots
from .tensor import (
    TensorSpace,
    tensor_error_norm,
    tensor_function_norm,
    tensor_l2_bound,
    tensor_project,
    tensor_ritz_bounds,
)

EFFECTIVITY_TOL = 1e-9
ORDER_SLACK = 0.2
ORDER_POINTS = 4
ORDER_R2 = 0.999
CSV_COLUMNS = ("p", "k", "q", "ell", "r", "N", "h", "error", "bound", "effectivity", "order", "status")

PROJECTOR_PATTERN = (
    r"^(l2|q|multipatch|ritz:[0-9]+|reduced:(even|odd):(strict|bar)"
    r"|tensor:(l2|ritz|q)|mapped:(l2|ritz|q))$"
)

CONFIG_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "ExperimentConfig",
    "type": "object",
    "additionalProperties": False,
    "required": ["target", "projector", "degrees"],
    "properties": {
        "name": {"type": "string"},
        "domain": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "target": {
            "type": "object",
            "additionalProperties": False,
            "required": ["id"],
            "properties": {"id": {"type": "string"}, "params": {"type": "object"}},
        },
        "projector": {"type": "string", "pattern": PROJECTOR_PATTERN},
        "degrees": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
        "smoothness": {
            "oneOf": [
                {"enum": ["all", "max"]},
                {"type": "array", "items": {"type": "integer", "minimum": -1}, "minItems": 1},
            ]
        },
        "r": {
            "oneOf": [
                {"enum": ["all"]},
                {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
            ]
        },
        "ell": {
            "type": "array",
            "minItems": 1,
            "items": {
                "oneOf": [
                    {"type": "integer", "minimum": 0},
                    {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2, "maxItems": 2},
                ]
            },
        },
        "schedule": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
        "knots": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "array", "items": {"type": "number"}, "minItems": 2},
        },
        "geometry": {
            "type": "object",
            "additionalProperties": False,
            "required": ["map"],
            "properties": {
                "map": {"type": "string"},
                "params": {"type": "object"},
                "resolution": {"type": "integer", "minimum": 2},
                "flavor": {"enum": ["mesh", "global"]},
            },
        },
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
    },
}


def validate_config(config: Mapping[str, Any]) -> dict:
    """Schema check plus the cross-field rules the schema cannot express."""
    try:
        jsonschema.validate(config, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at {path}: {exc.message}") from None
    cfg = dict(config)
    if "schedule" not in cfg and "knots" not in cfg:
        raise ConfigError("config needs a 'schedule' of element counts or explicit 'knots'")
    kind = cfg["projector"]
    if kind.startswith("mapped") and "geometry" not in cfg:
        raise ConfigError("mapped projectors need a 'geometry' section")
    return cfg


def load_config(path: str | Path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return validate_config(data)


# --- report types --------------------------------------------------------------

@dataclass
class ReportRow:
    p: int
    k: int
    q: int
    ell: Any
    r: int
    N: int
    h: float
    error: float | None = None
    bound: float | None = None
    effectivity: float | None = None
    order: float | None = None
    status: str = "ok"

    @property
    def group(self) -> tuple:
        return (self.p, self.k, self.q, self.ell_label, self.r)

    @property
    def ell_label(self) -> str:
        return ":".join(str(v) for v in self.ell) if isinstance(self.ell, tuple) else str(self.ell)

    @property
    def ell_total(self) -> int:
        return sum(self.ell) if isinstance(self.ell, tuple) else int(self.ell)

    @property
    def skipped(self) -> bool:
        return self.status.startswith("skipped")

    @property
    def violated(self) -> bool:
        return self.status.startswith("violation")


@dataclass
class ErrorReport:
    name: str
    projector: str
    rows: list[ReportRow] = field(default_factory=list)
    tolerance: float = EFFECTIVITY_TOL
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not any(r.violated for r in self.rows)

    @property
    def max_effectivity(self) -> float:
        vals = [r.effectivity for r in self.rows if r.effectivity is not None]
        return max(vals) if vals else 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in self.rows:
            w.writerow([row.p, row.k, row.q, row.ell_label, row.r, row.N, _fmt(row.h), _fmt(row.error),
                        _fmt(row.bound), _fmt(row.effectivity), _fmt(row.order), row.status])
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv())


def _fmt(v) -> str:
    # shortest string that round-trips the double (never more than 17 digits)
    if v is None:
        return ""
    return repr(float(v))


def fit_order(h: Iterable[float], err: Iterable[float]) -> tuple[float, float]:
    """Least-squares slope of ``log err`` against ``log h`` over the last four points.

    If the fit has ``R^2 < 0.999`` the coarsest of the four is dropped.
    Returns ``(order, R^2)``.
    """
    h = np.asarray(list(h), dtype=float)
    err = np.asarray(list(err), dtype=float)
    keep = (h > 0) & (err > 0)
    h, err = h[keep], err[keep]
    if h.size < 2:
        return math.nan, math.nan
    h, err = h[-ORDER_POINTS:], err[-ORDER_POINTS:]

    def fit(x, y):
        A = np.vstack([x, np.ones_like(x)]).T
        (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
        res = y - A @ np.array([slope, icpt])
        tot = np.sum((y - y.mean()) ** 2)
        return float(slope), float(1.0 - res @ res / tot) if tot > 0 else 1.0

    slope, r2 = fit(np.log(h), np.log(err))
    if r2 < ORDER_R2 and h.size > 2:
        slope, r2 = fit(np.log(h[1:]), np.log(err[1:]))
    return slope, r2


# --- configuration expansion -----------------------------------------------------

def _meshes(cfg: Mapping, a: float, b: float) -> list[tuple[int, KnotSequence]]:
    if "knots" in cfg:
        out = []
        for bp in cfg["knots"]:
            ks = KnotSequence(np.asarray(bp, dtype=float))
            out.append((ks.N, ks))
        return out
    return [(N, uniform_knots(a, b, N)) for N in cfg["schedule"]]


def _smoothness(cfg: Mapping, p: int) -> list[int]:
    spec = cfg.get("smoothness", "all")
    if spec == "all":
        return list(range(-1, p))
    if spec == "max":
        return [p - 1]
    return [k for k in spec if k <= p - 1]


def _orders(cfg: Mapping, p: int) -> list[int]:
    spec = cfg.get("r", "all")
    return list(range(1, p + 2)) if spec == "all" else list(spec)


def _ells(cfg: Mapping, tensor: bool) -> list:
    ells = cfg.get("ell", [[0, 0]] if tensor else [0])
    out = []
    for e in ells:
        if tensor:
            if not isinstance(e, list):
                raise ConfigError("bivariate projectors take 'ell' as pairs [ell_1, ell_2]")
            out.append(tuple(e))
        else:
            if isinstance(e, list):
                raise ConfigError("univariate projectors take integer 'ell' values")
            out.append(int(e))
    return out


def _projector_q(kind: str) -> int:
    if kind.startswith("ritz:"):
        return int(kind.split(":")[1])
    if kind == "l2" or kind.endswith(":l2"):
        return 0
    return 1


def _effectivity(error: float, bound: float, scale: float) -> float:
    if bound > 0:
        return error / bound
    return 0.0 if error <= 1e-10 * max(scale, 1.0) else math.inf


def _finish(row: ReportRow, error: float, bound: float, scale: float, tol: float) -> ReportRow:
    row.error, row.bound = error, bound
    row.effectivity = _effectivity(error, bound, scale)
    if row.effectivity > 1 + tol:
        row.status = "violation"
    return row


# --- univariate rows ------------------------------------------------------------

def _seminorm(u, r: int, domain) -> float:
    exact = u.seminorm(r, domain)
    if exact is not None:
        return exact
    return function_norm(u, domain, r, u.breakpoints, n=32)


def _row_1d(kind: str, u, knots: KnotSequence, p: int, k: int, r: int, ell: int, N: int, tol: float) -> ReportRow:
    q = _projector_q(kind)
    row = ReportRow(p, k, q, ell, r, N, knots.h)
    domain = (knots.a, knots.b)
    try:
        if r > u.r_max:
            raise ParameterError("target-not-smooth", f"target has only {u.r_max} derivatives")
        space = SplineSpace(knots, p, k)
        if kind == "l2":
            if ell != 0:
                raise ParameterError("ell-exceeds-q", "the L2 estimate measures ell = 0 only")
            const = C.C_hpkr(C.EstimateQuery(p=p, k=k, r=r, h=knots.h, L=knots.length)).minimum
            s = l2_project(space, u).spline
        elif kind.startswith("ritz:"):
            const = C.ritz_bound(C.EstimateQuery(p=p, k=k, r=r, h=knots.h, L=knots.length, q=q, ell=ell)).minimum
            s = ritz_project(space, u, q).spline
        elif kind == "q":
            const = C.q_bound(C.EstimateQuery(p=p, k=k, r=r, h=knots.h, L=knots.length, q=1, ell=ell))
            s = q_project(space, u).spline
        else:
            _, parity, variant = kind.split(":")
            if k != p - 1:
                raise ParameterError("not-maximal-smoothness", "reduced spaces need k = p - 1")
            if r != 1 or ell != 0:
                raise ParameterError("order-mismatch", "reduced-space estimates have r = 1, ell = 0")
            const = C.reduced_bound(parity, variant, p, knots.h, knots.h_hat)
            s = ritz_reduced(build_reduced_space(space, parity, variant), u).spline
    except ParameterError as exc:
        row.status = f"skipped:{exc.reason}"
        return row
    except InvalidDataError:
        row.status = "skipped:invalid-data"
        return row
    except SplineBoundsError as exc:
        row.status = f"skipped:{type(exc).__name__}"
        return row
    error = error_norm(u, s, ell)
    bound = const * _seminorm(u, r, domain)
    return _finish(row, error, bound, _seminorm(u, 0, domain), tol)


# --- bivariate rows --------------------------------------------------------------

def _tspace(knots: KnotSequence, p: int, k: int) -> TensorSpace:
    s = SplineSpace(knots, p, k)
    return TensorSpace((s, s))


def _row_tensor(kind: str, u, knots, p, k, r, ell, N, tol) -> ReportRow:
    sub = kind.split(":")[1]
    row = ReportRow(p, k, _projector_q(kind), ell, r, N, knots.h)
    try:
        ts = _tspace(knots, p, k)
        if sub == "l2":
            if ell != (0, 0):
                raise ParameterError("ell-exceeds-q", "the L2 estimate measures ell = (0, 0) only")
            norms = [tensor_function_norm(u, ts, (r, 0)), tensor_function_norm(u, ts, (0, r))]
            for s in ts.spaces:
                C.C_hpkr(C.EstimateQuery(p=s.p, k=s.k, r=r, h=s.knots.h, L=s.knots.length))
            bound = tensor_l2_bound(ts, r, norms)
        else:
            alphas = [(r, 0), (0, r), (1, r - 1), (r - 1, 1)] if r >= 2 else []
            norms = {a: tensor_function_norm(u, ts, a) for a in alphas}
            bound = tensor_ritz_bounds(ts, r, norms)[ell]
        res = tensor_project(ts, u, sub)
    except ParameterError as exc:
        row.status = f"skipped:{exc.reason}"
        return row
    except SplineBoundsError as exc:
        row.status = f"skipped:{type(exc).__name__}"
        return row
    error = tensor_error_norm(u, res.function, ell)
    return _finish(row, error, bound, tensor_function_norm(u, ts, (0, 0)), tol)


def _row_mapped(kind: str, u, G, geo: Mapping, knots, p, k, r, ell, N, tol) -> ReportRow:
    sub = kind.split(":")[1]
    row = ReportRow(p, k, _projector_q(kind), ell, r, N, knots.h)
    try:
        ts = _tspace(knots, p, k)
        consts = geometry_constants(G, r, geo.get("flavor", "mesh"), geo.get("resolution", DEFAULT_RESOLUTION))
        norms = physical_norm_table(G, ts, u, r)
        if sub == "l2":
            if ell != (0, 0):
                raise ParameterError("ell-exceeds-q", "the mapped L2 estimate measures ell = (0, 0) only")
            for s in ts.spaces:
                C.C_hpkr(C.EstimateQuery(p=s.p, k=s.k, r=r, h=s.knots.h, L=s.knots.length))
            bound = mapped_l2_bound(consts, ts, norms)
        else:
            bound = mapped_ritz_bound(consts, ts, ell, norms)
        res = mapped_project(G, ts, u, sub)
    except ParameterError as exc:
        row.status = f"skipped:{exc.reason}"
        return row
    except SplineBoundsError as exc:
        row.status = f"skipped:{type(exc).__name__}"
        return row
    return _finish(row, res.physical_error(u, ell), bound, 1.0, tol)


def _row_multipatch(u, knots, p, k, r, ell, N, tol) -> ReportRow:
    row = ReportRow(p, k, 1, ell, r, N, knots.h)
    try:
        ts = _tspace(knots, p, k)
        mp = two_patch_square(ts)
        results = multipatch_q_project(mp, u)
        err_sq = bound_sq = 0.0
        worst = 0.0
        for patch, res in zip(mp.patches, results):
            consts = geometry_constants(patch.geometry, r)
            b = mapped_ritz_bound(consts, ts, ell, physical_norm_table(patch.geometry, ts, u, r))
            e = res.physical_error(u, ell)
            worst = max(worst, _effectivity(e, b, 1.0))
            err_sq += e * e
            bound_sq += b * b
        jump = interface_jump(mp, results)
    except ParameterError as exc:
        row.status = f"skipped:{exc.reason}"
        return row
    except SplineBoundsError as exc:
        row.status = f"skipped:{type(exc).__name__}"
        return row
    _finish(row, math.sqrt(err_sq), math.sqrt(bound_sq), 1.0, tol)
    if worst > 1 + tol:
        row.status = "violation:patch-bound"
    if jump > 1e-9:
        row.status = "violation:interface-jump"
    return row


# --- runners --------------------------------------------------------------------

def _rows(cfg: Mapping) -> list[ReportRow]:
    kind = cfg["projector"]
    tol = cfg.get("tolerance", EFFECTIVITY_TOL)
    bivariate = kind.startswith(("tensor", "mapped", "multipatch"))
    a, b = cfg.get("domain", [0.0, 1.0])
    if bivariate and (a, b) != (0.0, 1.0) and not kind.startswith("tensor"):
        raise ConfigError("mapped and multi-patch runs use the unit square as parameter domain")
    target = cfg["target"]
    params = dict(target.get("params", {}))
    if bivariate:
        u = tensor_corpus(target["id"], params)
    else:
        params.setdefault("domain", [a, b])
        u = corpus(target["id"], params)
    G = None
    if kind.startswith("mapped"):
        geo = cfg["geometry"]
        try:
            G = catalog_map(geo["map"], **geo.get("params", {}))
        except ParameterError as exc:
            raise ConfigError(str(exc)) from None
    meshes = _meshes(cfg, a, b)
    rows = []
    for p in cfg["degrees"]:
        for k in _smoothness(cfg, p):
            for r in _orders(cfg, p):
                for ell in _ells(cfg, bivariate):
                    for N, knots in meshes:
                        if kind.startswith("tensor"):
                            row = _row_tensor(kind, u, knots, p, k, r, ell, N, tol)
                        elif kind.startswith("mapped"):
                            row = _row_mapped(kind, u, G, cfg["geometry"], knots, p, k, r, ell, N, tol)
                        elif kind == "multipatch":
                            row = _row_multipatch(u, knots, p, k, r, ell, N, tol)
                        else:
                            row = _row_1d(kind, u, knots, p, k, r, ell, N, tol)
                        rows.append(row)
    return rows


def _attach_orders(rows: list[ReportRow]) -> dict:
    groups: dict = {}
    for row in rows:
        groups.setdefault(row.group, []).append(row)
    fitted = {}
    for key, grp in groups.items():
        ok = sorted((r for r in grp if r.error is not None), key=lambda r: -r.h)
        if len(ok) < 2:
            continue
        order, _ = fit_order([r.h for r in ok], [r.error for r in ok])
        if math.isfinite(order):
            fitted[key] = order
            for r in grp:
                r.order = order
    return fitted


def run_verify(config: Mapping[str, Any]) -> ErrorReport:
    """One row per (space, orders, mesh); a row fails when effectivity exceeds ``1 + tol``."""
    cfg = validate_config(config)
    report = ErrorReport(cfg.get("name", "verify"), cfg["projector"], _rows(cfg),
                         cfg.get("tolerance", EFFECTIVITY_TOL))
    _attach_orders(report.rows)
    return report


def run_convergence(config: Mapping[str, Any]) -> ErrorReport:
    """Like :func:`run_verify`, and also require fitted orders ``>= r - ell - 0.2``."""
    cfg = validate_config(config)
    if "schedule" in cfg:
        sched = sorted(cfg["schedule"])
        if len(sched) < 4:
            raise ConfigError("convergence runs need at least four refinements")
        # either the interior knot count or the element count doubles
        dyadic = [all(b == 2 * a for a, b in zip(s, s[1:])) for s in (sched, [N + 1 for N in sched])]
        if not any(dyadic):
            raise ConfigError("convergence schedules must be dyadic (knot or element counts doubling)")
    elif len(cfg["knots"]) < 4:
        raise ConfigError("convergence runs need at least four refinements")
    report = ErrorReport(cfg.get("name", "convergence"), cfg["projector"], _rows(cfg),
                         cfg.get("tolerance", EFFECTIVITY_TOL))
    fitted = _attach_orders(report.rows)
    for row in report.rows:
        key = row.group
        if key in fitted and not row.skipped and fitted[key] < row.r - row.ell_total - ORDER_SLACK:
            if not row.violated:
                row.status = "violation:order"
    return report


# --- figure data ----------------------------------------------------------------

def figure_csv(fig: int, max_degree: int = 10) -> str:
    if fig not in C.FIGURE_COLUMNS:
        raise ConfigError(f"unknown figure {fig}; choose one of {sorted(C.FIGURE_COLUMNS)}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(C.FIGURE_COLUMNS[fig])
    for row in C.figure_table(fig, max_degree):
        w.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def emit_figure(fig: int, out: str | Path | None = None, max_degree: int = 10) -> str:
    text = figure_csv(fig, max_degree)
    if out is not None:
        Path(out).write_text(text)
    return text

"""Level-set functionals along radial potentials and 2-D fields.

For a potential w with level radii r_t this module evaluates, with
lam = alpha/(n-p) - 1 and G = |grad w|:

    F_p(t) = e^{lam t} int_{w=t} G^{a+p-2} [ G ((n-1)/(n-p) - 1/a) - H ]
             - int_0^t e^{lam s} int_{w=s} G^{a+p-3} Ric(nu,nu) ds
    G_p(t) = e^{lam t} int_{w=t} G^{a+p-1}
    Q_p    = (a-(2-p)) |grad^T G|^2/G^2 + |h-ring|^2
             + (a - (n-p)/(n-1)) (H - (n-1)/(n-p) G)^2 / (p-1)

together with the p = 1 analogue F_1, the Hawking mass, the normalized
Minkowski functional and the Geroch right-hand side.  The derivative
identity d F_p/dt = e^{lam t} int G^{a+p-3} Q_p is reported as a residual
column (central differences against the Q_p integral).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import geometry, radial
from .numerics import CumulativeIntegral, Tolerance

__all__ = [
    "FunctionalParams",
    "MonotoneSeries",
    "RadialLevel",
    "radial_level",
    "F_p",
    "G_p",
    "Q_p_integral",
    "F_1",
    "hawking_mass",
    "hawking_series",
    "minkowski_M",
    "geroch_rhs",
    "q_p_pointwise",
    "q_1_pointwise",
    "write_series_csv",
]

BULK_TOL = Tolerance(abs_tol=1e-11, rel_tol=1e-11, max_iter=200)


@dataclass(frozen=True)
class FunctionalParams:
    """Exponent bundle (n, p, alpha) and the level grid for a series."""

    n: int
    p: float
    alpha: float
    t_grid: tuple[float, ...]

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("dimension must be at least 3")
        if not (1.0 <= self.p <= 2.0):
            raise ValueError(f"p={self.p} outside [1, 2]")
        if self.p >= self.n:
            raise ValueError("need p < n")
        if self.alpha <= 0.0:
            raise ValueError("alpha must be positive")
        ts = np.asarray(self.t_grid, dtype=float)
        if ts.size < 2 or np.any(np.diff(ts) <= 0.0) or ts[0] < 0.0:
            raise ValueError("t_grid must be strictly increasing and nonnegative")
        object.__setattr__(self, "t_grid", tuple(float(t) for t in ts))

    @property
    def monotone_threshold(self) -> float:
        return (self.n - self.p) / (self.n - 1.0)

    @property
    def termwise_threshold(self) -> float:
        return max(2.0 - self.p, self.monotone_threshold)

    @property
    def monotonicity_guaranteed(self) -> bool:
        if self.p == 1.0:
            return self.alpha >= 1.0
        return self.alpha > self.monotone_threshold

    @property
    def termwise_nonnegative(self) -> bool:
        return self.alpha >= self.termwise_threshold - 1e-12


@dataclass
class MonotoneSeries:
    """A functional sampled on a level grid, with identity diagnostics.

    ``bulk`` is the accumulated Ricci integral subtracted from the boundary
    term; ``rhs_qp`` the derivative-identity right side; ``residual`` the
    central-difference defect |dF/dt - rhs| (nan where not computed).
    """

    name: str
    t: np.ndarray
    values: np.ndarray
    bulk: np.ndarray
    rhs_qp: Optional[np.ndarray] = None
    residual: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        m = len(self.t)
        if len(self.values) != m or len(self.bulk) != m:
            raise ValueError("series columns must share the grid length")


@dataclass(frozen=True)
class RadialLevel:
    """Geometric data of a single round level set of a radial potential."""

    t: float
    r: float
    n: int
    area: float
    grad: float
    H: float
    ricci: float
    scalar: float
    scalar_induced: float

    @property
    def willmore(self) -> float:
        return self.area * self.H * self.H

    @property
    def chi_proxy(self) -> float:
        """(1/4 pi) int Sc^T over the level (2 for sphere topology)."""
        return self.area * self.scalar_induced / (4.0 * math.pi)


def radial_level(pot: radial.RadialPotential, t: float) -> RadialLevel:
    model = pot.manifold
    r = pot.level_radius(t)
    area, scal_ind = geometry.cross_section(model, r)
    return RadialLevel(
        t=float(t),
        r=r,
        n=model.n,
        area=area,
        grad=pot.grad_norm(r),
        H=geometry.mean_curvature_sphere(model, r),
        ricci=geometry.ricci_radial(model, r),
        scalar=geometry.scalar_curvature(model, r),
        scalar_induced=scal_ind,
    )


def q_p_pointwise(
    n: int,
    p: float,
    alpha: float,
    grad: float,
    H: float,
    tangential_sq: float = 0.0,
    hring_sq: float = 0.0,
) -> float:
    """The nonnegative-combination integrand for p > 1.

    ``tangential_sq`` is |grad^T |grad w||^2 / |grad w|^2 at the point.
    """
    third = (alpha - (n - p) / (n - 1.0)) / (p - 1.0) * (H - (n - 1.0) / (n - p) * grad) ** 2
    return (alpha - (2.0 - p)) * tangential_sq + hring_sq + third


def q_1_pointwise(alpha: float, H: float, tangential_H_sq: float = 0.0, hring_sq: float = 0.0) -> float:
    """p = 1 analogue: (alpha-1)|grad^T H|^2/H^2 + |h-ring|^2."""
    return (alpha - 1.0) * tangential_H_sq / (H * H) + hring_sq


def _require_kind(pot: radial.RadialPotential, kinds: tuple[str, ...], what: str) -> None:
    if pot.kind not in kinds:
        raise ValueError(f"{what} requires a solution of kind {kinds}, got '{pot.kind}'")


def _radial_machinery(pot: radial.RadialPotential, params: FunctionalParams):
    """Closures shared by F_p/G_p on a radial solution."""
    model = pot.manifold
    n, p, alpha = params.n, params.p, params.alpha
    if model.n != n:
        raise ValueError(f"params.n={n} does not match the model dimension {model.n}")
    lam = alpha / (n - p) - 1.0
    sphere = geometry.unit_sphere_area(n)

    def boundary(t: float) -> float:
        lev = radial_level(pot, t)
        bracket = lev.grad * ((n - 1.0) / (n - p) - 1.0 / alpha) - lev.H
        return math.exp(lam * t) * lev.area * lev.grad ** (alpha + p - 2.0) * bracket

    def ric_integrand(r: float) -> float:
        w = pot.w(r)
        g = pot.grad_norm(r)
        h = model.h(r)
        return (
            math.exp(lam * w)
            * sphere
            * h ** (n - 1.0)
            * g ** (alpha + p - 2.0)
            * model.f(r)
            * geometry.ricci_radial(model, r)
        )

    ric_cum = CumulativeIntegral(ric_integrand, pot.r0, BULK_TOL)

    def bulk(t: float) -> float:
        return ric_cum(pot.level_radius(t))

    return lam, boundary, bulk


def Q_p_integral(solution, params: FunctionalParams, t: float) -> float:
    """int_{w=t} |grad w|^{alpha+p-3} Q_p  (no exponential prefactor)."""
    n, p, alpha = params.n, params.p, params.alpha
    if isinstance(solution, radial.RadialPotential):
        _require_kind(solution, (radial.KIND_P, radial.KIND_EPS), "Q_p_integral")
        lev = radial_level(solution, t)
        qp = q_p_pointwise(n, p, alpha, lev.grad, lev.H)
        return lev.area * lev.grad ** (alpha + p - 3.0) * qp
    curve = solution.level(t)
    tang_sq = (curve.grad_tangential / curve.grad) ** 2
    qp = np.array(
        [
            q_p_pointwise(n, p, alpha, g, H, ts, hr)
            for g, H, ts, hr in zip(curve.grad, curve.H, tang_sq, curve.hring_sq)
        ]
    )
    return curve.integrate(curve.grad ** (alpha + p - 3.0) * qp)


def _finish_series(name, ts, values, bulk, rhs, fval, step, meta) -> MonotoneSeries:
    """Assemble a series and fill the central-difference residual column."""
    residual = np.full(len(ts), np.nan)
    for i in range(1, len(ts) - 1):
        d = min(step, 0.45 * (ts[i] - ts[i - 1]), 0.45 * (ts[i + 1] - ts[i]))
        deriv = (fval(ts[i] + d) - fval(ts[i] - d)) / (2.0 * d)
        residual[i] = abs(deriv - rhs[i])
    return MonotoneSeries(
        name=name,
        t=np.asarray(ts, dtype=float),
        values=np.asarray(values, dtype=float),
        bulk=np.asarray(bulk, dtype=float),
        rhs_qp=np.asarray(rhs, dtype=float),
        residual=residual,
        meta=meta,
    )


def F_p(solution, params: FunctionalParams, derivative_step: float = 1e-3) -> MonotoneSeries:
    """The level-set functional F_p on the grid, with identity diagnostics."""
    ts = np.asarray(params.t_grid, dtype=float)
    meta = {
        "p": params.p,
        "alpha": params.alpha,
        "monotonicity_guaranteed": params.monotonicity_guaranteed,
        "termwise_nonnegative": params.termwise_nonnegative,
    }
    lam = params.alpha / (params.n - params.p) - 1.0
    if isinstance(solution, radial.RadialPotential):
        _require_kind(solution, (radial.KIND_P, radial.KIND_EPS), "F_p")
        _, boundary, bulk = _radial_machinery(solution, params)
        bulks = np.array([bulk(t) for t in ts])
        values = np.array([boundary(t) for t in ts]) - bulks
        rhs = np.array([math.exp(lam * t) * Q_p_integral(solution, params, t) for t in ts])
        meta["model"] = solution.manifold.label
        return _finish_series("F_p", ts, values, bulks, rhs, lambda t: boundary(t) - bulk(t), derivative_step, meta)
    field2d = solution
    if params.n != 3:
        raise ValueError("2-D fields are three dimensional")

    def fval(t: float) -> float:
        curve = field2d.level(t)
        n, p, alpha = params.n, params.p, params.alpha
        integrand = curve.grad ** (alpha + p - 2.0) * (
            curve.grad * ((n - 1.0) / (n - p) - 1.0 / alpha) - curve.H
        )
        return math.exp(lam * t) * curve.integrate(integrand)

    values = np.array([fval(t) for t in ts])
    bulks = np.zeros_like(values)
    rhs = np.array([math.exp(lam * t) * Q_p_integral(field2d, params, t) for t in ts])
    meta["model"] = field2d.domain.label
    return _finish_series("F_p", ts, values, bulks, rhs, fval, derivative_step, meta)


def G_p(solution, params: FunctionalParams, derivative_step: float = 1e-3) -> MonotoneSeries:
    """Gradient-power functional G_p; residual column checks
    (p-1) dG_p/dt = G_p + alpha * (boundary term of F_p)."""
    ts = np.asarray(params.t_grid, dtype=float)
    n, p, alpha = params.n, params.p, params.alpha
    lam = alpha / (n - p) - 1.0
    meta = {"p": p, "alpha": alpha}
    if isinstance(solution, radial.RadialPotential):
        _require_kind(solution, (radial.KIND_P, radial.KIND_EPS), "G_p")
        _, boundary, _ = _radial_machinery(solution, params)

        def gval(t: float) -> float:
            lev = radial_level(solution, t)
            return math.exp(lam * t) * lev.area * lev.grad ** (alpha + p - 1.0)

        def rhs_fn(t: float) -> float:
            return (gval(t) + alpha * boundary(t)) / (p - 1.0)

        meta["model"] = solution.manifold.label
    else:
        field2d = solution

        def gval(t: float) -> float:
            curve = field2d.level(t)
            return math.exp(lam * t) * curve.integrate(curve.grad ** (alpha + p - 1.0))

        def boundary2d(t: float) -> float:
            curve = field2d.level(t)
            integrand = curve.grad ** (alpha + p - 2.0) * (
                curve.grad * ((n - 1.0) / (n - p) - 1.0 / alpha) - curve.H
            )
            return math.exp(lam * t) * curve.integrate(integrand)

        def rhs_fn(t: float) -> float:
            return (gval(t) + alpha * boundary2d(t)) / (p - 1.0)

        meta["model"] = field2d.domain.label
    values = np.array([gval(t) for t in ts])
    rhs = np.array([rhs_fn(t) for t in ts])
    return _finish_series("G_p", ts, values, np.zeros_like(values), rhs, gval, derivative_step, meta)


def F_1(pot: radial.RadialPotential, params: FunctionalParams, derivative_step: float = 1e-3) -> MonotoneSeries:
    """The p = 1 level-set functional along the inverse-mean-curvature flow.

    Computed from |grad w1| and, independently, from the sphere mean
    curvature (the two agree identically for exact flows); the H-form is
    kept in ``meta['h_form_values']``.
    """
    _require_kind(pot, (radial.KIND_IMCF,), "F_1")
    if params.p != 1.0:
        raise ValueError("F_1 requires p = 1 in params")
    if params.alpha < 1.0:
        raise ValueError("F_1 requires alpha >= 1")
    n, alpha = params.n, params.alpha
    model = pot.manifold
    if model.n != n:
        raise ValueError(f"params.n={n} does not match the model dimension {model.n}")
    ts = np.asarray(params.t_grid, dtype=float)
    lam = alpha / (n - 1.0) - 1.0
    sphere = geometry.unit_sphere_area(n)

    def boundary(t: float, use_H: bool = False) -> float:
        lev = radial_level(pot, t)
        g = lev.H if use_H else lev.grad
        return -(1.0 / alpha) * math.exp(lam * t) * lev.area * g**alpha

    def ric_integrand(r: float) -> float:
        w = pot.w(r)
        g = pot.grad_norm(r)
        return (
            math.exp(lam * w)
            * sphere
            * model.h(r) ** (n - 1.0)
            * g ** (alpha - 1.0)
            * model.f(r)
            * geometry.ricci_radial(model, r)
        )

    ric_cum = CumulativeIntegral(ric_integrand, pot.r0, BULK_TOL)

    def bulk(t: float) -> float:
        return ric_cum(pot.level_radius(t))

    bulks = np.array([bulk(t) for t in ts])
    values = np.array([boundary(t) for t in ts]) - bulks
    h_form = np.array([boundary(t, use_H=True) for t in ts]) - bulks
    rhs = np.zeros_like(values)  # round levels: grad^T H = 0 and h-ring = 0
    meta = {
        "alpha": alpha,
        "model": model.label,
        "monotonicity_guaranteed": alpha >= 1.0,
        "h_form_values": h_form,
    }
    return _finish_series("F_1", ts, values, bulks, rhs, lambda t: boundary(t) - bulk(t), derivative_step, meta)


def hawking_mass(area: float, willmore: float) -> float:
    """sqrt(area/16 pi) (1 - willmore/16 pi), willmore = int H^2."""
    if area <= 0.0:
        raise ValueError("area must be positive")
    return math.sqrt(area / (16.0 * math.pi)) * (1.0 - willmore / (16.0 * math.pi))


def hawking_series(pot: radial.RadialPotential, t_grid, derivative_step: float = 1e-3) -> MonotoneSeries:
    """Hawking mass along the flow; rhs column is the Geroch right side."""
    _require_kind(pot, (radial.KIND_IMCF,), "hawking_series")
    if pot.manifold.n != 3:
        raise ValueError("the Hawking mass is defined for n = 3")
    ts = np.asarray(t_grid, dtype=float)

    def mval(t: float) -> float:
        lev = radial_level(pot, t)
        return hawking_mass(lev.area, lev.willmore)

    values = np.array([mval(t) for t in ts])
    rhs = np.array([geroch_rhs(radial_level(pot, t)) for t in ts])
    return _finish_series(
        "hawking_mass",
        ts,
        values,
        np.zeros_like(values),
        rhs,
        mval,
        derivative_step,
        {"model": pot.manifold.label},
    )


def minkowski_M(level, alpha: float, area_hull: Optional[float] = None) -> float:
    """Normalized Minkowski functional
    |area_hull|^{alpha/(n-1)-1} int |H/(n-1)|^alpha."""
    if isinstance(level, RadialLevel):
        n = level.n
        area = level.area
        integral = area * abs(level.H / (n - 1.0)) ** alpha
    else:
        n = 3
        area = level.area_value
        integral = level.integrate(np.abs(level.H / (n - 1.0)) ** alpha)
    if area_hull is None:
        area_hull = area
    return area_hull ** (alpha / (n - 1.0) - 1.0) * integral


def geroch_rhs(level) -> float:
    """sqrt(area/(16 pi)^3) (4 pi (2 - chi) + int 2|grad^T H|^2/H^2 + |h-ring|^2 + Sc)."""
    if isinstance(level, RadialLevel):
        if level.n != 3:
            raise ValueError("the Geroch right side is defined for n = 3")
        if level.H <= 0.0:
            raise ValueError("mean curvature must be positive on the level")
        chi = level.chi_proxy
        integral = level.area * level.scalar
        area = level.area
    else:
        if np.any(level.H <= 0.0):
            raise ValueError("mean curvature must be positive on the level")
        chi = level.chi_proxy
        integral = level.integrate(
            2.0 * level.H_tangential**2 / level.H**2 + level.hring_sq
        )  # ambient scalar curvature vanishes for the flat 2-D solver
        area = level.area_value
    return math.sqrt(area / (16.0 * math.pi) ** 3) * (4.0 * math.pi * (2.0 - chi) + integral)


def write_series_csv(series: MonotoneSeries, path) -> None:
    """Deterministic CSV export: columns t, value, bulk_term, rhs_Qp, residual."""
    rhs = series.rhs_qp if series.rhs_qp is not None else np.full(len(series.t), np.nan)
    res = series.residual if series.residual is not None else np.full(len(series.t), np.nan)
    lines = ["t,value,bulk_term,rhs_Qp,residual"]
    for row in zip(series.t, series.values, series.bulk, rhs, res):
        lines.append(",".join(f"{x:.17g}" for x in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")

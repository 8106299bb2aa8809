"""Rotationally symmetric model geometries.

A model is the warped product  g = f(r)^2 dr^2 + h(r)^2 g_{S^{n-1}}  on
r >= r_min, described by the warping functions f, h and their derivatives.
Sign conventions, asserted in one place by the test suite:

* coordinate spheres carry the outward normal, so the mean curvature of a
  round sphere in flat space is H = (n-1)/r > 0;
* Ric(nu, nu) along the radial unit normal vanishes in flat space and is
  negative on the spatial Schwarzschild slice (-2m/r^3 for n = 3).

Curvature of the warped product, with K1 the radial-tangential and K2 the
tangential-tangential sectional curvature:

    K1 = -(h''/(f^2 h) - h' f'/(f^3 h))
    K2 = (1 - (h'/f)^2) / h^2
    Ric(nu,nu) = (n-1) K1
    Scal       = 2(n-1) K1 + (n-1)(n-2) K2
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .numerics import CumulativeIntegral, Tolerance, integrate, natural_cubic_spline

__all__ = [
    "RadialManifold",
    "DomainError",
    "AvrUndefinedError",
    "unit_sphere_area",
    "euclidean",
    "cone",
    "schwarzschild",
    "tabulated",
    "tabulated_from_json",
    "build_model",
    "MODEL_NAMES",
    "mean_curvature_sphere",
    "ricci_radial",
    "scalar_curvature",
    "cross_section",
    "avr",
    "proper_distance",
]


class DomainError(ValueError):
    """Radius outside the model's working range."""


class AvrUndefinedError(RuntimeError):
    """The normalized area ratio (h/r)^(n-1) does not stabilize at large r."""


def unit_sphere_area(n: int) -> float:
    """Area of the unit (n-1)-sphere in R^n: 2 pi^(n/2) / Gamma(n/2)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


@dataclass(frozen=True)
class RadialManifold:
    """Warped-product model g = f^2 dr^2 + h^2 g_{S^{n-1}} on r >= r_min."""

    n: int
    f: Callable[[float], float]
    h: Callable[[float], float]
    df: Callable[[float], float]
    dh: Callable[[float], float]
    d2h: Callable[[float], float]
    r_min: float
    label: str
    r_max: float = math.inf
    avr_hint: Optional[float] = None
    nonneg_ricci: bool = False
    # closed-form curvature overrides for models whose generic formula
    # degenerates (f blows up at the Schwarzschild horizon)
    mean_curvature_fn: Optional[Callable[[float], float]] = None
    ricci_fn: Optional[Callable[[float], float]] = None
    scalar_fn: Optional[Callable[[float], float]] = None

    def check_radius(self, r: float) -> float:
        r = float(r)
        if r < self.r_min - 1e-12 * (1.0 + abs(self.r_min)):
            raise DomainError(f"r={r} below r_min={self.r_min} for {self.label}")
        if r > self.r_max * (1.0 + 1e-12):
            raise DomainError(f"r={r} beyond tabulated range r_max={self.r_max} for {self.label}")
        return r


def mean_curvature_sphere(model: RadialManifold, r: float) -> float:
    """Mean curvature of the coordinate sphere {r} w.r.t. the outward normal."""
    r = model.check_radius(r)
    if model.mean_curvature_fn is not None:
        return model.mean_curvature_fn(r)
    return (model.n - 1) * model.dh(r) / (model.f(r) * model.h(r))


def ricci_radial(model: RadialManifold, r: float) -> float:
    """Ricci curvature Ric(nu, nu) along the radial unit normal."""
    r = model.check_radius(r)
    if model.ricci_fn is not None:
        return model.ricci_fn(r)
    f = model.f(r)
    h = model.h(r)
    return -(model.n - 1) * (model.d2h(r) / (f * f * h) - model.dh(r) * model.df(r) / (f**3 * h))


def scalar_curvature(model: RadialManifold, r: float) -> float:
    """Scalar curvature of the ambient warped product at radius r."""
    r = model.check_radius(r)
    if model.scalar_fn is not None:
        return model.scalar_fn(r)
    n = model.n
    f = model.f(r)
    h = model.h(r)
    k1 = -(model.d2h(r) / (f * f * h) - model.dh(r) * model.df(r) / (f**3 * h))
    k2 = (1.0 - (model.dh(r) / f) ** 2) / (h * h)
    return 2.0 * (n - 1) * k1 + (n - 1) * (n - 2) * k2


def cross_section(model: RadialManifold, r: float) -> tuple[float, float]:
    """(area, induced scalar curvature) of the coordinate sphere {r}."""
    r = model.check_radius(r)
    h = model.h(r)
    n = model.n
    area = unit_sphere_area(n) * h ** (n - 1)
    induced_scalar = (n - 1) * (n - 2) / (h * h)
    return area, induced_scalar


def avr(model: RadialManifold) -> float:
    """Asymptotic volume ratio lim (h(r)/r)^(n-1).

    Uses the constructor hint when available, otherwise samples at four
    doubling radii and requires a relative spread below 1e-4 before
    Richardson-extrapolating the tail.
    """
    if model.avr_hint is not None:
        return model.avr_hint
    if math.isfinite(model.r_max):
        base = model.r_max / 8.0
        if base <= model.r_min:
            raise AvrUndefinedError(f"tabulated range of {model.label} too short for extrapolation")
    else:
        base = max(8.0, 4.0 * (model.r_min + 1.0))
    radii = [base, 2.0 * base, 4.0 * base, 8.0 * base]
    vals = [(model.h(r) / r) ** (model.n - 1) for r in radii]
    mean = sum(vals) / len(vals)
    spread = (max(vals) - min(vals)) / max(abs(mean), 1e-300)
    if spread > 1e-4:
        raise AvrUndefinedError(
            f"(h/r)^(n-1) not stable for {model.label}: values {vals}, relative spread {spread:.3e}"
        )
    # one Richardson step assuming O(1/r) convergence of the tail
    return vals[-1] + (vals[-1] - vals[-2])


def proper_distance(model: RadialManifold, a: float, b: float, tol: Tolerance = Tolerance()) -> float:
    """Arc length of the radial geodesic between radii a and b.

    When f blows up at the inner endpoint (Schwarzschild horizon) the
    substitution x = sqrt(r - a) regularizes the integrand.
    """
    a = model.check_radius(a)
    b = model.check_radius(b)
    if b < a:
        raise ValueError("endpoints out of order")
    if b == a:
        return 0.0
    fa = model.f(a)
    if math.isfinite(fa):
        return integrate(model.f, a, b, tol)

    # keep a + x*x strictly above a in double precision, and far enough out
    # that computing f there does not hit the cancellation noise of r - a;
    # the integrand is within O(x_floor^2) ~ 1e-8 of its finite limit below
    # the floor, so the induced error is ~x_floor^3
    x_floor = 1e-4 * math.sqrt(max(a, 1e-12))

    def regularized(x: float) -> float:
        x = max(x, x_floor)
        return 2.0 * x * model.f(a + x * x)

    return integrate(regularized, 0.0, math.sqrt(b - a), tol)


def _validate_samples(model: RadialManifold, lo: float, hi: float, samples: int = 128) -> None:
    rs = np.linspace(lo, hi, samples)
    for r in rs:
        h = model.h(r)
        f = model.f(r)
        if not (h > 0.0):
            raise ValueError(f"{model.label}: h(r) <= 0 at r={r}")
        if not (f > 0.0):
            raise ValueError(f"{model.label}: f(r) <= 0 at r={r}")
        if model.dh(r) < -1e-12 * max(1.0, abs(h)):
            raise ValueError(f"{model.label}: h'(r) < 0 at r={r}")
    if model.nonneg_ricci:
        for r in rs:
            if math.isfinite(model.f(r)) and ricci_radial(model, r) < -1e-8:
                raise ValueError(f"{model.label}: flagged nonneg-Ricci but Ric(nu,nu) < 0 at r={r}")


def cone(n: int = 3, aperture: float = 1.0) -> RadialManifold:
    """Metric cone dr^2 + (a r)^2 g_{S^{n-1}} over the round sphere of radius a <= 1."""
    if n < 3:
        raise ValueError("dimension must be at least 3")
    if not (0.0 < aperture <= 1.0):
        raise ValueError("aperture must lie in (0, 1]")
    a = float(aperture)
    model = RadialManifold(
        n=n,
        f=lambda r: 1.0,
        h=lambda r: a * r,
        df=lambda r: 0.0,
        dh=lambda r: a,
        d2h=lambda r: 0.0,
        r_min=0.0,
        label=f"cone(n={n}, a={a:g})",
        avr_hint=a ** (n - 1),
        nonneg_ricci=True,
    )
    _validate_samples(model, 1e-6, 100.0)
    return model


def euclidean(n: int = 3) -> RadialManifold:
    """Flat R^n in polar coordinates (the aperture-1 cone)."""
    model = replace(cone(n, 1.0), label=f"euclidean(n={n})")
    return model


def schwarzschild(mass: float, n: int = 3) -> RadialManifold:
    """Spatial Schwarzschild slice of mass m > 0 (n = 3), r >= 2m.

    f = (1 - 2m/r)^(-1/2) diverges at the horizon, where the closed-form
    curvature evaluators below remain finite: H = (2/r) sqrt(1 - 2m/r),
    Ric(nu,nu) = -2m/r^3, Scal = 0.
    """
    if n != 3:
        raise ValueError("the Schwarzschild model is implemented for n = 3")
    if not mass > 0.0:
        raise ValueError("mass must be positive")
    m = float(mass)

    def f(r: float) -> float:
        t = 1.0 - 2.0 * m / r
        return t ** -0.5 if t > 0.0 else math.inf

    def df(r: float) -> float:
        t = 1.0 - 2.0 * m / r
        return -(m / (r * r)) * t ** -1.5 if t > 0.0 else -math.inf

    model = RadialManifold(
        n=3,
        f=f,
        h=lambda r: r,
        df=df,
        dh=lambda r: 1.0,
        d2h=lambda r: 0.0,
        r_min=2.0 * m,
        label=f"schwarzschild(m={m:g})",
        avr_hint=1.0,
        nonneg_ricci=False,
        mean_curvature_fn=lambda r: (2.0 / r) * math.sqrt(max(1.0 - 2.0 * m / r, 0.0)),
        ricci_fn=lambda r: -2.0 * m / r**3,
        scalar_fn=lambda r: 0.0,
    )
    _validate_samples(model, 2.0 * m * 1.001, 2.0 * m * 50.0)
    return model


def tabulated(
    n: int,
    table: Sequence,
    label: str = "tabulated",
    nonneg_ricci: bool = False,
    avr_hint: Optional[float] = None,
) -> RadialManifold:
    """Model interpolated from (r, f, h) triples with natural cubic splines.

    ``table`` holds dicts with keys r/f/h or plain triples, strictly
    increasing in r.  Evaluators raise DomainError outside the table range.
    """
    rows = []
    for entry in table:
        if isinstance(entry, dict):
            rows.append((float(entry["r"]), float(entry["f"]), float(entry["h"])))
        else:
            r, f, h = entry
            rows.append((float(r), float(f), float(h)))
    if len(rows) < 4:
        raise ValueError("tabulated model needs at least 4 samples")
    rs = np.array([row[0] for row in rows])
    fs = np.array([row[1] for row in rows])
    hs = np.array([row[2] for row in rows])
    if not np.all(np.diff(rs) > 0.0):
        raise ValueError("tabulated radii must be strictly increasing")
    if np.any(hs <= 0.0) or np.any(fs <= 0.0):
        raise ValueError("tabulated f and h must be positive")
    f_spl = natural_cubic_spline(rs, fs)
    h_spl = natural_cubic_spline(rs, hs)
    r_lo, r_hi = float(rs[0]), float(rs[-1])

    def guard(fn):
        def wrapped(r: float) -> float:
            if r < r_lo - 1e-9 * (1 + abs(r_lo)) or r > r_hi + 1e-9 * (1 + abs(r_hi)):
                raise DomainError(f"r={r} outside tabulated range [{r_lo}, {r_hi}]")
            return float(fn(r))

        return wrapped

    model = RadialManifold(
        n=n,
        f=guard(f_spl),
        h=guard(h_spl),
        df=guard(f_spl.derivative(1)),
        dh=guard(h_spl.derivative(1)),
        d2h=guard(h_spl.derivative(2)),
        r_min=r_lo,
        r_max=r_hi,
        label=label,
        avr_hint=avr_hint,
        nonneg_ricci=nonneg_ricci,
    )
    span = r_hi - r_lo
    _validate_samples(model, r_lo + 1e-3 * span, r_hi - 1e-3 * span)
    return model


def tabulated_from_json(path, **kwargs) -> RadialManifold:
    """Load a tabulated model from a JSON array of {r, f, h} objects."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise ValueError("tabulated model file must contain a JSON array")
    return tabulated(kwargs.pop("n", 3), data, **kwargs)


MODEL_NAMES = ("euclidean", "cone", "schwarzschild", "tabulated")


def build_model(name: str, **params) -> RadialManifold:
    """Construct a catalog model from its name and parameters."""
    if name == "euclidean":
        return euclidean(int(params.pop("n", 3)), **params)
    if name == "cone":
        return cone(int(params.pop("n", 3)), float(params.pop("aperture")), **params)
    if name == "schwarzschild":
        return schwarzschild(float(params.pop("mass")), int(params.pop("n", 3)), **params)
    if name == "tabulated":
        path = params.pop("path")
        return tabulated_from_json(path, **params)
    raise ValueError(f"unknown model '{name}'; available: {', '.join(MODEL_NAMES)}")

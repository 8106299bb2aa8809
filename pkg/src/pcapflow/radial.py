"""Radial potentials on warped-product models.

On g = f^2 dr^2 + h^2 g_{S^{n-1}} every solver here reduces to an ODE in r.
With u = e^{-w/(p-1)} the p-harmonic equation integrates to the flux relation

    h^{n-1} |u'/f|^{p-2} (u'/f) = -C,

so u(r) = 1 - B * I(r) with I(r) = int_{r0}^r f h^{-(n-1)/(p-1)} and
C = B^{p-1}.  The regularized problem replaces |s|^{p-2} s by
(s^2 + eps^2)^{(p-2)/2} s and is solved by shooting on C, recovering the
slope from the (monotone) regularized flux relation at every radius.  The
inverse-mean-curvature potential is explicit: w1 = (n-1) ln(h(r)/h(r0)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import geometry
from .numerics import (
    BracketError,
    CumulativeIntegral,
    Tolerance,
    find_root,
    integrate,
)

__all__ = [
    "RadialPotential",
    "NotOutwardMinimizing",
    "ShootingError",
    "CapacityConsistencyError",
    "solve_wp",
    "solve_w1",
    "solve_wp_eps",
    "capacity",
]

KIND_P = "p-potential"
KIND_IMCF = "imcf"
KIND_EPS = "eps-regularized"

# profile integrands span many decades when p is near 1 (h^{-kappa} with
# kappa = (n-1)/(p-1)), so the quadrature must be purely relative: any
# absolute floor would accept tail chunks at garbage relative accuracy
SOLVE_TOL = Tolerance(abs_tol=1e-300, rel_tol=1e-12, max_iter=200)


class NotOutwardMinimizing(RuntimeError):
    """h' <= 0 somewhere: coordinate spheres fail to flow outward."""


class ShootingError(RuntimeError):
    """The shooting iteration for the regularized flux constant failed."""


class CapacityConsistencyError(RuntimeError):
    """The capacity read off at several cross sections disagrees."""


@dataclass
class RadialPotential:
    """A solved radial level-set potential with quadrature-backed evaluators.

    w increases from w(r0) = 0 to w(R) = phi_R; grad_norm is |grad w|;
    u = e^{-w/(p-1)} where a p (or regularization) is present; theta is the
    regularization weight eps^2 / (|grad u|^2 + eps^2) for the eps kind.
    """

    manifold: geometry.RadialManifold
    kind: str
    r0: float
    R: float
    phi_R: float
    p: Optional[float] = None
    eps: Optional[float] = None
    flux: Optional[float] = None
    _w: Callable[[float], float] = field(default=None, repr=False)
    _grad: Callable[[float], float] = field(default=None, repr=False)
    _dgrad: Callable[[float], float] = field(default=None, repr=False)
    _u: Optional[Callable[[float], float]] = field(default=None, repr=False)
    _theta: Optional[Callable[[float], float]] = field(default=None, repr=False)
    _level: Optional[Callable[[float], float]] = field(default=None, repr=False)

    def _check(self, r: float) -> float:
        r = float(r)
        pad = 1e-9 * (self.R - self.r0)
        if r < self.r0 - pad or r > self.R + pad:
            raise geometry.DomainError(f"r={r} outside the annulus [{self.r0}, {self.R}]")
        return min(max(r, self.r0), self.R)

    def w(self, r: float) -> float:
        return self._w(self._check(r))

    def grad_norm(self, r: float) -> float:
        return self._grad(self._check(r))

    def grad_norm_derivative(self, r: float) -> float:
        """d|grad w|/dr, in closed form from the flux relation."""
        return self._dgrad(self._check(r))

    def u(self, r: float) -> float:
        if self._u is None:
            raise ValueError(f"u is not defined for kind '{self.kind}'")
        return self._u(self._check(r))

    def theta(self, r: float) -> float:
        if self._theta is None:
            raise ValueError(f"theta is only defined for the {KIND_EPS} kind")
        return self._theta(self._check(r))

    def level_radius(self, t: float) -> float:
        """Radius of the level set {w = t}."""
        t = float(t)
        if t < -1e-12 or t > self.phi_R + 1e-12:
            raise ValueError(f"level t={t} outside [0, {self.phi_R}]")
        if t <= 0.0:
            return self.r0
        if self._level is not None:
            return self._level(t)
        tol = Tolerance(abs_tol=1e-13 * max(1.0, self.R), rel_tol=1e-14, max_iter=200)
        return find_root(lambda r: self._w(r) - t, self.r0, self.R, tol)

    @property
    def T_max(self) -> float:
        return self.phi_R


def _default_phi(model: geometry.RadialManifold, r0: float, R: float) -> float:
    """Outer datum matched to the inverse-mean-curvature potential."""
    return (model.n - 1) * math.log(model.h(R) / model.h(r0))


def _check_annulus(model: geometry.RadialManifold, r0: float, R: float) -> None:
    model.check_radius(r0)
    model.check_radius(R)
    if not r0 < R:
        raise ValueError(f"need r0 < R, got [{r0}, {R}]")
    if not math.isfinite(model.f(r0)):
        raise geometry.DomainError(
            f"f({r0}) is not finite; start the annulus strictly inside the working range"
        )


def solve_wp(
    model: geometry.RadialManifold,
    r0: float,
    R: float,
    p: float,
    phi_R: Optional[float] = None,
    tol: Tolerance = SOLVE_TOL,
) -> RadialPotential:
    """Radial p-capacitary potential on the annulus [r0, R], p in (1, 2]."""
    _check_annulus(model, r0, R)
    if not (1.0 < p <= 2.0):
        raise ValueError(f"p={p} outside (1, 2]")
    if phi_R is None:
        phi_R = _default_phi(model, r0, R)
    if not phi_R > 0.0:
        raise ValueError(f"phi_R={phi_R} must be positive")
    n = model.n
    kappa = (n - 1.0) / (p - 1.0)
    u_R = math.exp(-phi_R / (p - 1.0))
    if u_R == 0.0:
        raise ValueError(f"phi_R={phi_R} underflows exp(-phi_R/(p-1)) at p={p}")
    # accumulate the profile integral from the outer shell inward: then
    # u = u_R + B * tail is a sum of positive terms and stays accurate down
    # to underflow, where 1 - B * I(r) would cancel catastrophically
    cum = CumulativeIntegral(lambda s: model.f(s) * model.h(s) ** -kappa, R, tol, sided=True)
    IR = -cum(r0)
    B = (1.0 - u_R) / IR

    def u(r: float) -> float:
        return u_R - B * cum(r)

    def grad(r: float) -> float:
        return (p - 1.0) * B * model.h(r) ** -kappa / u(r)

    def dgrad(r: float) -> float:
        g = grad(r)
        return g * (-kappa * model.dh(r) / model.h(r) + model.f(r) * g / (p - 1.0))

    return RadialPotential(
        manifold=model,
        kind=KIND_P,
        r0=float(r0),
        R=float(R),
        phi_R=float(phi_R),
        p=float(p),
        flux=B ** (p - 1.0),
        _w=lambda r: -(p - 1.0) * math.log(u(r)),
        _grad=grad,
        _dgrad=dgrad,
        _u=u,
    )


def solve_w1(model: geometry.RadialManifold, r0: float, R: float) -> RadialPotential:
    """Inverse-mean-curvature potential w1 = (n-1) ln(h(r)/h(r0)).

    Requires h' > 0 on [r0, R] (coordinate spheres strictly outward
    minimizing); |grad w1| equals the sphere mean curvature.
    """
    model.check_radius(r0)
    model.check_radius(R)
    if not r0 < R:
        raise ValueError(f"need r0 < R, got [{r0}, {R}]")
    n = model.n
    for r in np.linspace(r0, R, 256):
        if model.dh(r) <= 0.0:
            raise NotOutwardMinimizing(f"h'(r) <= 0 at r={r}: flow is not outward minimizing")
    h0 = model.h(r0)

    def grad(r: float) -> float:
        return (n - 1.0) * model.dh(r) / (model.f(r) * model.h(r))

    def dgrad(r: float) -> float:
        f = model.f(r)
        h = model.h(r)
        dh = model.dh(r)
        return (n - 1.0) * (model.d2h(r) / (f * h) - dh * model.df(r) / (f * f * h) - dh * dh / (f * h * h))

    def level(t: float) -> float:
        target = h0 * math.exp(t / (n - 1.0))
        tol = Tolerance(abs_tol=1e-13 * max(1.0, R), rel_tol=1e-14, max_iter=200)
        return find_root(lambda r: model.h(r) - target, r0, R, tol)

    return RadialPotential(
        manifold=model,
        kind=KIND_IMCF,
        r0=float(r0),
        R=float(R),
        phi_R=(n - 1.0) * math.log(model.h(R) / h0),
        _w=lambda r: (n - 1.0) * math.log(model.h(r) / h0),
        _grad=grad,
        _dgrad=dgrad,
        _level=level,
    )


def _regularized_slope(m: float, p: float, eps: float) -> float:
    """Solve (q^2 + eps^2)^((p-2)/2) q = m for q >= 0 (monotone in q).

    Newton from the unregularized start q0 = m^(1/(p-1)) (a lower bound for
    p <= 2), with a bracketed fallback.
    """
    if m <= 0.0:
        return 0.0
    if p == 2.0:
        return m

    def phi(q: float) -> float:
        return (q * q + eps * eps) ** ((p - 2.0) / 2.0) * q

    def dphi(q: float) -> float:
        s = q * q + eps * eps
        return s ** ((p - 4.0) / 2.0) * ((p - 1.0) * q * q + eps * eps)

    q = m ** (1.0 / (p - 1.0))
    for _ in range(12):
        step = (phi(q) - m) / dphi(q)
        q_new = q - step
        if q_new <= 0.0:
            break
        if abs(step) <= 1e-14 * q_new:
            return q_new
        q = q_new
    lo = m ** (1.0 / (p - 1.0))
    hi = lo
    for _ in range(200):
        if phi(hi) >= m:
            break
        hi *= 2.0
    return find_root(lambda s: phi(s) - m, lo, hi, Tolerance(1e-15, 1e-14, 200))


def solve_wp_eps(
    model: geometry.RadialManifold,
    r0: float,
    R: float,
    p: float,
    eps: float,
    phi_R: Optional[float] = None,
    tol: Tolerance = SOLVE_TOL,
) -> RadialPotential:
    """Regularized radial potential: shooting on the flux constant C.

    u(R; C) is strictly decreasing in C, so the boundary condition pins C by
    a log-parametrized bracketed root find.
    """
    _check_annulus(model, r0, R)
    if not (1.0 < p <= 2.0):
        raise ValueError(f"p={p} outside (1, 2]")
    if not eps > 0.0:
        raise ValueError("eps must be positive")
    if phi_R is None:
        phi_R = _default_phi(model, r0, R)
    n = model.n
    u_R = math.exp(-phi_R / (p - 1.0))
    base = solve_wp(model, r0, R, p, phi_R, tol)
    C0 = base.flux

    def q_at(r: float, C: float) -> float:
        return _regularized_slope(C / model.h(r) ** (n - 1.0), p, eps)

    def u_end_defect(C: float) -> float:
        drop = integrate(lambda s: model.f(s) * q_at(s, C), r0, R, tol)
        return (1.0 - drop) - u_R

    # u(R; C0) <= u_R for the regularized slope, so C0 brackets from above
    lo_exp, hi_exp = math.log(C0), math.log(C0)
    for _ in range(80):
        if u_end_defect(math.exp(lo_exp)) >= 0.0:
            break
        lo_exp -= math.log(2.0)
    else:
        raise ShootingError("could not bracket the flux constant from below")
    for _ in range(80):
        if u_end_defect(math.exp(hi_exp)) <= 0.0:
            break
        hi_exp += math.log(2.0)
    else:
        raise ShootingError("could not bracket the flux constant from above")
    x = find_root(lambda y: u_end_defect(math.exp(y)), lo_exp, hi_exp, Tolerance(1e-13, 1e-13, 200))
    C = math.exp(x)

    # same tail accumulation as solve_wp: u = u_R + positive tail, safe from
    # the 1 - cum cancellation when the outer datum is tiny (p near 1)
    cum = CumulativeIntegral(lambda s: model.f(s) * q_at(s, C), R, tol, sided=True)

    def u(r: float) -> float:
        return u_R - cum(r)

    def q_fn(r: float) -> float:
        return q_at(r, C)

    def theta(r: float) -> float:
        q = q_fn(r)
        return eps * eps / (q * q + eps * eps)

    def grad(r: float) -> float:
        return (p - 1.0) * q_fn(r) / u(r)

    def dgrad(r: float) -> float:
        q = q_fn(r)
        th = theta(r)
        dq_over_q = -(n - 1.0) * (model.dh(r) / model.h(r)) / ((p - 1.0) + (2.0 - p) * th)
        return grad(r) * (dq_over_q + model.f(r) * q / u(r))

    return RadialPotential(
        manifold=model,
        kind=KIND_EPS,
        r0=float(r0),
        R=float(R),
        phi_R=float(phi_R),
        p=float(p),
        eps=float(eps),
        flux=C,
        _w=lambda r: -(p - 1.0) * math.log(u(r)),
        _grad=grad,
        _dgrad=dgrad,
        _u=u,
        _theta=theta,
    )


def capacity(
    pot: RadialPotential,
    t: float = 0.0,
    T: Optional[float] = None,
    taus: Optional[tuple[float, ...]] = None,
) -> float:
    """Normalized p-capacity of the condenser ({w <= t}, {w < T}).

    Read off the flux at several cross sections tau:

        cap = e^{-tau} h(r_tau)^{n-1} (|grad w|(r_tau)/(n-p))^{p-1}
              / (e^{-t/(p-1)} - e^{-T/(p-1)})^{p-1},

    which is tau-independent for the exact potential; the values must agree
    to 1e-8 relative or CapacityConsistencyError is raised.  Normalized so
    the unit ball against all of flat R^n has capacity h(r0)^{n-1}.
    """
    if pot.kind != KIND_P:
        raise ValueError("capacity requires a p-potential")
    p = pot.p
    n = pot.manifold.n
    if T is None:
        T = pot.phi_R
    if not (0.0 <= t < T <= pot.phi_R + 1e-12):
        raise ValueError(f"need 0 <= t < T <= phi_R, got t={t}, T={T}, phi_R={pot.phi_R}")
    if taus is None:
        taus = (0.0, 0.5 * T, 0.75 * T)
    vals = []
    for tau in taus:
        if not 0.0 <= tau <= pot.phi_R + 1e-12:
            raise ValueError(f"tau={tau} outside [0, phi_R]")
        r_tau = pot.level_radius(tau)
        g = pot.grad_norm(r_tau)
        h = pot.manifold.h(r_tau)
        vals.append(math.exp(-tau) * h ** (n - 1.0) * (g / (n - p)) ** (p - 1.0))
    denom = (math.exp(-t / (p - 1.0)) - math.exp(-T / (p - 1.0))) ** (p - 1.0)
    caps = [v / denom for v in vals]
    spread = (max(caps) - min(caps)) / max(abs(caps[0]), 1e-300)
    if spread > 1e-8:
        raise CapacityConsistencyError(
            f"capacity values disagree across cross sections: {caps} (relative spread {spread:.3e})"
        )
    return sum(caps) / len(caps)

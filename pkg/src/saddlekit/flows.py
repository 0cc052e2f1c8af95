"""Periodic planar vector fields and their time-T return maps.

A non-autonomous field u' = X(t, u) that repeats after time T induces the
return map q -> u(T, q).  This module integrates such fields with an adaptive
embedded Runge-Kutta 5(4) scheme, wraps the return map in the
:class:`~saddlekit.planarmap.PlanarMap` protocol (so censuses, manifold
growers and the certifier apply unchanged), computes monodromy matrices by
integrating the variational equations, and assembles forced Lienard
oscillators together with sampled checks of their standing assumptions.

Everything here is float arithmetic under declared tolerances: "the orbit is
periodic" means the return residual is below ``ORBIT_CLOSURE_TOL``, and every
assumption verdict names the sample set it was checked on.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .expressions import Dual, Expression, parse
from .fixedpoints import ConsistencyError, FixedPointRecord, classify_local, eig2
from .newton import newton_batch
from .planarmap import PlanarMap, Region

__all__ = [
    "ATOL",
    "RTOL",
    "MAP_ATOL",
    "MAP_RTOL",
    "ESCAPE_RADIUS",
    "ORBIT_CLOSURE_TOL",
    "JACOBI_LIOUVILLE_TOL",
    "IntegrationError",
    "PeriodicOrbitNotFound",
    "PlanarField",
    "PeriodicSystem",
    "LienardSystem",
    "CachedAntiderivative",
    "AssumptionCheck",
    "AssumptionReport",
    "LienardSpec",
    "DetCheck",
    "MonodromyResult",
    "TimeTMap",
    "integrate",
    "sample_orbit",
    "time_T_map",
    "monodromy",
    "build_lienard",
    "find_periodic_orbit",
]

ATOL = 1e-12
RTOL = 1e-10
# Return maps default tighter: fixed-point censuses Newton-solve P(q) = q down
# to residual 1e-11, so the evaluation noise floor of the map must sit below
# that, not merely below the plain-integration contract tolerances.
MAP_ATOL = 1e-14
MAP_RTOL = 1e-12
ESCAPE_RADIUS = 1e8
ORBIT_CLOSURE_TOL = 1e-8  # |P(q) - q| bound for "q sits on a periodic orbit"
JACOBI_LIOUVILLE_TOL = 1e-6  # relative det-vs-exp(integrated divergence) agreement
FORCING_PERIOD_TOL = 1e-9


class IntegrationError(RuntimeError):
    """Step-size underflow, or the solution left the overflow guard."""


class PeriodicOrbitNotFound(RuntimeError):
    """Newton on the return map failed to locate a periodic point."""


def _full_like(v, X) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != np.shape(X):
        v = np.broadcast_to(v, np.shape(X))
    return v


# ---------------------------------------------------------------------------
# Vector fields
# ---------------------------------------------------------------------------


class PlanarField:
    """Protocol base for time-periodic planar vector fields.

    Subclasses provide batched velocity and velocity-with-Jacobian
    evaluation; integration, return maps and monodromy are generic in this
    interface.  ``P`` is always an ``(n, 2)`` array of phase points.
    """

    name: str = "field"
    period: float = 1.0

    def velocity(self, t: float, P: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def velocity_and_jacobian(self, t: float, P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError


def _check_period(period) -> float:
    p = float(period)
    if not (math.isfinite(p) and p > 0.0):
        raise ValueError(f"period must be a positive real, got {period!r}")
    return p


class PeriodicSystem(PlanarField):
    """A field given by coordinate formulas in ``x``, ``y`` and ``t``.

    The formulas are taken to repeat after ``period`` in ``t``; nothing
    enforces that syntactically, but the time-T map is a return map of the
    dynamics only when it holds.
    """

    def __init__(self, x_rate, y_rate, period, name: str = "system"):
        self.x_rate = parse(x_rate) if isinstance(x_rate, str) else x_rate
        self.y_rate = parse(y_rate) if isinstance(y_rate, str) else y_rate
        self.period = _check_period(period)
        self.name = name

    def velocity(self, t, P):
        X, Y = P[:, 0], P[:, 1]
        out = np.empty((len(P), 2))
        with np.errstate(all="ignore"):
            out[:, 0] = self.x_rate._fn_value(X, Y, t)
            out[:, 1] = self.y_rate._fn_value(X, Y, t)
        return out

    def velocity_and_jacobian(self, t, P):
        X, Y = P[:, 0], P[:, 1]
        dX, dY = Dual(X, 1.0, 0.0), Dual(Y, 0.0, 1.0)
        with np.errstate(all="ignore"):
            du = self.x_rate._fn_dual(dX, dY, t)
            dv = self.y_rate._fn_dual(dX, dY, t)
        du = du if isinstance(du, Dual) else Dual(du)
        dv = dv if isinstance(dv, Dual) else Dual(dv)
        vel = np.empty((len(P), 2))
        vel[:, 0] = du.v
        vel[:, 1] = dv.v
        J = np.empty((len(P), 2, 2))
        J[:, 0, 0] = du.dx
        J[:, 0, 1] = du.dy
        J[:, 1, 0] = dv.dx
        J[:, 1, 1] = dv.dy
        return vel, J

    def __repr__(self):
        return (
            f"PeriodicSystem(x' = {self.x_rate.source}, y' = {self.y_rate.source}, "
            f"T = {self.period:g})"
        )


# ---------------------------------------------------------------------------
# Cached antiderivative (for the Lienard substitution)
# ---------------------------------------------------------------------------

# 7-point Gauss-Legendre rule on [-1, 1]
_GL_NODES = np.array(
    [
        -0.9491079123427585,
        -0.7415311855993945,
        -0.4058451513773972,
        0.0,
        0.4058451513773972,
        0.7415311855993945,
        0.9491079123427585,
    ]
)
_GL_WEIGHTS = np.array(
    [
        0.1294849661688697,
        0.2797053914892766,
        0.3818300505051189,
        0.4179591836734694,
        0.3818300505051189,
        0.2797053914892766,
        0.1294849661688697,
    ]
)


def _adaptive_simpson(fn, a: float, b: float, tol: float) -> float:
    m = 0.5 * (a + b)
    fa, fm, fb = fn(a), fn(m), fn(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_refine(fn, a, b, fa, fm, fb, whole, tol, 48)


def _simpson_refine(fn, a, b, fa, fm, fb, whole, tol, depth) -> float:
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = fn(lm), fn(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    half = 0.5 * tol
    return _simpson_refine(fn, a, m, fa, flm, fm, left, half, depth - 1) + _simpson_refine(
        fn, m, b, fm, frm, fb, right, half, depth - 1
    )


class CachedAntiderivative:
    """``F(x)``, the integral of a one-variable formula from 0 to x.

    Values at the knots of a uniform grid are accumulated once with
    per-cell adaptive Simpson quadrature (tolerance ``tol`` each); a query
    then adds the short remainder between its base knot and the point with a
    single 7-point Gauss-Legendre panel, so batched queries never re-enter
    the adaptive recursion.  Beyond ``max_span`` the base knot saturates and
    the (long) remainder panel is only qualitatively accurate — points out
    there have escaped every region this toolkit certifies.
    """

    def __init__(self, integrand: Expression, spacing: float = 0.25, tol: float = 1e-10,
                 max_span: float = 64.0):
        self.integrand = integrand
        self.spacing = float(spacing)
        self.tol = float(tol)
        self.max_span = float(max_span)
        self._lo = 0  # cached knot indices run _lo.._hi inclusive
        self._hi = 0
        self._values = [0.0]  # F at knot i is _values[i - _lo]
        self._arr = np.zeros(1)
        self._cap = int(round(self.max_span / self.spacing))
        self._inv_spacing = 1.0 / self.spacing

    def _point(self, x: float) -> float:
        return float(self.integrand(np.float64(x), 0.0, 0.0))

    def _extend(self, lo: int, hi: int) -> None:
        while self._hi < hi:
            a = self._hi * self.spacing
            cell = _adaptive_simpson(self._point, a, a + self.spacing, self.tol)
            self._values.append(self._values[-1] + cell)
            self._hi += 1
        while self._lo > lo:
            b = self._lo * self.spacing
            cell = _adaptive_simpson(self._point, b - self.spacing, b, self.tol)
            self._values.insert(0, self._values[0] - cell)
            self._lo -= 1
        self._arr = np.asarray(self._values, float)

    def _panel(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        half = 0.5 * (B - A)
        nodes = (0.5 * (A + B))[:, None] + half[:, None] * _GL_NODES
        with np.errstate(all="ignore"):
            vals = self.integrand._fn_value(nodes, 0.0, 0.0)
        if np.ndim(vals) == 0:  # constant integrand: the rule is exact
            return (B - A) * float(vals)
        return (np.asarray(vals, float) @ _GL_WEIGHTS) * half

    def _finite(self, pts: np.ndarray) -> np.ndarray:
        knot = np.floor(pts * self._inv_spacing)
        np.minimum(knot, float(self._cap), out=knot)
        np.maximum(knot, float(-self._cap), out=knot)
        idx = knot.astype(np.int64)
        lo, hi = int(idx.min()), int(idx.max())
        if lo < self._lo or hi > self._hi:
            self._extend(min(lo, self._lo), max(hi, self._hi))
        return self._arr[idx - self._lo] + self._panel(knot * self.spacing, pts)

    def __call__(self, x):
        X = np.asarray(x, dtype=float)
        flat = X.reshape(-1)
        ok = np.isfinite(flat)
        if ok.all():
            out = self._finite(flat) if flat.size else flat.copy()
        else:
            out = np.full(flat.shape, np.nan)
            pts = flat[ok]
            if pts.size:
                out[ok] = self._finite(pts)
        if X.ndim == 0:
            return float(out[0])
        return out.reshape(X.shape)


def _parsed_univariate(src, var: str, role: str) -> Expression:
    e = parse(src) if isinstance(src, str) else src
    extra = e.free_variables - {var}
    if extra:
        raise ValueError(
            f"{role} formula {e.source!r} may only use {var!r}, found {sorted(extra)}"
        )
    return e


class LienardSystem(PlanarField):
    """Forced oscillator ``x'' + f(x) x' + g(x) = p(t)`` in its planar form.

    The standard substitution through the antiderivative F of the friction
    coefficient gives  x' = y - F(x),  y' = -g(x) + p(t).  F is evaluated by
    cached quadrature; because F' is the friction formula itself, velocity
    Jacobians stay closed-form.
    """

    def __init__(self, friction, restoring, forcing, period, name: str = "lienard"):
        self.friction = _parsed_univariate(friction, "x", "friction")
        self.restoring = _parsed_univariate(restoring, "x", "restoring")
        self.forcing = _parsed_univariate(forcing, "t", "forcing")
        self.period = _check_period(period)
        self.name = name
        self.antiderivative = CachedAntiderivative(self.friction)

    def _drive(self, t) -> float:
        with np.errstate(all="ignore"):
            return float(self.forcing._fn_value(0.0, 0.0, np.float64(t)))

    def velocity(self, t, P):
        X = P[:, 0]
        out = np.empty((len(P), 2))
        with np.errstate(all="ignore"):
            np.subtract(P[:, 1], self.antiderivative(X), out=out[:, 0])
            out[:, 1] = float(self.forcing._fn_value(0.0, 0.0, t)) - self.restoring._fn_value(
                X, 0.0, 0.0
            )
        return out

    def velocity_and_jacobian(self, t, P):
        X, Y = P[:, 0], P[:, 1]
        with np.errstate(all="ignore"):
            fv = self.friction._fn_value(X, 0.0, 0.0)
            dg = self.restoring._fn_dual(Dual(X, 1.0, 0.0), 0.0, 0.0)
        dg = dg if isinstance(dg, Dual) else Dual(dg)
        vel = np.empty((len(P), 2))
        vel[:, 0] = Y - self.antiderivative(X)
        vel[:, 1] = self._drive(t) - dg.v
        J = np.empty((len(P), 2, 2))
        J[:, 0, 0] = np.negative(fv)
        J[:, 0, 1] = 1.0
        J[:, 1, 0] = np.negative(dg.dx)
        J[:, 1, 1] = 0.0
        return vel, J

    def eigen_rates(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Instantaneous eigenvalue pair of the velocity Jacobian at ``x``.

        The Jacobian is [[-f(x), 1], [-g'(x), 0]]; returns (lower, upper) as
        complex arrays.  Wherever the friction is nonnegative and the
        restoring force strictly decreases, both are real with
        lower < 0 < upper.
        """
        X = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            fv = np.asarray(_full_like(self.friction._fn_value(X, 0.0, 0.0), X), float)
            dg = self.restoring._fn_dual(Dual(X, 1.0, 0.0), 0.0, 0.0)
        dg = dg if isinstance(dg, Dual) else Dual(dg)
        gp = np.asarray(_full_like(dg.dx, X), float)
        disc = fv * fv - 4.0 * gp
        root = np.sqrt(np.maximum(disc, 0.0)) + 1j * np.sqrt(np.maximum(-disc, 0.0))
        return (-fv - root) / 2.0, (-fv + root) / 2.0

    def __repr__(self):
        return (
            f"LienardSystem(f = {self.friction.source}, g = {self.restoring.source}, "
            f"p = {self.forcing.source}, T = {self.period:g})"
        )


# ---------------------------------------------------------------------------
# Adaptive Runge-Kutta 5(4), batched (Dormand-Prince coefficients)
# ---------------------------------------------------------------------------

_MAX_STEPS = 1_000_000


def _dp_step(rhs, t, h, Yi, k0):
    """One Dormand-Prince 5(4) attempt from ``(t, Yi)`` with step ``h``.

    ``k0 = rhs(t, Yi)`` is supplied by the caller: it survives step
    rejections unchanged, and because the last stage of this tableau sits
    exactly at the accepted point, its derivative ``k6`` doubles as the next
    step's ``k0`` (first-same-as-last).  Returns ``(Y5, err, k6)``.
    """
    k1 = rhs(t + 0.2 * h, Yi + (0.2 * h) * k0)
    k2 = rhs(t + 0.3 * h, Yi + h * ((3 / 40) * k0 + (9 / 40) * k1))
    k3 = rhs(t + 0.8 * h, Yi + h * ((44 / 45) * k0 - (56 / 15) * k1 + (32 / 9) * k2))
    k4 = rhs(
        t + (8 / 9) * h,
        Yi
        + h
        * (
            (19372 / 6561) * k0
            - (25360 / 2187) * k1
            + (64448 / 6561) * k2
            - (212 / 729) * k3
        ),
    )
    k5 = rhs(
        t + h,
        Yi
        + h
        * (
            (9017 / 3168) * k0
            - (355 / 33) * k1
            + (46732 / 5247) * k2
            + (49 / 176) * k3
            - (5103 / 18656) * k4
        ),
    )
    Y5 = Yi + h * (
        (35 / 384) * k0
        + (500 / 1113) * k2
        + (125 / 192) * k3
        - (2187 / 6784) * k4
        + (11 / 84) * k5
    )
    k6 = rhs(t + h, Y5)
    err = h * (
        (71 / 57600) * k0
        - (71 / 16695) * k2
        + (71 / 1920) * k3
        - (17253 / 339200) * k4
        + (22 / 525) * k5
        - (1 / 40) * k6
    )
    return Y5, err, k6


def _advance(rhs, t0: float, t1: float, Y0, *, atol: float, rtol: float,
             escape_radius: float, freeze: bool, label: str) -> np.ndarray:
    """March ``Y' = rhs(t, Y)`` from t0 to t1 (either direction).

    ``Y0`` is ``(n, d)``; the first two columns are the phase-plane position
    watched by the escape guard, further columns ride along (variational
    entries, integral accumulators).  All lanes share one adaptive step,
    controlled by the worst scaled error.  With ``freeze=True``, lanes whose
    position leaves the guard radius -- or that drive the step size under
    its floor while racing outward (finite-time blow-up) -- are frozen as
    ``inf``, lanes whose velocity stops evaluating finitely (or that hit
    the floor without escaping) as ``nan``, while the rest continue; with
    ``freeze=False`` the same events raise :class:`IntegrationError`.
    """
    Y = np.array(Y0, dtype=float).reshape(len(Y0), -1)
    n = len(Y)
    span = t1 - t0
    if n == 0 or span == 0.0:
        return Y
    sign = 1.0 if span > 0 else -1.0
    alive = np.ones(n, dtype=bool)

    broken = np.isnan(Y[:, :2]).any(axis=1)
    far = ~broken & (np.hypot(Y[:, 0], Y[:, 1]) > escape_radius)
    if (broken | far).any():
        if not freeze:
            raise IntegrationError(f"{label}: initial state is not a finite in-guard point")
        Y[broken] = np.nan
        Y[far] = np.inf  # already past the guard: still "escaped", not "undefined"
        alive &= ~(broken | far)

    t = t0
    h = span * 1e-3
    tiny = 1e-14 * max(abs(t0), abs(t1), 1.0)
    steps = 0
    idx = np.flatnonzero(alive)
    k0 = None  # rhs at (t, Y[idx]); survives rejections, FSAL-recycled on accepts
    stiff = None  # lanes that forced the last rejection, for underflow triage
    while (t1 - t) * sign > 0.0:
        if idx.size == 0:
            break
        steps += 1
        if steps > _MAX_STEPS:
            raise IntegrationError(f"{label}: step budget exhausted near t = {t:.6g}")
        if abs(h) < tiny:
            if not freeze or stiff is None or not stiff.any():
                raise IntegrationError(f"{label}: step size underflow near t = {t:.6g}")
            # Lanes that reject the step all the way down to the floor are
            # either racing to infinity (a finite-time blow-up: resolvable
            # step sizes run out while the position is still below the
            # guard) or sitting on something the error control cannot
            # resolve at any amplitude.  Tell them apart by state: far out,
            # or moving outward faster than the guard radius per unit time,
            # means escaped; otherwise the map is undefined there.
            Yi = Y[idx]
            pos = np.hypot(Yi[:, 0], Yi[:, 1])
            speed = np.hypot(k0[:, 0], k0[:, 1])
            outward = Yi[:, 0] * k0[:, 0] + Yi[:, 1] * k0[:, 1] > 0.0
            escaping = (pos > 0.01 * escape_radius) | (
                outward & (speed > escape_radius)
            )
            Y[idx[stiff & escaping]] = np.inf
            Y[idx[stiff & ~escaping]] = np.nan
            alive[idx[stiff]] = False
            idx = idx[~stiff]
            if k0 is not None:
                k0 = k0[~stiff]
            stiff = None
            h = (t1 - t) * 1e-3
            if abs(h) < 2.0 * tiny:
                h = math.copysign(2.0 * tiny, span)
            continue

        Yi = Y[idx]
        with np.errstate(all="ignore"):
            if k0 is None:
                k0 = rhs(t, Yi)
                bad0 = ~np.isfinite(k0).all(axis=1)
                if bad0.any():
                    # the field itself fails at the current state; no step
                    # size fixes that
                    if not freeze:
                        raise IntegrationError(
                            f"{label}: vector field not finite at t = {t:.6g}, "
                            f"q = {Y[idx[bad0][0], :2]}"
                        )
                    Y[idx[bad0]] = np.nan
                    alive[idx[bad0]] = False
                    idx = idx[~bad0]
                    k0 = k0[~bad0]
                    if idx.size == 0:
                        break
                    Yi = Y[idx]
            clipped = (t + h - t1) * sign >= 0.0
            h_step = (t1 - t) if clipped else h
            Y5, err, k6 = _dp_step(rhs, t, h_step, Yi, k0)
            np.abs(err, out=err)
            err /= atol + rtol * np.maximum(np.abs(Yi), np.abs(Y5))
            lane_err = err.max(axis=1)

        bad = ~(np.isfinite(lane_err) & np.isfinite(Y5).all(axis=1))
        if bad.any():
            if freeze:
                # a lane that is already far out and now overflows will not
                # come back: freeze it and retry the same step without it
                runaway = bad & (np.hypot(Yi[:, 0], Yi[:, 1]) > 0.01 * escape_radius)
                if runaway.any():
                    Y[idx[runaway]] = np.inf
                    alive[idx[runaway]] = False
                    idx = idx[~runaway]
                    k0 = k0[~runaway]
                    stiff = None
                    continue
            stiff = bad
            h = h_step * 0.2
            continue

        err_max = float(lane_err.max())
        if err_max <= 1.0:
            t = t1 if clipped else t + h_step
            new_norm = np.hypot(Y5[:, 0], Y5[:, 1])
            esc = new_norm > escape_radius
            if esc.any() and not freeze:
                j = int(np.argmax(new_norm))
                raise IntegrationError(
                    f"{label}: solution escaped beyond |q| = {escape_radius:g} "
                    f"near t = {t:.6g} (reached {new_norm[j]:.3g})"
                )
            Y[idx] = Y5
            if esc.any():
                Y[idx[esc]] = np.inf
                alive[idx[esc]] = False
                idx = idx[~esc]
                k6 = k6[~esc]
            k0 = k6
            stiff = None
            grow = 5.0 if err_max == 0.0 else min(5.0, max(0.2, 0.9 * err_max ** -0.2))
            h = h_step * grow
            if abs(h) < 2.0 * tiny:
                # accepts may shrink h (the 0.9 safety factor), but only a
                # rejection -- which records its culprits in ``stiff`` -- is
                # allowed to drive h under the floor
                h = math.copysign(2.0 * tiny, span)
        else:
            stiff = lane_err > 1.0
            h = h_step * max(0.2, 0.9 * err_max ** -0.2)
    return Y


def _field_rhs(field: PlanarField):
    def rhs(t, Y):
        return field.velocity(t, Y[:, :2])

    return rhs


def _variational_rhs(field: PlanarField):
    """State plus the 2x2 variational matrix V, V' = J(t, u) V, V(0) = I."""

    def rhs(t, Y):
        vel, J = field.velocity_and_jacobian(t, Y[:, :2])
        V = Y[:, 2:6].reshape(-1, 2, 2)
        out = np.empty((len(Y), 6))
        out[:, :2] = vel
        out[:, 2:] = (J @ V).reshape(-1, 4)
        return out

    return rhs


def _monodromy_rhs(field: PlanarField):
    """Variational columns plus integrals of the divergence and of the
    square root of the Jacobian discriminant (real and imaginary parts
    separately), from which exp-of-integrated-eigenvalue estimates follow."""

    def rhs(t, Y):
        vel, J = field.velocity_and_jacobian(t, Y[:, :2])
        V = Y[:, 2:6].reshape(-1, 2, 2)
        dV = (J @ V).reshape(-1, 4)
        tr = J[:, 0, 0] + J[:, 1, 1]
        disc = (J[:, 0, 0] - J[:, 1, 1]) ** 2 + 4.0 * J[:, 0, 1] * J[:, 1, 0]
        root_re = np.sqrt(np.maximum(disc, 0.0))
        root_im = np.sqrt(np.maximum(-disc, 0.0))
        return np.column_stack([vel, dV, tr, root_re, root_im])

    return rhs


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def integrate(system: PlanarField, q, t0: float, t1: float, *, atol: float = ATOL,
              rtol: float = RTOL, escape_radius: float = ESCAPE_RADIUS) -> np.ndarray:
    """Solution value u(t1) of u' = X(t, u) with u(t0) = q.

    Runs in reverse time when t1 < t0.  Raises :class:`IntegrationError` on
    step-size underflow or once |u| exceeds ``escape_radius``.
    """
    q = np.asarray(q, dtype=float).reshape(2)
    out = _advance(
        _field_rhs(system), float(t0), float(t1), q[None, :],
        atol=atol, rtol=rtol, escape_radius=escape_radius, freeze=False,
        label=system.name,
    )
    return out[0]


def sample_orbit(system: PlanarField, start, n_samples: int = 256, *, atol: float = ATOL,
                 rtol: float = RTOL) -> tuple[np.ndarray, np.ndarray]:
    """Points u(t_i) along one period from ``start``, t_i = i T / n_samples."""
    times = np.linspace(0.0, system.period, n_samples + 1)
    pts = np.empty((n_samples + 1, 2))
    pts[0] = np.asarray(start, dtype=float).reshape(2)
    for i in range(n_samples):
        pts[i + 1] = integrate(system, pts[i], times[i], times[i + 1], atol=atol, rtol=rtol)
    return times, pts


class TimeTMap(PlanarMap):
    """The return map q -> u(T, q) of a T-periodic field as a planar map.

    Forward evaluation integrates over [0, T]; phase points that leave the
    escape guard come back as infinities (orbit classification reads that as
    escape) instead of aborting whole batches.  The Jacobian integrates the
    2x2 variational system alongside the orbit, and the exact inverse is
    reverse-time integration.
    """

    def __init__(self, system: PlanarField, declared_region: Region | None = None, *,
                 atol: float = MAP_ATOL, rtol: float = MAP_RTOL,
                 escape_radius: float = ESCAPE_RADIUS):
        self.system = system
        self.name = f"{system.name}.time-T"
        self.declared_region = declared_region
        self.atol = float(atol)
        self.rtol = float(rtol)
        self.escape_radius = float(escape_radius)

    def _run(self, Y, t0, t1, rhs) -> np.ndarray:
        return _advance(
            rhs, t0, t1, Y, atol=self.atol, rtol=self.rtol,
            escape_radius=self.escape_radius, freeze=True, label=self.name,
        )

    def apply_batch(self, P):
        P = np.asarray(P, dtype=float).reshape(-1, 2)
        if len(P) == 0:
            return P.copy()
        return self._run(P, 0.0, self.system.period, _field_rhs(self.system))[:, :2]

    def apply_and_jacobian_batch(self, P):
        P = np.asarray(P, dtype=float).reshape(-1, 2)
        Y0 = np.column_stack([P, np.tile([1.0, 0.0, 0.0, 1.0], (len(P), 1))])
        out = self._run(Y0, 0.0, self.system.period, _variational_rhs(self.system))
        return out[:, :2], out[:, 2:6].reshape(-1, 2, 2)

    def jacobian_batch(self, P):
        return self.apply_and_jacobian_batch(P)[1]

    @property
    def has_exact_inverse(self) -> bool:
        return True  # the flow is reversible: integrate backwards in time

    def exact_inverse_batch(self, Q):
        Q = np.asarray(Q, dtype=float).reshape(-1, 2)
        if len(Q) == 0:
            return Q.copy()
        return self._run(Q, self.system.period, 0.0, _field_rhs(self.system))[:, :2]


def time_T_map(system: PlanarField, declared_region: Region | None = None,
               **tolerances) -> TimeTMap:
    """Wrap the period return map of ``system`` in the planar-map protocol."""
    return TimeTMap(system, declared_region, **tolerances)


@dataclass(frozen=True)
class DetCheck:
    """Jacobi-Liouville cross-check: the determinant of the monodromy matrix
    against the exponential of the integrated divergence along the orbit."""

    determinant: float
    divergence_exponential: float
    relative_error: float


@dataclass(frozen=True)
class MonodromyResult:
    """Linearisation of the return map along a periodic orbit.

    ``multipliers`` are the eigenvalues of ``matrix`` sorted by modulus.
    ``eigen_integral_estimate`` exponentiates the integrals of the
    *instantaneous* eigenvalues of the variational matrix along the orbit —
    equal to the true multipliers only when the eigenvectors stay fixed in
    time, and carried purely as a diagnostic comparison column.
    """

    matrix: np.ndarray
    multipliers: tuple[complex, complex]
    det_check: DetCheck
    closure_residual: float
    eigen_integral_estimate: tuple[complex, complex]


def monodromy(system: PlanarField, orbit_start, *, atol: float = ATOL, rtol: float = RTOL,
              closure_tol: float = ORBIT_CLOSURE_TOL) -> MonodromyResult:
    """Monodromy matrix of the periodic orbit through ``orbit_start``.

    Precondition: ``orbit_start`` returns to itself after one period within
    ``closure_tol``; otherwise ValueError.  The determinant of the result
    must be positive and agree with exp(integrated divergence) to relative
    ``JACOBI_LIOUVILLE_TOL`` or a :class:`ConsistencyError` is raised.
    """
    q = np.asarray(orbit_start, dtype=float).reshape(2)
    Y0 = np.array([[q[0], q[1], 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]])
    out = _advance(
        _monodromy_rhs(system), 0.0, system.period, Y0,
        atol=atol, rtol=rtol, escape_radius=ESCAPE_RADIUS, freeze=False,
        label=system.name,
    )[0]
    residual = float(np.linalg.norm(out[:2] - q))
    if residual > closure_tol:
        raise ValueError(
            f"orbit_start {q} is not on a {system.period:g}-periodic orbit: "
            f"|P(q) - q| = {residual:.3e} exceeds {closure_tol:g}"
        )
    V = out[2:6].reshape(2, 2)
    det = float(V[0, 0] * V[1, 1] - V[0, 1] * V[1, 0])
    liouville = math.exp(out[6])
    if det <= 0.0:
        raise ConsistencyError(
            f"monodromy determinant {det:.6g} of {system.name!r} is not positive; "
            "the variational integration is inconsistent"
        )
    rel = abs(det - liouville) / abs(det)
    if rel > JACOBI_LIOUVILLE_TOL:
        raise ConsistencyError(
            f"monodromy determinant {det:.9g} disagrees with exp(integrated "
            f"divergence) {liouville:.9g} by relative {rel:.2e} "
            f"(> {JACOBI_LIOUVILLE_TOL:g})"
        )
    root = complex(out[7], out[8])  # integral of sqrt(discriminant)
    estimate = (
        cmath.exp((out[6] - root) / 2.0),
        cmath.exp((out[6] + root) / 2.0),
    )
    estimate = tuple(sorted(estimate, key=lambda z: (abs(z), z.real, z.imag)))
    return MonodromyResult(
        matrix=V,
        multipliers=eig2(V),
        det_check=DetCheck(det, liouville, rel),
        closure_residual=residual,
        eigen_integral_estimate=estimate,  # type: ignore[arg-type]
    )


# ---------------------------------------------------------------------------
# Lienard assembly and assumption checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AssumptionCheck:
    id: str
    ok: bool
    detail: str
    witness: tuple | None = None


@dataclass(frozen=True)
class AssumptionReport:
    """Sampled verdicts on the standing assumptions of a Lienard build.

    ``growth_fit`` is the fitted pair (offset, slope) in
    |g(x)| <= offset + slope |x|, with offset pinned to |g(0)|.
    """

    checks: tuple[AssumptionCheck, ...]
    sample_radius: float
    growth_fit: tuple[float, float]

    @property
    def all_hold(self) -> bool:
        return all(c.ok for c in self.checks)

    def check(self, cid: str) -> AssumptionCheck:
        for c in self.checks:
            if c.id == cid:
                return c
        raise KeyError(f"no assumption check {cid!r}")


@dataclass(frozen=True)
class LienardSpec:
    """Assembled data of a forced Lienard oscillator.

    ``lower_level`` / ``upper_level`` are the constant comparison levels at
    which the restoring force meets the forcing maximum / minimum; for a
    strictly decreasing restoring force they satisfy lower <= upper and
    bracket the periodic response.  They are nan when the root solve found
    no bracket within the searched range.
    """

    friction: Expression
    restoring: Expression
    forcing: Expression
    period: float
    antiderivative: CachedAntiderivative
    assumptions: AssumptionReport
    lower_level: float
    upper_level: float


def _solve_restoring_level(g: Expression, target: float, start: float) -> float:
    def fn(x: float) -> float:
        with np.errstate(all="ignore"):
            return float(g(np.float64(x), 0.0, 0.0)) - target

    lo, hi = -abs(start), abs(start)
    try:
        flo, fhi = fn(lo), fn(hi)
        for _ in range(60):
            if math.isfinite(flo) and math.isfinite(fhi) and flo * fhi <= 0.0:
                return float(brentq(fn, lo, hi, xtol=1e-12, rtol=8.9e-16))
            lo, hi = 2.0 * lo, 2.0 * hi
            flo, fhi = fn(lo), fn(hi)
    except (ArithmeticError, ValueError):
        return math.nan
    return math.nan


def build_lienard(friction, restoring, forcing, period, *, sample_radius: float = 20.0,
                  name: str = "lienard") -> tuple[LienardSpec, LienardSystem]:
    """Assemble x' = y - F(x), y' = -g(x) + p(t) from the oscillator data.

    The standing assumptions — the forcing repeats after one period, the
    friction is nonnegative (and its sampled sup is reported as the bound),
    the restoring force strictly decreases, and it grows at most linearly —
    are checked on samples and never block the build; callers gate
    certification on ``spec.assumptions``.
    """
    system = LienardSystem(friction, restoring, forcing, period, name=name)
    f, g, p = system.friction, system.restoring, system.forcing
    R = float(sample_radius)
    T = system.period
    checks: list[AssumptionCheck] = []

    ts = np.linspace(0.0, T, 513)
    with np.errstate(all="ignore"):
        p_now = np.asarray(_full_like(p(0.0, 0.0, ts), ts), float)
        p_next = np.asarray(_full_like(p(0.0, 0.0, ts + T), ts), float)
    dev = np.abs(p_next - p_now)
    worst = int(np.argmax(dev))
    detail = f"max |p(t+T) - p(t)| = {float(dev[worst]):.2e} over 513 sample times"
    for div in (2, 3):
        with np.errstate(all="ignore"):
            p_sub = np.asarray(_full_like(p(0.0, 0.0, ts + T / div), ts), float)
        if float(np.max(np.abs(p_sub - p_now))) <= FORCING_PERIOD_TOL:
            detail += f"; note: the forcing also repeats after T/{div} on samples"
    periodic_ok = bool(dev[worst] <= FORCING_PERIOD_TOL)
    checks.append(
        AssumptionCheck(
            "forcing-periodic",
            periodic_ok,
            detail,
            witness=None if periodic_ok else (float(ts[worst]),),
        )
    )

    xs = np.linspace(-R, R, 2001)
    with np.errstate(all="ignore"):
        fv = np.asarray(_full_like(f._fn_value(xs, 0.0, 0.0), xs), float)
    negative = np.flatnonzero(~(fv >= 0.0))
    if negative.size:
        w = negative[int(np.argmin(np.abs(xs[negative])))]
        checks.append(
            AssumptionCheck(
                "friction-nonnegative",
                False,
                f"f({xs[w]:.6g}) = {fv[w]:.6g} < 0",
                witness=(float(xs[w]),),
            )
        )
    else:
        checks.append(
            AssumptionCheck(
                "friction-nonnegative",
                True,
                f"0 <= f <= {float(fv.max()):.6g} on [{-R:g}, {R:g}] (2001 samples)",
            )
        )

    with np.errstate(all="ignore"):
        gv = np.asarray(_full_like(g._fn_value(xs, 0.0, 0.0), xs), float)
    rising = np.flatnonzero(~(np.diff(gv) < 0.0))
    if rising.size:
        mids = 0.5 * (xs[rising] + xs[rising + 1])
        w = rising[int(np.argmin(np.abs(mids)))]
        checks.append(
            AssumptionCheck(
                "restoring-decreasing",
                False,
                f"g({xs[w]:.6g}) = {gv[w]:.6g} <= g({xs[w + 1]:.6g}) = {gv[w + 1]:.6g} "
                "although the arguments increase",
                witness=(float(xs[w]), float(xs[w + 1])),
            )
        )
    else:
        checks.append(
            AssumptionCheck(
                "restoring-decreasing",
                True,
                f"g strictly decreases across 2001 samples on [{-R:g}, {R:g}]",
            )
        )

    offset = abs(float(g(np.float64(0.0), 0.0, 0.0)))
    nz = np.abs(xs) > 1e-12
    slope = float(np.max((np.abs(gv[nz]) - offset) / np.abs(xs[nz])))
    slope = max(0.0, slope)
    checks.append(
        AssumptionCheck(
            "restoring-linear-growth",
            True,
            f"|g(x)| <= {offset:.6g} + {slope:.6g}|x| fitted on the samples",
        )
    )

    p_min, p_max = float(p_now.min()), float(p_now.max())
    lower = _solve_restoring_level(g, p_max, 1.0)
    upper = _solve_restoring_level(g, p_min, 1.0)
    if math.isfinite(lower) and math.isfinite(upper):
        ordered = lower <= upper
        # The constant comparison states only do their job if the restoring
        # force clears the forcing at every sampled instant, not just at the
        # extremes the levels were solved from; re-check both inequalities
        # across the same time grid (guards against a sloppy root solve).
        slack = 1e-9 * (1.0 + max(abs(p_max), abs(p_min)))
        g_low = float(g(np.float64(lower), 0.0, 0.0))
        g_high = float(g(np.float64(upper), 0.0, 0.0))
        holds_below = bool(np.all(p_now <= g_low + slack))
        holds_above = bool(np.all(p_now >= g_high - slack))
        ok = ordered and holds_below and holds_above
        if ok:
            detail = (
                f"g({lower:.9g}) = max p = {p_max:.9g} >= p(t) and "
                f"g({upper:.9g}) = min p = {p_min:.9g} <= p(t) "
                f"at all {len(ts)} sample times"
            )
        elif not ordered:
            detail = (
                f"g({lower:.9g}) = max p = {p_max:.9g}, g({upper:.9g}) = min p = "
                f"{p_min:.9g}; levels are out of order (restoring not decreasing?)"
            )
        else:
            detail = (
                f"levels solved but the inequality g({lower:.9g}) >= p(t) >= "
                f"g({upper:.9g}) fails on the sample grid"
            )
        checks.append(
            AssumptionCheck(
                "comparison-levels",
                bool(ok),
                detail,
                witness=None if ok else (lower, upper),
            )
        )
    else:
        checks.append(
            AssumptionCheck(
                "comparison-levels",
                False,
                "no bracket found where the restoring force meets the forcing extremes",
                witness=(p_min, p_max),
            )
        )

    report = AssumptionReport(
        checks=tuple(checks), sample_radius=R, growth_fit=(offset, slope)
    )
    spec = LienardSpec(
        friction=f,
        restoring=g,
        forcing=p,
        period=T,
        antiderivative=system.antiderivative,
        assumptions=report,
        lower_level=lower,
        upper_level=upper,
    )
    return spec, system


def find_periodic_orbit(system: PlanarField, seed, *, tol: float = 1e-10,
                        max_iter: int = 50, atol: float = MAP_ATOL,
                        rtol: float = MAP_RTOL) -> FixedPointRecord:
    """Locate a periodic orbit as a fixed point of the return map.

    Damped Newton on P - id from ``seed``, with the Jacobian from the
    variational equations; the result is classified like any other fixed
    point (period 1 of the time-T map).  Raises
    :class:`PeriodicOrbitNotFound` when Newton fails within ``max_iter``
    steps (divergence, singular linearisation, or escape).
    """
    pmap = TimeTMap(system, atol=atol, rtol=rtol)

    def fun(P, i):
        return pmap.apply_batch(P) - P

    def fun_jac(P, i):
        F, J = pmap.apply_and_jacobian_batch(P)
        return F - P, J - np.eye(2)[None, :, :]

    seeds = np.asarray(seed, dtype=float).reshape(1, 2)
    out = newton_batch(fun, fun_jac, seeds, tol=tol, max_iter=max_iter)
    if not out.ok[0]:
        raise PeriodicOrbitNotFound(
            f"Newton on the return map of {system.name!r} found no periodic point "
            f"from seed {seeds[0]} within {max_iter} iterations"
        )
    return classify_local(pmap, out.points[0])

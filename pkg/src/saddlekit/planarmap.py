"""Planar maps: evaluation, composition, inversion, and orbit classification.

Maps are exposed through a small protocol (:class:`PlanarMap`) so that
expression-backed maps, squared maps, inverse views and time-T maps of flows
can all be fed to the same censuses, growers and certifiers.  All evaluation
entry points are batched: ``(n, 2)`` in, ``(n, 2)`` out.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .expressions import Dual, Expression, parse
from .newton import newton_batch
from .sampling import region_samples

__all__ = [
    "Region",
    "PlanarMap",
    "MapSpec",
    "SquaredMap",
    "InverseView",
    "TranslatedMap",
    "OrbitVerdict",
    "OrbitClassification",
    "OrbitSettings",
    "OrbitEscaped",
    "MissingInverseError",
    "InversionError",
    "iterate",
    "square",
    "classify_omega",
    "classify_alpha",
    "classify_omega_batch",
    "classify_alpha_batch",
]


@dataclass(frozen=True)
class Region:
    """Axis-aligned rectangle [x0, x1] x [y0, y1]."""

    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError(f"degenerate region {self}")

    @property
    def scale(self) -> float:
        return max(self.x1 - self.x0, self.y1 - self.y0)

    def contains(self, points: np.ndarray, pad: float = 0.0) -> np.ndarray:
        P = np.asarray(points, float).reshape(-1, 2)
        return (
            (P[:, 0] >= self.x0 - pad)
            & (P[:, 0] <= self.x1 + pad)
            & (P[:, 1] >= self.y0 - pad)
            & (P[:, 1] <= self.y1 + pad)
        )

    def grid(self, n: int) -> np.ndarray:
        """(n*n, 2) interior grid seeds (cell midpoint lattice)."""
        gx = self.x0 + (np.arange(n) + 0.5) * (self.x1 - self.x0) / n
        gy = self.y0 + (np.arange(n) + 0.5) * (self.y1 - self.y0) / n
        X, Y = np.meshgrid(gx, gy, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])


class MissingInverseError(RuntimeError):
    pass


class InversionError(RuntimeError):
    pass


class OrbitEscaped(RuntimeError):
    """Raised by iterate() when an image stops being finite."""

    def __init__(self, last_finite: np.ndarray, steps_done: int):
        self.last_finite = np.asarray(last_finite, float)
        self.steps_done = steps_done
        super().__init__(f"orbit left the finite plane after {steps_done} steps")


def _as_points(p) -> np.ndarray:
    return np.asarray(p, dtype=float).reshape(-1, 2)


class PlanarMap:
    """Protocol base.  Subclasses implement the batched forward evaluation and
    Jacobians; the base supplies scalar wrappers and Newton inversion."""

    name: str = "map"
    declared_region: Region | None = None

    # -- forward -----------------------------------------------------------
    def apply_batch(self, P: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def jacobian_batch(self, P: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def apply_and_jacobian_batch(self, P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.apply_batch(P), self.jacobian_batch(P)

    def apply(self, p) -> np.ndarray:
        return self.apply_batch(_as_points(p))[0]

    def jacobian(self, p) -> np.ndarray:
        return self.jacobian_batch(_as_points(p))[0]

    # -- backward ----------------------------------------------------------
    @property
    def has_exact_inverse(self) -> bool:
        return False

    def exact_inverse_batch(self, Q: np.ndarray) -> np.ndarray:
        raise MissingInverseError(f"map {self.name!r} has no exact inverse")

    def apply_inverse_batch(self, Q: np.ndarray, seeds: np.ndarray | None = None) -> np.ndarray:
        """Preimages of ``Q``; rows are nan where inversion failed.

        Falls back to damped Newton on ``f(p) = q`` (seeded at ``q`` itself
        unless ``seeds`` is given) when no exact inverse is available.
        """
        Q = _as_points(Q)
        if self.has_exact_inverse:
            return self.exact_inverse_batch(Q)
        seeds = Q.copy() if seeds is None else _as_points(seeds).copy()
        tol = 1e-10 * (1.0 + np.linalg.norm(Q, axis=1))

        def fun(P, i):
            return self.apply_batch(P) - Q[i]

        def fun_jac(P, i):
            F, J = self.apply_and_jacobian_batch(P)
            return F - Q[i], J

        return newton_batch(fun, fun_jac, seeds, tol=tol, max_iter=50).points

    def apply_inverse(self, q, seed=None) -> np.ndarray:
        seeds = None if seed is None else _as_points(seed)
        out = self.apply_inverse_batch(_as_points(q), seeds)[0]
        if not np.all(np.isfinite(out)):
            raise InversionError(f"could not invert {self.name!r} at {np.asarray(q)}")
        return out


def _broadcast_like(v, X) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != np.shape(X):
        v = np.broadcast_to(v, np.shape(X))
    return v


class MapSpec(PlanarMap):
    """A planar map given by forward (and optionally inverse) formulas."""

    def __init__(
        self,
        name: str,
        fwd_x: str | Expression,
        fwd_y: str | Expression,
        inv_x: str | Expression | None = None,
        inv_y: str | Expression | None = None,
        declared_region: Region | None = None,
    ):
        self.name = name
        self.fwd_x = parse(fwd_x) if isinstance(fwd_x, str) else fwd_x
        self.fwd_y = parse(fwd_y) if isinstance(fwd_y, str) else fwd_y
        for e in (self.fwd_x, self.fwd_y):
            extra = e.free_variables - {"x", "y"}
            if extra:
                raise ValueError(
                    f"map formula {e.source!r} uses non-map variables {sorted(extra)}"
                )
        if (inv_x is None) != (inv_y is None):
            raise ValueError("inverse requires both coordinate formulas")
        self.inv_x = parse(inv_x) if isinstance(inv_x, str) else inv_x
        self.inv_y = parse(inv_y) if isinstance(inv_y, str) else inv_y
        self.declared_region = declared_region or Region(-10.0, 10.0, -10.0, 10.0)
        if self.inv_x is not None:
            self._check_inverse_consistency()

    def _check_inverse_consistency(self, n: int = 100, tol: float = 1e-9):
        Q = region_samples(self.declared_region, n)
        P = self.exact_inverse_batch(Q)
        back = self.apply_batch(P)
        err = np.linalg.norm(back - Q, axis=1)
        worst = float(np.nanmax(err)) if len(err) else 0.0
        if not np.all(np.isfinite(err)) or worst > tol * (1.0 + np.abs(Q).max()):
            raise ValueError(
                f"inverse formulas of {self.name!r} are inconsistent: "
                f"max |f(f^-1(q)) - q| = {worst:.3e} over {n} samples"
            )

    @staticmethod
    def _pair(ex: Expression, ey: Expression, P: np.ndarray) -> np.ndarray:
        X, Y = P[:, 0], P[:, 1]
        with np.errstate(all="ignore"):
            u = ex._fn_value(X, Y, 0.0)
            v = ey._fn_value(X, Y, 0.0)
        return np.column_stack([_broadcast_like(u, X), _broadcast_like(v, X)])

    @staticmethod
    def _pair_jacobian(ex: Expression, ey: Expression, P: np.ndarray) -> np.ndarray:
        X, Y = P[:, 0], P[:, 1]
        dX = Dual(X, 1.0, 0.0)
        dY = Dual(Y, 0.0, 1.0)
        with np.errstate(all="ignore"):
            du = ex._fn_dual(dX, dY, 0.0)
            dv = ey._fn_dual(dX, dY, 0.0)
        J = np.empty((len(P), 2, 2))
        du = du if isinstance(du, Dual) else Dual(du)
        dv = dv if isinstance(dv, Dual) else Dual(dv)
        J[:, 0, 0] = _broadcast_like(du.dx, X)
        J[:, 0, 1] = _broadcast_like(du.dy, X)
        J[:, 1, 0] = _broadcast_like(dv.dx, X)
        J[:, 1, 1] = _broadcast_like(dv.dy, X)
        return J

    def apply_batch(self, P: np.ndarray) -> np.ndarray:
        return self._pair(self.fwd_x, self.fwd_y, _as_points(P))

    def jacobian_batch(self, P: np.ndarray) -> np.ndarray:
        return self._pair_jacobian(self.fwd_x, self.fwd_y, _as_points(P))

    @property
    def has_exact_inverse(self) -> bool:
        return self.inv_x is not None

    def exact_inverse_batch(self, Q: np.ndarray) -> np.ndarray:
        if self.inv_x is None:
            raise MissingInverseError(f"map {self.name!r} has no inverse formulas")
        return self._pair(self.inv_x, self.inv_y, _as_points(Q))

    def __repr__(self):
        return f"MapSpec({self.name!r}: x' = {self.fwd_x.source}, y' = {self.fwd_y.source})"


class SquaredMap(PlanarMap):
    """The second iterate f∘f, built by composing evaluators."""

    def __init__(self, base: PlanarMap):
        self.base = base
        self.name = f"{base.name}.squared"
        self.declared_region = base.declared_region

    def apply_batch(self, P):
        return self.base.apply_batch(self.base.apply_batch(P))

    def jacobian_batch(self, P):
        P = _as_points(P)
        mid, J1 = self.base.apply_and_jacobian_batch(P)
        J2 = self.base.jacobian_batch(mid)
        return J2 @ J1

    def apply_and_jacobian_batch(self, P):
        P = _as_points(P)
        mid, J1 = self.base.apply_and_jacobian_batch(P)
        out, J2 = self.base.apply_and_jacobian_batch(mid)
        return out, J2 @ J1

    @property
    def has_exact_inverse(self) -> bool:
        return self.base.has_exact_inverse

    def exact_inverse_batch(self, Q):
        return self.base.exact_inverse_batch(self.base.exact_inverse_batch(Q))

    def apply_inverse_batch(self, Q, seeds=None):
        if self.has_exact_inverse:
            return self.exact_inverse_batch(_as_points(Q))
        mid = self.base.apply_inverse_batch(Q, seeds)
        return self.base.apply_inverse_batch(mid)


class InverseView(PlanarMap):
    """f⁻¹ as a map in its own right (exact formulas or Newton-backed)."""

    def __init__(self, base: PlanarMap):
        self.base = base
        self.name = f"{base.name}.inverse"
        self.declared_region = base.declared_region

    def apply_batch(self, P):
        return self.base.apply_inverse_batch(P)

    def jacobian_batch(self, P):
        pre = self.base.apply_inverse_batch(P)
        J = self.base.jacobian_batch(pre)
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        inv = np.empty_like(J)
        inv[:, 0, 0] = J[:, 1, 1] / det
        inv[:, 0, 1] = -J[:, 0, 1] / det
        inv[:, 1, 0] = -J[:, 1, 0] / det
        inv[:, 1, 1] = J[:, 0, 0] / det
        return inv

    @property
    def has_exact_inverse(self) -> bool:
        return True  # the inverse of the view is the original forward map

    def exact_inverse_batch(self, Q):
        return self.base.apply_batch(Q)


class TranslatedMap(PlanarMap):
    """Conjugation by a translation: g(p) = f(p + c) − c.

    Moves a fixed point of ``f`` at ``c`` to the origin without touching the
    derivative data.
    """

    def __init__(self, base: PlanarMap, center) -> None:
        self.base = base
        self.center = np.asarray(center, float).reshape(2)
        self.name = f"{base.name}.recentred"
        self.declared_region = base.declared_region

    def apply_batch(self, P):
        return self.base.apply_batch(_as_points(P) + self.center) - self.center

    def jacobian_batch(self, P):
        return self.base.jacobian_batch(_as_points(P) + self.center)

    def apply_and_jacobian_batch(self, P):
        F, J = self.base.apply_and_jacobian_batch(_as_points(P) + self.center)
        return F - self.center, J

    @property
    def has_exact_inverse(self) -> bool:
        return self.base.has_exact_inverse

    def exact_inverse_batch(self, Q):
        return self.base.exact_inverse_batch(_as_points(Q) + self.center) - self.center


def square(m: PlanarMap) -> SquaredMap:
    return SquaredMap(m)


def iterate(m: PlanarMap, p, n: int) -> np.ndarray:
    """n-fold image of ``p`` (n may be negative when an exact inverse exists).

    Raises :class:`OrbitEscaped` with the last finite iterate on overflow and
    :class:`MissingInverseError` for backward iteration without an inverse.
    """
    cur = np.asarray(p, dtype=float).reshape(2)
    if n < 0 and not m.has_exact_inverse:
        raise MissingInverseError(
            f"backward iteration of {m.name!r} needs inverse formulas"
        )
    step = (lambda q: m.apply_batch(q)) if n >= 0 else (lambda q: m.exact_inverse_batch(q))
    for k in range(abs(n)):
        nxt = step(cur.reshape(1, 2))[0]
        if not np.all(np.isfinite(nxt)):
            raise OrbitEscaped(cur, k)
        cur = nxt
    return cur


# ---------------------------------------------------------------------------
# Orbit classification
# ---------------------------------------------------------------------------


class OrbitVerdict(Enum):
    CONVERGES_TO_FIXED = "CONVERGES_TO_FIXED"
    CONVERGES_TO_PERIOD2 = "CONVERGES_TO_PERIOD2"
    ESCAPES = "ESCAPES"
    UNRESOLVED = "UNRESOLVED"


@dataclass(frozen=True)
class OrbitSettings:
    r_escape: float = 1e6
    n_max: int = 10000
    tol_conv: float = 1e-9


@dataclass
class OrbitClassification:
    verdict: OrbitVerdict
    target: np.ndarray | None  # limit point, or (2,2) pair for period 2
    iterations: int
    final_point: np.ndarray


def classify_omega_batch(
    m: PlanarMap,
    points,
    known_fixed=(),
    settings: OrbitSettings | None = None,
) -> list[OrbitClassification]:
    """Forward limit behaviour of each orbit.

    Escape means leaving the ball of radius ``r_escape``; convergence and
    period-2 detection use Cauchy tests on the even/odd subsequences with the
    two sub-limits required to be distinct for a period-2 verdict.
    """
    s = settings or OrbitSettings()
    P0 = _as_points(points)
    n = len(P0)
    K = _as_points(known_fixed) if len(np.atleast_1d(known_fixed)) else np.empty((0, 2))
    out: list[OrbitClassification | None] = [None] * n

    cur = P0.copy()
    prv = np.full_like(cur, np.nan)
    fixed_streak = np.zeros(n, dtype=int)
    p2_streak = np.zeros(n, dtype=int)
    active = np.ones(n, dtype=bool)

    big0 = np.linalg.norm(cur, axis=1) > s.r_escape
    for i in np.flatnonzero(big0):
        out[i] = OrbitClassification(OrbitVerdict.ESCAPES, None, 0, cur[i].copy())
        active[i] = False

    with np.errstate(all="ignore"):
        for step in range(1, s.n_max + 1):
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            nxt = m.apply_batch(cur[idx])
            finite = np.all(np.isfinite(nxt), axis=1)
            norms = np.where(finite, np.linalg.norm(np.nan_to_num(nxt), axis=1), np.inf)
            has_nan = np.any(np.isnan(nxt), axis=1)

            for j in np.flatnonzero(has_nan):
                i = idx[j]
                out[i] = OrbitClassification(OrbitVerdict.UNRESOLVED, None, step, cur[i].copy())
                active[i] = False
            esc = ~has_nan & (norms > s.r_escape)
            for j in np.flatnonzero(esc):
                i = idx[j]
                fin = nxt[j] if np.all(np.isfinite(nxt[j])) else cur[i]
                out[i] = OrbitClassification(OrbitVerdict.ESCAPES, None, step, np.array(fin))
                active[i] = False

            live = ~has_nan & ~esc
            d1 = np.linalg.norm(nxt - cur[idx], axis=1)
            d2 = np.linalg.norm(nxt - prv[idx], axis=1)

            fix_hit = live & (d1 <= s.tol_conv)
            fixed_streak[idx] = np.where(fix_hit, fixed_streak[idx] + 1, 0)
            p2_hit = live & (d2 <= s.tol_conv) & (d1 > 10.0 * s.tol_conv)
            p2_streak[idx] = np.where(p2_hit, p2_streak[idx] + 1, 0)

            for j in np.flatnonzero(fix_hit & (fixed_streak[idx] >= 2)):
                i = idx[j]
                target = nxt[j].copy()
                if len(K):
                    dk = np.linalg.norm(K - target, axis=1)
                    kbest = int(np.argmin(dk))
                    if dk[kbest] <= s.tol_conv:
                        target = K[kbest].copy()
                out[i] = OrbitClassification(
                    OrbitVerdict.CONVERGES_TO_FIXED, target, step, nxt[j].copy()
                )
                active[i] = False
            for j in np.flatnonzero(p2_hit & (p2_streak[idx] >= 3)):
                i = idx[j]
                if not active[i]:
                    continue
                pair = np.array(sorted([tuple(cur[i]), tuple(nxt[j])]))
                out[i] = OrbitClassification(
                    OrbitVerdict.CONVERGES_TO_PERIOD2, pair, step, nxt[j].copy()
                )
                active[i] = False

            prv[idx] = cur[idx]
            cur[idx] = np.where(np.isfinite(nxt), nxt, cur[idx])

    for i in np.flatnonzero(active):
        out[i] = OrbitClassification(OrbitVerdict.UNRESOLVED, None, s.n_max, cur[i].copy())
    return out  # type: ignore[return-value]


def classify_omega(m, p, known_fixed=(), settings=None) -> OrbitClassification:
    return classify_omega_batch(m, [p], known_fixed, settings)[0]


def classify_alpha_batch(m, points, known_fixed=(), settings=None) -> list[OrbitClassification]:
    """Backward limit behaviour; uses exact inverse formulas when present and
    Newton inversion seeded at the current point otherwise (a failed inversion
    leaves the orbit UNRESOLVED)."""
    return classify_omega_batch(InverseView(m), points, known_fixed, settings)


def classify_alpha(m, p, known_fixed=(), settings=None) -> OrbitClassification:
    return classify_alpha_batch(m, [p], known_fixed, settings)[0]

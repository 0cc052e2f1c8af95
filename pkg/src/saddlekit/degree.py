"""Fixed-point index as the Brouwer degree of p ↦ p − f(p) along a Jordan curve.

The degree is the total turning of the displacement vector while the curve is
traversed counterclockwise, computed with adaptive bisection so that no step
turns by π/2 or more — which pins the winding sum down unambiguously.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .planarmap import PlanarMap

__all__ = [
    "Circle",
    "Polygon",
    "IndexResult",
    "FixedPointOnCurveError",
    "WindingBudgetError",
    "fixed_point_index",
    "index_at_point",
    "hyperbolic_index",
]

DISPLACEMENT_FLOOR = 1e-8
DEFAULT_BUDGET = 2**20


class FixedPointOnCurveError(RuntimeError):
    def __init__(self, min_displacement: float):
        self.min_displacement = min_displacement
        super().__init__(
            f"curve passes through (or numerically through) a fixed point: "
            f"min |p - f(p)| = {min_displacement:.3e} < {DISPLACEMENT_FLOOR:.0e}"
        )


class WindingBudgetError(RuntimeError):
    pass


@dataclass(eq=False)
class Circle:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        self.center = np.asarray(self.center, float).reshape(2)
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    def points(self, ts: np.ndarray) -> np.ndarray:
        ang = 2.0 * np.pi * np.asarray(ts, float)
        return self.center + self.radius * np.column_stack([np.cos(ang), np.sin(ang)])


def _segments_cross(a, b, c, d) -> bool:
    """Do closed segments [a,b] and [c,d] share any point?"""

    def orient(p, q, r):
        v = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
        return 0 if v == 0 else (1 if v > 0 else -1)

    def on_seg(p, q, r):  # r collinear with pq — is it between them?
        return min(p[0], q[0]) <= r[0] <= max(p[0], q[0]) and min(p[1], q[1]) <= r[1] <= max(
            p[1], q[1]
        )

    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and on_seg(a, b, c):
        return True
    if o2 == 0 and on_seg(a, b, d):
        return True
    if o3 == 0 and on_seg(c, d, a):
        return True
    if o4 == 0 and on_seg(c, d, b):
        return True
    return False


@dataclass(eq=False)
class Polygon:
    vertices: np.ndarray  # (k, 2), counterclockwise, simple

    def __post_init__(self):
        V = np.asarray(self.vertices, float).reshape(-1, 2)
        if len(V) < 3:
            raise ValueError("a polygon needs at least three vertices")
        self.vertices = V
        k = len(V)
        area2 = float(np.sum(V[:, 0] * np.roll(V[:, 1], -1) - np.roll(V[:, 0], -1) * V[:, 1]))
        if area2 <= 0:
            raise ValueError("polygon must be counterclockwise and non-degenerate")
        for i in range(k):
            for j in range(i + 1, k):
                if j == i + 1 or (i == 0 and j == k - 1):
                    continue  # adjacent edges share a vertex by construction
                if _segments_cross(V[i], V[(i + 1) % k], V[j], V[(j + 1) % k]):
                    raise ValueError(f"polygon is not simple: edges {i} and {j} intersect")
        seg = np.roll(V, -1, axis=0) - V
        self._cum = np.concatenate([[0.0], np.cumsum(np.hypot(seg[:, 0], seg[:, 1]))])

    def points(self, ts: np.ndarray) -> np.ndarray:
        V = self.vertices
        k = len(V)
        s = (np.asarray(ts, float) % 1.0) * self._cum[-1]
        i = np.clip(np.searchsorted(self._cum, s, side="right") - 1, 0, k - 1)
        seglen = self._cum[i + 1] - self._cum[i]
        local = (s - self._cum[i]) / np.where(seglen > 0, seglen, 1.0)
        return V[i] + local[:, None] * (V[(i + 1) % k] - V[i])


JordanCurve = Circle | Polygon


@dataclass
class IndexResult:
    degree: int
    min_displacement: float
    samples_used: int


def _angles_and_norms(m: PlanarMap, curve: JordanCurve, ts: np.ndarray):
    P = curve.points(ts)
    D = P - m.apply_batch(P)
    norms = np.hypot(D[:, 0], D[:, 1])
    worst = float(norms.min())
    if not worst > DISPLACEMENT_FLOOR or not np.all(np.isfinite(norms)):
        raise FixedPointOnCurveError(worst)
    return np.arctan2(D[:, 1], D[:, 0]), worst


def _wrapped_steps(ang: np.ndarray) -> np.ndarray:
    d = np.diff(np.append(ang, ang[0]))
    return (d + np.pi) % (2.0 * np.pi) - np.pi


def fixed_point_index(
    m: PlanarMap,
    curve: JordanCurve,
    initial_samples: int = 256,
    budget: int = DEFAULT_BUDGET,
) -> IndexResult:
    """Winding of p − f(p) along ``curve``, refined until every angular step
    is below π/2 (or the sample budget runs out)."""
    ts = np.linspace(0.0, 1.0, initial_samples, endpoint=False)
    ang, worst = _angles_and_norms(m, curve, ts)

    while True:
        steps = _wrapped_steps(ang)
        coarse = np.abs(steps) >= np.pi / 2.0
        if not coarse.any():
            break
        if len(ts) + int(coarse.sum()) > budget:
            raise WindingBudgetError(
                f"winding refinement would exceed {budget} samples "
                f"({len(ts)} used, {int(coarse.sum())} splits pending)"
            )
        idx = np.flatnonzero(coarse)
        t_next = np.append(ts[1:], ts[0] + 1.0)
        mids = (ts[idx] + t_next[idx]) / 2.0
        mid_ang, w = _angles_and_norms(m, curve, mids % 1.0)
        worst = min(worst, w)
        pos = idx + 1 + np.arange(len(idx))  # keep parameters sorted as we insert
        ts = np.insert(ts, idx + 1, mids)
        ang2 = np.empty(len(ts))
        keep = np.ones(len(ts), bool)
        keep[pos] = False
        ang2[keep] = ang
        ang2[pos] = mid_ang
        ang = ang2

    total = float(steps.sum())
    degree = int(round(total / (2.0 * np.pi)))
    if abs(total / (2.0 * np.pi) - degree) > 0.1:
        raise RuntimeError(
            f"winding sum {total:.6f} is not close to a multiple of 2π; "
            "displacement field is numerically unreliable on this curve"
        )
    return IndexResult(degree=degree, min_displacement=worst, samples_used=len(ts))


def index_at_point(m: PlanarMap, fp, budget: int = DEFAULT_BUDGET) -> int:
    """Index of an isolated fixed point: winding along a small probe circle.

    Accepts a FixedPointRecord or a bare point.  The probe shrinks (at most
    three times) if it happens to graze another fixed point.
    """
    p = np.asarray(getattr(fp, "location", fp), float).reshape(2)
    radius = 1e-3 * (1.0 + float(np.hypot(*p)))
    last: FixedPointOnCurveError | None = None
    for _ in range(4):
        try:
            return fixed_point_index(m, Circle(p, radius), budget=budget).degree
        except FixedPointOnCurveError as err:
            last = err
            radius /= 10.0
    raise last  # type: ignore[misc]


def hyperbolic_index(record) -> int:
    """For a hyperbolic fixed point the index is the sign of det(I − Df)."""
    J = np.asarray(record.jacobian, float)
    d = float(np.linalg.det(np.eye(2) - J))
    if d == 0.0:
        raise ValueError("det(I - Df) vanishes; the fixed point is not hyperbolic")
    return 1 if d > 0 else -1

"""Fixed-point censuses, local saddle classification, and sampled spectral checks.

The census is grid-seeded damped Newton on ``f^period − id`` over a region,
with deterministic duplicate merging.  Classification works from the 2x2
Jacobian's closed-form eigenvalues; a *direct* saddle has two positive real
multipliers straddling 1, a *twisted* saddle has real multipliers straddling
1 in modulus with at least one negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .newton import newton_batch
from .planarmap import PlanarMap, Region, square
from .sampling import region_samples

__all__ = [
    "SaddleKind",
    "FixedPointRecord",
    "FixedPointCensus",
    "SpectrumGapReport",
    "OrientationKind",
    "OrientationReport",
    "ConsistencyError",
    "find_fixed_points",
    "classify_local",
    "spectrum_gap",
    "orientation",
    "assert_unique_under_gap",
    "eig2",
]

MERGE_RADIUS = 1e-7
RESIDUAL_BOUND = 1e-10
HYPERBOLICITY_MARGIN = 1e-6  # |multiplier| must clear 1 by this much


class SaddleKind(Enum):
    DIRECT_SADDLE = "DIRECT_SADDLE"
    TWISTED_SADDLE = "TWISTED_SADDLE"
    NOT_SADDLE = "NOT_SADDLE"


class ConsistencyError(RuntimeError):
    """Numerically established facts contradict each other (e.g. a spectral
    gap that forces uniqueness next to a census with several fixed points)."""


@dataclass
class FixedPointRecord:
    location: np.ndarray
    period: int  # 1 or 2 — residual and jacobian refer to f^period
    jacobian: np.ndarray
    eigenvalues: tuple[complex, complex]  # sorted by modulus
    saddle_kind: SaddleKind
    residual: float
    note: str = ""


def eig2(J) -> tuple[complex, complex]:
    """Closed-form eigenvalues of a real 2x2 matrix, sorted by modulus."""
    a, b, c, d = float(J[0][0]), float(J[0][1]), float(J[1][0]), float(J[1][1])
    tr = a + d
    det = a * d - b * c
    disc = tr * tr / 4.0 - det
    if disc >= 0.0:
        r = math.sqrt(disc)
        pair = (complex(tr / 2.0 - r), complex(tr / 2.0 + r))
    else:
        r = math.sqrt(-disc)
        pair = (complex(tr / 2.0, -r), complex(tr / 2.0, r))
    return tuple(sorted(pair, key=lambda z: (abs(z), z.real, z.imag)))  # type: ignore


def _classify_pair(eigs: tuple[complex, complex]) -> tuple[SaddleKind, str]:
    lam, mu = eigs
    if lam.imag != 0.0 or mu.imag != 0.0:
        return SaddleKind.NOT_SADDLE, "complex multipliers"
    lo, hi = lam.real, mu.real
    if abs(abs(lo) - 1.0) <= HYPERBOLICITY_MARGIN or abs(abs(hi) - 1.0) <= HYPERBOLICITY_MARGIN:
        return SaddleKind.NOT_SADDLE, "near-nonhyperbolic"
    if abs(lo) < 1e-12:
        return SaddleKind.NOT_SADDLE, "singular linearisation"
    if abs(lo) < 1.0 < abs(hi):
        if lo > 0.0 and hi > 0.0:
            return SaddleKind.DIRECT_SADDLE, ""
        return SaddleKind.TWISTED_SADDLE, ""
    return SaddleKind.NOT_SADDLE, ""


def _make_record(eff: PlanarMap, loc: np.ndarray, period: int, residual: float) -> FixedPointRecord:
    J = eff.jacobian(loc)
    eigs = eig2(J)
    kind, note = _classify_pair(eigs)
    return FixedPointRecord(
        location=np.asarray(loc, float).copy(),
        period=period,
        jacobian=J,
        eigenvalues=eigs,
        saddle_kind=kind,
        residual=float(residual),
        note=note,
    )


@dataclass
class FixedPointCensus:
    """All fixed points of f^period found in the region (sequence-like).

    For a period-2 census, ``genuine_period2`` excludes members that sit
    within the merge radius of a fixed point of f itself.
    """

    records: list[FixedPointRecord]
    genuine_period2: list[FixedPointRecord]
    period: int
    region: Region
    singular_skips: int
    imprecise_drops: int = 0

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def locations(self) -> np.ndarray:
        if not self.records:
            return np.empty((0, 2))
        return np.array([r.location for r in self.records])


def _census_roots(eff: PlanarMap, region: Region, grid_n: int):
    seeds = region.grid(grid_n)
    corner = max(abs(region.x0), abs(region.x1), abs(region.y0), abs(region.y1))

    def fun(P, i):
        return eff.apply_batch(P) - P

    def fun_jac(P, i):
        F, J = eff.apply_and_jacobian_batch(P)
        R = J.copy()
        R[:, 0, 0] -= 1.0
        R[:, 1, 1] -= 1.0
        return F - P, R

    out = newton_batch(
        fun, fun_jac, seeds,
        tol=1e-11, max_iter=50, abandon_radius=100.0 * (1.0 + corner),
    )
    keep = out.ok.copy()
    keep[out.ok] &= region.contains(out.points[out.ok])
    return out.points[keep], out.residual[keep], out.singular_skips


def _merge(points: np.ndarray, residuals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic duplicate merge: lexicographic sweep, min-residual wins."""
    if len(points) == 0:
        return np.empty((0, 2)), np.empty(0)
    order = np.lexsort((points[:, 1], points[:, 0]))
    rep_pts: list[np.ndarray] = []
    rep_res: list[float] = []
    for i in order:
        p, r = points[i], residuals[i]
        hit = -1
        for j, q in enumerate(rep_pts):
            if np.hypot(*(p - q)) <= MERGE_RADIUS:
                hit = j
                break
        if hit < 0:
            rep_pts.append(p)
            rep_res.append(r)
        elif r < rep_res[hit]:
            rep_pts[hit] = p
            rep_res[hit] = r
    P = np.array(rep_pts)
    R = np.array(rep_res)
    order = np.lexsort((P[:, 1], P[:, 0]))
    return P[order], R[order]


def find_fixed_points(
    m: PlanarMap, region: Region, period: int = 1, grid_n: int = 64
) -> FixedPointCensus:
    """Census of Fix(f) or Fix(f²) inside ``region``.

    Newton lanes whose Jacobian turns singular are skipped and counted in
    ``singular_skips``; converged roots with residual above the 1e-10 record
    bound are dropped and counted in ``imprecise_drops``.
    """
    if period not in (1, 2):
        raise ValueError(f"period must be 1 or 2, got {period}")
    eff = m if period == 1 else square(m)
    pts, res, skips = _census_roots(eff, region, grid_n)
    pts, res = _merge(pts, res)
    precise = res <= RESIDUAL_BOUND
    dropped = int((~precise).sum())
    records = [_make_record(eff, p, period, r) for p, r in zip(pts[precise], res[precise])]

    genuine: list[FixedPointRecord] = []
    if period == 2 and records:
        fix1 = find_fixed_points(m, region, period=1, grid_n=grid_n).locations()
        for rec in records:
            if len(fix1) == 0 or np.linalg.norm(fix1 - rec.location, axis=1).min() > MERGE_RADIUS:
                genuine.append(rec)
    return FixedPointCensus(
        records=records,
        genuine_period2=genuine,
        period=period,
        region=region,
        singular_skips=skips,
        imprecise_drops=dropped,
    )


def classify_local(m: PlanarMap, p) -> FixedPointRecord:
    """Saddle classification of a fixed point of f from its Jacobian.

    Rejects points that are not fixed to within 1e-8; the stored residual is
    whatever the point actually achieves.
    """
    loc = np.asarray(p, float).reshape(2)
    residual = float(np.linalg.norm(m.apply(loc) - loc))
    if not residual <= 1e-8:
        raise ValueError(
            f"{loc} is not a fixed point of {m.name!r} (residual {residual:.3e} > 1e-08)"
        )
    return _make_record(m, loc, 1, residual)


@dataclass
class SpectrumGapReport:
    epsilon: float
    violation_points: list[tuple[np.ndarray, float]]
    sample_count: int
    holds_on_samples: bool


def spectrum_gap(
    m: PlanarMap, region: Region, epsilon: float, samples: int = 400
) -> SpectrumGapReport:
    """Look for real Jacobian eigenvalues in [1, 1+ε) on a low-discrepancy sample.

    A clean report supports at-most-one-fixed-point reasoning; it is a sampled
    statement, never a global spectral certificate.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    P = region_samples(region, samples)
    J = m.jacobian_batch(P)
    tr = J[:, 0, 0] + J[:, 1, 1]
    det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    disc = tr * tr / 4.0 - det
    real = disc >= 0.0
    root = np.sqrt(np.where(real, disc, 0.0))
    violations: list[tuple[np.ndarray, float]] = []
    for eig in (tr / 2.0 - root, tr / 2.0 + root):
        bad = real & (eig >= 1.0) & (eig < 1.0 + epsilon)
        for i in np.flatnonzero(bad):
            violations.append((P[i].copy(), float(eig[i])))
    return SpectrumGapReport(
        epsilon=float(epsilon),
        violation_points=violations,
        sample_count=len(P),
        holds_on_samples=not violations,
    )


class OrientationKind(Enum):
    PRESERVING = "PRESERVING"
    REVERSING = "REVERSING"
    MIXED = "MIXED"


@dataclass
class OrientationReport:
    kind: OrientationKind
    witnesses: tuple[tuple[np.ndarray, float], ...]  # (point, det Df) pairs
    sample_count: int


def orientation(m: PlanarMap, region: Region, samples: int = 400) -> OrientationReport:
    """Sign of det Df over a low-discrepancy sample of the region.

    A sign change (or an exactly singular sample) yields MIXED with witness
    points, which rules the map out as a diffeomorphism of the region.
    """
    P = region_samples(region, samples)
    J = m.jacobian_batch(P)
    det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    if np.all(det > 0.0):
        return OrientationReport(OrientationKind.PRESERVING, (), len(P))
    if np.all(det < 0.0):
        return OrientationReport(OrientationKind.REVERSING, (), len(P))
    hi = int(np.argmax(det))
    lo = int(np.argmin(det))
    witnesses = ((P[hi].copy(), float(det[hi])), (P[lo].copy(), float(det[lo])))
    return OrientationReport(OrientationKind.MIXED, witnesses, len(P))


def assert_unique_under_gap(census: FixedPointCensus, gap: SpectrumGapReport) -> None:
    """A sampled spectral gap forces at most one fixed point; seeing several
    means one of the two computations is numerically wrong."""
    if census.period != 1:
        raise ValueError("uniqueness cross-check applies to a period-1 census")
    if gap.holds_on_samples and len(census) > 1:
        pts = ", ".join(np.array2string(r.location, precision=6) for r in census)
        raise ConsistencyError(
            f"spectral gap [1, {1 + gap.epsilon:g}) holds on {gap.sample_count} samples "
            f"yet the census found {len(census)} fixed points: {pts}"
        )

"""Growing invariant curves of planar saddles and searching them for contacts.

Each branch is the forward orbit of a fundamental segment seeded on an
eigendirection.  Points are always exact k-fold images of the seed chord —
refinement inserts parameter midpoints on the seed and re-maps them — so the
polyline never drifts away from the true invariant curve by interpolation.
Twisted saddles (a negative multiplier) are grown with the second iterate,
which is a direct saddle again; the branch swap under the original map is
recorded on the result.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .fixedpoints import FixedPointRecord, SaddleKind
from .planarmap import InverseView, PlanarMap, square

__all__ = [
    "BranchLabel",
    "ManifoldVerdict",
    "ManifoldPolyline",
    "ContactKind",
    "Contact",
    "ContactReport",
    "grow_unstable",
    "grow_stable",
    "find_contacts",
    "polyline_distance",
    "seed_offset",
    "R_ESCAPE",
    "H_BASE",
    "H_MIN",
    "REL_CAP",
]

R_ESCAPE = 1e6
H_BASE = 1e-2  # global spacing cap near the fixed point
REL_CAP = 0.05  # far out, spacing may grow to 5% of the distance from the saddle
H_MIN = 1e-9
CONTACT_TOL = 1e-4
CLUSTER_RADIUS = 1e-3
STALL_WINDOWS = 3
MAX_WINDOW_POINTS = 20000


class BranchLabel(Enum):
    STABLE_PLUS = "STABLE_PLUS"
    STABLE_MINUS = "STABLE_MINUS"
    UNSTABLE_PLUS = "UNSTABLE_PLUS"
    UNSTABLE_MINUS = "UNSTABLE_MINUS"


class ManifoldVerdict(Enum):
    UNBOUNDED = "UNBOUNDED"
    BOUNDED = "BOUNDED"
    BUDGET_EXHAUSTED = "BUDGET_EXHAUSTED"


@dataclass
class ManifoldPolyline:
    branch: BranchLabel
    points: np.ndarray  # ordered from the seed (near the saddle) outward
    verdict: ManifoldVerdict
    limit_set_estimate: np.ndarray | None  # only for BOUNDED
    arclength: float
    grown_with_square: bool = False
    branch_swap_under_f: bool = False  # f sends this branch onto its partner
    note: str = ""


def seed_offset(center) -> float:
    return 1e-6 * (1.0 + float(np.hypot(*np.asarray(center, float).reshape(2))))


def _spacing_caps(segment_radii: np.ndarray) -> np.ndarray:
    return np.maximum(H_BASE, REL_CAP * segment_radii)


def _arc(points: np.ndarray) -> float:
    if len(points) < 2:
        return 0.0
    d = np.diff(points, axis=0)
    return float(np.hypot(d[:, 0], d[:, 1]).sum())


def _cluster(points: np.ndarray, radius: float = CLUSTER_RADIUS) -> np.ndarray:
    """Greedy radius clustering; returns cluster means sorted lexicographically."""
    reps: list[list[np.ndarray]] = []
    for p in points:
        for group in reps:
            if np.hypot(*(p - group[0])) <= radius:
                group.append(p)
                break
        else:
            reps.append([p])
    means = np.array([np.mean(g, axis=0) for g in reps])
    return means[np.lexsort((means[:, 1], means[:, 0]))]


def _eigenvector(J: np.ndarray, lam: float) -> np.ndarray:
    """Unit eigenvector of a real 2x2 matrix with deterministic sign."""
    a, b = float(J[0, 0]), float(J[0, 1])
    c, d = float(J[1, 0]), float(J[1, 1])
    cand1 = np.array([-b, a - lam])
    cand2 = np.array([d - lam, -c])
    v = cand1 if np.hypot(*cand1) >= np.hypot(*cand2) else cand2
    n = np.hypot(*v)
    if n == 0.0:
        raise ValueError(f"no eigendirection for multiplier {lam}")
    v = v / n
    if v[0] < 0.0 or (v[0] == 0.0 and v[1] < 0.0):
        v = -v
    return v


def _grow_branch(
    g: PlanarMap,
    center: np.ndarray,
    direction: np.ndarray,
    label: BranchLabel,
    budget: float,
    max_windows: int,
) -> tuple[np.ndarray, ManifoldVerdict, np.ndarray | None, str]:
    delta = seed_offset(center)
    a = center + delta * direction
    b = g.apply_batch(a.reshape(1, 2))[0]
    if not np.all(np.isfinite(b)):
        return a.reshape(1, 2), ManifoldVerdict.BUDGET_EXHAUSTED, None, "seed image not finite"
    if np.hypot(*(b - center)) <= np.hypot(*(a - center)) * (1.0 + 1e-9):
        raise ValueError(
            f"direction {direction} is not expanding under {g.name!r}: "
            "the saddle data and the map disagree"
        )

    taus = np.linspace(0.0, 1.0, 9)
    chord = b - a
    window = a + taus[:, None] * chord  # window 0: the seed chord itself
    chunks = [window.copy()]
    arclen = _arc(window)
    stall_tol = 1e-7 * (1.0 + np.hypot(*center))
    stall_streak = 0
    verdict: ManifoldVerdict | None = None
    limit: np.ndarray | None = None
    note = ""

    for k in range(1, max_windows + 1):
        nxt = g.apply_batch(window)
        finite = np.all(np.isfinite(nxt), axis=1)
        if not finite.all():
            cut = int(np.argmin(finite))  # first non-finite image
            chunks.append(nxt[:cut])
            verdict = ManifoldVerdict.BUDGET_EXHAUSTED
            note = f"backward/forward image not computable after window {k}"
            break

        # refine by inserting seed-parameter midpoints until spacing fits
        while True:
            gaps = np.hypot(*(np.diff(nxt, axis=0).T))
            radii = np.hypot(*(nxt - center).T)
            caps = _spacing_caps(np.maximum(radii[:-1], radii[1:]))
            need = (gaps > caps) & (np.diff(taus) > 1e-13) & (gaps > 2.0 * H_MIN)
            if not need.any():
                break
            if len(taus) + int(need.sum()) > MAX_WINDOW_POINTS:
                note = "refinement cap reached; spacing is coarse on this window"
                break
            idx = np.flatnonzero(need)
            mids = (taus[idx] + taus[idx + 1]) / 2.0
            pts = a + mids[:, None] * chord
            for _ in range(k):
                pts = g.apply_batch(pts)
            good = np.all(np.isfinite(pts), axis=1)
            partial = not good.all()
            if partial:
                note = "some refinement points were not computable; spacing is coarse"
                idx, mids, pts = idx[good], mids[good], pts[good]
                if len(idx) == 0:
                    break
            pos = idx + 1 + np.arange(len(idx))
            taus = np.insert(taus, idx + 1, mids)
            merged = np.empty((len(taus), 2))
            keep = np.ones(len(taus), bool)
            keep[pos] = False
            merged[keep] = nxt
            merged[pos] = pts
            nxt = merged
            if partial:
                break

        start = 1 if np.hypot(*(nxt[0] - chunks[-1][-1])) <= H_MIN else 0
        chunk = nxt[start:]
        norms = np.hypot(*chunk.T)
        if (norms > R_ESCAPE).any():
            cut = int(np.argmax(norms > R_ESCAPE))
            chunks.append(chunk[: cut + 1])
            verdict = ManifoldVerdict.UNBOUNDED
            break
        chunks.append(chunk)
        arclen += _arc(np.vstack([chunks[-2][-1:], chunk]))
        if arclen > budget:
            verdict = ManifoldVerdict.BUDGET_EXHAUSTED
            note = note or f"arclength budget {budget:g} exhausted"
            break

        move = np.hypot(*(nxt[-1] - window[-1]))
        diam = float(np.hypot(*np.ptp(nxt, axis=0)))
        stall_streak = stall_streak + 1 if max(move, diam) <= stall_tol else 0
        if stall_streak >= STALL_WINDOWS:
            verdict = ManifoldVerdict.BOUNDED
            break
        window = nxt

    points = np.vstack(chunks)
    if verdict is None:
        verdict = ManifoldVerdict.BUDGET_EXHAUSTED
        note = note or f"window budget {max_windows} exhausted"
    if verdict is ManifoldVerdict.BOUNDED:
        tail = points[-max(3, len(points) // 20):]
        limit = _cluster(tail)
    return points, verdict, limit, note


def _grow_pair(
    m: PlanarMap,
    p: FixedPointRecord,
    stable: bool,
    budget: float,
    max_windows: int,
) -> tuple[ManifoldPolyline, ManifoldPolyline]:
    if p.saddle_kind is SaddleKind.NOT_SADDLE:
        raise ValueError(f"{np.asarray(p.location)} is not a saddle ({p.note or 'see record'})")
    lam, mu = p.eigenvalues
    target = (lam if stable else mu).real
    twisted = p.saddle_kind is SaddleKind.TWISTED_SADDLE
    eff = square(m) if twisted else m
    g: PlanarMap = InverseView(eff) if stable else eff
    direction = _eigenvector(np.asarray(p.jacobian, float), target)
    center = np.asarray(p.location, float)

    labels = (
        (BranchLabel.STABLE_PLUS, BranchLabel.STABLE_MINUS)
        if stable
        else (BranchLabel.UNSTABLE_PLUS, BranchLabel.UNSTABLE_MINUS)
    )
    out = []
    for label, sign in zip(labels, (1.0, -1.0)):
        pts, verdict, limit, note = _grow_branch(
            g, center, sign * direction, label, budget, max_windows
        )
        out.append(
            ManifoldPolyline(
                branch=label,
                points=pts,
                verdict=verdict,
                limit_set_estimate=limit,
                arclength=_arc(pts),
                grown_with_square=twisted,
                branch_swap_under_f=twisted and target < 0.0,
                note=note,
            )
        )
    return out[0], out[1]


def grow_unstable(
    m: PlanarMap, p: FixedPointRecord, budget: float = 1e7, max_windows: int = 200
) -> tuple[ManifoldPolyline, ManifoldPolyline]:
    """Both branches of the unstable curve of a saddle fixed point.

    Grows until the curve leaves the ball of radius R_ESCAPE (UNBOUNDED),
    its advancing front collapses onto a limit estimate (BOUNDED), or a
    budget runs out.
    """
    return _grow_pair(m, p, stable=False, budget=budget, max_windows=max_windows)


def grow_stable(
    m: PlanarMap, p: FixedPointRecord, budget: float = 1e7, max_windows: int = 200
) -> tuple[ManifoldPolyline, ManifoldPolyline]:
    """Both branches of the stable curve: the unstable curve of the backward
    map, using exact inverse formulas when available and damped Newton
    inversion otherwise.  Inversion failure ends the branch with
    BUDGET_EXHAUSTED and an explanatory note."""
    return _grow_pair(m, p, stable=True, budget=budget, max_windows=max_windows)


# ---------------------------------------------------------------------------
# Contacts
# ---------------------------------------------------------------------------


class ContactKind(Enum):
    WS_CAP_WU = "WS_CAP_WU"
    LIMIT_CONTACT = "LIMIT_CONTACT"


@dataclass
class Contact:
    point: np.ndarray
    kind: ContactKind
    distance: float


@dataclass
class ContactReport:
    contacts: list[Contact]
    tolerance: float
    exclusion_radius: float

    def __bool__(self):
        return bool(self.contacts)


def polyline_distance(points, poly: np.ndarray) -> np.ndarray:
    """Distance from each query point to a polyline (min over its segments)."""
    P = np.asarray(points, float).reshape(-1, 2)
    if len(poly) == 1:
        return np.hypot(*(P - poly[0]).T)
    A, B = poly[:-1], poly[1:]
    AB = B - A
    den = np.einsum("ij,ij->i", AB, AB)
    den = np.where(den > 0, den, 1.0)
    out = np.empty(len(P))
    for i, q in enumerate(P):
        t = np.clip(np.einsum("ij,ij->i", q - A, AB) / den, 0.0, 1.0)
        D = q - (A + t[:, None] * AB)
        out[i] = np.sqrt(np.min(np.einsum("ij,ij->i", D, D)))
    return out


def _cross2(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _segment_crossings(pa: np.ndarray, pb: np.ndarray) -> np.ndarray:
    """Intersection points between segments of polylines pa and pb."""
    if len(pa) < 2 or len(pb) < 2:
        return np.empty((0, 2))
    A1, A2 = pa[:-1], pa[1:]
    B1, B2 = pb[:-1], pb[1:]
    r = A2 - A1
    hits = []
    block = 512
    with np.errstate(all="ignore"):
        for lo in range(0, len(B1), block):
            b1 = B1[lo : lo + block]
            s = (B2 - B1)[lo : lo + block]
            qp = b1[None, :, :] - A1[:, None, :]
            den = _cross2(r[:, None, :], s[None, :, :])
            t = _cross2(qp, s[None, :, :]) / den
            u = _cross2(qp, r[:, None, :]) / den
            ok = np.isfinite(t) & np.isfinite(u) & (t >= 0) & (t <= 1) & (u >= 0) & (u <= 1)
            ii, jj = np.nonzero(ok)
            if len(ii):
                hits.append(A1[ii] + t[ii, jj, None] * r[ii])
    return np.vstack(hits) if hits else np.empty((0, 2))


def find_contacts(
    ws,
    wu,
    fixed,
    tol: float = CONTACT_TOL,
) -> ContactReport:
    """Candidate homoclinic contacts between the stable and unstable families.

    Crossings (WS_CAP_WU) come from exact segment intersection; LIMIT_CONTACT
    flags a bounded branch whose limit estimate touches the other family's
    polyline to within ``tol``.  Everything within the exclusion ball around
    the fixed point is discarded — the curves always meet *at* the saddle.
    These are floating-point candidates, not proofs.
    """
    center = np.asarray(fixed, float).reshape(2)
    r_excl = 10.0 * seed_offset(center)
    found: list[Contact] = []

    def admit(pt: np.ndarray, kind: ContactKind, dist: float):
        if np.hypot(*(pt - center)) <= r_excl:
            return
        for c in found:
            if np.hypot(*(c.point - pt)) <= tol:
                return
        found.append(Contact(point=pt.copy(), kind=kind, distance=dist))

    for s_poly in ws:
        for u_poly in wu:
            for pt in _segment_crossings(s_poly.points, u_poly.points):
                admit(pt, ContactKind.WS_CAP_WU, 0.0)

    for own, other_family in ((ws, wu), (wu, ws)):
        for branch in own:
            if branch.verdict is not ManifoldVerdict.BOUNDED:
                continue
            if branch.limit_set_estimate is None or not len(branch.limit_set_estimate):
                continue
            for other in other_family:
                d = polyline_distance(branch.limit_set_estimate, other.points)
                for i in np.flatnonzero(d <= tol):
                    admit(branch.limit_set_estimate[i], ContactKind.LIMIT_CONTACT, float(d[i]))

    return ContactReport(contacts=found, tolerance=tol, exclusion_radius=r_excl)

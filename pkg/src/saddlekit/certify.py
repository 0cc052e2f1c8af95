"""Global-saddle certification from sampled numerical evidence.

``certify`` gathers evidence about a planar map on a rectangle — fixed-point
censuses, multiplier classification, orientation and spectrum sampling,
symmetry residuals, grown invariant curves — and walks a fixed priority list
of certification rules, firing the first whose hypotheses all verify.  Each
rule encodes one sufficient condition for the certified fixed point to be a
global topological saddle: unbounded stable/unstable curves, no homoclinic
contacts, every other orbit divergent in both time directions.

Honesty drives the design.  Hypotheses are verified on samples drawn from
the requested region, never on the whole plane, and the certificate says so;
refutations carry a concrete witness point; observations that contradict a
would-be conclusion (a bounded branch, a contact candidate, a failed
quadrant check) withhold the certificate outright; an exhausted growth
budget merely marks the result conditional, because not seeing an unbounded
curve within a budget is a numerics limitation, not a refutation.

Structural knobs live in :class:`CertifyConfig`.  The symmetry group to
exploit and the spectrum-gap width ε are *declared* by the caller rather
than auto-detected: ε instantiates an existential that cannot be searched
numerically, and the symmetry declaration decides which family of rules the
caller wants the certificate to rest on.  Declared structure is still
verified — a declared flip that fails its residual test becomes an ordinary
REFUTED hypothesis — and the detected group is always recorded as evidence,
with a note when it is stronger than what was declared.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .degree import fixed_point_index
from .fixedpoints import (
    MERGE_RADIUS,
    RESIDUAL_BOUND,
    ConsistencyError,
    FixedPointRecord,
    OrientationKind,
    SaddleKind,
    assert_unique_under_gap,
    find_fixed_points,
    orientation,
    spectrum_gap,
)
from .manifolds import CONTACT_TOL, ManifoldVerdict, find_contacts, grow_stable, grow_unstable
from .planarmap import (
    OrbitSettings,
    OrbitVerdict,
    PlanarMap,
    Region,
    TranslatedMap,
    classify_alpha_batch,
    classify_omega_batch,
)
from .sampling import region_samples
from .symmetry import KAPPA_X, KAPPA_Y, TOL_EQUIV, GroupElement, GroupKind, detect_symmetry

__all__ = [
    "CertVerdict",
    "HypothesisStatus",
    "ComponentAction",
    "Hypothesis",
    "CertifyConfig",
    "Rule",
    "RULES",
    "Certificate",
    "certify",
    "FreenessEntry",
    "FreenessReport",
    "check_free_precondition",
    "SurveyHighlight",
    "SurveySummary",
    "trivial_dynamics_survey",
]


class CertVerdict(Enum):
    GLOBAL_SADDLE = "GLOBAL_SADDLE"
    NOT_CERTIFIED = "NOT_CERTIFIED"


class HypothesisStatus(Enum):
    VERIFIED_ON_REGION = "VERIFIED_ON_REGION"
    REFUTED = "REFUTED"
    UNRESOLVED = "UNRESOLVED"


class ComponentAction(Enum):
    FOUR_INVARIANT = "FOUR_INVARIANT"
    INVARIANT_OR_INTERCHANGED = "INVARIANT_OR_INTERCHANGED"


@dataclass
class Hypothesis:
    """One checked assumption, with the report that decided it."""

    id: str
    status: HypothesisStatus
    detail: str
    witness: np.ndarray | None = None
    evidence: object | None = None

    def __post_init__(self) -> None:
        if self.status is HypothesisStatus.REFUTED and self.witness is None:
            raise ValueError(f"refuted hypothesis {self.id!r} must carry a witness point")

    @property
    def verified(self) -> bool:
        return self.status is HypothesisStatus.VERIFIED_ON_REGION


_DECLARABLE = (None, "kappa-x", "kappa-y", "D2")


@dataclass(frozen=True)
class CertifyConfig:
    """Caller-declared structure plus sampling and budget knobs.

    ``declared_symmetry`` opts in to the reflection rules ("kappa-x",
    "kappa-y") or the full two-reflection rules ("D2"); ``epsilon`` opts in
    to the spectrum-gap rules.  Leaving both unset restricts certification
    to the symmetry-free rules.
    """

    declared_symmetry: str | None = None
    epsilon: float | None = None
    census_grid: int = 64
    spectrum_samples: int = 10_000
    symmetry_samples: int = 400
    symmetry_tol: float = TOL_EQUIV
    quadrant_samples: int = 100
    grow_manifolds: bool = True
    manifold_budget: float = 1e7
    manifold_max_windows: int = 200
    contact_tol: float = CONTACT_TOL

    def __post_init__(self) -> None:
        if self.declared_symmetry not in _DECLARABLE:
            raise ValueError(
                f"declared_symmetry must be one of {_DECLARABLE}, got {self.declared_symmetry!r}"
            )
        if self.epsilon is not None and not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive when supplied, got {self.epsilon!r}")


@dataclass(frozen=True)
class Rule:
    """A sufficient condition for a global saddle.

    ``hypothesis_ids`` are checked in order and must all come back
    VERIFIED_ON_REGION for the rule to fire.  ``needs_symmetry``/
    ``needs_epsilon`` gate eligibility on the caller's declarations.
    """

    id: str
    hypothesis_ids: tuple[str, ...]
    needs_symmetry: str | None = None  # "D2", "kappa", or None
    needs_epsilon: bool = False
    component_action: ComponentAction | None = None


# Priority: reflection rules first (they certify plain homeomorphisms and
# carry quadrant statements), gap-assisted variants before census-assisted
# ones, and the symmetry-free rules as the fallback chain.
RULES: tuple[Rule, ...] = (
    Rule(
        id="d2-gap-direct",
        hypothesis_ids=(
            "symmetry-D2",
            "local-saddle",
            "spectrum-gap",
            "orientation-preserving",
            "direct-saddle",
        ),
        needs_symmetry="D2",
        needs_epsilon=True,
        component_action=ComponentAction.INVARIANT_OR_INTERCHANGED,
    ),
    Rule(
        id="d2-gap-no-period-2",
        hypothesis_ids=(
            "symmetry-D2",
            "local-saddle",
            "spectrum-gap",
            "orientation-consistent",
            "no-period-2",
        ),
        needs_symmetry="D2",
        needs_epsilon=True,
        component_action=ComponentAction.INVARIANT_OR_INTERCHANGED,
    ),
    Rule(
        id="d2-direct",
        hypothesis_ids=(
            "symmetry-D2",
            "unique-fixed-point",
            "orientation-preserving",
            "direct-saddle",
        ),
        needs_symmetry="D2",
        component_action=ComponentAction.FOUR_INVARIANT,
    ),
    Rule(
        id="kappa-direct",
        hypothesis_ids=(
            "symmetry-kappa",
            "local-saddle",
            "unique-fixed-point",
            "orientation-preserving",
            "direct-saddle",
        ),
        needs_symmetry="kappa",
    ),
    Rule(
        id="kappa-fix-f2-trivial",
        hypothesis_ids=(
            "symmetry-kappa",
            "orientation-consistent",
            "local-saddle",
            "unique-fixed-point",
            "fix-f2-trivial",
        ),
        needs_symmetry="kappa",
    ),
    Rule(
        id="gap-direct",
        hypothesis_ids=("spectrum-gap", "orientation-preserving", "direct-saddle"),
        needs_epsilon=True,
    ),
    Rule(
        id="unique-direct",
        hypothesis_ids=("unique-fixed-point", "orientation-preserving", "direct-saddle"),
    ),
    Rule(
        id="fix-f2-trivial",
        hypothesis_ids=(
            "orientation-consistent",
            "unique-fixed-point",
            "local-saddle",
            "fix-f2-trivial",
        ),
    ),
)


@dataclass
class Certificate:
    """Outcome of a certification run, with everything needed to audit it.

    ``hypotheses`` lists every hypothesis that was evaluated, in evaluation
    order — including refuted ones that only blocked earlier rules.  For a
    GLOBAL_SADDLE verdict, every hypothesis named by the fired rule is
    VERIFIED_ON_REGION.  ``conditional`` is set when corroborating manifold
    growth was skipped or ran out of budget.
    """

    verdict: CertVerdict
    rule: str | None
    hypotheses: list[Hypothesis]
    region: Region
    tolerances: dict[str, float]
    component_action: ComponentAction | None
    conditional: bool
    warnings: list[str]
    evidence: dict[str, object] = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.verdict is CertVerdict.GLOBAL_SADDLE

    def hypothesis(self, hid: str) -> Hypothesis:
        for h in self.hypotheses:
            if h.id == hid:
                return h
        raise KeyError(f"hypothesis {hid!r} was not evaluated for this certificate")

    def rule_hypotheses(self) -> list[Hypothesis]:
        if self.rule is None:
            return []
        (rule,) = [r for r in RULES if r.id == self.rule]
        return [self.hypothesis(hid) for hid in rule.hypothesis_ids]


def _fmt(p) -> str:
    q = np.asarray(p, float).reshape(2)
    return f"({q[0]:.6g}, {q[1]:.6g})"


def _fmt_multipliers(rec: FixedPointRecord) -> str:
    lam, mu = rec.eigenvalues
    def one(z: complex) -> str:
        return f"{z.real:.6g}" if z.imag == 0 else f"{z.real:.6g}{z.imag:+.6g}j"
    return f"{one(lam)}, {one(mu)}"


class _Evidence:
    """Memoized evidence gatherers; each report is computed at most once."""

    def __init__(self, m: PlanarMap, region: Region, config: CertifyConfig):
        self.m = m
        self.region = region
        self.config = config
        self._memo: dict[str, object] = {}

    def _get(self, key: str, compute):
        if key not in self._memo:
            self._memo[key] = compute()
        return self._memo[key]

    def computed(self, key: str) -> bool:
        return key in self._memo

    def census1(self):
        return self._get(
            "census1",
            lambda: find_fixed_points(self.m, self.region, period=1, grid_n=self.config.census_grid),
        )

    def census2(self):
        return self._get(
            "census2",
            lambda: find_fixed_points(self.m, self.region, period=2, grid_n=self.config.census_grid),
        )

    def candidate(self) -> FixedPointRecord | None:
        def pick():
            records = list(self.census1())
            if not records:
                return None
            saddles = [r for r in records if r.saddle_kind is not SaddleKind.NOT_SADDLE]
            return saddles[0] if saddles else records[0]

        return self._get("candidate", pick)

    def orientation(self):
        return self._get("orientation", lambda: orientation(self.m, self.region))

    def gap(self):
        assert self.config.epsilon is not None
        return self._get(
            "gap",
            lambda: spectrum_gap(
                self.m, self.region, self.config.epsilon, self.config.spectrum_samples
            ),
        )

    def symmetry(self):
        return self._get(
            "symmetry",
            lambda: detect_symmetry(
                self.m,
                self.region,
                samples=self.config.symmetry_samples,
                tol=self.config.symmetry_tol,
            ),
        )

    def flip_residuals(self, g: GroupElement) -> tuple[float, np.ndarray]:
        """Worst equivariance residual of one reflection and where it occurs."""

        def compute():
            P = region_samples(self.region, self.config.symmetry_samples, exclude_axes=True)
            lhs = self.m.apply_batch(g.transform(P))
            rhs = g.transform(self.m.apply_batch(P))
            r = np.linalg.norm(lhs - rhs, axis=1)
            k = int(np.argmax(r))
            return float(r[k]), P[k].copy()

        return self._get(f"flip:{g.label}", compute)

    def negative_det_point(self) -> np.ndarray:
        """A sampled point with det Df < 0 (caller guarantees one exists)."""

        def compute():
            P = region_samples(self.region, 256)
            J = self.m.jacobian_batch(P)
            det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
            return P[int(np.argmin(det))].copy()

        return self._get("negative-det", compute)


def _period2_witness(genuine, center: np.ndarray) -> np.ndarray:
    """Deterministic pick among genuine 2-periodic points: nearest the
    saddle, ties broken by smallest angle in [0, 2π)."""
    locs = [np.asarray(r.location, float) for r in genuine]

    def key(p):
        d = p - center
        ang = float(np.arctan2(d[1], d[0])) % (2.0 * np.pi)
        return (round(float(np.hypot(*d)), 12), ang)

    return min(locs, key=key).copy()


# --- hypothesis evaluators -------------------------------------------------


def _h_unique(ev: _Evidence) -> Hypothesis:
    census = ev.census1()
    n = len(census)
    if n == 1:
        rec = census.records[0]
        return Hypothesis(
            "unique-fixed-point",
            HypothesisStatus.VERIFIED_ON_REGION,
            f"exactly one period-1 fixed point in region, at {_fmt(rec.location)}",
            evidence=census,
        )
    if n == 0:
        return Hypothesis(
            "unique-fixed-point",
            HypothesisStatus.UNRESOLVED,
            "the census found no period-1 fixed point in the region",
            evidence=census,
        )
    cand = ev.candidate()
    extras = [r for r in census if not np.allclose(r.location, cand.location)]
    return Hypothesis(
        "unique-fixed-point",
        HypothesisStatus.REFUTED,
        f"the census found {n} period-1 fixed points",
        witness=np.asarray(extras[0].location, float).copy(),
        evidence=census,
    )


def _h_local_saddle(ev: _Evidence) -> Hypothesis:
    rec = ev.candidate()
    if rec is None:
        return Hypothesis(
            "local-saddle", HypothesisStatus.UNRESOLVED, "no fixed point found to classify"
        )
    if rec.saddle_kind in (SaddleKind.DIRECT_SADDLE, SaddleKind.TWISTED_SADDLE):
        return Hypothesis(
            "local-saddle",
            HypothesisStatus.VERIFIED_ON_REGION,
            f"{rec.saddle_kind.value} at {_fmt(rec.location)} "
            f"with multipliers {_fmt_multipliers(rec)}",
            evidence=rec,
        )
    return Hypothesis(
        "local-saddle",
        HypothesisStatus.REFUTED,
        f"fixed point at {_fmt(rec.location)} is not a saddle: "
        f"{rec.note or 'multipliers ' + _fmt_multipliers(rec)}",
        witness=np.asarray(rec.location, float).copy(),
        evidence=rec,
    )


def _h_direct_saddle(ev: _Evidence) -> Hypothesis:
    rec = ev.candidate()
    if rec is None:
        return Hypothesis(
            "direct-saddle", HypothesisStatus.UNRESOLVED, "no fixed point found to classify"
        )
    if rec.saddle_kind is SaddleKind.DIRECT_SADDLE:
        return Hypothesis(
            "direct-saddle",
            HypothesisStatus.VERIFIED_ON_REGION,
            f"both multipliers positive: {_fmt_multipliers(rec)}",
            evidence=rec,
        )
    if rec.saddle_kind is SaddleKind.TWISTED_SADDLE:
        detail = f"twisted saddle: a multiplier is negative ({_fmt_multipliers(rec)})"
    else:
        detail = (
            f"not a saddle at all: {rec.note or 'multipliers ' + _fmt_multipliers(rec)}"
        )
    return Hypothesis(
        "direct-saddle",
        HypothesisStatus.REFUTED,
        detail,
        witness=np.asarray(rec.location, float).copy(),
        evidence=rec,
    )


def _h_orientation_preserving(ev: _Evidence) -> Hypothesis:
    rep = ev.orientation()
    if rep.kind is OrientationKind.PRESERVING:
        return Hypothesis(
            "orientation-preserving",
            HypothesisStatus.VERIFIED_ON_REGION,
            f"det Df > 0 at all {rep.sample_count} samples",
            evidence=rep,
        )
    if rep.kind is OrientationKind.MIXED:
        point, det = rep.witnesses[1]
        detail = f"det Df changes sign on the region (e.g. {det:.3g} at {_fmt(point)})"
        witness = np.asarray(point, float).copy()
    else:
        witness = ev.negative_det_point()
        detail = f"det Df < 0 at all {rep.sample_count} samples (orientation reversing)"
    return Hypothesis(
        "orientation-preserving", HypothesisStatus.REFUTED, detail, witness=witness, evidence=rep
    )


def _h_orientation_consistent(ev: _Evidence) -> Hypothesis:
    rep = ev.orientation()
    if rep.kind is not OrientationKind.MIXED:
        return Hypothesis(
            "orientation-consistent",
            HypothesisStatus.VERIFIED_ON_REGION,
            f"det Df keeps one sign ({rep.kind.value.lower()}) at all {rep.sample_count} samples",
            evidence=rep,
        )
    point, det = rep.witnesses[1]
    return Hypothesis(
        "orientation-consistent",
        HypothesisStatus.REFUTED,
        f"det Df changes sign on the region (e.g. {det:.3g} at {_fmt(point)}); "
        "the map cannot restrict to a diffeomorphism there",
        witness=np.asarray(point, float).copy(),
        evidence=rep,
    )


def _h_spectrum_gap(ev: _Evidence) -> Hypothesis:
    rep = ev.gap()
    hi = 1.0 + rep.epsilon
    if rep.holds_on_samples:
        return Hypothesis(
            "spectrum-gap",
            HypothesisStatus.VERIFIED_ON_REGION,
            f"no real Jacobian multiplier in [1, {hi:g}) across {rep.sample_count} samples",
            evidence=rep,
        )
    point, eig = rep.violation_points[0]
    return Hypothesis(
        "spectrum-gap",
        HypothesisStatus.REFUTED,
        f"multiplier {eig:.6g} ∈ [1, {hi:g}) at {_fmt(point)} "
        f"({len(rep.violation_points)} violating samples of {rep.sample_count})",
        witness=np.asarray(point, float).copy(),
        evidence=rep,
    )


def _h_symmetry_d2(ev: _Evidence) -> Hypothesis:
    rep = ev.symmetry()
    if rep.group is GroupKind.D2:
        return Hypothesis(
            "symmetry-D2",
            HypothesisStatus.VERIFIED_ON_REGION,
            f"both axis flips equivariant to {rep.tol:g} over {rep.sample_count} samples",
            evidence=rep,
        )
    flips = [(g, *ev.flip_residuals(g)) for g in (KAPPA_X, KAPPA_Y)]
    g, worst, point = max(flips, key=lambda t: t[1])
    return Hypothesis(
        "symmetry-D2",
        HypothesisStatus.REFUTED,
        f"declared D2, but the {g.label} residual reaches {worst:.3g} "
        f"(tolerance {rep.tol:g}); detected group: {rep.group.value}",
        witness=point,
        evidence=rep,
    )


def _h_symmetry_kappa(ev: _Evidence) -> Hypothesis:
    declared = ev.config.declared_symmetry
    if declared == "D2":
        rep = ev.symmetry()
        if rep.group is GroupKind.D2:
            return Hypothesis(
                "symmetry-kappa",
                HypothesisStatus.VERIFIED_ON_REGION,
                "flip equivariance holds (full D2 group detected); invariant axes x and y",
                evidence=rep,
            )
        flips = [(g, *ev.flip_residuals(g)) for g in (KAPPA_X, KAPPA_Y)]
        g, worst, point = min(flips, key=lambda t: t[1])
        if worst <= ev.config.symmetry_tol:
            return Hypothesis(
                "symmetry-kappa",
                HypothesisStatus.VERIFIED_ON_REGION,
                f"{g.label} equivariant (residual {worst:.3g}); declared D2 only partially holds",
                evidence=rep,
            )
        return Hypothesis(
            "symmetry-kappa",
            HypothesisStatus.REFUTED,
            f"no axis flip is equivariant (best residual {worst:.3g} for {g.label})",
            witness=point,
            evidence=rep,
        )
    g = KAPPA_X if declared == "kappa-x" else KAPPA_Y
    worst, point = ev.flip_residuals(g)
    axis = "x" if g is KAPPA_X else "y"
    if worst <= ev.config.symmetry_tol:
        return Hypothesis(
            "symmetry-kappa",
            HypothesisStatus.VERIFIED_ON_REGION,
            f"{g.label} equivariant: residual {worst:.3g} ≤ {ev.config.symmetry_tol:g} "
            f"over {ev.config.symmetry_samples} samples; invariant axis {axis}",
        )
    return Hypothesis(
        "symmetry-kappa",
        HypothesisStatus.REFUTED,
        f"declared {declared}, but the {g.label} residual reaches {worst:.3g} "
        f"(tolerance {ev.config.symmetry_tol:g})",
        witness=point,
    )


def _h_fix_f2(ev: _Evidence) -> Hypothesis:
    unique = _h_unique(ev)
    if unique.status is HypothesisStatus.UNRESOLVED:
        return Hypothesis(
            "fix-f2-trivial", HypothesisStatus.UNRESOLVED, "no period-1 fixed point found"
        )
    if unique.status is HypothesisStatus.REFUTED:
        return Hypothesis(
            "fix-f2-trivial",
            HypothesisStatus.REFUTED,
            "several period-1 fixed points, so the second iterate fixes more than one point: "
            + unique.detail,
            witness=unique.witness,
            evidence=unique.evidence,
        )
    census = ev.census2()
    genuine = census.genuine_period2
    if not genuine:
        return Hypothesis(
            "fix-f2-trivial",
            HypothesisStatus.VERIFIED_ON_REGION,
            "second-iterate census found no 2-periodic point beyond the fixed point",
            evidence=census,
        )
    cand = ev.candidate()
    witness = _period2_witness(genuine, np.asarray(cand.location, float))
    return Hypothesis(
        "fix-f2-trivial",
        HypothesisStatus.REFUTED,
        f"{len(genuine)} genuine 2-periodic point(s) in region, e.g. {_fmt(witness)}",
        witness=witness,
        evidence=census,
    )


def _h_no_period2(ev: _Evidence) -> Hypothesis:
    census = ev.census2()
    genuine = census.genuine_period2
    if not genuine:
        return Hypothesis(
            "no-period-2",
            HypothesisStatus.VERIFIED_ON_REGION,
            "second-iterate census found no genuine 2-periodic orbit in the region",
            evidence=census,
        )
    cand = ev.candidate()
    center = np.asarray(cand.location, float) if cand is not None else np.zeros(2)
    witness = _period2_witness(genuine, center)
    return Hypothesis(
        "no-period-2",
        HypothesisStatus.REFUTED,
        f"{len(genuine)} genuine 2-periodic point(s) in region, e.g. {_fmt(witness)}",
        witness=witness,
        evidence=census,
    )


_EVALUATORS = {
    "unique-fixed-point": _h_unique,
    "local-saddle": _h_local_saddle,
    "direct-saddle": _h_direct_saddle,
    "orientation-preserving": _h_orientation_preserving,
    "orientation-consistent": _h_orientation_consistent,
    "spectrum-gap": _h_spectrum_gap,
    "symmetry-D2": _h_symmetry_d2,
    "symmetry-kappa": _h_symmetry_kappa,
    "fix-f2-trivial": _h_fix_f2,
    "no-period-2": _h_no_period2,
}


def _quadrant_check(
    m: PlanarMap, region: Region, n_per_quadrant: int, action: ComponentAction
) -> dict:
    """Operational check of the quadrant statement attached to the D2 rules.

    The four open quadrants cut out by the invariant axes must each map into
    the quadrant predicted by the sign pattern of the on-axis dynamics —
    the same one for FOUR_INVARIANT, a consistent interchange otherwise.
    """
    out: dict[str, object] = {
        "passed": False,
        "samples": 0,
        "axis_signs": None,
        "mismatches": 0,
        "witness": None,
        "why": None,
    }
    if not (region.x0 < 0.0 < region.x1 and region.y0 < 0.0 < region.y1):
        out["why"] = "region does not straddle both axes, quadrants are undefined"
        return out

    t = np.linspace(0.05, 0.95, 16)
    on_x = np.column_stack([t * region.x1, np.zeros_like(t)])
    on_y = np.column_stack([np.zeros_like(t), t * region.y1])
    sx = np.sign(m.apply_batch(on_x)[:, 0])
    sy = np.sign(m.apply_batch(on_y)[:, 1])
    if len(set(sx)) != 1 or 0.0 in sx or len(set(sy)) != 1 or 0.0 in sy:
        out["why"] = "on-axis dynamics does not keep a constant sign"
        return out
    s_x, s_y = int(sx[0]), int(sy[0])
    out["axis_signs"] = (s_x, s_y)
    if action is ComponentAction.FOUR_INVARIANT and (s_x < 0 or s_y < 0):
        out["why"] = (
            f"axis dynamics flips sign (x: {s_x:+d}, y: {s_y:+d}), "
            "contradicting invariance of all four components"
        )
        return out

    mismatches = 0
    witness = None
    total = 0
    for qx in (1, -1):
        for qy in (1, -1):
            sub = Region(
                x0=0.0 if qx > 0 else region.x0,
                x1=region.x1 if qx > 0 else 0.0,
                y0=0.0 if qy > 0 else region.y0,
                y1=region.y1 if qy > 0 else 0.0,
            )
            P = region_samples(sub, n_per_quadrant)
            Q = m.apply_batch(P)
            bad = (np.sign(Q[:, 0]) != qx * s_x) | (np.sign(Q[:, 1]) != qy * s_y)
            total += len(P)
            if bad.any() and witness is None:
                witness = P[int(np.argmax(bad))].copy()
            mismatches += int(bad.sum())
    out["samples"] = total
    out["mismatches"] = mismatches
    out["witness"] = witness
    if mismatches:
        out["why"] = f"{mismatches} of {total} sampled points land in the wrong quadrant"
    else:
        out["passed"] = True
    return out


def certify(
    m: PlanarMap, region: Region | None = None, config: CertifyConfig | None = None
) -> Certificate:
    """Decide whether the map's fixed point certifies as a global saddle.

    Evidence is gathered lazily in rule-priority order and cached, so cheap
    rules never pay for expensive censuses they do not need.  The verdict is
    deterministic for identical inputs.
    """
    region = region or m.declared_region
    if region is None:
        raise ValueError("certify needs a region (none given and the map declares none)")
    config = config or CertifyConfig()
    ev = _Evidence(m, region, config)

    evaluated: dict[str, Hypothesis] = {}
    order: list[str] = []

    def hyp(hid: str) -> Hypothesis:
        if hid not in evaluated:
            evaluated[hid] = _EVALUATORS[hid](ev)
            order.append(hid)
        return evaluated[hid]

    census = ev.census1()
    candidate = ev.candidate()
    warnings: list[str] = []
    notes: list[str] = []
    blocked: dict[str, str] = {}

    fired: Rule | None = None
    for rule in RULES:
        if rule.needs_symmetry == "D2" and config.declared_symmetry != "D2":
            blocked[rule.id] = "symmetry D2 not declared in config"
            continue
        if rule.needs_symmetry == "kappa" and config.declared_symmetry is None:
            blocked[rule.id] = "no flip symmetry declared in config"
            continue
        if rule.needs_epsilon and config.epsilon is None:
            blocked[rule.id] = "no spectrum-gap epsilon supplied in config"
            continue
        failed = None
        for hid in rule.hypothesis_ids:
            h = hyp(hid)
            if not h.verified:
                failed = f"hypothesis {hid} {h.status.value}"
                break
        if failed:
            blocked[rule.id] = failed
            continue
        if len(census) != 1:
            blocked[rule.id] = "period-1 census did not find exactly one fixed point"
            continue
        fired = rule
        break

    # The sampled gap and a multi-point census cannot both be right.
    if config.epsilon is not None and ev.computed("gap") and len(census) > 1:
        try:
            assert_unique_under_gap(census, ev.gap())
        except ConsistencyError as err:
            warnings.append(str(err))

    component_action = fired.component_action if fired else None
    quadrant = None
    if fired is not None and component_action is not None:
        quadrant = _quadrant_check(m, region, config.quadrant_samples, component_action)
        if not quadrant["passed"]:
            warnings.append(
                f"operational quadrant check failed ({quadrant['why']}); "
                f"certificate for rule {fired.id} withheld"
            )
            blocked[fired.id] = "quadrant check failed"
            fired = None
            component_action = None

    # Corroborating (non-gating for hypotheses, but conclusion-checking)
    # manifold growth: a grown branch that stays bounded, or a contact
    # candidate between the families, contradicts the would-be conclusion.
    conditional = False
    manifold_verdicts: dict[str, str] | None = None
    polylines = None
    contact_report = None
    grew = False
    if (
        candidate is not None
        and candidate.saddle_kind is not SaddleKind.NOT_SADDLE
        and config.grow_manifolds
    ):
        wu = grow_unstable(m, candidate, config.manifold_budget, config.manifold_max_windows)
        ws = grow_stable(m, candidate, config.manifold_budget, config.manifold_max_windows)
        polylines = (*wu, *ws)
        manifold_verdicts = {b.branch.value: b.verdict.value for b in polylines}
        contact_report = find_contacts(ws, wu, candidate.location, config.contact_tol)
        grew = True

    if fired is not None:
        if not grew:
            conditional = True
            warnings.append(
                "manifold corroboration skipped by config; certificate is conditional "
                "on the theorem's unboundedness conclusion"
            )
        else:
            bounded = [b for b in polylines if b.verdict is ManifoldVerdict.BOUNDED]
            if contact_report:
                pts = ", ".join(_fmt(c.point) for c in contact_report.contacts[:3])
                warnings.append(
                    f"{len(contact_report.contacts)} homoclinic contact candidate(s) "
                    f"observed near {pts}; conclusion contradicted, certificate withheld"
                )
                blocked[fired.id] = "contact candidates observed"
                fired = None
                component_action = None
            elif bounded:
                labels = ", ".join(b.branch.value for b in bounded)
                warnings.append(
                    f"grown branch(es) {labels} stayed bounded, contradicting the "
                    "unboundedness conclusion; certificate withheld"
                )
                blocked[fired.id] = "bounded branch observed"
                fired = None
                component_action = None
            else:
                exhausted = [
                    b for b in polylines if b.verdict is ManifoldVerdict.BUDGET_EXHAUSTED
                ]
                if exhausted:
                    conditional = True
                    for b in exhausted:
                        warnings.append(
                            f"branch {b.branch.value} ended with budget exhausted"
                            + (f": {b.note}" if b.note else "")
                            + "; certificate is conditional"
                        )

    det = ev.symmetry()  # always recorded as evidence
    if config.declared_symmetry is None and det.group is not GroupKind.TRIVIAL:
        notes.append(
            f"detected symmetry {det.group.value} was not declared; symmetry rules skipped"
        )

    tolerances: dict[str, float] = {
        "census_merge_radius": MERGE_RADIUS,
        "census_residual_bound": RESIDUAL_BOUND,
        "symmetry_tol": config.symmetry_tol,
        "contact_tol": config.contact_tol,
    }
    if config.epsilon is not None:
        tolerances["spectrum_epsilon"] = config.epsilon

    evidence: dict[str, object] = {
        "region_note": "all statuses are sample-based statements about the given region only",
        "map": m.name,
        # conjugating translation, when the map under scrutiny is a recentred
        # view of another one (e.g. a return map shifted onto its periodic point)
        "translation": tuple(m.center) if isinstance(m, TranslatedMap) else None,
        "census_p1": len(census),
        "census_p2_genuine": (
            len(ev.census2().genuine_period2) if ev.computed("census2") else None
        ),
        "fixed_point": (
            np.asarray(candidate.location, float).copy() if candidate is not None else None
        ),
        "multipliers": candidate.eigenvalues if candidate is not None else None,
        "saddle_kind": candidate.saddle_kind.value if candidate is not None else None,
        "orientation": ev.orientation().kind.value if ev.computed("orientation") else None,
        "detected_symmetry": {"group": det.group.value, "axis": det.axis},
        "spectrum_gap_holds": ev.gap().holds_on_samples if ev.computed("gap") else None,
        "manifolds": manifold_verdicts,
        "manifold_polylines": polylines,
        "contacts": len(contact_report.contacts) if contact_report is not None else None,
        "quadrant_check": quadrant,
        "rules_blocked": blocked,
        "notes": notes,
    }

    verdict = CertVerdict.GLOBAL_SADDLE if fired is not None else CertVerdict.NOT_CERTIFIED
    return Certificate(
        verdict=verdict,
        rule=fired.id if fired is not None else None,
        hypotheses=[evaluated[hid] for hid in order],
        region=region,
        tolerances=tolerances,
        component_action=component_action,
        conditional=conditional if verdict is CertVerdict.GLOBAL_SADDLE else False,
        warnings=warnings,
        evidence=evidence,
    )


# --- freeness precondition and orbit survey --------------------------------


@dataclass
class FreenessEntry:
    index: int
    flagged: bool
    curve: object
    min_displacement: float


@dataclass
class FreenessReport:
    entries: list[FreenessEntry]

    @property
    def holds(self) -> bool:
        return not any(e.flagged for e in self.entries)


def check_free_precondition(m: PlanarMap, curves) -> FreenessReport:
    """Index of p ↦ p − f(p) over each closed curve.

    A curve of index exactly 1 is flagged: it rules out the disk-freeness
    argument for trivial dynamics and is evidence of recurrence inside.
    Index errors (a fixed point on a curve, winding budget) propagate.
    """
    entries = []
    for curve in curves:
        res = fixed_point_index(m, curve)
        entries.append(
            FreenessEntry(
                index=res.degree,
                flagged=res.degree == 1,
                curve=curve,
                min_displacement=res.min_displacement,
            )
        )
    return FreenessReport(entries)


@dataclass
class SurveyHighlight:
    point: np.ndarray
    direction: str  # "omega" or "alpha"
    verdict: str
    target: np.ndarray | None


@dataclass
class SurveySummary:
    n_points: int
    omega_counts: dict[str, int]
    alpha_counts: dict[str, int]
    highlights: list[SurveyHighlight]

    @property
    def trivial_on_samples(self) -> bool:
        return not self.highlights


def trivial_dynamics_survey(
    m: PlanarMap,
    region: Region | None = None,
    n_points: int = 200,
    settings: OrbitSettings | None = None,
) -> SurveySummary:
    """Classify forward and backward limit behaviour over sampled points.

    Counts verdicts per direction and highlights every CONVERGES_TO_PERIOD2
    or UNRESOLVED orbit — those are counter-evidence against trivial
    dynamics (where every orbit should settle on a fixed point or diverge).
    """
    region = region or m.declared_region
    if region is None:
        raise ValueError("survey needs a region (none given and the map declares none)")
    P = region_samples(region, n_points)
    highlights: list[SurveyHighlight] = []
    counts: dict[str, dict[str, int]] = {}
    for direction, classifier in (("omega", classify_omega_batch), ("alpha", classify_alpha_batch)):
        results = classifier(m, P, settings=settings)
        tally: dict[str, int] = {}
        for p, r in zip(P, results):
            tally[r.verdict.value] = tally.get(r.verdict.value, 0) + 1
            if r.verdict in (OrbitVerdict.CONVERGES_TO_PERIOD2, OrbitVerdict.UNRESOLVED):
                highlights.append(
                    SurveyHighlight(
                        point=p.copy(),
                        direction=direction,
                        verdict=r.verdict.value,
                        target=r.target,
                    )
                )
        counts[direction] = tally
    return SurveySummary(
        n_points=len(P),
        omega_counts=counts["omega"],
        alpha_counts=counts["alpha"],
        highlights=highlights,
    )

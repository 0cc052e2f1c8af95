"""Equivariance detection for the admissible planar symmetry groups.

Only groups generated by the point reflection −Id and the axis-aligned
reflections can coexist with a hyperbolic saddle, so those are the only
candidates tested.  Maps must be presented in coordinates where reflections
are axis-aligned.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .fixedpoints import ConsistencyError
from .planarmap import PlanarMap, Region
from .sampling import halton, region_samples

__all__ = [
    "GroupElement",
    "MINUS_ID",
    "KAPPA_X",
    "KAPPA_Y",
    "GroupKind",
    "SymmetryReport",
    "FixedSubspace",
    "detect_symmetry",
    "fixed_subspace",
    "check_invariant_line",
    "TOL_EQUIV",
]

TOL_EQUIV = 1e-9


@dataclass(frozen=True)
class GroupElement:
    label: str
    m00: float
    m11: float  # all admissible elements are diagonal ±1 matrices

    @property
    def matrix(self) -> np.ndarray:
        return np.diag([self.m00, self.m11])

    def transform(self, P: np.ndarray) -> np.ndarray:
        out = np.asarray(P, float).reshape(-1, 2).copy()
        out[:, 0] *= self.m00
        out[:, 1] *= self.m11
        return out


MINUS_ID = GroupElement("minus-id", -1.0, -1.0)
KAPPA_X = GroupElement("flip-about-x-axis", 1.0, -1.0)
KAPPA_Y = GroupElement("flip-about-y-axis", -1.0, 1.0)


class GroupKind(Enum):
    TRIVIAL = "TRIVIAL"
    Z2_MINUS_ID = "Z2_MINUS_ID"
    Z2_KAPPA = "Z2_KAPPA"
    D2 = "D2"


@dataclass
class SymmetryReport:
    group: GroupKind
    axis: str | None  # fixed axis of the reflection, for Z2_KAPPA only
    residuals: dict[str, float]  # per generator, max ‖f(γp) − γf(p)‖ over samples
    sample_count: int
    tol: float


def _equivariance_residual(m: PlanarMap, g: GroupElement, P: np.ndarray) -> float:
    lhs = m.apply_batch(g.transform(P))
    rhs = g.transform(m.apply_batch(P))
    return float(np.linalg.norm(lhs - rhs, axis=1).max())


def detect_symmetry(
    m: PlanarMap,
    region: Region | None = None,
    samples: int = 400,
    tol: float = TOL_EQUIV,
) -> SymmetryReport:
    """Assemble the largest admissible symmetry group from passing generators.

    When several groups fit, reflections win over the point symmetry (they
    carry an invariant axis, which is what the saddle arguments consume).
    ``tol`` is recorded in the report; callers working with integrated
    time-T maps should widen it to match their integrator accuracy.
    """
    if samples < 100:
        raise ValueError("symmetry detection needs at least 100 samples")
    region = region or m.declared_region or Region(-10, 10, -10, 10)
    P = region_samples(region, samples, exclude_axes=True)
    residuals = {
        g.label: _equivariance_residual(m, g, P) for g in (KAPPA_X, KAPPA_Y, MINUS_ID)
    }
    ok_x = residuals[KAPPA_X.label] <= tol
    ok_y = residuals[KAPPA_Y.label] <= tol
    ok_m = residuals[MINUS_ID.label] <= tol

    if ok_x and ok_y:
        if not ok_m:
            # −Id = κ_x ∘ κ_y, so it cannot genuinely fail when both pass
            raise ConsistencyError(
                "both reflections pass equivariance but their product does not: "
                f"residuals {residuals}; tolerance {tol:g} sits on a knife edge"
            )
        group, axis = GroupKind.D2, None
    elif ok_x:
        group, axis = GroupKind.Z2_KAPPA, "x"
    elif ok_y:
        group, axis = GroupKind.Z2_KAPPA, "y"
    elif ok_m:
        group, axis = GroupKind.Z2_MINUS_ID, None
    else:
        group, axis = GroupKind.TRIVIAL, None
    return SymmetryReport(
        group=group, axis=axis, residuals=residuals, sample_count=len(P), tol=tol
    )


@dataclass(frozen=True)
class FixedSubspace:
    axis: str | None  # "x", "y", or None for the degenerate {0}
    degenerate: bool

    def basis(self) -> np.ndarray:
        if self.axis == "x":
            return np.array([1.0, 0.0])
        if self.axis == "y":
            return np.array([0.0, 1.0])
        return np.zeros(2)


def fixed_subspace(g: GroupElement) -> FixedSubspace:
    """Pointwise-fixed set of a group element: an axis for a reflection,
    the origin alone (flagged degenerate) for −Id."""
    if g.label == KAPPA_X.label:
        return FixedSubspace("x", False)
    if g.label == KAPPA_Y.label:
        return FixedSubspace("y", False)
    if g.label == MINUS_ID.label:
        return FixedSubspace(None, True)
    raise ValueError(f"unknown group element {g.label!r}")


def check_invariant_line(
    m: PlanarMap,
    line: str,
    samples: int = 200,
    tol: float = TOL_EQUIV,
) -> tuple[bool, float]:
    """Does the map send the given axis into itself?

    Returns (invariant, max off-axis coordinate of the image over samples).
    """
    if line not in ("x", "y"):
        raise ValueError("line must be 'x' or 'y'")
    region = m.declared_region or Region(-10, 10, -10, 10)
    lo, hi = (region.x0, region.x1) if line == "x" else (region.y0, region.y1)
    t = lo + halton(samples)[:, 0] * (hi - lo)
    P = np.zeros((samples, 2))
    P[:, 0 if line == "x" else 1] = t
    img = m.apply_batch(P)
    off = np.abs(img[:, 1 if line == "x" else 0])
    worst = float(off.max())
    return worst <= tol, worst

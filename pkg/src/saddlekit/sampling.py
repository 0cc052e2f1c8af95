"""Deterministic low-discrepancy sampling of rectangular regions."""

from __future__ import annotations

import numpy as np

__all__ = ["halton", "region_samples"]


def _vdc(n: int, base: int, skip: int = 20) -> np.ndarray:
    """First ``n`` terms of the van der Corput sequence in ``base``."""
    out = np.empty(n)
    for i in range(n):
        k, denom, v = i + skip, 1.0, 0.0
        while k > 0:
            denom *= base
            k, rem = divmod(k, base)
            v += rem / denom
        out[i] = v
    return out


def halton(n: int) -> np.ndarray:
    """``(n, 2)`` Halton points (bases 2 and 3) in the open unit square."""
    return np.column_stack([_vdc(n, 2), _vdc(n, 3)])


def region_samples(region, n: int, *, exclude_axes: bool = False) -> np.ndarray:
    """Low-discrepancy points inside ``region``.

    With ``exclude_axes`` the points are additionally kept away from the
    coordinate axes (useful when the axes are invariant lines whose residuals
    would vanish identically).
    """
    u = halton(2 * n + 16 if exclude_axes else n)
    pts = np.column_stack(
        [
            region.x0 + u[:, 0] * (region.x1 - region.x0),
            region.y0 + u[:, 1] * (region.y1 - region.y0),
        ]
    )
    if exclude_axes:
        eps = 1e-6 * max(region.x1 - region.x0, region.y1 - region.y0)
        pts = pts[(np.abs(pts[:, 0]) > eps) & (np.abs(pts[:, 1]) > eps)]
        if len(pts) < n:
            raise RuntimeError("could not draw enough off-axis samples")
    return pts[:n]

"""Damped Newton iteration on batches of planar root problems."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["NewtonOutcome", "newton_batch"]

_SINGULAR_FLOOR = 1e-300


@dataclass
class NewtonOutcome:
    points: np.ndarray  # (n, 2), nan rows where the lane failed
    ok: np.ndarray  # (n,) bool
    residual: np.ndarray  # (n,) final residual norm (inf where failed)
    singular_skips: int  # lanes abandoned because the Jacobian was singular


def _solve2(J: np.ndarray, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cramer solve of J d = r for stacked 2x2 systems; flags singular lanes."""
    det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    scale = np.abs(J).max(axis=(1, 2)) ** 2 + _SINGULAR_FLOOR
    singular = np.abs(det) < 1e-14 * scale
    safe = np.where(singular, 1.0, det)
    d = np.empty_like(r)
    d[:, 0] = (r[:, 0] * J[:, 1, 1] - r[:, 1] * J[:, 0, 1]) / safe
    d[:, 1] = (r[:, 1] * J[:, 0, 0] - r[:, 0] * J[:, 1, 0]) / safe
    return d, singular


def newton_batch(
    fun,
    fun_jac,
    seeds: np.ndarray,
    *,
    tol=1e-11,
    max_iter: int = 50,
    max_halvings: int = 8,
    abandon_radius: float | None = None,
) -> NewtonOutcome:
    """Solve ``fun(p) = 0`` from every seed with Armijo-damped Newton steps.

    The residual callbacks receive the surviving lanes plus their original
    indices — ``fun(P, i)`` maps ``(k, 2)`` points belonging to seed lanes
    ``i`` to ``(k, 2)`` residuals, and ``fun_jac(P, i)`` additionally returns
    the stacked Jacobians ``(k, 2, 2)`` — so that per-lane problems (one
    target per seed) stay aligned while the batch shrinks.  ``tol`` may be a
    scalar or a per-lane array.  Lanes are abandoned on singular Jacobians,
    wandering out of ``abandon_radius``, or failure to reduce the residual.
    """
    P = np.array(seeds, dtype=float).reshape(-1, 2).copy()
    n = len(P)
    tol = np.broadcast_to(np.asarray(tol, dtype=float), (n,))
    ok = np.zeros(n, dtype=bool)
    alive = np.ones(n, dtype=bool)
    res_norm = np.full(n, np.inf)
    singular_skips = 0

    with np.errstate(all="ignore"):
        F = fun(P, np.arange(n))
        rn = np.linalg.norm(F, axis=1)
        bad = ~np.isfinite(rn)
        alive &= ~bad
        res_norm[alive] = rn[alive]

        for _ in range(max_iter):
            idx = np.flatnonzero(alive & (res_norm > tol))
            if idx.size == 0:
                break
            Pi = P[idx]
            Fi, Ji = fun_jac(Pi, idx)
            step, singular = _solve2(Ji, -Fi)
            if singular.any():
                kill = idx[singular]
                alive[kill] = False
                singular_skips += int(singular.sum())
                idx = idx[~singular]
                if idx.size == 0:
                    continue
                Pi, Fi, step = Pi[~singular], Fi[~singular], step[~singular]
            base = np.linalg.norm(Fi, axis=1)

            alpha = np.ones(len(idx))
            accepted = np.zeros(len(idx), dtype=bool)
            trial = Pi.copy()
            for _h in range(max_halvings + 1):
                todo = ~accepted
                if not todo.any():
                    break
                sub = np.flatnonzero(todo)
                cand = Pi[sub] + alpha[sub, None] * step[sub]
                fc = fun(cand, idx[sub])
                cn = np.linalg.norm(fc, axis=1)
                good = np.isfinite(cn) & (cn <= (1.0 - 1e-4 * alpha[sub]) * base[sub])
                acc = sub[good]
                trial[acc] = cand[good]
                res_norm[idx[acc]] = cn[good]
                accepted[acc] = True
                alpha[sub[~good]] *= 0.5
            P[idx[accepted]] = trial[accepted]
            alive[idx[~accepted]] = False
            if abandon_radius is not None:
                far = np.linalg.norm(P[idx], axis=1) > abandon_radius
                alive[idx[far]] = False

        done = alive & (res_norm <= tol)
        # polish the residual bookkeeping with one final evaluation
        if done.any():
            sel = np.flatnonzero(done)
            F = fun(P[sel], sel)
            res_norm[sel] = np.linalg.norm(F, axis=1)
        ok[done] = True

    points = np.where(ok[:, None], P, np.nan)
    res_norm[~ok] = np.inf
    return NewtonOutcome(points=points, ok=ok, residual=res_norm, singular_skips=singular_skips)

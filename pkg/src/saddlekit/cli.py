"""Command-line driver.

Five commands, all taking the same flags:

    saddlekit analyze   --config problem.cfg [--out DIR] [--region X0,X1,Y0,Y1]
    saddlekit certify   --config problem.cfg [--out DIR] ...
    saddlekit portrait  --config problem.cfg --out DIR [--seed N] ...
    saddlekit manifolds --config problem.cfg [--out DIR] [--budget ARCLEN] ...
    saddlekit poincare  --config problem.cfg [--out DIR] ...

``analyze`` runs the fixed-point census (periods 1 and 2), local
classification, winding indices and symmetry detection.  ``certify`` runs the
full certifier and exits 0 exactly when the verdict is GLOBAL_SADDLE.
``portrait`` writes an SVG phase portrait plus the manifold polylines as CSV;
``manifolds`` writes just the polylines; ``poincare`` locates a periodic
orbit of a flow-backed problem and reports its return-map data.

Exit codes: 0 success (for ``certify``: verdict GLOBAL_SADDLE), 1 certifier
ran but withheld the verdict, 2 unusable configuration or command line,
3 numerical failure or unwritable output.

Everything is deterministic for a fixed config file: the census and
certifier use fixed low-discrepancy sampling, and the only randomness —
portrait orbit seeds — comes from a PRNG seeded by ``--seed`` / ``[run]
seed`` (default 42).  Outputs are byte-identical across runs.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .certify import CertVerdict, certify
from .config import DEFAULT_SEED, Config, ConfigError, load_config, parse_region_spec
from .degree import FixedPointOnCurveError, WindingBudgetError, index_at_point
from .fixedpoints import (
    ConsistencyError,
    FixedPointCensus,
    FixedPointRecord,
    SaddleKind,
    find_fixed_points,
)
from .flows import (
    IntegrationError,
    LienardSpec,
    PeriodicOrbitNotFound,
    PeriodicSystem,
    PlanarField,
    TimeTMap,
    build_lienard,
    find_periodic_orbit,
    monodromy,
)
from .manifolds import ManifoldPolyline, grow_stable, grow_unstable
from .planarmap import MapSpec, PlanarMap, Region, TranslatedMap
from .portrait import render_portrait
from .reporting import (
    analysis_text,
    assumption_text,
    certificate_lines,
    certificate_text,
    manifold_summary_text,
    poincare_text,
    polyline_csv_lines,
    write_lines,
)
from .symmetry import detect_symmetry

EXIT_OK = 0
EXIT_NOT_CERTIFIED = 1
EXIT_CONFIG = 2
EXIT_NUMERICS = 3

_SADDLES = (SaddleKind.DIRECT_SADDLE, SaddleKind.TWISTED_SADDLE)


@dataclass
class Problem:
    """A config file turned into objects the commands can run."""

    cfg: Config
    pmap: PlanarMap
    system: PlanarField | None  # backing flow, when the map is a time-T map
    lienard: LienardSpec | None
    region: Region
    start: tuple[float, float]  # periodic-orbit search seed for flow kinds
    stem: str  # filename-safe version of the problem name


def _slug(name: str) -> str:
    out = re.sub(r"[^A-Za-z0-9_.-]+", "-", name).strip("-.")
    return out or "problem"


def build_problem(cfg: Config, region_override: Region | None = None) -> Problem:
    """Instantiate the dynamics named by ``cfg``; ConfigError if unusable."""
    dyn = cfg.dynamics
    name = cfg.name
    system: PlanarField | None = None
    lienard: LienardSpec | None = None
    try:
        if cfg.kind == "map":
            pmap: PlanarMap = MapSpec(
                name,
                dyn["x"],
                dyn["y"],
                dyn.get("inverse_x"),
                dyn.get("inverse_y"),
                declared_region=cfg.region,
            )
        else:
            if cfg.kind == "system":
                system = PeriodicSystem(dyn["x"], dyn["y"], dyn["period"], name=name)
            else:
                lienard, system = build_lienard(
                    dyn["friction"],
                    dyn["restoring"],
                    dyn["forcing"],
                    dyn["period"],
                    name=name,
                )
            kwargs = {}
            if "atol" in dyn:
                kwargs["atol"] = float(dyn["atol"])
            if "rtol" in dyn:
                kwargs["rtol"] = float(dyn["rtol"])
            pmap = TimeTMap(system, cfg.region, **kwargs)
    except ValueError as err:
        # Bad formulas (wrong variables, inconsistent inverse, bad period)
        # are configuration problems, not numerics.
        raise ConfigError(str(err)) from err

    region = region_override or cfg.region or pmap.declared_region
    if region is None:
        raise ConfigError("no region: add a [region] section or pass --region")
    start = (float(dyn.get("start_x", 0.0)), float(dyn.get("start_y", 0.0)))
    return Problem(
        cfg=cfg,
        pmap=pmap,
        system=system,
        lienard=lienard,
        region=region,
        start=start,
        stem=_slug(name),
    )


def _censuses(prob: Problem) -> tuple[FixedPointCensus, FixedPointCensus]:
    grid = prob.cfg.certify.census_grid
    c1 = find_fixed_points(prob.pmap, prob.region, period=1, grid_n=grid)
    c2 = find_fixed_points(prob.pmap, prob.region, period=2, grid_n=grid)
    return c1, c2


def _saddle_records(census: FixedPointCensus) -> list[FixedPointRecord]:
    return [r for r in census.records if r.saddle_kind in _SADDLES]


def _grow_all(
    prob: Problem, saddles: list[FixedPointRecord], budget_override: float | None
) -> list[ManifoldPolyline]:
    cc = prob.cfg.certify
    budget = budget_override if budget_override is not None else cc.manifold_budget
    polylines: list[ManifoldPolyline] = []
    for rec in saddles:
        for grow in (grow_unstable, grow_stable):
            plus, minus = grow(
                prob.pmap, rec, budget=budget, max_windows=cc.manifold_max_windows
            )
            polylines.extend((plus, minus))
    return polylines


def _emit(lines: list[str], out_dir: Path | None, filename: str) -> None:
    print("\n".join(lines))
    if out_dir is not None:
        write_lines(out_dir / filename, lines)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_analyze(prob: Problem, args) -> int:
    census1, census2 = _censuses(prob)
    indices: list[int | None] = []
    for rec in census1.records:
        try:
            indices.append(index_at_point(prob.pmap, rec.location))
        except (FixedPointOnCurveError, WindingBudgetError):
            indices.append(None)
    cc = prob.cfg.certify
    symmetry = detect_symmetry(
        prob.pmap, region=prob.region, samples=cc.symmetry_samples, tol=cc.symmetry_tol
    )
    lines = analysis_text(prob.pmap.name, census1, indices, census2, symmetry)
    if prob.lienard is not None:
        lines.extend(assumption_text(prob.lienard.assumptions))
    _emit(lines, args.out_dir, f"{prob.stem}.analysis.txt")
    return EXIT_OK


def cmd_certify(prob: Problem, args) -> int:
    if prob.lienard is not None and not prob.lienard.assumptions.all_hold:
        # The oscillator was built anyway (its orbits are still orbits), but
        # a refuted standing assumption removes the ground the certificate
        # would stand on, so the verdict is withheld up front.
        refuted = [c.id for c in prob.lienard.assumptions.checks if not c.ok]
        lines = assumption_text(prob.lienard.assumptions)
        lines.append(
            "certification withheld: refuted standing assumption(s) "
            + ", ".join(refuted)
        )
        # no .cert is written -- the certifier never ran
        _emit(lines, args.out_dir, f"{prob.stem}.assumptions.txt")
        return EXIT_NOT_CERTIFIED

    m: PlanarMap = prob.pmap
    region = prob.region
    if prob.system is not None:
        # Certify the return map around its periodic point: conjugate by the
        # translation taking that point to the origin, and move the window
        # the same way so it covers the same set of phase-plane states.
        rec = find_periodic_orbit(prob.system, prob.start)
        cx, cy = float(rec.location[0]), float(rec.location[1])
        m = TranslatedMap(prob.pmap, rec.location)
        region = Region(
            region.x0 - cx, region.x1 - cx, region.y0 - cy, region.y1 - cy
        )
    cert = certify(m, region, config=prob.cfg.certify)
    print("\n".join(certificate_text(cert)))
    if args.out_dir is not None:
        write_lines(args.out_dir / f"{prob.stem}.cert", certificate_lines(cert))
    return EXIT_OK if cert.verdict is CertVerdict.GLOBAL_SADDLE else EXIT_NOT_CERTIFIED


def cmd_portrait(prob: Problem, args) -> int:
    if args.out_dir is None:
        print("portrait needs --out DIR for the SVG", file=sys.stderr)
        return EXIT_CONFIG
    census1, census2 = _censuses(prob)
    saddles = _saddle_records(census1)
    polylines = _grow_all(prob, saddles, args.budget)

    ps = prob.cfg.portrait
    rng = np.random.default_rng(args.seed if args.seed is not None else prob.cfg.seed)
    region = prob.region
    starts = np.column_stack(
        [
            rng.uniform(region.x0, region.x1, ps.orbit_count),
            rng.uniform(region.y0, region.y1, ps.orbit_count),
        ]
    )
    frames = [starts]
    for _ in range(ps.orbit_steps):
        frames.append(prob.pmap.apply_batch(frames[-1]))
    stack = np.stack(frames)  # (steps+1, orbit_count, 2)
    trails = [stack[:, i, :] for i in range(ps.orbit_count)]

    svg = render_portrait(
        prob.pmap.name,
        region,
        ps.width,
        polylines,
        [r.location for r in census1.records],
        [r.location for r in census2.genuine_period2],
        trails,
    )
    svg_path = args.out_dir / f"{prob.stem}.svg"
    with open(svg_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg)
    write_lines(args.out_dir / f"{prob.stem}.manifolds.csv", polyline_csv_lines(polylines))
    print(f"portrait written to {svg_path}")
    print("\n".join(manifold_summary_text(prob.pmap.name, polylines)))
    return EXIT_OK


def cmd_manifolds(prob: Problem, args) -> int:
    census1 = find_fixed_points(
        prob.pmap, prob.region, period=1, grid_n=prob.cfg.certify.census_grid
    )
    saddles = _saddle_records(census1)
    polylines = _grow_all(prob, saddles, args.budget)
    lines = manifold_summary_text(prob.pmap.name, polylines)
    if not saddles:
        lines.append("  (no saddle fixed points in the region; nothing to grow)")
    print("\n".join(lines))
    if args.out_dir is not None:
        write_lines(
            args.out_dir / f"{prob.stem}.manifolds.csv", polyline_csv_lines(polylines)
        )
    return EXIT_OK


def cmd_poincare(prob: Problem, args) -> int:
    if prob.system is None:
        print(
            "poincare needs a flow: use a [system] or [lienard] configuration",
            file=sys.stderr,
        )
        return EXIT_CONFIG
    rec = find_periodic_orbit(prob.system, prob.start)
    mono = monodromy(prob.system, rec.location)
    rate_summary = None
    if hasattr(prob.system, "eigen_rates"):
        xs = np.linspace(prob.region.x0, prob.region.x1, 512)
        lo, hi = prob.system.eigen_rates(xs)
        rate_summary = (float(np.max(lo.real)), float(np.min(hi.real)))
    lines = poincare_text(prob.pmap.name, prob.lienard, rec, mono, rate_summary)
    _emit(lines, args.out_dir, f"{prob.stem}.poincare.txt")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

_COMMANDS = {
    "analyze": (cmd_analyze, "fixed-point census, indices and symmetry report"),
    "certify": (cmd_certify, "run the global-saddle certifier (exit 0 iff certified)"),
    "portrait": (cmd_portrait, "phase portrait SVG plus manifold CSV"),
    "manifolds": (cmd_manifolds, "grow invariant curves and write them as CSV"),
    "poincare": (cmd_poincare, "periodic orbit and return-map data of a flow"),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="saddlekit",
        description="planar map analysis and global-saddle certification",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (handler, help_text) in _COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", required=True, help="problem configuration file")
        sp.add_argument("--out", default=None, help="directory for output files")
        sp.add_argument(
            "--seed", type=int, default=None, help="portrait orbit seed (default: [run] seed)"
        )
        sp.add_argument(
            "--region",
            default=None,
            help="override the region as X0,X1,Y0,Y1 "
            "(write --region=-1,1,-1,1 when X0 is negative)",
        )
        sp.add_argument(
            "--budget",
            type=float,
            default=None,
            help="arclength budget per manifold branch",
        )
        sp.set_defaults(handler=handler)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        override = parse_region_spec(args.region) if args.region else None
        if args.budget is not None and not (args.budget > 0):
            raise ConfigError(f"--budget must be positive, got {args.budget}")
        prob = build_problem(cfg, override)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    args.out_dir = None
    try:
        if args.out is not None:
            args.out_dir = Path(args.out)
            os.makedirs(args.out_dir, exist_ok=True)
        return args.handler(prob, args)
    except (
        IntegrationError,
        PeriodicOrbitNotFound,
        ConsistencyError,
        FixedPointOnCurveError,
        WindingBudgetError,
        ValueError,
    ) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICS
    except OSError as err:
        print(f"cannot write output: {err}", file=sys.stderr)
        return EXIT_NUMERICS


if __name__ == "__main__":
    sys.exit(main())

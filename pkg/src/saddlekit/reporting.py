"""Deterministic renderings of analysis artifacts.

Three output families live here: the machine-readable certificate (flat
``key = value`` lines under the stable ``cert-v1`` schema), human-readable
text reports, and CSV polylines (columns ``branch,idx,x,y``).  Everything is
rendered from explicit fields in a fixed order with pinned float formatting
(17 significant digits for machine output), so identical inputs produce
byte-identical files.
"""

from __future__ import annotations

import numpy as np

from .certify import Certificate
from .fixedpoints import FixedPointCensus, FixedPointRecord
from .flows import AssumptionReport, LienardSpec, MonodromyResult
from .manifolds import ManifoldPolyline
from .symmetry import SymmetryReport

__all__ = [
    "CERT_SCHEMA",
    "g17",
    "certificate_lines",
    "certificate_text",
    "analysis_text",
    "poincare_text",
    "manifold_summary_text",
    "polyline_csv_lines",
    "write_lines",
]

CERT_SCHEMA = "cert-v1"


def g17(v) -> str:
    """A float with 17 significant digits — round-trips exactly."""
    return format(float(v), ".17g")


def _g(v) -> str:
    """Short human-facing float."""
    return format(float(v), ".10g")


def _flag(v) -> str:
    if v is None:
        return "-"
    return "true" if v else "false"


def _point(p) -> str:
    q = np.asarray(p, float).reshape(2)
    return f"{g17(q[0])} {g17(q[1])}"


# ---------------------------------------------------------------------------
# machine-readable certificate
# ---------------------------------------------------------------------------


def certificate_lines(cert: Certificate) -> list[str]:
    """Flat ``key = value`` lines for a certificate, schema ``cert-v1``.

    Keys appear in a fixed order; absent optional values render as ``-``.
    """
    ev = cert.evidence
    out = [
        f"schema = {CERT_SCHEMA}",
        f"map = {ev.get('map', '-')}",
        f"verdict = {cert.verdict.value}",
        f"rule = {cert.rule or '-'}",
        f"conditional = {_flag(cert.conditional)}",
        "component_action = "
        + (cert.component_action.value if cert.component_action else "-"),
        f"region.x0 = {g17(cert.region.x0)}",
        f"region.x1 = {g17(cert.region.x1)}",
        f"region.y0 = {g17(cert.region.y0)}",
        f"region.y1 = {g17(cert.region.y1)}",
        f"region_note = {ev.get('region_note', '-')}",
    ]
    translation = ev.get("translation")
    if translation is not None:
        out.append(f"translation = {_point(translation)}")
    out.append(f"census.p1 = {ev.get('census_p1', '-')}")
    p2 = ev.get("census_p2_genuine")
    out.append(f"census.p2_genuine = {'-' if p2 is None else p2}")
    fp = ev.get("fixed_point")
    if fp is not None:
        out.append(f"fixed_point = {_point(fp)}")
        small, big = ev["multipliers"]
        out.append(f"multiplier.small = {g17(small.real)} {g17(small.imag)}")
        out.append(f"multiplier.big = {g17(big.real)} {g17(big.imag)}")
        out.append(f"saddle_kind = {ev.get('saddle_kind') or '-'}")
    orientation = ev.get("orientation")
    out.append(f"orientation = {orientation or '-'}")
    out.append(f"spectrum_gap = {_flag(ev.get('spectrum_gap_holds'))}")
    sym = ev.get("detected_symmetry", {})
    out.append(f"detected_symmetry.group = {sym.get('group', '-')}")
    out.append(f"detected_symmetry.axis = {sym.get('axis') or '-'}")
    quadrant = ev.get("quadrant_check")
    if quadrant is not None:
        out.append(f"quadrant.passed = {_flag(quadrant['passed'])}")
        out.append(f"quadrant.samples = {quadrant['samples']}")
        out.append(f"quadrant.mismatches = {quadrant['mismatches']}")
    manifolds = ev.get("manifolds")
    if manifolds is not None:
        for branch in sorted(manifolds):
            out.append(f"manifold.{branch} = {manifolds[branch]}")
    contacts = ev.get("contacts")
    out.append(f"contacts = {'-' if contacts is None else contacts}")
    for key in sorted(cert.tolerances):
        out.append(f"tolerance.{key} = {g17(cert.tolerances[key])}")
    out.append(f"hypothesis.count = {len(cert.hypotheses)}")
    for i, h in enumerate(cert.hypotheses):
        out.append(f"hypothesis.{i}.id = {h.id}")
        out.append(f"hypothesis.{i}.status = {h.status.value}")
        out.append(f"hypothesis.{i}.detail = {h.detail}")
        if h.witness is not None:
            out.append(f"hypothesis.{i}.witness = {_point(h.witness)}")
    out.append(f"warning.count = {len(cert.warnings)}")
    out.extend(f"warning.{i} = {w}" for i, w in enumerate(cert.warnings))
    blocked = ev.get("rules_blocked", {})
    out.append(f"blocked.count = {len(blocked)}")
    out.extend(f"blocked.{rule} = {why}" for rule, why in blocked.items())
    notes = ev.get("notes", [])
    out.append(f"note.count = {len(notes)}")
    out.extend(f"note.{i} = {n}" for i, n in enumerate(notes))
    return out


# ---------------------------------------------------------------------------
# human-readable blocks
# ---------------------------------------------------------------------------


def certificate_text(cert: Certificate) -> list[str]:
    ev = cert.evidence
    head = cert.verdict.value + (f" (rule {cert.rule})" if cert.rule else "")
    if cert.conditional:
        head += "  [conditional]"
    out = [
        f"== certificate: {ev.get('map', '?')} ==",
        f"verdict: {head}",
        f"region: [{_g(cert.region.x0)}, {_g(cert.region.x1)}]"
        f" x [{_g(cert.region.y0)}, {_g(cert.region.y1)}]"
        "  (all statuses are sample-based statements about this region)",
    ]
    if cert.component_action is not None:
        out.append(f"component action: {cert.component_action.value}")
    translation = ev.get("translation")
    if translation is not None:
        out.append(
            f"map recentred by translation ({_g(translation[0])}, {_g(translation[1])})"
        )
    out.append("hypotheses:")
    for h in cert.hypotheses:
        line = f"  [{h.status.value}] {h.id}: {h.detail}"
        if h.witness is not None:
            line += f"  witness ({_g(h.witness[0])}, {_g(h.witness[1])})"
        out.append(line)
    if ev.get("manifolds"):
        verdicts = ev["manifolds"]
        out.append(
            "manifold branches: "
            + ", ".join(f"{b}={verdicts[b]}" for b in sorted(verdicts))
        )
    if ev.get("contacts") is not None:
        out.append(f"contact candidates: {ev['contacts']}")
    for w in cert.warnings:
        out.append(f"warning: {w}")
    for n in ev.get("notes", []):
        out.append(f"note: {n}")
    return out


def _record_line(i: int, rec: FixedPointRecord, index: int | None) -> str:
    lo, hi = rec.eigenvalues
    eig = (
        f"{_g(lo.real)}{'' if lo.imag == 0 else _g(lo.imag) + 'j'}, "
        f"{_g(hi.real)}{'' if hi.imag == 0 else _g(hi.imag) + 'j'}"
    )
    line = (
        f"  {i}. ({_g(rec.location[0])}, {_g(rec.location[1])})"
        f"  {rec.saddle_kind.value}  multipliers [{eig}]"
        f"  residual {rec.residual:.2e}"
    )
    if index is not None:
        line += f"  index {index:+d}"
    if rec.note:
        line += f"  ({rec.note})"
    return line


def analysis_text(
    name: str,
    census1: FixedPointCensus,
    indices: list[int | None],
    census2: FixedPointCensus,
    symmetry: SymmetryReport,
) -> list[str]:
    region = census1.region
    out = [
        f"== analysis: {name} ==",
        f"region: [{_g(region.x0)}, {_g(region.x1)}] x [{_g(region.y0)}, {_g(region.y1)}]",
        f"fixed points of the map: {len(census1.records)}",
    ]
    for i, (rec, idx) in enumerate(zip(census1.records, indices), start=1):
        out.append(_record_line(i, rec, idx))
    if census1.singular_skips or census1.imprecise_drops:
        out.append(
            f"  (census skipped {census1.singular_skips} singular Newton lanes, "
            f"dropped {census1.imprecise_drops} imprecise roots)"
        )
    out.append(
        f"fixed points of the second iterate: {len(census2.records)}"
        f" ({len(census2.genuine_period2)} genuinely 2-periodic)"
    )
    for i, rec in enumerate(census2.records, start=1):
        out.append(_record_line(i, rec, None))
    res = ", ".join(f"{k} {symmetry.residuals[k]:.2e}" for k in sorted(symmetry.residuals))
    out.append(
        f"symmetry: {symmetry.group.value}"
        + (f" (axis {symmetry.axis})" if symmetry.axis else "")
        + f"  residuals [{res}] over {symmetry.sample_count} samples, tol {symmetry.tol:g}"
    )
    return out


def poincare_text(
    name: str,
    spec: LienardSpec | None,
    record: FixedPointRecord,
    mono: MonodromyResult,
    rate_summary: tuple[float, float] | None,
) -> list[str]:
    out = [f"== periodic orbit of {name} =="]
    out.append(
        f"periodic point: ({_g(record.location[0])}, {_g(record.location[1])})"
        f"  return-map residual {record.residual:.2e}"
    )
    lo, hi = mono.multipliers
    out.append(
        f"classification: {record.saddle_kind.value}"
        f"  multipliers [{_g(abs(lo))}, {_g(abs(hi))}]"
    )
    dc = mono.det_check
    out.append(
        f"det(monodromy) = {_g(dc.determinant)} vs exp(integrated divergence) = "
        f"{_g(dc.divergence_exponential)}  (relative error {dc.relative_error:.2e})"
    )
    est_lo, est_hi = mono.eigen_integral_estimate
    out.append(
        "exp of integrated instantaneous eigenrates (diagnostic): "
        f"[{_g(abs(est_lo))}, {_g(abs(est_hi))}]"
    )
    if rate_summary is not None:
        lo_max, hi_min = rate_summary
        ok = "holds" if lo_max < 0.0 < hi_min else "FAILS"
        out.append(
            f"instantaneous eigenrate signs along the orbit: {ok} "
            f"(max lower {_g(lo_max)}, min upper {_g(hi_min)})"
        )
    if spec is not None:
        out.extend(assumption_text(spec.assumptions))
        out.append(
            f"comparison levels: g^-1(max forcing) = {_g(spec.lower_level)}, "
            f"g^-1(min forcing) = {_g(spec.upper_level)}"
        )
    return out


def assumption_text(report: AssumptionReport) -> list[str]:
    out = ["standing assumptions (sampled, radius %g):" % report.sample_radius]
    for c in report.checks:
        out.append(f"  [{'ok' if c.ok else 'REFUTED'}] {c.id}: {c.detail}")
    return out


def manifold_summary_text(name: str, polylines: list[ManifoldPolyline]) -> list[str]:
    out = [f"== invariant curves of {name} =="]
    for b in polylines:
        line = (
            f"  {b.branch.value}: {b.verdict.value}, {len(b.points)} points, "
            f"arclength {_g(b.arclength)}"
        )
        if b.grown_with_square:
            line += ", grown with the second iterate"
        if b.note:
            line += f"  ({b.note})"
        out.append(line)
    return out


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def polyline_csv_lines(polylines: list[ManifoldPolyline]) -> list[str]:
    """``branch,idx,x,y`` rows for every polyline, in the order given."""
    out = ["branch,idx,x,y"]
    for b in polylines:
        label = b.branch.value
        for i, (x, y) in enumerate(b.points):
            out.append(f"{label},{i},{g17(x)},{g17(y)}")
    return out


def write_lines(path, lines: list[str]) -> None:
    """Write LF-terminated lines (byte-stable across platforms)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")

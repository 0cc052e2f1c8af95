"""Certification: rule firing, witnesses, surveys, freeness."""

import numpy as np
import pytest

from mapzoo import (
    R3,
    R10,
    arctan_direct,
    arctan_twisted,
    coupled_expansion,
    folded_quartic,
    kinked_two_fixed,
    linear_saddle,
    twisted_cubic,
)
from saddlekit.certify import (
    CertifyConfig,
    CertVerdict,
    ComponentAction,
    Hypothesis,
    HypothesisStatus,
    certify,
    check_free_precondition,
    trivial_dynamics_survey,
)
from saddlekit.degree import Circle
from saddlekit.planarmap import Region


def test_coupled_expansion_fires_d2_gap_direct():
    config = CertifyConfig(declared_symmetry="D2", epsilon=1.0)
    cert = certify(coupled_expansion(), R3, config)
    assert cert.verdict is CertVerdict.GLOBAL_SADDLE
    assert cert.rule == "d2-gap-direct"
    assert cert.component_action is ComponentAction.INVARIANT_OR_INTERCHANGED
    assert all(h.verified for h in cert.rule_hypotheses())
    assert cert.hypothesis("spectrum-gap").evidence.sample_count == 10_000
    assert not cert.conditional
    assert cert.warnings == []


def test_coupled_expansion_quadrant_check_passes():
    config = CertifyConfig(declared_symmetry="D2", epsilon=1.0)
    cert = certify(coupled_expansion(), R3, config)
    q = cert.evidence["quadrant_check"]
    assert q["passed"]
    assert q["samples"] == 400
    assert q["axis_signs"] == (1, 1)  # both axes keep their direction
    assert cert.evidence["contacts"] == 0
    assert cert.evidence["manifolds"] == {
        "UNSTABLE_PLUS": "UNBOUNDED",
        "UNSTABLE_MINUS": "UNBOUNDED",
        "STABLE_PLUS": "UNBOUNDED",
        "STABLE_MINUS": "UNBOUNDED",
    }


def test_twisted_cubic_not_certified_with_period2_witness():
    cert = certify(twisted_cubic(), R3, CertifyConfig())
    assert cert.verdict is CertVerdict.NOT_CERTIFIED
    assert cert.rule is None
    h = cert.hypothesis("fix-f2-trivial")
    assert h.status is HypothesisStatus.REFUTED
    # deterministic witness pick: nearest genuine 2-periodic point, smallest angle
    assert np.allclose(h.witness, [1.0, 0.0], atol=1e-6)
    assert cert.hypothesis("direct-saddle").status is HypothesisStatus.REFUTED
    assert cert.evidence["census_p2_genuine"] == 2
    assert cert.evidence["rules_blocked"]["d2-gap-direct"] == "symmetry D2 not declared in config"


def test_twisted_cubic_bounded_stable_branches_recorded():
    cert = certify(twisted_cubic(), R3, CertifyConfig())
    m = cert.evidence["manifolds"]
    assert m["STABLE_PLUS"] == "BOUNDED"
    assert m["STABLE_MINUS"] == "BOUNDED"
    assert m["UNSTABLE_PLUS"] == "UNBOUNDED"
    # the bounded limits sit on the 2-periodic orbit, far from the unstable
    # family, so no contact candidates appear
    assert cert.evidence["contacts"] == 0


def test_arctan_twisted_fires_fix_f2_trivial():
    cert = certify(arctan_twisted(), R3, CertifyConfig())
    assert cert.verdict is CertVerdict.GLOBAL_SADDLE
    assert cert.rule == "fix-f2-trivial"
    assert cert.component_action is None
    assert cert.hypothesis("fix-f2-trivial").verified
    assert cert.hypothesis("orientation-consistent").verified
    # the reversing determinant refutes orientation-preserving along the way
    assert cert.hypothesis("orientation-preserving").status is HypothesisStatus.REFUTED
    assert not cert.conditional
    lam, mu = cert.evidence["multipliers"]
    assert lam.real == pytest.approx(1.0 / (4.0 + np.pi**2))
    assert mu.real == pytest.approx(-2.0)


def test_arctan_twisted_notes_undeclared_symmetry():
    cert = certify(arctan_twisted(), R3, CertifyConfig())
    assert any("detected symmetry D2" in n for n in cert.evidence["notes"])


def test_arctan_direct_fires_kappa_direct():
    config = CertifyConfig(declared_symmetry="kappa-x")
    cert = certify(arctan_direct(), R3, config)
    assert cert.verdict is CertVerdict.GLOBAL_SADDLE
    assert cert.rule == "kappa-direct"
    assert cert.hypothesis("symmetry-kappa").verified
    assert "invariant axis x" in cert.hypothesis("symmetry-kappa").detail
    assert cert.hypothesis("orientation-preserving").verified
    assert cert.hypothesis("direct-saddle").verified


def test_quartic_small_region_fires_d2_direct_four_invariant():
    region = Region(-0.9, 0.9, -0.9, 0.9)
    cert = certify(folded_quartic(), region, CertifyConfig(declared_symmetry="D2"))
    assert cert.verdict is CertVerdict.GLOBAL_SADDLE
    assert cert.rule == "d2-direct"
    assert cert.component_action is ComponentAction.FOUR_INVARIANT
    assert cert.evidence["quadrant_check"]["passed"]
    # the stable branches die at the fold (no preimage past the first
    # coordinate's maximum), so the certificate is conditional
    assert cert.conditional
    m = cert.evidence["manifolds"]
    assert m["UNSTABLE_PLUS"] == "UNBOUNDED"
    assert m["STABLE_PLUS"] == "BUDGET_EXHAUSTED"
    assert any("budget exhausted" in w for w in cert.warnings)


def test_quartic_big_region_not_certified():
    # on [-10, 10]^2 the determinant changes sign across |x| = 1, so no rule
    # that needs a (one-sided or two-sided) diffeomorphism proxy survives
    cert = certify(folded_quartic(), R10, CertifyConfig(declared_symmetry="D2"))
    assert cert.verdict is CertVerdict.NOT_CERTIFIED
    h = cert.hypothesis("orientation-consistent")
    assert h.status is HypothesisStatus.REFUTED
    assert abs(h.witness[0]) > 1.0
    assert cert.hypothesis("orientation-preserving").status is HypothesisStatus.REFUTED


def test_linear_saddle_fires_unique_direct():
    cert = certify(linear_saddle(), R3, CertifyConfig())
    assert cert.verdict is CertVerdict.GLOBAL_SADDLE
    assert cert.rule == "unique-direct"
    assert set(cert.evidence["manifolds"].values()) == {"UNBOUNDED"}
    assert not cert.conditional


def test_census_gap_inconsistency_yields_warning():
    cert = certify(kinked_two_fixed(), R3, CertifyConfig(epsilon=0.4))
    assert cert.verdict is CertVerdict.NOT_CERTIFIED
    assert cert.hypothesis("unique-fixed-point").status is HypothesisStatus.REFUTED
    assert cert.hypothesis("spectrum-gap").verified
    assert any("census found 2 fixed points" in w for w in cert.warnings)
    assert cert.evidence["rules_blocked"]["gap-direct"] == (
        "period-1 census did not find exactly one fixed point"
    )


def test_no_fixed_point_in_region_unresolved():
    cert = certify(linear_saddle(), Region(2.0, 3.0, 2.0, 3.0), CertifyConfig())
    assert cert.verdict is CertVerdict.NOT_CERTIFIED
    assert cert.hypothesis("unique-fixed-point").status is HypothesisStatus.UNRESOLVED
    assert cert.evidence["fixed_point"] is None
    assert cert.evidence["manifolds"] is None


def test_skipping_growth_downgrades_to_conditional():
    cert = certify(linear_saddle(), R3, CertifyConfig(grow_manifolds=False))
    assert cert.verdict is CertVerdict.GLOBAL_SADDLE
    assert cert.conditional
    assert any("skipped by config" in w for w in cert.warnings)
    assert cert.evidence["manifolds"] is None


def test_certify_is_deterministic():
    config = CertifyConfig(declared_symmetry="D2", epsilon=1.0)
    a = certify(coupled_expansion(), R3, config)
    b = certify(coupled_expansion(), R3, config)
    assert a.rule == b.rule
    assert [h.status for h in a.hypotheses] == [h.status for h in b.hypotheses]
    assert [h.detail for h in a.hypotheses] == [h.detail for h in b.hypotheses]
    assert np.array_equal(a.evidence["fixed_point"], b.evidence["fixed_point"])


def test_refuted_hypothesis_requires_witness():
    with pytest.raises(ValueError, match="witness"):
        Hypothesis("direct-saddle", HypothesisStatus.REFUTED, "broken")


def test_config_validation():
    with pytest.raises(ValueError, match="declared_symmetry"):
        CertifyConfig(declared_symmetry="Z5")
    with pytest.raises(ValueError, match="epsilon"):
        CertifyConfig(epsilon=-1.0)


def test_free_precondition_flags_index_one():
    report = check_free_precondition(
        twisted_cubic(), [Circle((0.0, 0.0), 0.5), Circle((5.0, 5.0), 0.5)]
    )
    assert [e.index for e in report.entries] == [1, 0]
    assert [e.flagged for e in report.entries] == [True, False]
    assert not report.holds


def test_free_precondition_holds_for_linear_saddle():
    report = check_free_precondition(linear_saddle(), [Circle((0.0, 0.0), 1.0)])
    assert report.entries[0].index == -1
    assert not report.entries[0].flagged
    assert report.holds


def test_survey_coupled_expansion_is_trivial():
    summary = trivial_dynamics_survey(coupled_expansion(), R3, n_points=500)
    allowed = {"CONVERGES_TO_FIXED", "ESCAPES"}
    assert set(summary.omega_counts) <= allowed
    assert set(summary.alpha_counts) <= allowed
    assert summary.trivial_on_samples
    assert summary.n_points == 500


def test_survey_highlights_period2_near_twisted_orbit():
    summary = trivial_dynamics_survey(
        twisted_cubic(), Region(0.9, 1.1, -0.1, 0.1), n_points=40
    )
    hits = [
        h
        for h in summary.highlights
        if h.direction == "alpha" and h.verdict == "CONVERGES_TO_PERIOD2"
    ]
    assert hits
    pair = np.asarray(hits[0].target)
    assert np.allclose(pair, [[-1.0, 0.0], [1.0, 0.0]], atol=1e-6)


def test_survey_linear_saddle_clean():
    summary = trivial_dynamics_survey(linear_saddle(), R3, n_points=200)
    assert set(summary.omega_counts) <= {"CONVERGES_TO_FIXED", "ESCAPES"}
    assert set(summary.alpha_counts) <= {"CONVERGES_TO_FIXED", "ESCAPES"}
    assert summary.trivial_on_samples

import numpy as np
import pytest
from mapzoo import (
    R3,
    R10,
    arctan_direct,
    coupled_expansion,
    folded_quartic,
    kinked_two_fixed,
    linear_saddle,
    twisted_cubic,
)

from saddlekit.fixedpoints import (
    ConsistencyError,
    OrientationKind,
    SaddleKind,
    assert_unique_under_gap,
    classify_local,
    eig2,
    find_fixed_points,
    orientation,
    spectrum_gap,
)
from saddlekit.planarmap import MapSpec, Region


def test_census_twisted_cubic_period_two():
    census = find_fixed_points(twisted_cubic(), R3, period=2)
    assert np.allclose(census.locations(), [[-1, 0], [0, 0], [1, 0]], atol=1e-9)
    assert all(r.residual <= 1e-10 for r in census)
    assert all(r.period == 2 for r in census)
    genuine = np.array([r.location for r in census.genuine_period2])
    assert np.allclose(genuine, [[-1, 0], [1, 0]], atol=1e-9)


def test_census_coupled_expansion_period_one():
    census = find_fixed_points(coupled_expansion(), R10, period=1)
    assert len(census) == 1
    assert np.allclose(census[0].location, [0, 0], atol=1e-10)


def test_census_linear_saddle():
    census = find_fixed_points(linear_saddle(), R3, period=1)
    assert len(census) == 1
    assert np.allclose(census[0].location, [0, 0], atol=1e-12)
    assert census[0].saddle_kind is SaddleKind.DIRECT_SADDLE


def test_period_one_census_is_contained_in_period_two():
    m = twisted_cubic()
    fix1 = find_fixed_points(m, R3, period=1).locations()
    fix2 = find_fixed_points(m, R3, period=2).locations()
    for p in fix1:
        assert np.linalg.norm(fix2 - p, axis=1).min() <= 1e-7


def test_census_counts_singular_seeds():
    # f - id vanishes on the whole diagonal and its Newton system is singular
    # everywhere, so off-diagonal seeds must be skipped and counted
    m = MapSpec("diag-degenerate", "x + (x-y)^2", "y + (x-y)^2")
    census = find_fixed_points(m, Region(-1, 1, -1, 1), period=1, grid_n=8)
    assert census.singular_skips > 0
    assert all(abs(r.location[0] - r.location[1]) < 1e-9 for r in census)


def test_classify_twisted_origin():
    rec = classify_local(twisted_cubic(), (0.0, 0.0))
    assert rec.saddle_kind is SaddleKind.TWISTED_SADDLE
    assert np.allclose(rec.eigenvalues, [-0.5, -2.0])


def test_classify_folded_quartic_origin():
    rec = classify_local(folded_quartic(), (0.0, 0.0))
    assert rec.saddle_kind is SaddleKind.DIRECT_SADDLE
    assert np.allclose(rec.eigenvalues, [0.5, 2.0])


def test_classify_plain_direct_saddle():
    rec = classify_local(MapSpec("plain", "x/2", "2*y"), (0.0, 0.0))
    assert rec.saddle_kind is SaddleKind.DIRECT_SADDLE
    assert rec.eigenvalues == (0.5 + 0j, 2.0 + 0j)


def test_classify_rejects_non_fixed_point():
    with pytest.raises(ValueError, match="not a fixed point"):
        classify_local(linear_saddle(), (1.0, 1.0))


def test_classify_complex_multipliers_are_not_saddles():
    rot = MapSpec("rot", "x*cos(1) - y*sin(1)", "x*sin(1) + y*cos(1)")
    rec = classify_local(rot, (0.0, 0.0))
    assert rec.saddle_kind is SaddleKind.NOT_SADDLE
    assert "complex" in rec.note


def test_classify_near_nonhyperbolic_is_flagged():
    m = MapSpec("marginal", "x*(1 + 1/10000000)", "y/2")
    rec = classify_local(m, (0.0, 0.0))
    assert rec.saddle_kind is SaddleKind.NOT_SADDLE
    assert rec.note == "near-nonhyperbolic"


def test_eig2_sorts_by_modulus_then_deterministically():
    assert eig2([[0.0, -1.0], [1.0, 0.0]]) == (-1j, 1j)
    assert eig2([[2.0, 0.0], [0.0, -0.5]]) == (-0.5 + 0j, 2.0 + 0j)


def test_spectrum_gap_holds_for_coupled_expansion():
    rep = spectrum_gap(coupled_expansion(), R10, epsilon=1.0, samples=400)
    assert rep.holds_on_samples
    assert rep.violation_points == []
    assert rep.sample_count == 400


def test_spectrum_gap_violated_everywhere():
    m = MapSpec("slow-expand", "1.05*x", "y/2")
    rep = spectrum_gap(m, R3, epsilon=0.1, samples=100)
    assert not rep.holds_on_samples
    assert len(rep.violation_points) == 100
    assert all(abs(e - 1.05) < 1e-12 for _, e in rep.violation_points)


def test_spectrum_gap_holds_for_twisted_cubic():
    # the whole sampled spectrum is negative
    rep = spectrum_gap(twisted_cubic(), R3, epsilon=0.5, samples=400)
    assert rep.holds_on_samples


def test_spectrum_gap_rejects_bad_epsilon():
    with pytest.raises(ValueError):
        spectrum_gap(linear_saddle(), R3, epsilon=0.0)


def test_orientation_verdicts():
    assert orientation(twisted_cubic(), R3).kind is OrientationKind.PRESERVING
    assert orientation(coupled_expansion(), R10).kind is OrientationKind.PRESERVING
    flip = MapSpec("flip", "x", "0 - y")
    assert orientation(flip, R3).kind is OrientationKind.REVERSING


def test_orientation_mixed_carries_witnesses():
    rep = orientation(folded_quartic(), R10)
    assert rep.kind is OrientationKind.MIXED
    (p_hi, d_hi), (p_lo, d_lo) = rep.witnesses
    assert d_hi > 0 > d_lo


def test_gap_uniqueness_cross_check_raises():
    m = kinked_two_fixed()
    region = Region(-2, 2, -2, 2)
    census = find_fixed_points(m, region, period=1)
    assert len(census) == 2
    gap = spectrum_gap(m, region, epsilon=0.4, samples=400)
    assert gap.holds_on_samples  # the samples never land on the kink
    with pytest.raises(ConsistencyError, match="2 fixed points"):
        assert_unique_under_gap(census, gap)


def test_gap_uniqueness_cross_check_passes_quietly():
    census = find_fixed_points(coupled_expansion(), R10, period=1)
    gap = spectrum_gap(coupled_expansion(), R10, epsilon=1.0)
    assert_unique_under_gap(census, gap)  # should not raise


def test_gap_uniqueness_needs_period_one():
    census = find_fixed_points(twisted_cubic(), R3, period=2)
    gap = spectrum_gap(twisted_cubic(), R3, epsilon=0.5)
    with pytest.raises(ValueError):
        assert_unique_under_gap(census, gap)

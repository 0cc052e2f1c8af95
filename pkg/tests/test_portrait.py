import numpy as np
from mapzoo import R3, linear_saddle

from saddlekit.fixedpoints import classify_local
from saddlekit.manifolds import grow_stable, grow_unstable
from saddlekit.planarmap import Region
from saddlekit.portrait import (
    STABLE_COLOR,
    UNSTABLE_COLOR,
    render_portrait,
)


def _scene():
    m = linear_saddle()
    rec = classify_local(m, (0.0, 0.0))
    up, um = grow_unstable(m, rec, budget=10.0)
    sp, sm = grow_stable(m, rec, budget=10.0)
    trails = [np.array([[0.5, 0.5], [1.0, 0.25], [2.0, 0.125]])]
    return render_portrait(
        "linear-saddle", R3, 480, [up, um, sp, sm], [rec.location], [], trails
    )


def test_portrait_is_a_complete_svg():
    svg = _scene()
    assert svg.startswith("<svg ") and svg.rstrip().endswith("</svg>")
    assert 'width="480.00"' in svg


def test_portrait_styles_branches_by_stability():
    svg = _scene()
    assert UNSTABLE_COLOR in svg and STABLE_COLOR in svg
    # manifold polylines, fixed-point marker, orbit dots all present
    assert "<polyline " in svg
    assert 'r="4.00"' in svg  # fixed-point dot
    assert "fill-opacity" in svg  # fading orbit dots


def test_periodic_points_get_ring_markers():
    svg = render_portrait("rings", R3, 480, [], [], [np.array([1.0, 0.0])], [])
    assert 'fill="none"' in svg and 'r="5.00"' in svg


def test_orbit_dots_fade_and_skip_outside():
    region = Region(-1.0, 1.0, -1.0, 1.0)
    trail = np.array([[0.0, 0.0], [0.5, 0.5], [5.0, 5.0], [np.inf, np.inf]])
    svg = render_portrait("fade", region, 480, [], [], [], [trail])
    # two in-region dots with decreasing opacity, escapees dropped
    ops = [float(s.split('"')[1]) for s in svg.split("fill-opacity=")[1:]]
    assert len(ops) == 2 and ops[0] > ops[1]


def test_nonfinite_manifold_points_split_into_runs():
    from saddlekit.manifolds import BranchLabel, ManifoldPolyline, ManifoldVerdict

    pts = np.array([[0.0, 0.0], [0.5, 0.0], [np.inf, np.inf], [0.0, 0.5], [0.0, 0.6]])
    poly = ManifoldPolyline(
        branch=BranchLabel.UNSTABLE_PLUS,
        points=pts,
        verdict=ManifoldVerdict.UNBOUNDED,
        limit_set_estimate=None,
        arclength=1.0,
        grown_with_square=False,
        branch_swap_under_f=False,
        note="",
    )
    svg = render_portrait("split", R3, 480, [poly], [], [], [])
    assert svg.count("<polyline ") == 2


def test_render_is_deterministic():
    assert _scene() == _scene()


def test_title_is_escaped():
    svg = render_portrait("a<b&c", R3, 480, [], [], [], [])
    assert "a&lt;b&amp;c" in svg and "a<b" not in svg

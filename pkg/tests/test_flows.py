import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from saddlekit.certify import CertifyConfig, CertVerdict, certify
from saddlekit.expressions import parse
from saddlekit.fixedpoints import SaddleKind, classify_local
from saddlekit.flows import (
    CachedAntiderivative,
    IntegrationError,
    ORBIT_CLOSURE_TOL,
    PeriodicOrbitNotFound,
    PeriodicSystem,
    build_lienard,
    find_periodic_orbit,
    integrate,
    monodromy,
    sample_orbit,
    time_T_map,
)
from saddlekit.planarmap import Region, TranslatedMap

TWO_PI = 2.0 * math.pi

# x'' + x' - x = sin t in planar form: a linear system u' = A u + (0, sin t),
# so everything about it is available in closed form for cross-checking.
FORCED_A = np.array([[-1.0, 1.0], [1.0, 0.0]])
FORCED_ORBIT_POINT = (-0.2, -0.6)  # the unique 2*pi-periodic solution at t = 0
# e^(2*pi*lambda) for lambda = (-1 -/+ sqrt(5))/2
MULT_SMALL = 3.8440176410469936e-05
MULT_BIG = 48.58049327784447
DET_ORACLE = 0.001867442731707988  # e^(-2*pi)


def forced_linear():
    spec, system = build_lienard("1", "-x", "sin(t)", TWO_PI)
    return spec, system


def forced_solution(q, t):
    """Closed form for the forced linear oscillator from q at time 0."""
    part0 = np.array(FORCED_ORBIT_POINT)
    part = np.array(
        [-0.2 * math.cos(t) - 0.4 * math.sin(t), -0.6 * math.cos(t) - 0.2 * math.sin(t)]
    )
    return expm(FORCED_A * t) @ (np.asarray(q, float) - part0) + part


# ---------------------------------------------------------------------------
# integrate
# ---------------------------------------------------------------------------


def test_integrate_decoupled_exponentials():
    sys_ = PeriodicSystem("x", "0 - y", 1.0)
    out = integrate(sys_, (1.0, 1.0), 0.0, math.log(2.0))
    assert abs(out[0] - 2.0) <= 1e-9
    assert abs(out[1] - 0.5) <= 1e-9


def test_integrate_matches_closed_form_forced_oscillator():
    _, sys_ = forced_linear()
    q = (0.7, -1.1)
    for t in (0.5, 2.0, TWO_PI):
        got = integrate(sys_, q, 0.0, t)
        assert np.linalg.norm(got - forced_solution(q, t)) <= 1e-8


def test_integrate_cross_checked_against_scipy():
    # cubic friction has the exact antiderivative x^3, so the planar form is
    # polynomial and an independent integrator can run on the same field
    _, sys_ = build_lienard("3*x*x", "-x", "cos(t)", TWO_PI)
    q = (0.3, -0.2)
    got = integrate(sys_, q, 0.0, 5.0)
    ref = solve_ivp(
        lambda t, u: [u[1] - u[0] ** 3, math.cos(t) + u[0]],
        (0.0, 5.0),
        q,
        method="DOP853",
        rtol=1e-12,
        atol=1e-12,
    )
    assert np.linalg.norm(got - ref.y[:, -1]) <= 1e-8


def test_integrate_reverse_time_roundtrip():
    # over [0, 1]; a full period would put a factor e^(2*pi*sqrt(5)) ~ 1e6 of
    # saddle conditioning between the two legs and test nothing but that
    _, sys_ = forced_linear()
    q = np.array([1.3, 0.4])
    fwd = integrate(sys_, q, 0.0, 1.0)
    back = integrate(sys_, fwd, 1.0, 0.0)
    assert np.linalg.norm(back - q) <= 1e-9


def test_integrate_escape_guard_raises():
    sys_ = PeriodicSystem("x*x", "0", 1.0)  # blows up at t = 1 from x = 1
    with pytest.raises(IntegrationError, match="escaped"):
        integrate(sys_, (1.0, 0.0), 0.0, 2.0)


def test_integrate_rejects_nonfinite_start():
    sys_ = PeriodicSystem("x", "0 - y", 1.0)
    with pytest.raises(IntegrationError, match="initial state"):
        integrate(sys_, (math.nan, 0.0), 0.0, 1.0)


def test_integrate_raises_where_field_is_undefined():
    sys_ = PeriodicSystem("sqrt(x)", "0", 1.0)
    with pytest.raises(IntegrationError, match="not finite"):
        integrate(sys_, (-1.0, 0.0), 0.0, 1.0)


def test_sample_orbit_traces_one_period():
    _, sys_ = forced_linear()
    times, pts = sample_orbit(sys_, FORCED_ORBIT_POINT, 64)
    assert times.shape == (65,) and pts.shape == (65, 2)
    assert times[0] == 0.0 and times[-1] == TWO_PI
    assert np.linalg.norm(pts[-1] - pts[0]) <= 1e-8  # periodic orbit closes
    for i in (7, 33):
        assert np.linalg.norm(pts[i] - forced_solution(pts[0], times[i])) <= 1e-8


# ---------------------------------------------------------------------------
# the period return map
# ---------------------------------------------------------------------------


def test_time_map_of_decoupled_field_is_diagonal():
    m = time_T_map(PeriodicSystem("x", "0 - y", math.log(2.0), name="diag"))
    assert m.name == "diag.time-T"
    P = np.array([[1.0, 1.0], [-0.4, 2.0]])
    Q, J = m.apply_and_jacobian_batch(P)
    assert np.allclose(Q, P * [2.0, 0.5], atol=1e-9)
    assert np.allclose(J, [np.diag([2.0, 0.5])] * 2, atol=1e-9)
    assert m.has_exact_inverse
    assert np.allclose(m.exact_inverse_batch(Q), P, atol=1e-9)


def test_time_map_jacobian_matches_finite_differences():
    _, sys_ = forced_linear()
    m = time_T_map(sys_)
    P = np.array([[0.3, -0.4], [-1.0, 0.7]])
    _, J = m.apply_and_jacobian_batch(P)
    h = 1e-6
    for a, row in enumerate(P):
        for c in range(2):
            e = np.zeros(2)
            e[c] = h
            col = (m.apply_batch([row + e])[0] - m.apply_batch([row - e])[0]) / (2.0 * h)
            assert np.max(np.abs(J[a][:, c] - col)) <= 1e-6


def test_time_map_freezes_escapes_without_stalling_the_batch():
    m = time_T_map(PeriodicSystem("x*x", "0 - y", 1.0))
    out = m.apply_batch([[5.0, 0.5], [0.1, 0.2]])  # first lane blows up at t = 0.2
    assert np.all(np.isinf(out[0]))
    assert abs(out[1, 0] - 1.0 / 9.0) <= 1e-9  # 1/(1/0.1 - 1)
    assert abs(out[1, 1] - 0.2 * math.e**-1) <= 1e-9


def test_time_map_keeps_escaped_and_undefined_inputs_apart():
    m = time_T_map(PeriodicSystem("x", "0 - y", 1.0))
    out = m.apply_batch([[2e9, 0.0], [math.nan, 0.0], [1.0, 1.0]])
    assert np.all(np.isinf(out[0]))  # beyond the guard going in: still escape
    assert np.all(np.isnan(out[1]))  # undefined going in: stays undefined
    assert np.isfinite(out[2]).all()


def test_time_map_is_deterministic():
    _, sys_ = forced_linear()
    m = time_T_map(sys_)
    P = np.random.default_rng(11).uniform(-2.0, 2.0, (17, 2))
    assert np.array_equal(m.apply_batch(P), m.apply_batch(P))


def test_odd_cubic_time_map_commutes_with_both_reflections():
    m = time_T_map(PeriodicSystem("x - x*x*x", "0 - y + y*y*y", 0.5))
    P = np.random.default_rng(3).uniform(-0.8, 0.8, (50, 2))
    base = m.apply_batch(P)
    assert np.max(np.abs(m.apply_batch(-P) + base)) <= 1e-8
    flip = P * [1.0, -1.0]
    assert np.max(np.abs(m.apply_batch(flip) - base * [1.0, -1.0])) <= 1e-8
    rec = classify_local(m, (0.0, 0.0))
    assert rec.saddle_kind is SaddleKind.DIRECT_SADDLE
    assert abs(rec.eigenvalues[0] - math.exp(-0.5)) <= 1e-9
    assert abs(rec.eigenvalues[1] - math.exp(0.5)) <= 1e-9


# ---------------------------------------------------------------------------
# monodromy
# ---------------------------------------------------------------------------


def test_monodromy_matches_matrix_exponential():
    _, sys_ = forced_linear()
    res = monodromy(sys_, FORCED_ORBIT_POINT)
    assert res.closure_residual <= ORBIT_CLOSURE_TOL
    assert np.allclose(res.matrix, expm(FORCED_A * TWO_PI), rtol=1e-8, atol=1e-10)
    lo, hi = res.multipliers
    assert abs(lo.imag) <= 1e-12 and abs(hi.imag) <= 1e-12
    assert abs(lo.real - MULT_SMALL) <= 1e-8 * MULT_SMALL
    assert abs(hi.real - MULT_BIG) <= 1e-8 * MULT_BIG
    # the frozen targets are e^(2*pi*lambda) for the field's eigenrates
    assert abs(MULT_BIG - math.exp(TWO_PI * (math.sqrt(5.0) - 1.0) / 2.0)) <= 1e-10
    dc = res.det_check
    assert abs(dc.determinant - DET_ORACLE) <= 1e-6 * DET_ORACLE
    assert dc.relative_error <= 1e-6
    assert abs(dc.determinant - dc.divergence_exponential) <= 1e-6 * dc.determinant
    # constant coefficients: integrated-eigenrate exponentials are the
    # multipliers themselves, so the comparison column must agree here
    est = res.eigen_integral_estimate
    assert abs(est[0] - lo) <= 1e-6 * abs(lo)
    assert abs(est[1] - hi) <= 1e-6 * abs(hi)


def test_monodromy_of_autonomous_field_at_rest_point():
    res = monodromy(PeriodicSystem("x", "0 - y", math.log(2.0)), (0.0, 0.0))
    lo, hi = res.multipliers
    assert abs(lo - 0.5) <= 1e-9 and abs(hi - 2.0) <= 1e-9
    est = res.eigen_integral_estimate
    assert abs(est[0] - 0.5) <= 1e-9 and abs(est[1] - 2.0) <= 1e-9
    assert abs(res.det_check.determinant - 1.0) <= 1e-9


def test_monodromy_requires_a_closed_orbit():
    _, sys_ = forced_linear()
    with pytest.raises(ValueError, match="period"):
        monodromy(sys_, (0.5, 0.5))


# ---------------------------------------------------------------------------
# cached antiderivative
# ---------------------------------------------------------------------------


def test_antiderivative_matches_atan():
    F = CachedAntiderivative(parse("1/(1 + x*x)"))
    xs = np.array([0.1, 0.37, -2.89, 7.513, -0.001, 19.99])
    assert np.max(np.abs(F(xs) - np.arctan(xs))) <= 1e-9
    val = F(1.0)
    assert isinstance(val, float) and abs(val - math.atan(1.0)) <= 1e-10


def test_antiderivative_is_exact_for_polynomials():
    F = CachedAntiderivative(parse("3*x*x"))
    xs = np.array([-1.7, 0.0, 0.26, 4.081])
    assert np.max(np.abs(F(xs) - xs**3)) <= 1e-8


def test_antiderivative_handles_nonfinite_and_far_queries():
    F = CachedAntiderivative(parse("1/(1 + x*x)"))
    out = F(np.array([math.nan, 1.0, math.inf]))
    assert np.isnan(out[0]) and np.isnan(out[2])
    assert abs(out[1] - math.atan(1.0)) <= 1e-10
    # beyond the knot cap the base saturates; the value stays finite
    assert math.isfinite(F(1e6))
    assert F.__call__(np.array([])).shape == (0,)


# ---------------------------------------------------------------------------
# build checks
# ---------------------------------------------------------------------------


def test_build_reports_all_assumptions_hold():
    spec, sys_ = forced_linear()
    assert spec.assumptions.all_hold
    assert {c.id for c in spec.assumptions.checks} == {
        "forcing-periodic",
        "friction-nonnegative",
        "restoring-decreasing",
        "restoring-linear-growth",
        "comparison-levels",
    }
    assert spec.lower_level == pytest.approx(-1.0, abs=1e-9)
    assert spec.upper_level == pytest.approx(1.0, abs=1e-9)
    assert spec.assumptions.growth_fit == pytest.approx((0.0, 1.0), abs=1e-9)
    assert abs(spec.antiderivative(2.5) - 2.5) <= 1e-9  # F(x) = x for unit friction
    assert spec.period == TWO_PI and sys_.period == TWO_PI


def test_build_flags_negative_friction_with_witness():
    spec, _ = build_lienard("0 - 1", "-x", "sin(t)", TWO_PI)
    c = spec.assumptions.check("friction-nonnegative")
    assert not c.ok and c.witness is not None
    assert not spec.assumptions.all_hold


def test_build_flags_increasing_restoring_force():
    spec, _ = build_lienard("1", "x", "sin(t)", TWO_PI)
    c = spec.assumptions.check("restoring-decreasing")
    assert not c.ok
    lo, hi = c.witness
    assert lo < hi
    # with g increasing the comparison levels come out inverted
    assert not spec.assumptions.check("comparison-levels").ok
    assert spec.lower_level > spec.upper_level


def test_build_flags_aperiodic_forcing():
    spec, _ = build_lienard("1", "-x", "sin(t)", math.pi)
    c = spec.assumptions.check("forcing-periodic")
    assert not c.ok and c.witness is not None


def test_build_notes_sub_period_repeats():
    spec, _ = build_lienard("1", "-x", "sin(2*t)", TWO_PI)
    c = spec.assumptions.check("forcing-periodic")
    assert c.ok and "T/2" in c.detail


def test_build_rejects_formula_in_the_wrong_variable():
    with pytest.raises(ValueError, match="friction"):
        build_lienard("y", "-x", "sin(t)", TWO_PI)
    with pytest.raises(ValueError, match="period"):
        build_lienard("1", "-x", "sin(t)", 0.0)


def test_eigen_rates_straddle_zero_under_the_assumptions():
    _, sys_ = forced_linear()
    _, pts = sample_orbit(sys_, FORCED_ORBIT_POINT, 64)
    lo, hi = sys_.eigen_rates(pts[:, 0])
    assert np.max(np.abs(lo.imag)) == 0.0 and np.max(np.abs(hi.imag)) == 0.0
    assert lo.real.max() < 0.0 < hi.real.min()
    # for constant coefficients these are the golden-ratio pair
    assert np.allclose(hi.real, (math.sqrt(5.0) - 1.0) / 2.0, atol=1e-12)


# ---------------------------------------------------------------------------
# locating the periodic orbit and certifying its return map
# ---------------------------------------------------------------------------


def test_find_periodic_orbit_converges_from_the_origin():
    _, sys_ = forced_linear()
    rec = find_periodic_orbit(sys_, (0.0, 0.0))
    assert np.linalg.norm(rec.location - FORCED_ORBIT_POINT) <= 1e-9
    assert rec.saddle_kind is SaddleKind.DIRECT_SADDLE
    assert rec.period == 1


def test_find_periodic_orbit_reports_failure():
    drift = PeriodicSystem("1", "0", 1.0)  # the return map is a translation
    with pytest.raises(PeriodicOrbitNotFound):
        find_periodic_orbit(drift, (0.0, 0.0))


def test_recentred_return_map_certifies_as_global_saddle():
    _, sys_ = forced_linear()
    rec = find_periodic_orbit(sys_, (0.0, 0.0))
    shifted = TranslatedMap(time_T_map(sys_), rec.location)
    cert = certify(shifted, Region(-3.0, 3.0, -3.0, 3.0), CertifyConfig(census_grid=24))
    assert cert.verdict is CertVerdict.GLOBAL_SADDLE
    assert cert.rule == "unique-direct"
    assert cert.warnings == []
    assert np.allclose(cert.evidence["translation"], rec.location)

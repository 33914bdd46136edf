import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from hkwave.fourier import bump_profile, standard_bump
from hkwave.rootsys import build_space
from hkwave.wave import (CauchyProblem, RangeError, closed_form_s3, euclidean_mean_value,
                         exponential_estimate_check, huygens_report, initial_condition_defects,
                         psi_rank_one, solve_contour, solve_euclidean, solve_reduction,
                         solve_series, spectral_energy, trajectory)


@pytest.fixture(scope="module")
def s3_problem():
    return CauchyProblem.standard(build_space("s3"), 0.2, t_max=0.6, t_steps=6)


@pytest.fixture(scope="module")
def s5_problem():
    return CauchyProblem.standard(build_space("s5"), 0.2, t_max=0.6, t_steps=6)


@pytest.fixture(scope="module")
def su3_problem():
    return CauchyProblem.standard(build_space("su3"), 0.2, t_max=0.4, t_steps=2, N=256)


# -- Euclidean building blocks ------------------------------------------------

def test_mean_value_of_constant():
    one = lambda P: np.ones(P.shape[:-1])
    for n in (1, 2, 3, 4):
        assert euclidean_mean_value(one, np.full(n, 0.3), 1.7) == pytest.approx(1.0)


def test_mean_value_one_dimension():
    g = lambda P: np.sin(3 * P[..., 0]) + P[..., 0] ** 2
    X, r = 0.4, 0.9
    ref = 0.5 * (g(np.array([[X + r]])) + g(np.array([[X - r]])))[0]
    assert euclidean_mean_value(g, np.array([X]), r) == pytest.approx(ref)


@settings(max_examples=25, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(0, 3))
def test_mean_value_of_linear_function_in_the_plane(a, b, x, y, r):
    g = lambda P: a * P[..., 0] + b * P[..., 1] + 1.0
    assert euclidean_mean_value(g, np.array([x, y]), r) == pytest.approx(a * x + b * y + 1.0,
                                                                        abs=1e-12)


def test_negative_radius_rejected():
    with pytest.raises(ValueError):
        euclidean_mean_value(lambda P: P[..., 0], np.zeros(2), -1.0)


def test_euclidean_zero_datum():
    zero = lambda P: np.zeros(P.shape[:-1])
    for n in (1, 2, 3):
        v = solve_euclidean(zero, n, 0.5)
        assert np.all(v(np.full((2, n), 0.1)) == 0)


def test_euclidean_one_dimension_interior_gap():
    eps, t = 0.3, 1.0
    g = lambda P: bump_profile(P[..., 0], eps)
    v = solve_euclidean(g, 1, t)
    x = np.linspace(-0.5, 0.5, 11)[:, None]
    vals = v(x)
    assert vals.shape == (11,)
    # the derivative (g(x+t) - g(x-t))/2 vanishes on |x| < t - eps
    assert np.ptp(vals) < 1e-12
    total = quad(lambda s: math.exp(-eps ** 2 / (eps ** 2 - s * s)), -eps, eps)[0]
    assert vals[0] == pytest.approx(0.5 * total, rel=1e-10)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_euclidean_polynomial_datum(n):
    # v = t|X|^2 + 2n t^3/6 solves the Cauchy problem with v_t(0) = |X|^2
    g = lambda P: np.sum(P ** 2, axis=-1)
    t = 0.35
    X = np.array([[0.2] * n, [0.5] + [0.0] * (n - 1)])
    ref = t * np.sum(X ** 2, axis=-1) + 2 * n * t ** 3 / 6
    assert np.allclose(solve_euclidean(g, n, t)(X), ref, rtol=1e-7)


def test_euclidean_three_dimensions_radial_oracle():
    eps, t = 0.4, 0.25
    prof = lambda s: math.exp(-eps ** 2 / (eps ** 2 - s * s)) if abs(s) < eps else 0.0
    g = lambda P: bump_profile(np.linalg.norm(P, axis=-1), eps)
    v = solve_euclidean(g, 3, t)
    for r in (0.05, 0.3, 0.55):
        ref = quad(lambda s: s * prof(s), abs(r - t), r + t, points=[eps])[0] / (2 * r)
        assert v(np.array([[r, 0.0, 0.0]]))[0] == pytest.approx(ref, abs=1e-6)


# -- spherical solvers ----------------------------------------------------------

def test_series_vanishes_at_time_zero(s3_problem):
    assert np.max(np.abs(solve_series(s3_problem, 0.0).values)) == 0.0


def test_series_lowest_mode(s3_problem):
    from hkwave.fourier import forward_transform
    d = s3_problem.data
    t = 0.45
    u = solve_series(s3_problem, t)
    c0 = forward_transform(u, cutoff=4)[0]
    nrm = float(d.norm(d.rho))
    ref = s3_problem.coefficients()[0] * math.sin(nrm * t) / nrm
    assert abs(c0 - ref) < 1e-12


@pytest.mark.parametrize("fixture", ["s3_problem", "s5_problem"])
def test_initial_conditions(request, fixture):
    pr = request.getfixturevalue(fixture)
    u0, d1 = initial_condition_defects(pr, 2e-3)
    _, d2 = initial_condition_defects(pr, 1e-3)
    assert u0 <= 1e-12
    assert 3.5 < d1 / d2 < 4.5


@pytest.mark.parametrize("fixture", ["s3_problem", "s5_problem"])
def test_energy_is_conserved(request, fixture):
    pr = request.getfixturevalue(fixture)
    e = [spectral_energy(pr, t) for t in (0.0, 0.2, 0.6)]
    assert max(e) - min(e) <= 1e-9 * e[0]


def test_closed_form_s3(s3_problem):
    lhs, rhs = closed_form_s3(s3_problem, 0.5)
    assert np.max(np.abs(lhs - rhs)) < 1e-8
    with pytest.raises(ValueError):
        closed_form_s3(CauchyProblem.standard(build_space("s5"), 0.2, t_steps=2), 0.3)


@pytest.mark.parametrize("fixture,t", [("s3_problem", 0.5), ("s5_problem", 0.4)])
def test_reduction_matches_series(request, fixture, t):
    pr = request.getfixturevalue(fixture)
    a, b = solve_series(pr, t), solve_reduction(pr, t)
    assert np.max(np.abs(a.values - b.values)) <= 1e-6
    assert np.max(np.abs(solve_reduction(pr, 0.0).values)) < 1e-12


def test_reduction_matches_series_su3(su3_problem):
    a, b = solve_series(su3_problem, 0.3), solve_reduction(su3_problem, 0.3)
    assert np.max(np.abs(a.values - b.values)) <= 1e-6 * a.sup()


def test_contour_su3_at_shell_points(su3_problem):
    # the polar rule is pointwise; the 256^2 series is only resolved to ~1e-4
    pr = su3_problem
    a = solve_series(pr, 0.3)
    dist = pr.grid.dist.ravel()
    idx = [int(np.argmin(np.abs(dist - r))) for r in (0.3, 0.45)]
    c = solve_contour(pr, 0.3, points=pr.grid.X.reshape(-1, 3)[idx])
    assert np.max(np.abs(c - a.values.ravel()[idx])) <= 1e-3 * a.sup()
    with pytest.raises(ValueError):
        solve_contour(pr, 0.3, gamma=1.0)


@pytest.mark.parametrize("gamma", [0.0, 2.0, 5.0])
def test_contour_matches_series(s3_problem, gamma):
    a = solve_series(s3_problem, 0.5)
    c = solve_contour(s3_problem, 0.5, gamma)
    assert np.max(np.abs(a.values - c.values)) <= 1e-6 * a.sup()


def test_psi_is_even(s3_problem):
    p = np.array([0.7, 3.1 + 0.5j, 12.0 - 2j])
    X = np.array([0.1, 0.4, 1.3])
    assert np.allclose(psi_rank_one(s3_problem, p, X), psi_rank_one(s3_problem, -p, X),
                       rtol=1e-12, atol=0)


def test_range_error(s3_problem):
    with pytest.raises(RangeError):
        solve_contour(s3_problem, 0.5, gamma=500.0)
    with pytest.raises(ValueError):
        solve_contour(s3_problem, 0.5, gamma=-1.0)


# -- problem validation and diagnostics ----------------------------------------------

def test_problem_validation():
    d = build_space("s3")
    with pytest.raises(ValueError):
        CauchyProblem(standard_bump(d, 2.0, 256))
    with pytest.raises(ValueError):
        CauchyProblem(standard_bump(d, 0.2, 256), time_grid=[0.0, 5.0])


def test_trajectory_errors(s3_problem, su3_problem):
    with pytest.raises(ValueError):
        trajectory(s3_problem, "leapfrog")
    with pytest.raises(ValueError):
        trajectory(su3_problem, "contour")


def test_threaded_trajectory_is_identical(s3_problem):
    a = trajectory(s3_problem, "series")
    b = trajectory(s3_problem, "series", threads=3)
    for fa, fb in zip(a.fields, b.fields):
        assert np.array_equal(fa.values, fb.values)


@pytest.mark.parametrize("fixture", ["s3_problem", "s5_problem"])
def test_huygens_positive(request, fixture):
    rep = huygens_report(trajectory(request.getfixturevalue(fixture), "series"))
    assert rep["asserted"] and rep["pass"] and rep["finite_speed_pass"]
    assert max(rep["L_cone"]) <= 1e-6 and max(rep["L_shell"]) <= 1e-6


def test_huygens_normalization_validated(s3_problem):
    traj = trajectory(s3_problem, "series")
    with pytest.raises(ValueError):
        huygens_report(traj, normalization="peak")
    g = huygens_report(traj, normalization="global")
    m = huygens_report(traj, normalization="matched")
    assert g["L_cone"] == m["L_cone"]


def test_huygens_even_dimension_not_asserted(su3_problem):
    rep = huygens_report(trajectory(su3_problem, "series"))
    assert rep["dim"] == 8 and not rep["asserted"]


def test_exponential_estimate(s3_problem):
    rep = exponential_estimate_check(s3_problem, (0.3, 0.6), (0, 1, 2, 5))
    assert rep["pass"] and rep["ratio"] <= 10
    assert rep["rows"][0]["gamma"] == 0.0

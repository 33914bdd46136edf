import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hkwave.fourier import (AliasingError, bump_profile, DomainError, LambdaGrid, RadialFunction,
                            SphericalCoefficients, check_w_symmetry, exponential_type_estimate,
                            forward_transform, integral_representation, inverse_transform,
                            max_cutoff, measure_constant, pw_extend, pw_extend_adjoint,
                            standard_bump, support_radius, synthesize_from_pw)
from hkwave.rootsys import build_space, torus_grid
from hkwave.specfunc import build_shift_operator, dimension, spherical_oracle


@pytest.fixture(scope="module")
def s3_bump():
    return standard_bump(build_space("s3"), 0.4, 8192)


@pytest.fixture(scope="module")
def s3_bump_coeffs(s3_bump):
    return forward_transform(s3_bump)


@pytest.mark.parametrize("name,N", [("s3", 256), ("s5", 256), ("su3", 48)])
def test_constant_function(spaces, name, N):
    g = torus_grid(spaces[name], N)
    c = forward_transform(RadialFunction(g, np.ones(g.shape)))
    assert abs(c.values[0] - 1) < 1e-12
    assert np.max(np.abs(c.values[1:])) < 1e-12


@pytest.mark.parametrize("name,nu,N", [("s3", [5], 256), ("s7", [3], 256),
                                       ("su3", [2, 1], 64), ("su3", [0, 3], 64)])
def test_schur_orthogonality(spaces, name, nu, N):
    d = spaces[name]
    g = torus_grid(d, N)
    c = forward_transform(RadialFunction(g, spherical_oracle(d, nu, g.X)))
    idx = np.flatnonzero((c.mus == np.asarray(nu)).all(axis=1))[0]
    assert abs(c.values[idx] - 1 / dimension(d, nu)) < 1e-12
    assert np.max(np.abs(np.delete(c.values, idx))) < 1e-12


def test_s3_cosine_coefficient(spaces):
    g = torus_grid(spaces["s3"], 256)
    c = forward_transform(RadialFunction.from_callable(g, lambda X: np.cos(X[..., 0])))
    assert c[1] == pytest.approx(0.25, abs=1e-12)


def test_inverse_of_unit_coefficient(spaces):
    d = spaces["s3"]
    coeffs = SphericalCoefficients(d, np.array([[0]]), np.array([1.0 + 0j]), 0.0,
                                   1.0, {"grid": 128})
    assert np.allclose(inverse_transform(coeffs).values, 1.0, atol=1e-14)


@pytest.mark.parametrize("name,nu,N", [("s5", [4], 256), ("su3", [1, 2], 48)])
def test_single_term_inverse(spaces, name, nu, N):
    d = spaces[name]
    coeffs = SphericalCoefficients(d, np.array([nu]), np.array([1 / dimension(d, nu)]),
                                   0.0, 1.0, {"grid": N})
    out = inverse_transform(coeffs)
    assert np.max(np.abs(out.values - spherical_oracle(d, nu, out.grid.X))) < 1e-10


def test_round_trip_s3_bump(s3_bump, s3_bump_coeffs):
    back = inverse_transform(s3_bump_coeffs, N=s3_bump.grid.N)
    assert np.max(np.abs(back.values - s3_bump.values)) < 1e-9
    assert not back.meta["truncation_warning"]


def test_low_cutoff_is_flagged(s3_bump):
    # the bump spectrum is still ~1e-8 at norm 128, so the warning must fire
    back = inverse_transform(forward_transform(s3_bump, cutoff=128), N=s3_bump.grid.N)
    assert back.meta["truncation_warning"]


def test_round_trip_su3_band_limited(spaces):
    d = spaces["su3"]
    g = torus_grid(d, 96)
    vals = sum(spherical_oracle(d, mu, g.X) for mu in ([1, 0], [0, 1], [3, 2], [6, 4]))
    back = inverse_transform(forward_transform(RadialFunction(g, vals)), N=96)
    assert np.max(np.abs(back.values - vals)) < 1e-9


def test_aliasing_error(spaces):
    g = torus_grid(spaces["s3"], 64)
    with pytest.raises(AliasingError):
        forward_transform(RadialFunction(g, np.ones(g.shape)), cutoff=200)


def test_max_cutoff_is_alias_free(spaces):
    for name, N in (("s3", 128), ("su3", 64)):
        d = spaces[name]
        g = torus_grid(d, N)
        forward_transform(RadialFunction(g, np.ones(g.shape)), cutoff=max_cutoff(d, N))


def test_measure_constant_normalizes_constant(spaces):
    g = torus_grid(spaces["s5"], 128)
    assert measure_constant(g) * np.mean(g.delta) == pytest.approx(1.0)


def test_plancherel(spaces, s3_bump, s3_bump_coeffs):
    d = spaces["s3"]
    c = s3_bump_coeffs
    lhs = np.sum(dimension(d, c.mus).real * np.abs(c.values) ** 2)
    g = s3_bump.grid
    rhs = np.sum(np.abs(s3_bump.values) ** 2 * g.delta) / np.sum(g.delta)
    assert abs(lhs - rhs) <= 1e-8 * rhs


def test_extension_matches_lattice(spaces, operators, s3_bump, s3_bump_coeffs):
    d, D = spaces["s3"], operators["s3"]
    mus = np.array([[0.0], [1.0], [7.0], [40.0]])
    ext = pw_extend(s3_bump, d, D, mus)
    ref = np.array([s3_bump_coeffs[int(m[0])] for m in mus])
    assert np.max(np.abs(ext - ref)) < 1e-10 * np.max(np.abs(ref))


@settings(max_examples=20, deadline=None)
@given(st.floats(-20, 20), st.floats(-3, 3))
def test_extension_rank_one_symmetry(re, im):
    d = build_space("s3")
    D = build_shift_operator(d)
    f = standard_bump(d, 0.3, 1024)
    lam = np.array([re + 1j * im])
    a = pw_extend(f, d, D, lam)
    b = pw_extend(f, d, D, -lam - 2 * d.rho)
    assert abs(a - b) <= 1e-9 * max(abs(a), 1e-12)


def test_extension_full_weyl_symmetry_a2(spaces, operators):
    d, D = spaces["su3"], operators["su3"]
    f = standard_bump(d, 0.3, 96)
    rng = np.random.default_rng(3)
    lam = rng.normal(size=(6, 2)) * 2 + 1j * rng.normal(size=(6, 2)) * 0.5
    base = pw_extend(f, d, D, lam)
    for wc in d.weyl_coords:
        img = pw_extend(f, d, D, (lam + d.rho) @ wc - d.rho)
        assert np.max(np.abs(img - base) / np.abs(base)) < 1e-9


def test_adjoint_route_agrees_s3(spaces, operators, s3_bump):
    d, D = spaces["s3"], operators["s3"]
    rng = np.random.default_rng(5)
    lam = rng.normal(size=(20, 1)) * 5 + 1j * rng.normal(size=(20, 1))
    diff = pw_extend_adjoint(s3_bump, d, D, lam) - pw_extend(s3_bump, d, D, lam)
    assert np.max(np.abs(diff)) < 1e-8


def test_adjoint_route_converges_su3(spaces, operators):
    # the adjoint route differentiates the datum spectrally, so it is resolution limited
    d, D = spaces["su3"], operators["su3"]
    lam = np.array([[1.3 + 0.2j, 0.4 - 0.1j], [2.0, 1.0]])
    errs = []
    for N in (128, 256, 512):
        f = standard_bump(d, 0.3, N)
        errs.append(np.max(np.abs(pw_extend_adjoint(f, d, D, lam) - pw_extend(f, d, D, lam))))
    assert errs[2] < errs[1] < errs[0]


@pytest.mark.parametrize("eps,lo,hi", [(0.3, 0.27, 0.33), (0.15, 0.12, 0.18)])
def test_exponential_type(spaces, operators, eps, lo, hi):
    d, D = spaces["s3"], operators["s3"]
    est = exponential_type_estimate(standard_bump(d, eps, 8192), d, D)
    assert est.ok
    assert lo <= est.R_est <= hi


def test_support_radius(spaces):
    d = spaces["s3"]
    g = torus_grid(d, 512)
    assert support_radius(RadialFunction(g, np.zeros(g.shape))) == 0.0
    assert support_radius(RadialFunction(g, np.ones(g.shape))) == pytest.approx(np.max(g.dist))
    assert abs(support_radius(standard_bump(d, 0.3, 512), tol=1e-12) - 0.3) <= g.h


def test_synthesis_rejects_asymmetric(spaces, operators):
    d, D = spaces["s3"], operators["s3"]
    with pytest.raises(DomainError):
        synthesize_from_pw(lambda lam: np.exp(lam[:, 0]), d, D, 50, N=256)


def test_synthesis_round_trip(spaces, operators):
    d, D = spaces["s3"], operators["s3"]
    f = standard_bump(d, 0.2, 8192)
    F = lambda lam: pw_extend(f, d, D, lam)
    assert check_w_symmetry(F, d) < 1e-9
    out = synthesize_from_pw(F, d, D, 2000, N=8192, R=0.2)
    assert np.max(np.abs(out.values - f.values)) < 1e-8
    assert out.meta["support_ok"]


def test_integral_representation(spaces, operators):
    d, D = spaces["s3"], operators["s3"]
    f = standard_bump(d, 0.3, 8192)
    b = np.array([[0.05], [0.17], [0.3], [0.6]])
    res = integral_representation(f, d, D, b, LambdaGrid(0.5, 3000))
    ref = bump_profile(b[:, 0], 0.3)
    assert np.max(np.abs(res["f"] - ref)) < 1e-7
    assert np.max(np.abs(res["delta_f"] - d.delta(b) * ref)) < 1e-7

import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hkwave.rootsys import (ConfigError, SpaceConfig, SpectralParameter, build_space,
                            dominant_spherical, dominant_weights, enumerate_dominant,
                            lambda_alpha, load_config, preset, torus_grid, weyl_group,
                            weyl_orbit_sum)


@pytest.mark.parametrize("name,rank,npos,dim", [
    ("s3", 1, 1, 3), ("s5", 1, 1, 5), ("s7", 1, 1, 7), ("su2", 1, 1, 3), ("su3", 2, 3, 8),
])
def test_preset_shapes(spaces, name, rank, npos, dim):
    d = spaces[name]
    assert d.rank == rank
    assert d.n_positive == npos
    assert d.dim_space == dim


@pytest.mark.parametrize("name", ["s3", "s5", "s7", "su2", "su3"])
def test_rho_is_half_weighted_root_sum(spaces, name):
    d = spaces[name]
    half = 0.5 * d.multiplicity * d.positive_roots.sum(axis=0)
    assert np.allclose(d.to_ambient(d.rho), half)


@pytest.mark.parametrize("name", ["s3", "s5", "s7", "su2", "su3"])
def test_rho_alpha_values(spaces, name):
    d = spaces[name]
    vals = np.array([lambda_alpha(d, d.rho, a) for a in d.positive_roots])
    assert np.allclose(vals[d.simple_index], d.m)
    assert np.all(vals.real >= d.m - 1e-12)
    assert np.allclose(vals, np.round(vals.real))


def test_rho_alpha_highest_root_a2(spaces):
    d = spaces["su3"]
    assert lambda_alpha(d, d.rho, [1, 0, -1]) == pytest.approx(2)


def test_lambda_alpha_of_root_is_one(spaces):
    d = spaces["su3"]
    for a in d.positive_roots:
        lam = d.to_coords(a.astype(float))
        assert lambda_alpha(d, lam, a) == pytest.approx(1)


def test_lambda_alpha_rejects_zero_root(spaces):
    with pytest.raises(ValueError):
        lambda_alpha(spaces["su3"], [1, 0], [0, 0, 0])


@pytest.mark.parametrize("family,rt,rank,order", [
    ("sphere_odd", None, None, 2), ("complex_group", "A", 2, 6), ("complex_group", "B", 2, 8),
    ("complex_group", "C", 2, 8), ("complex_group", "A", 3, 24),
])
def test_weyl_group_orders(family, rt, rank, order):
    d = build_space(SpaceConfig(family, 1, rt, rank, grid_size=16))
    W = weyl_group(d)
    assert len(W) == order
    assert len({w.tobytes() for w in W}) == order


@pytest.mark.parametrize("name", ["su3"])
def test_weyl_group_closed_and_contains_reflections(spaces, name):
    d = spaces[name]
    keys = {w.tobytes() for w in d.weyl_ambient}
    for a in d.weyl_ambient:
        for b in d.weyl_ambient:
            assert (a @ b).tobytes() in keys
    for r in d.positive_roots:
        s = np.eye(len(r), dtype=int) - 2 * np.outer(r, r) // int(r @ r)
        assert s.tobytes() in keys


def test_weyl_permutes_roots_and_preserves_lambda_alpha(spaces, rng):
    d = spaces["su3"]
    roots = {tuple(r) for r in d.positive_roots} | {tuple(-r) for r in d.positive_roots}
    lam = rng.normal(size=2) + 1j * rng.normal(size=2)
    for w, wc in zip(d.weyl_ambient, d.weyl_coords):
        for r in d.positive_roots:
            wr = w @ r
            assert tuple(wr) in roots
            assert lambda_alpha(d, lam @ wc, wr) == pytest.approx(lambda_alpha(d, lam, r), abs=1e-12)


def test_weyl_coords_match_ambient(spaces, rng):
    d = spaces["su3"]
    lam = rng.normal(size=2)
    for w, wc in zip(d.weyl_ambient, d.weyl_coords):
        assert np.allclose(d.to_ambient(lam @ wc), w @ d.to_ambient(lam))


def test_simple_reflection_fixes_rho_minus_alpha(spaces):
    # s_a(rho) = rho - 2 rho_a a, so rho - rho_a a is fixed
    d = spaces["su3"]
    rho = d.to_ambient(d.rho.astype(float))
    for a in d.simple_roots:
        s = np.eye(3) - 2 * np.outer(a, a) / (a @ a)
        v = rho - d.m * a
        assert np.allclose(s @ v, v)


def test_dominant_spherical_examples(spaces):
    assert dominant_spherical([0], spaces["s3"])
    assert dominant_spherical([3], spaces["s3"])
    assert not dominant_spherical([-1], spaces["s3"])
    assert dominant_spherical(spaces["su3"].rho, spaces["su3"])
    with pytest.raises(ValueError):
        dominant_spherical([1j], spaces["s3"])


def test_enumerate_dominant_examples(spaces):
    d = spaces["s3"]
    assert [p.coords[0].real for p in enumerate_dominant(d, d.norm([3]))] == [0, 1, 2, 3]
    assert len(enumerate_dominant(d, 0)) == 1
    a2 = spaces["su3"]
    got = {tuple(int(c.real) for c in p.coords) for p in enumerate_dominant(a2, a2.rho_norm())}
    assert got == {(0, 0), (1, 0), (0, 1), (1, 1)}


def test_enumerate_dominant_is_fundamental_and_sorted(spaces):
    d = spaces["su3"]
    mus = dominant_weights(d, 8.0)
    assert [tuple(m) for m in mus] == sorted(tuple(m) for m in mus)
    seen = set()
    for m in mus:
        orbit = {tuple(m @ wc) for wc in d.weyl_coords}
        assert not (orbit & seen)
        seen |= orbit
    assert np.all(d.norm(mus) <= 8.0 + 1e-12)
    # completeness against a brute-force scan
    brute = [(a, b) for a in range(20) for b in range(20) if d.norm([a, b]) <= 8.0]
    assert len(brute) == len(mus)


def test_weyl_orbit_sum_examples(spaces):
    d = spaces["s3"]
    assert weyl_orbit_sum(d, [0], [0.3]) == pytest.approx(2)
    theta = 0.7
    assert weyl_orbit_sum(d, [2.5], [theta], coords="ambient") == pytest.approx(2 * np.cos(2.5 * theta))
    assert weyl_orbit_sum(spaces["su3"], spaces["su3"].rho, [0, 0]) == pytest.approx(6)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=2),
       st.lists(st.floats(0, 1), min_size=2, max_size=2))
def test_weyl_orbit_sum_invariance(lam, H):
    d = build_space("su3")
    lam = np.array(lam)
    base = weyl_orbit_sum(d, lam, H)
    for wc in d.weyl_coords:
        assert abs(weyl_orbit_sum(d, lam @ wc, H) - base) <= 1e-9 * (1 + abs(base))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 6), st.integers(0, 6), st.integers(-3, 3), st.integers(-3, 3))
def test_characters_and_delta_are_periodic(a, b, n1, n2):
    d = build_space("su3")
    X = np.array([0.123, -0.456, 0.333])
    shift = n1 * d.periods[0] + n2 * d.periods[1]
    chi = lambda Y: np.exp(1j * d.pairing([a, b], Y))
    assert abs(chi(X + shift) - chi(X)) < 1e-9
    assert abs(d.delta(X + shift) - d.delta(X)) < 1e-12


def test_grid_avoids_walls(spaces):
    for name in ("s3", "su3"):
        g = torus_grid(spaces[name], 64)
        assert np.min(g.delta) > 0
        assert g.X.shape[:-1] == g.shape


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="family"):
        SpaceConfig("torus").validate()
    with pytest.raises(ConfigError, match="m"):
        SpaceConfig("complex_group", m=2, root_type="A", rank=2).validate()
    with pytest.raises(ConfigError, match="root_type"):
        SpaceConfig("complex_group", root_type="G", rank=2).validate()
    with pytest.raises(ConfigError, match="preset"):
        preset("s9")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="malformed"):
        load_config(bad)
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"family": "sphere_odd", "m": 2, "grid_size": 256}))
    assert build_space(load_config(good)).dim_space == 5
    extra = tmp_path / "extra.json"
    extra.write_text(json.dumps({"family": "sphere_odd", "colour": 1}))
    with pytest.raises(ConfigError, match="colour"):
        load_config(extra)


def test_spectral_parameter_parts():
    lam = SpectralParameter([1 + 2j, -3j])
    assert np.allclose(lam.real.array, [1, 0])
    assert np.allclose(lam.imag.array, [2, -3])

"""
Wave equation ``u_tt = (L + |rho|^2) u`` with radial Cauchy data.

Three independent solvers are provided:

``solve_series``
    Mode-wise propagation of the spherical Fourier coefficients.
``solve_reduction``
    Reduction to the flat wave equation on the torus Lie algebra: the
    Euclidean function with transform ``fhat(lam - rho)`` is propagated and
    ``delta * u = D v``.
``solve_contour``
    The propagator written as a one-dimensional integral over ``p`` along
    ``Im p = gamma``.

``huygens_report`` measures light-cone leakage and the interior shell tail;
``exponential_estimate_check`` sweeps ``gamma`` through the contour solver.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad_vec
from scipy.special import roots_gegenbauer, roots_legendre

from .fourier import (MEM_BUDGET, RadialFunction, SphericalCoefficients,
                      _label_space_quotient, forward_transform, max_cutoff,
                      measure_constant, pw_extend, sine_quotient_form,
                      standard_bump, synthesize_coefficients)
from .rootsys import torus_grid
from .specfunc import D_ZERO_TOL, build_shift_operator, dimension

__all__ = [
    "RangeError", "CauchyProblem", "WaveTrajectory", "EuclideanSpectral",
    "solve_series", "solve_reduction", "solve_contour", "euclidean_mean_value",
    "solve_euclidean", "trajectory", "huygens_report", "exponential_estimate_check",
    "closed_form_s3", "spectral_energy", "initial_condition_defects",
]

RANGE_LIMIT = 600.0
WALL_BAND = 0.1      # nodes with min |sin<alpha,X>| below this use direct sums
LIFT_FACTOR = 2      # rank one samples Euclidean transforms on Lambda / 2
DIRECT_ZEROS = 64    # below this count every zero of d gets the direct extension


class RangeError(ValueError):
    """Exponential factors along the shifted contour leave the float range."""


def _complex_norm(data, coords):
    """``sqrt(<lam,lam>)`` for complex simple coordinates, branch with Re >= 0."""
    a = np.asarray(coords, dtype=complex) @ data.fundamental_weights
    return np.sqrt(data._s * np.sum(a * a, axis=-1))


def _sinc_t(nu, t):
    """``sin(nu t) / nu`` with the limit ``t`` at ``nu = 0``."""
    nu = np.asarray(nu)
    small = np.abs(nu) < 1e-300
    safe = np.where(small, 1.0, nu)
    return np.where(small, t, np.sin(safe * t) / safe)


# ---------------------------------------------------------------------------
# problem and trajectory types
# ---------------------------------------------------------------------------

class CauchyProblem:
    """
    Cauchy datum ``u(.,0) = 0``, ``u_t(.,0) = f`` with ``f`` supported in ``B_eps``.

    Parameters
    ----------
    f : RadialFunction
        Radial datum; ``f.eps`` is the declared support radius.
    time_grid : array_like, optional
        Times in ``[0, R_small - eps]``.
    """

    def __init__(self, f, time_grid=None, D=None, eps=None):
        self.f = f
        self.grid = f.grid
        self.data = f.data
        self.D = D or build_shift_operator(self.data)
        self.eps = float(eps if eps is not None else f.eps)
        R = self.data.R_small
        if not 0 < self.eps < R:
            raise ValueError(f"support radius {self.eps} must lie in (0, R_small={R:.6g})")
        if time_grid is None:
            time_grid = np.linspace(0.0, R - self.eps, 25)
        self.time_grid = np.asarray(time_grid, dtype=float)
        if np.any(self.time_grid < 0) or np.any(self.time_grid > R - self.eps + 1e-12):
            raise ValueError(f"times must lie in [0, R_small - eps] = [0, {R - self.eps:.6g}]")
        self._cache = {}

    @classmethod
    def standard(cls, data, eps, t_max=None, t_steps=24, N=None):
        """Standard bump datum with ``t_steps`` uniform steps up to ``t_max``."""
        f = standard_bump(data, eps, N)
        t_max = data.R_small - eps if t_max is None else t_max
        return cls(f, np.linspace(0.0, t_max, t_steps + 1))

    @property
    def R_small(self):
        return self.data.R_small

    def coefficients(self) -> SphericalCoefficients:
        """Spherical Fourier coefficients at the largest alias-free cutoff."""
        if "coeffs" not in self._cache:
            co = forward_transform(self.f, self.data, self.D, max_cutoff(self.data, self.grid.N))
            w = np.abs(co.values)
            top = np.max(w) if len(w) else 0.0
            nrm = self.data.norm(co.mus)
            tail = float(np.max(w[nrm > 0.9 * nrm.max()]) / top) if top > 0 else 0.0
            co.meta["decay_ratio"] = tail
            co.meta["resolved"] = bool(tail <= 1e-10)
            self._cache["coeffs"] = co
        return self._cache["coeffs"]

    def spectral_extent(self, rel=1e-15):
        """Norm of ``mu + rho`` beyond which ``d(mu)|fhat(mu)|`` stays below ``rel`` of its max."""
        if "extent" not in self._cache:
            co = self.coefficients()
            w = np.abs(co.values) * dimension(self.data, co.mus)
            keep = w > rel * np.max(w)
            nu = self.data.norm(co.mus + self.data.rho)
            self._cache["extent"] = float(np.max(nu[keep]))
        return self._cache["extent"]

    def __repr__(self):
        return (f"CauchyProblem({self.data.family}, eps={self.eps}, N={self.grid.N}, "
                f"times={len(self.time_grid)})")


@dataclass
class WaveTrajectory:
    """Solutions ``u(., t)`` of one Cauchy problem on its time grid."""
    method: str
    times: np.ndarray
    fields: list
    eps: float
    problem: CauchyProblem = None
    gamma: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    def __getitem__(self, i):
        return self.fields[i]

    def __len__(self):
        return len(self.fields)

    def peak(self):
        return max(f.sup() for f in self.fields)


# ---------------------------------------------------------------------------
# series solution
# ---------------------------------------------------------------------------

def solve_series(problem, t):
    """
    Propagate each spherical mode: ``uhat(mu,t) = fhat(mu) sin(|mu+rho| t)/|mu+rho|``.
    """
    co = problem.coefficients()
    data = problem.data
    nu = data.norm(co.mus + data.rho)
    w = co.values * _sinc_t(nu, t)
    vals = synthesize_coefficients(data, problem.D, problem.grid, co.mus, w)
    meta = {"method": "series", "t": float(t), "imag_max": float(np.max(np.abs(vals.imag))),
            "truncation_warning": not co.meta.get("resolved", True)}
    return RadialFunction(problem.grid, vals.real, problem.eps, meta)


def spectral_energy(problem, t):
    """``sum d(mu) (|uhat_t|^2 + |mu+rho|^2 |uhat|^2)`` of the series solution."""
    co = problem.coefficients()
    data = problem.data
    nu = data.norm(co.mus + data.rho)
    d = dimension(data, co.mus).real
    uh = co.values * _sinc_t(nu, t)
    ut = co.values * np.cos(nu * t)
    return float(np.sum(d * (np.abs(ut) ** 2 + nu ** 2 * np.abs(uh) ** 2)))


# ---------------------------------------------------------------------------
# lifted grids and Euclidean transforms
# ---------------------------------------------------------------------------

class _LiftedGrid:
    """The grid of the torus ``b / (q Gamma)`` refining the base grid by ``q``."""

    def __init__(self, grid, q):
        self.base = grid
        self.q = int(q)
        self.M = self.q * grid.N
        self.n = grid.n
        self.shape = (self.M,) * self.n
        data = grid.data
        tau = grid.X @ np.linalg.pinv(data.periods)
        self.tau = tau
        idx = np.rint(tau * grid.N - np.asarray(grid.offset)).astype(int)
        self.index = tuple(np.moveaxis(idx % self.M, -1, 0))
        k = np.fft.fftfreq(self.M, 1.0 / self.M).astype(int)
        self.k = np.stack(np.meshgrid(*[k] * self.n, indexing="ij"), axis=-1)
        self.kappa = self.k / self.q
        self.phase = np.exp(-2j * np.pi * (self.k @ np.asarray(grid.offset)) / grid.N / self.q)


def _group_ratio(D, group, amb):
    """``sum_beta r_beta (i s nu)^beta`` for one coefficient group, memory-light."""
    _, members = D.coefficient_groups()[group]
    z = 1j * float(D.data.scale) * np.asarray(amb, dtype=complex)
    acc = np.zeros(z.shape[:-1], dtype=complex)
    for beta, r in members:
        term = np.full(z.shape[:-1], r, dtype=complex)
        for k, e in enumerate(beta):
            if e:
                term *= z[..., k] ** e
        acc += term
    return acc


class EuclideanSpectral:
    """
    Function on the Lie algebra of the torus given by its Euclidean transform.

    ``g(X) = q^{-n} sum_{kappa in Lambda/q} G(kappa) exp(i<kappa, X>)``, which is
    the ``q Gamma``-periodization of the Euclidean inverse transform of ``G``.
    The coefficients are stored on the FFT lattice of the lifted grid.
    """

    def __init__(self, lifted, values, data):
        self.lifted = lifted
        self.values = values
        self.data = data

    @property
    def kappa(self):
        return self.lifted.kappa

    def norms(self):
        return self.data.norm(self.lifted.kappa)

    def propagate(self, t):
        """Spectral solution of ``v_tt = Delta v, v(0) = 0, v_t(0) = g`` at time t."""
        return EuclideanSpectral(self.lifted, self.values * _sinc_t(self.norms(), t), self.data)

    def shifted(self, direction_amb, r):
        """Translate ``X -> X + r * direction``."""
        amb = self.data.to_ambient(self.lifted.kappa)
        ph = np.exp(1j * self.data._s * r * (amb @ np.asarray(direction_amb, float)))
        return EuclideanSpectral(self.lifted, self.values * ph, self.data)

    def on_lifted_grid(self, multiplier=None):
        """Values at all lifted grid nodes (optionally after a Fourier multiplier)."""
        L = self.lifted
        C = self.values if multiplier is None else self.values * multiplier
        V = np.fft.ifftn(C * np.conj(L.phase)) * (L.M ** L.n) / L.q ** L.n
        return V

    def on_base_grid(self, multiplier=None):
        return self.on_lifted_grid(multiplier)[self.lifted.index]

    def evaluate(self, X):
        """Direct evaluation at ambient points ``X`` (P, d)."""
        X = np.atleast_2d(np.asarray(X, float))
        amb = self.data.to_ambient(self.lifted.kappa).reshape(-1, self.data.ambient_dim)
        vals = self.values.ravel()
        keep = vals != 0
        amb, vals = amb[keep], vals[keep]
        out = np.zeros(X.shape[0], dtype=complex)
        chunk = max(1, MEM_BUDGET // max(1, len(vals)))
        for i0 in range(0, X.shape[0], chunk):
            ph = np.exp(1j * self.data._s * (X[i0:i0 + chunk] @ amb.T))
            out[i0:i0 + chunk] = ph @ vals
        return out / self.lifted.q ** self.lifted.n


def default_lift(data):
    """Sampling refinement of Euclidean transforms: 2 in rank one, 1 otherwise."""
    return LIFT_FACTOR if data.rank == 1 else 1


def euclidean_transform_of_datum(problem, q=None):
    """
    ``G(kappa) = fhat(kappa - rho)`` on ``Lambda / q`` as an :class:`EuclideanSpectral`.

    The product ``d(kappa - rho) G(kappa)`` is one FFT per coefficient group
    of ``D`` on the lifted grid.  At zeros of ``d`` the holomorphic extension
    is evaluated directly; when there are many such zeros (walls in rank two)
    only those where the symbol of ``D`` is nonzero are evaluated, the others
    never enter ``D v`` and are left at zero.
    """
    q = q or default_lift(problem.data)
    key = ("euclid", q)
    if key in problem._cache:
        return problem._cache[key]
    data, D, f = problem.data, problem.D, problem.f
    grid = f.grid
    L = _LiftedGrid(grid, q)
    mask = np.abs(f.values) > 0
    if f.eps is not None:
        mask &= grid.dist <= f.eps + 1e-15
    Xs = grid.X[mask]
    sub = tuple(ix[mask] for ix in L.index)
    c = measure_constant(grid)
    W = data.order_weyl
    amb = data.to_ambient(L.kappa)
    dF = np.zeros(L.shape, dtype=complex)
    symbol = np.zeros(L.shape)
    sym_grid = data.rank == 1
    for gi, (poly, _) in enumerate(D.coefficient_groups()):
        G = np.zeros(L.shape, dtype=complex)
        G[sub] = f.values[mask] * poly.evaluate(-Xs) * D.normalization
        S = np.fft.fftn(G) / L.M ** L.n
        r = _group_ratio(D, gi, amb)
        symbol = np.maximum(symbol, np.abs(r))
        if sym_grid:
            # the rank-one grid is W-invariant: all orbit terms coincide
            dF += W * r * S * L.phase
        else:
            for wc in data.weyl_coords:
                kw = L.k @ wc
                # the offset phase must use kw itself, not its reduction mod M
                ph = np.exp(-2j * np.pi * (kw @ grid.offset) / (grid.N * q))
                dF += _group_ratio(D, gi, data.to_ambient(kw / q)) * ph * S[tuple(np.moveaxis(kw % L.M, -1, 0))]
    dF *= c * q ** L.n
    dval = dimension(data, L.kappa - data.rho)
    bad = np.abs(dval) < D_ZERO_TOL
    F = np.zeros(L.shape, dtype=complex)
    F[~bad] = dF[~bad] / dval[~bad]
    if np.count_nonzero(bad) > DIRECT_ZEROS:
        bad &= symbol > 1e-12 * symbol.max()
    if np.any(bad):
        F[bad] = pw_extend(f, data, D, L.kappa[bad].astype(complex) - data.rho)
    if data.rank > 1:
        # band-limit to the alias-free cutoff of the series: rho-shifted norm
        # of the dominant representative, which maximizes <w kappa, rho>
        rho_amb = data.to_ambient(np.asarray(data.rho, dtype=float))
        top = np.max([data.to_ambient(L.kappa @ wc) @ rho_amb
                      for wc in data.weyl_coords], axis=0)
        k2 = np.sum(amb ** 2, axis=-1) - 2 * top + np.sum(rho_amb ** 2)
        F[k2 > problem.coefficients().cutoff ** 2 + 1e-9] = 0
    out = EuclideanSpectral(L, F, data)
    problem._cache[key] = out
    return out


# ---------------------------------------------------------------------------
# rank-one sums with relative accuracy near the walls
# ---------------------------------------------------------------------------

def _wall_mask(data, X):
    return np.min(np.abs(np.sin(data.root_angles(X))), axis=-1) < WALL_BAND


def _rank_one_fields(problem, x0, y, coef):
    """
    For each coefficient group ``g`` of ``D`` evaluate on the grid::

        V_g(X) = sum_k coef_k [r_g(lam_k) e^{i<lam_k,X>} + r_g(-lam_k) e^{-i<lam_k,X>}]

    with ``lam_k = x0 + k/2 + i y`` in simple coordinates.  The bulk uses one
    inverse FFT of length ``2N``; nodes near the walls use direct sums with
    explicit sines so that the quotient by ``delta`` keeps relative accuracy.
    """
    data, D, grid = problem.data, problem.D, problem.grid
    N = grid.N
    o = grid.offset[0]
    K = len(coef)
    lam = x0 + 0.5 * np.arange(K) + 1j * y
    amb = data.to_ambient(lam[:, None])
    tau = (grid.X @ np.linalg.pinv(data.periods))[..., 0]
    l = np.rint(tau * N - o).astype(int)
    near = _wall_mask(data, grid.X)
    two_pi = 2 * np.pi
    out = []
    for gi in range(len(D.coefficient_groups())):
        rp = _group_ratio(D, gi, amb)
        rm = _group_ratio(D, gi, -amb)
        vals = np.zeros(grid.shape, dtype=complex)
        for r, sign in ((rp, 1), (rm, -1)):
            b = coef * r * np.exp(1j * np.pi * np.arange(K) * o / N)
            folded = np.zeros(2 * N, dtype=complex)
            np.add.at(folded, np.arange(K) % (2 * N), b)
            S = np.fft.ifft(folded) * (2 * N)
            ll = l if sign > 0 else -l - int(round(2 * o))
            tt = sign * tau
            vals += (np.exp(1j * two_pi * x0 * (ll + o) / N) * np.exp(-two_pi * y * tt)
                     * S[ll % (2 * N)])
        if np.any(near):
            Xn = tau[near]
            acc = np.zeros(Xn.shape, dtype=complex)
            even = coef * (rp + rm)
            odd = 1j * coef * (rp - rm)
            chunk = max(1, MEM_BUDGET // max(1, Xn.size))
            lam_d = lam.real if y == 0 else lam
            for i0 in range(0, K, chunk):
                th = two_pi * np.outer(lam_d[i0:i0 + chunk], Xn)
                acc += even[i0:i0 + chunk] @ np.cos(th) + odd[i0:i0 + chunk] @ np.sin(th)
            vals[near] = acc
        out.append(vals)
    return out


def _assemble(problem, fields, X=None):
    """``u = delta^{-1} sum_g normalization * poly_g(X) V_g``."""
    D, data = problem.D, problem.data
    X = problem.grid.X if X is None else X
    dl = data.delta(X)
    total = 0
    for (poly, _), V in zip(D.coefficient_groups(), fields):
        total = total + D.normalization * poly.evaluate(X) / dl * V
    return total


# ---------------------------------------------------------------------------
# Euclidean wave equation
# ---------------------------------------------------------------------------

SPHERE_NODES = 1 << 16


def _sphere_rule(n, Q):
    """Directions and weights (summing to 1) of a product rule on ``S^{n-1}``."""
    if n == 1:
        return np.array([[1.0], [-1.0]]), np.array([0.5, 0.5])
    if n == 2:
        a = 2 * np.pi * np.arange(Q) / Q
        return np.stack([np.cos(a), np.sin(a)], axis=-1), np.full(Q, 1.0 / Q)
    x, w = roots_gegenbauer(max(4, Q // 2), (n - 2) / 2)
    w = w / w.sum()
    sub, sw = _sphere_rule(n - 1, Q)
    dirs = np.concatenate([np.column_stack([np.full(len(sub), xi),
                                            np.sqrt(1 - xi * xi) * sub]) for xi in x])
    wts = np.concatenate([wi * sw for wi in w])
    return dirs, wts


def euclidean_mean_value(g, X, r, n=None, Q=256):
    """
    Mean of ``g`` over the sphere of radius ``r`` centred at ``X`` in R^n.

    ``g`` maps an array (..., n) of points to values.  ``X`` is (n,) or
    (P, n); ``r`` is a scalar or an array broadcasting against the points.
    """
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    n = n or X.shape[-1]
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be non-negative")
    # the product rule has ~(Q/2)^(n-2) Q nodes; keep it below SPHERE_NODES
    while n > 2 and Q > 8 and (Q // 2) ** (n - 2) * Q > SPHERE_NODES:
        Q //= 2
    dirs, wts = _sphere_rule(n, Q)
    rr = np.broadcast_to(r, X.shape[:1]) if r.ndim else np.full(X.shape[0], float(r))
    pts = X[:, None, :] + rr[:, None, None] * dirs[None, :, :]
    out = np.asarray(g(pts)) @ wts
    return out[0] if single else out


def _double_factorial(k):
    return math.prod(range(k, 0, -2)) if k > 0 else 1


def _apply_radial_derivative(phi, t, k, h=None):
    """``((1/t) d/dt)^k phi(t)`` by nested five-point central differences."""
    if k == 0:
        return phi(t)
    h = h or 1e-2 * t

    def inner(s):
        return _apply_radial_derivative(phi, s, k - 1, h)

    d = (-inner(t + 2 * h) + 8 * inner(t + h) - 8 * inner(t - h) + inner(t - 2 * h)) / (12 * h)
    return d / t


def solve_euclidean(g, n, t, Q=256, nodes=64):
    """
    Solution of ``v_tt = Delta v``, ``v(0) = 0``, ``v_t(0) = g`` in R^n at time ``t``.

    If ``g`` is an :class:`EuclideanSpectral` the solution is spectral and
    another EuclideanSpectral is returned.  Otherwise ``g`` is a callable on
    points (..., n) and a callable ``v(X)`` is returned, built from the
    classical formulas: d'Alembert for ``n = 1``, the spherical-mean formula
    with ``(1/t) d/dt`` by five-point differences for odd ``n``, and the
    descent formula (radius ``r = t sin(phi)``, Gauss-Legendre in ``phi``) for
    even ``n``.
    """
    if isinstance(g, EuclideanSpectral):
        return g.propagate(t)
    if n < 1:
        raise ValueError("dimension must be positive")
    t = float(t)
    if t == 0:
        return lambda X: np.zeros(np.atleast_2d(X).shape[0]) if np.ndim(X) > 1 else 0.0

    if n == 1:
        def v1(X):
            X = np.asarray(X, dtype=float)
            if X.ndim >= 2 and X.shape[-1] == 1:
                X = X[..., 0]  # points (..., 1) as elsewhere
            # adaptive in s: the datum may be narrow compared with 2t
            val, _ = quad_vec(lambda s: np.asarray(g((X + s)[..., None])), -t, t,
                              epsabs=1e-14, epsrel=1e-12)
            return 0.5 * val
        return v1

    if n % 2:
        k = (n - 3) // 2
        gam = _double_factorial(n - 2)

        def vodd(X):
            phi = lambda s: s ** (n - 2) * euclidean_mean_value(g, X, s, n, Q)
            return _apply_radial_derivative(phi, t, k) / gam
        return vodd

    k = (n - 2) // 2
    gam = _double_factorial(n)
    x, w = roots_legendre(nodes)
    ph = 0.25 * np.pi * (x + 1)
    wp = 0.25 * np.pi * w

    def veven(X):
        def phi(s):
            acc = 0
            for a, wa in zip(ph, wp):
                acc = acc + wa * np.sin(a) ** (n - 1) * euclidean_mean_value(
                    g, X, s * np.sin(a), n, Q)
            return n * s ** (n - 1) * acc
        return _apply_radial_derivative(phi, t, k) / gam
    return veven


# ---------------------------------------------------------------------------
# reduction and contour solvers
# ---------------------------------------------------------------------------

def solve_reduction(problem, t, q=None):
    """
    ``delta u = D v`` with ``v`` the Euclidean wave propagating ``G(kappa) = fhat(kappa - rho)``.

    ``G`` is sampled on ``Lambda / q``; its inverse transform is then the
    ``q Gamma``-periodization of the Euclidean function, which agrees with it
    on the fundamental domain because ``2 R_small`` is below the shortest period.
    """
    data, D = problem.data, problem.D
    q = q or default_lift(data)
    G = euclidean_transform_of_datum(problem, q)
    v = solve_euclidean(G, data.rank, t)
    if data.rank == 1:
        k0 = G.lifted.M // 2
        kap = G.kappa[..., 0]
        pos = (kap >= 0) & (np.arange(G.lifted.M) < k0)
        order = np.argsort(kap[pos])
        coef = v.values[pos][order] / q
        coef[0] *= 0.5
        u = _assemble(problem, _rank_one_fields(problem, 0.0, 0.0, coef))
    elif sine_quotient_form(D) is not None:
        # compact groups: divide by the Weyl denominator in coefficient space
        const, labels = sine_quotient_form(D)
        L = G.lifted
        n = L.n
        ratio = _group_ratio(D, 0, data.to_ambient(G.kappa)).reshape(1, -1)
        Q = _label_space_quotient(data, D, L.k.reshape(1, -1, n), v.values.ravel(),
                                  L.M, L.q, labels, ratios=ratio)
        vals = const * np.fft.ifftn(Q * np.conj(L.phase)) * L.M ** n / L.q ** n
        u = vals[L.index]
    else:
        amb = data.to_ambient(G.kappa)
        fields = [v.on_base_grid(_group_ratio(D, gi, amb))
                  for gi in range(len(D.coefficient_groups()))]
        u = _assemble(problem, fields)
    meta = {"method": "reduction", "t": float(t), "q": q,
            "imag_max": float(np.max(np.abs(u.imag)))}
    return RadialFunction(problem.grid, u.real, problem.eps, meta)


def _check_range(problem, t, gamma):
    far = float(np.max(problem.grid.dist))
    if gamma * (problem.eps + far + t) > RANGE_LIMIT:
        raise RangeError(
            f"gamma={gamma} gives exponents gamma*(eps+|X|+t) > {RANGE_LIMIT}; "
            f"use gamma <= {RANGE_LIMIT / (problem.eps + far + t):.3g}")


def default_contour_extent(problem):
    """Truncation of the contour integral in simple coordinates (rank one) or norm."""
    data = problem.data
    ext = 1.2 * problem.spectral_extent() + 10
    if data.rank == 1:
        wn = float(data.norm(np.ones(1)))
        return min(ext / wn, 0.5 * problem.grid.N)
    return ext


def _contour_values(problem, gamma, P):
    """``F(lam) = fhat(lam - rho)`` on the midpoint grid ``Re lam in (-P, P)``, step 1/2."""
    key = ("contour", float(gamma), float(P))
    if key not in problem._cache:
        data = problem.data
        wn = float(data.norm(np.ones(1)))
        K = int(math.ceil(2 * P)) * 2
        x0 = -K / 4 + 0.25
        y = gamma / wn
        lam = x0 + 0.5 * np.arange(K) + 1j * y
        F = pw_extend(problem.f, data, problem.D, lam[:, None] - data.rho)
        problem._cache[key] = (x0, y, lam, F, wn)
    return problem._cache[key]


def psi_rank_one(problem, p, X):
    """``Psi(p, X) = 2 fhat(p - rho) cos(p X)`` for complex ``p`` (ambient scale)."""
    data = problem.data
    wn = float(data.norm(np.ones(1)))
    p = np.atleast_1d(np.asarray(p, dtype=complex))
    F = pw_extend(problem.f, data, problem.D, (p / wn)[:, None] - data.rho)
    X = np.atleast_1d(np.asarray(X, dtype=float))
    return 2 * F[:, None] * np.cos(np.outer(p, X))


def solve_contour(problem, t, gamma=0.0, P=None, points=None, angles=None, dp=0.5):
    """
    Contour form of the propagator along ``Im p = gamma``::

        delta u = (1/2i) int D Psi(p + i gamma, X) / (p + i gamma) e^{i (p + i gamma) t} dp

    Rank one only for ``gamma > 0``; rank two is evaluated at ``gamma = 0``
    by polar quadrature at the ambient ``points`` (a subset of the grid).
    """
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    data = problem.data
    _check_range(problem, t, gamma)
    if P is None:
        P = default_contour_extent(problem)
    if data.rank == 1:
        x0, y, lam, F, wn = _contour_values(problem, gamma, P)
        zeta = lam * wn
        coef = 0.5 * F * np.exp(1j * zeta * t) / (2j * zeta)
        fields = _rank_one_fields(problem, x0, y, coef)
        u = _assemble(problem, fields)
        meta = {"method": "contour", "t": float(t), "gamma": float(gamma), "P": float(P),
                "imag_max": float(np.max(np.abs(u.imag)))}
        return RadialFunction(problem.grid, u.real, problem.eps, meta)
    if gamma > 0:
        raise ValueError("the shifted contour is available in rank one only; "
                         "rank two uses the half-line form at gamma = 0")
    return _contour_polar(problem, t, P, points, angles, dp)


def _contour_polar(problem, t, P, points, angles, dp):
    """
    Rank-two propagator in polar form at ambient ``points``::

        delta u = D int_0^P sin(p t) int_{|w|=1} F(p w) e^{i p <w, X>} dw dp

    Midpoint rule in ``p`` and the trapezoidal rule in the angle.
    """
    data, D = problem.data, problem.D
    if points is None:
        raise ValueError("rank-two contour evaluation needs explicit points")
    X = np.atleast_2d(np.asarray(points, dtype=float))
    R = float(np.max(np.sqrt(data._s * np.sum(X * X, axis=-1))))
    if angles is None:
        angles = int(2 * math.ceil(0.75 * P * (R + problem.eps) + 16))
    p = (np.arange(int(math.ceil(P / dp))) + 0.5) * dp
    q, _ = np.linalg.qr(data.simple_roots.T.astype(float))
    basis = q.T[:2] / math.sqrt(data._s)
    a = 2 * np.pi * np.arange(angles) / angles
    dirs = np.cos(a)[:, None] * basis[0] + np.sin(a)[:, None] * basis[1]
    # covolume of the weight lattice in the invariant metric
    B = data.fundamental_weights
    gram = data._s * (B @ B.T)
    covol = math.sqrt(abs(np.linalg.det(gram)))
    cv = D.coefficient_values(X)
    total = np.zeros(X.shape[0], dtype=complex)
    for pj in p:
        amb = pj * dirs
        lam = data.to_coords(amb)
        F = pw_extend(problem.f, data, D, lam.astype(complex) - data.rho)
        mono = D.monomials(amb)
        ph = np.exp(1j * data._s * (amb @ X.T))
        inner = (F[:, None] * ph).T @ mono
        total += (2 * np.pi / angles) * pj * dp * math.sin(pj * t) / pj * np.einsum(
            "pb,bp->p", inner, cv)
    u = total / covol / data.delta(X)
    return u


# ---------------------------------------------------------------------------
# trajectories and Huygens diagnostics
# ---------------------------------------------------------------------------

_SOLVERS = {"series": solve_series, "reduction": solve_reduction, "contour": solve_contour}


def trajectory(problem, method="series", gamma=0.0, threads=1):
    """Solve on every time of ``problem.time_grid`` with the chosen method."""
    if method not in _SOLVERS:
        raise ValueError(f"unknown method {method!r}; choose series, reduction or contour")
    if method == "contour":
        solve = lambda t: solve_contour(problem, t, gamma)
        if problem.data.rank != 1:
            raise ValueError("full-grid contour trajectories are available in rank one only")
    else:
        solve = lambda t: _SOLVERS[method](problem, t)
    times = problem.time_grid
    if method in ("reduction", "contour"):
        solve(times[0])  # fill shared caches before threading
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            fields = list(ex.map(solve, times))
    else:
        fields = [solve(t) for t in times]
    return WaveTrajectory(method, times, fields, problem.eps, problem, gamma)


def huygens_report(traj, tol=1e-6, normalization="matched"):
    """
    Leakage outside the light cone and inside the backward cone.

    ``L_cone(t) = sup_{d > t+eps+2h} |u| / sup|u|`` and
    ``L_shell(t) = sup_{d < t-eps-2h} |delta u| / peak``.  With
    ``normalization="matched"`` the shell peak is ``sup |delta u|`` over the
    trajectory; ``"global"`` divides both by ``sup |u|``.  Strong Huygens is
    asserted only for odd-dimensional spaces.
    """
    if normalization not in ("matched", "global"):
        raise ValueError("normalization must be 'matched' or 'global'")
    grid = traj.fields[0].grid
    data = grid.data
    dist, h, dl = grid.dist, grid.h, grid.delta
    eps = traj.eps
    peak_u = max(float(np.max(np.abs(f.values))) for f in traj.fields)
    peak_du = max(float(np.max(np.abs(dl * f.values))) for f in traj.fields)
    shell_peak = peak_du if normalization == "matched" else peak_u
    Lc, Ls = [], []
    for t, f in zip(traj.times, traj.fields):
        a = np.abs(f.values)
        out = dist > t + eps + 2 * h
        inn = dist < t - eps - 2 * h
        Lc.append(float(np.max(a[out])) / peak_u if np.any(out) and peak_u > 0 else 0.0)
        Ls.append(float(np.max((dl * a)[inn])) / shell_peak if np.any(inn) and shell_peak > 0
                  else 0.0)
    odd = data.dim_space % 2 == 1
    shell_ok = bool(max(Ls) <= tol)
    cone_ok = bool(max(Lc) <= tol)
    return {
        "t": [float(t) for t in traj.times], "L_cone": Lc, "L_shell": Ls,
        "pass": shell_ok, "finite_speed_pass": cone_ok, "asserted": odd,
        "odd_dimension": odd, "dim": data.dim_space, "tol": tol,
        "normalization": normalization, "peak_u": peak_u, "peak_delta_u": peak_du,
        "method": traj.method, "eps": eps,
    }


def exponential_estimate_check(problem, t, gamma_list=(0, 1, 2, 5), shell_gap=0.1):
    """
    Empirical constants ``C(gamma) = sup |delta u| e^{gamma (t - d - eps)}`` over
    grid points inside the cone, from the contour solution at each ``gamma``.
    """
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    grid = problem.grid
    dist, dl = grid.dist, grid.delta
    rows = []
    deep = []
    peak = 0.0
    for gam in gamma_list:
        best = 0.0
        for tt in ts:
            u = solve_contour(problem, tt, float(gam)).values
            du = np.abs(dl * u)
            peak = max(peak, float(du.max()))
            inside = dist <= tt + problem.eps
            if np.any(inside):
                best = max(best, float(np.max(du[inside] * np.exp(
                    gam * (tt - dist[inside] - problem.eps)))))
            if gam == gamma_list[0]:
                gap = dist < tt - problem.eps - shell_gap
                deep.append(float(np.max(du[gap])) if np.any(gap) else 0.0)
        rows.append({"gamma": float(gam), "C_emp": best})
    C = np.array([r["C_emp"] for r in rows])
    ratio = float(C.max() / C.min()) if C.min() > 0 else math.inf
    return {"t": ts.tolist(), "rows": rows, "ratio": ratio, "pass": bool(ratio <= 10),
            "deep_interior_max": max(deep) / peak if peak > 0 else 0.0}


def closed_form_s3(problem, t):
    """
    Rank-one, multiplicity-two witness ``delta u = -(1/4) sin(theta) (g(theta+t) - g(theta-t))``.

    Returns ``(delta_u_series, closed_form)`` on the grid, where ``g`` is the
    Euclidean inverse transform of ``fhat(lam - rho)``.
    """
    data = problem.data
    if data.family != "sphere_odd" or data.m != 1:
        raise ValueError("the closed form holds on the three-sphere only")
    G = euclidean_transform_of_datum(problem)
    gp = G.shifted([1.0], t).on_base_grid()
    gm = G.shifted([1.0], -t).on_base_grid()
    theta = problem.grid.X[..., 0]
    rhs = -0.25 * np.sin(theta) * (gp - gm).real
    lhs = problem.grid.delta * solve_series(problem, t).values
    return lhs, rhs


def initial_condition_defects(problem, dt=None):
    """``(|u(.,0)|_inf, |(u(dt)-u(-dt))/(2 dt) - f|_inf)`` of the series solution."""
    dt = dt or 1e-3
    u0 = solve_series(problem, 0.0).values
    up = solve_series(problem, dt).values
    um = solve_series(problem, -dt).values
    return float(np.max(np.abs(u0))), float(np.max(np.abs((up - um) / (2 * dt) - problem.f.values)))

"""
Spherical Fourier analysis of W-invariant functions on the torus.

The forward transform is the trapezoidal quadrature::

    fhat(mu) = c * mean_grid[ f(X) psi_mu(-X) delta(X) ]
             = c / d(mu) * mean_grid[ f(X) sum_w (D b^{w(mu+rho)})(-X) ]

evaluated with one FFT per distinct coefficient function of ``D``.  Its
holomorphic extension uses the same quadrature over the support of ``f``
(lifted to the fundamental domain around the origin) at arbitrary complex
``lam``.  Synthesis sums ``d(mu) fhat(mu) psi_mu``; on odd spheres the
quotient by ``delta`` is taken in Chebyshev form, which is exact at the poles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy.fft import dct

from .rootsys import SpectralParameter, _coords, dominant_weights, torus_grid
from .specfunc import (D_ZERO_TOL, build_shift_operator, dimension,
                       orbit_numerator, richardson, spherical_function)

__all__ = [
    "AliasingError", "RadialFunction", "SphericalCoefficients", "TypeEstimate",
    "LambdaGrid", "bump_profile", "standard_bump", "measure_constant",
    "forward_transform", "inverse_transform", "synthesize_coefficients",
    "pw_extend", "pw_extend_adjoint", "exponential_type_estimate",
    "synthesize_from_pw", "support_radius", "integral_representation",
    "spectral_derivative", "quotient_by_sines", "sine_quotient_form",
]

MEM_BUDGET = 4_000_000  # complex entries per temporary block


class AliasingError(ValueError):
    """Requested frequencies exceed the grid Nyquist limit."""


class RadialFunction:
    """
    Samples of a W-invariant function on a :class:`~hkwave.rootsys.TorusGrid`.

    Parameters
    ----------
    grid : TorusGrid
    values : ndarray of shape ``grid.shape``
    eps : float or None
        Declared support radius around the origin.
    """

    def __init__(self, grid, values, eps=None, meta=None):
        values = np.asarray(values)
        if values.shape != grid.shape:
            raise ValueError(f"values shape {values.shape} does not match grid {grid.shape}")
        self.grid = grid
        self.values = values
        self.eps = eps
        self.meta = dict(meta or {})
        self._cache = {}

    @classmethod
    def from_callable(cls, grid, func, eps=None, symmetrize=True):
        """Sample ``func(X)`` (ambient points) and average over the Weyl group."""
        X = grid.X
        if symmetrize:
            ws = grid.data.weyl_ambient
            vals = sum(func(X @ w.T) for w in ws) / len(ws)
        else:
            vals = func(X)
        return cls(grid, vals, eps)

    @property
    def data(self):
        return self.grid.data

    @property
    def X(self):
        return self.grid.X

    @property
    def dist(self):
        return self.grid.dist

    def sup(self):
        return float(np.max(np.abs(self.values)))

    def real(self):
        return RadialFunction(self.grid, self.values.real, self.eps, self.meta)

    def __repr__(self):
        return (f"RadialFunction({self.data.family}, N={self.grid.N}, "
                f"eps={self.eps}, sup={self.sup():.3g})")


def bump_profile(r, eps):
    """``exp(-eps^2/(eps^2 - r^2))`` on ``r < eps``, zero outside."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    mk = np.abs(r) < eps
    out[mk] = np.exp(-eps ** 2 / (eps ** 2 - r[mk] ** 2))
    return out


def standard_bump(data, eps, N=None):
    """The standard test bump of radius ``eps`` on the grid of size ``N``."""
    grid = torus_grid(data, N)
    return RadialFunction(grid, bump_profile(grid.dist, eps), eps)


def measure_constant(grid):
    """``c = 1 / mean(delta)``, so that the constant 1 has ``fhat(0) = 1``."""
    return 1.0 / float(np.mean(grid.delta))


@dataclass
class SphericalCoefficients:
    """Spherical Fourier coefficients on the dominant weights within a cutoff."""
    data: object
    mus: np.ndarray
    values: np.ndarray
    cutoff: float
    c_meas: float
    meta: dict = field(default_factory=dict)

    def as_dict(self):
        return {tuple(int(v) for v in m): complex(c) for m, c in zip(self.mus, self.values)}

    def __getitem__(self, mu):
        mu = tuple(int(v) for v in np.atleast_1d(mu))
        idx = np.flatnonzero((self.mus == np.asarray(mu)).all(axis=1))
        if idx.size == 0:
            raise KeyError(mu)
        return complex(self.values[idx[0]])

    def records(self):
        return [{"mu": [int(v) for v in m], "re": float(c.real), "im": float(c.imag)}
                for m, c in zip(self.mus, self.values)]

    def decay_diagnostic(self, N=4):
        nrm = self.data.norm(self.mus)
        return float(np.max((1 + nrm) ** N * np.abs(self.values)))

    def with_values(self, values, **meta):
        return SphericalCoefficients(self.data, self.mus, np.asarray(values),
                                     self.cutoff, self.c_meas, {**self.meta, **meta})


def _orbit_indices(data, mus, N):
    """Integer coordinates of w(mu+rho) for all w: array (|W|, M, n)."""
    nu = mus + data.rho
    out = np.stack([nu @ wc for wc in data.weyl_coords])
    if out.size and np.max(np.abs(out)) >= N // 2:
        raise AliasingError(
            f"cutoff exceeds the grid Nyquist limit (frequency {int(np.max(np.abs(out)))} "
            f">= {N // 2}); increase --grid or lower --cutoff")
    return out


def _phase(grid, k):
    """exp(-2 pi i k.o/N) for integer frequency vectors k (..., n)."""
    return np.exp(-2j * np.pi * (k @ np.asarray(grid.offset)) / grid.N)


def _group_ratios(D, amb):
    """For each coefficient group: sum_beta r_beta (i s nu)^beta, shape (G, ...)."""
    mono = D.monomials(amb)
    col = {b: i for i, b in enumerate(D.betas)}
    out = []
    for _, members in D.coefficient_groups():
        acc = 0
        for b, r in members:
            acc = acc + r * mono[..., col[b]]
        out.append(acc)
    return out


def forward_transform(f, data=None, D=None, cutoff=None):
    """
    Spherical Fourier coefficients of ``f`` on the dominant weights.

    Parameters
    ----------
    f : RadialFunction
    cutoff : float, optional
        Norm cutoff on ``mu``; defaults to the largest alias-free value.
    """
    grid = f.grid
    data = data or grid.data
    D = D or build_shift_operator(data)
    if cutoff is None:
        cutoff = max_cutoff(data, grid.N)
    mus = dominant_weights(data, cutoff)
    orb = _orbit_indices(data, mus, grid.N)
    c = measure_constant(grid)
    Ntot = grid.size
    Xneg = -grid.X
    dfh = np.zeros(len(mus), dtype=complex)
    for gi, (poly, members) in enumerate(D.coefficient_groups()):
        G = f.values * poly.evaluate(Xneg) * D.normalization
        S = np.fft.fftn(G) / Ntot
        for wi in range(len(data.weyl_coords)):
            k = orb[wi]
            amb = data.to_ambient(k)
            ratio = _group_ratios(D, amb)[gi]
            dfh += ratio * S[tuple((k % grid.N).T)] * _phase(grid, k)
    vals = c * dfh / dimension(data, mus)
    return SphericalCoefficients(data, mus, vals, float(cutoff), c,
                                 {"grid": grid.N})


def max_cutoff(data, N):
    """Largest norm cutoff whose Weyl orbits stay below the Nyquist frequency."""
    lo, hi = 0.0, float(N) * max(data.norm(np.eye(data.rank)))
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        mus = dominant_weights(data, mid)
        nu = mus + data.rho
        kmax = max(np.max(np.abs(nu @ wc)) for wc in data.weyl_coords)
        if kmax < N // 2:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-6:
            break
    return lo


def _tail_estimate(data, mus, weights):
    """Extrapolate the tail sum of ``d(mu) |fhat(mu)|`` from the last two bands."""
    if len(mus) < 10:
        return 0.0
    nrm = data.norm(mus)
    top = nrm.max()
    t = np.abs(weights)
    s1 = t[(nrm > 0.8 * top) & (nrm <= 0.9 * top)].sum()
    s2 = t[nrm > 0.9 * top].sum()
    if s2 == 0:
        return 0.0
    if s1 <= s2:
        return math.inf
    q = s2 / s1
    return float(s2 * q / (1 - q))


def _chebyshev_quotient(data, D, nus, weights, N):
    """
    ``delta^{-1} D [sum_nu weights 2 cos(nu theta)]`` on the rank-one sphere grid.

    Uses ``delta^{-1} D = c_m (-d/dx)^m`` in ``x = cos theta`` and a type-III
    DCT on the half grid.
    """
    m = data.m
    M = N // 2
    nus = np.asarray(nus)
    kmax = int(nus.max()) if len(nus) else 0
    if kmax >= M:
        raise AliasingError(f"frequency {kmax} exceeds the half grid {M}; increase --grid")
    coef = np.zeros(kmax + 1, dtype=complex)
    np.add.at(coef, nus.astype(int), 2 * np.asarray(weights))
    dc = cheb.chebder(coef, m) * D.normalization * (-1) ** m if kmax >= m else np.zeros(1)
    a = np.zeros(M, dtype=complex)
    a[:len(dc)] = dc
    y = dct(a.real, type=3) + 1j * dct(a.imag, type=3)
    half = (y - a[0]) / 2 + a[0]
    return np.concatenate([half, half[::-1]])


def sine_quotient_form(D):
    """
    ``(constant, root labels)`` if ``normalization * a(X) / delta(X)`` equals
    ``constant / prod_alpha (e^{i alpha} - e^{-i alpha})`` for the only
    coefficient group of ``D``; otherwise None.
    """
    data = D.data
    groups = D.coefficient_groups()
    if len(groups) != 1 or data.multiplicity != 2:
        return None
    poly = groups[0][0]
    if len(poly.terms) != 1:
        return None
    (a, b), c0 = next(iter(poly.terms.items()))
    if any(v != 1 for v in a) or any(b):
        return None
    npos = data.n_positive
    # a / delta = c0 / prod sin = c0 (2i)^npos / prod (e^{i alpha} - e^{-i alpha})
    const = D.normalization * complex(c0) * (2j) ** npos
    # Dynkin labels: twice the lattice coordinates, integral for every root
    return const, [np.asarray(r, dtype=int) for r in data.root_labels]


@lru_cache(maxsize=16)
def _line_plan(shape, a):
    """Sort order of a centred frequency box along lines of step ``2a``."""
    M = shape[0]
    n = len(shape)
    step = 2 * np.asarray(a, dtype=np.int64)
    idx = np.indices(shape, dtype=np.int64).reshape(n, -1).T - M // 2
    pos = np.floor_divide(idx @ step, int(step @ step))
    base = idx - pos[:, None] * step
    lid = np.ravel_multi_index(tuple((base % M).T), shape)
    order = np.lexsort((pos, lid))
    del idx, pos, base
    lid_s = lid[order]
    order = order.astype(np.int32 if order.size < 2**31 else np.int64)
    start = np.flatnonzero(np.r_[True, lid_s[1:] != lid_s[:-1]])
    lengths = np.diff(np.r_[start, lid_s.size])
    return order, start, lengths


def quotient_by_sines(C, shifts):
    """
    Divide a trigonometric polynomial by ``prod_a (e^{i a.x} - e^{-i a.x})``.

    ``C`` holds coefficients in FFT order on a periodic frequency box whose
    occupied part is far from the box edges.  Each factor is removed exactly
    by the recurrence ``Q[k+a] = Q[k-a] - C[k]``, evaluated as cumulative sums
    along lines of step ``2a``.  Returns ``(Q, residual)`` where ``residual``
    is the relative size of the non-divisible remainder.
    """
    n = C.ndim
    Q = np.fft.fftshift(C)
    resid = 0.0
    scale = float(np.max(np.abs(C))) or 1.0
    for a in shifts:
        a = tuple(int(v) for v in a)
        order, start, lengths = _line_plan(Q.shape, a)
        cs = np.cumsum(Q.ravel()[order])
        offs = np.r_[0.0 + 0j, cs][start]
        cs -= np.repeat(offs, lengths)
        resid = max(resid, float(np.max(np.abs(cs[start + lengths - 1]))) / scale)
        S = np.empty_like(cs)
        S[order] = cs
        # Q_new[k] = -S[k - a]
        Q = -np.roll(S.reshape(Q.shape), shift=a, axis=tuple(range(n)))
    return np.fft.ifftshift(Q), resid


def _label_space_quotient(data, D, freqs, weights, M, q, shifts, ratios=None):
    """
    Coefficients of ``sum weights * sum_beta a_beta(X) d^beta e^{i<k/q, X>} / delta``.

    ``freqs`` are integer frequency vectors (|W|, L, n) on a box of size ``M``
    (lattice ``Lambda / q``).  The division runs on labels ``2k``, where the
    root factors are integral shifts ``q * label``.
    """
    C = np.zeros((2 * M,) * data.rank, dtype=complex)
    for wi in range(freqs.shape[0]):
        k = freqs[wi]
        r = _group_ratios(D, data.to_ambient(k / q))[0] if ratios is None else ratios[wi]
        np.add.at(C, tuple((2 * k % (2 * M)).T), weights * r)
    Q2, _ = quotient_by_sines(C, [q * a for a in shifts])
    return Q2[(slice(None, None, 2),) * data.rank]


def synthesize_coefficients(data, D, grid, mus, weights):
    """
    ``sum_mu weights(mu) * sum_w (D b^{w(mu+rho)}) / delta`` on the grid.

    With ``weights = fhat`` this is the inverse transform.  When the quotient
    by ``delta`` has a closed form (odd spheres, compact groups) it is taken
    in coefficient space, so nodes near the walls keep full accuracy.
    """
    mus = np.atleast_2d(np.asarray(mus))
    weights = np.asarray(weights, dtype=complex)
    if data.family == "sphere_odd":
        nus = mus[:, 0] + data.m
        return _chebyshev_quotient(data, D, nus, weights, grid.N)
    orb = _orbit_indices(data, mus, grid.N)
    Ntot = grid.size
    form = sine_quotient_form(D)
    if form is not None:
        const, shifts = form
        Q = _label_space_quotient(data, D, orb, weights, grid.N, 1, shifts)
        K = np.stack(np.meshgrid(*[grid.frequencies()] * grid.n, indexing="ij"), axis=-1)
        return const * np.fft.ifftn(Q * np.conj(_phase(grid, K))) * Ntot
    total = np.zeros(grid.shape, dtype=complex)
    for gi, (poly, members) in enumerate(D.coefficient_groups()):
        C = np.zeros(grid.shape, dtype=complex)
        for wi in range(len(data.weyl_coords)):
            k = orb[wi]
            ratio = _group_ratios(D, data.to_ambient(k))[gi]
            np.add.at(C, tuple((k % grid.N).T), weights * ratio * np.conj(_phase(grid, k)))
        V = np.fft.ifftn(C) * Ntot
        total += D.normalization * poly.evaluate(grid.X) * V
    return total / grid.delta


def inverse_transform(coeffs, data=None, D=None, N=None):
    """Synthesize ``sum d(mu) fhat(mu) psi_mu`` on a grid of size ``N``."""
    data = data or coeffs.data
    D = D or build_shift_operator(data)
    grid = torus_grid(data, N or coeffs.meta.get("grid"))
    vals = synthesize_coefficients(data, D, grid, coeffs.mus, coeffs.values)
    tail = _tail_estimate(data, coeffs.mus, dimension(data, coeffs.mus) * coeffs.values)
    meta = {"tail_estimate": tail, "truncation_warning": bool(tail > 1e-10)}
    return RadialFunction(grid, vals, None, meta)


# ---------------------------------------------------------------------------
# holomorphic extension
# ---------------------------------------------------------------------------

def _support_nodes(f, margin_steps=0):
    grid = f.grid
    nz = np.abs(f.values) > 0
    if f.eps is not None:
        nz &= grid.dist <= f.eps + margin_steps * grid.h + 1e-15
    return nz


def _lam_rows(lam):
    """Rows (L, n) of spectral parameters and whether a single one was given."""
    if isinstance(lam, SpectralParameter):
        return lam.array[None, :], True
    arr = np.asarray(lam, dtype=complex)
    if arr.ndim <= 1:
        return arr.reshape(1, -1), True
    return arr, False


def _extension_setup(f, D):
    key = ("ext", id(D))
    if key not in f._cache:
        mask = _support_nodes(f)
        X = f.grid.X[mask]
        Xneg = -X
        f._cache[key] = (f.values[mask], Xneg, D.coefficient_values(Xneg),
                         measure_constant(f.grid))
    return f._cache[key]


def pw_extend(f, data, D, lam):
    """
    Holomorphic extension ``fhat(lam)`` by quadrature over the support of ``f``.

    ``lam`` is a SpectralParameter or an array of simple coordinates (n,) or
    (L, n).  Near zeros of ``d`` the Richardson rule is applied.
    """
    lam, single = _lam_rows(lam)
    fv, Xneg, cv, c = _extension_setup(f, D)
    Ntot = f.grid.size
    chunk = max(1, MEM_BUDGET // max(1, Xneg.shape[0]))

    def raw(L):
        out = np.empty(L.shape[0], dtype=complex)
        for i0 in range(0, L.shape[0], chunk):
            blk = L[i0:i0 + chunk]
            num = orbit_numerator(D, blk + data.rho, Xneg, cv, chunk=chunk)
            with np.errstate(divide="ignore", invalid="ignore"):
                out[i0:i0 + chunk] = c / Ntot * (num @ fv) / dimension(data, blk)
        return out

    out = richardson(raw, lam, dimension(data, lam))
    return complex(out[0]) if single else out


def spectral_derivative(values, grid, beta):
    """Spectral partial derivative ``d^beta`` (ambient directions) on the torus grid."""
    if not any(beta):
        return np.asarray(values, dtype=complex)
    data = grid.data
    ks = np.meshgrid(*[grid.frequencies()] * grid.n, indexing="ij")
    K = np.stack(ks, axis=-1)
    amb = data.to_ambient(K)
    mult = np.ones(grid.shape, dtype=complex)
    s = float(data.scale)
    for j, e in enumerate(beta):
        if e:
            mult = mult * (1j * s * amb[..., j]) ** e
    nyq = np.zeros(grid.shape, dtype=bool)
    for ax in range(grid.n):
        sl = [slice(None)] * grid.n
        sl[ax] = grid.N // 2
        nyq[tuple(sl)] = True
    mult[nyq] = 0
    # offsets: values live at (j + o)/N, the derivative multiplier is offset-free
    # after removing and restoring the shift phase
    ph = np.exp(-2j * np.pi * (K @ np.asarray(grid.offset)) / grid.N)
    F = np.fft.fftn(values) * ph
    return np.fft.ifftn(F * mult / ph)


def _adjoint_setup(f, D):
    key = ("adj", id(D))
    if key not in f._cache:
        grid = f.grid
        Dt = D.adjoint()
        total = np.zeros(grid.shape, dtype=complex)
        for b in Dt.betas:
            total += Dt.terms[b].evaluate(grid.X) * spectral_derivative(f.values, grid, b)
        total *= Dt.normalization
        supp = float(np.max(grid.dist[np.abs(f.values) > 0])) if np.any(f.values) else 0.0
        mask = grid.dist <= supp + 4 * grid.h
        f._cache[key] = (total[mask], grid.X[mask], measure_constant(grid))
    return f._cache[key]


def pw_extend_adjoint(f, data, D, lam):
    """
    Extension via the adjoint operator::

        d(lam) fhat(lam) = c |W| int (D^t f)(X) exp(-i <lam + rho, X>) dX

    with ``D^t f`` computed by spectral differentiation on the grid.
    """
    lam, single = _lam_rows(lam)
    g, X, c = _adjoint_setup(f, D)
    Ntot = f.grid.size
    s = float(data.scale)
    W = data.order_weyl
    chunk = max(1, MEM_BUDGET // max(1, X.shape[0]))

    def raw(L):
        out = np.empty(L.shape[0], dtype=complex)
        for i0 in range(0, L.shape[0], chunk):
            blk = L[i0:i0 + chunk]
            amb = data.to_ambient(blk + data.rho)
            ph = np.exp(-1j * s * (amb @ X.T))
            with np.errstate(divide="ignore", invalid="ignore"):
                out[i0:i0 + chunk] = c * W / Ntot * (ph @ g) / dimension(data, blk)
        return out

    out = richardson(raw, lam, dimension(data, lam))
    return complex(out[0]) if single else out


# ---------------------------------------------------------------------------
# exponential type and synthesis
# ---------------------------------------------------------------------------

DEFAULT_RADII = tuple(range(50, 401, 50))


@dataclass
class TypeEstimate:
    """Result of :func:`exponential_type_estimate`."""
    ok: bool
    R_est: float
    radii: list
    log_growth: list
    message: str = ""


def _ray_directions(data, count):
    if data.rank == 1:
        a = data.fundamental_weights[0]
        return np.array([[1.0], [-1.0]]) / data.norm([1.0])
    q, _ = np.linalg.qr(data.simple_roots.T.astype(float))
    basis = q.T[:data.rank] / math.sqrt(float(data.scale))
    ang = 2 * np.pi * np.arange(count) / count
    dirs = []
    for a in ang:
        v = np.zeros(data.ambient_dim)
        v += math.cos(a) * basis[0]
        v += math.sin(a) * basis[1 % data.rank]
        dirs.append(data.to_coords(v))
    return np.array(dirs)


def exponential_type_estimate(f, data, D, ray_count=8, radius_list=None, N=4):
    """
    Estimate the exponential type from growth along imaginary rays.

    Fits the least-squares slope of ``log max_rays |fhat(i r w)| (1+r)^N``
    against ``r``.  Growth that is not monotone yields ``ok = False``.
    """
    radii = np.asarray(radius_list if radius_list is not None else DEFAULT_RADII, float)
    dirs = _ray_directions(data, ray_count)
    lam = (1j * radii[:, None, None] * dirs[None, :, :]).reshape(-1, data.rank)
    vals = np.abs(pw_extend(f, data, D, lam)).reshape(len(radii), len(dirs))
    growth = np.log(np.max(vals, axis=1) * (1 + radii) ** N)
    if not np.all(np.isfinite(growth)):
        return TypeEstimate(False, math.nan, radii.tolist(), growth.tolist(),
                            "non-finite values along the rays")
    slope = float(np.polyfit(radii, growth, 1)[0])
    if np.any(np.diff(growth) <= 0):
        return TypeEstimate(False, slope, radii.tolist(), growth.tolist(),
                            "growth along the rays is not monotone")
    return TypeEstimate(True, slope, radii.tolist(), growth.tolist(), "")


class DomainError(ValueError):
    """Input violates the precondition of an operation."""


def _call_vectorized(F, lam):
    try:
        out = np.asarray(F(lam), dtype=complex)
        if out.shape == (lam.shape[0],):
            return out
    except Exception:
        pass
    return np.array([complex(F(l)) for l in lam])


def check_w_symmetry(F, data, samples=5, seed=7, tol=1e-9):
    """Max relative defect of ``F(w(lam+rho)-rho) = F(lam)`` on random samples."""
    rng = np.random.default_rng(seed)
    lam = rng.normal(size=(samples, data.rank)) * 3 + 1j * rng.normal(size=(samples, data.rank))
    base = _call_vectorized(F, lam)
    worst = 0.0
    for wc in data.weyl_coords:
        img = (lam + data.rho) @ wc - data.rho
        v = _call_vectorized(F, img)
        worst = max(worst, float(np.max(np.abs(v - base) / np.maximum(np.abs(base), 1e-300))))
    return worst


def synthesize_from_pw(F, data, D, cutoff, N=None, R=None, check=True):
    """
    Synthesize ``sum d(mu) F(mu) psi_mu`` from a Paley-Wiener function ``F``.

    ``F`` maps an array (L, n) of simple coordinates to (L,) values.  With
    ``R`` given, the measured support radius is compared with ``R + 2h`` and
    the verdict stored in ``meta``.
    """
    if check:
        defect = check_w_symmetry(F, data)
        if defect > 1e-9:
            raise DomainError(f"F is not W-symmetric (relative defect {defect:.2e})")
    grid = torus_grid(data, N)
    mus = dominant_weights(data, cutoff)
    vals = _call_vectorized(F, mus.astype(complex))
    coeffs = SphericalCoefficients(data, mus, vals, float(cutoff), measure_constant(grid),
                                   {"grid": grid.N})
    out = inverse_transform(coeffs, data, D, grid.N)
    out.eps = R
    if R is not None:
        rad = support_radius(out)
        out.meta.update({"support_radius": rad, "support_ok": bool(rad <= R + 2 * grid.h)})
    return out


def support_radius(f, tol=1e-8):
    """Smallest grid radius outside which ``|f| <= tol * sup|f|``."""
    a = np.abs(f.values)
    peak = a.max()
    if peak == 0:
        return 0.0
    big = a > tol * peak
    return float(f.grid.dist[big].max())


# ---------------------------------------------------------------------------
# integral representation
# ---------------------------------------------------------------------------

@dataclass
class LambdaGrid:
    """Uniform grid ``spacing * (k + offset)`` in simple coordinates, norm <= cutoff."""
    spacing: float = 0.5
    cutoff: float = 3000.0
    offset: float = 0.5

    def points(self, data):
        n = data.rank
        kmax = int(self.cutoff / (self.spacing * min(data.norm(np.eye(n))))) + 2
        ax = np.arange(-kmax, kmax + 1) + self.offset
        mesh = np.meshgrid(*[ax] * n, indexing="ij")
        pts = self.spacing * np.stack([m.ravel() for m in mesh], axis=-1)
        return pts[data.norm(pts) <= self.cutoff]

    def weight(self, data):
        return self.spacing ** data.rank


def integral_representation(f, data, D, b, lam_grid=None, tail_tol=1e-10):
    """
    Evaluate both integral formulas for a small-support ``f`` at ambient points ``b``.

    Returns a dict with ``delta_f`` (from ``D int fhat(lam-rho) b^lam dlam``),
    ``f`` (from ``|W|^-1 int fhat(lam-rho) d(lam-rho) phi_lam dlam``) and the
    relative size of the integrand on the outer shell of the grid.
    """
    lam_grid = lam_grid or LambdaGrid()
    b = np.atleast_2d(np.asarray(b, dtype=float))
    kap = lam_grid.points(data)
    w = lam_grid.weight(data)
    F = pw_extend(f, data, D, kap.astype(complex) - data.rho)
    nrm = data.norm(kap)
    outer = nrm > 0.95 * lam_grid.cutoff
    tail = float(np.max(np.abs(F[outer])) / np.max(np.abs(F))) if np.any(outer) else 0.0
    if tail > tail_tol:
        raise ValueError(f"lambda grid truncation too coarse (relative tail {tail:.2e})")
    amb = data.to_ambient(kap)
    s = float(data.scale)
    cv = D.coefficient_values(b)
    delta_f = np.zeros(b.shape[0], dtype=complex)
    chunk = max(1, MEM_BUDGET // max(1, b.shape[0]))
    for i0 in range(0, len(kap), chunk):
        a = amb[i0:i0 + chunk]
        p = D.monomials(a) @ cv
        delta_f += (F[i0:i0 + chunk] * w) @ (p * np.exp(1j * s * (a @ b.T)))
    num = np.zeros(b.shape[0], dtype=complex)
    for i0 in range(0, len(kap), chunk):
        blk = kap[i0:i0 + chunk].astype(complex)
        num += (F[i0:i0 + chunk] * w) @ orbit_numerator(D, blk, b, cv)
    f_val = num / data.order_weyl / data.delta(b)
    return {"delta_f": delta_f, "f": f_val, "tail": tail}

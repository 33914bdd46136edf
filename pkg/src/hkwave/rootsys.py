"""
Root data, Weyl groups, weight lattices and torus geometry.

Two families are supported: odd spheres ``S^(2m+1)`` (rank one, root
multiplicity ``2m``) and compact simple Lie groups viewed as symmetric spaces
(all multiplicities 2).

Conventions
-----------
Weights are stored in *simple coordinates* ``x_i = <lam, a_i>/<a_i, a_i>``
so that the spherical lattice is ``Z^n`` and its dominant part is ``N_0^n``.
Inner products and Weyl matrices live in an *ambient* realization: ``R`` for
spheres (root ``1``, ``<a,a> = 1``), the sum-zero hyperplane of ``R^(n+1)``
for type A, and ``R^n`` for types B, C, D.  The invariant form is
``<x, y> = scale * (x . y)`` with ``scale = 1`` except for type C, where
``scale = 1/2`` so that long roots have ``<a,a> = 2``.

Characters are ``b^lam(H) = exp(i <lam, H>)``; real ``lam`` gives unimodular
characters.  Torus points are written ``H = sum_j t_j gamma_j`` with period
coordinates ``t`` and ``gamma_j = 2 pi a_j / <a_j, a_j>``, so that
``b^mu = exp(2 pi i mu . t)`` for ``mu`` in simple coordinates.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field, asdict
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from .laurent import solve_exact

__all__ = [
    "ConfigError", "SpaceConfig", "SpectralParameter", "SymmetricSpaceData",
    "TorusGrid", "PRESETS", "build_space", "preset", "load_config",
    "weyl_group", "lambda_alpha", "dominant_spherical", "enumerate_dominant",
    "dominant_weights", "weyl_orbit_sum", "torus_grid",
]

MAX_WEYL_ORDER = math.factorial(10)


class ConfigError(ValueError):
    """Invalid or unsupported space configuration."""


@dataclass(frozen=True)
class SpaceConfig:
    """
    Configuration of a symmetric space.

    Attributes
    ----------
    family : {"sphere_odd", "complex_group"}
    m : int
        Half-multiplicity (spheres); forced to 1 for complex groups.
    root_type : {"A", "B", "C", "D"} or None
    rank : int or None
    grid_size : int
        Default number of grid nodes per torus direction.
    """
    family: str
    m: int = 1
    root_type: str | None = None
    rank: int | None = None
    grid_size: int = 512

    def validate(self):
        if self.family not in ("sphere_odd", "complex_group"):
            raise ConfigError(f"family: unsupported value {self.family!r} "
                              "(expected 'sphere_odd' or 'complex_group')")
        if not isinstance(self.m, int) or self.m < 1:
            raise ConfigError(f"m: must be a positive integer, got {self.m!r}")
        if not isinstance(self.grid_size, int) or self.grid_size < 4:
            raise ConfigError(f"grid_size: must be an integer >= 4, got {self.grid_size!r}")
        if self.family == "sphere_odd":
            if self.rank not in (None, 1):
                raise ConfigError(f"rank: sphere_odd has rank 1, got {self.rank!r}")
        else:
            if self.m != 1:
                raise ConfigError(f"m: complex_group requires m = 1, got {self.m!r}")
            if self.root_type not in ("A", "B", "C", "D"):
                raise ConfigError(f"root_type: unsupported value {self.root_type!r}")
            if not isinstance(self.rank, int) or self.rank < 1:
                raise ConfigError(f"rank: must be a positive integer, got {self.rank!r}")
            lo = {"A": 1, "B": 2, "C": 2, "D": 3}[self.root_type]
            if self.rank < lo:
                raise ConfigError(f"rank: type {self.root_type} needs rank >= {lo}, "
                                  f"got {self.rank}")
        return self

    @classmethod
    def from_dict(cls, d):
        known = {"family", "m", "root_type", "rank", "grid_size"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"{sorted(extra)[0]}: unknown configuration field")
        if "family" not in d:
            raise ConfigError("family: missing required field")
        return cls(**d).validate()

    def to_dict(self):
        return asdict(self)

    def key(self):
        return json.dumps(self.to_dict(), sort_keys=True)


PRESETS = {
    "s3": SpaceConfig("sphere_odd", m=1, grid_size=8192),
    "s5": SpaceConfig("sphere_odd", m=2, grid_size=8192),
    "s7": SpaceConfig("sphere_odd", m=3, grid_size=8192),
    "su2": SpaceConfig("complex_group", m=1, root_type="A", rank=1, grid_size=512),
    "su3": SpaceConfig("complex_group", m=1, root_type="A", rank=2, grid_size=2048),
}


def load_config(path):
    """Read a SpaceConfig from a JSON file."""
    try:
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: malformed JSON in {path}: {exc.msg} "
                          f"(line {exc.lineno})") from None
    if not isinstance(d, dict):
        raise ConfigError("config: top-level JSON value must be an object")
    return SpaceConfig.from_dict(d)


@dataclass(frozen=True)
class SpectralParameter:
    """A complex weight in simple coordinates."""
    coords: tuple

    def __init__(self, coords):
        object.__setattr__(self, "coords", tuple(complex(c) for c in np.ravel(coords)))

    @property
    def array(self):
        return np.array(self.coords, dtype=complex)

    @property
    def real(self):
        return SpectralParameter(self.array.real)

    @property
    def imag(self):
        return SpectralParameter(self.array.imag)

    def alpha(self, data, root):
        return lambda_alpha(data, self, root)


def _coords(lam):
    if isinstance(lam, SpectralParameter):
        return lam.array
    return np.asarray(lam, dtype=complex).reshape(-1) if np.ndim(lam) <= 1 \
        else np.asarray(lam, dtype=complex)


def _root_data(family, root_type, rank):
    """Return (positive roots, simple roots) in ambient integer coordinates."""
    if family == "sphere_odd":
        return np.array([[1]]), np.array([[1]])
    n = rank
    pos = []
    if root_type == "A":
        d = n + 1
        e = np.eye(d, dtype=int)
        for i in range(d):
            for j in range(i + 1, d):
                pos.append(e[i] - e[j])
        simple = [e[i] - e[i + 1] for i in range(n)]
    else:
        e = np.eye(n, dtype=int)
        for i in range(n):
            for j in range(i + 1, n):
                pos.append(e[i] - e[j])
                pos.append(e[i] + e[j])
        simple = [e[i] - e[i + 1] for i in range(n - 1)]
        if root_type == "B":
            pos += [e[i] for i in range(n)]
            simple.append(e[n - 1])
        elif root_type == "C":
            pos += [2 * e[i] for i in range(n)]
            simple.append(2 * e[n - 1])
        else:
            simple.append(e[n - 2] + e[n - 1])
    return np.array(pos), np.array(simple)


def _closure(generators):
    d = generators[0].shape[0]
    ident = np.eye(d, dtype=int)
    seen = {ident.tobytes(): ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for w in frontier:
            for s in generators:
                v = s @ w
                k = v.tobytes()
                if k not in seen:
                    seen[k] = v
                    nxt.append(v)
                    if len(seen) > MAX_WEYL_ORDER:
                        raise RuntimeError("Weyl group closure did not terminate; "
                                           "bad root data")
        frontier = nxt
    return sorted(seen.values(), key=lambda w: tuple(w.ravel()))


def _reflection(alpha):
    a = np.asarray(alpha, dtype=int)
    num = 2 * np.outer(a, a)
    den = int(a @ a)
    if np.any(num % den):
        raise RuntimeError("non-integral reflection")
    return np.eye(len(a), dtype=int) - num // den


class SymmetricSpaceData:
    """
    Root data and torus geometry for one configured space.

    Use :func:`build_space` to construct.
    """

    def __init__(self, config: SpaceConfig):
        config.validate()
        self.config = config
        self.family = config.family
        self.m = config.m
        self.rank = 1 if config.family == "sphere_odd" else config.rank
        self.scale = Fraction(1, 2) if config.root_type == "C" else Fraction(1)
        pos, simple = _root_data(config.family, config.root_type, self.rank)
        self.positive_roots = pos
        self.simple_roots = simple
        self.ambient_dim = pos.shape[1]
        self.multiplicity = 2 * self.m
        s = float(self.scale)
        self._s = s

        # rows of A map ambient weights to simple coordinates
        sq = s * np.einsum("ij,ij->i", simple, simple)
        self._to_coords = s * simple / sq[:, None]
        self.fundamental_weights = np.linalg.pinv(self._to_coords).T
        self.rho_ambient = self.m * pos.sum(axis=0).astype(float)
        self.rho = np.rint(self.rho_ambient @ self._to_coords.T).astype(int)

        # lambda_alpha = coords @ alpha_matrix
        possq = s * np.einsum("ij,ij->i", pos, pos)
        self._possq = possq
        self.alpha_matrix = np.rint(
            s * self.fundamental_weights @ pos.T / possq[None, :]).astype(int)
        cartan = np.array([[2 * s * (simple[i] @ simple[j]) / sq[j]
                            for j in range(self.rank)] for i in range(self.rank)])
        self.cartan = np.rint(cartan).astype(int)
        self.root_labels = np.rint(
            2 * s * pos @ simple.T / sq[None, :]).astype(int)

        gens = [_reflection(a) for a in simple]
        self.weyl_ambient = _closure(gens)
        self.weyl_coords = [
            np.rint(self.fundamental_weights @ w.T @ self._to_coords.T).astype(int)
            for w in self.weyl_ambient]
        self.weyl_det = np.array([int(round(np.linalg.det(w)))
                                  for w in self.weyl_ambient])

        self.periods = 2 * np.pi * simple / sq[:, None]
        self.dim_space = self._dim_space()
        self.R_small = self._r_small()
        self._check()

    # -- derived data ---------------------------------------------------
    @property
    def weyl_group(self):
        """Weyl group as integer matrices acting on ambient coordinates."""
        return self.weyl_ambient

    @property
    def order_weyl(self):
        return len(self.weyl_ambient)

    @property
    def n_positive(self):
        return self.positive_roots.shape[0]

    def _dim_space(self):
        if self.family == "sphere_odd":
            return 2 * self.m + 1
        n = self.rank
        return {"A": n * (n + 2), "B": n * (2 * n + 1), "C": n * (2 * n + 1),
                "D": n * (2 * n - 1)}[self.config.root_type]

    def _r_small(self):
        if self.family == "sphere_odd":
            return math.pi / 2
        best = math.inf
        for c in itertools.product(range(-2, 3), repeat=self.rank):
            if any(c):
                v = np.asarray(c, float) @ self.periods
                best = min(best, math.sqrt(self._s * v @ v))
        return 0.9 * 0.5 * best / 2

    def _check(self):
        rho_a = self.rho @ self.alpha_matrix
        if np.any(rho_a < self.m) or np.any(rho_a[self.simple_index] != self.m):
            raise RuntimeError("rho check failed")
        half = 0.5 * self.multiplicity * self.positive_roots.sum(axis=0)
        if not np.allclose(half, self.rho_ambient):
            raise RuntimeError("rho is not half the weighted root sum")

    @cached_property
    def simple_index(self):
        idx = []
        for a in self.simple_roots:
            idx.append(int(np.flatnonzero((self.positive_roots == a).all(axis=1))[0]))
        return np.array(idx)

    # -- coordinate maps ---------------------------------------------------
    def to_ambient(self, coords):
        """Simple coordinates (..., n) to ambient vectors (..., d)."""
        return np.asarray(coords) @ self.fundamental_weights

    def to_coords(self, ambient):
        return np.asarray(ambient) @ self._to_coords.T

    def inner(self, x, y):
        """Invariant form of two weights given in simple coordinates."""
        return self._s * np.sum(self.to_ambient(x) * self.to_ambient(y), axis=-1)

    def norm(self, coords):
        """Norm of real weights in simple coordinates."""
        a = self.to_ambient(np.asarray(coords, dtype=float))
        return np.sqrt(self._s * np.sum(a * a, axis=-1))

    def pairing(self, coords, X):
        """<lam, X> for weights in simple coordinates and ambient points X."""
        return self._s * (self.to_ambient(coords) @ np.asarray(X).T)

    def label_weight(self, label):
        """Exact ambient vector of the weight with Dynkin labels ``label``."""
        return _label_weight(self.config.key(), tuple(int(v) for v in label))

    def root_angles(self, X):
        """<alpha, X> for all positive roots; X ambient of shape (..., d)."""
        return self._s * (np.asarray(X) @ self.positive_roots.T.astype(float))

    def delta(self, X):
        """Density prod |sin <alpha,X>|^(m_alpha) in product form."""
        s = np.sin(self.root_angles(X))
        return np.prod(np.abs(s) ** self.multiplicity, axis=-1) if np.isrealobj(s) \
            else np.prod(s ** self.multiplicity, axis=-1)

    def rho_norm(self):
        return float(self.norm(self.rho))

    def describe(self):
        return {
            "family": self.family, "rank": self.rank, "m": self.m,
            "multiplicity": self.multiplicity, "dim": self.dim_space,
            "root_type": self.config.root_type,
            "positive_roots": self.positive_roots.tolist(),
            "simple_roots": self.simple_roots.tolist(),
            "rho": self.rho.tolist(),
            "rho_alpha": (self.rho @ self.alpha_matrix).tolist(),
            "weyl_order": self.order_weyl,
            "period_lattice": self.periods.tolist(),
            "R_small": self.R_small,
        }


@lru_cache(maxsize=None)
def _label_weight(config_key, label):
    data = build_space(SpaceConfig(**json.loads(config_key)))
    c = solve_exact(data.cartan.T.tolist(), list(label))
    out = [Fraction(0)] * data.ambient_dim
    for cj, a in zip(c, data.simple_roots):
        for k in range(data.ambient_dim):
            out[k] += cj * int(a[k])
    return tuple(out)


@lru_cache(maxsize=None)
def _build_cached(key):
    return SymmetricSpaceData(SpaceConfig(**json.loads(key)))


def build_space(config) -> SymmetricSpaceData:
    """Build the root and torus data for ``config`` (a SpaceConfig or preset name)."""
    if isinstance(config, str):
        config = preset(config)
    config.validate()
    return _build_cached(config.key())


def preset(name) -> SpaceConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"preset: unknown preset {name!r} "
                          f"(choose from {', '.join(PRESETS)})") from None


def weyl_group(data):
    """Weyl group as a list of ambient integer matrices."""
    return data.weyl_ambient


def _root_vector(data, root):
    r = np.asarray(root)
    if r.ndim == 0:
        return data.positive_roots[int(r)]
    return r


def lambda_alpha(data, lam, root):
    """``<lam, alpha>/<alpha, alpha>``; ``root`` is an index or an ambient vector."""
    a = np.asarray(_root_vector(data, root), dtype=float)
    if not np.any(a):
        raise ValueError("root must be nonzero")
    amb = data.to_ambient(_coords(lam))
    return complex(np.dot(amb, a) / np.dot(a, a))


def dominant_spherical(lam, data, tol=1e-9):
    """True iff every ``lam_alpha`` is a nonnegative integer."""
    x = _coords(lam)
    if np.max(np.abs(x.imag)) > 1e-12:
        raise ValueError("dominant_spherical needs a real weight")
    la = x.real @ data.alpha_matrix
    return bool(np.all(np.abs(la - np.rint(la)) <= tol) and np.all(np.rint(la) >= 0))


def dominant_weights(data, cutoff):
    """Integer array of the dominant weights with norm <= cutoff, lexicographic."""
    if cutoff < 0:
        raise ValueError("cutoff must be nonnegative")
    n = data.rank
    bounds = [int(math.floor(cutoff / data.norm(np.eye(n)[i]) + 1e-9)) for i in range(n)]
    grids = np.meshgrid(*[np.arange(b + 1) for b in bounds], indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    keep = data.norm(pts) <= cutoff * (1 + 1e-12) + 1e-12
    pts = pts[keep]
    order = np.lexsort(pts.T[::-1])
    return pts[order]


def enumerate_dominant(data, cutoff):
    """Dominant spherical weights with norm <= cutoff as SpectralParameters."""
    return [SpectralParameter(p) for p in dominant_weights(data, cutoff)]


def weyl_orbit_sum(data, lam, H, coords="period"):
    """
    ``sum_w exp(i <w lam, H>)``.

    ``H`` is given in period coordinates (default) or ambient coordinates.
    """
    x = _coords(lam)
    H = np.asarray(H, dtype=float)
    if coords == "period":
        H = H @ data.periods
    amb = data.to_ambient(x)
    out = 0
    for w in data.weyl_ambient:
        out = out + np.exp(1j * data._s * (H @ (w @ amb)))
    return out


class TorusGrid:
    """
    Uniform grid on the torus with nodes offset from the walls.

    Rank one uses nodes ``theta_j = (j + 1/2) h``.  Higher rank uses period
    coordinates ``(j + o)/N`` with an offset ``o`` chosen so that no node lies
    on a wall.

    Attributes
    ----------
    t : ndarray (N,)*n + (n,)
        Period coordinates.
    X : ndarray (N,)*n + (d,)
        Ambient coordinates of the minimal lift into the fundamental domain.
    dist : ndarray (N,)*n
        Distance of the minimal lift from the origin.
    """

    def __init__(self, data, N):
        self.data = data
        self.N = int(N)
        self.n = data.rank
        self.offset = self._choose_offset()
        ax = [(np.arange(self.N) + o) / self.N for o in self.offset]
        mesh = np.meshgrid(*ax, indexing="ij")
        self.t = np.stack(mesh, axis=-1)
        self.shape = (self.N,) * self.n
        s = data._s
        base = self.t @ data.periods
        best = np.full(self.shape, np.inf)
        lift = np.zeros(self.shape + (data.ambient_dim,))
        for c in itertools.product(range(-2, 2), repeat=self.n):
            Y = base + np.asarray(c, float) @ data.periods
            d2 = s * np.einsum("...i,...i->...", Y, Y)
            better = d2 < best - 1e-12
            best = np.where(better, d2, best)
            lift[better] = Y[better]
        self.X = lift
        self.dist = np.sqrt(best)
        self.h = min(math.sqrt(s * p @ p) for p in data.periods) / self.N

    def _choose_offset(self):
        if self.n == 1:
            return (0.5,)
        for cand in [(0.25,) * self.n, (0.25, 0.375, 0.125, 0.3125, 0.1875)[:self.n],
                     (1 / 3,) + (0.2,) * (self.n - 1)]:
            # the offset works for every N if <alpha, H>/pi is never an integer
            lab = self.data.root_labels  # <alpha, gamma_j>/pi = labels of alpha
            ok = True
            for row in lab:
                frac = (np.asarray(cand) @ row) % 1.0
                if min(frac, 1 - frac) < 1e-9:
                    ok = False
            if ok:
                return tuple(cand)
        raise RuntimeError("no wall-avoiding grid offset found")

    @cached_property
    def delta(self):
        return self.data.delta(self.X)

    @property
    def size(self):
        return self.N ** self.n

    def frequencies(self):
        """Integer FFT frequencies along one axis."""
        return np.fft.fftfreq(self.N, 1.0 / self.N).astype(int)


@lru_cache(maxsize=8)
def _grid_cached(key, N):
    return TorusGrid(build_space(SpaceConfig(**json.loads(key))), N)


def torus_grid(data, N=None):
    """Cached :class:`TorusGrid` for ``data`` with ``N`` nodes per direction."""
    return _grid_cached(data.config.key(), int(N or data.config.grid_size))
